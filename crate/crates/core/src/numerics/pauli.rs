//! Closed-form SU(2) propagators for piecewise-constant two-level generators.

use num_complex::Complex64 as C64;

/// Real coefficients of `(σx, σy, σz)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PauliVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PauliVector {
    pub const ZERO: PauliVector = PauliVector { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        PauliVector { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        PauliVector::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn add(self, o: PauliVector) -> Self {
        PauliVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// A 2×2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(pub [[C64; 2]; 2]);

impl Unitary2 {
    pub fn identity() -> Self {
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        Unitary2([[o, z], [z, o]])
    }

    pub fn mul(&self, rhs: &Unitary2) -> Unitary2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Unitary2(out)
    }

    pub fn dagger(&self) -> Unitary2 {
        let a = &self.0;
        Unitary2([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }

    pub fn apply(&self, psi: [C64; 2]) -> [C64; 2] {
        let a = &self.0;
        [a[0][0] * psi[0] + a[0][1] * psi[1], a[1][0] * psi[0] + a[1][1] * psi[1]]
    }

    /// Largest entry of `|U U† − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.mul(&self.dagger());
        let id = Unitary2::identity();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((p.0[i][j] - id.0[i][j]).norm());
            }
        }
        worst
    }
}

/// `exp(−i (a·σ) dt) = cos(|a|dt) I − i sin(|a|dt) (â·σ)`.
pub fn pauli_exp(a: PauliVector, dt: f64) -> Unitary2 {
    let n = a.norm();
    let phi = n * dt;
    let c = phi.cos();
    // sin(φ)/|a| → dt as |a| → 0
    let s = if phi.abs() < 1e-8 {
        dt * (1.0 - phi * phi / 6.0)
    } else {
        phi.sin() / n
    };
    let (x, y, z) = (a.x * s, a.y * s, a.z * s);
    Unitary2([
        [C64::new(c, -z), C64::new(-y, -x)],
        [C64::new(y, -x), C64::new(c, z)],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &Unitary2, b: &Unitary2, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a.0[i][j] - b.0[i][j]).norm() <= tol))
    }

    #[test]
    fn zero_generator_is_identity() {
        assert_eq!(pauli_exp(PauliVector::ZERO, 3.0), Unitary2::identity());
    }

    #[test]
    fn z_rotation_closed_form() {
        let delta = 0.7;
        let u = pauli_exp(PauliVector::new(0.0, 0.0, delta), std::f64::consts::PI / (2.0 * delta));
        let want = Unitary2([
            [C64::new(0.0, -1.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
        ]);
        assert!(close(&u, &want, 1e-15));
    }

    #[test]
    fn matches_pauli_matrices() {
        // exp(−iσx π/2) = −iσx, and likewise for y
        let ux = pauli_exp(PauliVector::new(1.0, 0.0, 0.0), std::f64::consts::FRAC_PI_2);
        assert!((ux.0[0][1] - C64::new(0.0, -1.0)).norm() < 1e-15);
        let uy = pauli_exp(PauliVector::new(0.0, 1.0, 0.0), std::f64::consts::FRAC_PI_2);
        assert!((uy.0[0][1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((uy.0[1][0] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn unitary(x in -50.0..50.0f64, y in -50.0..50.0f64, z in -50.0..50.0f64, dt in 0.0..2.0f64) {
            prop_assert!(pauli_exp(PauliVector::new(x, y, z), dt).unitarity_error() < 1e-14);
        }

        #[test]
        fn composition(x in -20.0..20.0f64, y in -20.0..20.0f64, z in -20.0..20.0f64, dt in 0.0..0.5f64) {
            let a = PauliVector::new(x, y, z);
            let one = pauli_exp(a, dt);
            prop_assert!(close(&one.mul(&one), &pauli_exp(a, 2.0 * dt), 1e-13));
        }

        #[test]
        fn tiny_generators_are_smooth(z in -1e-10..1e-10f64, dt in 0.0..1.0f64) {
            let u = pauli_exp(PauliVector::new(0.0, 0.0, z), dt);
            prop_assert!((u.0[0][0] - C64::new(1.0, -z * dt)).norm() < 1e-18);
        }
    }
}
