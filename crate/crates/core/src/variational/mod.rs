//! Floquet fast-forward drives for a general d-level Hamiltonian `H = H₀ + λH₁`.
//!
//! The drive in the lab frame is `H(λ)(1 − Ωω sin ωt) + g(t)H₁` with
//! `g(t) = Σ_l g_l cos(lωt)`. In the frame `V = exp(−iΩH cos ωt)` the first
//! Magnus term of the `g(t)H₁` part is the Bessel-weighted matrix
//! `Σ_l i^l g_l J_l(Ω(ε_n − ε_m)) ⟨n|H₁|m⟩`, which the fit matches against the
//! adiabatic gauge potential `λ̇A_λ`.

mod dense;
mod fit;

pub use dense::{evolve_dense, DenseDrive};
pub use fit::{nelder_mead, variational_fit, FitOptions, SimplexResult, VariationalFit};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{bessel_j, check_hermitian, eigh, hermiticity_error};
use crate::schedules::SweepSchedule;

/// Smallest level spacing, relative to the spectral scale, accepted by [`agp_exact`].
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;
/// Hermiticity tolerance enforced on problem matrices.
pub const PROBLEM_HERMITICITY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyProblem {
    h0: DMatrix<C64>,
    h1: DMatrix<C64>,
    schedule: SweepSchedule,
}

impl ManyBodyProblem {
    pub fn new(h0: DMatrix<C64>, h1: DMatrix<C64>, schedule: SweepSchedule) -> Result<Self> {
        check_hermitian(&h0, PROBLEM_HERMITICITY, "H0")?;
        check_hermitian(&h1, PROBLEM_HERMITICITY, "H1")?;
        if h0.nrows() < 2 {
            return Err(Error::contract(format!("dimension must be at least 2, got {}", h0.nrows())));
        }
        if h0.shape() != h1.shape() {
            return Err(Error::contract(format!(
                "H0 is {}x{} but H1 is {}x{}",
                h0.nrows(),
                h0.ncols(),
                h1.nrows(),
                h1.ncols()
            )));
        }
        Ok(ManyBodyProblem { h0, h1, schedule })
    }

    /// `H₀ = Δσz`, `H₁ = σx`.
    pub fn qubit(delta: f64, schedule: SweepSchedule) -> Result<Self> {
        let z = C64::new(0.0, 0.0);
        let h0 = DMatrix::from_row_slice(2, 2, &[C64::new(delta, 0.0), z, z, C64::new(-delta, 0.0)]);
        let h1 = DMatrix::from_row_slice(2, 2, &[z, C64::new(1.0, 0.0), C64::new(1.0, 0.0), z]);
        Self::new(h0, h1, schedule)
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn h0(&self) -> &DMatrix<C64> {
        &self.h0
    }

    pub fn h1(&self) -> &DMatrix<C64> {
        &self.h1
    }

    pub fn schedule(&self) -> &SweepSchedule {
        &self.schedule
    }

    /// Same matrices, different sweep.
    pub fn with_schedule(&self, schedule: SweepSchedule) -> Self {
        ManyBodyProblem { schedule, ..self.clone() }
    }

    pub fn hamiltonian(&self, lambda: f64) -> DMatrix<C64> {
        &self.h0 + self.h1.map(|z| z * lambda)
    }

    pub fn spectrum(&self, lambda: f64) -> SpectralData {
        let (energies, vectors) = eigh(&self.hamiltonian(lambda));
        SpectralData { energies, vectors }
    }
}

/// Eigen-decomposition of `H(λ)` at a frozen `λ`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub energies: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: DMatrix<C64>,
}

impl SpectralData {
    /// `U† M U`
    pub fn to_eigenbasis(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        self.vectors.adjoint() * m * &self.vectors
    }

    /// `U M U†`
    pub fn from_eigenbasis(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        &self.vectors * m * self.vectors.adjoint()
    }

    pub fn ground_state(&self) -> DVector<C64> {
        self.vectors.column(0).into_owned()
    }

    /// Fails with the closest adjacent pair if any relative gap is below `threshold`.
    pub fn check_gaps(&self, threshold: f64) -> Result<()> {
        let scale = self.energies.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(f64::MIN_POSITIVE);
        for (k, w) in self.energies.windows(2).enumerate() {
            let gap = w[1] - w[0];
            if gap < threshold * scale {
                return Err(Error::Degeneracy { lower: k, upper: k + 1, gap });
            }
        }
        Ok(())
    }
}

/// The exact adiabatic gauge potential `A_λ = Σ i⟨n|H₁|m⟩/(ε_m − ε_n) |n⟩⟨m|`.
pub fn agp_exact(problem: &ManyBodyProblem, lambda: f64) -> Result<DMatrix<C64>> {
    let frozen = FrozenPoint::new(problem, lambda)?;
    Ok(frozen.spec.from_eigenbasis(&frozen.agp))
}

/// Drive parameters `(Ω, g₀..g_L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveAnsatz {
    pub capital_omega: f64,
    pub g: Vec<f64>,
}

impl DriveAnsatz {
    pub fn new(capital_omega: f64, g: Vec<f64>) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::contract("a drive ansatz needs at least g_0"));
        }
        if !capital_omega.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("drive ansatz coefficients must be finite"));
        }
        Ok(DriveAnsatz { capital_omega, g })
    }

    /// Highest harmonic `L`.
    pub fn harmonics(&self) -> usize {
        self.g.len() - 1
    }

    /// `g(t)` at phase `ωt`.
    pub fn g_at(&self, phase: f64) -> f64 {
        self.g.iter().enumerate().map(|(l, g)| g * (l as f64 * phase).cos()).sum()
    }
}

/// What the off-diagonal Magnus term is matched against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitTarget {
    /// `λ̇ A_λ`
    #[default]
    GaugePotential,
    /// `J₀(Ω(ε_n − ε_m)) λ̇ (A_λ)_nm`. Moving `V` along with `H(λ(t))` adds
    /// `(1 − J₀) λ̇ A_λ` to the averaged generator, so this is the target
    /// that makes the rotating-frame dynamics exactly counter-diabatic.
    FrameCompensated,
}

/// `i^l` as a complex number.
fn i_pow(l: usize) -> C64 {
    match l % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Everything at one frozen `λ` that the Magnus term and its fit need.
pub(crate) struct FrozenPoint {
    pub(crate) spec: SpectralData,
    /// `⟨n|H₁|m⟩`
    pub(crate) h1: DMatrix<C64>,
    /// `A_λ` in the eigenbasis.
    pub(crate) agp: DMatrix<C64>,
}

impl FrozenPoint {
    pub(crate) fn new(problem: &ManyBodyProblem, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::domain(format!("λ must be finite, got {lambda}")));
        }
        let spec = problem.spectrum(lambda);
        spec.check_gaps(DEGENERACY_THRESHOLD)?;
        let h1 = spec.to_eigenbasis(problem.h1());
        let d = h1.nrows();
        let e = &spec.energies;
        let agp = DMatrix::from_fn(d, d, |n, m| {
            if n == m {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, 1.0) * h1[(n, m)] / (e[m] - e[n])
            }
        });
        Ok(FrozenPoint { spec, h1, agp })
    }

    fn dim(&self) -> usize {
        self.h1.nrows()
    }

    fn gap(&self, n: usize, m: usize) -> f64 {
        self.spec.energies[n] - self.spec.energies[m]
    }

    /// Magnus term in the eigenbasis.
    fn magnus(&self, ansatz: &DriveAnsatz) -> Result<DMatrix<C64>> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for n in 0..d {
            for m in 0..d {
                let z = ansatz.capital_omega * self.gap(n, m);
                let mut w = C64::new(0.0, 0.0);
                for (l, g) in ansatz.g.iter().enumerate() {
                    if *g != 0.0 {
                        w += i_pow(l) * (g * bessel_j(l as u32, z)?);
                    }
                }
                out[(n, m)] = w * self.h1[(n, m)];
            }
        }
        Ok(out)
    }

    fn target(&self, rate: f64, capital_omega: f64, target: FitTarget, n: usize, m: usize) -> Result<C64> {
        let a = self.agp[(n, m)] * rate;
        Ok(match target {
            FitTarget::GaugePotential => a,
            FitTarget::FrameCompensated => a * bessel_j(0, capital_omega * self.gap(n, m))?,
        })
    }

    /// Frobenius norm of `offdiag(H⁽⁰⁾) − target` over all `n ≠ m`.
    pub(crate) fn residual(&self, ansatz: &DriveAnsatz, rate: f64, target: FitTarget) -> Result<f64> {
        let d = self.dim();
        let mut sum = 0.0;
        // Both sides are Hermitian, so the upper triangle carries half the norm.
        for n in 0..d {
            for m in n + 1..d {
                let z = ansatz.capital_omega * self.gap(n, m);
                let mut w = C64::new(0.0, 0.0);
                for (l, g) in ansatz.g.iter().enumerate() {
                    w += i_pow(l) * (g * bessel_j(l as u32, z)?);
                }
                let diff = w * self.h1[(n, m)] - self.target(rate, ansatz.capital_omega, target, n, m)?;
                sum += 2.0 * diff.norm_sqr();
            }
        }
        Ok(sum.sqrt())
    }

    /// Least-squares `g₀..g_L` at fixed `Ω`.
    pub(crate) fn fit(&self, rate: f64, capital_omega: f64, harmonics: usize, target: FitTarget) -> Result<DriveAnsatz> {
        let d = self.dim();
        let pairs = d * (d - 1) / 2;
        let cols = harmonics + 1;
        let mut design = DMatrix::<f64>::zeros(2 * pairs, cols);
        let mut rhs = DVector::<f64>::zeros(2 * pairs);
        let mut row = 0;
        for n in 0..d {
            for m in n + 1..d {
                let z = capital_omega * self.gap(n, m);
                for l in 0..cols {
                    let c = i_pow(l) * bessel_j(l as u32, z)? * self.h1[(n, m)];
                    design[(row, l)] = c.re;
                    design[(row + 1, l)] = c.im;
                }
                let t = self.target(rate, capital_omega, target, n, m)?;
                rhs[row] = t.re;
                rhs[row + 1] = t.im;
                row += 2;
            }
        }
        let svd = design.svd(true, true);
        let smax = svd.singular_values.max();
        let eps = if smax > 0.0 { 1e-12 * smax } else { f64::MIN_POSITIVE };
        let g = svd.solve(&rhs, eps).map_err(|e| Error::Numerical {
            message: format!("coefficient least squares failed: {e}"),
            residual: f64::NAN,
        })?;
        DriveAnsatz::new(capital_omega, g.iter().copied().collect())
    }
}

/// First Magnus term `H⁽⁰⁾` of `g(t)H₁` in the frame `exp(−iΩH cos ωt)`, in the original basis.
pub fn magnus_h0(problem: &ManyBodyProblem, ansatz: &DriveAnsatz, lambda: f64) -> Result<DMatrix<C64>> {
    let frozen = FrozenPoint::new(problem, lambda)?;
    let m = frozen.spec.from_eigenbasis(&frozen.magnus(ansatz)?);
    let err = hermiticity_error(&m);
    if err > 1e-10 {
        return Err(Error::Numerical {
            message: "Magnus term lost Hermiticity".into(),
            residual: err,
        });
    }
    Ok(m)
}

/// `‖offdiag(H⁽⁰⁾) − target‖_F` in the instantaneous eigenbasis.
pub fn fit_objective(
    problem: &ManyBodyProblem,
    ansatz: &DriveAnsatz,
    lambda: f64,
    rate: f64,
    target: FitTarget,
) -> Result<f64> {
    FrozenPoint::new(problem, lambda)?.residual(ansatz, rate, target)
}

/// Linear least-squares `g₀..g_L` at fixed `Ω`, with the resulting residual.
pub fn fit_coefficients(
    problem: &ManyBodyProblem,
    lambda: f64,
    rate: f64,
    capital_omega: f64,
    harmonics: usize,
    target: FitTarget,
) -> Result<(DriveAnsatz, f64)> {
    let frozen = FrozenPoint::new(problem, lambda)?;
    let ansatz = frozen.fit(rate, capital_omega, harmonics, target)?;
    let r = frozen.residual(&ansatz, rate, target)?;
    Ok((ansatz, r))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::numerics::{integrate, herm_exp};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let a = DMatrix::<C64>::from_fn(d, d, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&a + a.adjoint()).map(|z| z * 0.5)
    }

    pub(crate) fn random_problem(d: usize, seed: u64) -> ManyBodyProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h0 = random_hermitian(d, &mut rng);
        let h1 = random_hermitian(d, &mut rng);
        ManyBodyProblem::new(h0, h1, SweepSchedule::linear(1.0, 5.0).unwrap()).unwrap()
    }

    fn sigma_y() -> DMatrix<C64> {
        let z = C64::new(0.0, 0.0);
        DMatrix::from_row_slice(2, 2, &[z, C64::new(0.0, -1.0), C64::new(0.0, 1.0), z])
    }

    #[test]
    fn qubit_gauge_potential_is_sigma_y() {
        let delta = 0.6;
        let p = ManyBodyProblem::qubit(delta, SweepSchedule::linear(2.0, 1.0).unwrap()).unwrap();
        for lambda in [-3.0, -0.4, 0.0, 0.7, 5.0] {
            let a = agp_exact(&p, lambda).unwrap();
            let want = sigma_y().map(|z| z * (delta / (2.0 * (delta * delta + lambda * lambda))));
            assert!((a - want).norm() < 1e-10, "λ = {lambda}");
        }
    }

    #[test]
    fn commuting_drive_has_no_gauge_potential() {
        let h0 = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(0.5, 0.0), C64::new(2.0, 0.0)]));
        let h1 = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(0.3, 0.0), C64::new(-0.2, 0.0), C64::new(0.1, 0.0)]));
        let p = ManyBodyProblem::new(h0, h1, SweepSchedule::linear(1.0, 1.0).unwrap()).unwrap();
        assert!(agp_exact(&p, 0.4).unwrap().norm() < 1e-14);
    }

    #[test]
    fn degenerate_spectrum_is_rejected() {
        let p = ManyBodyProblem::qubit(0.0, SweepSchedule::linear(1.0, 1.0).unwrap()).unwrap();
        assert!(matches!(agp_exact(&p, 0.0), Err(Error::Degeneracy { lower: 0, upper: 1, .. })));
    }

    #[test]
    fn invalid_problems_are_contract_errors() {
        let s = SweepSchedule::linear(1.0, 1.0).unwrap();
        let one = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        assert!(matches!(ManyBodyProblem::new(one.clone(), one, s), Err(Error::Contract(_))));
        let mut bad = DMatrix::<C64>::zeros(2, 2);
        bad[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(ManyBodyProblem::new(bad, DMatrix::zeros(2, 2), s), Err(Error::Contract(_))));
        let big = DMatrix::<C64>::zeros(65, 65);
        assert!(ManyBodyProblem::new(big.clone(), big, s).is_err());
    }

    /// `A_nm = i⟨n|∂λ m⟩` from central differences of phase-aligned eigenvectors.
    fn finite_difference_agp(p: &ManyBodyProblem, lambda: f64) -> DMatrix<C64> {
        let h = 1e-5;
        let s0 = p.spectrum(lambda);
        let aligned = |l: f64| {
            let mut v = p.spectrum(l).vectors;
            for k in 0..v.ncols() {
                let overlap = s0.vectors.column(k).dotc(&v.column(k));
                let phase = C64::from_polar(1.0, -overlap.arg());
                for z in v.column_mut(k).iter_mut() {
                    *z *= phase;
                }
            }
            v
        };
        let dv = (aligned(lambda + h) - aligned(lambda - h)).map(|z| z / (2.0 * h));
        let mut a = s0.vectors.adjoint() * dv;
        for k in 0..a.nrows() {
            a[(k, k)] = C64::new(0.0, 0.0);
        }
        s0.from_eigenbasis(&a.map(|z| z * C64::new(0.0, 1.0)))
    }

    #[test]
    fn gauge_potential_matches_eigenvector_derivative() {
        let p = random_problem(6, 11);
        for lambda in [-0.8, 0.1, 0.9] {
            let exact = agp_exact(&p, lambda).unwrap();
            let fd = finite_difference_agp(&p, lambda);
            assert!((&exact - &fd).norm() < 1e-6, "λ = {lambda}: {}", (exact - fd).norm());
            assert!(hermiticity_error(&exact) < 1e-11);
            let eig = p.spectrum(lambda).to_eigenbasis(&exact);
            for k in 0..6 {
                assert!(eig[(k, k)].norm() < 1e-12);
            }
        }
    }

    /// `(1/T)∫ g(t) V†H₁V dt` with `V = exp(−iΩH cos ωt)`, by quadrature per entry.
    fn quadrature_magnus(p: &ManyBodyProblem, a: &DriveAnsatz, lambda: f64) -> DMatrix<C64> {
        let hm = p.hamiltonian(lambda);
        let d = p.dim();
        let omega = 1.0;
        let period = std::f64::consts::TAU / omega;
        let at = |t: f64| {
            let v = herm_exp(&hm, a.capital_omega * (omega * t).cos()).unwrap();
            (v.adjoint() * p.h1() * v).map(|z| z * a.g_at(omega * t))
        };
        DMatrix::from_fn(d, d, |n, m| {
            let re = integrate(&|t| at(t)[(n, m)].re, 0.0, period, 1e-12).unwrap();
            let im = integrate(&|t| at(t)[(n, m)].im, 0.0, period, 1e-12).unwrap();
            C64::new(re, im) / period
        })
    }

    #[test]
    fn magnus_term_matches_period_quadrature() {
        for (d, seed) in [(2, 1), (3, 2), (4, 3), (4, 4)] {
            let p = random_problem(d, seed);
            let a = DriveAnsatz::new(0.9, vec![0.3, -0.7, 0.45, 0.2]).unwrap();
            let got = magnus_h0(&p, &a, 0.35).unwrap();
            let want = quadrature_magnus(&p, &a, 0.35);
            assert!((&got - &want).norm() < 1e-8, "d = {d}: {:.3e}", (got - want).norm());
        }
    }

    #[test]
    fn magnus_trivial_cases() {
        let p = random_problem(3, 5);
        let bare = magnus_h0(&p, &DriveAnsatz::new(0.0, vec![1.7]).unwrap(), 0.2).unwrap();
        assert!((bare - p.h1().map(|z| z * 1.7)).norm() < 1e-13);
        let zero = magnus_h0(&p, &DriveAnsatz::new(1.3, vec![0.0; 4]).unwrap(), 0.2).unwrap();
        assert!(zero.norm() < 1e-15);
    }

    #[test]
    fn qubit_fit_recovers_closed_form() {
        let (delta, lambda, rate) = (0.4, 0.9, -2.5);
        let p = ManyBodyProblem::qubit(delta, SweepSchedule::linear(1.0, 1.0).unwrap()).unwrap();
        let e = (delta * delta + lambda * lambda).sqrt();
        let (a, r) = fit_coefficients(&p, lambda, rate, 1.1, 1, FitTarget::GaugePotential).unwrap();
        assert!(r < 1e-12);
        let j1 = bessel_j(1, 2.0 * a.capital_omega * e).unwrap();
        assert!((a.g[1] * j1 + rate / (2.0 * e)).abs() < 1e-12);
        assert!(a.g[0].abs() < 1e-12);
    }

    #[test]
    fn static_sweep_needs_no_drive() {
        let p = random_problem(4, 8);
        let (a, r) = fit_coefficients(&p, 0.3, 0.0, 0.7, 3, FitTarget::GaugePotential).unwrap();
        assert!(r < 1e-14);
        assert!(a.g.iter().all(|g| g.abs() < 1e-13));
    }

    #[test]
    fn frame_compensated_target_differs_by_j0() {
        let p = random_problem(3, 12);
        let (a, r) = fit_coefficients(&p, 0.2, 1.0, 0.8, 3, FitTarget::FrameCompensated).unwrap();
        let plain = fit_objective(&p, &a, 0.2, 1.0, FitTarget::GaugePotential).unwrap();
        assert!((fit_objective(&p, &a, 0.2, 1.0, FitTarget::FrameCompensated).unwrap() - r).abs() < 1e-14);
        assert!(plain > r);
    }

    proptest! {
        #[test]
        fn magnus_is_linear_in_g(seed in 0u64..1000, scale in -3.0..3.0f64) {
            let p = random_problem(3, seed);
            let a = DriveAnsatz::new(0.6, vec![0.2, -0.5, 0.3]).unwrap();
            let b = DriveAnsatz::new(0.6, a.g.iter().map(|g| g * scale).collect()).unwrap();
            let ma = magnus_h0(&p, &a, 0.1).unwrap();
            let mb = magnus_h0(&p, &b, 0.1).unwrap();
            prop_assert!((ma.map(|z| z * scale) - mb).norm() < 1e-12);
        }

        #[test]
        fn bessel_arguments_are_scale_invariant(seed in 0u64..1000, s in 0.2..5.0f64) {
            // H → sH and Ω → Ω/s leave every Ω(ε_n − ε_m) fixed, so only the
            // explicit H₁ factor scales.
            let p = random_problem(3, seed);
            let scaled = ManyBodyProblem::new(
                p.h0().map(|z| z * s), p.h1().map(|z| z * s), *p.schedule()).unwrap();
            let a = DriveAnsatz::new(0.8, vec![0.1, 0.6, -0.2, 0.4]).unwrap();
            let b = DriveAnsatz::new(0.8 / s, a.g.clone()).unwrap();
            let ma = magnus_h0(&p, &a, 0.25).unwrap();
            let mb = magnus_h0(&scaled, &b, 0.25).unwrap();
            prop_assert!((ma.map(|z| z * s) - mb).norm() < 1e-11 * s.max(1.0));
        }

        #[test]
        fn magnus_stays_hermitian(seed in 0u64..1000, omega in 0.0..2.0f64) {
            let p = random_problem(4, seed);
            let a = DriveAnsatz::new(omega, vec![0.3, 0.2, -0.4, 0.1, 0.05]).unwrap();
            prop_assert!(hermiticity_error(&magnus_h0(&p, &a, -0.3).unwrap()) < 1e-12);
        }
    }
}
