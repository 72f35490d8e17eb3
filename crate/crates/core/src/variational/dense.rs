//! Time stepping of d-level problems under bare, counter-diabatic or Floquet drives.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{agp_exact, DriveAnsatz, FitTarget, FrozenPoint, ManyBodyProblem};
use crate::error::{Error, Result};
use crate::evolve::{
    EvolutionMeta, EvolutionResult, QuantumState, StepPolicy, Stepper, A1, A2, C1, C2, NORM_TOLERANCE,
};
use crate::numerics::herm_exp;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenseDrive {
    /// `H(λ(t))`
    Bare,
    /// `H(λ(t)) + λ̇ A_λ`
    ExactCd,
    /// `H(λ)(1 − Ωω sin ωt) + g(t)H₁`, with `g₀..g_L` refitted by least
    /// squares at every stepper node from the local `(λ, λ̇)`.
    Floquet {
        capital_omega: f64,
        omega: f64,
        harmonics: usize,
        target: FitTarget,
    },
}

impl DenseDrive {
    pub fn label(&self) -> &'static str {
        match self {
            DenseDrive::Bare => "dense-bare",
            DenseDrive::ExactCd => "dense-cd",
            DenseDrive::Floquet { .. } => "dense-floquet",
        }
    }

    fn generator(&self, problem: &ManyBodyProblem, t: f64) -> Result<DMatrix<C64>> {
        let p = problem.schedule().point(t);
        let h = problem.hamiltonian(p.value);
        match *self {
            DenseDrive::Bare => Ok(h),
            DenseDrive::ExactCd => Ok(h + agp_exact(problem, p.value)?.map(|z| z * p.rate)),
            DenseDrive::Floquet { capital_omega, omega, harmonics, target } => {
                let frozen = FrozenPoint::new(problem, p.value)?;
                let a: DriveAnsatz = frozen.fit(p.rate, capital_omega, harmonics, target)?;
                let phase = omega * t;
                let scale = 1.0 - capital_omega * omega * phase.sin();
                Ok(h.map(|z| z * scale) + problem.h1().map(|z| z * a.g_at(phase)))
            }
        }
    }
}

/// Propagate the ground state of `H(λ(0))` and report the population of the
/// instantaneous ground state of `H(λ(t))` on the recording grid.
///
/// For the Floquet drive this population is the same in the lab and the
/// rotating frame, because `exp(−iΩH cos ωt)` is diagonal in the eigenbasis.
pub fn evolve_dense(problem: &ManyBodyProblem, drive: &DenseDrive, policy: &StepPolicy) -> Result<EvolutionResult> {
    if policy.stepper != Stepper::Cfm4 {
        return Err(Error::contract("the d-level stepper only implements cfm4"));
    }
    let tau = problem.schedule().tau();
    let (mods, strobe) = match *drive {
        DenseDrive::Floquet { omega, harmonics, capital_omega, .. } => {
            if !(omega.is_finite() && omega > 0.0 && capital_omega.is_finite()) {
                return Err(Error::domain(format!("Floquet drive needs ω > 0 and finite Ω (ω = {omega})")));
            }
            (vec![omega * harmonics.max(1) as f64], Some(omega))
        }
        _ => (Vec::new(), None),
    };
    let grid = policy.grid_for(tau, &mods, strobe)?;
    let dt = grid.dt;
    let n = grid.full_steps;
    let stride = policy.record_stride * policy.refinement;
    let spp = grid.steps_per_period;

    let mut psi: DVector<C64> = problem.spectrum(problem.schedule().point(0.0).value).ground_state();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut fids = Vec::new();
    let mut strobes = Vec::new();
    let mut record = |t: f64, psi: &DVector<C64>, strobe: bool| {
        let ground = problem.spectrum(problem.schedule().point(t.min(tau)).value).ground_state();
        if strobe {
            strobes.push(times.len());
        }
        fids.push(ground.dotc(psi).norm_sqr().min(1.0));
        times.push(t);
        states.push(QuantumState::from_amplitudes(psi.iter().copied().collect()));
    };
    record(0.0, &psi, spp.is_some());

    let step = |psi: &DVector<C64>, t: f64, h: f64| -> Result<DVector<C64>> {
        let g1 = drive.generator(problem, t + C1 * h)?;
        let g2 = drive.generator(problem, t + C2 * h)?;
        let first = g1.map(|z| z * A2) + g2.map(|z| z * A1);
        let second = g1.map(|z| z * A1) + g2.map(|z| z * A2);
        Ok(herm_exp(&second, h)? * (herm_exp(&first, h)? * psi))
    };
    for k in 0..n {
        psi = step(&psi, k as f64 * dt, dt)?;
        let done = k + 1;
        let strobe = spp.is_some_and(|p| done % p == 0);
        if done % stride == 0 || strobe || (done == n && grid.tail == 0.0) {
            record(done as f64 * dt, &psi, strobe);
        }
    }
    if grid.tail > 0.0 {
        psi = step(&psi, n as f64 * dt, grid.tail)?;
        record(tau, &psi, false);
    }

    let norm_drift = (psi.norm() - 1.0).abs();
    if norm_drift > NORM_TOLERANCE || !norm_drift.is_finite() {
        return Err(Error::Accuracy(format!("norm drifted by {norm_drift:.3e} over {} steps", grid.total_steps())));
    }
    let states = states.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EvolutionResult {
        times,
        states,
        fidelities: fids,
        strobe_indices: strobes,
        meta: EvolutionMeta {
            label: drive.label().to_string(),
            stepper: Stepper::Cfm4,
            dt,
            steps: grid.total_steps(),
            norm_drift,
            max_step_angle: f64::NAN,
            detuning: 0.0,
            noise_seed: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::SweepSchedule;
    use crate::variational::tests::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Three well-separated levels. With `L = 5` the three odd harmonics can
    /// match the three transition elements exactly.
    fn gapped_problem() -> ManyBodyProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut h0 = random_hermitian(3, &mut rng).map(|z| z * 0.3);
        let h1 = random_hermitian(3, &mut rng).map(|z| z * 0.6);
        for (k, e) in [-1.0, 0.2, 1.5].into_iter().enumerate() {
            h0[(k, k)] += e;
        }
        ManyBodyProblem::new(h0, h1, SweepSchedule::cubic(1.0, 1.0).unwrap()).unwrap()
    }

    fn policy() -> StepPolicy {
        StepPolicy { base_dt: Some(1.0 / 2048.0), record_stride: 64, ..StepPolicy::default() }
    }

    fn final_fid(drive: DenseDrive) -> f64 {
        *evolve_dense(&gapped_problem(), &drive, &policy()).unwrap().fidelities.last().unwrap()
    }

    #[test]
    fn exact_cd_is_transitionless() {
        let r = evolve_dense(&gapped_problem(), &DenseDrive::ExactCd, &policy()).unwrap();
        assert!(r.fidelities.iter().all(|f| *f >= 0.9999), "{:?}", r.fidelities.last());
        assert!(r.meta.norm_drift < 1e-9);
        assert!((r.final_time() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bare_fast_sweep_leaks() {
        assert!(final_fid(DenseDrive::Bare) < 0.99);
    }

    #[test]
    fn floquet_approaches_cd_with_frequency() {
        let cd = final_fid(DenseDrive::ExactCd);
        let bare = final_fid(DenseDrive::Bare);
        let floquet = |omega: f64| {
            final_fid(DenseDrive::Floquet {
                capital_omega: 1.2,
                omega,
                harmonics: 5,
                target: FitTarget::FrameCompensated,
            })
        };
        let errs: Vec<f64> = [40.0, 80.0, 160.0].iter().map(|&w| (cd - floquet(w)).abs()).collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        assert!(errs[2] < 1e-3, "{errs:?}");
        assert!(cd - errs[0] > bare, "{errs:?} vs bare {bare}");
    }

    #[test]
    fn qubit_floquet_drive_is_counter_diabatic() {
        let p = ManyBodyProblem::qubit(0.6, SweepSchedule::cubic(3.0, 3.0).unwrap()).unwrap();
        let drive = DenseDrive::Floquet {
            capital_omega: 0.3,
            omega: 60.0,
            harmonics: 1,
            target: FitTarget::FrameCompensated,
        };
        let r = evolve_dense(&p, &drive, &StepPolicy::default()).unwrap();
        let bare = evolve_dense(&p, &DenseDrive::Bare, &StepPolicy::default()).unwrap();
        let f = *r.fidelities.last().unwrap();
        assert!(f > 0.999, "{f}");
        assert!(f > *bare.fidelities.last().unwrap());
    }
}
