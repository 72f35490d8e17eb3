//! Derivative-free search over `(Ω, g₀..g_L)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::{DriveAnsatz, FitTarget, FrozenPoint, ManyBodyProblem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Total objective evaluations across all restarts.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    pub target: FitTarget,
    /// Points of the initial `Ω` scan.
    pub omega_grid: usize,
    /// Largest `Ω · (ε_max − ε_min)` visited by the initial scan.
    pub max_bessel_argument: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            budget: 2000,
            restarts: 5,
            seed: 0,
            target: FitTarget::GaugePotential,
            omega_grid: 64,
            max_bessel_argument: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalFit {
    pub ansatz: DriveAnsatz,
    pub residual: f64,
    /// Residual at the starting point of the simplex search.
    pub initial_residual: f64,
    /// At least one restart met the simplex tolerance within its budget.
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead minimisation of `f` from `x0` with initial edge lengths `steps`.
///
/// Stops once the value spread falls below `ftol` and the simplex diameter
/// below `xtol`, or after `max_evals` evaluations. Non-finite values are
/// treated as `+∞`, so the search retreats from them.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    max_evals: usize,
    ftol: f64,
    xtol: f64,
) -> SimplexResult {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += steps[k];
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let mut converged = false;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if worst - best <= ftol && diameter <= xtol {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
            .collect();
        let towards = |coef: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + coef * (c - w)).collect()
        };
        let xr = towards(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = towards(2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let x = towards(0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            } else {
                let x = towards(-0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for (xi, bi) in vertex.0.iter_mut().zip(&x_best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    vertex.1 = eval(&vertex.0, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    SimplexResult { x, value, evaluations: evals, converged }
}

/// Best `(Ω, g₀..g_L)` for the off-diagonal Magnus term at frozen `(λ, λ̇)`.
///
/// The simplex starts from the best point of an `Ω` scan with least-squares
/// `g`; further restarts perturb that point at random. The returned residual
/// never exceeds the starting one.
pub fn variational_fit(
    problem: &ManyBodyProblem,
    lambda: f64,
    rate: f64,
    harmonics: usize,
    options: &FitOptions,
) -> Result<VariationalFit> {
    if harmonics < 1 {
        return Err(Error::contract("the variational drive needs at least one harmonic"));
    }
    if options.budget == 0 || options.restarts == 0 || options.omega_grid == 0 {
        return Err(Error::contract("budget, restarts and omega_grid must be positive"));
    }
    if !rate.is_finite() {
        return Err(Error::domain(format!("λ̇ must be finite, got {rate}")));
    }
    let frozen = FrozenPoint::new(problem, lambda)?;
    let e = &frozen.spec.energies;
    let spread = e[e.len() - 1] - e[0];
    let target = options.target;

    let mut start: Option<(DriveAnsatz, f64)> = None;
    for k in 1..=options.omega_grid {
        let omega = options.max_bessel_argument / spread * k as f64 / options.omega_grid as f64;
        let Ok(a) = frozen.fit(rate, omega, harmonics, target) else { continue };
        let Ok(r) = frozen.residual(&a, rate, target) else { continue };
        if start.as_ref().is_none_or(|(_, best)| r < *best) {
            start = Some((a, r));
        }
    }
    let (start, initial_residual) = start.ok_or_else(|| Error::Numerical {
        message: "no admissible Ω on the initial scan".into(),
        residual: f64::NAN,
    })?;

    let objective = |x: &[f64]| -> f64 {
        match DriveAnsatz::new(x[0], x[1..].to_vec()) {
            Ok(a) => frozen.residual(&a, rate, target).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };
    let mut x0 = vec![start.capital_omega];
    x0.extend_from_slice(&start.g);
    let g_scale = start.g.iter().fold(0.0f64, |m, g| m.max(g.abs())).max(rate.abs() / spread).max(1e-6);
    let base_steps: Vec<f64> = std::iter::once(0.05 * start.capital_omega)
        .chain(start.g.iter().map(|g| 0.1 * g.abs() + 0.01 * g_scale))
        .collect();
    let scale = initial_residual.max(rate.abs() * frozen.agp.norm()).max(f64::MIN_POSITIVE);
    let per_restart = (options.budget / options.restarts).max(x0.len() + 2);

    let runs: Vec<SimplexResult> = (0..options.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha20Rng::seed_from_u64(options.seed);
            rng.set_stream(r as u64);
            let (origin, steps) = if r == 0 {
                (x0.clone(), base_steps.clone())
            } else {
                let factor: f64 = rng.random_range(0.5..2.0);
                let origin = x0.iter().zip(&base_steps).map(|(x, s)| x + s * rng.random_range(-1.0..1.0)).collect();
                (origin, base_steps.iter().map(|s| s * factor).collect())
            };
            nelder_mead(objective, &origin, &steps, per_restart, 1e-14 * scale, 1e-10 * (1.0 + g_scale))
        })
        .collect();

    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let converged = runs.iter().any(|r| r.converged);
    let best = runs.into_iter().min_by(|a, b| a.value.total_cmp(&b.value)).expect("at least one restart");
    let (ansatz, residual) = if best.value < initial_residual {
        (DriveAnsatz::new(best.x[0], best.x[1..].to_vec())?, best.value)
    } else {
        (start, initial_residual)
    };
    Ok(VariationalFit { ansatz, residual, initial_residual, converged, evaluations })
}
