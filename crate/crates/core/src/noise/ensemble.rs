use rayon::prelude::*;

use super::{sample_noise, DetuningSpec, NoiseSpec};
use crate::error::{Error, Result};
use crate::evolve::{evolve_against, final_fidelity, lab_to_rotating_result, QuantumState, StepPolicy, DEFAULT_FINAL_WINDOW};
use crate::protocols::ControlFields;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOptions {
    pub initial: QuantumState,
    pub target: QuantumState,
    /// Window in µs for the final-fidelity average.
    pub final_window: f64,
    /// Carrier of lab-frame fields; states are mapped to its rotating frame
    /// before fidelities are taken.
    pub carrier: Option<f64>,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions {
            initial: QuantumState::minus_x(),
            target: QuantumState::plus_x(),
            final_window: DEFAULT_FINAL_WINDOW,
            carrier: None,
        }
    }
}

/// Per-time statistics of the fidelity over an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub sem: Vec<f64>,
    /// Final fidelity of each realization, in index order.
    pub final_fidelities: Vec<f64>,
    pub final_mean: f64,
    pub final_std: f64,
    pub final_sem: f64,
}

/// Ensemble from `|−x⟩` towards `|+x⟩` with fresh noise (and detuning) per member.
pub fn noisy_ensemble(
    fields: &ControlFields,
    spec: &NoiseSpec,
    detuning: Option<&DetuningSpec>,
    realizations: usize,
    policy: &StepPolicy,
) -> Result<EnsembleResult> {
    noisy_ensemble_with(fields, Some(spec), detuning, realizations, policy, &EnsembleOptions::default())
}

pub fn noisy_ensemble_with(
    fields: &ControlFields,
    spec: Option<&NoiseSpec>,
    detuning: Option<&DetuningSpec>,
    realizations: usize,
    policy: &StepPolicy,
    options: &EnsembleOptions,
) -> Result<EnsembleResult> {
    if realizations < 2 {
        return Err(Error::domain(format!("an ensemble needs at least 2 realizations, got {realizations}")));
    }
    let runs = (0..realizations as u64)
        .into_par_iter()
        .map(|i| {
            let noise = spec.map(|s| sample_noise(s, i));
            let delta = detuning.map(|d| d.draw(i));
            let mut r = evolve_against(fields, policy, &options.initial, &options.target, noise.as_ref(), delta)?;
            if let Some(c) = options.carrier {
                lab_to_rotating_result(&mut r, &options.target, c)?;
            }
            let f = final_fidelity(&r, options.final_window)?;
            Ok((r.times, r.fidelities, f))
        })
        .collect::<Result<Vec<_>>>()?;

    // Deterministic reduction in realization order.
    let times = runs[0].0.clone();
    let n = times.len();
    let m = realizations as f64;
    let mut mean = vec![0.0; n];
    for (_, fid, _) in &runs {
        for (acc, v) in mean.iter_mut().zip(fid) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= m);
    let mut var = vec![0.0; n];
    for (_, fid, _) in &runs {
        for ((acc, v), mu) in var.iter_mut().zip(fid).zip(&mean) {
            *acc += (v - mu) * (v - mu);
        }
    }
    let std: Vec<f64> = var.iter().map(|v| (v / (m - 1.0)).sqrt()).collect();
    let sem = std.iter().map(|s| s / m.sqrt()).collect();
    let finals: Vec<f64> = runs.iter().map(|r| r.2).collect();
    let (final_mean, final_std) = mean_std(&finals);
    Ok(EnsembleResult {
        times,
        mean,
        std,
        sem,
        final_mean,
        final_std,
        final_sem: final_std / m.sqrt(),
        final_fidelities: finals,
    })
}

pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}
