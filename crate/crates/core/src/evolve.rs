//! Time stepping of the two-level Schrödinger equation and fidelity bookkeeping.
//!
//! The default stepper is the fourth-order commutator-free Magnus scheme,
//! two closed-form SU(2) exponentials per step with the generator sampled at
//! the Gauss–Legendre nodes. A midpoint scheme (one exponential at
//! `t + dt/2`) is kept for comparison.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseRealization;
use crate::numerics::{pauli_exp, PauliVector};
use crate::protocols::{lab_to_rotating, rotating_frame_map, ControlFields};
use crate::units::TWO_PI;

/// Norm drift allowed over a full protocol.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Largest rotation angle `|H| dt` accepted in a single step.
pub const MAX_STEP_ANGLE: f64 = 0.5;
/// Steps across `τ` when no explicit `base_dt` is given.
pub const DEFAULT_STEPS: usize = 8192;
/// Averaging window for the reported final fidelity, in µs.
pub const DEFAULT_FINAL_WINDOW: f64 = 0.040;

pub(crate) const SQRT3: f64 = 1.732_050_807_568_877_2;
pub(crate) const C1: f64 = 0.5 - SQRT3 / 6.0;
pub(crate) const C2: f64 = 0.5 + SQRT3 / 6.0;
pub(crate) const A1: f64 = 0.25 - SQRT3 / 6.0;
pub(crate) const A2: f64 = 0.25 + SQRT3 / 6.0;

/// Unit-norm vector of complex amplitudes, `|0⟩` being the `σz = +1` state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState(Vec<C64>);

impl QuantumState {
    pub fn qubit(amps: [C64; 2]) -> Self {
        QuantumState(amps.to_vec())
    }

    /// Wraps `amps`, failing if the norm is off by more than 1e−6.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let s = QuantumState(amps);
        if s.0.is_empty() || (s.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::contract(format!("state norm {} is not 1", s.norm())));
        }
        Ok(s)
    }

    /// `|+x⟩ = (|0⟩ + |1⟩)/√2`
    pub fn plus_x() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        QuantumState::qubit([C64::new(r, 0.0), C64::new(r, 0.0)])
    }

    /// `|−x⟩ = (|0⟩ − |1⟩)/√2`
    pub fn minus_x() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        QuantumState::qubit([C64::new(r, 0.0), C64::new(-r, 0.0)])
    }

    /// Lower eigenvector of `a·σ`.
    pub fn ground_state(a: PauliVector) -> Result<Self> {
        let n = a.norm();
        if !(n > 0.0) || !a.is_finite() {
            return Err(Error::contract("ground state of a vanishing generator is undefined"));
        }
        let theta = (a.x.hypot(a.y)).atan2(a.z);
        let phi = a.y.atan2(a.x);
        let (s, c) = (0.5 * theta).sin_cos();
        Ok(QuantumState::qubit([C64::new(s, 0.0), -C64::from_polar(c, phi)]))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.0
    }

    pub fn qubit_amplitudes(&self) -> Result<[C64; 2]> {
        match self.0.as_slice() {
            &[a, b] => Ok([a, b]),
            _ => Err(Error::contract(format!("expected a two-level state, got dimension {}", self.dim()))),
        }
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &QuantumState) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::contract(format!("dimension mismatch {} vs {}", a.dim(), b.dim())));
    }
    for s in [a, b] {
        if (s.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::contract(format!("state norm {} is not 1", s.norm())));
        }
    }
    Ok(a.inner(b).norm_sqr().min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stepper {
    /// Fourth-order commutator-free Magnus, two exponentials per step.
    Cfm4,
    /// Generator sampled at the step midpoint, one exponential per step.
    Midpoint,
}

impl Stepper {
    pub fn as_str(self) -> &'static str {
        match self {
            Stepper::Cfm4 => "cfm4",
            Stepper::Midpoint => "midpoint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    /// Upper bound on the step; `None` means `τ / 8192`.
    pub base_dt: Option<f64>,
    /// Minimum steps per period of each explicit modulation.
    pub oversample_per_period: usize,
    /// Record every this many steps (strobe times and `τ` are always recorded).
    pub record_stride: usize,
    pub stepper: Stepper,
    /// Period used to align the grid and mark strobe times; defaults to the
    /// Floquet frequency of the fields, if any.
    pub strobe_omega: Option<f64>,
    /// Each grid step is split into this many substeps. Recording times do
    /// not depend on it, which makes refinement studies compare like with like.
    pub refinement: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            base_dt: None,
            oversample_per_period: 64,
            record_stride: 16,
            stepper: Stepper::Cfm4,
            strobe_omega: None,
            refinement: 1,
        }
    }
}

/// Uniform grid of `full_steps` steps of `dt`, plus an optional shorter tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub full_steps: usize,
    pub tail: f64,
    pub steps_per_period: Option<usize>,
}

impl TimeGrid {
    pub fn total_steps(&self) -> usize {
        self.full_steps + usize::from(self.tail > 0.0)
    }
}

impl StepPolicy {
    pub fn with_strobe(mut self, omega: f64) -> Self {
        self.strobe_omega = Some(omega);
        self
    }

    pub fn with_stepper(mut self, stepper: Stepper) -> Self {
        self.stepper = stepper;
        self
    }

    /// The same recording grid stepped with half the step size.
    pub fn halved(&self) -> Self {
        let mut p = *self;
        p.refinement *= 2;
        p
    }

    pub fn resolved_base_dt(&self, tau: f64) -> f64 {
        self.base_dt.unwrap_or(tau / DEFAULT_STEPS as f64)
    }

    fn validate(&self) -> Result<()> {
        if let Some(dt) = self.base_dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::contract(format!("base_dt must be positive, got {dt}")));
            }
        }
        if self.oversample_per_period == 0 || self.record_stride == 0 || self.refinement == 0 {
            return Err(Error::contract("oversample_per_period, record_stride and refinement must be at least 1"));
        }
        Ok(())
    }

    /// Build the step grid for `fields`.
    pub fn grid(&self, fields: &ControlFields) -> Result<TimeGrid> {
        let strobe = fields.floquet().map(|(_, w)| w);
        self.grid_for(fields.tau(), &fields.modulation_frequencies(), strobe)
    }

    /// Step grid over `[0, tau]` resolving each angular frequency in
    /// `modulations`; `strobe` is used unless the policy overrides it.
    pub fn grid_for(&self, tau: f64, modulations: &[f64], strobe: Option<f64>) -> Result<TimeGrid> {
        self.validate()?;
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::domain(format!("duration must be positive, got {tau}")));
        }
        let r = self.refinement;
        let g = self.coarse_grid(tau, modulations, self.strobe_omega.or(strobe));
        Ok(TimeGrid {
            dt: g.dt / r as f64,
            full_steps: g.full_steps * r,
            tail: g.tail,
            steps_per_period: g.steps_per_period.map(|s| s * r),
        })
    }

    fn coarse_grid(&self, tau: f64, modulations: &[f64], strobe: Option<f64>) -> TimeGrid {
        let mut dt = self.resolved_base_dt(tau).min(tau);
        for &w in modulations {
            if w > 0.0 {
                dt = dt.min(TWO_PI / w / self.oversample_per_period as f64);
            }
        }
        match strobe {
            Some(w) if w > 0.0 => {
                let period = TWO_PI / w;
                let spp = (period / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                let dt = period / spp as f64;
                let ratio = tau / dt;
                let mut full = ratio.floor() as usize;
                if ratio - full as f64 > 1.0 - 1e-9 {
                    full += 1;
                }
                let tail = tau - full as f64 * dt;
                let tail = if tail.abs() <= 1e-12 * tau { 0.0 } else { tail };
                if tail < 0.0 {
                    // τ sits a hair below a grid point; end there instead.
                    return TimeGrid { dt, full_steps: full - 1, tail: tail + dt, steps_per_period: Some(spp) };
                }
                TimeGrid { dt, full_steps: full, tail, steps_per_period: Some(spp) }
            }
            _ => {
                let n = (tau / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                TimeGrid { dt: tau / n as f64, full_steps: n, tail: 0.0, steps_per_period: None }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionMeta {
    pub label: String,
    pub stepper: Stepper,
    pub dt: f64,
    pub steps: usize,
    pub norm_drift: f64,
    pub max_step_angle: f64,
    pub detuning: f64,
    pub noise_seed: Option<(u64, u64)>,
}

/// States and fidelities on the recording grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    pub fidelities: Vec<f64>,
    /// Indices into `times` falling on whole strobe periods.
    pub strobe_indices: Vec<usize>,
    pub meta: EvolutionMeta,
}

impl EvolutionResult {
    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("results always hold the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("results always hold the initial time")
    }
}

/// Evolve and report fidelity against `|+x⟩`.
pub fn evolve(
    fields: &ControlFields,
    policy: &StepPolicy,
    initial: &QuantumState,
    noise: Option<&NoiseRealization>,
    detuning: Option<f64>,
) -> Result<EvolutionResult> {
    evolve_against(fields, policy, initial, &QuantumState::plus_x(), noise, detuning)
}

/// Evolve and report fidelity against an arbitrary `target`.
pub fn evolve_against(
    fields: &ControlFields,
    policy: &StepPolicy,
    initial: &QuantumState,
    target: &QuantumState,
    noise: Option<&NoiseRealization>,
    detuning: Option<f64>,
) -> Result<EvolutionResult> {
    let mut psi = initial.qubit_amplitudes()?;
    target.qubit_amplitudes()?;
    if (initial.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::contract(format!("initial state norm {} is not 1", initial.norm())));
    }
    let grid = policy.grid(fields)?;
    let det = detuning.unwrap_or(0.0);
    if !det.is_finite() {
        return Err(Error::domain("detuning must be finite"));
    }
    let dt = grid.dt;
    let n = grid.full_steps;

    // Noise on each node sub-grid, which is uniform with spacing dt.
    let nodes: &[f64] = match policy.stepper {
        Stepper::Cfm4 => &[C1, C2],
        Stepper::Midpoint => &[0.5],
    };
    let gamma: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&c| match noise {
            Some(r) => r.sample_uniform(c * dt, dt, n),
            None => vec![0.0; n],
        })
        .collect();

    let stride = policy.record_stride * policy.refinement;
    let spp = grid.steps_per_period;
    let capacity = n / stride + n / spp.unwrap_or(usize::MAX).max(1) + 3;
    let mut times = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    let mut fids = Vec::with_capacity(capacity);
    let mut strobes = Vec::new();
    let mut record = |t: f64, psi: [C64; 2], strobe: bool| -> Result<()> {
        let s = QuantumState::qubit(psi);
        if strobe {
            strobes.push(times.len());
        }
        fids.push(s.inner(target).norm_sqr().min(1.0));
        times.push(t);
        states.push(s);
        Ok(())
    };
    record(0.0, psi, spp.is_some())?;

    let mut max_angle: f64 = 0.0;
    let mut step = |psi: [C64; 2], t: f64, h: f64, g: &[f64]| -> [C64; 2] {
        let at = |c: f64, gz: f64| {
            let b = fields.at(t + c * h);
            PauliVector::new(b.x, b.y, b.z + gz + det)
        };
        match policy.stepper {
            Stepper::Cfm4 => {
                let h1 = at(C1, g[0]);
                let h2 = at(C2, g[1]);
                let first = h1.scale(A2).add(h2.scale(A1));
                let second = h1.scale(A1).add(h2.scale(A2));
                max_angle = max_angle.max((first.norm() + second.norm()) * h);
                pauli_exp(second, h).apply(pauli_exp(first, h).apply(psi))
            }
            Stepper::Midpoint => {
                let a = at(0.5, g[0]);
                max_angle = max_angle.max(a.norm() * h);
                pauli_exp(a, h).apply(psi)
            }
        }
    };

    let mut g = [0.0; 2];
    for k in 0..n {
        for (slot, series) in g.iter_mut().zip(&gamma) {
            *slot = series[k];
        }
        psi = step(psi, k as f64 * dt, dt, &g[..nodes.len()]);
        let done = k + 1;
        let strobe = spp.is_some_and(|p| done % p == 0);
        let last = done == n && grid.tail == 0.0;
        if done % stride == 0 || strobe || last {
            record(done as f64 * dt, psi, strobe)?;
        }
    }
    if grid.tail > 0.0 {
        let t0 = n as f64 * dt;
        for (slot, &c) in g.iter_mut().zip(nodes) {
            *slot = noise.map_or(0.0, |r| r.eval(t0 + c * grid.tail));
        }
        psi = step(psi, t0, grid.tail, &g[..nodes.len()]);
        record(fields.tau(), psi, false)?;
    }

    let norm_drift = (QuantumState::qubit(psi).norm() - initial.norm()).abs();
    if norm_drift > NORM_TOLERANCE || !norm_drift.is_finite() {
        return Err(Error::Accuracy(format!(
            "norm drifted by {norm_drift:.3e} over {} steps of {dt:.3e} µs",
            grid.total_steps()
        )));
    }
    if max_angle > MAX_STEP_ANGLE {
        return Err(Error::Accuracy(format!(
            "step rotation angle {max_angle:.3} rad exceeds {MAX_STEP_ANGLE}; reduce base_dt (currently {dt:.3e} µs)"
        )));
    }
    Ok(EvolutionResult {
        times,
        states,
        fidelities: fids,
        strobe_indices: strobes,
        meta: EvolutionMeta {
            label: fields.label().to_string(),
            stepper: policy.stepper,
            dt,
            steps: grid.total_steps(),
            norm_drift,
            max_step_angle: max_angle,
            detuning: det,
            noise_seed: noise.map(|r| (r.seed(), r.index())),
        },
    })
}

/// Re-express a lab-frame run in the rotating frame of `carrier` and
/// recompute its fidelities against `target`, given in that frame.
pub fn lab_to_rotating_result(r: &mut EvolutionResult, target: &QuantumState, carrier: f64) -> Result<()> {
    for ((state, fid), &t) in r.states.iter_mut().zip(r.fidelities.iter_mut()).zip(&r.times) {
        *state = lab_to_rotating(state, carrier, t)?;
        *fid = fidelity(state, target)?;
    }
    Ok(())
}

/// Mean fidelity over recorded times in `[t_end − window, t_end]`.
pub fn final_fidelity(r: &EvolutionResult, window: f64) -> Result<f64> {
    let t_end = r.final_time();
    if !(window >= 0.0) || window > t_end + 1e-12 {
        return Err(Error::domain(format!("averaging window {window} µs exceeds the run length {t_end} µs")));
    }
    window_mean(&r.times, &r.fidelities, window)
}

pub(crate) fn window_mean(times: &[f64], values: &[f64], window: f64) -> Result<f64> {
    let t_end = *times.last().ok_or_else(|| Error::Grid("empty recording".into()))?;
    let start = t_end - window - 1e-12 * t_end.max(1.0);
    let (sum, count) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= start)
        .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
    if count == 0 {
        return Err(Error::Grid(format!("no recorded samples inside the final {window} µs")));
    }
    Ok(sum / count as f64)
}

/// Largest stroboscopic infidelity between a Floquet run mapped into the
/// rotating frame and a reference run on the same grid.
pub fn strobe_compare(fe_lab: &EvolutionResult, cd: &EvolutionResult, omega: f64, capital_omega: f64) -> Result<f64> {
    if fe_lab.strobe_indices.is_empty() {
        return Err(Error::Grid("the Floquet run has no stroboscopic samples".into()));
    }
    let mut worst: f64 = 0.0;
    let mut matched = 0;
    let mut j = 0;
    for &i in &fe_lab.strobe_indices {
        let t = fe_lab.times[i];
        while j < cd.times.len() && cd.times[j] < t - 1e-9 {
            j += 1;
        }
        if j == cd.times.len() || (cd.times[j] - t).abs() > 1e-9 {
            continue;
        }
        let mapped = rotating_frame_map(&fe_lab.states[i], capital_omega, omega, t)?;
        worst = worst.max(1.0 - fidelity(&mapped, &cd.states[j])?);
        matched += 1;
    }
    if matched == 0 {
        return Err(Error::Grid("no stroboscopic time is shared by both runs".into()));
    }
    Ok(worst.max(0.0))
}
