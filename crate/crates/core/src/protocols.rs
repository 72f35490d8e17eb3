//! Control fields for the four driving protocols and the frames that relate them.
//!
//! Every protocol acts on a qubit as `H(t) = bx σx + by σy + bz σz` with
//! coefficients in rad/µs:
//!
//! | protocol | bx | by | bz |
//! |---|---|---|---|
//! | Landau-Zener | `λ` | 0 | `Δ` |
//! | counter-diabatic | `λ` | `½Δλ̇/(Δ²+λ²)` | `Δ` |
//! | fast-forward | `λ + ½ d/dt arctan(λ̇Γ)` | 0 | `Δ√(1+(λ̇Γ)²)` |
//! | Floquet-engineered | `λ + ωΩ sin ωt` | 0 | `α − β cos ωt` |
//!
//! with `Γ = 1/(2(λ²+Δ²))` and `β = αJ₀(2Ω)λ̇ / (2J₁(2Ω)((αJ₀(2Ω))² + λ²))`.
//! In the frame `V = exp(−iσx θ)`, `θ = −Ω cos ωt`, the period-averaged
//! Floquet drive is the counter-diabatic drive with gap `Δ' = αJ₀(2Ω)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::QuantumState;
use crate::numerics::{bessel_j, nearest_j1_zero, pauli_exp, PauliVector};
use crate::schedules::{SweepPoint, SweepSchedule};

/// Default lower bound on `|J₁(2Ω)|`.
pub const DEFAULT_J1_GUARD: f64 = 1e-3;
/// Minimum carrier-to-protocol frequency ratio for the lab-frame drive.
pub const MIN_CARRIER_RATIO: f64 = 10.0;
/// `ω/Δ` below which the high-frequency expansion is reported as doubtful.
pub const WARN_OMEGA_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "lz")]
    LandauZener,
    #[serde(rename = "cd")]
    CounterDiabatic,
    #[serde(rename = "ff")]
    FastForward,
    #[serde(rename = "fe")]
    FloquetEngineered,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [
        Protocol::LandauZener,
        Protocol::CounterDiabatic,
        Protocol::FastForward,
        Protocol::FloquetEngineered,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::LandauZener => "lz",
            Protocol::CounterDiabatic => "cd",
            Protocol::FastForward => "ff",
            Protocol::FloquetEngineered => "fe",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lz" | "landau-zener" => Ok(Protocol::LandauZener),
            "cd" | "counter-diabatic" => Ok(Protocol::CounterDiabatic),
            "ff" | "fast-forward" => Ok(Protocol::FastForward),
            "fe" | "floquet" | "floquet-engineered" => Ok(Protocol::FloquetEngineered),
            other => Err(Error::Usage(format!("unknown protocol '{other}' (expected lz, cd, ff or fe)"))),
        }
    }
}

/// Physical parameters shared by all protocols. Frequencies in rad/µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub delta: f64,
    pub schedule: SweepSchedule,
    /// Floquet angular frequency ω (Floquet protocol only).
    pub omega: f64,
    /// Dimensionless drive strength Ω (Floquet protocol only).
    pub capital_omega: f64,
    /// Rotating-frame gap parameter; `None` means `α = Δ`.
    pub alpha: Option<f64>,
    pub j1_guard: f64,
}

impl ProtocolParams {
    pub fn new(delta: f64, schedule: SweepSchedule) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::domain(format!("gap Δ must be positive, got {delta}")));
        }
        Ok(ProtocolParams {
            delta,
            schedule,
            omega: 0.0,
            capital_omega: 0.0,
            alpha: None,
            j1_guard: DEFAULT_J1_GUARD,
        })
    }

    pub fn with_floquet(mut self, omega: f64, capital_omega: f64) -> Self {
        self.omega = omega;
        self.capital_omega = capital_omega;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_j1_guard(mut self, guard: f64) -> Self {
        self.j1_guard = guard;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(self.delta)
    }

    /// `J₀(2Ω)`.
    pub fn j0(&self) -> Result<f64> {
        bessel_j(0, 2.0 * self.capital_omega)
    }

    /// `J₁(2Ω)`.
    pub fn j1(&self) -> Result<f64> {
        bessel_j(1, 2.0 * self.capital_omega)
    }

    /// Rotating-frame gap `Δ' = αJ₀(2Ω)` of the Floquet drive.
    pub fn effective_delta(&self) -> Result<f64> {
        Ok(self.alpha() * self.j0()?)
    }

    /// Counter-diabatic parameters with the gap replaced by `Δ'`, i.e. the
    /// drive that the Floquet protocol reproduces stroboscopically.
    pub fn effective_cd(&self) -> Result<ProtocolParams> {
        let d = self.effective_delta()?;
        let mut p = *self;
        p.delta = d.abs();
        Ok(p)
    }

    pub fn tau(&self) -> f64 {
        self.schedule.tau()
    }
}

/// Coordinates in which a set of fields is expressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    /// The frame in which the protocols are written.
    Rotating,
    /// The laboratory frame of a qubit with splitting `carrier`.
    Lab { carrier: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Constant(PauliVector),
    Lz,
    Cd,
    Ff,
    Fe { alpha: f64, j0: f64, j1: f64 },
    Lab { inner: Box<ControlFields>, carrier: f64 },
}

/// Time-dependent Pauli coefficients of one protocol on `[0, τ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlFields {
    source: Source,
    params: Option<ProtocolParams>,
    tau: f64,
    label: String,
}

impl ControlFields {
    /// Time-independent fields, mostly useful for tests and calibration.
    pub fn constant(a: PauliVector, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) || !a.is_finite() {
            return Err(Error::domain("constant fields need a finite generator and positive duration"));
        }
        Ok(ControlFields {
            source: Source::Constant(a),
            params: None,
            tau,
            label: "constant".into(),
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> Option<&ProtocolParams> {
        self.params.as_ref()
    }

    pub fn frame(&self) -> Frame {
        match &self.source {
            Source::Lab { carrier, .. } => Frame::Lab { carrier: *carrier },
            _ => Frame::Rotating,
        }
    }

    /// `(Ω, ω)` when these fields carry the Floquet modulation.
    pub fn floquet(&self) -> Option<(f64, f64)> {
        match &self.source {
            Source::Fe { .. } => self.params.map(|p| (p.capital_omega, p.omega)),
            Source::Lab { inner, .. } => inner.floquet(),
            _ => None,
        }
    }

    /// Angular frequencies of explicit periodic modulations, fastest last.
    pub fn modulation_frequencies(&self) -> Vec<f64> {
        match &self.source {
            Source::Fe { .. } => vec![self.params.map_or(0.0, |p| p.omega)],
            Source::Lab { inner, carrier } => {
                let mut v = inner.modulation_frequencies();
                v.push(*carrier);
                v
            }
            _ => Vec::new(),
        }
    }

    /// The coefficients `(bx, by, bz)` at time `t`.
    pub fn at(&self, t: f64) -> PauliVector {
        let t = t.clamp(0.0, self.tau);
        match &self.source {
            Source::Constant(a) => *a,
            Source::Lab { inner, carrier } => {
                let b = inner.at(t);
                let (s, c) = (carrier * t).sin_cos();
                PauliVector::new(2.0 * (b.x * c - b.y * s), 0.0, 0.5 * carrier + b.z)
            }
            src => {
                let p = self.params.expect("protocol fields carry parameters");
                let sp = p.schedule.point(t);
                match src {
                    Source::Lz => lz_at(p.delta, sp),
                    Source::Cd => cd_at(p.delta, sp),
                    Source::Ff => ff_at(p.delta, sp),
                    Source::Fe { alpha, j0, j1 } => fe_at(&p, *alpha, *j0, *j1, sp, t),
                    _ => unreachable!(),
                }
            }
        }
    }

    /// Coefficients with the sweep held at time `slow` while the periodic
    /// drive runs at time `fast`. Equals `at(t)` when both are `t`.
    pub fn at_frozen(&self, slow: f64, fast: f64) -> PauliVector {
        let slow = slow.clamp(0.0, self.tau);
        match &self.source {
            Source::Fe { alpha, j0, j1 } => {
                let p = self.params.expect("protocol fields carry parameters");
                fe_at(&p, *alpha, *j0, *j1, p.schedule.point(slow), fast)
            }
            Source::Lab { inner, carrier } => {
                let b = inner.at_frozen(slow, fast);
                let (s, c) = (carrier * fast).sin_cos();
                PauliVector::new(2.0 * (b.x * c - b.y * s), 0.0, 0.5 * carrier + b.z)
            }
            _ => self.at(slow),
        }
    }

    /// Largest `|b(t)|` over a uniform sample of the interval.
    pub fn peak_magnitude(&self, samples: usize) -> f64 {
        let n = samples.max(2);
        (0..n)
            .map(|k| self.at(self.tau * k as f64 / (n - 1) as f64).norm())
            .fold(0.0, f64::max)
    }
}

fn lz_at(delta: f64, sp: SweepPoint) -> PauliVector {
    PauliVector::new(sp.value, 0.0, delta)
}

fn cd_at(delta: f64, sp: SweepPoint) -> PauliVector {
    let by = 0.5 * delta * sp.rate / (delta * delta + sp.value * sp.value);
    PauliVector::new(sp.value, by, delta)
}

fn ff_at(delta: f64, sp: SweepPoint) -> PauliVector {
    let (l, ld, ldd) = (sp.value, sp.rate, sp.accel);
    let s = l * l + delta * delta;
    let gamma = 0.5 / s;
    let gamma_dot = -l * ld / (s * s);
    let x = ld * gamma;
    let x_dot = ldd * gamma + ld * gamma_dot;
    PauliVector::new(l + 0.5 * x_dot / (1.0 + x * x), 0.0, delta * (1.0 + x * x).sqrt())
}

fn fe_beta(alpha: f64, j0: f64, j1: f64, sp: SweepPoint) -> f64 {
    let a0 = alpha * j0;
    a0 * sp.rate / (2.0 * j1 * (a0 * a0 + sp.value * sp.value))
}

fn fe_at(p: &ProtocolParams, alpha: f64, j0: f64, j1: f64, sp: SweepPoint, t: f64) -> PauliVector {
    let (s, c) = (p.omega * t).sin_cos();
    let beta = fe_beta(alpha, j0, j1, sp);
    PauliVector::new(sp.value + p.omega * p.capital_omega * s, 0.0, alpha - beta * c)
}

fn protocol_fields(p: &ProtocolParams, source: Source, label: &str) -> ControlFields {
    ControlFields {
        source,
        params: Some(*p),
        tau: p.tau(),
        label: label.into(),
    }
}

pub fn lz_fields(p: &ProtocolParams) -> ControlFields {
    protocol_fields(p, Source::Lz, "lz")
}

pub fn cd_fields(p: &ProtocolParams) -> ControlFields {
    protocol_fields(p, Source::Cd, "cd")
}

pub fn ff_fields(p: &ProtocolParams) -> ControlFields {
    protocol_fields(p, Source::Ff, "ff")
}

/// Floquet-engineered fields. Fails inside the `J₁(2Ω)` guard band or when
/// the drive is not faster than the gap.
pub fn fe_fields(p: &ProtocolParams) -> Result<ControlFields> {
    if !(p.omega.is_finite() && p.omega > 0.0) {
        return Err(Error::domain(format!("Floquet frequency ω must be positive, got {}", p.omega)));
    }
    if p.omega <= p.delta {
        return Err(Error::domain(format!(
            "Floquet frequency ω = {} rad/µs does not exceed the gap Δ = {} rad/µs",
            p.omega, p.delta
        )));
    }
    if !p.capital_omega.is_finite() {
        return Err(Error::domain("drive strength Ω must be finite"));
    }
    j1_guard(p)?;
    let alpha = p.alpha();
    Ok(protocol_fields(
        p,
        Source::Fe {
            alpha,
            j0: p.j0()?,
            j1: p.j1()?,
        },
        "fe",
    ))
}

fn j1_guard(p: &ProtocolParams) -> Result<()> {
    let x = 2.0 * p.capital_omega;
    let j1 = bessel_j(1, x)?;
    if j1.abs() < p.j1_guard {
        let zero = nearest_j1_zero(x)?;
        return Err(Error::Singularity {
            capital_omega: p.capital_omega,
            j1,
            zero,
            distance: (x - zero).abs(),
        });
    }
    Ok(())
}

/// Fields for `protocol` under `p`.
pub fn fields(protocol: Protocol, p: &ProtocolParams) -> Result<ControlFields> {
    Ok(match protocol {
        Protocol::LandauZener => lz_fields(p),
        Protocol::CounterDiabatic => cd_fields(p),
        Protocol::FastForward => ff_fields(p),
        Protocol::FloquetEngineered => fe_fields(p)?,
    })
}

/// `θ(t) = −Ω cos ωt`.
pub fn frame_angle(capital_omega: f64, omega: f64, t: f64) -> f64 {
    -capital_omega * (omega * t).cos()
}

/// Maps a lab-frame state to the rotating frame by `V† = exp(+iσx θ(t))`.
pub fn rotating_frame_map(state: &QuantumState, capital_omega: f64, omega: f64, t: f64) -> Result<QuantumState> {
    let theta = frame_angle(capital_omega, omega, t);
    let u = pauli_exp(PauliVector::new(-theta, 0.0, 0.0), 1.0);
    Ok(QuantumState::qubit(u.apply(state.qubit_amplitudes()?)))
}

/// How the Floquet drive strength relates to the boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveMode {
    /// `Ω = mπ`: the frame transformation is trivial at `t = 0` and `t = τ`.
    Strict,
    /// Other `Ω`, admissible when the boundary states lie along x.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub capital_omega: f64,
    /// `ωτ/π`.
    pub strobe_index: f64,
    pub strobe_aligned: bool,
    pub mode: DriveMode,
    pub omega_over_delta: f64,
    pub j1: f64,
    pub nearest_j1_zero: f64,
    /// `|2Ω − z|` for the nearest zero `z` of `J₁`.
    pub zero_distance: f64,
    pub j1_guard_ok: bool,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    /// Error out if the guard fails, or on any warning when `strict`.
    pub fn check(&self, strict: bool) -> Result<()> {
        if !self.j1_guard_ok {
            return Err(Error::Singularity {
                capital_omega: self.capital_omega,
                j1: self.j1,
                zero: self.nearest_j1_zero,
                distance: self.zero_distance,
            });
        }
        if strict && !self.warnings.is_empty() {
            return Err(Error::Config(format!(
                "Floquet parameters rejected in strict mode: {}",
                self.warnings.join("; ")
            )));
        }
        Ok(())
    }
}

pub fn validate_floquet_params(p: &ProtocolParams) -> Result<ValidationReport> {
    const TOL: f64 = 1e-9;
    let mut warnings = Vec::new();

    let strobe_index = p.omega * p.tau() / std::f64::consts::PI;
    let strobe_aligned = (strobe_index - strobe_index.round()).abs() <= TOL * strobe_index.abs().max(1.0);
    if !strobe_aligned {
        warnings.push(format!("ωτ/π = {strobe_index:.9} is not an integer"));
    }

    let m = p.capital_omega / std::f64::consts::PI;
    let mode = if (m - m.round()).abs() <= TOL && m.round() != 0.0 {
        DriveMode::Strict
    } else {
        warnings.push(format!(
            "Ω = {} is not a multiple of π; relaxed mode requires x-aligned boundary states",
            p.capital_omega
        ));
        DriveMode::Relaxed
    };

    let omega_over_delta = p.omega / p.delta;
    if omega_over_delta < WARN_OMEGA_RATIO {
        warnings.push(format!("ω/Δ = {omega_over_delta:.3} is below {WARN_OMEGA_RATIO}"));
    }

    let x = 2.0 * p.capital_omega;
    let j1 = bessel_j(1, x)?;
    let zero = nearest_j1_zero(x)?;
    Ok(ValidationReport {
        capital_omega: p.capital_omega,
        strobe_index,
        strobe_aligned,
        mode,
        omega_over_delta,
        j1,
        nearest_j1_zero: zero,
        zero_distance: (x - zero).abs(),
        j1_guard_ok: j1.abs() >= p.j1_guard,
        warnings,
    })
}

/// Lab-frame fields `bz = ω₀/2 + Bz`, `bx = 2(Bx cos ω₀t − By sin ω₀t)`.
///
/// With `ψ_rot = exp(+iω₀tσz/2) ψ_lab` the co-rotating part reproduces
/// `(Bx, By, Bz)` and the counter-rotating part oscillates at `2ω₀`.
pub fn lab_frame_fields(rotating: &ControlFields, carrier: f64) -> Result<ControlFields> {
    if matches!(rotating.frame(), Frame::Lab { .. }) {
        return Err(Error::contract("fields are already in the lab frame"));
    }
    let fastest = rotating
        .modulation_frequencies()
        .into_iter()
        .fold(rotating.peak_magnitude(4097), f64::max);
    if !(carrier.is_finite() && carrier >= MIN_CARRIER_RATIO * fastest) {
        return Err(Error::domain(format!(
            "carrier {carrier} rad/µs is less than {MIN_CARRIER_RATIO}x the fastest protocol frequency {fastest} rad/µs"
        )));
    }
    Ok(ControlFields {
        source: Source::Lab {
            inner: Box::new(rotating.clone()),
            carrier,
        },
        params: rotating.params,
        tau: rotating.tau,
        label: format!("{}-lab", rotating.label),
    })
}

/// `exp(+iω₀tσz/2)` applied to a lab-frame state.
pub fn lab_to_rotating(state: &QuantumState, carrier: f64, t: f64) -> Result<QuantumState> {
    let u = pauli_exp(PauliVector::new(0.0, 0.0, -0.5 * carrier), t);
    Ok(QuantumState::qubit(u.apply(state.qubit_amplitudes()?)))
}
