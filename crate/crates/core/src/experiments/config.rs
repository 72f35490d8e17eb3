//! Run configuration in a TOML subset with explicit units in every key.
//!
//! Frequencies are ordinary frequencies (`x/2π`) in MHz or kHz, times are
//! in µs. Every section is optional and defaults to the Fig. 3 protocol.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{QuantumState, StepPolicy, Stepper, DEFAULT_FINAL_WINDOW};
use crate::noise::{DetuningSpec, NoiseSpec, DEFAULT_REALIZATIONS, DEFAULT_TONES};
use crate::numerics::{bessel_j, PauliVector};
use crate::protocols::{fields, lab_frame_fields, validate_floquet_params, ControlFields, Protocol, ProtocolParams};
use crate::schedules::{SweepKind, SweepSchedule};
use crate::units::{khz, mhz, PI};
use crate::variational::FitTarget;

const DEFAULT_DELTA_MHZ: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default)]
    pub measure: MeasureSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lab: Option<LabSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<DetuningSection>,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramsey: Option<RamseySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variational: Option<VariationalSection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Boundary state of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateChoice {
    MinusX,
    PlusX,
    /// Ground state of `λσx + Δ'σz` at the relevant end of the sweep, where
    /// `Δ'` is the rotating-frame gap of the Floquet drive and `Δ` otherwise.
    Ground,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub name: Protocol,
    /// Lab gap `Δ/2π`. Give this or `effective_delta_mhz`, not both;
    /// with neither, `Δ/2π = 0.1 MHz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_mhz: Option<f64>,
    /// Rotating-frame gap `Δ'/2π = ΔJ₀(2Ω)/2π`; sets `Δ = Δ'/J₀(2Ω)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective_delta_mhz: Option<f64>,
    pub lambda0_mhz: f64,
    pub tau_us: f64,
    pub sweep: SweepKind,
    pub omega_mhz: f64,
    /// `Ω`; give this or `capital_omega_over_pi`, not both. Defaults to `π/4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capital_omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capital_omega_over_pi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_mhz: Option<f64>,
    pub j1_guard: f64,
    pub initial: StateChoice,
    pub target: StateChoice,
    /// Escalate Floquet validation warnings to configuration errors.
    pub strict_floquet: bool,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        ProtocolSection {
            name: Protocol::FloquetEngineered,
            delta_mhz: None,
            effective_delta_mhz: None,
            lambda0_mhz: 1.5,
            tau_us: 6.0,
            sweep: SweepKind::Linear,
            omega_mhz: 6.0,
            capital_omega: None,
            capital_omega_over_pi: None,
            alpha_mhz: None,
            j1_guard: crate::protocols::DEFAULT_J1_GUARD,
            initial: StateChoice::MinusX,
            target: StateChoice::PlusX,
            strict_floquet: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperSection {
    pub method: Stepper,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_dt_us: Option<f64>,
    pub oversample_per_period: usize,
    pub record_stride: usize,
    pub refinement: usize,
}

impl Default for StepperSection {
    fn default() -> Self {
        let p = StepPolicy::default();
        StepperSection {
            method: p.stepper,
            base_dt_us: None,
            oversample_per_period: p.oversample_per_period,
            record_stride: p.record_stride,
            refinement: p.refinement,
        }
    }
}

/// How a run is reduced to one final fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalMode {
    /// Mean over the last `final_window_us`.
    Window,
    /// The sample at `t = τ`, which is stroboscopic when `ωτ = nπ`.
    Last,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSection {
    pub final_mode: FinalMode,
    pub final_window_us: f64,
}

impl Default for MeasureSection {
    fn default() -> Self {
        MeasureSection { final_mode: FinalMode::Window, final_window_us: DEFAULT_FINAL_WINDOW }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabSection {
    pub carrier_mhz: f64,
}

/// Band-limited dephasing noise. Exactly one strength key must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub bandwidth_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rms_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asd_mhz_per_sqrt_mhz: Option<f64>,
    /// Strength chosen so the ensemble Ramsey decay time equals this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2star_us: Option<f64>,
    #[serde(default = "default_tones")]
    pub tones: usize,
    #[serde(default = "default_alpha")]
    pub alpha_corr: f64,
}

fn default_tones() -> usize {
    DEFAULT_TONES
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetuningSection {
    pub sigma_khz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub realizations: usize,
    pub seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection { realizations: DEFAULT_REALIZATIONS, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RamseySection {
    pub detuning_mhz: f64,
    pub duration_us: f64,
}

impl Default for RamseySection {
    fn default() -> Self {
        RamseySection { detuning_mhz: 1.0, duration_us: 20.0 }
    }
}

/// d-level problem. Matrices, `λ₀`, `ω` and times are in the problem's own units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationalSection {
    pub problem: PathBuf,
    pub lambda0: f64,
    pub tau: f64,
    #[serde(default = "default_sweep")]
    pub sweep: SweepKind,
    pub harmonics: usize,
    /// Angular Floquet frequency for the dense run.
    pub omega: f64,
    /// Fraction of the sweep at which `Ω` is fitted.
    #[serde(default = "default_fit_fraction")]
    pub fit_fraction: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub frame_compensated: bool,
}

fn default_sweep() -> SweepKind {
    SweepKind::Cubic
}

fn default_fit_fraction() -> f64 {
    0.5
}

fn default_budget() -> usize {
    2000
}

fn default_restarts() -> usize {
    5
}

impl VariationalSection {
    pub fn fit_target(&self) -> FitTarget {
        if self.frame_compensated {
            FitTarget::FrameCompensated
        } else {
            FitTarget::GaugePotential
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out") }
    }
}

/// 1-based line of byte offset `pos` in `text`.
fn line_of(text: &str, pos: usize) -> usize {
    text[..pos.min(text.len())].matches('\n').count() + 1
}

/// Line on which `key` (the last component of a dotted path) is assigned.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let leaf = key.rsplit('.').next().unwrap_or(key);
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(leaf).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn config_error(text: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    match line_of_key(text, key) {
        Some(line) => Error::Config(format!("line {line}: {key}: {msg}")),
        None => Error::Config(format!("{key}: {msg}")),
    }
}

fn positive(v: f64, key: &str) -> std::result::Result<f64, (String, String)> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err((key.to_string(), format!("must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    /// Parse and validate; errors carry the offending line number.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            match e.span() {
                Some(span) => Error::Config(format!("line {}: {msg}", line_of(text, span.start))),
                None => Error::Config(msg),
            }
        })?;
        cfg.validate().map_err(|(key, msg)| config_error(text, &key, msg))?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// Set a dotted key such as `protocol.tau_us` from its textual value.
    ///
    /// A bare key (e.g. `tau_us`) is accepted when it names exactly one field.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.set_all(&[(key.to_string(), value.to_string())])
    }

    /// Apply several assignments and validate once, so that a section can be
    /// built up one key at a time.
    pub fn set_all(&mut self, pairs: &[(String, String)]) -> Result<()> {
        let mut table: toml::Table = toml::from_str(&self.to_toml()).expect("own output parses");
        for (key, value) in pairs {
            let path = self.resolve_key(&table, key)?;
            let (section, leaf) = path.split_once('.').expect("resolved keys are dotted");
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let toml::Value::Table(t) = entry else {
                return Err(Error::Usage(format!("{section} is not a section")));
            };
            t.insert(leaf.to_string(), parse_value(value, INTEGER_KEYS.contains(&path.as_str())));
            // Alternative keys for the same quantity: setting one clears the others.
            for group in EXCLUSIVE.iter().filter(|g| g.contains(&path.as_str())) {
                for other in group.iter().filter(|k| **k != path) {
                    if let Some((s, l)) = other.split_once('.') {
                        if let Some(toml::Value::Table(t)) = table.get_mut(s) {
                            t.remove(l);
                        }
                    }
                }
            }
        }
        let text = toml::to_string(&table).expect("table serializes");
        let describe = || pairs.iter().map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join(", ");
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", describe(), e.message())))?;
        cfg.validate().map_err(|(k, m)| Error::Config(format!("{k}: {m}")))?;
        *self = cfg;
        Ok(())
    }

    /// Numeric value currently stored at `key`, if any.
    pub fn get_number(&self, key: &str) -> Result<Option<f64>> {
        let table: toml::Table = toml::from_str(&self.to_toml()).expect("own output parses");
        let path = self.resolve_key(&table, key)?;
        let (section, leaf) = path.split_once('.').expect("resolved keys are dotted");
        Ok(table.get(section).and_then(|s| s.get(leaf)).and_then(|v| match v {
            toml::Value::Float(f) => Some(*f),
            toml::Value::Integer(i) => Some(*i as f64),
            _ => None,
        }))
    }

    /// Whether `key` names a numeric field.
    pub fn is_numeric_key(&self, key: &str) -> Result<bool> {
        let path = self.resolve_key(&toml::from_str(&self.to_toml()).expect("own output parses"), key)?;
        Ok(NUMERIC_KEYS.contains(&path.as_str()))
    }

    /// Full dotted name of `key`, resolving aliases and unique bare names.
    pub fn canonical_key(&self, key: &str) -> Result<String> {
        self.resolve_key(&toml::from_str(&self.to_toml()).expect("own output parses"), key)
    }

    fn resolve_key(&self, table: &toml::Table, key: &str) -> Result<String> {
        if let Some((_, full)) = ALIASES.iter().find(|(a, _)| *a == key) {
            return Ok(full.to_string());
        }
        if key.contains('.') {
            if ALL_KEYS.contains(&key) {
                return Ok(key.to_string());
            }
            return Err(Error::Usage(format!("unknown configuration key `{key}`")));
        }
        let hits: Vec<&&str> = ALL_KEYS.iter().filter(|k| k.rsplit('.').next() == Some(key)).collect();
        match hits.as_slice() {
            [one] => Ok(one.to_string()),
            [] => Err(Error::Usage(format!("unknown configuration key `{key}`"))),
            many => {
                // Prefer a section that is present.
                let present: Vec<_> =
                    many.iter().filter(|k| table.contains_key(k.split('.').next().unwrap_or(""))).collect();
                match present.as_slice() {
                    [one] => Ok(one.to_string()),
                    _ => Err(Error::Usage(format!(
                        "key `{key}` is ambiguous: {}",
                        many.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", ")
                    ))),
                }
            }
        }
    }

    fn validate(&self) -> std::result::Result<(), (String, String)> {
        let p = &self.protocol;
        match (p.delta_mhz, p.effective_delta_mhz) {
            (Some(_), Some(_)) => {
                return Err((
                    "protocol.delta_mhz".into(),
                    "give only one of delta_mhz and effective_delta_mhz".into(),
                ))
            }
            (Some(d), None) => {
                positive(d, "protocol.delta_mhz")?;
            }
            (None, Some(d)) => {
                positive(d, "protocol.effective_delta_mhz")?;
            }
            (None, None) => {}
        }
        if p.capital_omega.is_some() && p.capital_omega_over_pi.is_some() {
            return Err((
                "protocol.capital_omega".into(),
                "give only one of capital_omega and capital_omega_over_pi".into(),
            ));
        }
        if !self.capital_omega().is_finite() {
            return Err(("protocol.capital_omega".into(), "must be finite".into()));
        }
        if !p.lambda0_mhz.is_finite() {
            return Err(("protocol.lambda0_mhz".into(), "must be finite".into()));
        }
        positive(p.tau_us, "protocol.tau_us")?;
        if !(p.omega_mhz.is_finite() && p.omega_mhz >= 0.0) {
            return Err(("protocol.omega_mhz".into(), "must be non-negative".into()));
        }
        if let Some(a) = p.alpha_mhz {
            positive(a, "protocol.alpha_mhz")?;
        }
        if !(p.j1_guard.is_finite() && p.j1_guard >= 0.0) {
            return Err(("protocol.j1_guard".into(), "must be non-negative".into()));
        }
        let s = &self.stepper;
        if let Some(dt) = s.base_dt_us {
            positive(dt, "stepper.base_dt_us")?;
        }
        for (v, k) in [
            (s.oversample_per_period, "stepper.oversample_per_period"),
            (s.record_stride, "stepper.record_stride"),
            (s.refinement, "stepper.refinement"),
        ] {
            if v == 0 {
                return Err((k.into(), "must be at least 1".into()));
            }
        }
        if !(self.measure.final_window_us.is_finite() && self.measure.final_window_us >= 0.0) {
            return Err(("measure.final_window_us".into(), "must be non-negative".into()));
        }
        if let Some(lab) = &self.lab {
            positive(lab.carrier_mhz, "lab.carrier_mhz")?;
        }
        if let Some(n) = &self.noise {
            positive(n.bandwidth_mhz, "noise.bandwidth_mhz")?;
            let given = [n.rms_mhz.is_some(), n.asd_mhz_per_sqrt_mhz.is_some(), n.t2star_us.is_some()];
            if given.iter().filter(|g| **g).count() != 1 {
                return Err((
                    "noise.bandwidth_mhz".into(),
                    "give exactly one of rms_mhz, asd_mhz_per_sqrt_mhz and t2star_us".into(),
                ));
            }
            for (v, k) in [
                (n.rms_mhz, "noise.rms_mhz"),
                (n.asd_mhz_per_sqrt_mhz, "noise.asd_mhz_per_sqrt_mhz"),
            ] {
                if let Some(v) = v {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err((k.into(), format!("must be non-negative, got {v}")));
                    }
                }
            }
            if let Some(t) = n.t2star_us {
                positive(t, "noise.t2star_us")?;
            }
            if n.tones == 0 {
                return Err(("noise.tones".into(), "must be at least 1".into()));
            }
            positive(n.alpha_corr, "noise.alpha_corr")?;
        }
        if let Some(d) = &self.detuning {
            if !(d.sigma_khz.is_finite() && d.sigma_khz >= 0.0) {
                return Err(("detuning.sigma_khz".into(), "must be non-negative".into()));
            }
        }
        if let Some(r) = &self.ramsey {
            positive(r.duration_us, "ramsey.duration_us")?;
            if !r.detuning_mhz.is_finite() {
                return Err(("ramsey.detuning_mhz".into(), "must be finite".into()));
            }
        }
        if let Some(v) = &self.variational {
            positive(v.tau, "variational.tau")?;
            positive(v.omega, "variational.omega")?;
            if v.harmonics == 0 {
                return Err(("variational.harmonics".into(), "must be at least 1".into()));
            }
            if !(0.0..=1.0).contains(&v.fit_fraction) {
                return Err(("variational.fit_fraction".into(), "must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }

    pub fn capital_omega(&self) -> f64 {
        let p = &self.protocol;
        p.capital_omega.unwrap_or_else(|| p.capital_omega_over_pi.unwrap_or(0.25) * PI)
    }

    pub fn protocol_params(&self) -> Result<ProtocolParams> {
        let p = &self.protocol;
        let om = self.capital_omega();
        let delta = match (p.delta_mhz, p.effective_delta_mhz) {
            (Some(d), _) => mhz(d),
            (None, Some(d)) => {
                let j0 = bessel_j(0, 2.0 * om)?;
                if j0.abs() < 1e-6 {
                    return Err(Error::Config(format!("J0(2Ω) = {j0:.3e} is too small to set delta from effective_delta_mhz")));
                }
                mhz(d) / j0.abs()
            }
            (None, None) => mhz(DEFAULT_DELTA_MHZ),
        };
        let schedule = SweepSchedule::new(p.sweep, mhz(p.lambda0_mhz), p.tau_us)?;
        let mut params = ProtocolParams::new(delta, schedule)?
            .with_floquet(mhz(p.omega_mhz), om)
            .with_j1_guard(p.j1_guard);
        if let Some(a) = p.alpha_mhz {
            params = params.with_alpha(mhz(a));
        }
        Ok(params)
    }

    /// Fields of the configured protocol, in the lab frame if `[lab]` is set.
    pub fn fields(&self) -> Result<ControlFields> {
        let params = self.protocol_params()?;
        if self.protocol.name == Protocol::FloquetEngineered {
            validate_floquet_params(&params)?.check(self.protocol.strict_floquet)?;
        }
        let f = fields(self.protocol.name, &params)?;
        match &self.lab {
            Some(lab) => lab_frame_fields(&f, mhz(lab.carrier_mhz)),
            None => Ok(f),
        }
    }

    pub fn step_policy(&self) -> StepPolicy {
        let s = &self.stepper;
        StepPolicy {
            base_dt: s.base_dt_us,
            oversample_per_period: s.oversample_per_period,
            record_stride: s.record_stride,
            stepper: s.method,
            strobe_omega: None,
            refinement: s.refinement,
        }
    }

    fn state(&self, choice: StateChoice, at_end: bool) -> Result<QuantumState> {
        match choice {
            StateChoice::MinusX => Ok(QuantumState::minus_x()),
            StateChoice::PlusX => Ok(QuantumState::plus_x()),
            StateChoice::Ground => {
                let params = self.protocol_params()?;
                let gap = match self.protocol.name {
                    Protocol::FloquetEngineered => params.effective_delta()?,
                    _ => params.delta,
                };
                let t = if at_end { params.tau() } else { 0.0 };
                let lambda = params.schedule.eval(t)?.value;
                QuantumState::ground_state(PauliVector::new(lambda, 0.0, gap))
            }
        }
    }

    pub fn initial_state(&self) -> Result<QuantumState> {
        self.state(self.protocol.initial, false)
    }

    pub fn target_state(&self) -> Result<QuantumState> {
        self.state(self.protocol.target, true)
    }

    pub fn noise_spec(&self) -> Result<Option<NoiseSpec>> {
        let Some(n) = &self.noise else { return Ok(None) };
        let bw = mhz(n.bandwidth_mhz);
        let seed = self.ensemble.seed;
        let spec = if let Some(rms) = n.rms_mhz {
            NoiseSpec::from_rms(bw, mhz(rms), n.tones, seed)?
        } else if let Some(asd) = n.asd_mhz_per_sqrt_mhz {
            NoiseSpec::from_asd(bw, asd, n.tones, seed)?
        } else {
            // dephasing_rate = 2πΓα², so Γ follows from the requested decay time.
            let t2 = n.t2star_us.expect("validated");
            let psd = 1.0 / (t2 * crate::units::TWO_PI * n.alpha_corr * n.alpha_corr);
            return Ok(Some(NoiseSpec::new(bw, psd, n.tones, seed)?.with_alpha(n.alpha_corr)?));
        };
        Ok(Some(spec.with_alpha(n.alpha_corr)?))
    }

    pub fn detuning_spec(&self) -> Result<Option<DetuningSpec>> {
        self.detuning
            .as_ref()
            .map(|d| DetuningSpec::new(khz(d.sigma_khz), self.ensemble.seed))
            .transpose()
    }
}

/// `"1.5"` → float, `"lz"` → string, `"[1, 2]"` → array, and so on.
fn parse_value(text: &str, integer: bool) -> toml::Value {
    let doc = format!("v = {text}");
    match toml::from_str::<toml::Table>(&doc).ok().and_then(|mut t| t.remove("v")) {
        Some(toml::Value::Integer(i)) if !integer => toml::Value::Float(i as f64),
        Some(toml::Value::Float(f)) if integer && f.fract() == 0.0 && f.abs() < 9e15 => toml::Value::Integer(f as i64),
        Some(v) => v,
        None => toml::Value::String(text.to_string()),
    }
}

/// Short scan-axis names.
const ALIASES: &[(&str, &str)] = &[
    ("tau", "protocol.tau_us"),
    ("delta", "protocol.delta_mhz"),
    ("lambda0", "protocol.lambda0_mhz"),
    ("omega", "protocol.omega_mhz"),
    ("gamma_rms", "noise.rms_mhz"),
    ("asd", "noise.asd_mhz_per_sqrt_mhz"),
    ("bandwidth", "noise.bandwidth_mhz"),
    ("sigma", "detuning.sigma_khz"),
];

const EXCLUSIVE: &[&[&str]] = &[
    &["noise.rms_mhz", "noise.asd_mhz_per_sqrt_mhz", "noise.t2star_us"],
    &["protocol.delta_mhz", "protocol.effective_delta_mhz"],
    &["protocol.capital_omega", "protocol.capital_omega_over_pi"],
];

const NUMERIC_KEYS: &[&str] = &[
    "protocol.delta_mhz",
    "protocol.effective_delta_mhz",
    "protocol.lambda0_mhz",
    "protocol.tau_us",
    "protocol.omega_mhz",
    "protocol.capital_omega",
    "protocol.capital_omega_over_pi",
    "protocol.alpha_mhz",
    "protocol.j1_guard",
    "stepper.base_dt_us",
    "stepper.oversample_per_period",
    "stepper.record_stride",
    "stepper.refinement",
    "measure.final_window_us",
    "lab.carrier_mhz",
    "noise.bandwidth_mhz",
    "noise.rms_mhz",
    "noise.asd_mhz_per_sqrt_mhz",
    "noise.t2star_us",
    "noise.tones",
    "noise.alpha_corr",
    "detuning.sigma_khz",
    "ensemble.realizations",
    "ensemble.seed",
    "ramsey.detuning_mhz",
    "ramsey.duration_us",
    "variational.lambda0",
    "variational.tau",
    "variational.harmonics",
    "variational.omega",
    "variational.fit_fraction",
    "variational.budget",
    "variational.restarts",
];

const INTEGER_KEYS: &[&str] = &[
    "stepper.oversample_per_period",
    "stepper.record_stride",
    "stepper.refinement",
    "noise.tones",
    "ensemble.realizations",
    "ensemble.seed",
    "variational.harmonics",
    "variational.budget",
    "variational.restarts",
];

const OTHER_KEYS: &[&str] = &[
    "protocol.name",
    "protocol.sweep",
    "protocol.initial",
    "protocol.target",
    "protocol.strict_floquet",
    "stepper.method",
    "measure.final_mode",
    "variational.problem",
    "variational.sweep",
    "variational.frame_compensated",
    "output.dir",
];

const ALL_KEYS: &[&str] = &{
    let mut all = [""; NUMERIC_KEYS.len() + OTHER_KEYS.len()];
    let mut i = 0;
    while i < NUMERIC_KEYS.len() {
        all[i] = NUMERIC_KEYS[i];
        i += 1;
    }
    let mut j = 0;
    while j < OTHER_KEYS.len() {
        all[i + j] = OTHER_KEYS[j];
        j += 1;
    }
    all
};
