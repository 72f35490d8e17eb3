//! Execution of traces, scans and Ramsey runs, and the self-describing CSV header.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, FinalMode};
use super::csv::{parse_csv, Table};
use crate::error::{Error, Result};
use crate::evolve::{evolve_against, fidelity, final_fidelity, lab_to_rotating_result, QuantumState};
use crate::noise::{noisy_ensemble_with, ramsey_t2star, EnsembleOptions};
use crate::units::mhz;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    /// Fidelity against time for one configuration.
    Trace,
    /// Final fidelity against one configuration key.
    Scan,
    /// `1 − |⟨ψ(0)|g⟩|²` with `g` the ground state of the fields at `t = 0`.
    InitialInfidelity,
    /// Fitted Ramsey decay rate against one configuration key.
    Ramsey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    #[default]
    Fidelity,
    Infidelity,
}

impl Quantity {
    fn column(self) -> &'static str {
        match self {
            Quantity::Fidelity => "final_fidelity",
            Quantity::Infidelity => "infidelity",
        }
    }

    fn apply(self, f: f64) -> f64 {
        match self {
            Quantity::Fidelity => f,
            Quantity::Infidelity => 1.0 - f,
        }
    }
}

/// Everything besides the configuration that determines an output table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub kind: RunKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default)]
    pub quantity: Quantity,
}

impl RunSpec {
    pub fn trace() -> Self {
        RunSpec { kind: RunKind::Trace, axis: None, column: None, values: Vec::new(), quantity: Quantity::Fidelity }
    }

    pub fn scan(axis: &str, values: Vec<f64>) -> Self {
        RunSpec { kind: RunKind::Scan, axis: Some(axis.to_string()), column: None, values, quantity: Quantity::Fidelity }
    }

    /// Usage errors for missing, unknown or non-numeric axes and empty grids.
    pub fn check(&self, cfg: &ExperimentConfig) -> Result<()> {
        if self.kind == RunKind::Trace {
            return Ok(());
        }
        let axis = self.axis.as_deref().ok_or_else(|| Error::Usage("this run needs an axis".into()))?;
        if !cfg.is_numeric_key(axis)? {
            return Err(Error::Usage(format!("scan axis `{axis}` is not a numeric configuration field")));
        }
        if self.values.is_empty() {
            return Err(Error::Usage(format!("scan over `{axis}` has an empty grid")));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Usage(format!("scan grid holds a non-finite value {v}")));
        }
        if self.kind == RunKind::Ramsey && cfg.noise.is_none() {
            return Err(Error::Config("a Ramsey run needs a [noise] section".into()));
        }
        Ok(())
    }

    fn axis_column(&self, cfg: &ExperimentConfig) -> Result<String> {
        if let Some(c) = &self.column {
            return Ok(c.clone());
        }
        let axis = cfg.canonical_key(self.axis.as_deref().unwrap_or("t_us"))?;
        Ok(axis.rsplit('.').next().unwrap_or(&axis).to_string())
    }
}

/// Final-fidelity statistics of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointStats {
    pub mean: f64,
    pub std: f64,
    pub sem: f64,
}

fn is_ensemble(cfg: &ExperimentConfig) -> bool {
    cfg.noise.is_some() || cfg.detuning.as_ref().is_some_and(|d| d.sigma_khz > 0.0)
}

fn window(cfg: &ExperimentConfig) -> f64 {
    match cfg.measure.final_mode {
        FinalMode::Window => cfg.measure.final_window_us,
        FinalMode::Last => 0.0,
    }
}

struct Prepared {
    fields: crate::protocols::ControlFields,
    options: EnsembleOptions,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    Ok(Prepared {
        fields: cfg.fields()?,
        options: EnsembleOptions {
            initial: cfg.initial_state()?,
            target: cfg.target_state()?,
            final_window: window(cfg),
            carrier: cfg.lab.as_ref().map(|l| mhz(l.carrier_mhz)),
        },
    })
}

fn single_run(cfg: &ExperimentConfig, p: &Prepared) -> Result<crate::evolve::EvolutionResult> {
    let o = &p.options;
    let mut r = evolve_against(&p.fields, &cfg.step_policy(), &o.initial, &o.target, None, None)?;
    if let Some(c) = o.carrier {
        lab_to_rotating_result(&mut r, &o.target, c)?;
    }
    Ok(r)
}

fn ensemble(cfg: &ExperimentConfig, p: &Prepared) -> Result<crate::noise::EnsembleResult> {
    let noise = cfg.noise_spec()?;
    let detuning = cfg.detuning_spec()?.filter(|_| cfg.detuning.as_ref().is_some_and(|d| d.sigma_khz > 0.0));
    noisy_ensemble_with(
        &p.fields,
        noise.as_ref(),
        detuning.as_ref(),
        cfg.ensemble.realizations,
        &cfg.step_policy(),
        &p.options,
    )
}

/// Mean, standard deviation and standard error of the final fidelity.
pub fn point_stats(cfg: &ExperimentConfig) -> Result<PointStats> {
    let p = prepare(cfg)?;
    if is_ensemble(cfg) {
        let e = ensemble(cfg, &p)?;
        Ok(PointStats { mean: e.final_mean, std: e.final_std, sem: e.final_sem })
    } else {
        let r = single_run(cfg, &p)?;
        Ok(PointStats { mean: final_fidelity(&r, window(cfg))?, std: 0.0, sem: 0.0 })
    }
}

/// Fidelity trace of one configuration together with its final-fidelity statistics.
pub fn simulate(cfg: &ExperimentConfig) -> Result<(Table, PointStats)> {
    trace_table(cfg, Quantity::Fidelity)
}

fn trace_table(cfg: &ExperimentConfig, q: Quantity) -> Result<(Table, PointStats)> {
    let p = prepare(cfg)?;
    let name = match q {
        Quantity::Fidelity => "fidelity",
        Quantity::Infidelity => "infidelity",
    };
    if is_ensemble(cfg) {
        let e = ensemble(cfg, &p)?;
        let mut t = Table::new(["t_us", "mean", "std", "sem"]);
        for k in 0..e.times.len() {
            t.push(vec![e.times[k], q.apply(e.mean[k]), e.std[k], e.sem[k]])?;
        }
        Ok((t, PointStats { mean: e.final_mean, std: e.final_std, sem: e.final_sem }))
    } else {
        let r = single_run(cfg, &p)?;
        let mut t = Table::new(["t_us", name]);
        for (time, f) in r.times.iter().zip(&r.fidelities) {
            t.push(vec![*time, q.apply(*f)])?;
        }
        let mean = final_fidelity(&r, window(cfg))?;
        Ok((t, PointStats { mean, std: 0.0, sem: 0.0 }))
    }
}

fn at_point(cfg: &ExperimentConfig, axis: &str, v: f64) -> Result<ExperimentConfig> {
    let mut c = cfg.clone();
    c.set(axis, &format!("{v:?}"))?;
    Ok(c)
}

fn initial_infidelity(cfg: &ExperimentConfig) -> Result<f64> {
    let fields = match cfg.fields() {
        Ok(f) => f,
        Err(Error::Singularity { .. }) => return Ok(f64::NAN),
        Err(e) => return Err(e),
    };
    let ground = QuantumState::ground_state(fields.at(0.0))?;
    Ok(1.0 - fidelity(&cfg.initial_state()?, &ground)?)
}

/// The table described by `spec` under `cfg`.
pub fn execute(cfg: &ExperimentConfig, spec: &RunSpec) -> Result<Table> {
    spec.check(cfg)?;
    if spec.kind == RunKind::Trace {
        return Ok(trace_table(cfg, spec.quantity)?.0);
    }
    let axis = spec.axis.as_deref().expect("checked");
    let col = spec.axis_column(cfg)?;
    match spec.kind {
        RunKind::Trace => unreachable!(),
        RunKind::Scan => {
            let rows = spec
                .values
                .par_iter()
                .map(|&v| {
                    let s = point_stats(&at_point(cfg, axis, v)?)?;
                    Ok(vec![v, spec.quantity.apply(s.mean), s.std, s.sem])
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Table { columns: vec![col, spec.quantity.column().into(), "std".into(), "sem".into()], rows })
        }
        RunKind::InitialInfidelity => {
            let rows = spec
                .values
                .par_iter()
                .map(|&v| Ok(vec![v, initial_infidelity(&at_point(cfg, axis, v)?)?]))
                .collect::<Result<Vec<_>>>()?;
            Ok(Table { columns: vec![col, "infidelity".into()], rows })
        }
        RunKind::Ramsey => {
            let r = cfg.ramsey.clone().unwrap_or_default();
            let rows = spec
                .values
                .iter()
                .map(|&v| {
                    let c = at_point(cfg, axis, v)?;
                    let noise = c.noise_spec()?.expect("checked");
                    let fit = ramsey_t2star(&noise, mhz(r.detuning_mhz), r.duration_us, c.ensemble.realizations)?;
                    Ok(vec![v, fit.fit.rate, fit.fit.rate_std(), fit.t2star(), noise.dephasing_rate()])
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Table {
                columns: vec![
                    col,
                    "gamma_d_mhz".into(),
                    "gamma_d_std".into(),
                    "t2star_us".into(),
                    "gamma_d_model_mhz".into(),
                ],
                rows,
            })
        }
    }
}

/// Final fidelity (mean, std, sem) for each value of `axis`.
pub fn run_scan(cfg: &ExperimentConfig, axis: &str, values: &[f64]) -> Result<Table> {
    execute(cfg, &RunSpec::scan(axis, values.to_vec()))
}

const CONFIG_PREFIX: &str = "| ";
const SPEC_PREFIX: &str = "@ ";

/// Header comment lines embedding the resolved configuration and run spec.
pub fn header_comments(cfg: &ExperimentConfig, spec: &RunSpec, preface: &[String]) -> Vec<String> {
    let mut lines = config_comments(cfg, preface);
    lines.push("run:".into());
    let spec_text = toml::to_string(spec).expect("run specs serialize");
    lines.extend(spec_text.lines().map(|l| format!("{SPEC_PREFIX}{l}")));
    lines
}

/// Header comment lines embedding only the resolved configuration.
pub fn config_comments(cfg: &ExperimentConfig, preface: &[String]) -> Vec<String> {
    let mut lines = preface.to_vec();
    lines.push("resolved configuration:".into());
    lines.extend(cfg.to_toml().lines().map(|l| format!("{CONFIG_PREFIX}{l}")));
    lines
}

/// Configuration and run spec recovered from a CSV written by this module.
pub fn parse_header(comments: &[String]) -> Result<(ExperimentConfig, RunSpec)> {
    let collect = |prefix: &str| -> String {
        comments
            .iter()
            .filter_map(|c| c.strip_prefix(prefix).or_else(|| (c == prefix.trim_end()).then_some("")))
            .flat_map(|l| [l, "\n"])
            .collect()
    };
    let cfg = ExperimentConfig::from_toml(&collect(CONFIG_PREFIX))?;
    let spec: RunSpec = toml::from_str(&collect(SPEC_PREFIX))
        .map_err(|e| Error::Config(format!("run description in header: {}", e.message())))?;
    Ok((cfg, spec))
}

/// Recompute a table from the header of a CSV.
pub fn replay(csv_text: &str) -> Result<Table> {
    let (comments, _) = parse_csv(csv_text)?;
    let (cfg, spec) = parse_header(&comments)?;
    execute(&cfg, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::csv::to_csv_string;

    fn quick() -> ExperimentConfig {
        let mut c = ExperimentConfig::from_toml("[protocol]\ntau_us = 1.0\n[stepper]\nbase_dt_us = 0.002\n").unwrap();
        c.set("protocol.name", "\"ff\"").unwrap();
        c
    }

    #[test]
    fn scan_rejects_bad_axes() {
        let c = quick();
        assert!(matches!(run_scan(&c, "protocol.name", &[1.0]), Err(Error::Usage(_))));
        assert!(matches!(run_scan(&c, "nope", &[1.0]), Err(Error::Usage(_))));
        assert!(matches!(run_scan(&c, "tau", &[]), Err(Error::Usage(_))));
    }

    #[test]
    fn noiseless_scan_rows() {
        let t = run_scan(&quick(), "tau", &[1.0, 2.0]).unwrap();
        assert_eq!(t.columns, ["tau_us", "final_fidelity", "std", "sem"]);
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r[1] > 0.9 && r[2] == 0.0));
    }

    #[test]
    fn ensemble_trace_has_error_columns() {
        let mut c = quick();
        c.set("detuning.sigma_khz", "8.0").unwrap();
        c.set("ensemble.realizations", "4").unwrap();
        let t = execute(&c, &RunSpec::trace()).unwrap();
        assert_eq!(t.columns, ["t_us", "mean", "std", "sem"]);
    }

    #[test]
    fn header_replays_the_run() {
        let mut c = quick();
        c.set("noise.bandwidth_mhz", "1.0").unwrap_err();
        let c = {
            let mut d = ExperimentConfig::from_toml(&format!("{}\n[noise]\nbandwidth_mhz = 1.0\nrms_mhz = 0.05\ntones = 50\n", c.to_toml())).unwrap();
            d.set("ensemble.realizations", "3").unwrap();
            d
        };
        let spec = RunSpec::scan("noise.rms_mhz", vec![0.02, 0.05]);
        let t = execute(&c, &spec).unwrap();
        let text = to_csv_string(&t, &header_comments(&c, &spec, &["note".into()])).unwrap().text;
        let (cfg2, spec2) = parse_header(&parse_csv(&text).unwrap().0).unwrap();
        assert_eq!(cfg2, c);
        assert_eq!(spec2, spec);
        assert_eq!(replay(&text).unwrap(), t);
    }

    #[test]
    fn initial_infidelity_marks_the_guard_band() {
        let c = ExperimentConfig::default();
        let z = crate::numerics::bessel_j_zero(1, 1).unwrap() / 2.0;
        let spec = RunSpec { kind: RunKind::InitialInfidelity, values: vec![0.5, z], ..RunSpec::scan("capital_omega", vec![]) };
        let t = execute(&c, &spec).unwrap();
        assert!(t.rows[0][1] < 0.01);
        assert!(t.rows[1][1].is_nan());
    }
}
