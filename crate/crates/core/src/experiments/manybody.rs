//! Matrix files for d-level problems and the fit-then-evolve pipeline.
//!
//! A problem file holds the dimension `d` on its first line, then `d` rows
//! of `H₀` and `d` rows of `H₁`. Each row lists `2d` numbers, the real and
//! imaginary parts of each entry in turn. Text after `#` is ignored.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::config::{ExperimentConfig, VariationalSection};
use super::csv::Table;
use crate::error::{Error, Result};
use crate::numerics::MAX_DIM;
use crate::schedules::SweepSchedule;
use crate::variational::{evolve_dense, variational_fit, DenseDrive, FitOptions, ManyBodyProblem, VariationalFit};

/// `H₀` and `H₁` parsed from matrix text.
pub fn parse_matrices(text: &str) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, first) = lines.next().ok_or_else(|| Error::Config("problem file is empty".into()))?;
    let d: usize = first
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: expected the dimension, found `{first}`")))?;
    if !(2..=MAX_DIM).contains(&d) {
        return Err(Error::Config(format!("line {line}: dimension {d} is outside 2..={MAX_DIM}")));
    }
    let mut mats = [DMatrix::zeros(d, d), DMatrix::zeros(d, d)];
    for row in 0..2 * d {
        let (line, text) = lines
            .next()
            .ok_or_else(|| Error::Config(format!("problem file ends after {row} of {} matrix rows", 2 * d)))?;
        let nums = text
            .split_whitespace()
            .map(|w| w.parse::<f64>().map_err(|_| Error::Config(format!("line {line}: `{w}` is not a number"))))
            .collect::<Result<Vec<_>>>()?;
        if nums.len() != 2 * d {
            return Err(Error::Config(format!("line {line}: expected {} numbers, found {}", 2 * d, nums.len())));
        }
        for c in 0..d {
            mats[row / d][(row % d, c)] = C64::new(nums[2 * c], nums[2 * c + 1]);
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::Config(format!("line {line}: unexpected content after the matrices")));
    }
    let [h0, h1] = mats;
    Ok((h0, h1))
}

pub fn load_problem(path: &Path, schedule: SweepSchedule) -> Result<ManyBodyProblem> {
    let text = std::fs::read_to_string(path)?;
    let (h0, h1) = parse_matrices(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    ManyBodyProblem::new(h0, h1, schedule).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Tables produced by one variational run.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalRun {
    pub fit: VariationalFit,
    /// `(l, g_l)` rows.
    pub coefficients: Table,
    /// `(label, t, ground-state fidelity)` for the bare, exact counter-diabatic and Floquet drives.
    pub traces: Vec<(&'static str, Table)>,
}

/// Fit `(Ω, g)` at one point of the sweep, then evolve under the three drives.
pub fn run_variational(cfg: &ExperimentConfig, problem: &ManyBodyProblem) -> Result<VariationalRun> {
    let v: &VariationalSection =
        cfg.variational.as_ref().ok_or_else(|| Error::Config("missing [variational] section".into()))?;
    let point = problem.schedule().eval(v.fit_fraction * v.tau)?;
    let options = FitOptions {
        budget: v.budget,
        restarts: v.restarts,
        seed: cfg.ensemble.seed,
        target: v.fit_target(),
        ..FitOptions::default()
    };
    let fit = variational_fit(problem, point.value, point.rate, v.harmonics, &options)?;
    let mut coefficients = Table::new(["harmonic", "g"]);
    for (l, g) in fit.ansatz.g.iter().enumerate() {
        coefficients.push(vec![l as f64, *g])?;
    }
    let policy = cfg.step_policy();
    let drives = [
        DenseDrive::Bare,
        DenseDrive::ExactCd,
        DenseDrive::Floquet {
            capital_omega: fit.ansatz.capital_omega,
            omega: v.omega,
            harmonics: v.harmonics,
            target: v.fit_target(),
        },
    ];
    let traces = drives
        .iter()
        .map(|d| {
            let r = evolve_dense(problem, d, &policy)?;
            let mut t = Table::new(["t", "fidelity"]);
            for (time, f) in r.times.iter().zip(&r.fidelities) {
                t.push(vec![*time, *f])?;
            }
            Ok((d.label(), t))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VariationalRun { fit, coefficients, traces })
}

/// The schedule described by the `[variational]` section.
pub fn variational_schedule(v: &VariationalSection) -> Result<SweepSchedule> {
    SweepSchedule::new(v.sweep, v.lambda0, v.tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUBIT: &str = "# sigma_z and sigma_x\n2\n1 0  0 0\n0 0 -1 0\n0 0 1 0\n1 0 0 0  # H1 row 2\n";

    #[test]
    fn parses_a_qubit() {
        let (h0, h1) = parse_matrices(QUBIT).unwrap();
        assert_eq!(h0[(1, 1)], C64::new(-1.0, 0.0));
        assert_eq!(h1[(0, 1)], C64::new(1.0, 0.0));
    }

    #[test]
    fn reports_the_offending_line() {
        let bad = "2\n1 0 0 0\n0 0 x 0\n0 0 1 0\n1 0 0 0\n";
        assert!(matches!(parse_matrices(bad), Err(Error::Config(m)) if m.starts_with("line 3")));
        let short = "2\n1 0 0\n";
        assert!(matches!(parse_matrices(short), Err(Error::Config(m)) if m.starts_with("line 2")));
        assert!(matches!(parse_matrices("3\n"), Err(Error::Config(_))));
        assert!(matches!(parse_matrices(""), Err(Error::Config(_))));
        let extra = format!("{QUBIT}1 2\n");
        assert!(matches!(parse_matrices(&extra), Err(Error::Config(m)) if m.starts_with("line 7")));
    }

    #[test]
    fn non_hermitian_files_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.txt");
        std::fs::write(&path, "2\n1 0 0 1\n0 0 -1 0\n0 0 1 0\n1 0 0 0\n").unwrap();
        let s = SweepSchedule::cubic(1.0, 1.0).unwrap();
        assert!(matches!(load_problem(&path, s), Err(Error::Config(_))));
        assert!(matches!(load_problem(&dir.path().join("none"), s), Err(Error::Io(_))));
    }

    #[test]
    fn qubit_pipeline() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.txt");
        std::fs::write(&path, QUBIT).unwrap();
        let text = format!(
            "[variational]\nproblem = \"{}\"\nlambda0 = 3.0\ntau = 3.0\nharmonics = 1\nomega = 80.0\nframe_compensated = true\nbudget = 400\nrestarts = 2\n",
            path.display()
        );
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let v = cfg.variational.as_ref().unwrap();
        let p = load_problem(&v.problem, variational_schedule(v).unwrap()).unwrap();
        let run = run_variational(&cfg, &p).unwrap();
        assert!(run.fit.residual < 1e-6);
        let last = |k: usize| *run.traces[k].1.column("fidelity").unwrap().last().unwrap();
        assert!(last(1) > 0.9999);
        assert!(last(2) > 0.99 && last(2) > last(0));
    }
}
