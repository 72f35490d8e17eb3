//! Configuration, figure recipes, scans and CSV output.

pub mod config;
pub mod csv;
pub mod manybody;
pub mod recipes;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, FinalMode, StateChoice};
pub use csv::{csv_body, export_csv, parse_csv, read_csv, to_csv_string, CsvText, Table};
pub use manybody::{load_problem, parse_matrices, run_variational, variational_schedule, VariationalRun};
pub use recipes::{figure_ids, recipe, FigureRecipe, PlannedOutput};
pub use run::{config_comments, execute, header_comments, parse_header, point_stats, replay, run_scan, simulate, PointStats, Quantity, RunKind, RunSpec};

use crate::error::Result;

/// One computed figure file, not yet written.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureOutput {
    pub file: String,
    pub table: Table,
    pub csv: CsvText,
}

/// Compute every output of figure `id` in memory.
pub fn figure_tables(id: &str, overrides: &[(String, String)]) -> Result<Vec<FigureOutput>> {
    let r = recipe(id)?;
    let plan = r.plan(overrides)?;
    let preface = r.describe();
    plan.into_iter()
        .map(|p| {
            let table = execute(&p.config, &p.spec)?;
            let mut lines = preface.clone();
            lines.push(format!("output {}", p.file));
            let csv = to_csv_string(&table, &header_comments(&p.config, &p.spec, &lines))?;
            Ok(FigureOutput { file: p.file, table, csv })
        })
        .collect()
}

/// A file written by [`run_figure`].
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenFile {
    pub path: PathBuf,
    pub rows: usize,
    pub nan_cells: usize,
}

/// Run figure `id` and write one CSV per curve into `out_dir`.
pub fn run_figure(id: &str, out_dir: &Path, overrides: &[(String, String)]) -> Result<Vec<WrittenFile>> {
    let outputs = figure_tables(id, overrides)?;
    std::fs::create_dir_all(out_dir)?;
    outputs
        .into_iter()
        .map(|o| {
            let path = out_dir.join(&o.file);
            std::fs::write(&path, &o.csv.text)?;
            Ok(WrittenFile { path, rows: o.table.rows.len(), nan_cells: o.csv.nan_cells })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn fig3b_writes_three_traces() {
        let dir = tempfile::tempdir().unwrap();
        let files = run_figure("fig3b", dir.path(), &[]).unwrap();
        assert_eq!(files.len(), 3);
        for f in &files {
            let (_, t) = read_csv(&f.path).unwrap();
            assert_eq!(t.columns, ["t_us", "fidelity"]);
            let col = t.column("fidelity").unwrap();
            assert!(col.iter().all(|v| (0.0..=1.0).contains(v)));
            assert_eq!(t.column("t_us").unwrap().last().copied(), Some(6.0));
        }
    }

    #[test]
    fn unknown_figure_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(run_figure("fig5", dir.path(), &[]), Err(Error::Usage(_))));
    }
}
