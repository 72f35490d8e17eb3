//! Figure recipes: checked-in TOML files compiled into the binary.

use serde::Deserialize;

use super::config::ExperimentConfig;
use super::run::{Quantity, RunKind, RunSpec};
use crate::error::{Error, Result};

const SOURCES: &[(&str, &str)] = &[
    ("fig1b", include_str!("../../recipes/fig1b.toml")),
    ("fig2", include_str!("../../recipes/fig2.toml")),
    ("fig3b", include_str!("../../recipes/fig3b.toml")),
    ("fig4a", include_str!("../../recipes/fig4a.toml")),
    ("fig4b", include_str!("../../recipes/fig4b.toml")),
    ("fig4c", include_str!("../../recipes/fig4c.toml")),
    ("supp-omega", include_str!("../../recipes/supp-omega.toml")),
    ("supp-detuning", include_str!("../../recipes/supp-detuning.toml")),
    ("supp-ramsey", include_str!("../../recipes/supp-ramsey.toml")),
    ("supp-dd-a", include_str!("../../recipes/supp-dd-a.toml")),
    ("supp-dd-b", include_str!("../../recipes/supp-dd-b.toml")),
];

pub fn figure_ids() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(id, _)| *id)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureRecipe {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub notes: Option<String>,
    /// Base configuration shared by every output.
    #[serde(default)]
    pub config: toml::Table,
    pub outputs: Vec<RecipeOutput>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeOutput {
    pub file: String,
    pub kind: RunKind,
    /// Configuration keys changed for this output only.
    #[serde(default)]
    pub set: toml::Table,
    #[serde(default)]
    pub axis: Option<String>,
    #[serde(default)]
    pub column: Option<String>,
    #[serde(default)]
    pub values: Vec<f64>,
    /// When set, the axis value is `v · per_tau / τ_us`, which turns integer
    /// `n` into stroboscopic frequencies in MHz.
    #[serde(default)]
    pub per_tau: Option<f64>,
    #[serde(default)]
    pub quantity: Quantity,
    /// Drop the noise and detuning sections.
    #[serde(default)]
    pub noiseless: bool,
}

/// The recipe for `id`, or a usage error listing the valid ids.
pub fn recipe(id: &str) -> Result<FigureRecipe> {
    let (_, src) = SOURCES.iter().find(|(k, _)| *k == id).ok_or_else(|| {
        Error::Usage(format!(
            "unknown figure id `{id}`; valid ids: {}",
            figure_ids().collect::<Vec<_>>().join(", ")
        ))
    })?;
    toml::from_str(src).map_err(|e| Error::Config(format!("recipe {id}: {}", e.message())))
}

/// A resolved output: its configuration and what to compute.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedOutput {
    pub file: String,
    pub config: ExperimentConfig,
    pub spec: RunSpec,
}

fn value_text(v: &toml::Value) -> String {
    v.to_string()
}

impl FigureRecipe {
    /// Resolve every output. `overrides` are applied last, after the recipe's own settings.
    pub fn plan(&self, overrides: &[(String, String)]) -> Result<Vec<PlannedOutput>> {
        let base_text = toml::to_string(&self.config).expect("tables serialize");
        let base = ExperimentConfig::from_toml(&base_text)
            .map_err(|e| Error::Config(format!("recipe {}: {e}", self.id)))?;
        self.outputs
            .iter()
            .map(|out| {
                let mut cfg = base.clone();
                if out.noiseless {
                    cfg.noise = None;
                    cfg.detuning = None;
                }
                let own: Vec<(String, String)> = out.set.iter().map(|(k, v)| (k.clone(), value_text(v))).collect();
                cfg.set_all(&own)?;
                cfg.set_all(overrides)?;
                let values = match out.per_tau {
                    Some(f) => out.values.iter().map(|n| n * f / cfg.protocol.tau_us).collect(),
                    None => out.values.clone(),
                };
                let spec = RunSpec {
                    kind: out.kind,
                    axis: out.axis.clone(),
                    column: out.column.clone(),
                    values,
                    quantity: out.quantity,
                };
                spec.check(&cfg)?;
                Ok(PlannedOutput { file: out.file.clone(), config: cfg, spec })
            })
            .collect()
    }

    /// Comment lines describing the recipe itself.
    pub fn describe(&self) -> Vec<String> {
        let mut lines = vec![format!("figure {}: {}", self.id, self.title)];
        if let Some(n) = &self.notes {
            lines.extend(n.trim().lines().map(str::to_string));
        }
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_recipe_parses_and_plans() {
        for id in figure_ids() {
            let r = recipe(id).unwrap();
            assert_eq!(r.id, id);
            let plan = r.plan(&[]).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert_eq!(plan.len(), r.outputs.len());
            let mut files: Vec<_> = plan.iter().map(|p| p.file.clone()).collect();
            files.sort();
            files.dedup();
            assert_eq!(files.len(), plan.len(), "{id} repeats a file name");
            assert!(files.iter().all(|f| f.starts_with(id) && f.ends_with(".csv")), "{id}");
        }
    }

    #[test]
    fn unknown_id_lists_valid_ones() {
        match recipe("fig9") {
            Err(Error::Usage(m)) => assert!(m.contains("fig3b") && m.contains("supp-dd-b")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fig3b_uses_the_reference_parameters() {
        let plan = recipe("fig3b").unwrap().plan(&[]).unwrap();
        let names: Vec<_> = plan.iter().map(|p| p.config.protocol.name.as_str()).collect();
        assert_eq!(names, ["lz", "ff", "fe"]);
        let p = plan[2].config.protocol_params().unwrap();
        assert!((p.delta / crate::units::TWO_PI - 0.1).abs() < 1e-15);
        assert!((p.omega / crate::units::TWO_PI - 6.0).abs() < 1e-15);
        assert!((p.capital_omega - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn stroboscopic_axes_are_resolved() {
        let plan = recipe("fig2").unwrap().plan(&[]).unwrap();
        let omega_tau_over_pi: Vec<f64> = plan[0].spec.values.iter().map(|f| 2.0 * f * 4.0).collect();
        assert!(omega_tau_over_pi.iter().all(|n| (n - n.round()).abs() < 1e-12));
        let dd = recipe("supp-dd-a").unwrap().plan(&[]).unwrap();
        assert!(dd.last().unwrap().config.noise.is_none());
        assert_eq!(dd[1].config.noise.as_ref().unwrap().bandwidth_mhz, 8.0);
    }

    #[test]
    fn overrides_apply_last() {
        let o = vec![("ensemble.realizations".to_string(), "7".to_string())];
        let plan = recipe("fig4a").unwrap().plan(&o).unwrap();
        assert!(plan.iter().all(|p| p.config.ensemble.realizations == 7));
    }
}
