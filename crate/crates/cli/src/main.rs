use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use floquet_core::experiments::{
    self, config_comments, export_csv, header_comments, load_problem, run_variational, variational_schedule,
    ExperimentConfig, RunSpec, Table,
};
use floquet_core::noise::ramsey_t2star;
use floquet_core::units::mhz;
use floquet_core::{Error, Protocol, Result};

#[derive(Parser)]
#[command(name = "floquet", version, about = "Floquet-engineered fast-forward state preparation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for noise, detuning and fit restarts.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; defaults to `output.dir` of the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for ensembles and scans.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Treat Floquet parameter warnings as configuration errors.
    #[arg(long, global = true)]
    strict_floquet: bool,
    /// Override a configuration key, e.g. `--set protocol.tau_us=4`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol and write its fidelity trace.
    Simulate {
        /// lz, cd, ff or fe; overrides `protocol.name`.
        #[arg(long)]
        protocol: Option<String>,
    },
    /// Final fidelity against one configuration key.
    Scan {
        /// Key to vary, e.g. `protocol.tau_us` or `gamma_rms`.
        #[arg(long)]
        axis: String,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', conflicts_with = "range")]
        values: Vec<f64>,
        /// `start:stop:count`, inclusive of both ends.
        #[arg(long)]
        range: Option<String>,
        #[arg(long)]
        protocol: Option<String>,
    },
    /// Reproduce one figure from its recipe.
    Figure {
        /// Figure id; omit with --list.
        id: Option<String>,
        /// Print the valid ids.
        #[arg(long)]
        list: bool,
    },
    /// Fit a variational Floquet drive for a d-level problem and evolve it.
    Variational {
        /// Matrix file; overrides `variational.problem`.
        #[arg(long)]
        problem: Option<PathBuf>,
    },
    /// Simulated Ramsey experiment and fitted T2*.
    Ramsey,
}

fn split_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got `{s}`")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Overrides from the command line, applied on top of the configuration or recipe.
fn overrides(g: &Global) -> Result<Vec<(String, String)>> {
    let mut o = g.set.iter().map(|s| split_override(s)).collect::<Result<Vec<_>>>()?;
    if let Some(seed) = g.seed {
        o.push(("ensemble.seed".into(), seed.to_string()));
    }
    if g.strict_floquet {
        o.push(("protocol.strict_floquet".into(), "true".into()));
    }
    Ok(o)
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.set_all(&overrides(g)?)?;
    Ok(cfg)
}

fn set_protocol(cfg: &mut ExperimentConfig, name: Option<&str>) -> Result<()> {
    if let Some(n) = name {
        cfg.protocol.name = n.parse::<Protocol>()?;
    }
    Ok(())
}

fn out_dir(g: &Global, cfg: &ExperimentConfig) -> PathBuf {
    g.out.clone().unwrap_or_else(|| cfg.output.dir.clone())
}

fn write(path: &Path, table: &Table, comments: &[String]) -> Result<()> {
    let out = export_csv(table, comments, path)?;
    if out.nan_cells > 0 {
        eprintln!("warning: {} wrote {} empty (NaN) cells", path.display(), out.nan_cells);
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn parse_range(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Usage(format!("--range expects start:stop:count, got `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    Ok(match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    })
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Usage(format!("cannot set up {n} threads: {e}")))?;
    }
    match &cli.command {
        Command::Simulate { protocol } => {
            let mut cfg = load_config(g)?;
            set_protocol(&mut cfg, protocol.as_deref())?;
            let spec = RunSpec::trace();
            let (table, stats) = experiments::simulate(&cfg)?;
            let path = out_dir(g, &cfg).join(format!("simulate_{}.csv", cfg.protocol.name));
            write(&path, &table, &header_comments(&cfg, &spec, &[]))?;
            println!("final fidelity {:.10} (std {:.3e}, sem {:.3e})", stats.mean, stats.std, stats.sem);
        }
        Command::Scan { axis, values, range, protocol } => {
            let mut cfg = load_config(g)?;
            set_protocol(&mut cfg, protocol.as_deref())?;
            let values = match range {
                Some(r) => parse_range(r)?,
                None => values.clone(),
            };
            let spec = RunSpec::scan(axis, values);
            let table = experiments::execute(&cfg, &spec)?;
            let key = cfg.canonical_key(axis)?;
            let path = out_dir(g, &cfg).join(format!("scan_{}_{}.csv", cfg.protocol.name, key.replace('.', "_")));
            write(&path, &table, &header_comments(&cfg, &spec, &[]))?;
            for row in &table.rows {
                println!("{:>12} {:.10} ± {:.3e}", row[0], row[1], row[3]);
            }
        }
        Command::Figure { id, list } => {
            if *list {
                for id in experiments::figure_ids() {
                    println!("{id}");
                }
                return Ok(());
            }
            let id = id.as_deref().ok_or_else(|| {
                Error::Usage(format!(
                    "figure needs an id; valid ids: {}",
                    experiments::figure_ids().collect::<Vec<_>>().join(", ")
                ))
            })?;
            if g.config.is_some() {
                return Err(Error::Usage("figure recipes carry their own configuration; use --set to override".into()));
            }
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            for f in experiments::run_figure(id, &dir, &overrides(g)?)? {
                if f.nan_cells > 0 {
                    eprintln!("warning: {} holds {} empty (NaN) cells", f.path.display(), f.nan_cells);
                }
                println!("{} ({} rows)", f.path.display(), f.rows);
            }
        }
        Command::Variational { problem } => {
            let mut cfg = load_config(g)?;
            if let Some(p) = problem {
                match cfg.variational.as_mut() {
                    Some(v) => v.problem = p.clone(),
                    None => return Err(Error::Config("the configuration has no [variational] section".into())),
                }
            }
            let v = cfg.variational.clone().ok_or_else(|| Error::Config("missing [variational] section".into()))?;
            let problem = load_problem(&v.problem, variational_schedule(&v)?)?;
            let r = run_variational(&cfg, &problem)?;
            let mut comments = config_comments(&cfg, &[]);
            comments.push(format!("capital_omega = {:?}", r.fit.ansatz.capital_omega));
            comments.push(format!("residual = {:?}", r.fit.residual));
            comments.push(format!("initial_residual = {:?}", r.fit.initial_residual));
            comments.push(format!("converged = {}", r.fit.converged));
            let dir = out_dir(g, &cfg);
            write(&dir.join("variational_fit.csv"), &r.coefficients, &comments)?;
            println!(
                "Ω = {:.6}, residual {:.3e} (from {:.3e}), converged {}",
                r.fit.ansatz.capital_omega, r.fit.residual, r.fit.initial_residual, r.fit.converged
            );
            for (label, t) in &r.traces {
                write(&dir.join(format!("variational_{label}.csv")), t, &comments[..comments.len() - 4])?;
                let f = t.column("fidelity").and_then(|c| c.last().copied()).unwrap_or(f64::NAN);
                println!("{label}: final ground-state fidelity {f:.10}");
            }
        }
        Command::Ramsey => {
            let cfg = load_config(g)?;
            let noise = cfg.noise_spec()?.ok_or_else(|| Error::Config("a Ramsey run needs a [noise] section".into()))?;
            let r = cfg.ramsey.clone().unwrap_or_default();
            let fit = ramsey_t2star(&noise, mhz(r.detuning_mhz), r.duration_us, cfg.ensemble.realizations)?;
            let mut table = Table::new(["t_us", "signal", "fit"]);
            for (t, s) in fit.times.iter().zip(&fit.signal) {
                table.push(vec![*t, *s, fit.fit.eval(*t)])?;
            }
            let mut comments = config_comments(&cfg, &[]);
            comments.push(format!("gamma_d = {:?} 1/us", fit.fit.rate));
            write(&out_dir(g, &cfg).join("ramsey.csv"), &table, &comments)?;
            println!(
                "T2* = {:.4} µs, Γ_d = {:.5} ± {:.5} 1/µs (model 2πΓα² = {:.5})",
                fit.t2star(),
                fit.fit.rate,
                fit.fit.rate_std(),
                noise.dephasing_rate()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
