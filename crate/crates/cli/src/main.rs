//! `holobec` — experiment runner for the two-mode condensate geometric-phase
//! library.
//!
//! Exit codes: 0 all comparisons passed, 2 a tolerance failed (the record is
//! still written with full diagnostics), 1 configuration or runtime error.

mod config;
mod experiments;
mod record;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::{
    apply_override, load, BerryConfig, DetectConfig, HolonomyConfig, PerturbationConfig,
    StokesConfig, TransferConfig,
};
use record::RunRecord;

#[derive(Parser)]
#[command(
    name = "holobec",
    version,
    about = "Berry phases and non-Abelian holonomies of a coupled two-mode condensate",
    after_help = "Config values come from --config JSON, overridden by --set key=value flags.\n\
                  Results are JSON records (CSV for sweeps); see README for the schema."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; defaults apply for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a single config field, e.g. --set theta=1.0472 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file for the JSON record (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: HOLOBEC_WORKERS or all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Abelian Berry phase: closed form, flux quadrature, path-ordered loop
    /// and the bidirectional adiabatic measurement.
    Berry {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        j: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long = "T")]
        t_final: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Population-detection protocol (both ramp variants).
    Detect {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        j: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long = "T")]
        t_final: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Degenerate-pair holonomy: closed form, path-ordered, Stokes and the
    /// measured adiabatic transport.
    Holonomy {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        j: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        theta0: Option<f64>,
        #[arg(long)]
        theta1: Option<f64>,
        #[arg(long = "T")]
        t_final: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Population transfer across the degenerate pair.
    Transfer {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        j: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        theta0: Option<f64>,
        /// Δθ in units of π/(2ρ): 1 = full transfer, 0.5 = equal split.
        #[arg(long)]
        half_periods: Option<f64>,
        #[arg(long = "T")]
        t_final: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Non-Abelian Stokes evaluation against the path-ordered product.
    Stokes {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        j: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        theta0: Option<f64>,
        #[arg(long)]
        theta1: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Generator-series checks: commutator identity, truncation convergence,
    /// quadratic residual scaling.
    Perturbation {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        j: Option<f64>,
        #[arg(long)]
        alpha0: Option<f64>,
        #[arg(long)]
        beta0: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cartesian-product sweep of one or two config keys; emits CSV.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Experiment to sweep: berry|detect|holonomy|transfer|stokes|perturbation.
        #[arg(long)]
        experiment: String,
        /// Axis spec key=start:stop:count or key=v1,v2,... (at most two).
        #[arg(long = "axis", value_name = "SPEC")]
        axes: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = workers
        .or_else(|| {
            std::env::var("HOLOBEC_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0); // 0 lets rayon pick the core count
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .context("building worker pool")
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Berry {
            common,
            j,
            m,
            theta,
            t_final,
            steps,
        } => {
            let mut cfg: BerryConfig = prepare(&common)?;
            set_f64(&mut cfg.j, j);
            set_f64(&mut cfg.m, m);
            set_f64(&mut cfg.theta, theta);
            set_f64(&mut cfg.t_final, t_final);
            set_usize(&mut cfg.steps, steps);
            finish(&common, experiments::run_berry(&cfg)?)
        }
        Command::Detect {
            common,
            j,
            theta,
            t_final,
            steps,
        } => {
            let mut cfg: DetectConfig = prepare(&common)?;
            set_f64(&mut cfg.j, j);
            set_f64(&mut cfg.theta, theta);
            set_f64(&mut cfg.t_final, t_final);
            set_usize(&mut cfg.steps, steps);
            finish(&common, experiments::run_detect(&cfg)?)
        }
        Command::Holonomy {
            common,
            j,
            m,
            theta0,
            theta1,
            t_final,
            steps,
        } => {
            let mut cfg: HolonomyConfig = prepare(&common)?;
            set_f64(&mut cfg.j, j);
            set_f64(&mut cfg.m, m);
            set_f64(&mut cfg.theta0, theta0);
            if theta1.is_some() {
                cfg.theta1 = theta1;
            }
            set_f64(&mut cfg.t_final, t_final);
            set_usize(&mut cfg.steps, steps);
            finish(&common, experiments::run_holonomy(&cfg)?)
        }
        Command::Transfer {
            common,
            j,
            m,
            theta0,
            half_periods,
            t_final,
            steps,
        } => {
            let mut cfg: TransferConfig = prepare(&common)?;
            set_f64(&mut cfg.j, j);
            set_f64(&mut cfg.m, m);
            set_f64(&mut cfg.theta0, theta0);
            set_f64(&mut cfg.half_periods, half_periods);
            set_f64(&mut cfg.t_final, t_final);
            set_usize(&mut cfg.steps, steps);
            finish(&common, experiments::run_transfer(&cfg)?)
        }
        Command::Stokes {
            common,
            j,
            m,
            theta0,
            theta1,
            grid,
        } => {
            let mut cfg: StokesConfig = prepare(&common)?;
            set_f64(&mut cfg.j, j);
            set_f64(&mut cfg.m, m);
            set_f64(&mut cfg.theta0, theta0);
            if theta1.is_some() {
                cfg.theta1 = theta1;
            }
            if let Some(g) = grid {
                cfg.grid_sigma = g;
                cfg.grid_tau = g;
            }
            finish(&common, experiments::run_stokes(&cfg)?)
        }
        Command::Perturbation {
            common,
            j,
            alpha0,
            beta0,
            gamma,
            seed,
        } => {
            let mut cfg: PerturbationConfig = prepare(&common)?;
            set_f64(&mut cfg.j, j);
            set_f64(&mut cfg.alpha0, alpha0);
            set_f64(&mut cfg.beta0, beta0);
            set_f64(&mut cfg.gamma, gamma);
            if let Some(s) = seed {
                cfg.seed = s;
            }
            finish(&common, experiments::run_perturbation(&cfg)?)
        }
        Command::Sweep {
            common,
            experiment,
            axes,
        } => {
            let base: serde_json::Value = match experiment.as_str() {
                "berry" => serde_json::to_value(prepare::<BerryConfig>(&common)?)?,
                "detect" => serde_json::to_value(prepare::<DetectConfig>(&common)?)?,
                "holonomy" => serde_json::to_value(prepare::<HolonomyConfig>(&common)?)?,
                "transfer" => serde_json::to_value(prepare::<TransferConfig>(&common)?)?,
                "stokes" => serde_json::to_value(prepare::<StokesConfig>(&common)?)?,
                "perturbation" => serde_json::to_value(prepare::<PerturbationConfig>(&common)?)?,
                other => anyhow::bail!("unknown experiment `{other}`"),
            };
            let axes = axes
                .iter()
                .map(|s| sweep::parse_axis(s))
                .collect::<Result<Vec<_>>>()?;
            let pool = build_pool(common.workers)?;
            let outcome = pool.install(|| sweep::run_sweep(&experiment, &base, &axes))?;
            match &common.out {
                Some(path) => {
                    let file = std::fs::File::create(path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    sweep::write_csv(file, &outcome)?;
                }
                None => sweep::write_csv(std::io::stdout().lock(), &outcome)?,
            }
            Ok(outcome.passed)
        }
    }
}

fn prepare<T: DeserializeOwned + Default + Serialize>(common: &CommonArgs) -> Result<T> {
    let mut cfg: T = load(common.config.as_deref())?;
    for kv in &common.set {
        let (key, value) = kv
            .split_once('=')
            .with_context(|| format!("--set takes KEY=VALUE, got `{kv}`"))?;
        cfg = apply_override(&cfg, key, value)?;
    }
    Ok(cfg)
}

fn set_f64(slot: &mut f64, value: Option<f64>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_usize(slot: &mut usize, value: Option<usize>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn finish(common: &CommonArgs, record: RunRecord) -> Result<bool> {
    // experiments with internal parallel potential run under the pool too;
    // single runs are sequential today, but the pool bounds any rayon use
    let _pool = build_pool(common.workers)?;
    let text = record.to_json();
    match &common.out {
        Some(path) => std::fs::write(path, &text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(record.passed)
}
