use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use almc::config::RunConfig;
use almc::harness::{build_fit_report, run_sweep_with, write_records_csv, ExperimentConfig};
use almc::metrics::{heat_curve_action, knn_kl, mog_action_bound_scaled, SampleSet};
use almc::rng::RngStream;
use almc::targets::GaussianMixture;
use almc::Result;

#[derive(Parser)]
#[command(name = "almc", version, about = "Annealed Langevin Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run ALMC chains from a run config and write final positions as CSV.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        chains: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// k-NN estimate of KL(p || q) between two sample CSVs.
    Kl {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Action of the annealing curve for a ring mixture.
    Action {
        #[arg(long, value_enum)]
        kind: ActionKind,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 5.0)]
        lambda0: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Heat-curve horizon.
        #[arg(long = "S", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 6)]
        modes: usize,
        #[arg(long, default_value_t = 20_000)]
        mc_samples: usize,
        #[arg(long, default_value_t = 32)]
        quad_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sweep radii and budgets, write per-cell records and the scaling fit.
    Experiment {
        /// Experiment config; defaults to the desk-scale preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        fit: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use every reference radius (hours of compute).
        #[arg(long, conflicts_with = "config")]
        full_scale: bool,
        /// Write 0 for wall_ms so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
        /// Print one line per finished cell to stderr.
        #[arg(long)]
        progress: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ActionKind {
    MogBound,
    Heat,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample {
            config,
            chains,
            seed,
            out,
        } => {
            let run = RunConfig::load(&config)?.build()?;
            run.sample_chains(chains, seed)?.write_csv(&out)?;
        }
        Command::Kl { p, q, k } => {
            let p = SampleSet::read_csv(&p)?;
            let q = SampleSet::read_csv(&q)?;
            let est = knn_kl(&p, &q, k)?;
            println!("{}", serde_json::to_string(&est)?);
        }
        Command::Action {
            kind,
            beta,
            r,
            d,
            lambda0,
            gamma,
            horizon,
            modes,
            mc_samples,
            quad_points,
            seed,
        } => {
            let report = match kind {
                ActionKind::MogBound => mog_action_bound_scaled(beta, r, d, lambda0, gamma)?,
                ActionKind::Heat => {
                    if d != 2 {
                        return Err(almc::Error::InvalidInput(format!(
                            "heat action uses the planar ring, got d = {d}"
                        )));
                    }
                    let mixture = GaussianMixture::ring(modes, r, beta)?;
                    let mut rng = RngStream::new(seed, 0);
                    heat_curve_action(&mixture, horizon, mc_samples, quad_points, &mut rng)?
                }
            };
            println!("{}", serde_json::to_string(&report)?);
        }
        Command::Experiment {
            config,
            out,
            fit,
            seed,
            full_scale,
            no_timing,
            progress,
        } => {
            let cfg = match (config, full_scale) {
                (Some(path), _) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
                (None, true) => ExperimentConfig::full_scale(),
                (None, false) => ExperimentConfig::desk_scale(),
            };
            let mut records = run_sweep_with(&cfg, seed, |rec| {
                if progress {
                    eprintln!(
                        "r={} M={} seed={} kl={:.4} coverage={} ({} ms)",
                        rec.r, rec.m, rec.seed, rec.kl_raw, rec.mode_coverage, rec.wall_ms
                    );
                }
            })?;
            if no_timing {
                records.iter_mut().for_each(|r| r.wall_ms = 0);
            }
            for rec in records.iter().filter(|r| r.failed()) {
                eprintln!(
                    "warning: cell r={} M={} seed={} failed: {}",
                    rec.r,
                    rec.m,
                    rec.seed,
                    rec.error.as_deref().unwrap_or("unknown")
                );
            }
            write_records_csv(BufWriter::new(File::create(&out)?), &records)?;
            let report = build_fit_report(&cfg, seed, &records)?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            std::fs::write(&fit, text)?;
        }
    }
    Ok(())
}
