//! Iterations needed to reach a KL threshold as the ring radius grows, and the
//! log-log fit of that count against r.
//!
//! cargo run --release --example scaling_sweep              # reference grids, r = 2, 5, 10
//! cargo run --release --example scaling_sweep -- --wide    # geometric grid from M = 3
//! cargo run --release --example scaling_sweep -- --wide --gaussian-start

use almc::harness::{build_fit_report, run_sweep_with, ExperimentConfig};
use almc::prelude::*;
use almc::samplers::InitMethod;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let wide = args.iter().any(|a| a == "--wide");
    let mut config = ExperimentConfig::desk_scale();
    if wide {
        config.r_values = vec![2.0, 5.0, 10.0, 15.0];
        let grid = vec![3, 5, 10, 20, 50, 100, 200, 500];
        config.m_grids = vec![grid; 4];
    }
    if args.iter().any(|a| a == "--gaussian-start") {
        config.init = InitMethod::Gaussian;
    }
    config.early_stop = true;

    let records = run_sweep_with(&config, 0, |r| {
        eprintln!("r = {:>4} M = {:>5} seed {}: KL {:+.4}, coverage {}", r.r, r.m, r.seed, r.kl_raw, r.mode_coverage);
    })?;
    let report = build_fit_report(&config, 0, &records)?;
    for fit in &report.fits {
        println!("threshold {}: M* = {:?}, not reached for {:?}", fit.threshold, fit.points, fit.not_reached);
        if let Some(f) = fit.fit {
            println!("  log10 M* = {:.3} log10 r + {:.3}  (R^2 = {:.3})", f.slope, f.intercept, f.r_squared);
        }
    }
    Ok(())
}
