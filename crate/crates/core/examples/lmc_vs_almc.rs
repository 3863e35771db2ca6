//! Plain LMC started in one mode versus ALMC with the same gradient budget.
//!
//! cargo run --release --example lmc_vs_almc -- [r] [M]

use almc::metrics::{mode_coverage, SampleSet};
use almc::prelude::*;
use almc::samplers::{InitMethod, Initializer};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let r: f64 = args.next().map_or(Ok(10.0), |s| s.parse()).expect("r is a number");
    let m: usize = args.next().map_or(Ok(2500), |s| s.parse()).expect("M is an integer");
    let target = GaussianMixture::ring(6, r, 10.0)?;
    let means: Vec<Vec<f64>> = target.means().map(<[f64]>::to_vec).collect();
    let radius = 3.0 / 10f64.sqrt();

    let grid = ThetaGrid::from_quadratic_steps(m, 0.01, 0.05)?;
    let h = grid.total_time() / m as f64;
    let schedule = AnnealingSchedule::power(5.0, 10.0);
    let almc = Almc::new(&target, &schedule, &grid)?;
    let init = Initializer::new(&target, &schedule, InitMethod::Auto, &Pi0Options::default())?;

    let n = 500;
    let mut lmc = Vec::with_capacity(n);
    let mut ann = Vec::with_capacity(n);
    for c in 0..n as u64 {
        let mut rng = RngStream::new(1, c);
        lmc.push(run_lmc(&target, h, m, &mut rng, &means[0])?.position);
        let mut rng = RngStream::new(2, c);
        let (x0, _) = init.draw(&mut rng)?;
        ann.push(almc.run(&x0, &mut rng, false)?.state.position);
    }
    let lmc = SampleSet::new(&lmc, "lmc")?;
    let ann = SampleSet::new(&ann, "almc")?;
    println!("r = {r}, {m} gradient calls per chain, {n} chains");
    println!("LMC  (h = {h:.4}, started at mode 0): {} of 6 modes covered", mode_coverage(&lmc, &means, radius)?);
    println!("ALMC (exact pi_0 start):             {} of 6 modes covered", mode_coverage(&ann, &means, radius)?);
    Ok(())
}
