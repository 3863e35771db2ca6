//! ALMC on the six-mode ring from exact pi_0 draws; reports mode shares and
//! the k-NN KL against exact target samples. Optionally writes the chains.
//!
//! cargo run --release --example ring_sampling -- [r] [M] [out.csv]

use almc::metrics::{knn_kl, mode_coverage, SampleSet};
use almc::prelude::*;
use almc::samplers::{InitMethod, Initializer};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let r: f64 = args.next().map_or(Ok(10.0), |s| s.parse()).expect("r is a number");
    let m: usize = args.next().map_or(Ok(2500), |s| s.parse()).expect("M is an integer");
    let out = args.next();

    let target = GaussianMixture::ring(6, r, 10.0)?;
    let schedule = AnnealingSchedule::power(5.0, 10.0);
    let grid = ThetaGrid::from_quadratic_steps(m, 0.01, 0.05)?;
    let almc = Almc::new(&target, &schedule, &grid)?;
    let init = Initializer::new(&target, &schedule, InitMethod::Auto, &Pi0Options::default())?;

    let n = 1000;
    let mut chains = Vec::with_capacity(n);
    let mut calls = 0;
    for c in 0..n as u64 {
        let mut rng = RngStream::new(42, c + 1);
        let (x0, _) = init.draw(&mut rng)?;
        let run = almc.run(&x0, &mut rng, false)?;
        calls += run.state.oracle_calls;
        chains.push(run.state.position);
    }
    let chains = SampleSet::new(&chains, "almc")?;

    let mut rng = RngStream::new(42, 0);
    let exact: Vec<Vec<f64>> = (0..n).map(|_| target.sample(&mut rng)).collect();
    let exact = SampleSet::new(&exact, "target")?;

    let means: Vec<Vec<f64>> = target.means().map(<[f64]>::to_vec).collect();
    let mut shares = [0usize; 6];
    for p in chains.points() {
        let nearest = (0..6)
            .min_by(|&a, &b| dist(p, &means[a]).total_cmp(&dist(p, &means[b])))
            .unwrap();
        shares[nearest] += 1;
    }
    let kl = knn_kl(&exact, &chains, 3)?;
    println!("r = {r}, M = {m}, T = {:.2}, {n} chains, {calls} gradient calls", grid.total_time());
    println!("chains nearest each mode: {shares:?}");
    println!("modes covered within 3 sd: {}", mode_coverage(&chains, &means, 3.0 / 10f64.sqrt())?);
    println!("KL(target || chains) = {:.4}", kl.value);
    if let Some(path) = out {
        chains.write_csv(&path)?;
        println!("wrote {path}");
    }
    Ok(())
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
