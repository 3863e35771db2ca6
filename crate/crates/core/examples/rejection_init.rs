//! Exact pi_0 draws by rejection from a quadratic envelope.
//!
//! The envelope needs `lambda0 > eta0 * B`; the example shows both a valid
//! pairing and the error returned for an invalid one.
//!
//! cargo run --release --example rejection_init

use almc::prelude::*;
use almc::samplers::Pi0Sampler;

fn main() -> Result<()> {
    let target = GaussianMixture::ring(6, 2.0, 10.0)?;
    let b = target.smoothness_bound();
    let eta0 = 1.0;

    let too_small = AnnealingSchedule::for_target(eta0, 2, 10.0, 10.0).lambda0();
    match Pi0Sampler::new(&target, eta0, too_small, &Pi0Options::default()) {
        Ok(_) => println!("lambda0 = {too_small} accepted"),
        Err(e) => println!("lambda0 = {too_small} rejected: {e}"),
    }

    let lambda0 = 2.0 * b;
    let sampler = Pi0Sampler::new(&target, eta0, lambda0, &Pi0Options::default())?;
    println!(
        "lambda0 = 2B = {lambda0}: anchor {:?} after {} setup calls, expected trials <= {:.3}",
        sampler.anchor().unwrap(),
        sampler.setup_calls(),
        sampler.expected_trials_bound()
    );
    let mut rng = RngStream::new(7, 0);
    let n = 20_000;
    let (mut trials, mut worst, mut m2) = (0u64, f64::NEG_INFINITY, 0.0);
    for _ in 0..n {
        let s = sampler.draw(&mut rng)?;
        trials += s.trials;
        worst = worst.max(s.max_log_accept);
        m2 += s.position.iter().map(|v| v * v).sum::<f64>() / n as f64;
    }
    println!(
        "{n} draws: mean trials {:.3}, largest log acceptance {worst:.2e}, E|x|^2 = {m2:.5}",
        trials as f64 / n as f64
    );

    let quad = GaussianMixture::new(vec![1.0], vec![vec![0.0, 0.0]], 10.0)?;
    let s = sample_pi0(&quad, 1.0, 20.0, &mut rng, &Pi0Options::default())?;
    println!("single Gaussian, lambda0 = 20: draw {:?} in {} trials", s.position, s.trials);
    Ok(())
}
