//! Action of the annealing curve: closed-form mixture bound, heat-curve
//! estimate and the Wasserstein lower bound, plus the resulting run plan.
//!
//! cargo run --release --example action_bounds

use almc::metrics::{gaussian_w2, heat_curve_action, mog_action_bound, mog_action_bound_scaled};
use almc::prelude::*;

fn main() -> Result<()> {
    let beta = 10.0;
    println!("mixture bound, beta = {beta}, d = 2");
    println!("{:>6} {:>12} {:>14} {:>16}", "r", "lambda0=5", "lambda0=dB", "gamma=10, dB");
    for r in [2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0] {
        let b = beta * (4.0 * r * r * beta + 1.0);
        println!(
            "{r:>6} {:>12.4} {:>14.4} {:>16.4}",
            mog_action_bound(beta, r, 2, 5.0)?.value,
            mog_action_bound(beta, r, 2, 2.0 * b)?.value,
            mog_action_bound_scaled(beta, r, 2, 2.0 * b, 10.0)?.value
        );
    }

    let sigma2 = 0.25;
    let gauss = GaussianMixture::new(vec![1.0], vec![vec![0.0, 0.0]], 1.0 / sigma2)?;
    let ring = GaussianMixture::ring(6, 2.0, 1.0 / sigma2)?;
    let mut rng = RngStream::new(3, 0);
    println!("\nheat curve rho_0 * N(0, 2 s I), s in [0, S], sigma^2 = {sigma2}");
    for s in [0.5, 1.0, 2.0] {
        let exact = s * 2.0 / 2.0 * (1.0 + 2.0 * s / sigma2).ln();
        let g = heat_curve_action(&gauss, s, 20_000, 32, &mut rng)?;
        let m = heat_curve_action(&ring, s, 20_000, 32, &mut rng)?;
        let w = gaussian_w2(&[0.0; 2], &[sigma2; 2], &[0.0; 2], &[sigma2 + 2.0 * s; 2])?;
        println!(
            "S = {s}: Gaussian {:.4} +- {:.4} (exact {exact:.4}, W2^2 {:.4}); ring {:.4} +- {:.4} (bound {exact:.4})",
            g.value,
            g.error_estimate,
            w * w,
            m.value,
            m.error_estimate
        );
    }

    let a = mog_action_bound(beta, 2.0, 2, 5.0)?.value;
    let plan = plan_parameters(a, 0.3, 2, beta)?;
    println!("\nplan for r = 2, eps = 0.3: T = {:.3}, M = {}", plan.total_time, plan.steps);
    Ok(())
}
