//! Annealing schedule, quadratic step grid and the per-step update coefficients.
//!
//! cargo run --example schedule_coefficients -- [M]

use almc::prelude::*;
use almc::schedule::{step_coefficients_with, CoefficientMethod};

fn main() -> Result<()> {
    let m: usize = std::env::args().nth(1).map_or(Ok(200), |s| s.parse()).expect("M is an integer");
    let schedule = AnnealingSchedule::power(5.0, 10.0);
    schedule.validate()?;
    let grid = ThetaGrid::from_quadratic_steps(m, 0.01, 0.05)?;
    println!("lambda(theta) = 5 (1 - theta)^10, eta = 1; M = {m}, T = {:.4}", grid.total_time());

    let coeffs = grid.coefficients(&schedule)?;
    println!("{:>6} {:>8} {:>8} {:>12} {:>12} {:>12}", "step", "theta", "h", "contraction", "drift", "noise");
    let picks = [0, 1, m / 4, m / 2, 3 * m / 4, m - 1];
    for &l in picks.iter().filter(|&&l| l < m) {
        let c = coeffs[l];
        println!(
            "{:>6} {:>8.4} {:>8.4} {:>12.8} {:>12.8} {:>12.8}",
            l + 1,
            grid.thetas()[l + 1],
            grid.steps()[l],
            c.contraction,
            c.drift_weight,
            c.noise_scale
        );
    }

    let (a, b) = (grid.thetas()[m / 2], grid.thetas()[m / 2 + 1]);
    let t = grid.total_time();
    let auto = step_coefficients_with(&schedule, t, a, b, CoefficientMethod::Auto)?;
    let quad = step_coefficients_with(&schedule, t, a, b, CoefficientMethod::Quadrature)?;
    println!(
        "closed-form vs full quadrature at the middle step: |diff| = {:.1e}",
        (auto.drift_weight - quad.drift_weight).abs().max((auto.noise_scale - quad.noise_scale).abs())
    );

    let lmc = ThetaGrid::uniform(4, 0.04)?.coefficients(&AnnealingSchedule::lmc())?;
    println!("lambda = 0, eta = 1 reduces to LMC: {:?}", lmc[0]);

    for (action, eps) in [(10.0, 0.5), (10.0, 0.25)] {
        let plan = plan_parameters(action, eps, 2, 10.0)?;
        println!("plan for action {action}, eps {eps}: T = {:.2}, M = {}", plan.total_time, plan.steps);
    }
    Ok(())
}
