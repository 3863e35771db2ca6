//! Six-mode ring target: potential, gradient, smoothness and the tilted mixture.
//!
//! cargo run --example mixture_target -- [r]

use almc::prelude::*;

fn main() -> Result<()> {
    let r: f64 = std::env::args().nth(1).map_or(Ok(10.0), |s| s.parse()).expect("r is a number");
    let target = GaussianMixture::ring(6, r, 10.0)?;
    println!("ring r={r}, beta=10, {} modes", target.num_components());
    for (i, m) in target.means().enumerate() {
        println!("  mean {i}: ({:8.4}, {:8.4})", m[0], m[1]);
    }
    let (lo, hi) = target.hessian_eigen_bounds();
    println!("smoothness bound B = {:.1}", target.smoothness_bound());
    println!("Hessian eigenvalues lie in [{lo:.1}, {hi:.1}]");

    for x in [vec![0.0, 0.0], target.mean(0).to_vec(), vec![r / 2.0, 0.3]] {
        let v = target.potential(&x)?;
        let g = target.grad_potential(&x)?;
        println!("V({:.2}, {:.2}) = {v:10.4}   grad = ({:9.4}, {:9.4})", x[0], x[1], g[0], g[1]);
    }

    let tilted = target.tilted(5.0)?;
    println!(
        "tilt by lambda=5: precision {:.1}, mean radius {:.4}, weights {:?}",
        tilted.precision(),
        tilted.max_mean_norm(),
        tilted.weights()
    );

    let mut rng = RngStream::new(0, 0);
    let mut counts = [0usize; 6];
    for _ in 0..6000 {
        let x = target.sample(&mut rng);
        let k = (x[1].atan2(x[0]) / (std::f64::consts::PI / 3.0)).round().rem_euclid(6.0) as usize;
        counts[k] += 1;
    }
    println!("exact draws per mode (6000 total): {counts:?}");
    Ok(())
}
