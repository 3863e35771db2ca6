//! k-NN KL estimator on Gaussians with a known divergence.
//!
//! cargo run --release --example knn_divergence

use almc::harness::median;
use almc::metrics::{knn_kl, SampleSet};
use almc::prelude::*;

fn cloud(n: usize, shift: f64, rng: &mut RngStream) -> SampleSet {
    let data: Vec<f64> = (0..n)
        .flat_map(|_| [rng.standard_normal() + shift, rng.standard_normal()])
        .collect();
    SampleSet::from_flat(data, 2, "gauss").expect("finite samples")
}

fn main() -> Result<()> {
    println!("{:>6} {:>6} {:>10} {:>10}", "shift", "k", "true KL", "median");
    for shift in [0.0, 0.5, 1.0, 2.0] {
        for k in [1, 3, 10] {
            let est: Vec<f64> = (0..20)
                .map(|s| {
                    let mut rng = RngStream::new(s, 0);
                    let p = cloud(1000, 0.0, &mut rng);
                    let q = cloud(1000, shift, &mut rng);
                    knn_kl(&p, &q, k).map(|e| e.value)
                })
                .collect::<Result<_>>()?;
            println!("{shift:>6.1} {k:>6} {:>10.4} {:>10.4}", shift * shift / 2.0, median(&est));
        }
    }
    Ok(())
}
