use crate::error::{check_dim, Error, Result};
use crate::rng::RngStream;
use crate::targets::Target;

use super::{ensure_finite_gradient, ChainState};

/// Unadjusted Langevin: `x <- x - h ∇V(x) + sqrt(2h) xi`, `n_steps` times.
///
/// Noise is drawn in the same order as the annealed sampler, so the two
/// agree exactly when the schedule reduces to plain LMC.
pub fn run_lmc<T: Target + ?Sized>(
    target: &T,
    h: f64,
    n_steps: usize,
    rng: &mut RngStream,
    init: &[f64],
) -> Result<ChainState> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("step size must be positive, got {h}")));
    }
    check_dim(target.dim(), init.len())?;
    let d = init.len();
    let scale = (2.0 * h).sqrt();
    let mut state = ChainState::new(init.to_vec());
    let mut g = vec![0.0; d];
    let mut xi = vec![0.0; d];
    for l in 0..n_steps {
        rng.fill_standard_normal(&mut xi);
        target.energy_gradient(&state.position, &mut g);
        state.oracle_calls += 1;
        ensure_finite_gradient(&state.position, &g).map_err(|e| e.at_step(l + 1))?;
        for ((x, gj), n) in state.position.iter_mut().zip(&g).zip(&xi) {
            *x = *x - h * gj + scale * n;
        }
        state.step_index += 1;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::GaussianMixture;

    struct Flat;
    impl Target for Flat {
        fn dim(&self) -> usize {
            2
        }
        fn energy(&self, _: &[f64]) -> f64 {
            0.0
        }
        fn energy_gradient(&self, _: &[f64], out: &mut [f64]) {
            out.fill(0.0);
        }
        fn smoothness(&self) -> f64 {
            0.0
        }
        fn minimizer_radius(&self) -> f64 {
            0.0
        }
    }

    fn variance(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn random_walk_variance() {
        let (h, n, chains) = (0.01, 50, 10_000);
        let xs: Vec<f64> = (0..chains)
            .map(|c| run_lmc(&Flat, h, n, &mut RngStream::new(5, c), &[0.0, 0.0]).unwrap().position[0])
            .collect();
        let (_, var) = variance(&xs);
        let truth = 2.0 * h * n as f64;
        // sd of a sample variance is sigma^2 sqrt(2/(n-1))
        let se = truth * (2.0 / (chains as f64 - 1.0)).sqrt();
        assert!((var - truth).abs() < 3.0 * se, "var={var} truth={truth}");
    }

    #[test]
    fn quadratic_stationary_variance_is_step_biased() {
        // AR(1): x' = (1 - beta h) x + sqrt(2h) xi, stationary var = 2h / (1 - (1-beta h)^2)
        let beta = 10.0;
        let h = 0.05;
        let t = GaussianMixture::new(vec![1.0], vec![vec![0.0]], beta).unwrap();
        let a: f64 = 1.0 - beta * h;
        let oracle = 2.0 * h / (1.0 - a * a);
        assert!((oracle - (1.0 / beta) / (1.0 - beta * h / 2.0)).abs() < 1e-15);
        let chains = 20_000;
        let xs: Vec<f64> = (0..chains)
            .map(|c| run_lmc(&t, h, 200, &mut RngStream::new(6, c), &[0.0]).unwrap().position[0])
            .collect();
        let (_, var) = variance(&xs);
        let se = oracle * (2.0 / (chains as f64 - 1.0)).sqrt();
        assert!((var - oracle).abs() < 3.0 * se, "var={var} oracle={oracle}");
    }

    #[test]
    fn invalid_step() {
        assert!(run_lmc(&Flat, 0.0, 1, &mut RngStream::new(0, 0), &[0.0, 0.0]).is_err());
        assert!(run_lmc(&Flat, 0.1, 1, &mut RngStream::new(0, 0), &[0.0]).is_err());
    }
}
