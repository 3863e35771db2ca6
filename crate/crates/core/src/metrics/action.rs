//! Action (integrated squared Wasserstein speed) of measure curves.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::quadrature::gauss_legendre_on;
use crate::rng::RngStream;
use crate::targets::{dot, GaussianMixture, Target};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionReport {
    pub value: f64,
    pub method: ActionMethod,
    /// Standard error for Monte Carlo estimates, 0 for closed forms.
    pub error_estimate: f64,
}

/// Upper bound on the action of the `eta ≡ 1`, `lambda(theta) = lambda0 (1-theta)^gamma`
/// curve for a mixture with `|y_i| = r`:
///
/// ```text
/// lambda0 ∫_0^lambda0 [beta^2 r^2 / (l + beta)^4 + d / (4 (l + beta)^3)] dl
///   = lambda0 [ (beta^2 r^2 / 3)(beta^-3 - (lambda0+beta)^-3) + (d/8)(beta^-2 - (lambda0+beta)^-2) ]
/// ```
///
/// The `|lambda'| <= gamma lambda0` factor is taken with `gamma = 1`; see
/// [`mog_action_bound_scaled`].
pub fn mog_action_bound(beta: f64, r: f64, dim: usize, lambda0: f64) -> Result<ActionReport> {
    mog_action_bound_scaled(beta, r, dim, lambda0, 1.0)
}

/// [`mog_action_bound`] multiplied by the schedule exponent `gamma`.
pub fn mog_action_bound_scaled(
    beta: f64,
    r: f64,
    dim: usize,
    lambda0: f64,
    gamma: f64,
) -> Result<ActionReport> {
    for (name, v) in [("beta", beta), ("lambda0", lambda0), ("gamma", gamma)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    if !(r >= 0.0 && r.is_finite()) || dim == 0 {
        return Err(Error::invalid("need r >= 0 and d >= 1"));
    }
    let d = dim as f64;
    let end = lambda0 + beta;
    let mean_part = beta * beta * r * r / 3.0 * (beta.powi(-3) - end.powi(-3));
    let spread_part = d / 8.0 * (beta.powi(-2) - end.powi(-2));
    Ok(ActionReport {
        value: gamma * lambda0 * (mean_part + spread_part),
        method: ActionMethod::ClosedForm,
        error_estimate: 0.0,
    })
}

/// Action of the heat-flow curve `rho_t = rho_0 * N(0, 2 S t I)`, `t ∈ [0, 1]`:
///
/// ```text
/// A = S ∫_0^S E_{p_s} |∇ log p_s|^2 ds,   p_s = rho_0 * N(0, 2 s I)
/// ```
///
/// `p_s` is again a Gaussian mixture, so each node of a `quad_points`-point
/// Gauss-Legendre rule on `[0, S]` gets a Monte Carlo estimate from
/// `mc_samples` exact draws. The reported error is the propagated standard
/// error of the Monte Carlo part.
pub fn heat_curve_action(
    mixture: &GaussianMixture,
    horizon: f64,
    mc_samples: usize,
    quad_points: usize,
    rng: &mut RngStream,
) -> Result<ActionReport> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid(format!("S must be positive, got {horizon}")));
    }
    if mc_samples < 2 || quad_points == 0 {
        return Err(Error::invalid("need mc_samples >= 2 and quad_points >= 1"));
    }
    let d = mixture.dim();
    let mut x = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut integral = 0.0;
    let mut variance = 0.0;
    for (s, w) in gauss_legendre_on(quad_points, 0.0, horizon) {
        let ps = mixture.convolved(2.0 * s)?;
        let (mut mean, mut m2) = (0.0, 0.0);
        for i in 0..mc_samples {
            ps.sample_into(rng, &mut x);
            ps.energy_gradient(&x, &mut g);
            let v = dot(&g, &g);
            // Welford
            let delta = v - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (v - mean);
        }
        let sample_var = m2 / (mc_samples - 1) as f64;
        integral += w * mean;
        variance += w * w * sample_var / mc_samples as f64;
    }
    Ok(ActionReport {
        value: horizon * integral,
        method: ActionMethod::MonteCarlo,
        error_estimate: horizon * variance.sqrt(),
    })
}

/// W2 between `N(m1, diag(v1))` and `N(m2, diag(v2))`:
/// `sqrt(|m1 - m2|^2 + Σ_j (sqrt(v1_j) - sqrt(v2_j))^2)`.
pub fn gaussian_w2(mean1: &[f64], var1: &[f64], mean2: &[f64], var2: &[f64]) -> Result<f64> {
    let d = mean1.len();
    check_dim(d, var1.len())?;
    check_dim(d, mean2.len())?;
    check_dim(d, var2.len())?;
    if var1.iter().chain(var2).any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("variances must be positive"));
    }
    let mean_part: f64 = mean1.iter().zip(mean2).map(|(a, b)| (a - b) * (a - b)).sum();
    let var_part: f64 = var1
        .iter()
        .zip(var2)
        .map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2))
        .sum();
    Ok((mean_part + var_part).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mog_bound_without_means() {
        let (beta, d, l0) = (10.0, 3usize, 7.0);
        let got = mog_action_bound(beta, 0.0, d, l0).unwrap().value;
        let expected = l0 * (d as f64 / 8.0) * (beta.powi(-2) - (l0 + beta).powi(-2));
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn mog_bound_gamma_multiplier() {
        let a = mog_action_bound(10.0, 2.0, 2, 5.0).unwrap().value;
        let b = mog_action_bound_scaled(10.0, 2.0, 2, 5.0, 10.0).unwrap().value;
        assert!((b - 10.0 * a).abs() < 1e-12);
        assert!(mog_action_bound(0.0, 2.0, 2, 5.0).is_err());
    }

    #[test]
    fn mog_bound_monotone() {
        let mut prev_r = 0.0;
        for r in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let mut prev_d = 0.0;
            for d in 1..5 {
                let mut prev_l = 0.0;
                for l0 in [0.1, 1.0, 5.0, 20.0, 200.0] {
                    let v = mog_action_bound(10.0, r, d, l0).unwrap().value;
                    assert!(v >= prev_l);
                    prev_l = v;
                }
                let v = mog_action_bound(10.0, r, d, 5.0).unwrap().value;
                assert!(v >= prev_d);
                prev_d = v;
            }
            let v = mog_action_bound(10.0, r, 2, 5.0).unwrap().value;
            assert!(v >= prev_r);
            prev_r = v;
        }
    }

    #[test]
    fn mog_bound_polynomial_scaling() {
        // with lambda0 = d beta (r^2 beta + 1) the bound stays within a constant of
        // d (r^2 beta + 1)(r^2 + d/beta)
        for beta in [0.5, 1.0, 10.0, 100.0] {
            for r in [0.1, 1.0, 5.0, 30.0] {
                for d in [1usize, 2, 10, 100] {
                    let df = d as f64;
                    let l0 = df * beta * (r * r * beta + 1.0);
                    let v = mog_action_bound(beta, r, d, l0).unwrap().value;
                    let rate = df * (r * r * beta + 1.0) * (r * r + df / beta);
                    let ratio = v / rate;
                    assert!(ratio > 0.0 && ratio <= 1.0, "beta={beta} r={r} d={d}: {ratio}");
                }
            }
        }
    }

    #[test]
    fn w2_closed_forms() {
        assert_eq!(gaussian_w2(&[1.0, 2.0], &[0.5, 2.0], &[1.0, 2.0], &[0.5, 2.0]).unwrap(), 0.0);
        let w = gaussian_w2(&[0.0, 0.0], &[1.0, 1.0], &[3.0, 4.0], &[1.0, 1.0]).unwrap();
        assert!((w - 5.0).abs() < 1e-15);
        let w = gaussian_w2(&[0.0], &[1.0], &[0.0], &[4.0]).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
        assert!(gaussian_w2(&[0.0], &[0.0], &[0.0], &[1.0]).is_err());
        assert!(gaussian_w2(&[0.0], &[1.0], &[0.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn heat_action_vanishes_with_horizon() {
        let t = GaussianMixture::ring(6, 2.0, 10.0).unwrap();
        let mut rng = RngStream::new(1, 0);
        let sigma2 = 0.1;
        for s in [1e-2, 1e-3] {
            let a = heat_curve_action(&t, s, 2000, 8, &mut rng).unwrap();
            assert!(a.value <= s * s * 2.0 / sigma2 + 3.0 * a.error_estimate, "S={s}: {a:?}");
        }
    }

    #[test]
    fn heat_action_mixture_bound() {
        // any mixture: A <= (S d / 2) log(1 + 2 S / sigma^2)
        let t = GaussianMixture::ring(6, 3.0, 10.0).unwrap();
        let mut rng = RngStream::new(2, 0);
        let s = 2.0;
        let a = heat_curve_action(&t, s, 4000, 32, &mut rng).unwrap();
        let bound = s * 2.0 / 2.0 * (1.0 + 2.0 * s / 0.1f64).ln();
        assert!(a.value <= bound + 3.0 * a.error_estimate, "{a:?} vs {bound}");
        assert!(a.value > 0.0);
    }
}
