//! Exact sampling from `pi_0 ∝ exp(-V_0)`, `V_0 = eta0 V + lambda0/2 |x|^2`.
//!
//! For `eta0 = 0` this is `N(0, lambda0^{-1} I)`. Otherwise `V_0` is
//! `kappa = lambda0 - eta0 beta` strongly convex and `L = lambda0 + eta0 beta`
//! smooth, so around any point `x'` it is bounded below by the quadratic
//!
//! ```text
//! V_0(x') + <∇V_0(x'), x - x'> + kappa/2 |x - x'|^2
//! ```
//!
//! whose density is `N(x' - ∇V_0(x')/kappa, kappa^{-1} I)`. Proposals from that
//! Gaussian are accepted with probability `exp(-V_0(X) + quadratic(X))`.
//! The anchor `x'` comes from gradient descent started at the origin.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::targets::{dot, dist2, norm, Target};

const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GdOptions {
    /// Target distance to the minimiser; `None` means `1/sqrt(eta0 beta)`.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub record_path: bool,
}

impl Default for GdOptions {
    fn default() -> Self {
        GdOptions {
            tol: None,
            max_iter: 10_000,
            record_path: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GdResult {
    pub point: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Gradient evaluations, including the final convergence check.
    pub oracle_calls: u64,
    pub path: Option<Vec<Vec<f64>>>,
}

struct Anchored<'a, T: ?Sized> {
    target: &'a T,
    eta0: f64,
    lambda0: f64,
}

impl<T: Target + ?Sized> Anchored<'_, T> {
    fn value(&self, x: &[f64]) -> f64 {
        self.eta0 * self.target.energy(x) + 0.5 * self.lambda0 * dot(x, x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.target.energy_gradient(x, out);
        for (g, xv) in out.iter_mut().zip(x) {
            *g = self.eta0 * *g + self.lambda0 * xv;
        }
    }
}

fn check_params(eta0: f64, lambda0: f64, beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta0) {
        return Err(Error::invalid(format!("eta0 must lie in [0, 1], got {eta0}")));
    }
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::invalid(format!("lambda0 must be positive, got {lambda0}")));
    }
    if eta0 > 0.0 && lambda0 <= eta0 * beta {
        return Err(Error::invalid(format!(
            "lambda0 = {lambda0} must exceed eta0 * beta = {} for a log-concave pi_0",
            eta0 * beta
        )));
    }
    Ok(())
}

/// Gradient descent on `V_0` from the origin with step `1/(lambda0 + eta0 beta)`,
/// stopped once `|∇V_0| <= (lambda0 - eta0 beta) tol`, which certifies
/// `|x - argmin V_0| <= tol`.
pub fn gd_minimize<T: Target + ?Sized>(
    target: &T,
    eta0: f64,
    lambda0: f64,
    opts: &GdOptions,
) -> Result<GdResult> {
    let beta = target.smoothness();
    check_params(eta0, lambda0, beta)?;
    let d = target.dim();
    let kappa = lambda0 - eta0 * beta;
    let step = 1.0 / (lambda0 + eta0 * beta);
    let tol = match opts.tol {
        Some(t) => t,
        None if eta0 * beta > 0.0 => 1.0 / (eta0 * beta).sqrt(),
        None => f64::INFINITY,
    };
    let threshold = kappa * tol;
    let v0 = Anchored { target, eta0, lambda0 };

    let mut x = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut path = opts.record_path.then(|| vec![x.clone()]);
    for iterations in 0..=opts.max_iter {
        v0.gradient(&x, &mut g);
        let calls = iterations as u64 + 1;
        let grad_norm = norm(&g);
        if !grad_norm.is_finite() {
            return Err(Error::NonFiniteGradient { position: x });
        }
        if grad_norm <= threshold {
            return Ok(GdResult {
                point: x,
                iterations,
                grad_norm,
                oracle_calls: calls,
                path,
            });
        }
        if iterations == opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                grad_norm,
            });
        }
        for (xv, gv) in x.iter_mut().zip(&g) {
            *xv -= step * gv;
        }
        if let Some(p) = path.as_mut() {
            p.push(x.clone());
        }
    }
    unreachable!("loop returns on its last iteration")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pi0Options {
    pub trial_cap: u64,
    pub gd: GdOptions,
}

impl Default for Pi0Options {
    fn default() -> Self {
        Pi0Options {
            trial_cap: 1_000_000,
            gd: GdOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pi0Sample {
    pub position: Vec<f64>,
    /// Proposals drawn; equals the number of `V_0` evaluations in the
    /// rejection loop (1 for direct Gaussian draws).
    pub trials: u64,
    /// `V` / `∇V` evaluations spent on this draw.
    pub oracle_calls: u64,
    /// Largest log-acceptance seen; `<= 0` whenever the envelope holds.
    pub max_log_accept: f64,
}

/// Reusable `pi_0` sampler: the gradient-descent anchor is computed once.
#[derive(Debug)]
pub struct Pi0Sampler<'a, T: Target + ?Sized> {
    target: &'a T,
    eta0: f64,
    lambda0: f64,
    kappa: f64,
    trial_cap: u64,
    anchor: Option<Anchor>,
}

#[derive(Clone, Debug)]
struct Anchor {
    point: Vec<f64>,
    value: f64,
    gradient: Vec<f64>,
    proposal_mean: Vec<f64>,
    setup_calls: u64,
}

impl<'a, T: Target + ?Sized> Pi0Sampler<'a, T> {
    pub fn new(target: &'a T, eta0: f64, lambda0: f64, opts: &Pi0Options) -> Result<Self> {
        let beta = target.smoothness();
        check_params(eta0, lambda0, beta)?;
        let kappa = lambda0 - eta0 * beta;
        let anchor = if eta0 == 0.0 {
            None
        } else {
            let gd = gd_minimize(target, eta0, lambda0, &opts.gd)?;
            let v0 = Anchored { target, eta0, lambda0 };
            let mut gradient = vec![0.0; target.dim()];
            v0.gradient(&gd.point, &mut gradient);
            let value = v0.value(&gd.point);
            let proposal_mean = gd
                .point
                .iter()
                .zip(&gradient)
                .map(|(x, g)| x - g / kappa)
                .collect();
            Some(Anchor {
                point: gd.point,
                value,
                gradient,
                proposal_mean,
                setup_calls: gd.oracle_calls + 2,
            })
        };
        Ok(Pi0Sampler {
            target,
            eta0,
            lambda0,
            kappa,
            trial_cap: opts.trial_cap,
            anchor,
        })
    }

    /// Oracle calls spent on the anchor (gradient descent plus one value and
    /// one gradient at the anchor).
    pub fn setup_calls(&self) -> u64 {
        self.anchor.as_ref().map_or(0, |a| a.setup_calls)
    }

    /// Anchor point `x'`, if the rejection path is in use.
    pub fn anchor(&self) -> Option<&[f64]> {
        self.anchor.as_ref().map(|a| a.point.as_slice())
    }

    /// Gradient of `V_0` at the anchor.
    pub fn anchor_gradient(&self) -> Option<&[f64]> {
        self.anchor.as_ref().map(|a| a.gradient.as_slice())
    }

    pub fn draw(&self, rng: &mut RngStream) -> Result<Pi0Sample> {
        let d = self.target.dim();
        let Some(anchor) = &self.anchor else {
            let sd = self.lambda0.sqrt().recip();
            let mut x = vec![0.0; d];
            rng.fill_standard_normal(&mut x);
            x.iter_mut().for_each(|v| *v *= sd);
            return Ok(Pi0Sample {
                position: x,
                trials: 1,
                oracle_calls: 0,
                max_log_accept: 0.0,
            });
        };
        let v0 = Anchored {
            target: self.target,
            eta0: self.eta0,
            lambda0: self.lambda0,
        };
        let sd = self.kappa.sqrt().recip();
        let mut x = vec![0.0; d];
        let mut max_log_accept = f64::NEG_INFINITY;
        for trial in 1..=self.trial_cap {
            rng.fill_standard_normal(&mut x);
            for (xv, m) in x.iter_mut().zip(&anchor.proposal_mean) {
                *xv = m + sd * *xv;
            }
            let u = rng.uniform();
            let diff: Vec<f64> = x.iter().zip(&anchor.point).map(|(a, b)| a - b).collect();
            let log_accept = -v0.value(&x)
                + anchor.value
                + dot(&anchor.gradient, &diff)
                + 0.5 * self.kappa * dist2(&x, &anchor.point);
            max_log_accept = max_log_accept.max(log_accept);
            if log_accept > ENVELOPE_SLACK {
                return Err(Error::EnvelopeViolated { log_accept });
            }
            if u.ln() <= log_accept {
                return Ok(Pi0Sample {
                    position: x,
                    trials: trial,
                    oracle_calls: trial,
                    max_log_accept,
                });
            }
        }
        Err(Error::TrialCapExceeded {
            trials: self.trial_cap,
        })
    }

    /// Upper bound on the expected trial count for this anchor:
    /// `((lambda0 + eta0 beta)/kappa)^{d/2} exp(eta0 beta |∇V_0(x')|^2 / (lambda0^2 - eta0^2 beta^2))`.
    pub fn expected_trials_bound(&self) -> f64 {
        let Some(anchor) = &self.anchor else {
            return 1.0;
        };
        let eb = self.eta0 * self.target.smoothness();
        let d = self.target.dim() as f64;
        ((self.lambda0 + eb) / self.kappa).powf(d / 2.0)
            * (eb * dot(&anchor.gradient, &anchor.gradient) / (self.lambda0 * self.lambda0 - eb * eb))
                .exp()
    }
}

/// One exact draw from `pi_0`. Builds a fresh [`Pi0Sampler`]; reuse one
/// directly when drawing many samples.
pub fn sample_pi0<T: Target + ?Sized>(
    target: &T,
    eta0: f64,
    lambda0: f64,
    rng: &mut RngStream,
    opts: &Pi0Options,
) -> Result<Pi0Sample> {
    let sampler = Pi0Sampler::new(target, eta0, lambda0, opts)?;
    let mut s = sampler.draw(rng)?;
    s.oracle_calls += sampler.setup_calls();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::GaussianMixture;

    /// `V = 1/2 Σ c_j (x_j - a_j)^2`, possibly with negative curvatures.
    struct Quadratic {
        curv: Vec<f64>,
        center: Vec<f64>,
    }

    impl Target for Quadratic {
        fn dim(&self) -> usize {
            self.curv.len()
        }
        fn energy(&self, x: &[f64]) -> f64 {
            0.5 * x
                .iter()
                .zip(&self.center)
                .zip(&self.curv)
                .map(|((x, a), c)| c * (x - a) * (x - a))
                .sum::<f64>()
        }
        fn energy_gradient(&self, x: &[f64], out: &mut [f64]) {
            for (j, o) in out.iter_mut().enumerate() {
                *o = self.curv[j] * (x[j] - self.center[j]);
            }
        }
        fn smoothness(&self) -> f64 {
            self.curv.iter().fold(0.0, |m, c| m.max(c.abs()))
        }
        fn minimizer_radius(&self) -> f64 {
            norm(&self.center)
        }
    }

    fn moments(xs: &[Vec<f64>], j: usize) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().map(|x| x[j]).sum::<f64>() / n;
        let var = xs.iter().map(|x| (x[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn direct_gaussian_when_eta0_is_zero() {
        let t = GaussianMixture::ring(6, 2.0, 10.0).unwrap();
        let s = Pi0Sampler::new(&t, 0.0, 4.0, &Pi0Options::default()).unwrap();
        assert_eq!(s.setup_calls(), 0);
        let mut rng = RngStream::new(1, 0);
        let n = 100_000;
        let xs: Vec<Vec<f64>> = (0..n).map(|_| s.draw(&mut rng).unwrap().position).collect();
        for j in 0..2 {
            let (mean, var) = moments(&xs, j);
            let se_mean = (0.25 / n as f64).sqrt();
            let se_var = 0.25 * (2.0 / (n as f64 - 1.0)).sqrt();
            assert!(mean.abs() < 3.0 * se_mean);
            assert!((var - 0.25).abs() < 3.0 * se_var, "var={var}");
        }
    }

    #[test]
    fn quadratic_target_gives_exact_gaussian() {
        let beta = 10.0;
        let t = GaussianMixture::new(vec![1.0], vec![vec![0.0, 0.0]], beta).unwrap();
        let lambda0 = beta * 2.0;
        let s = Pi0Sampler::new(&t, 1.0, lambda0, &Pi0Options::default()).unwrap();
        let mut rng = RngStream::new(2, 0);
        let n = 20_000;
        let mut xs = Vec::with_capacity(n);
        let mut trials = 0;
        for _ in 0..n {
            let p = s.draw(&mut rng).unwrap();
            assert!(p.max_log_accept <= 1e-9);
            assert_eq!(p.trials, p.oracle_calls);
            trials += p.trials;
            xs.push(p.position);
        }
        let truth = 1.0 / (lambda0 + beta);
        for j in 0..2 {
            let (mean, var) = moments(&xs, j);
            assert!(mean.abs() < 3.0 * (truth / n as f64).sqrt());
            assert!((var - truth).abs() < 3.0 * truth * (2.0 / (n as f64 - 1.0)).sqrt());
        }
        // mean trial count is exactly ((lambda0 + beta)/(lambda0 - beta))^{d/2} = 3 here
        let mean_trials = trials as f64 / n as f64;
        assert!((mean_trials - 3.0).abs() < 0.1, "{mean_trials}");
    }

    #[test]
    fn rejects_non_log_concave_pairing() {
        // 6-ring at r = 2 is 1610-smooth, so lambda0 = eta0 d beta_precision = 20 is too small
        let t = GaussianMixture::ring(6, 2.0, 10.0).unwrap();
        let mut rng = RngStream::new(0, 0);
        let err = sample_pi0(&t, 1.0, 20.0, &mut rng, &Pi0Options::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(sample_pi0(&t, 1.5, 1e5, &mut rng, &Pi0Options::default()).is_err());
    }

    #[test]
    fn ring_trial_count_within_geometric_bound() {
        let t = GaussianMixture::ring(6, 2.0, 10.0).unwrap();
        let b = t.smoothness_bound();
        let lambda0 = 2.0 * b;
        let s = Pi0Sampler::new(&t, 1.0, lambda0, &Pi0Options::default()).unwrap();
        let bound = s.expected_trials_bound();
        // the d-term alone is ((lambda0 + B)/(lambda0 - B))^{d/2} = 3 <= e^{eta0 B d/(lambda0 - eta0 B)}
        assert!(bound >= 3.0 && bound <= (2.0f64).exp() * 1.01, "bound = {bound}");
        let mut rng = RngStream::new(3, 0);
        let n = 1000;
        let mut trials = 0;
        for _ in 0..n {
            let p = s.draw(&mut rng).unwrap();
            assert!(p.max_log_accept <= 1e-9);
            trials += p.trials;
        }
        let mean = trials as f64 / n as f64;
        assert!(mean.is_finite() && mean <= bound * 1.2, "mean={mean} bound={bound}");
    }

    #[test]
    fn gd_at_minimiser_stops_immediately() {
        let t = GaussianMixture::new(vec![1.0], vec![vec![0.0, 0.0]], 10.0).unwrap();
        let r = gd_minimize(&t, 1.0, 20.0, &GdOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.point, vec![0.0, 0.0]);
    }

    #[test]
    fn gd_shifted_quadratic() {
        let (beta, eta0, lambda0) = (10.0, 0.7, 30.0);
        let a = [3.0, -1.0];
        let t = GaussianMixture::new(vec![1.0], vec![a.to_vec()], beta).unwrap();
        let tol = 1e-6;
        let r = gd_minimize(&t, eta0, lambda0, &GdOptions { tol: Some(tol), ..Default::default() })
            .unwrap();
        let shrink = eta0 * beta / (lambda0 + eta0 * beta);
        let truth = [shrink * a[0], shrink * a[1]];
        assert!(dist2(&r.point, &truth).sqrt() <= tol);
    }

    #[test]
    fn gd_contraction_rate() {
        let t = Quadratic {
            curv: vec![-4.0, 1.0, 8.0],
            center: vec![1.0, -2.0, 0.5],
        };
        let (eta0, lambda0) = (1.0, 12.0);
        let beta = t.smoothness();
        // minimiser of V_0: (eta0 c_j a_j) / (eta0 c_j + lambda0)
        let xstar: Vec<f64> = (0..3)
            .map(|j| eta0 * t.curv[j] * t.center[j] / (eta0 * t.curv[j] + lambda0))
            .collect();
        let r = gd_minimize(
            &t,
            eta0,
            lambda0,
            &GdOptions {
                tol: Some(1e-12),
                record_path: true,
                ..Default::default()
            },
        )
        .unwrap();
        let rate = 1.0 - (lambda0 - eta0 * beta) / (lambda0 + eta0 * beta);
        let path = r.path.unwrap();
        assert!(path.len() > 3);
        for w in path.windows(2) {
            let e0 = dist2(&w[0], &xstar).sqrt();
            let e1 = dist2(&w[1], &xstar).sqrt();
            assert!(e1 <= rate * e0 * (1.0 + 1e-9) + 1e-15, "{e1} > {rate} * {e0}");
        }
    }

    #[test]
    fn gd_iteration_cap() {
        let t = Quadratic {
            curv: vec![-4.0],
            center: vec![1.0],
        };
        let err = gd_minimize(
            &t,
            1.0,
            4.5,
            &GdOptions {
                tol: Some(1e-14),
                max_iter: 3,
                record_path: false,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 3, .. }));
    }

    #[test]
    fn trial_cap_is_enforced() {
        let t = Quadratic {
            curv: vec![10.0, 10.0, 10.0, 10.0, 10.0, 10.0],
            center: vec![0.0; 6],
        };
        // kappa tiny relative to lambda0 + beta: acceptance ~ ((kappa)/(L))^{d/2} ≈ 1e-12
        let opts = Pi0Options {
            trial_cap: 50,
            ..Default::default()
        };
        let s = Pi0Sampler::new(&t, 1.0, 10.0001, &opts).unwrap();
        let err = s.draw(&mut RngStream::new(0, 0)).unwrap_err();
        assert!(matches!(err, Error::TrialCapExceeded { trials: 50 }));
    }

    #[test]
    fn envelope_violation_is_detected() {
        // lying about smoothness breaks the envelope
        struct Liar(Quadratic);
        impl Target for Liar {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn energy(&self, x: &[f64]) -> f64 {
                self.0.energy(x)
            }
            fn energy_gradient(&self, x: &[f64], out: &mut [f64]) {
                self.0.energy_gradient(x, out)
            }
            fn smoothness(&self) -> f64 {
                1.0
            }
            fn minimizer_radius(&self) -> f64 {
                0.0
            }
        }
        let t = Liar(Quadratic {
            curv: vec![-50.0, -50.0],
            center: vec![0.0, 0.0],
        });
        let s = Pi0Sampler::new(&t, 1.0, 60.0, &Pi0Options::default()).unwrap();
        let mut rng = RngStream::new(0, 0);
        let violated = (0..100).any(|_| matches!(s.draw(&mut rng), Err(Error::EnvelopeViolated { .. })));
        assert!(violated);
    }

    #[test]
    fn sample_pi0_counts_setup_calls() {
        let t = GaussianMixture::new(vec![1.0], vec![vec![1.0, 1.0]], 10.0).unwrap();
        let mut rng = RngStream::new(4, 0);
        let p = sample_pi0(&t, 1.0, 20.0, &mut rng, &Pi0Options::default()).unwrap();
        assert!(p.oracle_calls >= p.trials + 2);
    }
}
