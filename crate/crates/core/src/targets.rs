//! Target distributions `pi ∝ exp(-V)`.
//!
//! The working target is the isotropic Gaussian mixture
//! `pi = sum_i p_i N(y_i, beta^{-1} I)`. Its potential is only defined up to
//! an additive constant: the global normaliser is dropped, and every consumer
//! in this crate uses potential differences or gradients.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rng::RngStream;

/// Potential/gradient oracle consumed by the samplers.
///
/// Slices passed to `energy` and `energy_gradient` must have length `dim()`;
/// implementations may panic otherwise. Checked entry points live on the
/// concrete types.
pub trait Target: Sync {
    fn dim(&self) -> usize;

    /// `V(x)` up to an additive constant.
    fn energy(&self, x: &[f64]) -> f64;

    /// Writes `∇V(x)` into `out`.
    fn energy_gradient(&self, x: &[f64], out: &mut [f64]);

    /// A constant `B` with `-B I ⪯ ∇²V ⪯ B I` everywhere.
    fn smoothness(&self) -> f64;

    /// Radius `R` of a ball around the origin known to contain a global
    /// minimiser of `V`.
    fn minimizer_radius(&self) -> f64;
}

/// JSON form: `{"weights":[...], "means":[[...],...], "precision":10.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub precision: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMixture {
    dim: usize,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    /// Row-major `n_components x dim`.
    means: Vec<f64>,
    precision: f64,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, precision: f64) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() {
            return Err(Error::invalid(format!(
                "{} weights for {} means",
                weights.len(),
                means.len()
            )));
        }
        if !(precision > 0.0 && precision.is_finite()) {
            return Err(Error::invalid(format!("precision must be positive, got {precision}")));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("weights must be strictly positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        let dim = means[0].len();
        if dim == 0 {
            return Err(Error::invalid("means must have dimension >= 1"));
        }
        let mut flat = Vec::with_capacity(dim * means.len());
        for m in &means {
            check_dim(dim, m.len())?;
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("means must be finite"));
            }
            flat.extend_from_slice(m);
        }
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        Ok(GaussianMixture {
            dim,
            weights,
            log_weights,
            means: flat,
            precision,
        })
    }

    /// Equal-weight modes on a circle of radius `r` in the plane:
    /// `y_k = (r cos(2πk/n), r sin(2πk/n))`.
    pub fn ring(num_modes: usize, r: f64, precision: f64) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::invalid("ring needs at least one mode"));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("ring radius must be >= 0, got {r}")));
        }
        let w = 1.0 / num_modes as f64;
        let means = (0..num_modes)
            .map(|k| {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / num_modes as f64;
                vec![r * angle.cos(), r * angle.sin()]
            })
            .collect();
        let mut weights = vec![w; num_modes];
        // keep the sum within 1e-12 for awkward n
        let excess: f64 = weights.iter().sum::<f64>() - 1.0;
        weights[0] -= excess;
        Self::new(weights, means, precision)
    }

    pub fn from_spec(spec: MixtureSpec) -> Result<Self> {
        Self::new(spec.weights, spec.means, spec.precision)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::from_spec(serde_json::from_str(json)?)
    }

    pub fn to_spec(&self) -> MixtureSpec {
        MixtureSpec {
            weights: self.weights.clone(),
            means: self.means().map(<[f64]>::to_vec).collect(),
            precision: self.precision,
        }
    }

    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.means.chunks_exact(self.dim)
    }

    pub fn mean(&self, i: usize) -> &[f64] {
        &self.means[i * self.dim..(i + 1) * self.dim]
    }

    /// `r = max_i |y_i|`.
    pub fn max_mean_norm(&self) -> f64 {
        self.means().map(norm).fold(0.0, f64::max)
    }

    /// `max_{i,j} |y_i - y_j|`.
    pub fn max_pairwise_distance(&self) -> f64 {
        let mut best = 0.0_f64;
        for (i, a) in self.means().enumerate() {
            for b in self.means().skip(i + 1) {
                best = best.max(dist2(a, b).sqrt());
            }
        }
        best
    }

    /// `B = beta (4 r^2 beta + 1)` with `r = max |y_i|`; a single component is
    /// exactly `beta`-smooth.
    pub fn smoothness_bound(&self) -> f64 {
        if self.num_components() == 1 {
            return self.precision;
        }
        let r = self.max_mean_norm();
        self.precision * (4.0 * r * r * self.precision + 1.0)
    }

    /// Eigenvalue sandwich for `∇²V = -∇² log pi`:
    /// `[1/s² - D²/(2 s⁴), 1/s²]` with `s² = 1/beta` and `D` the largest
    /// distance between two means.
    pub fn hessian_eigen_bounds(&self) -> (f64, f64) {
        let beta = self.precision;
        let d = self.max_pairwise_distance();
        (beta - beta * beta * d * d / 2.0, beta)
    }

    /// Checked `V(x)`.
    pub fn potential(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.energy(x))
    }

    /// Checked `∇V(x)`.
    pub fn grad_potential(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        let mut out = vec![0.0; self.dim];
        self.energy_gradient(x, &mut out);
        Ok(out)
    }

    /// The mixture `pi(x) exp(-lambda |x|^2 / 2)`, normalised. Each component
    /// becomes `N(beta y_i / (lambda + beta), (lambda + beta)^{-1} I)` with
    /// weight `∝ p_i exp(-lambda beta |y_i|^2 / (2 (lambda + beta)))`.
    ///
    /// This is `pi_theta` for schedules with `eta(theta) = 1`.
    pub fn tilted(&self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("tilt must be >= 0, got {lambda}")));
        }
        let beta = self.precision;
        let shrink = beta / (lambda + beta);
        let log_w: Vec<f64> = self
            .means()
            .zip(&self.log_weights)
            .map(|(y, lw)| lw - 0.5 * lambda * shrink * dot(y, y))
            .collect();
        let lse = log_sum_exp(&log_w);
        let weights = normalized_weights(log_w.iter().map(|l| (l - lse).exp()).collect());
        let means = self
            .means()
            .map(|y| y.iter().map(|v| v * shrink).collect())
            .collect();
        Self::new(weights, means, lambda + beta)
    }

    /// `pi * N(0, variance I)`: same means and weights, component variance
    /// `1/beta + variance`.
    pub fn convolved(&self, variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::invalid(format!("variance must be >= 0, got {variance}")));
        }
        let mut out = self.clone();
        out.precision = 1.0 / (1.0 / self.precision + variance);
        Ok(out)
    }

    /// Exact draw: component by weight, then a Gaussian around its mean.
    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        let u = rng.uniform();
        let mut acc = 0.0;
        let mut idx = self.num_components() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                idx = i;
                break;
            }
        }
        let sd = self.precision.sqrt().recip();
        rng.fill_standard_normal(out);
        for (o, m) in out.iter_mut().zip(self.mean(idx)) {
            *o = m + sd * *o;
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(rng, &mut out);
        out
    }

    // max_i (log p_i - beta/2 |x - y_i|^2)
    fn max_exponent(&self, x: &[f64]) -> f64 {
        let half_beta = 0.5 * self.precision;
        self.means()
            .zip(&self.log_weights)
            .map(|(y, lw)| lw - half_beta * dist2(x, y))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Target for GaussianMixture {
    fn dim(&self) -> usize {
        self.dim
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let half_beta = 0.5 * self.precision;
        let max = self.max_exponent(x);
        let sum: f64 = self
            .means()
            .zip(&self.log_weights)
            .map(|(y, lw)| (lw - half_beta * dist2(x, y) - max).exp())
            .sum();
        -(max + sum.ln())
    }

    fn energy_gradient(&self, x: &[f64], out: &mut [f64]) {
        // ∇V(x) = beta (x - sum_i w_i(x) y_i), w = softmax of the exponents
        let half_beta = 0.5 * self.precision;
        let max = self.max_exponent(x);
        out.fill(0.0);
        let mut total = 0.0;
        for (y, lw) in self.means().zip(&self.log_weights) {
            let w = (lw - half_beta * dist2(x, y) - max).exp();
            total += w;
            for (o, yv) in out.iter_mut().zip(y) {
                *o += w * yv;
            }
        }
        for (o, xv) in out.iter_mut().zip(x) {
            *o = self.precision * (xv - *o / total);
        }
    }

    fn smoothness(&self) -> f64 {
        self.smoothness_bound()
    }

    fn minimizer_radius(&self) -> f64 {
        // minimisers of a mixture lie in the convex hull of the means
        self.max_mean_norm()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn normalized_weights(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= total;
    }
    let excess: f64 = w.iter().sum::<f64>() - 1.0;
    // dump rounding residue on the largest weight
    if let Some(big) = w.iter_mut().max_by(|a, b| a.total_cmp(b)) {
        *big -= excess;
    }
    w
}
