//! k-nearest-neighbour estimate of `KL(P || Q)` from samples.
//!
//! ```text
//! KL ≈ (d/n) Σ_i log(nu_k(i) / rho_k(i)) + log(m / (n - 1))
//! ```
//!
//! where `rho_k(i)` is the distance from `p_i` to its k-th nearest neighbour
//! among the other `p` samples and `nu_k(i)` its k-th nearest distance into the
//! `q` samples. The raw estimate can be negative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::targets::dist2;

use super::SampleSet;

/// Smallest distance used inside the logarithm.
pub const DISTANCE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlEstimate {
    pub value: f64,
    /// How many neighbour distances were raised to [`DISTANCE_FLOOR`].
    pub floored: usize,
}

pub fn knn_kl(p: &SampleSet, q: &SampleSet, k: usize) -> Result<KlEstimate> {
    let (n, m) = (p.len(), q.len());
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    if k == 0 || k >= n.min(m) {
        return Err(Error::invalid(format!(
            "need 1 <= k < min(n, m) = {}, got k = {k}",
            n.min(m)
        )));
    }
    let floor2 = DISTANCE_FLOOR * DISTANCE_FLOOR;
    // per-point terms collected in order so the sum is reproducible
    let terms: Vec<(f64, usize)> = (0..n)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n.max(m)),
            |buf, i| {
                let x = p.point(i);
                let rho2 = kth_distance2(buf, p.points().enumerate().filter(|(j, _)| *j != i).map(|(_, y)| y), x, k);
                let nu2 = kth_distance2(buf, q.points(), x, k);
                let floored = usize::from(rho2 < floor2) + usize::from(nu2 < floor2);
                (0.5 * (nu2.max(floor2).ln() - rho2.max(floor2).ln()), floored)
            },
        )
        .collect();
    let log_ratio: f64 = terms.iter().map(|t| t.0).sum();
    let floored = terms.iter().map(|t| t.1).sum();
    let d = p.dim() as f64;
    Ok(KlEstimate {
        value: d / n as f64 * log_ratio + (m as f64 / (n as f64 - 1.0)).ln(),
        floored,
    })
}

fn kth_distance2<'a>(
    buf: &mut Vec<f64>,
    others: impl Iterator<Item = &'a [f64]>,
    x: &[f64],
    k: usize,
) -> f64 {
    buf.clear();
    buf.extend(others.map(|y| dist2(x, y)));
    let (_, kth, _) = buf.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn gaussian_set(n: usize, shift: &[f64], rng: &mut RngStream) -> SampleSet {
        let d = shift.len();
        let mut data = vec![0.0; n * d];
        rng.fill_standard_normal(&mut data);
        for row in data.chunks_exact_mut(d) {
            for (v, s) in row.iter_mut().zip(shift) {
                *v += s;
            }
        }
        SampleSet::from_flat(data, d, "gauss").unwrap()
    }

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }

    #[test]
    fn identical_distributions_near_zero() {
        let est: Vec<f64> = (0..20)
            .map(|s| {
                let mut rng = RngStream::new(100 + s, 0);
                let p = gaussian_set(1000, &[0.0, 0.0], &mut rng);
                let q = gaussian_set(1000, &[0.0, 0.0], &mut rng);
                knn_kl(&p, &q, 3).unwrap().value
            })
            .collect();
        let med = median(est);
        assert!(med.abs() < 0.1, "median {med}");
    }

    #[test]
    fn shifted_gaussian_half() {
        // KL(N(0,I) || N(mu,I)) = |mu|^2 / 2 = 0.5
        let est: Vec<f64> = (0..20)
            .map(|s| {
                let mut rng = RngStream::new(200 + s, 0);
                let p = gaussian_set(1000, &[0.0, 0.0], &mut rng);
                let q = gaussian_set(1000, &[1.0, 0.0], &mut rng);
                knn_kl(&p, &q, 3).unwrap().value
            })
            .collect();
        let med = median(est);
        assert!((med - 0.5).abs() < 0.1, "median {med}");
    }

    #[test]
    fn duplicates_are_floored() {
        let p = SampleSet::new(&vec![vec![0.0, 0.0]; 5], "dup").unwrap();
        let q = SampleSet::new(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 3.0]], "q").unwrap();
        let est = knn_kl(&p, &q, 1).unwrap();
        assert!(est.value.is_finite());
        assert_eq!(est.floored, 5);
    }

    #[test]
    fn argument_checks() {
        let p = SampleSet::new(&[vec![0.0], vec![1.0], vec![2.0]], "p").unwrap();
        let q = SampleSet::new(&[vec![0.0, 0.0], vec![1.0, 1.0]], "q").unwrap();
        assert!(knn_kl(&p, &q, 1).is_err());
        assert!(knn_kl(&p, &p, 0).is_err());
        assert!(knn_kl(&p, &p, 3).is_err());
        assert!(knn_kl(&p, &p, 2).is_ok());
    }
}
