use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentRecord};
use crate::error::{Error, Result};

/// Median of `values`; NaN entries count as `+inf` so failed cells never pass.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v: Vec<f64> = values
        .iter()
        .map(|x| if x.is_nan() { f64::INFINITY } else { *x })
        .collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        let (a, b) = (v[n / 2 - 1], v[n / 2]);
        if a.is_infinite() || b.is_infinite() {
            a.max(b)
        } else {
            0.5 * (a + b)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome", content = "M")]
pub enum ThresholdOutcome {
    Reached(usize),
    NotReached,
}

impl ThresholdOutcome {
    pub fn value(self) -> Option<usize> {
        match self {
            ThresholdOutcome::Reached(m) => Some(m),
            ThresholdOutcome::NotReached => None,
        }
    }
}

/// Smallest `M` recorded for radius `r` whose median `kl_clamped` over seeds
/// is below `threshold`.
pub fn iterations_to_threshold(
    records: &[ExperimentRecord],
    r: f64,
    threshold: f64,
) -> Result<ThresholdOutcome> {
    let mut grid: Vec<usize> = records.iter().filter(|x| x.r == r).map(|x| x.m).collect();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::invalid(format!("no records for r = {r}")));
    }
    for m in grid {
        let kls: Vec<f64> = records
            .iter()
            .filter(|x| x.r == r && x.m == m)
            .map(|x| x.kl_clamped)
            .collect();
        if median(&kls) < threshold {
            return Ok(ThresholdOutcome::Reached(m));
        }
    }
    Ok(ThresholdOutcome::NotReached)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares of `log10 m` on `log10 r`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|(r, m)| !(*r > 0.0 && *m > 0.0 && r.is_finite() && m.is_finite())) {
        return Err(Error::invalid(format!("coordinates must be positive, got {p:?}")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("all radii are equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub threshold: f64,
    /// `(r, M*)` for every radius that reached the threshold.
    pub points: Vec<(f64, usize)>,
    pub not_reached: Vec<f64>,
    /// Absent when fewer than two radii reached the threshold.
    pub fit: Option<FitResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub aggregation: String,
    pub kl_direction: String,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub n_chains: usize,
    pub k_nn: usize,
    pub failed_cells: usize,
    pub fits: Vec<ThresholdFit>,
}

pub fn build_fit_report(
    config: &ExperimentConfig,
    master_seed: u64,
    records: &[ExperimentRecord],
) -> Result<FitReport> {
    let mut fits = Vec::with_capacity(config.thresholds.len());
    for &threshold in &config.thresholds {
        let mut points = Vec::new();
        let mut not_reached = Vec::new();
        for &r in &config.r_values {
            match iterations_to_threshold(records, r, threshold)? {
                ThresholdOutcome::Reached(m) => points.push((r, m)),
                ThresholdOutcome::NotReached => not_reached.push(r),
            }
        }
        let xy: Vec<(f64, f64)> = points.iter().map(|&(r, m)| (r, m as f64)).collect();
        let fit = if xy.len() >= 2 && xy.iter().all(|p| p.0 > 0.0) {
            Some(loglog_fit(&xy)?)
        } else {
            None
        };
        fits.push(ThresholdFit {
            threshold,
            points,
            not_reached,
            fit,
        });
    }
    Ok(FitReport {
        aggregation: "median of kl_clamped over seeds; failed cells never pass".into(),
        kl_direction: "KL(target || chains), target samples as reference".into(),
        master_seed,
        seeds: config.seeds.clone(),
        n_chains: config.n_chains,
        k_nn: config.k_nn,
        failed_cells: records.iter().filter(|r| r.failed()).count(),
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn rec(r: f64, m: usize, seed: u64, kl: f64) -> ExperimentRecord {
        ExperimentRecord {
            r,
            m,
            seed,
            kl_raw: kl,
            kl_clamped: kl.max(0.0),
            mode_coverage: 6,
            oracle_calls: 0,
            wall_ms: 0,
            error: None,
        }
    }

    #[test]
    fn median_handles_failures() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[0.1, f64::NAN, 0.2]), 0.2);
        assert_eq!(median(&[0.1, f64::NAN]), f64::INFINITY);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn threshold_search() {
        let recs = vec![
            rec(2.0, 100, 0, 0.5),
            rec(2.0, 100, 1, 0.3),
            rec(2.0, 100, 2, 0.05),
            rec(2.0, 200, 0, 0.15),
            rec(2.0, 200, 1, 0.12),
            rec(2.0, 200, 2, 0.3),
            rec(2.0, 400, 0, 0.05),
            rec(2.0, 400, 1, 0.02),
            rec(2.0, 400, 2, -0.01),
        ];
        assert_eq!(iterations_to_threshold(&recs, 2.0, 0.2).unwrap(), ThresholdOutcome::Reached(200));
        assert_eq!(iterations_to_threshold(&recs, 2.0, 0.1).unwrap(), ThresholdOutcome::Reached(400));
        assert_eq!(iterations_to_threshold(&recs, 2.0, 1.0).unwrap(), ThresholdOutcome::Reached(100));
        assert_eq!(iterations_to_threshold(&recs, 2.0, 0.01).unwrap(), ThresholdOutcome::NotReached);
        assert!(iterations_to_threshold(&recs, 5.0, 0.2).is_err());
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [2.0, 5.0, 10.0, 15.0]
            .iter()
            .map(|&r: &f64| (r, 10.0 * r.powi(3)))
            .collect();
        let f = loglog_fit(&pts).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jittered_power_law() {
        let mut rng = RngStream::new(11, 0);
        for _ in 0..50 {
            let pts: Vec<(f64, f64)> = [2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
                .iter()
                .map(|&r: &f64| (r, 18.0 * r.powf(2.8) * (1.0 + 0.2 * (rng.uniform() - 0.5))))
                .collect();
            let f = loglog_fit(&pts).unwrap();
            assert!((f.slope - 2.8).abs() < 0.3, "{f:?}");
            assert!(f.r_squared <= 1.0);
        }
    }

    #[test]
    fn fit_validation() {
        assert!(loglog_fit(&[(2.0, 10.0)]).is_err());
        assert!(loglog_fit(&[(2.0, 10.0), (0.0, 5.0)]).is_err());
        assert!(loglog_fit(&[(2.0, 10.0), (3.0, -5.0)]).is_err());
        assert!(loglog_fit(&[(2.0, 10.0), (2.0, 5.0)]).is_err());
    }

    #[test]
    fn report_lists_unreached_radii() {
        let mut cfg = ExperimentConfig::reference(&[2.0, 5.0, 10.0]).unwrap();
        cfg.seeds = vec![0];
        let recs = vec![rec(2.0, 200, 0, 0.05), rec(5.0, 500, 0, 0.15), rec(10.0, 2500, 0, 0.5)];
        let rep = build_fit_report(&cfg, 9, &recs).unwrap();
        assert_eq!(rep.fits.len(), 2);
        assert_eq!(rep.fits[0].points, vec![(2.0, 200), (5.0, 500)]);
        assert_eq!(rep.fits[0].not_reached, vec![10.0]);
        assert!(rep.fits[0].fit.is_some());
        assert_eq!(rep.fits[1].points, vec![(2.0, 200)]);
        assert!(rep.fits[1].fit.is_none());
        let json = serde_json::to_string(&rep).unwrap();
        let back: FitReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
    }
}
