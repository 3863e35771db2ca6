//! Scaling experiment on the planar ring of Gaussians.
//!
//! For each mode radius `r` and each iteration budget `M` on its grid, every
//! seed produces one [`ExperimentRecord`]: `n_chains` ALMC chains are run from
//! exact `pi_0` draws, `n_chains` exact target samples are drawn, and the k-NN
//! estimate of `KL(target || chains)` is recorded together with mode coverage
//! and oracle cost. [`iterations_to_threshold`] then picks the smallest `M`
//! whose median KL (over seeds) drops below a threshold, and [`loglog_fit`]
//! regresses `log10 M*` on `log10 r`.

mod analysis;
mod io;

pub use analysis::{
    build_fit_report, iterations_to_threshold, loglog_fit, median, FitReport, FitResult,
    ThresholdFit, ThresholdOutcome,
};
pub use io::{read_records_csv, write_records_csv, RECORDS_HEADER};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{knn_kl, mode_coverage, SampleSet};
use crate::rng::RngStream;
use crate::samplers::{Almc, InitMethod, Initializer, Pi0Options};
use crate::schedule::{AnnealingSchedule, EtaSpec, LambdaFamily, LambdaSpec, ScheduleSpec, ThetaGrid};
use crate::targets::{GaussianMixture, Target};

/// Iteration counts reported for radii 2, 5, 10, 15, 20, 25, 30.
pub const REFERENCE_M: [(f64, usize); 7] = [
    (2.0, 200),
    (5.0, 500),
    (10.0, 2500),
    (15.0, 10_000),
    (20.0, 20_000),
    (25.0, 40_000),
    (30.0, 60_000),
];

/// Multipliers applied to the reference `M` to build each radius' search grid.
pub const GRID_FACTORS: [f64; 5] = [0.5, 0.75, 1.0, 1.5, 2.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub r_values: Vec<f64>,
    pub beta: f64,
    pub num_modes: usize,
    /// Decreasing KL thresholds.
    pub thresholds: Vec<f64>,
    /// One increasing list of iteration counts per entry of `r_values`.
    pub m_grids: Vec<Vec<usize>>,
    pub s_min: f64,
    pub s_max: f64,
    pub n_chains: usize,
    pub seeds: Vec<u64>,
    pub k_nn: usize,
    pub schedule: ScheduleSpec,
    /// Mode-coverage radius in units of the component standard deviation.
    #[serde(default = "default_coverage_sigmas")]
    pub coverage_sigmas: f64,
    /// Skip the rest of a radius' grid once its median KL is below every
    /// threshold.
    #[serde(default)]
    pub early_stop: bool,
    /// How chains draw their starting point.
    #[serde(default)]
    pub init: InitMethod,
}

fn default_coverage_sigmas() -> f64 {
    3.0
}

impl ExperimentConfig {
    /// `eta ≡ 1`, `lambda(theta) = 5 (1 - theta)^10`.
    pub fn reference_schedule() -> ScheduleSpec {
        ScheduleSpec {
            eta: EtaSpec::Named("const1".into()),
            lambda: LambdaSpec::Family(LambdaFamily::Power {
                lambda0: 5.0,
                gamma: 10.0,
            }),
        }
    }

    /// Reference setup for the given radii, each with the grid
    /// `GRID_FACTORS x M_ref(r)`. Radii without a reference `M` are rejected.
    pub fn reference(r_values: &[f64]) -> Result<Self> {
        let m_grids = r_values
            .iter()
            .map(|&r| {
                let m_ref = REFERENCE_M
                    .iter()
                    .find(|(rr, _)| *rr == r)
                    .map(|p| p.1)
                    .ok_or_else(|| Error::invalid(format!("no reference M for r = {r}")))?;
                Ok(GRID_FACTORS
                    .iter()
                    .map(|f| (f * m_ref as f64).round() as usize)
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(ExperimentConfig {
            r_values: r_values.to_vec(),
            beta: 10.0,
            num_modes: 6,
            thresholds: vec![0.2, 0.1],
            m_grids,
            s_min: 0.01,
            s_max: 0.05,
            n_chains: 1000,
            seeds: (0..5).collect(),
            k_nn: 3,
            schedule: Self::reference_schedule(),
            coverage_sigmas: 3.0,
            early_stop: false,
            init: InitMethod::Auto,
        })
    }

    /// Radii 2, 5, 10.
    pub fn desk_scale() -> Self {
        Self::reference(&[2.0, 5.0, 10.0]).expect("reference radii")
    }

    /// All seven radii; hours of compute.
    pub fn full_scale() -> Self {
        let r: Vec<f64> = REFERENCE_M.iter().map(|p| p.0).collect();
        Self::reference(&r).expect("reference radii")
    }

    /// Only the reference `M` for each radius (one grid point).
    pub fn at_reference_m(mut self) -> Self {
        for (grid, r) in self.m_grids.iter_mut().zip(&self.r_values) {
            if let Some((_, m)) = REFERENCE_M.iter().find(|(rr, _)| rr == r) {
                *grid = vec![*m];
            }
        }
        self
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_values.is_empty() || self.r_values.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::invalid("r_values must be non-empty and >= 0"));
        }
        if self.m_grids.len() != self.r_values.len() {
            return Err(Error::invalid("need exactly one M grid per radius"));
        }
        for g in &self.m_grids {
            if g.is_empty() || g[0] == 0 || g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid(format!("M grid {g:?} must be positive and increasing")));
            }
        }
        if self.thresholds.is_empty()
            || self.thresholds.iter().any(|t| !(*t > 0.0))
            || self.thresholds.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::invalid("thresholds must be positive and decreasing"));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("need at least one seed"));
        }
        if self.k_nn == 0 || self.n_chains < 2 * (self.k_nn + 1) {
            return Err(Error::invalid(format!(
                "n_chains = {} must be at least 2 (k_nn + 1) = {}",
                self.n_chains,
                2 * (self.k_nn + 1)
            )));
        }
        if !(self.beta > 0.0) || self.num_modes == 0 {
            return Err(Error::invalid("need beta > 0 and at least one mode"));
        }
        if !(self.s_min > 0.0 && self.s_min <= self.s_max) {
            return Err(Error::invalid("need 0 < s_min <= s_max"));
        }
        self.schedule.build()?.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub r: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: u64,
    /// Raw estimate (may be negative); NaN for failed cells.
    pub kl_raw: f64,
    /// `max(kl_raw, 0)`; NaN for failed cells.
    pub kl_clamped: f64,
    pub mode_coverage: usize,
    pub oracle_calls: u64,
    pub wall_ms: u64,
    #[serde(skip)]
    pub error: Option<String>,
}

impl ExperimentRecord {
    pub fn failed(&self) -> bool {
        self.kl_raw.is_nan()
    }
}

/// Identifies one `(r, M, seed)` cell by its indices in the config.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub r_index: usize,
    pub m_index: usize,
    pub seed_index: usize,
}

/// Runs one cell. Chain `c` draws from stream `c + 1` of the cell's
/// generator; the exact target samples use stream 0.
pub fn run_cell(config: &ExperimentConfig, master_seed: u64, cell: Cell) -> ExperimentRecord {
    let r = config.r_values[cell.r_index];
    let m = config.m_grids[cell.r_index][cell.m_index];
    let seed = config.seeds[cell.seed_index];
    let start = Instant::now();
    let outcome = cell_outcome(config, master_seed, cell);
    let wall_ms = start.elapsed().as_millis() as u64;
    match outcome {
        Ok((kl, coverage, calls)) => ExperimentRecord {
            r,
            m,
            seed,
            kl_raw: kl,
            kl_clamped: kl.max(0.0),
            mode_coverage: coverage,
            oracle_calls: calls,
            wall_ms,
            error: None,
        },
        Err(e) => ExperimentRecord {
            r,
            m,
            seed,
            kl_raw: f64::NAN,
            kl_clamped: f64::NAN,
            mode_coverage: 0,
            oracle_calls: 0,
            wall_ms,
            error: Some(e.to_string()),
        },
    }
}

fn cell_outcome(config: &ExperimentConfig, master_seed: u64, cell: Cell) -> Result<(f64, usize, u64)> {
    let r = config.r_values[cell.r_index];
    let m = config.m_grids[cell.r_index][cell.m_index];
    let target = GaussianMixture::ring(config.num_modes, r, config.beta)?;
    let schedule = config.schedule.build()?;
    let grid = ThetaGrid::from_quadratic_steps(m, config.s_min, config.s_max)?;
    let path = cell_path(config, cell);
    let (chains, calls) = run_chains(
        &target,
        &schedule,
        &grid,
        config.init,
        config.n_chains,
        master_seed,
        path,
    )?;

    let mut rng = RngStream::derive(master_seed, &path, 0);
    let d = target.dim();
    let mut exact = vec![0.0; config.n_chains * d];
    for row in exact.chunks_exact_mut(d) {
        target.sample_into(&mut rng, row);
    }
    let exact = SampleSet::from_flat(exact, d, "target")?;

    let kl = knn_kl(&exact, &chains, config.k_nn)?.value;
    let means: Vec<Vec<f64>> = target.means().map(<[f64]>::to_vec).collect();
    let radius = config.coverage_sigmas / config.beta.sqrt();
    let coverage = mode_coverage(&chains, &means, radius)?;
    Ok((kl, coverage, calls))
}

/// Generator path of a cell: radius index, grid index, seed value.
pub fn cell_path(config: &ExperimentConfig, cell: Cell) -> [u64; 3] {
    [
        cell.r_index as u64,
        cell.m_index as u64,
        config.seeds[cell.seed_index],
    ]
}

/// Final positions of `n_chains` chains for one cell, plus total oracle calls.
pub fn run_chains(
    target: &GaussianMixture,
    schedule: &AnnealingSchedule,
    grid: &ThetaGrid,
    init: InitMethod,
    n_chains: usize,
    master_seed: u64,
    path: [u64; 3],
) -> Result<(SampleSet, u64)> {
    let init = Initializer::new(target, schedule, init, &Pi0Options::default())?;
    let almc = Almc::new(target, schedule, grid)?;
    let results: Vec<(Vec<f64>, u64)> = (0..n_chains as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::derive(master_seed, &path, c + 1);
            let (x0, init_calls) = init.draw(&mut rng)?;
            let out = almc.run(&x0, &mut rng, false)?;
            Ok((out.state.position, init_calls + out.state.oracle_calls))
        })
        .collect::<Result<_>>()?;
    let calls = init.setup_calls() + results.iter().map(|r| r.1).sum::<u64>();
    let flat: Vec<f64> = results.into_iter().flat_map(|r| r.0).collect();
    Ok((SampleSet::from_flat(flat, target.dim(), "almc")?, calls))
}

/// Runs every `(r, M, seed)` cell (radius-major, then `M`, then seed) and
/// reports each record to `on_record` as it completes.
pub fn run_sweep_with(
    config: &ExperimentConfig,
    master_seed: u64,
    mut on_record: impl FnMut(&ExperimentRecord),
) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let mut records = Vec::new();
    let min_threshold = config.thresholds.iter().copied().fold(f64::INFINITY, f64::min);
    for (r_index, grid) in config.m_grids.iter().enumerate() {
        for m_index in 0..grid.len() {
            let mut kls = Vec::with_capacity(config.seeds.len());
            for seed_index in 0..config.seeds.len() {
                let cell = Cell {
                    r_index,
                    m_index,
                    seed_index,
                };
                let rec = run_cell(config, master_seed, cell);
                on_record(&rec);
                kls.push(rec.kl_clamped);
                records.push(rec);
            }
            if config.early_stop && median(&kls) < min_threshold {
                break;
            }
        }
    }
    Ok(records)
}

pub fn run_sweep(config: &ExperimentConfig, master_seed: u64) -> Result<Vec<ExperimentRecord>> {
    run_sweep_with(config, master_seed, |_| {})
}
