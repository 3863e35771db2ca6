//! JSON run configuration for drawing ALMC samples.
//!
//! ```json
//! {
//!   "target": {"ring": {"num_modes": 6, "r": 2.0, "precision": 10.0}},
//!   "schedule": {"eta": "const1", "lambda": {"family": "power", "lambda0": 5.0, "gamma": 10}},
//!   "grid": {"kind": "quadratic", "steps": 200, "s_min": 0.01, "s_max": 0.05},
//!   "init": "auto"
//! }
//! ```
//!
//! `target` also accepts the explicit mixture form
//! `{"weights": [...], "means": [[...], ...], "precision": 10.0}`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::SampleSet;
use crate::rng::RngStream;
use crate::samplers::{Almc, InitMethod, Initializer, Pi0Options};
use crate::schedule::{AnnealingSchedule, ScheduleSpec, ThetaGrid};
use crate::targets::{GaussianMixture, MixtureSpec, Target};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Ring { ring: RingSpec },
    Mixture(MixtureSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub num_modes: usize,
    pub r: f64,
    pub precision: f64,
}

impl TargetSpec {
    pub fn build(&self) -> Result<GaussianMixture> {
        match self {
            TargetSpec::Ring { ring } => GaussianMixture::ring(ring.num_modes, ring.r, ring.precision),
            TargetSpec::Mixture(spec) => GaussianMixture::from_spec(spec.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GridSpec {
    Quadratic { steps: usize, s_min: f64, s_max: f64 },
    Uniform { steps: usize, total_time: f64 },
    Explicit { total_time: f64, thetas: Vec<f64> },
}

impl GridSpec {
    pub fn build(&self) -> Result<ThetaGrid> {
        match self {
            GridSpec::Quadratic { steps, s_min, s_max } => {
                ThetaGrid::from_quadratic_steps(*steps, *s_min, *s_max)
            }
            GridSpec::Uniform { steps, total_time } => ThetaGrid::uniform(*steps, *total_time),
            GridSpec::Explicit { total_time, thetas } => ThetaGrid::new(*total_time, thetas.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub target: TargetSpec,
    pub schedule: ScheduleSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub init: InitMethod,
}

/// Everything needed to run chains, built and validated.
#[derive(Debug)]
pub struct Run {
    pub target: GaussianMixture,
    pub schedule: AnnealingSchedule,
    pub grid: ThetaGrid,
    pub init: InitMethod,
}

impl RunConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<Run> {
        let schedule = self.schedule.build()?;
        schedule.validate()?;
        Ok(Run {
            target: self.target.build()?,
            schedule,
            grid: self.grid.build()?,
            init: self.init,
        })
    }
}

impl Run {
    /// Final positions of `chains` independent chains; chain `c` uses stream
    /// `(seed, c)` for both its `pi_0` draw and its Langevin noise.
    pub fn sample_chains(&self, chains: usize, seed: u64) -> Result<SampleSet> {
        let init = Initializer::new(&self.target, &self.schedule, self.init, &Pi0Options::default())?;
        let almc = Almc::new(&self.target, &self.schedule, &self.grid)?;
        let d = self.target.dim();
        let rows: Vec<Vec<f64>> = (0..chains as u64)
            .into_par_iter()
            .map(|c| {
                let mut rng = RngStream::new(seed, c);
                let (x0, _) = init.draw(&mut rng)?;
                Ok(almc.run(&x0, &mut rng, false)?.state.position)
            })
            .collect::<Result<_>>()?;
        SampleSet::from_flat(rows.concat(), d, format!("almc seed={seed}"))
    }
}
