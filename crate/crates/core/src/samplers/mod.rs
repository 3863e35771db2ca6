//! Langevin samplers: the annealed chain, the plain LMC baseline and the
//! exact rejection sampler for the initial distribution `pi_0`.

mod almc;
mod init;
mod lmc;
mod rejection;

pub use almc::{almc_step, apply_update, run_almc, Almc, AlmcOutput};
pub use init::{InitMethod, Initializer};
pub use lmc::run_lmc;
pub use rejection::{
    gd_minimize, sample_pi0, GdOptions, GdResult, Pi0Options, Pi0Sample, Pi0Sampler,
};

use crate::error::{Error, Result};

/// Position of one chain plus its bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub position: Vec<f64>,
    /// Number of updates applied so far.
    pub step_index: usize,
    /// Number of `V` / `∇V` evaluations so far.
    pub oracle_calls: u64,
}

impl ChainState {
    pub fn new(position: Vec<f64>) -> Self {
        ChainState {
            position,
            step_index: 0,
            oracle_calls: 0,
        }
    }
}

pub(crate) fn ensure_finite_gradient(position: &[f64], gradient: &[f64]) -> Result<()> {
    if gradient.iter().all(|g| g.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteGradient {
            position: position.to_vec(),
        })
    }
}
