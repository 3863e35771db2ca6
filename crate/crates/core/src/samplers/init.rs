//! Choosing how to draw `x_0 ~ pi_0` for a mixture target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::schedule::AnnealingSchedule;
use crate::targets::{GaussianMixture, Target};

use super::rejection::{Pi0Options, Pi0Sampler};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMethod {
    /// `Gaussian` when `eta0 = 0`, `MixtureTilt` when `eta0 = 1`,
    /// `Rejection` otherwise.
    #[default]
    Auto,
    /// `N(0, lambda0^{-1} I)`; exact only when `eta0 = 0`.
    Gaussian,
    /// Quadratic-envelope rejection sampling; needs `lambda0 > eta0 beta`.
    Rejection,
    /// `pi(x) exp(-lambda0 |x|^2 / 2)` is again a Gaussian mixture, sampled
    /// exactly; needs `eta0 = 1`.
    MixtureTilt,
}

/// A ready-to-draw `pi_0` sampler.
#[derive(Debug)]
pub enum Initializer<'a> {
    Gaussian { lambda0: f64, dim: usize },
    MixtureTilt(GaussianMixture),
    Rejection(Pi0Sampler<'a, GaussianMixture>),
}

impl<'a> Initializer<'a> {
    pub fn new(
        target: &'a GaussianMixture,
        schedule: &AnnealingSchedule,
        method: InitMethod,
        opts: &Pi0Options,
    ) -> Result<Self> {
        let eta0 = schedule.eta0();
        let lambda0 = schedule.lambda0();
        let method = match method {
            InitMethod::Auto if eta0 == 0.0 => InitMethod::Gaussian,
            InitMethod::Auto if eta0 == 1.0 => InitMethod::MixtureTilt,
            InitMethod::Auto => InitMethod::Rejection,
            m => m,
        };
        Ok(match method {
            InitMethod::Gaussian => {
                if !(lambda0 > 0.0) {
                    return Err(Error::invalid("Gaussian start needs lambda0 > 0"));
                }
                Initializer::Gaussian {
                    lambda0,
                    dim: target.dim(),
                }
            }
            InitMethod::MixtureTilt => {
                if eta0 != 1.0 {
                    return Err(Error::invalid(format!(
                        "mixture tilt is exact only for eta0 = 1, got {eta0}"
                    )));
                }
                Initializer::MixtureTilt(target.tilted(lambda0)?)
            }
            InitMethod::Rejection => {
                Initializer::Rejection(Pi0Sampler::new(target, eta0, lambda0, opts)?)
            }
            InitMethod::Auto => unreachable!("resolved above"),
        })
    }

    /// Oracle calls spent before the first draw.
    pub fn setup_calls(&self) -> u64 {
        match self {
            Initializer::Rejection(s) => s.setup_calls(),
            _ => 0,
        }
    }

    /// One draw and the oracle calls it cost.
    pub fn draw(&self, rng: &mut RngStream) -> Result<(Vec<f64>, u64)> {
        match self {
            Initializer::Gaussian { lambda0, dim } => {
                let mut x = vec![0.0; *dim];
                rng.fill_standard_normal(&mut x);
                let sd = lambda0.sqrt().recip();
                x.iter_mut().for_each(|v| *v *= sd);
                Ok((x, 0))
            }
            Initializer::MixtureTilt(m) => Ok((m.sample(rng), 0)),
            Initializer::Rejection(s) => {
                let p = s.draw(rng)?;
                Ok((p.position, p.oracle_calls))
            }
        }
    }
}
