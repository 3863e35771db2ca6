//! Annealed Langevin Monte Carlo (ALMC) for non-log-concave targets.
//!
//! The sampler follows the interpolation
//!
//! ```text
//! pi_theta(x) ∝ exp(-eta(theta) V(x) - lambda(theta)/2 |x|^2),   theta in [0, 1]
//! ```
//!
//! from an easy strongly log-concave start `pi_0` to the target `pi_1 = pi`,
//! taking a single exponential-integrator Langevin step towards each
//! intermediate distribution.
//!
//! Crate layout:
//!
//! - [`targets`]: potentials `V = -log pi` (Gaussian mixtures) with gradient and
//!   smoothness oracles.
//! - [`schedule`]: annealing schedules, time grids and the per-step
//!   coefficients `(Lambda0, H, Lambda1)`.
//! - [`samplers`]: the ALMC chain, the plain LMC baseline and the exact
//!   rejection sampler for `pi_0`.
//! - [`metrics`]: k-NN KL divergence, mode coverage, action quantities and
//!   closed-form Gaussian W2.
//! - [`harness`]: the ring-mixture scaling sweep, threshold search and
//!   log-log regression.
//!
//! ```
//! use almc::prelude::*;
//!
//! let target = GaussianMixture::ring(6, 2.0, 10.0).unwrap();
//! let schedule = AnnealingSchedule::power(5.0, 10.0);
//! let grid = ThetaGrid::from_quadratic_steps(200, 0.01, 0.05).unwrap();
//! let sampler = Almc::new(&target, &schedule, &grid).unwrap();
//!
//! let mut rng = RngStream::new(7, 0);
//! let x0 = target.tilted(schedule.lambda0()).unwrap().sample(&mut rng);
//! let out = sampler.run(&x0, &mut rng, false).unwrap();
//! assert_eq!(out.state.step_index, 200);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod quadrature;
pub mod rng;
pub mod samplers;
pub mod schedule;
pub mod targets;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::metrics::{
        gaussian_w2, heat_curve_action, knn_kl, mode_coverage, mog_action_bound, ActionMethod,
        ActionReport, KlEstimate, SampleSet,
    };
    pub use crate::rng::RngStream;
    pub use crate::samplers::{
        gd_minimize, run_almc, run_lmc, sample_pi0, Almc, AlmcOutput, ChainState, Pi0Options,
        Pi0Sample,
    };
    pub use crate::schedule::{
        plan_parameters, step_coefficients, AnnealingSchedule, Eta, Lambda, StepCoefficients,
        ThetaGrid,
    };
    pub use crate::targets::{GaussianMixture, Target};
}
