use crate::error::{check_dim, Error, Result};
use crate::rng::RngStream;
use crate::schedule::{AnnealingSchedule, StepCoefficients, ThetaGrid};
use crate::targets::Target;

use super::{ensure_finite_gradient, ChainState};

/// `x <- Lambda0 x - H g + Lambda1 xi`, coordinate-wise.
pub fn apply_update(position: &mut [f64], gradient: &[f64], coeffs: &StepCoefficients, noise: &[f64]) {
    let StepCoefficients {
        contraction,
        drift_weight,
        noise_scale,
    } = *coeffs;
    for ((x, g), xi) in position.iter_mut().zip(gradient).zip(noise) {
        *x = contraction * *x - drift_weight * g + noise_scale * xi;
    }
}

/// One exponential-integrator step. Draws exactly `d` standard normals,
/// in coordinate order, and makes one gradient call.
pub fn almc_step<T: Target + ?Sized>(
    state: &mut ChainState,
    coeffs: &StepCoefficients,
    target: &T,
    rng: &mut RngStream,
) -> Result<()> {
    check_dim(target.dim(), state.position.len())?;
    let d = target.dim();
    let mut gradient = vec![0.0; d];
    let mut noise = vec![0.0; d];
    step_in_place(state, coeffs, target, rng, &mut gradient, &mut noise)
}

fn step_in_place<T: Target + ?Sized>(
    state: &mut ChainState,
    coeffs: &StepCoefficients,
    target: &T,
    rng: &mut RngStream,
    gradient: &mut [f64],
    noise: &mut [f64],
) -> Result<()> {
    rng.fill_standard_normal(noise);
    target.energy_gradient(&state.position, gradient);
    state.oracle_calls += 1;
    ensure_finite_gradient(&state.position, gradient)?;
    apply_update(&mut state.position, gradient, coeffs, noise);
    state.step_index += 1;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlmcOutput {
    pub state: ChainState,
    /// `x_0, ..., x_M` when requested.
    pub trajectory: Option<Vec<Vec<f64>>>,
}

/// An ALMC kernel with its per-step coefficients computed once, so many
/// chains can share it.
#[derive(Clone, Debug)]
pub struct Almc<'a, T: Target + ?Sized> {
    target: &'a T,
    coeffs: Vec<StepCoefficients>,
}

impl<'a, T: Target + ?Sized> Almc<'a, T> {
    pub fn new(target: &'a T, schedule: &AnnealingSchedule, grid: &ThetaGrid) -> Result<Self> {
        Ok(Self::from_coefficients(target, grid.coefficients(schedule)?))
    }

    pub fn from_coefficients(target: &'a T, coeffs: Vec<StepCoefficients>) -> Self {
        Almc { target, coeffs }
    }

    pub fn coefficients(&self) -> &[StepCoefficients] {
        &self.coeffs
    }

    pub fn num_steps(&self) -> usize {
        self.coeffs.len()
    }

    pub fn run(
        &self,
        init: &[f64],
        rng: &mut RngStream,
        record_trajectory: bool,
    ) -> Result<AlmcOutput> {
        check_dim(self.target.dim(), init.len())?;
        if init.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("initial position must be finite"));
        }
        let d = init.len();
        let mut state = ChainState::new(init.to_vec());
        let mut trajectory = record_trajectory.then(|| {
            let mut t = Vec::with_capacity(self.coeffs.len() + 1);
            t.push(init.to_vec());
            t
        });
        let mut gradient = vec![0.0; d];
        let mut noise = vec![0.0; d];
        for (l, coeffs) in self.coeffs.iter().enumerate() {
            step_in_place(&mut state, coeffs, self.target, rng, &mut gradient, &mut noise)
                .map_err(|e| e.at_step(l + 1))?;
            if let Some(t) = trajectory.as_mut() {
                t.push(state.position.clone());
            }
        }
        Ok(AlmcOutput { state, trajectory })
    }
}

/// Runs `M = grid.len()` ALMC steps from `init`.
pub fn run_almc<T: Target + ?Sized>(
    target: &T,
    schedule: &AnnealingSchedule,
    grid: &ThetaGrid,
    rng: &mut RngStream,
    init: &[f64],
    record_trajectory: bool,
) -> Result<AlmcOutput> {
    Almc::new(target, schedule, grid)?.run(init, rng, record_trajectory)
}
