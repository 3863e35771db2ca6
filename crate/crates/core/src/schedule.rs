//! Annealing schedules, time grids and exponential-integrator coefficients.
//!
//! A schedule is a pair `eta: [0,1] -> [0,1]` (nondecreasing, `eta(1) = 1`)
//! and `lambda: [0,1] -> [0,inf)` (nonincreasing, `lambda(1) = 0`). Over an
//! interval `[a, b]` of the annealing parameter, run for diffusion time
//! `T (b - a)`, the linear part of the drift is integrated exactly:
//!
//! ```text
//! Lambda0(b, a) = exp(-T ∫_a^b lambda(u) du)
//! H(b, a)       = T ∫_a^b eta(u) Lambda0(b, u) du
//! Lambda1(b, a) = sqrt(2 T ∫_a^b Lambda0(b, u)^2 du)
//! ```

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, DEFAULT_MAX_DEPTH, DEFAULT_TOL};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Eta {
    Constant(f64),
    /// `eta0 + (1 - eta0) theta`
    Linear { eta0: f64 },
    Custom(ScalarFn),
}

#[derive(Clone)]
pub enum Lambda {
    Zero,
    Constant(f64),
    /// `lambda0 (1 - theta)^gamma`
    Power { lambda0: f64, gamma: f64 },
    Custom(ScalarFn),
}

impl fmt::Debug for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Constant(v) => write!(f, "Eta::Constant({v})"),
            Eta::Linear { eta0 } => write!(f, "Eta::Linear {{ eta0: {eta0} }}"),
            Eta::Custom(_) => f.write_str("Eta::Custom(..)"),
        }
    }
}

impl fmt::Debug for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Zero => f.write_str("Lambda::Zero"),
            Lambda::Constant(v) => write!(f, "Lambda::Constant({v})"),
            Lambda::Power { lambda0, gamma } => {
                write!(f, "Lambda::Power {{ lambda0: {lambda0}, gamma: {gamma} }}")
            }
            Lambda::Custom(_) => f.write_str("Lambda::Custom(..)"),
        }
    }
}

impl Eta {
    pub fn at(&self, theta: f64) -> f64 {
        match self {
            Eta::Constant(v) => *v,
            Eta::Linear { eta0 } => eta0 + (1.0 - eta0) * theta,
            Eta::Custom(f) => f(theta),
        }
    }
}

impl Lambda {
    pub fn at(&self, theta: f64) -> f64 {
        match self {
            Lambda::Zero => 0.0,
            Lambda::Constant(v) => *v,
            Lambda::Power { lambda0, gamma } => lambda0 * (1.0 - theta).powf(*gamma),
            Lambda::Custom(f) => f(theta),
        }
    }

    /// `∫_a^b lambda` in closed form, when the family has one.
    fn closed_integral(&self, a: f64, b: f64) -> Option<f64> {
        match self {
            Lambda::Zero => Some(0.0),
            Lambda::Constant(c) => Some(c * (b - a)),
            Lambda::Power { lambda0, gamma } => {
                let g1 = gamma + 1.0;
                Some(lambda0 * ((1.0 - a).powf(g1) - (1.0 - b).powf(g1)) / g1)
            }
            Lambda::Custom(_) => None,
        }
    }
}

/// How the inner `lambda` integral is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CoefficientMethod {
    /// Closed forms wherever the schedule family allows them.
    #[default]
    Auto,
    /// Adaptive quadrature for every integral, including `∫ lambda`.
    Quadrature,
}

#[derive(Clone, Debug)]
pub struct AnnealingSchedule {
    pub eta: Eta,
    pub lambda: Lambda,
}

impl AnnealingSchedule {
    pub fn new(eta: Eta, lambda: Lambda) -> Self {
        AnnealingSchedule { eta, lambda }
    }

    /// `eta ≡ 1`, `lambda(theta) = lambda0 (1 - theta)^gamma`.
    pub fn power(lambda0: f64, gamma: f64) -> Self {
        Self::new(Eta::Constant(1.0), Lambda::Power { lambda0, gamma })
    }

    /// Power family with `lambda0 = eta0 d beta`, the choice that keeps the
    /// rejection initialiser's expected trial count `O(1)`.
    pub fn for_target(eta0: f64, dim: usize, beta: f64, gamma: f64) -> Self {
        let eta = if eta0 == 1.0 {
            Eta::Constant(1.0)
        } else {
            Eta::Linear { eta0 }
        };
        let lambda0 = if eta0 > 0.0 {
            eta0 * dim as f64 * beta
        } else {
            dim as f64 * beta
        };
        Self::new(eta, Lambda::Power { lambda0, gamma })
    }

    /// Plain LMC: `eta ≡ 1`, `lambda ≡ 0`.
    pub fn lmc() -> Self {
        Self::new(Eta::Constant(1.0), Lambda::Zero)
    }

    /// Stationary Ornstein-Uhlenbeck kernel: `eta ≡ 0`, `lambda ≡ c`.
    pub fn ornstein_uhlenbeck(c: f64) -> Self {
        Self::new(Eta::Constant(0.0), Lambda::Constant(c))
    }

    pub fn eta0(&self) -> f64 {
        self.eta.at(0.0)
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda.at(0.0)
    }

    /// Checks the annealing boundary conditions and monotonicity.
    pub fn validate(&self) -> Result<()> {
        match &self.eta {
            Eta::Constant(v) if *v != 1.0 => {
                return Err(Error::invalid(format!("constant eta must be 1 to anneal, got {v}")))
            }
            Eta::Linear { eta0 } if !(0.0..=1.0).contains(eta0) => {
                return Err(Error::invalid(format!("eta0 must lie in [0, 1], got {eta0}")))
            }
            _ => {}
        }
        match &self.lambda {
            Lambda::Constant(v) if *v != 0.0 => {
                return Err(Error::invalid(format!(
                    "constant lambda must be 0 to anneal, got {v}"
                )))
            }
            Lambda::Power { lambda0, gamma } => {
                if !(*lambda0 >= 0.0 && lambda0.is_finite()) {
                    return Err(Error::invalid(format!("lambda0 must be >= 0, got {lambda0}")));
                }
                if !(*gamma >= 1.0) {
                    return Err(Error::invalid(format!("gamma must be >= 1, got {gamma}")));
                }
            }
            _ => {}
        }
        if (self.eta.at(1.0) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("eta(1) must equal 1"));
        }
        if self.lambda.at(1.0).abs() > 1e-12 {
            return Err(Error::invalid("lambda(1) must equal 0"));
        }
        // monotonicity on a fine grid (exact for the closed families)
        let n = 1000;
        let mut prev_eta = self.eta.at(0.0);
        let mut prev_lambda = self.lambda.at(0.0);
        if !(0.0..=1.0).contains(&prev_eta) {
            return Err(Error::invalid(format!("eta(0) = {prev_eta} outside [0, 1]")));
        }
        for i in 1..=n {
            let theta = i as f64 / n as f64;
            let e = self.eta.at(theta);
            let l = self.lambda.at(theta);
            if e < prev_eta - 1e-12 {
                return Err(Error::invalid(format!("eta decreases near theta = {theta}")));
            }
            if l > prev_lambda + 1e-12 || l < 0.0 {
                return Err(Error::invalid(format!("lambda increases or is negative near theta = {theta}")));
            }
            prev_eta = e;
            prev_lambda = l;
        }
        Ok(())
    }

    /// `pi_0` is strongly log-concave only if `lambda0 > eta0 * beta`.
    pub fn check_pairing(&self, smoothness: f64) -> Result<()> {
        let eta0 = self.eta0();
        let lambda0 = self.lambda0();
        if eta0 > 0.0 && lambda0 <= eta0 * smoothness {
            return Err(Error::invalid(format!(
                "lambda0 = {lambda0} must exceed eta0 * beta = {}",
                eta0 * smoothness
            )));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str::<ScheduleSpec>(json)?.build()
    }
}

/// `∫_a^b lambda(u) du`.
pub fn lambda_integral(schedule: &AnnealingSchedule, a: f64, b: f64) -> Result<f64> {
    lambda_integral_with(schedule, a, b, CoefficientMethod::Auto)
}

pub fn lambda_integral_with(
    schedule: &AnnealingSchedule,
    a: f64,
    b: f64,
    method: CoefficientMethod,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(Error::invalid(format!("interval [{a}, {b}] outside [0, 1]")));
    }
    if a > b {
        return Err(Error::invalid(format!("interval start {a} exceeds end {b}")));
    }
    if a == b {
        return Ok(0.0);
    }
    if method == CoefficientMethod::Auto {
        if let Some(v) = schedule.lambda.closed_integral(a, b) {
            return Ok(v);
        }
    }
    adaptive_simpson(|u| schedule.lambda.at(u), a, b, DEFAULT_TOL, DEFAULT_MAX_DEPTH)
}

/// The triple `(Lambda0, H, Lambda1)` for one interval of the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepCoefficients {
    /// `Lambda0 ∈ (0, 1]`, multiplies the current position.
    pub contraction: f64,
    /// `H >= 0`, multiplies `∇V`.
    pub drift_weight: f64,
    /// `Lambda1 >= 0`, multiplies the standard Gaussian noise.
    pub noise_scale: f64,
}

impl StepCoefficients {
    pub const IDENTITY: StepCoefficients = StepCoefficients {
        contraction: 1.0,
        drift_weight: 0.0,
        noise_scale: 0.0,
    };

    /// The LMC kernel with step `h`.
    pub fn lmc(h: f64) -> Self {
        StepCoefficients {
            contraction: 1.0,
            drift_weight: h,
            noise_scale: (2.0 * h).sqrt(),
        }
    }
}

/// Coefficients for `[a, b]` with total time `total_time`.
pub fn step_coefficients(
    schedule: &AnnealingSchedule,
    total_time: f64,
    a: f64,
    b: f64,
) -> Result<StepCoefficients> {
    step_coefficients_with(schedule, total_time, a, b, CoefficientMethod::Auto)
}

pub fn step_coefficients_with(
    schedule: &AnnealingSchedule,
    total_time: f64,
    a: f64,
    b: f64,
    method: CoefficientMethod,
) -> Result<StepCoefficients> {
    interval_coefficients(schedule, total_time, a, b, total_time * (b - a), method)
}

/// `h` is the diffusion-time length of the interval, `T (b - a)` up to
/// rounding; grids pass their stored step so that constant-family closed forms
/// use it verbatim.
pub(crate) fn interval_coefficients(
    schedule: &AnnealingSchedule,
    total_time: f64,
    a: f64,
    b: f64,
    h: f64,
    method: CoefficientMethod,
) -> Result<StepCoefficients> {
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::invalid(format!("total time must be positive, got {total_time}")));
    }
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return Err(Error::invalid(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(StepCoefficients::IDENTITY);
    }

    if method == CoefficientMethod::Auto {
        if let Eta::Constant(eta) = schedule.eta {
            let rate = match schedule.lambda {
                Lambda::Zero => Some(0.0),
                Lambda::Constant(c) => Some(c),
                _ => None,
            };
            if let Some(c) = rate {
                return Ok(constant_rate_coefficients(eta, c, h));
            }
        }
    }

    let t = total_time;
    let contraction = (-t * lambda_integral_with(schedule, a, b, method)?).exp();

    // first inner failure wins; NaN makes the outer quadrature bail out
    let failure = RefCell::new(None);
    let decay = |u: f64, power: f64| match lambda_integral_with(schedule, u, b, method) {
        Ok(l) => (-power * t * l).exp(),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let drift = adaptive_simpson(
        |u| schedule.eta.at(u) * decay(u, 1.0),
        a,
        b,
        DEFAULT_TOL,
        DEFAULT_MAX_DEPTH,
    );
    let noise = adaptive_simpson(|u| decay(u, 2.0), a, b, DEFAULT_TOL, DEFAULT_MAX_DEPTH);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let drift = drift?;
    let noise = noise?;
    Ok(StepCoefficients {
        contraction,
        drift_weight: t * drift,
        noise_scale: (2.0 * t * noise.max(0.0)).sqrt(),
    })
}

/// Closed forms for `eta ≡ e`, `lambda ≡ c` over a step `h`.
fn constant_rate_coefficients(eta: f64, c: f64, h: f64) -> StepCoefficients {
    if c == 0.0 {
        return StepCoefficients {
            contraction: 1.0,
            drift_weight: eta * h,
            noise_scale: (2.0 * h).sqrt(),
        };
    }
    let ch = c * h;
    StepCoefficients {
        contraction: (-ch).exp(),
        drift_weight: eta * (-(-ch).exp_m1()) / c,
        noise_scale: ((-(-2.0 * ch).exp_m1()) / c).sqrt(),
    }
}

/// `0 = theta_0 < ... < theta_M = 1` together with the total time `T`.
///
/// The per-step lengths `h_l = T (theta_l - theta_{l-1})` are stored as well,
/// as generated, so constant-rate kernels see exactly the requested step.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaGrid {
    total_time: f64,
    thetas: Vec<f64>,
    steps: Vec<f64>,
}

impl ThetaGrid {
    /// A grid from explicit breakpoints.
    pub fn new(total_time: f64, thetas: Vec<f64>) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::invalid(format!("total time must be positive, got {total_time}")));
        }
        if thetas.len() < 2 || thetas[0] != 0.0 || *thetas.last().unwrap() != 1.0 {
            return Err(Error::invalid("thetas must start at 0 and end at 1"));
        }
        let steps: Vec<f64> = thetas.windows(2).map(|w| total_time * (w[1] - w[0])).collect();
        if thetas.windows(2).any(|w| w[1] <= w[0]) || steps.iter().any(|&h| h <= 0.0) {
            return Err(Error::invalid("thetas must be strictly increasing"));
        }
        Ok(ThetaGrid {
            total_time,
            thetas,
            steps,
        })
    }

    /// `M` equal steps of length `total_time / M`. `M = 0` gives the empty
    /// grid, on which a chain does not move.
    pub fn uniform(m: usize, total_time: f64) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::invalid(format!("total time must be positive, got {total_time}")));
        }
        if m == 0 {
            return Ok(ThetaGrid {
                total_time,
                thetas: vec![0.0],
                steps: Vec::new(),
            });
        }
        let mut thetas: Vec<f64> = (0..=m).map(|l| l as f64 / m as f64).collect();
        thetas[m] = 1.0;
        Ok(ThetaGrid {
            total_time,
            thetas,
            steps: vec![total_time / m as f64; m],
        })
    }

    /// Grid with prescribed diffusion-time steps: `T = Σ s_l`,
    /// `theta_l = (Σ_{j<=l} s_j) / T`, final theta pinned to 1.
    pub fn from_steps(steps: Vec<f64>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::invalid("need at least one step"));
        }
        if steps.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("step sizes must be positive"));
        }
        let total_time: f64 = steps.iter().sum();
        let mut thetas = Vec::with_capacity(steps.len() + 1);
        thetas.push(0.0);
        let mut acc = 0.0;
        for s in &steps {
            acc += s;
            thetas.push(acc / total_time);
        }
        *thetas.last_mut().unwrap() = 1.0;
        if thetas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("steps too small to resolve in theta"));
        }
        Ok(ThetaGrid {
            total_time,
            thetas,
            steps,
        })
    }

    /// Steps rise then fall quadratically between `s_min` and `s_max`:
    /// `s_l = s_max - (s_max - s_min) (l - M/2)^2 / (M^2/4)` for `l = 1..=M`.
    pub fn from_quadratic_steps(m: usize, s_min: f64, s_max: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("quadratic grid needs M >= 1"));
        }
        if !(s_min > 0.0 && s_min <= s_max && s_max.is_finite()) {
            return Err(Error::invalid(format!(
                "need 0 < s_min <= s_max, got s_min = {s_min}, s_max = {s_max}"
            )));
        }
        Self::from_steps(quadratic_steps(m, s_min, s_max))
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// Number of steps `M`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Coefficients for every interval, in order.
    pub fn coefficients(&self, schedule: &AnnealingSchedule) -> Result<Vec<StepCoefficients>> {
        self.coefficients_with(schedule, CoefficientMethod::Auto)
    }

    pub fn coefficients_with(
        &self,
        schedule: &AnnealingSchedule,
        method: CoefficientMethod,
    ) -> Result<Vec<StepCoefficients>> {
        self.thetas
            .windows(2)
            .zip(&self.steps)
            .enumerate()
            .map(|(l, (w, &h))| {
                interval_coefficients(schedule, self.total_time, w[0], w[1], h, method)
                    .map_err(|e| e.at_step(l + 1))
            })
            .collect()
    }
}

pub(crate) fn quadratic_steps(m: usize, s_min: f64, s_max: f64) -> Vec<f64> {
    let mf = m as f64;
    let curvature = (s_max - s_min) / (mf * mf / 4.0);
    (1..=m)
        .map(|l| {
            let off = l as f64 - mf / 2.0;
            s_max - curvature * off * off
        })
        .collect()
}

/// Advisory `(T, M)` from an action estimate and accuracy target:
/// `T = A / (4 eps^2)`, `M = ceil(d beta^2 A^2 / eps^6)`, with every hidden
/// constant set to 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plan {
    pub total_time: f64,
    pub steps: u64,
}

pub fn plan_parameters(action: f64, epsilon: f64, dim: usize, beta: f64) -> Result<Plan> {
    for (name, v) in [("action", action), ("epsilon", epsilon), ("beta", beta)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let total_time = action / (4.0 * epsilon * epsilon);
    let raw = dim as f64 * beta * beta * action * action / epsilon.powi(6);
    // absorb rounding noise before taking the ceiling
    let steps = (raw * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    Ok(Plan { total_time, steps })
}

// ---- JSON ----

/// `{"eta":"const1","lambda":{"family":"power","lambda0":5.0,"gamma":10}}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub eta: EtaSpec,
    pub lambda: LambdaSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    /// `"const1"`, `"const0"`, or `"const<value>"`.
    Named(String),
    Family(EtaFamily),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum EtaFamily {
    Const { value: f64 },
    Linear { eta0: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    /// `"zero"`
    Named(String),
    Family(LambdaFamily),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum LambdaFamily {
    Power { lambda0: f64, gamma: f64 },
    Const { value: f64 },
    Zero,
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<AnnealingSchedule> {
        let eta = match &self.eta {
            EtaSpec::Named(name) => {
                let value = name
                    .strip_prefix("const")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Schema(format!("unknown eta schedule {name:?}")))?;
                Eta::Constant(value)
            }
            EtaSpec::Family(EtaFamily::Const { value }) => Eta::Constant(*value),
            EtaSpec::Family(EtaFamily::Linear { eta0 }) => Eta::Linear { eta0: *eta0 },
        };
        let lambda = match &self.lambda {
            LambdaSpec::Named(name) if name == "zero" => Lambda::Zero,
            LambdaSpec::Named(name) => {
                return Err(Error::Schema(format!("unknown lambda schedule {name:?}")))
            }
            LambdaSpec::Family(LambdaFamily::Power { lambda0, gamma }) => Lambda::Power {
                lambda0: *lambda0,
                gamma: *gamma,
            },
            LambdaSpec::Family(LambdaFamily::Const { value }) => Lambda::Constant(*value),
            LambdaSpec::Family(LambdaFamily::Zero) => Lambda::Zero,
        };
        if let Eta::Constant(v) | Eta::Linear { eta0: v } = eta {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("eta value {v} outside [0, 1]")));
            }
        }
        Ok(AnnealingSchedule::new(eta, lambda))
    }
}
