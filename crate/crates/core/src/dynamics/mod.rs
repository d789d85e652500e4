//! Trajectories of the Lorenz system, deviation vectors, instability
//! exponents and the curvature of the deviation curve.

mod deviation;
mod integrator;
mod s0;

use serde::Serialize;
use thiserror::Error;
use twofloat::TwoFloat;

use crate::kcc::KccError;
use crate::lorenz::{closed_form, reduce, vector_field, LorenzError, LorenzParams, LorenzState, ReducedState};

pub use deviation::{
    instability_exponents, integrate_deviation, kappa0, Anchor, DeviationIc, DeviationTrace, ExponentEstimate,
};
pub use integrator::{integrate, IntegratorConfig, Method, OdeScalar, Solution};
pub use s0::{find_t0, t0_approximation, S0DeviationSolution, T0Report, DEFAULT_T0_SEARCH_MAX};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("no sign change of kappa0 on (0, {t_max}]; sampled signs: {signs}")]
    NoRoot { t_max: f64, signs: String },
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Lorenz(#[from] LorenzError),
    #[error(transparent)]
    Kcc(#[from] KccError),
}

impl DynamicsError {
    /// Whether the failure comes from the numerics rather than from the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Self::StepSizeUnderflow { .. } | Self::NonFinite { .. } | Self::NoRoot { .. } | Self::Kcc(_)
        )
    }
}

/// Sampled Lorenz trajectory with the reduced coordinates alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<LorenzState>,
    pub reduced: Vec<ReducedState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub fn integrate_lorenz(
    p: &LorenzParams,
    s0: LorenzState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    let sol = integrate(
        |_t, y: &[f64; 3]| Ok(vector_field(p, &LorenzState::from_array(*y))),
        s0.to_array(),
        cfg,
        [1.0; 3],
    )?;
    let states: Vec<LorenzState> = sol.states.iter().map(|y| LorenzState::from_array(*y)).collect();
    let reduced = states.iter().map(|s| reduce(p, s)).collect();
    Ok(Trajectory {
        times: sol.times,
        states,
        reduced,
    })
}

/// Integrates the second-order form `ẍⁱ = −2Gⁱ` from the reduced image of `s0`.
///
/// The first-order flow is an invariant manifold `Y² = X¹X³ − βX²` of the
/// four-dimensional reduced flow, and it repels with rate `β`: an
/// off-manifold error grows like `e^{βt}` (about `4·10¹¹` at `t = 10` for
/// `β = 8/3`). Rounding the initial state or the coefficients to `f64` is
/// already enough to leave the manifold visibly. So the starting point, the
/// coefficients and the state are all carried in double-double and rounded
/// to `f64` only at the samples.
pub fn integrate_reduced(
    p: &LorenzParams,
    s0: LorenzState,
    cfg: &IntegratorConfig,
) -> Result<(Vec<f64>, Vec<ReducedState>), DynamicsError> {
    let rhs = ReducedRhs::new(p);
    let sol = integrate(|_t, y: &[TwoFloat; 4]| Ok(rhs.eval(y)), rhs.reduce(&s0), cfg, [1.0; 4])?;
    let states = sol
        .states
        .iter()
        .map(|y| ReducedState::from_array(y.map(OdeScalar::to_f64)))
        .collect();
    Ok((sol.times, states))
}

/// `(Y¹, Y², −2G¹, −2G²)` with every coefficient derived in double-double.
///
/// Divisions are by the `f64` value of `σ` only: `TwoFloat / TwoFloat` in
/// twofloat 0.8 is accurate to about one `f64` ulp, which is exactly the
/// error this path exists to avoid.
struct ReducedRhs {
    sigma_f64: f64,
    sigma: TwoFloat,
    beta: TwoFloat,
    one_plus_sigma: TwoFloat,
    sigma_one_minus_rho: TwoFloat,
    c: TwoFloat,
    one_minus_rho_plus_beta: TwoFloat,
    beta_sq: TwoFloat,
}

impl ReducedRhs {
    fn new(p: &LorenzParams) -> Self {
        let (sigma, rho, beta) = (
            TwoFloat::from(p.sigma()),
            TwoFloat::from(p.rho()),
            TwoFloat::from(p.beta()),
        );
        let one = TwoFloat::from(1.0);
        Self {
            sigma_f64: p.sigma(),
            sigma,
            beta,
            one_plus_sigma: one + sigma,
            sigma_one_minus_rho: sigma * (one - rho),
            c: (one + sigma + beta) / p.sigma() - 2.0,
            one_minus_rho_plus_beta: one - rho + beta,
            beta_sq: beta * beta,
        }
    }

    fn reduce(&self, s: &LorenzState) -> [TwoFloat; 4] {
        let (x, y, z) = (TwoFloat::from(s.x), TwoFloat::from(s.y), TwoFloat::from(s.z));
        [x, z, self.sigma * (y - x), x * y - self.beta * z]
    }

    fn eval(&self, v: &[TwoFloat; 4]) -> [TwoFloat; 4] {
        let [x1, x2, y1, y2] = *v;
        let x1_sq = x1 * x1;
        let g1 = self.one_plus_sigma * y1 + self.sigma * x1 * x2 + self.sigma_one_minus_rho * x1;
        let g2 = self.c * x1 * y1 - y1 * y1 / self.sigma_f64 + self.one_minus_rho_plus_beta * x1_sq + x1_sq * x2
            - self.beta_sq * x2;
        [y1, y2, -g1, -g2]
    }
}

/// `Pⁱⱼ` from the closed forms at every sample, as `[[P¹₁, P¹₂], [P²₁, P²₂]]`.
pub fn p_along_trajectory(p: &LorenzParams, traj: &Trajectory) -> Vec<[[f64; 2]; 2]> {
    traj.reduced
        .iter()
        .map(|r| closed_form::deviation_curvature(p, r.x1, r.x2, r.y1).to_array2())
        .collect()
}
