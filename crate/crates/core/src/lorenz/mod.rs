//! The Lorenz system
//!
//! ```text
//! Ẋ = σ(Y − X),  Ẏ = −XZ + ρX − Y,  Ż = XY − βZ
//! ```
//!
//! rewritten as two second-order equations in `X¹ = X`, `X² = Z`
//! (`Y¹ = Ẋ`, `Y² = Ż`) of the form `ẍⁱ + 2Gⁱ = 0`, with `Y` recovered as
//! `X¹ + Y¹/σ`.

pub mod closed_form;
mod equilibria;

use serde::Serialize;
use thiserror::Error;

use crate::kcc::{Jet, SodeSystem};
use crate::taylor::Scalar;
use crate::tensor::Matrix;

pub use equilibria::{
    equilibria, equilibrium_jet, equilibrium_p_closed_form, jacobi_theorem, linear_stability_s0, rho_crit,
    EquilibriumAnalysis, EquilibriumKind, JacobiTheorem, LinearStability,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LorenzError {
    #[error("sigma must be non-zero")]
    ZeroSigma,
    #[error("parameter {name} is not finite: {value}")]
    NonFiniteParam { name: &'static str, value: f64 },
    #[error("rho = {rho} <= 1: the equilibria S+ and S- do not exist")]
    NoNontrivialEquilibria { rho: f64 },
    #[error("beta*(rho - 1) = {0} is negative: S+ and S- are not real")]
    NegativeRadicand(f64),
}

/// `(σ, ρ, β)`. Construction rejects `σ = 0` and non-finite values; a
/// non-positive `σ` or `β` is accepted with a warning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorenzParams {
    sigma: f64,
    rho: f64,
    beta: f64,
}

impl LorenzParams {
    pub fn new(sigma: f64, rho: f64, beta: f64) -> Result<Self, LorenzError> {
        for (name, value) in [("sigma", sigma), ("rho", rho), ("beta", beta)] {
            if !value.is_finite() {
                return Err(LorenzError::NonFiniteParam { name, value });
            }
        }
        if sigma == 0.0 {
            return Err(LorenzError::ZeroSigma);
        }
        if sigma < 0.0 || beta <= 0.0 {
            log::warn!("non-physical Lorenz parameters sigma = {sigma}, beta = {beta}");
        }
        Ok(Self { sigma, rho, beta })
    }

    /// `σ = 10, ρ = 28, β = 8/3`.
    pub fn classic() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `(1 + σ + β)/σ − 2`, the coefficient of `X¹Y¹` in `2G²`.
    pub(crate) fn c(&self) -> f64 {
        (1.0 + self.sigma + self.beta) / self.sigma - 2.0
    }
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self::classic()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorenzState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl LorenzState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

/// `(X¹, X², Y¹, Y²) = (X, Z, Ẋ, Ż)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedState {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl ReducedState {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        Self { x1, x2, y1, y2 }
    }

    pub fn jet(&self) -> Jet {
        Jet::autonomous(vec![self.x1, self.x2], vec![self.y1, self.y2])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    pub fn from_array([x1, x2, y1, y2]: [f64; 4]) -> Self {
        Self { x1, x2, y1, y2 }
    }
}

/// `(σ(Y − X), −XZ + ρX − Y, XY − βZ)`.
pub fn vector_field(p: &LorenzParams, s: &LorenzState) -> [f64; 3] {
    [
        p.sigma * (s.y - s.x),
        -s.x * s.z + p.rho * s.x - s.y,
        s.x * s.y - p.beta * s.z,
    ]
}

/// Generic form of `(G¹, G²)`, shared by the `f64` API and the KCC engine.
fn g_generic<S: Scalar>(p: &LorenzParams, x1: &S, x2: &S, y1: &S) -> [S; 2] {
    let (sigma, rho, beta) = (p.sigma, p.rho, p.beta);
    let g1 = (y1.clone() * (1.0 + sigma) + x1.clone() * x2.clone() * sigma + x1.clone() * (sigma * (1.0 - rho))) * 0.5;
    let x1_sq = x1.clone() * x1.clone();
    let g2 = (x1.clone() * y1.clone() * p.c() - y1.clone() * y1.clone() / sigma
        + x1_sq.clone() * (1.0 - rho + beta)
        + x1_sq * x2.clone()
        - x2.clone() * (beta * beta))
        * 0.5;
    [g1, g2]
}

/// `(G¹, G²)` of the reduced system. `G` does not depend on `Y²`.
pub fn g_functions(p: &LorenzParams, r: &ReducedState) -> [f64; 2] {
    g_generic(p, &r.x1, &r.x2, &r.y1)
}

pub fn reduce(p: &LorenzParams, s: &LorenzState) -> ReducedState {
    let [xd, _, zd] = vector_field(p, s);
    ReducedState::new(s.x, s.z, xd, zd)
}

/// The original `Y = X¹ + Y¹/σ`.
pub fn recover_y(p: &LorenzParams, r: &ReducedState) -> f64 {
    r.x1 + r.y1 / p.sigma
}

/// Inverse of [`reduce`].
pub fn unreduce(p: &LorenzParams, r: &ReducedState) -> LorenzState {
    LorenzState::new(r.x1, recover_y(p, r), r.x2)
}

/// The Lorenz system as a two-dimensional [`SodeSystem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzSystem {
    params: LorenzParams,
}

impl LorenzSystem {
    pub fn new(params: LorenzParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &LorenzParams {
        &self.params
    }
}

impl SodeSystem for LorenzSystem {
    fn dimension(&self) -> usize {
        2
    }

    fn g<S: Scalar>(&self, x: &[S], y: &[S], _t: &S) -> Vec<S> {
        g_generic(&self.params, &x[0], &x[1], &y[0]).to_vec()
    }

    fn analytic_dg_dy(&self, jet: &Jet) -> Option<Matrix> {
        Some(closed_form::nonlinear_connection(&self.params, jet.x[0], jet.y[0]))
    }

    fn analytic_dg_dx(&self, jet: &Jet) -> Option<Matrix> {
        let p = &self.params;
        let (x1, x2, y1) = (jet.x[0], jet.x[1], jet.y[0]);
        Some(Matrix::from_rows([
            [0.5 * p.sigma * (x2 + 1.0 - p.rho), 0.5 * p.sigma * x1],
            [
                0.5 * p.c() * y1 + (1.0 - p.rho + p.beta) * x1 + x1 * x2,
                0.5 * (x1 * x1 - p.beta * p.beta),
            ],
        ]))
    }
}
