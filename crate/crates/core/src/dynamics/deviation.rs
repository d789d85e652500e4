//! Deviation vectors `ξⁱ` of the reduced Lorenz system.

use serde::Serialize;

use super::integrator::{integrate, IntegratorConfig};
use super::DynamicsError;
use crate::kcc::Kcc;
use crate::lorenz::{equilibrium_jet, reduce, vector_field, EquilibriumKind, LorenzParams, LorenzState, LorenzSystem};
use crate::tensor::Matrix;

/// Where the deviation equations take their coefficients from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// Coefficients frozen at an equilibrium.
    S0,
    SPlus,
    SMinus,
    /// Coefficients evaluated along the trajectory starting at this state.
    Trajectory(LorenzState),
}

impl Anchor {
    fn equilibrium(self) -> Option<EquilibriumKind> {
        match self {
            Self::S0 => Some(EquilibriumKind::S0),
            Self::SPlus => Some(EquilibriumKind::SPlus),
            Self::SMinus => Some(EquilibriumKind::SMinus),
            Self::Trajectory(_) => None,
        }
    }
}

/// `ξ(0)` and `ξ̇(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationIc {
    pub xi: [f64; 2],
    pub xi_dot: [f64; 2],
}

impl DeviationIc {
    /// `ξ(0) = 0`, `ξ̇(0) = (ξ₁₀, ξ₂₀)`.
    pub fn from_velocity(xi10: f64, xi20: f64) -> Self {
        Self {
            xi: [0.0, 0.0],
            xi_dot: [xi10, xi20],
        }
    }

    /// Per-component reference scale for the exponents: `ξ̇ⁱ(0)`, or `ξⁱ(0)`
    /// when the initial velocity component is zero.
    pub fn reference(&self) -> [f64; 2] {
        std::array::from_fn(|i| {
            if self.xi_dot[i] != 0.0 {
                self.xi_dot[i]
            } else {
                self.xi[i]
            }
        })
    }

    fn norm(&self) -> f64 {
        self.xi.iter().chain(&self.xi_dot).map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Sampled deviation vector with derived series.
///
/// Exponents are `None` where the logarithm is undefined (`t = 0`, or a
/// component whose ratio to its reference is not positive). `kappa0` is
/// `None` where the deviation curve is momentarily at rest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationTrace {
    pub reference: [f64; 2],
    pub times: Vec<f64>,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub xi1_dot: Vec<f64>,
    pub xi2_dot: Vec<f64>,
    pub xi1_ddot: Vec<f64>,
    pub xi2_ddot: Vec<f64>,
    pub xi_norm: Vec<f64>,
    pub delta1: Vec<Option<f64>>,
    pub delta2: Vec<Option<f64>>,
    pub delta: Vec<Option<f64>>,
    pub kappa0: Vec<Option<f64>>,
}

impl DeviationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, xi: [f64; 2], xi_dot: [f64; 2], xi_ddot: [f64; 2]) {
        let norm = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        let [r1, r2] = self.reference;
        let log_rate = |ratio: f64| (t > 0.0 && ratio > 0.0 && ratio.is_finite()).then(|| ratio.ln() / t);
        self.times.push(t);
        self.xi1.push(xi[0]);
        self.xi2.push(xi[1]);
        self.xi1_dot.push(xi_dot[0]);
        self.xi2_dot.push(xi_dot[1]);
        self.xi1_ddot.push(xi_ddot[0]);
        self.xi2_ddot.push(xi_ddot[1]);
        self.xi_norm.push(norm);
        self.delta1.push(log_rate(xi[0] / r1));
        self.delta2.push(log_rate(xi[1] / r2));
        self.delta.push(log_rate(norm / r1.abs()));
        self.kappa0.push(kappa0(xi_dot, xi_ddot));
    }
}

/// Signed curvature `(ξ̇¹ξ̈² − ξ̈¹ξ̇²)/|ξ̇|³` of the plane curve `(ξ¹, ξ²)`.
///
/// `None` when the speed is below `1e-300`.
pub fn kappa0(xi_dot: [f64; 2], xi_ddot: [f64; 2]) -> Option<f64> {
    let speed = xi_dot[0].hypot(xi_dot[1]);
    if speed.is_nan() || speed < 1e-300 {
        return None;
    }
    let (u1, u2) = (xi_dot[0] / speed, xi_dot[1] / speed);
    Some((u1 * xi_ddot[1] - xi_ddot[0] * u2) / speed / speed)
}

/// Finite-time exponents at the last sample of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub t: f64,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub delta: Option<f64>,
}

pub fn instability_exponents(trace: &DeviationTrace) -> Option<ExponentEstimate> {
    let k = trace.len().checked_sub(1)?;
    Some(ExponentEstimate {
        t: trace.times[k],
        delta1: trace.delta1[k],
        delta2: trace.delta2[k],
        delta: trace.delta[k],
    })
}

fn frozen_rhs(n: &Matrix, dg_dx: &Matrix, xi: [f64; 2], xi_dot: [f64; 2]) -> [f64; 2] {
    std::array::from_fn(|i| {
        (0..2).fold(0.0, |acc, j| {
            acc - 2.0 * n[[i, j]] * xi_dot[j] - 2.0 * dg_dx[[i, j]] * xi[j]
        })
    })
}

/// Integrates `ξ̈ = −2Nξ̇ − 2(∂G/∂x)ξ`, with `ξ̈` at each sample taken from the
/// equation itself.
pub fn integrate_deviation(
    p: &LorenzParams,
    anchor: Anchor,
    ic: DeviationIc,
    cfg: &IntegratorConfig,
) -> Result<DeviationTrace, DynamicsError> {
    let system = LorenzSystem::new(*p);
    let kcc = Kcc::new(&system);
    let scale = match ic.norm() {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let mut trace = DeviationTrace {
        reference: ic.reference(),
        times: Vec::new(),
        xi1: Vec::new(),
        xi2: Vec::new(),
        xi1_dot: Vec::new(),
        xi2_dot: Vec::new(),
        xi1_ddot: Vec::new(),
        xi2_ddot: Vec::new(),
        xi_norm: Vec::new(),
        delta1: Vec::new(),
        delta2: Vec::new(),
        delta: Vec::new(),
        kappa0: Vec::new(),
    };
    let y0 = [ic.xi[0], ic.xi[1], ic.xi_dot[0], ic.xi_dot[1]];

    if let Some(kind) = anchor.equilibrium() {
        let jet = equilibrium_jet(p, kind)?;
        let c = kcc.connection(&jet)?;
        let rhs = |y: &[f64; 4]| frozen_rhs(&c.n_coeffs, &c.dg_dx, [y[0], y[1]], [y[2], y[3]]);
        let sol = integrate(
            |_t, y: &[f64; 4]| {
                let a = rhs(y);
                Ok([y[2], y[3], a[0], a[1]])
            },
            y0,
            cfg,
            [scale; 4],
        )?;
        for (t, y) in sol.times.iter().zip(&sol.states) {
            trace.push(*t, [y[0], y[1]], [y[2], y[3]], rhs(y));
        }
    } else if let Anchor::Trajectory(start) = anchor {
        let rhs = |y: &[f64; 7]| -> Result<[f64; 2], DynamicsError> {
            let jet = reduce(p, &LorenzState::new(y[0], y[1], y[2])).jet();
            let a = kcc.deviation_ode_rhs(&jet, &y[3..5], &y[5..7])?;
            Ok([a[0], a[1]])
        };
        let mut y0_full = [0.0; 7];
        y0_full[..3].copy_from_slice(&start.to_array());
        y0_full[3..].copy_from_slice(&y0);
        let sol = integrate(
            |_t, y: &[f64; 7]| {
                let f = vector_field(p, &LorenzState::new(y[0], y[1], y[2]));
                let a = rhs(y)?;
                Ok([f[0], f[1], f[2], y[5], y[6], a[0], a[1]])
            },
            y0_full,
            cfg,
            [1.0, 1.0, 1.0, scale, scale, scale, scale],
        )?;
        for (t, y) in sol.times.iter().zip(&sol.states) {
            trace.push(*t, [y[3], y[4]], [y[5], y[6]], rhs(y)?);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_initial_data_stays_zero() {
        let p = LorenzParams::classic();
        let cfg = IntegratorConfig::adaptive(1e-10, 1.0, 0.1);
        for anchor in [
            Anchor::S0,
            Anchor::SPlus,
            Anchor::Trajectory(LorenzState::new(1.0, 5.0, 10.0)),
        ] {
            let tr = integrate_deviation(&p, anchor, DeviationIc::from_velocity(0.0, 0.0), &cfg).unwrap();
            assert!(tr.xi1.iter().chain(&tr.xi2).all(|v| *v == 0.0));
            assert!(tr.kappa0.iter().all(Option::is_none));
        }
    }

    #[test]
    fn kappa0_of_straight_and_circular_motion() {
        assert_eq!(kappa0([1.0, 0.0], [3.0, 0.0]), Some(0.0));
        // unit circle traversed counter-clockwise
        assert_eq!(kappa0([0.0, 1.0], [-1.0, 0.0]), Some(1.0));
        assert_eq!(kappa0([0.0, 0.0], [1.0, 1.0]), None);
    }

    #[test]
    fn s_plus_needs_rho_above_one() {
        let p = LorenzParams::new(10.0, 0.5, 8.0 / 3.0).unwrap();
        let r = integrate_deviation(
            &p,
            Anchor::SMinus,
            DeviationIc::from_velocity(1e-10, 1e-9),
            &IntegratorConfig::adaptive(1e-10, 1.0, 0.1),
        );
        assert!(matches!(r, Err(DynamicsError::Lorenz(_))));
    }

    #[test]
    fn exponents_are_undefined_at_start_and_after_sign_change() {
        let p = LorenzParams::classic();
        let tr = integrate_deviation(
            &p,
            Anchor::S0,
            DeviationIc::from_velocity(-1e-9, 1e-8),
            &IntegratorConfig::adaptive(1e-10, 1.0, 0.5),
        )
        .unwrap();
        assert_eq!(tr.delta1[0], None);
        // ξ¹ keeps the sign of ξ₁₀, so the ratio stays positive
        assert!(tr.delta1[2].is_some());
        let e = instability_exponents(&tr).unwrap();
        assert_eq!(e.t, 1.0);
        assert!(e.delta2.unwrap() > 0.0);
    }
}
