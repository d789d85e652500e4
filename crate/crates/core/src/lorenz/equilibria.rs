//! Equilibria of the reduced Lorenz system and their Jacobi stability.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{LorenzError, LorenzParams};
use crate::kcc::{spectral_summary_2x2, Jet, SpectralSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumKind {
    #[serde(rename = "S0")]
    S0,
    #[serde(rename = "S+")]
    SPlus,
    #[serde(rename = "S-")]
    SMinus,
}

impl EquilibriumKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::S0 => "S0",
            Self::SPlus => "S+",
            Self::SMinus => "S-",
        }
    }
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumAnalysis {
    pub kind: EquilibriumKind,
    pub x1_star: f64,
    pub x2_star: f64,
    /// `p_matrix[i][j] = Pⁱⱼ` from the closed forms.
    pub p_matrix: [[f64; 2]; 2],
    pub spectrum: SpectralSummary,
    /// Trace-type stability condition (must be negative). For `S±` this is the
    /// theorem's first expression, for `S0` it is `tr P(S0)`.
    pub theorem_condition1: f64,
    /// Determinant-type stability condition (must be positive).
    pub theorem_condition2: f64,
    /// Trace and determinant of the linearization; only defined for `S0`.
    pub linear_tau: Option<f64>,
    pub linear_delta: Option<f64>,
}

/// `X¹ = ±√(β(ρ−1))`, `X² = ρ − 1`.
fn nontrivial_x1(p: &LorenzParams) -> Result<f64, LorenzError> {
    if p.rho <= 1.0 {
        return Err(LorenzError::NoNontrivialEquilibria { rho: p.rho });
    }
    let radicand = p.beta * (p.rho - 1.0);
    if radicand < 0.0 {
        return Err(LorenzError::NegativeRadicand(radicand));
    }
    Ok(radicand.sqrt())
}

fn coordinates(p: &LorenzParams, kind: EquilibriumKind) -> Result<(f64, f64), LorenzError> {
    Ok(match kind {
        EquilibriumKind::S0 => (0.0, 0.0),
        EquilibriumKind::SPlus => (nontrivial_x1(p)?, p.rho - 1.0),
        EquilibriumKind::SMinus => (-nontrivial_x1(p)?, p.rho - 1.0),
    })
}

/// The phase-space point of an equilibrium, with zero velocity.
pub fn equilibrium_jet(p: &LorenzParams, kind: EquilibriumKind) -> Result<Jet, LorenzError> {
    let (x1, x2) = coordinates(p, kind)?;
    Ok(Jet::autonomous(vec![x1, x2], vec![0.0, 0.0]))
}

/// `P` at an equilibrium from the simplified closed forms:
/// `S0`: `diag(σ(ρ−1) + (1+σ)²/4, β²)`;
/// `S±`: `P¹₁ = (1+σ)²/4`, `P¹₂ = −σX¹`, `P²₁ = X¹[β(1−7σ) + 1 − σ²]/(4σ)`,
/// `P²₂ = β² − β(ρ−1)`.
pub fn equilibrium_p_closed_form(p: &LorenzParams, kind: EquilibriumKind) -> Result<[[f64; 2]; 2], LorenzError> {
    let (sigma, rho, beta) = (p.sigma, p.rho, p.beta);
    Ok(match kind {
        EquilibriumKind::S0 => [
            [-(1.0 - rho) * sigma + 0.25 * (1.0 + sigma).powi(2), 0.0],
            [0.0, beta * beta],
        ],
        EquilibriumKind::SPlus | EquilibriumKind::SMinus => {
            let (x1, _) = coordinates(p, kind)?;
            [
                [0.25 * (1.0 + sigma).powi(2), -sigma * x1],
                [
                    x1 * (beta * (1.0 - 7.0 * sigma) + 1.0 - sigma * sigma) / (4.0 * sigma),
                    beta * beta - beta * (rho - 1.0),
                ],
            ]
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiTheorem {
    /// `β(β − ρ + 1) + (σ+1)²/4`; equals `tr P(S±)`.
    pub condition1: f64,
    /// `(β/4){β[−7ρσ + ρ + σ(σ+9)] − 2σ(ρ−1)(σ+1)}`; equals `det P(S±)`.
    pub condition2: f64,
    /// `condition1 < 0` and `condition2 > 0`.
    pub stable: bool,
}

/// Jacobi-stability conditions for the pair `S±`.
pub fn jacobi_theorem(p: &LorenzParams) -> Result<JacobiTheorem, LorenzError> {
    if p.rho <= 1.0 {
        return Err(LorenzError::NoNontrivialEquilibria { rho: p.rho });
    }
    let (sigma, rho, beta) = (p.sigma, p.rho, p.beta);
    let condition1 = beta * (beta - rho + 1.0) + 0.25 * (sigma + 1.0).powi(2);
    let condition2 = 0.25
        * beta
        * (beta * (-7.0 * rho * sigma + rho + sigma * (sigma + 9.0)) - 2.0 * sigma * (rho - 1.0) * (sigma + 1.0));
    Ok(JacobiTheorem {
        condition1,
        condition2,
        stable: condition1 < 0.0 && condition2 > 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearStability {
    pub tau: f64,
    pub delta: f64,
    /// The larger root of `λ² − τλ + Δ`.
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    /// `(τ² − 4Δ)/4`, which coincides with `λ₊` of `P(S0)`.
    pub kcc_lambda_plus: f64,
}

/// Linearization of `Ẋ = σ(Y−X)`, `Ẏ = ρX − Y` at the origin, `A = [[−σ, σ], [ρ, −1]]`.
pub fn linear_stability_s0(p: &LorenzParams) -> LinearStability {
    let a = [[-p.sigma, p.sigma], [p.rho, -1.0]];
    let s = spectral_summary_2x2(a);
    let tau = s.trace_condition;
    let delta = s.det_condition;
    LinearStability {
        tau,
        delta,
        lambda1: s.lambda_plus,
        lambda2: s.lambda_minus,
        kcc_lambda_plus: 0.25 * (tau * tau - 4.0 * delta),
    }
}

/// `σ(σ + β + 3)/(σ − β − 1)`, the classical onset of chaos; `None` when
/// `σ ≤ β + 1`, where no such threshold exists.
pub fn rho_crit(p: &LorenzParams) -> Option<f64> {
    let denom = p.sigma - p.beta - 1.0;
    (denom > 0.0).then(|| p.sigma * (p.sigma + p.beta + 3.0) / denom)
}

fn analyse(p: &LorenzParams, kind: EquilibriumKind) -> Result<EquilibriumAnalysis, LorenzError> {
    let (x1_star, x2_star) = coordinates(p, kind)?;
    let p_matrix = equilibrium_p_closed_form(p, kind)?;
    let spectrum = spectral_summary_2x2(p_matrix);
    let (theorem_condition1, theorem_condition2, linear_tau, linear_delta) = match kind {
        EquilibriumKind::S0 => {
            let lin = linear_stability_s0(p);
            (
                spectrum.trace_condition,
                spectrum.det_condition,
                Some(lin.tau),
                Some(lin.delta),
            )
        }
        _ => {
            let th = jacobi_theorem(p)?;
            (th.condition1, th.condition2, None, None)
        }
    };
    Ok(EquilibriumAnalysis {
        kind,
        x1_star,
        x2_star,
        p_matrix,
        spectrum,
        theorem_condition1,
        theorem_condition2,
        linear_tau,
        linear_delta,
    })
}

/// `[S0]` for `ρ ≤ 1`, `[S0, S+, S-]` otherwise. `S0` is always included.
pub fn equilibria(p: &LorenzParams) -> Result<Vec<EquilibriumAnalysis>, LorenzError> {
    let mut out = vec![analyse(p, EquilibriumKind::S0)?];
    if p.rho > 1.0 {
        out.push(analyse(p, EquilibriumKind::SPlus)?);
        out.push(analyse(p, EquilibriumKind::SMinus)?);
    }
    Ok(out)
}
