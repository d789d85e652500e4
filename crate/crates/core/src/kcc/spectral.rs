//! Eigenvalues of a 2×2 deviation curvature tensor and the Jacobi-stability test.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{KccError, Result};
use crate::tensor::Matrix;

/// Spectrum of `P` together with the stability classification.
///
/// `λ₊` is the larger eigenvalue when both are real, and the one with positive
/// imaginary part otherwise. `κ = tr P / 2` and `θ = (λ₊ − λ₋)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub kappa: f64,
    pub theta: Complex64,
    /// `tr P`, which must be negative for stability.
    pub trace_condition: f64,
    /// `det P`, which must be positive for stability.
    pub det_condition: f64,
    /// Both eigenvalues have strictly negative real part.
    pub jacobi_stable: bool,
    /// On the boundary of the stable region: a condition is exactly zero.
    pub marginal: bool,
}

pub fn spectral_summary(p: &Matrix) -> Result<SpectralSummary> {
    if p.dim() != 2 {
        return Err(KccError::NotTwoByTwo(p.dim()));
    }
    Ok(spectral_summary_2x2(p.to_array2()))
}

pub fn spectral_summary_2x2(p: [[f64; 2]; 2]) -> SpectralSummary {
    let [[a, b], [c, d]] = p;
    let tr = a + d;
    let det = a * d - b * c;
    // (a − d)² + 4bc avoids the cancellation in tr² − 4 det
    let disc = (a - d) * (a - d) + 4.0 * b * c;
    let (lambda_plus, lambda_minus) = if disc >= 0.0 {
        let s = disc.sqrt();
        if tr >= 0.0 {
            let big = 0.5 * (tr + s);
            let small = if big != 0.0 { det / big } else { 0.5 * (tr - s) };
            (big, small)
        } else {
            let big_neg = 0.5 * (tr - s);
            (det / big_neg, big_neg)
        }
    } else {
        let re = 0.5 * tr;
        let im = 0.5 * (-disc).sqrt();
        return finish(Complex64::new(re, im), Complex64::new(re, -im), tr, det);
    };
    finish(
        Complex64::new(lambda_plus, 0.0),
        Complex64::new(lambda_minus, 0.0),
        tr,
        det,
    )
}

fn finish(lambda_plus: Complex64, lambda_minus: Complex64, tr: f64, det: f64) -> SpectralSummary {
    let jacobi_stable = tr < 0.0 && det > 0.0;
    let marginal = (tr == 0.0 && det >= 0.0) || (det == 0.0 && tr <= 0.0);
    SpectralSummary {
        lambda_plus,
        lambda_minus,
        kappa: 0.5 * tr,
        theta: 0.5 * (lambda_plus - lambda_minus),
        trace_condition: tr,
        det_condition: det,
        jacobi_stable,
        marginal,
    }
}
