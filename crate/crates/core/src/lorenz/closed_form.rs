//! Hand-derived KCC objects of the reduced Lorenz system at a general jet.
//!
//! These mirror what the generic engine computes and are used as an
//! independent check on it. Matrices follow the engine's convention
//! `m[[i, j]] = Mⁱⱼ`.

use super::LorenzParams;
use crate::tensor::{Matrix, Tensor};

/// `N¹₁ = (1+σ)/2`, `N²₁ = [(1+σ+β)/(2σ) − 1]X¹ − Y¹/σ`, `N¹₂ = N²₂ = 0`.
pub fn nonlinear_connection(p: &LorenzParams, x1: f64, y1: f64) -> Matrix {
    Matrix::from_rows([[0.5 * (1.0 + p.sigma), 0.0], [0.5 * p.c() * x1 - y1 / p.sigma, 0.0]])
}

/// The only non-zero Berwald component is `G²₁₁ = −1/σ`.
pub fn berwald(p: &LorenzParams) -> Tensor<3> {
    let mut t = Tensor::zeros(2);
    t[[1, 0, 0]] = -1.0 / p.sigma;
    t
}

/// `(ε¹, ε²)`.
pub fn first_invariant(p: &LorenzParams, x1: f64, x2: f64, y1: f64) -> [f64; 2] {
    let (sigma, rho, beta) = (p.sigma, p.rho, p.beta);
    [
        0.5 * (1.0 + sigma) * y1 + sigma * x1 * x2 + sigma * (1.0 - rho) * x1,
        0.5 * p.c() * x1 * y1 + (1.0 - rho + beta) * x1 * x1 + x1 * x1 * x2 - beta * beta * x2,
    ]
}

/// Deviation curvature tensor `Pⁱⱼ`.
pub fn deviation_curvature(p: &LorenzParams, x1: f64, x2: f64, y1: f64) -> Matrix {
    let (sigma, rho, beta) = (p.sigma, p.rho, p.beta);
    let p11 = -sigma * x2 - sigma * (1.0 - rho) + 0.25 * (1.0 + sigma).powi(2);
    let p12 = -sigma * x1;
    let p21 = (1.0 - beta / (2.0 * sigma)) * y1
        + (1.0 - sigma * sigma - 7.0 * beta * sigma + beta + 4.0 * (rho - 1.0) * sigma) / (4.0 * sigma) * x1
        - x1 * x2;
    let p22 = -x1 * x1 + beta * beta;
    Matrix::from_rows([[p11, p12], [p21, p22]])
}

/// `P¹₁ + P²₂`.
pub fn curvature_trace(p: &LorenzParams, x1: f64, x2: f64) -> f64 {
    let (sigma, rho, beta) = (p.sigma, p.rho, p.beta);
    -x1 * x1 - sigma * x2 - sigma * (1.0 - rho) + 0.25 * (1.0 + sigma).powi(2) + beta * beta
}

/// Torsion from its defining formula. Because `N¹₂ = N²₂ = 0` and `N` does not
/// depend on `X²`, every component cancels.
pub fn torsion(_p: &LorenzParams) -> Tensor<3> {
    Tensor::zeros(2)
}

/// `ξ̈` of the Lorenz deviation equations, written out component by component.
pub fn deviation_rhs(p: &LorenzParams, x1: f64, x2: f64, y1: f64, xi: [f64; 2], xi_dot: [f64; 2]) -> [f64; 2] {
    let (sigma, rho, beta) = (p.sigma, p.rho, p.beta);
    let k = beta - sigma + 1.0;
    [
        -(sigma + 1.0) * xi_dot[0] - sigma * ((1.0 - rho) + x2) * xi[0] - sigma * x1 * xi[1],
        -((k * x1 - 2.0 * y1) * xi_dot[0]
            + (2.0 * sigma * (beta - rho + x2 + 1.0) * x1 + k * y1) * xi[0]
            + sigma * (x1 - beta) * (beta + x1) * xi[1])
            / sigma,
    ]
}
