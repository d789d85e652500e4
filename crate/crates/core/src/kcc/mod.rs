//! Generic KCC geometry engine.
//!
//! Given a second-order system `ẍⁱ + 2Gⁱ(x, ẋ, t) = 0` this module computes the
//! nonlinear connection `Nⁱⱼ = ∂Gⁱ/∂yʲ`, the Berwald connection
//! `Gⁱⱼₗ = ∂Nⁱⱼ/∂yˡ`, the five KCC invariants, the deviation curvature tensor
//! `Pⁱⱼ` and, for `n = 2`, its spectrum and Jacobi-stability classification.
//!
//! Derivatives come from one of two interchangeable back ends, chosen with
//! [`Differentiation`]:
//!
//! * [`Differentiation::Automatic`] (default) evaluates `Gⁱ` on truncated
//!   Taylor polynomials, so every partial derivative is exact up to rounding.
//! * [`Differentiation::FiniteDifference`] uses only `f64` evaluations of
//!   `Gⁱ` (plus the analytic first-derivative callbacks when a system
//!   provides them) and central differences.

mod auto;
mod fd;
mod spectral;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taylor::Scalar;
use crate::tensor::{Matrix, Tensor};

pub use fd::FdSteps;
pub use spectral::{spectral_summary, spectral_summary_2x2, SpectralSummary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KccError {
    #[error("non-finite value of G at jet {jet:?}")]
    NonFinite { jet: Jet },
    #[error("jet does not match system dimension {expected}: |x| = {x_len}, |y| = {y_len}")]
    Dimension {
        expected: usize,
        x_len: usize,
        y_len: usize,
    },
    #[error("G returned {got} components for a system of dimension {expected}")]
    ComponentCount { expected: usize, got: usize },
    #[error("a {0}x{0} matrix was given where a 2x2 matrix is required")]
    NotTwoByTwo(usize),
}

pub type Result<T> = std::result::Result<T, KccError>;

/// A system of second-order ODEs `ẍⁱ + 2Gⁱ(x, y, t) = 0`, `y = ẋ`.
///
/// `g` is written once, generically, so the engine can evaluate it on plain
/// floats and on Taylor polynomials. The analytic derivative hooks are
/// optional; the finite-difference back end prefers them when present.
pub trait SodeSystem {
    fn dimension(&self) -> usize;

    /// `(G¹, …, Gⁿ)` at `(x, y, t)`.
    fn g<S: Scalar>(&self, x: &[S], y: &[S], t: &S) -> Vec<S>;

    /// `∂Gⁱ/∂yʲ` in closed form, if known.
    fn analytic_dg_dy(&self, _jet: &Jet) -> Option<Matrix> {
        None
    }

    /// `∂Gⁱ/∂xʲ` in closed form, if known.
    fn analytic_dg_dx(&self, _jet: &Jet) -> Option<Matrix> {
        None
    }

    /// Whether `G` depends explicitly on `t`. When false, `∂Nⁱⱼ/∂t` is zero.
    fn time_dependent(&self) -> bool {
        false
    }
}

/// A point `(xⁱ, yⁱ, t)` of the extended phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl Jet {
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: f64) -> Self {
        Self { x, y, t }
    }

    pub fn autonomous(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self::new(x, y, 0.0)
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.x.len() != n || self.y.len() != n {
            return Err(KccError::Dimension {
                expected: n,
                x_len: self.x.len(),
                y_len: self.y.len(),
            });
        }
        Ok(())
    }
}

/// Connection coefficients and the first derivatives of `G` they are built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionData {
    /// `Gⁱ` at the jet.
    pub g: Vec<f64>,
    /// `Nⁱⱼ = ∂Gⁱ/∂yʲ`.
    pub n_coeffs: Matrix,
    /// `Gⁱⱼₗ = ∂Nⁱⱼ/∂yˡ`, symmetric in `j, l`.
    pub berwald: Tensor<3>,
    /// `∂Gⁱ/∂xʲ`.
    pub dg_dx: Matrix,
    /// `∂Nⁱⱼ/∂xˡ`, stored as `[i, j, l]`.
    pub dn_dx: Tensor<3>,
    /// `∂Nⁱⱼ/∂t`.
    pub dn_dt: Matrix,
}

/// The KCC invariants at one jet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KccInvariants {
    /// First invariant `εⁱ = 2Gⁱ − Nⁱⱼyʲ`.
    pub epsilon: Vec<f64>,
    /// Deviation curvature tensor `Pⁱⱼ`.
    pub p_tensor: Matrix,
    pub p_trace: f64,
    /// `Pⁱⱼₖ = (∂Pⁱⱼ/∂yᵏ − ∂Pⁱₖ/∂yʲ)/3`.
    pub p3: Tensor<3>,
    /// `Pⁱⱼₖₗ = ∂Pⁱⱼₖ/∂yˡ`.
    pub p4: Tensor<4>,
    /// Douglas tensor `Dⁱⱼₖₗ = ∂Gⁱⱼₖ/∂yˡ`.
    pub douglas: Tensor<4>,
    /// Torsion `Bⁱⱼₖ = δNⁱⱼ/δxᵏ − δNⁱₖ/δxʲ`, `δ/δxᵏ = ∂/∂xᵏ − Nᵐₖ ∂/∂yᵐ`.
    pub torsion_b: Tensor<3>,
    /// `Bⁱⱼₖₗ = ∂Bⁱₖₗ/∂yʲ`, stored as `[i, j, k, l]`.
    pub b4: Tensor<4>,
}

/// Everything the engine knows about one jet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KccReport {
    pub jet: Jet,
    pub connection: ConnectionData,
    pub invariants: KccInvariants,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Differentiation {
    #[default]
    Automatic,
    FiniteDifference(FdSteps),
}

/// KCC engine bound to one system and one differentiation back end.
///
/// Stateless apart from the borrowed system, so one engine can be shared
/// across threads whenever the system is `Sync`.
#[derive(Debug, Clone, Copy)]
pub struct Kcc<'a, S> {
    system: &'a S,
    mode: Differentiation,
}

impl<'a, S: SodeSystem> Kcc<'a, S> {
    pub fn new(system: &'a S) -> Self {
        Self::with_mode(system, Differentiation::Automatic)
    }

    pub fn finite_difference(system: &'a S) -> Self {
        Self::with_mode(system, Differentiation::FiniteDifference(FdSteps::default()))
    }

    pub fn with_mode(system: &'a S, mode: Differentiation) -> Self {
        Self { system, mode }
    }

    pub fn mode(&self) -> Differentiation {
        self.mode
    }

    pub fn connection(&self, jet: &Jet) -> Result<ConnectionData> {
        jet.check(self.system.dimension())?;
        match self.mode {
            Differentiation::Automatic => auto::connection(self.system, jet),
            Differentiation::FiniteDifference(steps) => fd::connection(self.system, jet, steps),
        }
    }

    pub fn nonlinear_connection(&self, jet: &Jet) -> Result<Matrix> {
        jet.check(self.system.dimension())?;
        match self.mode {
            Differentiation::Automatic => auto::first_derivatives(self.system, jet).map(|d| d.n_coeffs),
            Differentiation::FiniteDifference(steps) => fd::nonlinear_connection(self.system, jet, steps),
        }
    }

    pub fn berwald_connection(&self, jet: &Jet) -> Result<Tensor<3>> {
        self.connection(jet).map(|c| c.berwald)
    }

    pub fn first_invariant(&self, jet: &Jet) -> Result<Vec<f64>> {
        jet.check(self.system.dimension())?;
        let (g, n_coeffs) = match self.mode {
            Differentiation::Automatic => {
                let d = auto::first_derivatives(self.system, jet)?;
                (d.g, d.n_coeffs)
            }
            Differentiation::FiniteDifference(steps) => (
                fd::eval_g(self.system, jet)?,
                fd::nonlinear_connection(self.system, jet, steps)?,
            ),
        };
        Ok(first_invariant_from(&g, &jet.y, &n_coeffs))
    }

    pub fn deviation_curvature(&self, jet: &Jet) -> Result<Matrix> {
        let c = self.connection(jet)?;
        Ok(p_from_connection(&c, &jet.y))
    }

    pub fn higher_invariants(&self, jet: &Jet) -> Result<KccInvariants> {
        jet.check(self.system.dimension())?;
        match self.mode {
            Differentiation::Automatic => auto::invariants(self.system, jet).map(|(_, inv)| inv),
            Differentiation::FiniteDifference(steps) => fd::invariants(self.system, jet, steps),
        }
    }

    pub fn report(&self, jet: &Jet) -> Result<KccReport> {
        jet.check(self.system.dimension())?;
        let (connection, invariants) = match self.mode {
            Differentiation::Automatic => auto::invariants(self.system, jet)?,
            Differentiation::FiniteDifference(steps) => (
                fd::connection(self.system, jet, steps)?,
                fd::invariants(self.system, jet, steps)?,
            ),
        };
        Ok(KccReport {
            jet: jet.clone(),
            connection,
            invariants,
        })
    }

    /// `ξ̈ⁱ = −2Nⁱⱼ ξ̇ʲ − 2(∂Gⁱ/∂xʲ) ξʲ`, the deviation equations solved for `ξ̈`.
    pub fn deviation_ode_rhs(&self, jet: &Jet, xi: &[f64], xi_dot: &[f64]) -> Result<Vec<f64>> {
        let n = self.system.dimension();
        jet.check(n)?;
        assert_eq!(xi.len(), n, "xi has wrong dimension");
        assert_eq!(xi_dot.len(), n, "xi_dot has wrong dimension");
        let (n_coeffs, dg_dx) = match self.mode {
            Differentiation::Automatic => {
                let d = auto::first_derivatives(self.system, jet)?;
                (d.n_coeffs, d.dg_dx)
            }
            Differentiation::FiniteDifference(steps) => (
                fd::nonlinear_connection(self.system, jet, steps)?,
                fd::dg_dx(self.system, jet, steps)?,
            ),
        };
        Ok(deviation_rhs_from(&n_coeffs, &dg_dx, xi, xi_dot))
    }
}

/// Nonlinear connection with the default (automatic) back end.
pub fn nonlinear_connection<S: SodeSystem>(system: &S, jet: &Jet) -> Result<Matrix> {
    Kcc::new(system).nonlinear_connection(jet)
}

pub fn berwald_connection<S: SodeSystem>(system: &S, jet: &Jet) -> Result<Tensor<3>> {
    Kcc::new(system).berwald_connection(jet)
}

pub fn first_invariant<S: SodeSystem>(system: &S, jet: &Jet) -> Result<Vec<f64>> {
    Kcc::new(system).first_invariant(jet)
}

pub fn deviation_curvature<S: SodeSystem>(system: &S, jet: &Jet) -> Result<Matrix> {
    Kcc::new(system).deviation_curvature(jet)
}

pub fn higher_invariants<S: SodeSystem>(system: &S, jet: &Jet) -> Result<KccInvariants> {
    Kcc::new(system).higher_invariants(jet)
}

pub fn deviation_ode_rhs<S: SodeSystem>(system: &S, jet: &Jet, xi: &[f64], xi_dot: &[f64]) -> Result<Vec<f64>> {
    Kcc::new(system).deviation_ode_rhs(jet, xi, xi_dot)
}

// Formula kernels, generic so the Taylor back end can differentiate through them.

pub(crate) fn first_invariant_generic<T: Scalar>(g: &[T], y: &[T], n_coeffs: &[Vec<T>]) -> Vec<T> {
    g.iter()
        .enumerate()
        .map(|(i, gi)| {
            n_coeffs[i]
                .iter()
                .zip(y)
                .fold(gi.clone() * 2.0, |acc, (nij, yj)| acc - nij.clone() * yj.clone())
        })
        .collect()
}

/// `Pⁱⱼ = −2∂Gⁱ/∂xʲ − 2GˡGⁱⱼₗ + yˡ∂Nⁱⱼ/∂xˡ + NⁱₗNˡⱼ + ∂Nⁱⱼ/∂t`.
pub(crate) fn deviation_curvature_generic<T: Scalar>(
    g: &[T],
    y: &[T],
    n_coeffs: &[Vec<T>],
    dg_dx: &[Vec<T>],
    berwald: &[Vec<Vec<T>>],
    dn_dx: &[Vec<Vec<T>>],
    dn_dt: &[Vec<T>],
) -> Vec<Vec<T>> {
    let n = g.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut p = dg_dx[i][j].clone() * -2.0 + dn_dt[i][j].clone();
                    for l in 0..n {
                        p = p - g[l].clone() * berwald[i][j][l].clone() * 2.0
                            + y[l].clone() * dn_dx[i][j][l].clone()
                            + n_coeffs[i][l].clone() * n_coeffs[l][j].clone();
                    }
                    p
                })
                .collect()
        })
        .collect()
}

/// `Bⁱⱼₖ = ∂Nⁱⱼ/∂xᵏ − ∂Nⁱₖ/∂xʲ + Nᵐⱼ ∂Nⁱₖ/∂yᵐ − Nᵐₖ ∂Nⁱⱼ/∂yᵐ`.
pub(crate) fn torsion_generic<T: Scalar>(
    n_coeffs: &[Vec<T>],
    berwald: &[Vec<Vec<T>>],
    dn_dx: &[Vec<Vec<T>>],
) -> Vec<Vec<Vec<T>>> {
    let n = n_coeffs.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| {
                            let mut b = dn_dx[i][j][k].clone() - dn_dx[i][k][j].clone();
                            for m in 0..n {
                                b = b + n_coeffs[m][j].clone() * berwald[i][k][m].clone()
                                    - n_coeffs[m][k].clone() * berwald[i][j][m].clone();
                            }
                            b
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn first_invariant_from(g: &[f64], y: &[f64], n_coeffs: &Matrix) -> Vec<f64> {
    first_invariant_generic(g, y, &matrix_rows(n_coeffs))
}

pub(crate) fn p_from_connection(c: &ConnectionData, y: &[f64]) -> Matrix {
    let p = deviation_curvature_generic(
        &c.g,
        y,
        &matrix_rows(&c.n_coeffs),
        &matrix_rows(&c.dg_dx),
        &tensor3_nested(&c.berwald),
        &tensor3_nested(&c.dn_dx),
        &matrix_rows(&c.dn_dt),
    );
    Matrix::from_fn(c.g.len(), |[i, j]| p[i][j])
}

pub(crate) fn torsion_from_connection(c: &ConnectionData) -> Tensor<3> {
    let b = torsion_generic(
        &matrix_rows(&c.n_coeffs),
        &tensor3_nested(&c.berwald),
        &tensor3_nested(&c.dn_dx),
    );
    Tensor::from_fn(c.g.len(), |[i, j, k]| b[i][j][k])
}

fn deviation_rhs_from(n_coeffs: &Matrix, dg_dx: &Matrix, xi: &[f64], xi_dot: &[f64]) -> Vec<f64> {
    let n = xi.len();
    (0..n)
        .map(|i| {
            (0..n).fold(0.0, |acc, j| {
                acc - 2.0 * n_coeffs[[i, j]] * xi_dot[j] - 2.0 * dg_dx[[i, j]] * xi[j]
            })
        })
        .collect()
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    let n = m.dim();
    (0..n).map(|i| (0..n).map(|j| m[[i, j]]).collect()).collect()
}

fn tensor3_nested(t: &Tensor<3>) -> Vec<Vec<Vec<f64>>> {
    let n = t.dim();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| t[[i, j, k]]).collect()).collect())
        .collect()
}

/// `Pⁱⱼₖ` from the y-gradient of `P`, `grad[i][j][k] = ∂Pⁱⱼ/∂yᵏ`.
///
/// Built as `(a − b)/3` and `(b − a)/3`, so antisymmetry is exact in floating point.
pub(crate) fn p3_from_gradient(grad: &Tensor<3>) -> Tensor<3> {
    Tensor::from_fn(grad.dim(), |[i, j, k]| (grad[[i, j, k]] - grad[[i, k, j]]) / 3.0)
}
