//! Automatic-differentiation back end: `G` is evaluated once on Taylor
//! polynomials in the `2n + 1` variables `(x, y, t)` and every partial is read
//! off the coefficients.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use super::{
    deviation_curvature_generic, p3_from_gradient, torsion_generic, ConnectionData, Jet, KccError, KccInvariants,
    Result, SodeSystem,
};
use crate::taylor::{Layout, Scalar, Taylor};
use crate::tensor::{Matrix, Tensor};

thread_local! {
    static LAYOUTS: RefCell<HashMap<(usize, usize), Arc<Layout>>> = RefCell::new(HashMap::new());
}

fn layout(nvars: usize, order: usize) -> Arc<Layout> {
    LAYOUTS.with(|cache| {
        Arc::clone(
            cache
                .borrow_mut()
                .entry((nvars, order))
                .or_insert_with(|| Layout::new(nvars, order)),
        )
    })
}

pub(super) struct FirstDerivatives {
    pub g: Vec<f64>,
    pub n_coeffs: Matrix,
    pub dg_dx: Matrix,
}

/// `G` and its derivative objects as Taylor polynomials around the jet.
struct Expansion {
    n: usize,
    y: Vec<Taylor>,
    g: Vec<Taylor>,
    /// `Nⁱⱼ`, one order below `g`.
    n_coeffs: Vec<Vec<Taylor>>,
    dg_dx: Vec<Vec<Taylor>>,
}

impl Expansion {
    fn new<S: SodeSystem>(system: &S, jet: &Jet, order: usize) -> Result<Self> {
        let n = system.dimension();
        let l = layout(2 * n + 1, order);
        let var = |k: usize, v: f64| Taylor::variable(&l, order, k, v);
        let x: Vec<Taylor> = jet.x.iter().enumerate().map(|(i, &v)| var(i, v)).collect();
        let y: Vec<Taylor> = jet.y.iter().enumerate().map(|(i, &v)| var(n + i, v)).collect();
        let t = var(2 * n, jet.t);
        let g = system.g(&x, &y, &t);
        if g.len() != n {
            return Err(KccError::ComponentCount {
                expected: n,
                got: g.len(),
            });
        }
        if !g.iter().all(Taylor::is_finite) {
            return Err(KccError::NonFinite { jet: jet.clone() });
        }
        let n_coeffs = g
            .iter()
            .map(|gi| (0..n).map(|j| gi.derivative(n + j)).collect())
            .collect();
        let dg_dx = g.iter().map(|gi| (0..n).map(|j| gi.derivative(j)).collect()).collect();
        Ok(Self {
            n,
            y,
            g,
            n_coeffs,
            dg_dx,
        })
    }

    fn y_var(&self, k: usize) -> usize {
        self.n + k
    }

    /// `∂Nⁱⱼ/∂yˡ` as `[i][j][l]`.
    fn berwald(&self) -> Vec<Vec<Vec<Taylor>>> {
        self.map_n(|nij| (0..self.n).map(|l| nij.derivative(self.y_var(l))).collect())
    }

    /// `∂Nⁱⱼ/∂xˡ` as `[i][j][l]`.
    fn dn_dx(&self) -> Vec<Vec<Vec<Taylor>>> {
        self.map_n(|nij| (0..self.n).map(|l| nij.derivative(l)).collect())
    }

    fn dn_dt(&self) -> Vec<Vec<Taylor>> {
        self.map_n(|nij| nij.derivative(2 * self.n))
    }

    fn map_n<T>(&self, f: impl Fn(&Taylor) -> T) -> Vec<Vec<T>> {
        self.n_coeffs.iter().map(|row| row.iter().map(&f).collect()).collect()
    }
}

fn values(v: &[Taylor]) -> Vec<f64> {
    v.iter().map(Scalar::value).collect()
}

fn matrix(n: usize, m: &[Vec<Taylor>]) -> Matrix {
    Matrix::from_fn(n, |[i, j]| m[i][j].value())
}

fn tensor3(n: usize, t: &[Vec<Vec<Taylor>>]) -> Tensor<3> {
    Tensor::from_fn(n, |[i, j, k]| t[i][j][k].value())
}

pub(super) fn first_derivatives<S: SodeSystem>(system: &S, jet: &Jet) -> Result<FirstDerivatives> {
    let e = Expansion::new(system, jet, 1)?;
    Ok(FirstDerivatives {
        g: values(&e.g),
        n_coeffs: matrix(e.n, &e.n_coeffs),
        dg_dx: matrix(e.n, &e.dg_dx),
    })
}

fn connection_of(
    e: &Expansion,
    berwald: &[Vec<Vec<Taylor>>],
    dn_dx: &[Vec<Vec<Taylor>>],
    dn_dt: &[Vec<Taylor>],
) -> ConnectionData {
    let n = e.n;
    ConnectionData {
        g: values(&e.g),
        n_coeffs: matrix(n, &e.n_coeffs),
        berwald: tensor3(n, berwald),
        dg_dx: matrix(n, &e.dg_dx),
        dn_dx: tensor3(n, dn_dx),
        dn_dt: matrix(n, dn_dt),
    }
}

pub(super) fn connection<S: SodeSystem>(system: &S, jet: &Jet) -> Result<ConnectionData> {
    let e = Expansion::new(system, jet, 2)?;
    Ok(connection_of(&e, &e.berwald(), &e.dn_dx(), &e.dn_dt()))
}

pub(super) fn invariants<S: SodeSystem>(system: &S, jet: &Jet) -> Result<(ConnectionData, KccInvariants)> {
    let e = Expansion::new(system, jet, 4)?;
    let n = e.n;
    let berwald = e.berwald();
    let dn_dx = e.dn_dx();
    let dn_dt = e.dn_dt();

    // P to order 2, so its y-gradient and y-Hessian are exact
    let p = deviation_curvature_generic(&e.g, &e.y, &e.n_coeffs, &e.dg_dx, &berwald, &dn_dx, &dn_dt);
    let dp: Vec<Vec<Vec<Taylor>>> = p
        .iter()
        .map(|row| {
            row.iter()
                .map(|pij| (0..n).map(|k| pij.derivative(e.y_var(k))).collect())
                .collect()
        })
        .collect();
    let grad = tensor3(n, &dp);
    let hessian = Tensor::<4>::from_fn(n, |[i, j, k, l]| dp[i][j][k].derivative(e.y_var(l)).value());
    let p4 = Tensor::from_fn(n, |[i, j, k, l]| (hessian[[i, j, k, l]] - hessian[[i, k, j, l]]) / 3.0);

    let douglas = Tensor::from_fn(n, |[i, j, k, l]| berwald[i][j][k].derivative(e.y_var(l)).value());
    let torsion = torsion_generic(&e.n_coeffs, &berwald, &dn_dx);
    let b4 = Tensor::from_fn(n, |[i, j, k, l]| torsion[i][k][l].derivative(e.y_var(j)).value());

    let y = values(&e.y);
    let g = values(&e.g);
    let n_vals: Vec<Vec<f64>> = e.map_n(Scalar::value);
    let p_tensor = matrix(n, &p);
    let invariants = KccInvariants {
        epsilon: super::first_invariant_generic(&g, &y, &n_vals),
        p_trace: p_tensor.trace(),
        p_tensor,
        p3: p3_from_gradient(&grad),
        p4,
        douglas,
        torsion_b: tensor3(n, &torsion),
        b4,
    };
    Ok((connection_of(&e, &berwald, &dn_dx, &dn_dt), invariants))
}
