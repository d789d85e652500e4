//! Finite-difference back end.
//!
//! First derivatives of `G` use central differences (or the system's analytic
//! callbacks). Second derivatives use a four-point mixed stencil with one
//! Richardson step, which keeps the truncation error at `O(h⁴)` so a fairly
//! large step can be used and rounding noise stays small.

use super::{
    p3_from_gradient, p_from_connection, torsion_from_connection, ConnectionData, Jet, KccError, KccInvariants, Result,
    SodeSystem,
};
use crate::tensor::{Matrix, Tensor};

/// Step controls. A step for coordinate `v` is `max(floor, relative·|v|)`,
/// then adjusted so that `v ± h` is exactly representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    pub first_relative: f64,
    pub first_floor: f64,
    pub second_relative: f64,
    pub second_floor: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            first_relative: 1e-6,
            first_floor: 1e-6,
            second_relative: 1e-2,
            second_floor: 1e-2,
        }
    }
}

impl FdSteps {
    fn first(&self, v: f64) -> f64 {
        representable(v, self.first_floor.max(self.first_relative * v.abs()))
    }

    fn second(&self, v: f64) -> f64 {
        representable(v, self.second_floor.max(self.second_relative * v.abs()))
    }
}

fn representable(v: f64, h: f64) -> f64 {
    (v + h) - v
}

/// Point `[x…, y…, t]` of the extended phase space.
fn point(jet: &Jet) -> Vec<f64> {
    let mut v = jet.x.clone();
    v.extend_from_slice(&jet.y);
    v.push(jet.t);
    v
}

fn jet_at(v: &[f64], n: usize) -> Jet {
    Jet::new(v[..n].to_vec(), v[n..2 * n].to_vec(), v[2 * n])
}

pub(super) fn eval_g<S: SodeSystem>(system: &S, jet: &Jet) -> Result<Vec<f64>> {
    let n = system.dimension();
    let g = system.g(&jet.x, &jet.y, &jet.t);
    if g.len() != n {
        return Err(KccError::ComponentCount {
            expected: n,
            got: g.len(),
        });
    }
    if !g.iter().all(|v| v.is_finite()) {
        return Err(KccError::NonFinite { jet: jet.clone() });
    }
    Ok(g)
}

fn shifted(v: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut w = v.to_vec();
    for &(k, h) in moves {
        w[k] += h;
    }
    w
}

fn combine(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let len = terms[0].1.len();
    (0..len).map(|i| terms.iter().map(|(c, f)| c * f[i]).sum()).collect()
}

/// Central first difference of a vector-valued function.
fn central<F>(f: &F, v: &[f64], k: usize, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let fp = f(&shifted(v, &[(k, h)]))?;
    let fm = f(&shifted(v, &[(k, -h)]))?;
    let c = 0.5 / h;
    Ok(combine(&[(c, &fp), (-c, &fm)]))
}

/// Central difference with one Richardson step, `(4D(h/2) − D(h))/3`.
fn central_richardson<F>(f: &F, v: &[f64], k: usize, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let coarse = central(f, v, k, h)?;
    let fine = central(f, v, k, h / 2.0)?;
    Ok(combine(&[(4.0 / 3.0, &fine), (-1.0 / 3.0, &coarse)]))
}

/// Four-point mixed second difference `∂²f/∂vₐ∂v_b`.
fn mixed<F>(f: &F, v: &[f64], a: usize, b: usize, ha: f64, hb: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let pp = f(&shifted(v, &[(a, ha), (b, hb)]))?;
    let pm = f(&shifted(v, &[(a, ha), (b, -hb)]))?;
    let mp = f(&shifted(v, &[(a, -ha), (b, hb)]))?;
    let mm = f(&shifted(v, &[(a, -ha), (b, -hb)]))?;
    let c = 0.25 / (ha * hb);
    Ok(combine(&[(c, &pp), (-c, &pm), (-c, &mp), (c, &mm)]))
}

fn mixed_richardson<F>(f: &F, v: &[f64], a: usize, b: usize, ha: f64, hb: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let coarse = mixed(f, v, a, b, ha, hb)?;
    let fine = mixed(f, v, a, b, ha / 2.0, hb / 2.0)?;
    Ok(combine(&[(4.0 / 3.0, &fine), (-1.0 / 3.0, &coarse)]))
}

/// Jacobian `∂fᵢ/∂v_{offset+j}` of `f: ℝ^{2n+1} → ℝⁿ`, as a matrix.
fn jacobian<F>(f: &F, v: &[f64], offset: usize, n: usize, steps: &FdSteps) -> Result<Matrix>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut m = Matrix::zeros(n);
    for j in 0..n {
        let k = offset + j;
        let col = central(f, v, k, steps.first(v[k]))?;
        for (i, c) in col.into_iter().enumerate() {
            m[[i, j]] = c;
        }
    }
    Ok(m)
}

pub(super) fn nonlinear_connection<S: SodeSystem>(system: &S, jet: &Jet, steps: FdSteps) -> Result<Matrix> {
    if let Some(m) = system.analytic_dg_dy(jet) {
        return Ok(m);
    }
    let n = system.dimension();
    let g = |v: &[f64]| eval_g(system, &jet_at(v, n));
    jacobian(&g, &point(jet), n, n, &steps)
}

pub(super) fn dg_dx<S: SodeSystem>(system: &S, jet: &Jet, steps: FdSteps) -> Result<Matrix> {
    if let Some(m) = system.analytic_dg_dx(jet) {
        return Ok(m);
    }
    let n = system.dimension();
    let g = |v: &[f64]| eval_g(system, &jet_at(v, n));
    jacobian(&g, &point(jet), 0, n, &steps)
}

/// `∂Nⁱⱼ/∂v_k` for every `k` in `vars`, stored as `[i, j, position in vars]`.
fn dn_along<S: SodeSystem>(system: &S, jet: &Jet, steps: &FdSteps, vars: &[usize]) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = system.dimension();
    let v = point(jet);
    let mut out = vec![vec![vec![0.0; vars.len()]; n]; n];
    if system.analytic_dg_dy(jet).is_some() {
        let n_flat = |w: &[f64]| {
            let jet = jet_at(w, n);
            system
                .analytic_dg_dy(&jet)
                .map(|m| m.as_slice().to_vec())
                .ok_or(KccError::NonFinite { jet })
        };
        for (slot, &k) in vars.iter().enumerate() {
            let d = central(&n_flat, &v, k, steps.first(v[k]))?;
            for i in 0..n {
                for j in 0..n {
                    out[i][j][slot] = d[i * n + j];
                }
            }
        }
    } else {
        let g = |w: &[f64]| eval_g(system, &jet_at(w, n));
        for (slot, &k) in vars.iter().enumerate() {
            #[allow(clippy::needless_range_loop)]
            for j in 0..n {
                let a = n + j;
                let d = mixed_richardson(&g, &v, a, k, steps.second(v[a]), steps.second(v[k]))?;
                for (i, di) in d.into_iter().enumerate() {
                    out[i][j][slot] = di;
                }
            }
        }
    }
    Ok(out)
}

fn to_tensor3(n: usize, d: &[Vec<Vec<f64>>]) -> Tensor<3> {
    Tensor::from_fn(n, |[i, j, l]| d[i][j][l])
}

pub(super) fn connection<S: SodeSystem>(system: &S, jet: &Jet, steps: FdSteps) -> Result<ConnectionData> {
    let n = system.dimension();
    let y_vars: Vec<usize> = (n..2 * n).collect();
    let x_vars: Vec<usize> = (0..n).collect();
    let berwald = to_tensor3(n, &dn_along(system, jet, &steps, &y_vars)?);
    // Gⁱⱼₗ is symmetric in j, l; symmetrise to remove stencil asymmetry
    let berwald = Tensor::from_fn(n, |[i, j, l]| 0.5 * (berwald[[i, j, l]] + berwald[[i, l, j]]));
    let dn_dx = to_tensor3(n, &dn_along(system, jet, &steps, &x_vars)?);
    let dn_dt = if system.time_dependent() {
        let d = dn_along(system, jet, &steps, &[2 * n])?;
        Matrix::from_fn(n, |[i, j]| d[i][j][0])
    } else {
        Matrix::zeros(n)
    };
    Ok(ConnectionData {
        g: eval_g(system, jet)?,
        n_coeffs: nonlinear_connection(system, jet, steps)?,
        berwald,
        dg_dx: dg_dx(system, jet, steps)?,
        dn_dx,
        dn_dt,
    })
}

pub(super) fn invariants<S: SodeSystem>(system: &S, jet: &Jet, steps: FdSteps) -> Result<KccInvariants> {
    let n = system.dimension();
    let v = point(jet);
    let conn = connection(system, jet, steps)?;
    let p_tensor = p_from_connection(&conn, &jet.y);

    let p_flat = |w: &[f64]| -> Result<Vec<f64>> {
        let jet = jet_at(w, n);
        let c = connection(system, &jet, steps)?;
        Ok(p_from_connection(&c, &jet.y).as_slice().to_vec())
    };
    let berwald_flat =
        |w: &[f64]| -> Result<Vec<f64>> { Ok(connection(system, &jet_at(w, n), steps)?.berwald.as_slice().to_vec()) };
    let torsion_flat = |w: &[f64]| -> Result<Vec<f64>> {
        Ok(torsion_from_connection(&connection(system, &jet_at(w, n), steps)?)
            .as_slice()
            .to_vec())
    };

    let mut grad = Tensor::<3>::zeros(n);
    let mut hessian = Tensor::<4>::zeros(n);
    let mut douglas = Tensor::<4>::zeros(n);
    let mut b4 = Tensor::<4>::zeros(n);
    for k in 0..n {
        let a = n + k;
        let ha = steps.second(v[a]);
        let dp = central_richardson(&p_flat, &v, a, ha)?;
        let dberwald = central_richardson(&berwald_flat, &v, a, ha)?;
        let dtorsion = central_richardson(&torsion_flat, &v, a, ha)?;
        for i in 0..n {
            for j in 0..n {
                grad[[i, j, k]] = dp[i * n + j];
                for m in 0..n {
                    douglas[[i, j, m, k]] = dberwald[(i * n + j) * n + m];
                    b4[[i, k, j, m]] = dtorsion[(i * n + j) * n + m];
                }
            }
        }
        for l in 0..n {
            let b = n + l;
            let d2 = mixed_richardson(&p_flat, &v, a, b, ha, steps.second(v[b]))?;
            for i in 0..n {
                for j in 0..n {
                    hessian[[i, j, k, l]] = d2[i * n + j];
                }
            }
        }
    }

    let p4 = Tensor::from_fn(n, |[i, j, k, l]| (hessian[[i, j, k, l]] - hessian[[i, k, j, l]]) / 3.0);
    Ok(KccInvariants {
        epsilon: super::first_invariant_from(&conn.g, &jet.y, &conn.n_coeffs),
        p_trace: p_tensor.trace(),
        p_tensor,
        p3: p3_from_gradient(&grad),
        p4,
        douglas,
        torsion_b: torsion_from_connection(&conn),
        b4,
    })
}
