//! Scalar abstraction and truncated multivariate Taylor arithmetic.
//!
//! A [`SodeSystem`](crate::kcc::SodeSystem) writes its force functions `Gⁱ`
//! once, generically over [`Scalar`]. Evaluated on `f64` they give plain
//! values; evaluated on [`Taylor`] they give every partial derivative up to the
//! truncation order, exact up to rounding. The KCC engine uses this to build
//! connections and invariants without finite-difference noise.

use std::collections::HashMap;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

/// Arithmetic needed to write `Gⁱ(x, y, t)`.
///
/// Mixed operations take the `f64` on the right: write `x.clone() * 0.5`,
/// not `0.5 * x`.
pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// The point value (constant term).
    fn value(&self) -> f64;
    /// A constant with the same shape as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
}

/// Monomial bookkeeping shared by all [`Taylor`] values of one expansion.
///
/// Monomials are stored in graded order (all degree-0, then degree-1, ...),
/// so the coefficients of a lower-order truncation are a prefix.
#[derive(Debug)]
pub struct Layout {
    nvars: usize,
    max_order: usize,
    exponents: Vec<Vec<u8>>,
    /// `len_by_order[k]` = number of monomials of degree ≤ k.
    len_by_order: Vec<usize>,
    /// `(a, b, c)` with `m_a · m_b = m_c`, sorted by `c`.
    products: Vec<(u32, u32, u32)>,
    /// `raise[v][i]` = index of `m_i · z_v`, or `u32::MAX` past `max_order`.
    raise: Vec<Vec<u32>>,
}

impl Layout {
    pub fn new(nvars: usize, max_order: usize) -> Arc<Self> {
        let mut exponents: Vec<Vec<u8>> = Vec::new();
        let mut len_by_order = Vec::with_capacity(max_order + 1);
        for degree in 0..=max_order {
            push_monomials(nvars, degree, &mut Vec::new(), &mut exponents);
            len_by_order.push(exponents.len());
        }
        let positions: HashMap<Vec<u8>, usize> = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let lookup = |e: &[u8]| positions.get(e).copied();

        let mut products = Vec::new();
        for (a, ea) in exponents.iter().enumerate() {
            for (b, eb) in exponents.iter().enumerate() {
                let sum: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                if sum.iter().map(|&d| d as usize).sum::<usize>() <= max_order {
                    let c = lookup(&sum).expect("graded layout is closed under products");
                    products.push((a as u32, b as u32, c as u32));
                }
            }
        }
        products.sort_by_key(|&(_, _, c)| c);

        let raise = (0..nvars)
            .map(|v| {
                exponents
                    .iter()
                    .map(|e| {
                        let mut up = e.clone();
                        up[v] += 1;
                        lookup(&up).map_or(u32::MAX, |i| i as u32)
                    })
                    .collect()
            })
            .collect();

        Arc::new(Self {
            nvars,
            max_order,
            exponents,
            len_by_order,
            products,
            raise,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    fn len(&self, order: usize) -> usize {
        self.len_by_order[order]
    }

    fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.exponents.iter().position(|m| m.as_slice() == exps)
    }
}

fn push_monomials(nvars: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() == nvars - 1 {
        let used: usize = prefix.iter().map(|&d| d as usize).sum();
        let mut m = prefix.clone();
        m.push((degree - used) as u8);
        out.push(m);
        return;
    }
    let used: usize = prefix.iter().map(|&d| d as usize).sum();
    for d in (0..=degree - used).rev() {
        prefix.push(d as u8);
        push_monomials(nvars, degree, prefix, out);
        prefix.pop();
    }
}

/// A polynomial in `nvars` displacement variables, truncated at `order`.
///
/// Represents `f(p + z) = Σ c_α z^α` for `|α| ≤ order`, so the partial
/// derivative `∂^α f(p)` equals `c_α · α!`.
#[derive(Clone, Debug)]
pub struct Taylor {
    layout: Arc<Layout>,
    order: usize,
    coeffs: Vec<f64>,
}

impl Taylor {
    pub fn constant(layout: &Arc<Layout>, order: usize, c: f64) -> Self {
        assert!(order <= layout.max_order);
        let mut coeffs = vec![0.0; layout.len(order)];
        coeffs[0] = c;
        Self {
            layout: Arc::clone(layout),
            order,
            coeffs,
        }
    }

    /// The coordinate `value + z_var`.
    pub fn variable(layout: &Arc<Layout>, order: usize, var: usize, value: f64) -> Self {
        let mut t = Self::constant(layout, order, value);
        if order >= 1 {
            // degree-1 monomials follow the constant, with z_0 first
            t.coeffs[1 + var] = 1.0;
        }
        t
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// `∂/∂z_var`, which lowers the truncation order by one.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 truncation");
        let order = self.order - 1;
        let raise = &self.layout.raise[var];
        let coeffs = (0..self.layout.len(order))
            .map(|i| {
                let up = raise[i] as usize;
                self.coeffs[up] * f64::from(self.layout.exponents[i][var] + 1)
            })
            .collect();
        Self {
            layout: Arc::clone(&self.layout),
            order,
            coeffs,
        }
    }

    /// The mixed partial `∂^α f` at the expansion point, for exponent vector `alpha`.
    pub fn partial(&self, alpha: &[u8]) -> f64 {
        let degree: usize = alpha.iter().map(|&d| d as usize).sum();
        assert!(
            degree <= self.order,
            "partial of degree {degree} beyond order {}",
            self.order
        );
        let i = self.layout.index_of(alpha).expect("valid exponent vector");
        let factorial: f64 = alpha
            .iter()
            .map(|&d| (1..=d as u32).map(f64::from).product::<f64>())
            .product();
        self.coeffs[i] * factorial
    }

    fn truncated(&self, order: usize) -> Self {
        Self {
            layout: Arc::clone(&self.layout),
            order,
            coeffs: self.coeffs[..self.layout.len(order)].to_vec(),
        }
    }

    /// `Σ_k taylor[k] · (self − self₀)^k` for a univariate series of `f` at `self₀`.
    fn compose(&self, taylor: &[f64]) -> Self {
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut out = self.constant_like(taylor[self.order]);
        for k in (0..self.order).rev() {
            out = out * delta.clone();
            out.coeffs[0] += taylor[k];
        }
        out
    }

    fn check_layout(&self, other: &Self) {
        debug_assert!(
            Arc::ptr_eq(&self.layout, &other.layout),
            "Taylor operands from different layouts"
        );
    }
}

impl Add for Taylor {
    type Output = Taylor;
    fn add(self, rhs: Taylor) -> Taylor {
        self.check_layout(&rhs);
        let order = self.order.min(rhs.order);
        let mut out = self.truncated(order);
        for (o, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *o += r;
        }
        out
    }
}

impl Sub for Taylor {
    type Output = Taylor;
    fn sub(self, rhs: Taylor) -> Taylor {
        self.check_layout(&rhs);
        let order = self.order.min(rhs.order);
        let mut out = self.truncated(order);
        for (o, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *o -= r;
        }
        out
    }
}

impl Mul for Taylor {
    type Output = Taylor;
    fn mul(self, rhs: Taylor) -> Taylor {
        self.check_layout(&rhs);
        let order = self.order.min(rhs.order);
        let len = self.layout.len(order);
        let mut coeffs = vec![0.0; len];
        for &(a, b, c) in &self.layout.products {
            let c = c as usize;
            if c >= len {
                break;
            }
            coeffs[c] += self.coeffs[a as usize] * rhs.coeffs[b as usize];
        }
        Taylor {
            layout: self.layout,
            order,
            coeffs,
        }
    }
}

impl Div for Taylor {
    type Output = Taylor;
    fn div(self, rhs: Taylor) -> Taylor {
        let inv = rhs.powi(-1);
        self * inv
    }
}

impl Neg for Taylor {
    type Output = Taylor;
    fn neg(mut self) -> Taylor {
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl Add<f64> for Taylor {
    type Output = Taylor;
    fn add(mut self, rhs: f64) -> Taylor {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Taylor {
    type Output = Taylor;
    fn sub(mut self, rhs: f64) -> Taylor {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Taylor {
    type Output = Taylor;
    fn mul(mut self, rhs: f64) -> Taylor {
        self.coeffs.iter_mut().for_each(|c| *c *= rhs);
        self
    }
}

impl Div<f64> for Taylor {
    type Output = Taylor;
    fn div(mut self, rhs: f64) -> Taylor {
        self.coeffs.iter_mut().for_each(|c| *c /= rhs);
        self
    }
}

impl Scalar for Taylor {
    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn constant_like(&self, c: f64) -> Self {
        Taylor::constant(&self.layout, self.order, c)
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        let series: Vec<f64> = factorial_series(self.order, |k| e / factorial(k));
        self.compose(&series)
    }

    fn ln(&self) -> Self {
        let a = self.value();
        let series = factorial_series(self.order, |k| match k {
            0 => a.ln(),
            _ => {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign / (k as f64 * a.powi(k as i32))
            }
        });
        self.compose(&series)
    }

    fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let series = factorial_series(self.order, |k| cycle[k % 4] / factorial(k));
        self.compose(&series)
    }

    fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let series = factorial_series(self.order, |k| cycle[k % 4] / factorial(k));
        self.compose(&series)
    }

    fn sqrt(&self) -> Self {
        let a = self.value();
        // generalized binomial coefficients of (a + d)^(1/2)
        let mut coef = 1.0;
        let series = factorial_series(self.order, |k| {
            if k > 0 {
                coef *= (0.5 - (k as f64 - 1.0)) / k as f64;
            }
            coef * a.powf(0.5 - k as f64)
        });
        self.compose(&series)
    }

    fn powi(&self, n: i32) -> Self {
        if n < 0 {
            let a = self.value();
            let m = -n;
            // (a + d)^(-m) = Σ binom(-m, k) a^(-m-k) d^k
            let mut coef = 1.0;
            let series = factorial_series(self.order, |k| {
                if k > 0 {
                    coef *= (-(m as f64) - (k as f64 - 1.0)) / k as f64;
                }
                coef * a.powi(-m - k as i32)
            });
            return self.compose(&series);
        }
        let mut base = self.clone();
        let mut acc = self.constant_like(1.0);
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn factorial_series(order: usize, mut term: impl FnMut(usize) -> f64) -> Vec<f64> {
    (0..=order).map(&mut term).collect()
}
