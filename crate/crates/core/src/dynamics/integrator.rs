//! Fixed-step RK4 and adaptive Dormand–Prince 5(4) over `[T; N]`.
//!
//! Both integrators land exactly on the requested sample times, so output
//! rows are reproducible bit for bit.

use std::ops::{Add, Mul, Sub};

use serde::Serialize;
use twofloat::TwoFloat;

use super::DynamicsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed { step: f64 },
    Rk45Adaptive { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    pub sample_every: f64,
}

impl IntegratorConfig {
    pub fn rk4(step: f64, t_end: f64, sample_every: f64) -> Self {
        Self {
            method: Method::Rk4Fixed { step },
            t_end,
            sample_every,
        }
    }

    /// Adaptive with `abs_tol = rel_tol = tol`.
    pub fn adaptive(tol: f64, t_end: f64, sample_every: f64) -> Self {
        Self {
            method: Method::Rk45Adaptive {
                abs_tol: tol,
                rel_tol: tol,
            },
            t_end,
            sample_every,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |msg: String| Err(DynamicsError::Config(msg));
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be finite and non-negative, got {}", self.t_end));
        }
        if !(self.sample_every.is_finite() && self.sample_every > 0.0) {
            return bad(format!("sample_every must be positive, got {}", self.sample_every));
        }
        match self.method {
            Method::Rk4Fixed { step } => {
                if !(step.is_finite() && step > 0.0) {
                    return bad(format!("step must be positive, got {step}"));
                }
                if self.sample_every < step {
                    return bad(format!(
                        "sample_every ({}) must not be smaller than the step ({step})",
                        self.sample_every
                    ));
                }
            }
            Method::Rk45Adaptive { abs_tol, rel_tol } => {
                if !(abs_tol.is_finite() && abs_tol > 0.0 && rel_tol.is_finite() && rel_tol > 0.0) {
                    return bad(format!("tolerances must be positive, got {abs_tol}, {rel_tol}"));
                }
            }
        }
        Ok(())
    }

    /// `0, s, 2s, …` up to `t_end`, with `t_end` appended when it is off the grid.
    pub fn sample_times(&self) -> Vec<f64> {
        let s = self.sample_every;
        let n = (self.t_end / s + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|k| (k as f64 * s).min(self.t_end)).collect();
        if n > 0 && self.t_end - times[n] <= 1e-9 * s {
            times[n] = self.t_end;
        } else if self.t_end > times[n] {
            times.push(self.t_end);
        }
        times
    }
}

/// Element type of an integrated state.
///
/// Time and step sizes stay `f64`; only the state and the Runge–Kutta
/// weights use `Self`, so an extended-precision type keeps stiff invariants
/// that `f64` rounding would excite.
pub trait OdeScalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// `n/d` rounded once in `Self`.
    fn ratio(n: f64, d: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl OdeScalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn ratio(n: f64, d: f64) -> Self {
        n / d
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl OdeScalar for TwoFloat {
    fn from_f64(v: f64) -> Self {
        TwoFloat::from(v)
    }
    fn ratio(n: f64, d: f64) -> Self {
        TwoFloat::new_div(n, d)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
}

/// Sampled solution of an ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize, T = f64> {
    pub times: Vec<f64>,
    pub states: Vec<[T; N]>,
}

/// Integrates `ẏ = f(t, y)` from `t = 0`.
///
/// `abs_scale` multiplies the absolute tolerance per component, so variables
/// of very different magnitude can share one configuration.
pub fn integrate<T: OdeScalar, const N: usize, F>(
    mut f: F,
    y0: [T; N],
    cfg: &IntegratorConfig,
    abs_scale: [f64; N],
) -> Result<Solution<N, T>, DynamicsError>
where
    F: FnMut(f64, &[T; N]) -> Result<[T; N], DynamicsError>,
{
    cfg.validate()?;
    if !all_finite(&y0) {
        return Err(DynamicsError::NonFinite { t: 0.0 });
    }
    let times = cfg.sample_times();
    let mut states = Vec::with_capacity(times.len());
    states.push(y0);
    match cfg.method {
        Method::Rk4Fixed { step } => {
            let mut y = y0;
            for w in times.windows(2) {
                let (t0, t1) = (w[0], w[1]);
                let n = ((t1 - t0) / step - 1e-9).ceil().max(1.0) as usize;
                let h = (t1 - t0) / n as f64;
                for k in 0..n {
                    let t = t0 + k as f64 * h;
                    y = rk4_step(&mut f, t, &y, h)?;
                    if !all_finite(&y) {
                        return Err(DynamicsError::NonFinite { t: t + h });
                    }
                }
                states.push(y);
            }
        }
        Method::Rk45Adaptive { abs_tol, rel_tol } => {
            let mut atol = abs_scale;
            atol.iter_mut().for_each(|a| *a *= abs_tol);
            let mut stepper = Dopri::new(&mut f, y0, atol, rel_tol, cfg.t_end)?;
            for &t1 in &times[1..] {
                stepper.advance_to(&mut f, t1)?;
                states.push(stepper.y);
            }
        }
    }
    Ok(Solution { times, states })
}

fn all_finite<T: OdeScalar, const N: usize>(y: &[T; N]) -> bool {
    y.iter().all(|v| v.to_f64().is_finite())
}

/// `y + h Σ cⱼ kⱼ`.
fn axpy<T: OdeScalar, const N: usize>(y: &[T; N], h: f64, terms: &[(T, &[T; N])]) -> [T; N] {
    std::array::from_fn(|i| {
        let sum = terms
            .iter()
            .skip(1)
            .fold(terms[0].0 * terms[0].1[i], |acc, (c, k)| acc + *c * k[i]);
        y[i] + sum * h
    })
}

fn rk4_step<T: OdeScalar, const N: usize, F>(f: &mut F, t: f64, y: &[T; N], h: f64) -> Result<[T; N], DynamicsError>
where
    F: FnMut(f64, &[T; N]) -> Result<[T; N], DynamicsError>,
{
    let half = T::from_f64(0.5);
    let (sixth, third) = (T::ratio(1.0, 6.0), T::ratio(1.0, 3.0));
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, h, &[(half, &k1)]))?;
    let k3 = f(t + 0.5 * h, &axpy(y, h, &[(half, &k2)]))?;
    let k4 = f(t + h, &axpy(y, h, &[(T::from_f64(1.0), &k3)]))?;
    Ok(axpy(y, h, &[(sixth, &k1), (third, &k2), (third, &k3), (sixth, &k4)]))
}

/// Dormand–Prince 5(4) tableau as exact ratios rounded in `T`.
struct Tableau<T> {
    c: [f64; 7],
    /// Row `s` holds the `s` weights of stage `s + 1`.
    a: [Vec<T>; 6],
    /// Fifth-order weights (the second is zero and skipped).
    b: [T; 5],
    /// Fifth-order minus embedded fourth-order weights.
    e: [f64; 7],
}

impl<T: OdeScalar> Tableau<T> {
    fn new() -> Self {
        let r = |row: &[(f64, f64)]| row.iter().map(|&(n, d)| T::ratio(n, d)).collect::<Vec<_>>();
        Self {
            c: [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0],
            a: [
                r(&[(1.0, 5.0)]),
                r(&[(3.0, 40.0), (9.0, 40.0)]),
                r(&[(44.0, 45.0), (-56.0, 15.0), (32.0, 9.0)]),
                r(&[
                    (19372.0, 6561.0),
                    (-25360.0, 2187.0),
                    (64448.0, 6561.0),
                    (-212.0, 729.0),
                ]),
                r(&[
                    (9017.0, 3168.0),
                    (-355.0, 33.0),
                    (46732.0, 5247.0),
                    (49.0, 176.0),
                    (-5103.0, 18656.0),
                ]),
                Vec::new(),
            ],
            b: [
                T::ratio(35.0, 384.0),
                T::ratio(500.0, 1113.0),
                T::ratio(125.0, 192.0),
                T::ratio(-2187.0, 6784.0),
                T::ratio(11.0, 84.0),
            ],
            e: [
                71.0 / 57600.0,
                0.0,
                -71.0 / 16695.0,
                71.0 / 1920.0,
                -17253.0 / 339200.0,
                22.0 / 525.0,
                -1.0 / 40.0,
            ],
        }
    }
}

struct Dopri<T, const N: usize> {
    t: f64,
    y: [T; N],
    /// `f(t, y)`, reused as the first stage (first same as last).
    k1: [T; N],
    h: f64,
    atol: [f64; N],
    rtol: f64,
    tableau: Tableau<T>,
}

impl<T: OdeScalar, const N: usize> Dopri<T, N> {
    fn new<F>(f: &mut F, y0: [T; N], atol: [f64; N], rtol: f64, t_end: f64) -> Result<Self, DynamicsError>
    where
        F: FnMut(f64, &[T; N]) -> Result<[T; N], DynamicsError>,
    {
        let k1 = f(0.0, &y0)?;
        let mut s = Self {
            t: 0.0,
            y: y0,
            k1,
            h: 0.0,
            atol,
            rtol,
            tableau: Tableau::new(),
        };
        s.h = s.initial_step(f, t_end)?;
        Ok(s)
    }

    fn rms(&self, v: &[f64; N], reference: &[f64; N]) -> f64 {
        let sum: f64 = (0..N)
            .map(|i| {
                let sc = self.atol[i] + self.rtol * reference[i].abs();
                (v[i] / sc).powi(2)
            })
            .sum();
        (sum / N as f64).sqrt()
    }

    fn initial_step<F>(&self, f: &mut F, t_end: f64) -> Result<f64, DynamicsError>
    where
        F: FnMut(f64, &[T; N]) -> Result<[T; N], DynamicsError>,
    {
        let y = self.y.map(T::to_f64);
        let k1 = self.k1.map(T::to_f64);
        let d0 = self.rms(&y, &y);
        let d1 = self.rms(&k1, &y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(t_end.max(1e-6));
        let f1 = f(h0, &axpy(&self.y, h0, &[(T::from_f64(1.0), &self.k1)]))?;
        let diff: [f64; N] = std::array::from_fn(|i| (f1[i] - self.k1[i]).to_f64());
        let d2 = self.rms(&diff, &y) / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dmax).powf(0.2)
        };
        Ok((100.0 * h0).min(h1))
    }

    fn advance_to<F>(&mut self, f: &mut F, t_target: f64) -> Result<(), DynamicsError>
    where
        F: FnMut(f64, &[T; N]) -> Result<[T; N], DynamicsError>,
    {
        let mut last_failure_non_finite = false;
        while self.t < t_target {
            let remaining = t_target - self.t;
            let landing = self.h >= remaining * (1.0 - 1e-12);
            let h = if landing { remaining } else { self.h };
            if h < 16.0 * f64::EPSILON * self.t.abs().max(1.0) {
                return Err(if last_failure_non_finite {
                    DynamicsError::NonFinite { t: self.t }
                } else {
                    DynamicsError::StepSizeUnderflow { t: self.t }
                });
            }
            let (y_new, k7, err) = self.trial(f, h)?;
            if err.is_finite() && err <= 1.0 {
                self.t = if landing { t_target } else { self.t + h };
                self.y = y_new;
                self.k1 = k7;
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // a short landing step should not throttle the next one
                self.h = if landing { self.h.max(h * grow) } else { h * grow };
                last_failure_non_finite = false;
            } else {
                last_failure_non_finite = !err.is_finite();
                let shrink = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).max(0.2)
                } else {
                    0.2
                };
                self.h = h * shrink;
            }
        }
        Ok(())
    }

    /// One trial step: new state, `f` at the new state, scaled error norm.
    fn trial<F>(&self, f: &mut F, h: f64) -> Result<([T; N], [T; N], f64), DynamicsError>
    where
        F: FnMut(f64, &[T; N]) -> Result<[T; N], DynamicsError>,
    {
        let tab = &self.tableau;
        let (t, y) = (self.t, &self.y);
        let mut ks: Vec<[T; N]> = Vec::with_capacity(7);
        ks.push(self.k1);
        for s in 1..6 {
            let terms: Vec<(T, &[T; N])> = tab.a[s - 1].iter().copied().zip(ks.iter()).collect();
            let k = f(t + tab.c[s] * h, &axpy(y, h, &terms))?;
            ks.push(k);
        }
        let y_new = axpy(
            y,
            h,
            &[
                (tab.b[0], &ks[0]),
                (tab.b[1], &ks[2]),
                (tab.b[2], &ks[3]),
                (tab.b[3], &ks[4]),
                (tab.b[4], &ks[5]),
            ],
        );
        if !all_finite(&y_new) {
            return Ok((y_new, y_new, f64::NAN));
        }
        let k7 = f(t + h, &y_new)?;
        ks.push(k7);
        let err_vec: [f64; N] = std::array::from_fn(|i| h * (0..7).map(|s| tab.e[s] * ks[s][i].to_f64()).sum::<f64>());
        let reference: [f64; N] = std::array::from_fn(|i| y[i].to_f64().abs().max(y_new[i].to_f64().abs()));
        Ok((y_new, k7, self.rms(&err_vec, &reference)))
    }
}
