//! Closed-form deviation vector at the origin and the sign change of its curvature.
//!
//! With coefficients frozen at `S0` the deviation equations decouple into
//! `ξ̈¹ + bξ̇¹ + (1−ρ)σξ¹ = 0` and `ξ̈² = β²ξ²`, `b = σ + 1`. For
//! `ξ(0) = 0`, `ξ̇(0) = (ξ₁₀, ξ₂₀)`:
//!
//! ```text
//! ξ¹(t) = ξ₁₀ e^{−bt/2} · 2 sinh(at/2)/a,   a = √(4ρσ + (σ−1)²)
//! ξ²(t) = ξ₂₀ sinh(βt)/β
//! ```

use serde::Serialize;

use super::deviation::kappa0;
use super::DynamicsError;
use crate::lorenz::LorenzParams;

/// Default right end of the search interval for [`find_t0`].
pub const DEFAULT_T0_SEARCH_MAX: f64 = 1.0;

/// `sinh(x)/x`, continuous at `x = 0`.
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct S0DeviationSolution {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub xi10: f64,
    pub xi20: f64,
    /// `(1 − ρ)σ`, the restoring coefficient of `ξ¹`.
    stiffness: f64,
}

impl S0DeviationSolution {
    pub fn new(p: &LorenzParams, xi10: f64, xi20: f64) -> Result<Self, DynamicsError> {
        let (sigma, rho) = (p.sigma(), p.rho());
        let a2 = 4.0 * rho * sigma + (sigma - 1.0).powi(2);
        if a2 < 0.0 {
            return Err(DynamicsError::Domain(format!(
                "4 rho sigma + (sigma - 1)^2 = {a2} < 0: the S0 solution oscillates and has no real form"
            )));
        }
        Ok(Self {
            a: a2.sqrt(),
            b: sigma + 1.0,
            beta: p.beta(),
            xi10,
            xi20,
            stiffness: (1.0 - rho) * sigma,
        })
    }

    pub fn xi(&self, t: f64) -> [f64; 2] {
        [
            self.xi10 * (-0.5 * self.b * t).exp() * t * sinhc(0.5 * self.a * t),
            self.xi20 * t * sinhc(self.beta * t),
        ]
    }

    pub fn xi_dot(&self, t: f64) -> [f64; 2] {
        let h = 0.5 * self.a * t;
        [
            self.xi10 * (-0.5 * self.b * t).exp() * (h.cosh() - 0.5 * self.b * t * sinhc(h)),
            self.xi20 * (self.beta * t).cosh(),
        ]
    }

    pub fn xi_ddot(&self, t: f64) -> [f64; 2] {
        let [x1, x2] = self.xi(t);
        let [v1, _] = self.xi_dot(t);
        [-self.b * v1 - self.stiffness * x1, self.beta * self.beta * x2]
    }

    pub fn norm(&self, t: f64) -> f64 {
        let [x1, x2] = self.xi(t);
        (x1 * x1 + x2 * x2).sqrt()
    }

    /// `κ₀` from the closed-form first and second derivatives.
    pub fn kappa0(&self, t: f64) -> Option<f64> {
        kappa0(self.xi_dot(t), self.xi_ddot(t))
    }

    /// `κ₀` written out in terms of `a` and `b`:
    ///
    /// ```text
    /// κ₀ = ξ₁₀ξ₂₀ e^{−bt/2} [bracket] / (8a · |ξ̇|³)
    /// |ξ̇|² = ξ₁₀²/(4a²) [(a−b)e^{at/2} + (a+b)e^{−at/2}]² e^{−bt} + ξ₂₀²/4 [e^{βt} + e^{−βt}]²
    /// ```
    ///
    /// Requires `a > 0`.
    pub fn kappa0_explicit(&self, t: f64) -> f64 {
        let (a, b, beta) = (self.a, self.b, self.beta);
        let bracket = (a - b) * (2.0 * beta - a + b) * ((0.5 * a + beta) * t).exp()
            + (a - b) * (b - 2.0 * beta - a) * ((0.5 * a - beta) * t).exp()
            + (a + b) * (2.0 * beta + a + b) * ((-0.5 * a + beta) * t).exp()
            + (a + b) * (a + b - 2.0 * beta) * ((-0.5 * a - beta) * t).exp();
        let num = self.xi10 * self.xi20 / (8.0 * a) * (-0.5 * b * t).exp() * bracket;
        let v1 = (a - b) * (0.5 * a * t).exp() + (a + b) * (-0.5 * a * t).exp();
        let v2 = (beta * t).exp() + (-beta * t).exp();
        let speed2 =
            self.xi10 * self.xi10 / (4.0 * a * a) * v1 * v1 * (-b * t).exp() + self.xi20 * self.xi20 / 4.0 * v2 * v2;
        num / speed2.powf(1.5)
    }

    /// The bracket of [`Self::kappa0_explicit`] times `e^{−(a/2+β)t}`.
    ///
    /// It carries the sign of `κ₀ · ξ₁₀ξ₂₀` and does not depend on
    /// `ξ₁₀, ξ₂₀` at all. Equals `8ab` at `t = 0`.
    pub fn numerator_bracket(&self, t: f64) -> f64 {
        let (a, b, beta) = (self.a, self.b, self.beta);
        (a - b) * (2.0 * beta - a + b)
            + (a - b) * (b - 2.0 * beta - a) * (-2.0 * beta * t).exp()
            + (a + b) * (2.0 * beta + a + b) * (-a * t).exp()
            + (a + b) * (a + b - 2.0 * beta) * (-(a + 2.0 * beta) * t).exp()
    }

    /// Large-time estimate of `δ(t) = ln(ξ(t)/ξ₁₀)/t`:
    /// `(1/2t) ln[(ξ₂₀/ξ₁₀)² e^{2βt}/(4β²) + e^{(a−b)t}/a²]`,
    /// evaluated in log-sum-exp form so it does not overflow.
    pub fn delta_estimate(&self, t: f64) -> f64 {
        let r = self.xi20 / self.xi10;
        let l1 = 2.0 * r.abs().ln() + 2.0 * self.beta * t - (4.0 * self.beta * self.beta).ln();
        let l2 = (self.a - self.b) * t - 2.0 * self.a.ln();
        let (hi, lo) = if l1 > l2 { (l1, l2) } else { (l2, l1) };
        (hi + (lo - hi).exp().ln_1p()) / (2.0 * t)
    }

    /// `lim δ₁ = (a − b)/2`.
    pub fn delta1_limit(&self) -> f64 {
        0.5 * (self.a - self.b)
    }
}

/// `1.099/(ρ + 10.02)`, the linearized estimate of the curvature sign change.
pub fn t0_approximation(rho: f64) -> f64 {
    1.099 / (rho + 10.02)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct T0Report {
    /// First positive zero of `κ₀`.
    pub t0: f64,
    pub approximation: f64,
    /// `(t0 − approximation)/approximation`.
    pub relative_deviation: f64,
    /// Diagnostics: the two deviation components at `t0`.
    pub xi1_at_t0: f64,
    pub xi2_at_t0: f64,
}

const T0_SAMPLES: usize = 4000;
const T0_TOL: f64 = 1e-10;

/// First positive zero of `κ₀` on `(0, t_max]` for the `S0` solution.
///
/// Samples the sign of [`S0DeviationSolution::numerator_bracket`] and refines
/// the first sign change by bisection to `1e-10`. The result depends only on
/// `(σ, ρ, β)`; `ξ₁₀, ξ₂₀` enter only the diagnostics.
pub fn find_t0(p: &LorenzParams, xi10: f64, xi20: f64, t_max: f64) -> Result<T0Report, DynamicsError> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(DynamicsError::Config(format!(
            "t0 search bound must be positive, got {t_max}"
        )));
    }
    let sol = S0DeviationSolution::new(p, xi10, xi20)?;
    let f = |t: f64| sol.numerator_bracket(t);
    let sample = |k: usize| t_max * k as f64 / T0_SAMPLES as f64;

    let mut lo = 0.0;
    let mut f_lo = f(0.0);
    let mut hi = None;
    for k in 1..=T0_SAMPLES {
        let t = sample(k);
        let ft = f(t);
        if ft == 0.0 {
            lo = t;
            hi = Some(t);
            break;
        }
        if ft.signum() != f_lo.signum() {
            hi = Some(t);
            break;
        }
        lo = t;
        f_lo = ft;
    }
    let Some(mut hi) = hi else {
        let signs: String = (0..=20)
            .map(|k| match f(t_max * k as f64 / 20.0) {
                v if v > 0.0 => '+',
                v if v < 0.0 => '-',
                _ => '0',
            })
            .collect();
        return Err(DynamicsError::NoRoot { t_max, signs });
    };
    while hi - lo > T0_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
        } else if fm.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t0 = 0.5 * (lo + hi);
    let approximation = t0_approximation(p.rho());
    let [xi1_at_t0, xi2_at_t0] = sol.xi(t0);
    Ok(T0Report {
        t0,
        approximation,
        relative_deviation: (t0 - approximation) / approximation,
        xi1_at_t0,
        xi2_at_t0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classic() -> S0DeviationSolution {
        S0DeviationSolution::new(&LorenzParams::classic(), 1e-10, 1e-9).unwrap()
    }

    #[test]
    fn initial_values() {
        let s = classic();
        assert_eq!(s.xi(0.0), [0.0, 0.0]);
        assert_eq!(s.xi_dot(0.0), [1e-10, 1e-9]);
        assert_eq!(s.b, 11.0);
        assert!((s.delta1_limit() - 0.5 * (1201f64.sqrt() - 11.0)).abs() < 1e-14);
        assert!((s.numerator_bracket(0.0) - 8.0 * s.a * s.b).abs() < 1e-10);
    }

    #[test]
    fn kappa0_at_origin() {
        let s = classic();
        let r: f64 = 10.0;
        let want = 11.0 * r / ((1.0 + r * r).powf(1.5) * 1e-10);
        let got = s.kappa0(0.0).unwrap();
        assert!((got - want).abs() < 1e-12 * want);
        assert!((s.kappa0_explicit(0.0) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn explicit_and_derivative_forms_agree() {
        let s = classic();
        for k in 0..=100 {
            let t = k as f64 * 0.01;
            let a = s.kappa0(t).unwrap();
            let b = s.kappa0_explicit(t);
            assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()), "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn degenerate_limits() {
        // a = 0 needs 4ρσ = −(σ−1)²
        let p = LorenzParams::new(3.0, -1.0 / 3.0, 0.0).unwrap();
        let s = S0DeviationSolution::new(&p, 2.0, 3.0).unwrap();
        assert_eq!(s.a, 0.0);
        let t = 0.7;
        assert!((s.xi(t)[0] - t * (-2.0 * t).exp() * 2.0).abs() < 1e-15);
        assert!((s.xi(t)[1] - 3.0 * t).abs() < 1e-15);
        let oscillating = LorenzParams::new(10.0, -5.0, 1.0).unwrap();
        assert!(matches!(
            S0DeviationSolution::new(&oscillating, 1.0, 1.0),
            Err(DynamicsError::Domain(_))
        ));
    }

    #[test]
    fn t0_root_is_a_zero_of_kappa0() {
        let p = LorenzParams::classic();
        let r = find_t0(&p, 1e-10, 1e-9, DEFAULT_T0_SEARCH_MAX).unwrap();
        let s = classic();
        assert!(s.numerator_bracket(r.t0 - 1e-8) > 0.0);
        assert!(s.numerator_bracket(r.t0 + 1e-8) < 0.0);
        assert!((r.approximation - 0.028910).abs() < 1e-5);
    }

    #[test]
    fn no_root_is_reported() {
        let p = LorenzParams::classic();
        match find_t0(&p, 1e-10, 1e-9, 0.01) {
            Err(DynamicsError::NoRoot { signs, .. }) => assert!(signs.chars().all(|c| c == '+')),
            other => panic!("unexpected {other:?}"),
        }
    }
}
