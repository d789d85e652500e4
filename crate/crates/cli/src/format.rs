//! Locale-independent float text: shortest representation that parses back
//! to the same `f64`, so never more than 17 significant digits.

/// Plain notation for `1e-5 ≤ |x| < 1e16`, exponent notation otherwise.
/// Non-finite values are written `NaN`, `inf`, `-inf`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        if x.is_nan() {
            "NaN".to_owned()
        } else {
            format!("{x}")
        }
    } else {
        format!("{x:e}")
    }
}

/// Empty string for `None`.
pub fn format_opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

pub fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

/// `None` for an empty cell, `Some(Err)` for text that is not a number.
pub fn parse_opt(s: &str) -> Option<Result<f64, String>> {
    let s = s.trim();
    (!s.is_empty()).then(|| parse_f64(s).ok_or_else(|| format!("not a number: {s:?}")))
}
