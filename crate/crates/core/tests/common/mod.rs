#![allow(dead_code)]

use kcc_core::lorenz::{LorenzParams, ReducedState};
use proptest::prelude::*;

/// `|a − b| / max(|a|, |b|, 1)`: relative for large values, absolute near zero.
pub fn mixed_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// `|a − b| / max(|a|, |b|)`, zero when both are zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn params() -> impl Strategy<Value = LorenzParams> {
    (0.5f64..20.0, 0.2f64..60.0, 0.3f64..6.0).prop_map(|(s, r, b)| LorenzParams::new(s, r, b).unwrap())
}

/// Parameters with `ρ > 1`, so that `S±` exist.
pub fn params_above_one() -> impl Strategy<Value = LorenzParams> {
    (0.5f64..20.0, 1.05f64..60.0, 0.3f64..6.0).prop_map(|(s, r, b)| LorenzParams::new(s, r, b).unwrap())
}

/// Reduced states in the range visited by the classic attractor.
pub fn reduced_state() -> impl Strategy<Value = ReducedState> {
    (-25.0f64..25.0, -5.0f64..55.0, -300.0f64..300.0, -800.0f64..800.0)
        .prop_map(|(x1, x2, y1, y2)| ReducedState::new(x1, x2, y1, y2))
}
