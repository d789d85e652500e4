//! Stability reports and per-sample rows, rendered as JSON or CSV from the
//! same values.

use kcc_core::lorenz::{equilibria, rho_crit, EquilibriumAnalysis, EquilibriumKind, LorenzParams};
use kcc_core::SpectralSummary;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::CliError;
use crate::format::{format_f64, format_opt};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl From<&LorenzParams> for ParamsEcho {
    fn from(p: &LorenzParams) -> Self {
        Self {
            sigma: p.sigma(),
            rho: p.rho(),
            beta: p.beta(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<num_complex::Complex64> for ComplexValue {
    fn from(z: num_complex::Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    JacobiStable,
    JacobiUnstable,
    /// A stability condition is exactly zero.
    Marginal,
}

impl Classification {
    pub fn of(s: &SpectralSummary) -> Self {
        if s.jacobi_stable {
            Self::JacobiStable
        } else if s.marginal {
            Self::Marginal
        } else {
            Self::JacobiUnstable
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::JacobiStable => "jacobi_stable",
            Self::JacobiUnstable => "jacobi_unstable",
            Self::Marginal => "marginal",
        }
    }
}

/// Phase-space position `(X, Y, Z)`; `Y = X` at every equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Linearization of the `(X, Y)` subsystem at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearReport {
    pub tau: f64,
    pub delta: f64,
    pub lambda1: ComplexValue,
    pub lambda2: ComplexValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    pub location: Location,
    /// `p_matrix[i][j] = Pⁱⱼ`.
    pub p_matrix: [[f64; 2]; 2],
    pub lambda_plus: ComplexValue,
    pub lambda_minus: ComplexValue,
    pub kappa: f64,
    pub theta: ComplexValue,
    pub condition1: f64,
    pub condition2: f64,
    pub classification: Classification,
    pub linear: Option<LinearReport>,
}

impl EquilibriumReport {
    fn new(p: &LorenzParams, e: &EquilibriumAnalysis) -> Self {
        let linear = (e.kind == EquilibriumKind::S0).then(|| {
            let lin = kcc_core::lorenz::linear_stability_s0(p);
            LinearReport {
                tau: lin.tau,
                delta: lin.delta,
                lambda1: lin.lambda1.into(),
                lambda2: lin.lambda2.into(),
            }
        });
        Self {
            kind: e.kind,
            location: Location {
                x: e.x1_star,
                y: e.x1_star,
                z: e.x2_star,
            },
            p_matrix: e.p_matrix,
            lambda_plus: e.spectrum.lambda_plus.into(),
            lambda_minus: e.spectrum.lambda_minus.into(),
            kappa: e.spectrum.kappa,
            theta: e.spectrum.theta.into(),
            condition1: e.theorem_condition1,
            condition2: e.theorem_condition2,
            classification: Classification::of(&e.spectrum),
            linear,
        }
    }
}

/// Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub params: ParamsEcho,
    /// `σ(σ+β+3)/(σ−β−1)`, present when `σ > β + 1`.
    pub rho_crit: Option<f64>,
    pub equilibria: Vec<EquilibriumReport>,
}

impl StabilityReport {
    pub fn new(p: &LorenzParams) -> Result<Self, CliError> {
        let equilibria = equilibria(p)?.iter().map(|e| EquilibriumReport::new(p, e)).collect();
        Ok(Self {
            params: p.into(),
            rho_crit: rho_crit(p),
            equilibria,
        })
    }

    pub const CSV_HEADERS: [&'static str; 28] = [
        "sigma",
        "rho",
        "beta",
        "rho_crit",
        "equilibrium",
        "x",
        "y",
        "z",
        "p11",
        "p12",
        "p21",
        "p22",
        "lambda_plus_re",
        "lambda_plus_im",
        "lambda_minus_re",
        "lambda_minus_im",
        "kappa",
        "theta_re",
        "theta_im",
        "condition1",
        "condition2",
        "classification",
        "linear_tau",
        "linear_delta",
        "linear_lambda1_re",
        "linear_lambda1_im",
        "linear_lambda2_re",
        "linear_lambda2_im",
    ];

    /// One row per equilibrium.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&Self::CSV_HEADERS);
        let f = format_f64;
        for e in &self.equilibria {
            let [[p11, p12], [p21, p22]] = e.p_matrix;
            let lin = e.linear.as_ref();
            let mut row = vec![
                f(self.params.sigma),
                f(self.params.rho),
                f(self.params.beta),
                format_opt(self.rho_crit),
                e.kind.label().to_owned(),
                f(e.location.x),
                f(e.location.y),
                f(e.location.z),
                f(p11),
                f(p12),
                f(p21),
                f(p22),
                f(e.lambda_plus.re),
                f(e.lambda_plus.im),
                f(e.lambda_minus.re),
                f(e.lambda_minus.im),
                f(e.kappa),
                f(e.theta.re),
                f(e.theta.im),
                f(e.condition1),
                f(e.condition2),
                e.classification.as_str().to_owned(),
            ];
            row.extend(
                [
                    lin.map(|l| l.tau),
                    lin.map(|l| l.delta),
                    lin.map(|l| l.lambda1.re),
                    lin.map(|l| l.lambda1.im),
                    lin.map(|l| l.lambda2.re),
                    lin.map(|l| l.lambda2.im),
                ]
                .map(format_opt),
            );
            t.push(row);
        }
        t
    }
}

/// One sweep point: the full report plus the optional curvature root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(flatten)]
    pub report: StabilityReport,
    /// `None` when not requested, `Some(None)` when no root was found.
    #[serde(default, deserialize_with = "present", skip_serializing_if = "Option::is_none")]
    pub t0: Option<Option<f64>>,
}

/// Keeps an explicit `null` apart from an absent field.
fn present<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Option<f64>>, D::Error> {
    Option::<f64>::deserialize(d).map(Some)
}

const SWEEP_KINDS: [(EquilibriumKind, &str); 3] = [
    (EquilibriumKind::S0, "s0"),
    (EquilibriumKind::SPlus, "splus"),
    (EquilibriumKind::SMinus, "sminus"),
];

/// Compact sweep table: parameters, then condition values and classification
/// per equilibrium (empty where the equilibrium does not exist), then `t0`
/// when requested.
pub fn sweep_table(points: &[SweepPoint], with_t0: bool) -> Table {
    let mut headers = vec![
        "sigma".to_owned(),
        "rho".to_owned(),
        "beta".to_owned(),
        "rho_crit".to_owned(),
    ];
    for (_, name) in SWEEP_KINDS {
        for col in ["condition1", "condition2", "classification"] {
            headers.push(format!("{name}_{col}"));
        }
    }
    if with_t0 {
        headers.push("t0".to_owned());
    }
    let mut t = Table::new(&headers);
    for pt in points {
        let r = &pt.report;
        let mut row = vec![
            format_f64(r.params.sigma),
            format_f64(r.params.rho),
            format_f64(r.params.beta),
            format_opt(r.rho_crit),
        ];
        for (kind, _) in SWEEP_KINDS {
            match r.equilibria.iter().find(|e| e.kind == kind) {
                Some(e) => row.extend([
                    format_f64(e.condition1),
                    format_f64(e.condition2),
                    e.classification.as_str().to_owned(),
                ]),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
        }
        if with_t0 {
            row.push(format_opt(pt.t0.flatten()));
        }
        t.push(row);
    }
    t
}

/// One trajectory sample with `P` from the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
}

impl TrajectoryRow {
    pub const CSV_HEADERS: [&'static str; 8] = ["t", "X", "Y", "Z", "P11", "P12", "P21", "P22"];

    pub fn table(rows: &[Self]) -> Table {
        let mut t = Table::new(&Self::CSV_HEADERS);
        for r in rows {
            t.push(
                [r.t, r.x, r.y, r.z, r.p11, r.p12, r.p21, r.p22]
                    .map(format_f64)
                    .to_vec(),
            );
        }
        t
    }
}

/// One deviation sample. Undefined exponents and curvature are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub t: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub xi_norm: f64,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub delta: Option<f64>,
    pub kappa0: Option<f64>,
}

impl DeviationRow {
    pub const CSV_HEADERS: [&'static str; 8] = ["t", "xi1", "xi2", "xi_norm", "delta1", "delta2", "delta", "kappa0"];

    pub fn table(rows: &[Self]) -> Table {
        let mut t = Table::new(&Self::CSV_HEADERS);
        for r in rows {
            t.push(
                [
                    Some(r.t),
                    Some(r.xi1),
                    Some(r.xi2),
                    Some(r.xi_norm),
                    r.delta1,
                    r.delta2,
                    r.delta,
                    r.kappa0,
                ]
                .map(format_opt)
                .to_vec(),
            );
        }
        t
    }
}

/// Pretty JSON with a trailing newline. serde_json writes floats in shortest
/// round-trip form and keeps struct field order.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report types always serialize");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_report() {
        let r = StabilityReport::new(&LorenzParams::classic()).unwrap();
        assert_eq!(r.equilibria.len(), 3);
        assert!(r
            .equilibria
            .iter()
            .all(|e| e.classification == Classification::JacobiUnstable));
        assert!((r.rho_crit.unwrap() - 24.736842105263158).abs() < 1e-12);
        let s0 = &r.equilibria[0];
        assert_eq!(s0.lambda_plus, ComplexValue { re: 300.25, im: 0.0 });
        assert_eq!(s0.linear.unwrap().tau, -11.0);
        assert!(r.equilibria[1].linear.is_none());
        assert_eq!(r.equilibria[1].location.x, r.equilibria[1].location.y);
    }

    #[test]
    fn json_layout() {
        let r = StabilityReport::new(&LorenzParams::new(10.0, 0.5, 8.0 / 3.0).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&to_json(&r)).unwrap();
        assert_eq!(v["equilibria"].as_array().unwrap().len(), 1);
        assert_eq!(v["equilibria"][0]["kind"], "S0");
        assert_eq!(v["equilibria"][0]["classification"], "jacobi_unstable");
        assert_eq!(v["params"]["rho"], 0.5);
        let keys: Vec<_> = serde_json::to_string(&r)
            .unwrap()
            .match_indices("\"params\"")
            .map(|m| m.0)
            .collect();
        assert_eq!(keys, vec![1]);
    }

    #[test]
    fn sweep_row_blanks_missing_equilibria() {
        let pts: Vec<SweepPoint> = [0.5, 28.0]
            .iter()
            .map(|&rho| SweepPoint {
                report: StabilityReport::new(&LorenzParams::new(10.0, rho, 8.0 / 3.0).unwrap()).unwrap(),
                t0: Some(None),
            })
            .collect();
        let t = sweep_table(&pts, true);
        assert_eq!(
            t.text_column("splus_classification").unwrap(),
            vec!["", "jacobi_unstable"]
        );
        assert_eq!(t.text_column("t0").unwrap(), vec!["", ""]);
    }

    #[test]
    fn sweep_point_keeps_missing_and_absent_t0_apart() {
        let report = StabilityReport::new(&LorenzParams::classic()).unwrap();
        for t0 in [None, Some(None), Some(Some(0.25))] {
            let pt = SweepPoint {
                report: report.clone(),
                t0,
            };
            let bytes = to_json(&pt);
            let back: SweepPoint = serde_json::from_slice(&bytes).unwrap();
            assert_eq!(back, pt);
            assert_eq!(to_json(&back), bytes);
        }
    }

    #[test]
    fn deviation_rows_leave_undefined_cells_empty() {
        let row = DeviationRow {
            t: 0.0,
            xi1: 0.0,
            xi2: 0.0,
            xi_norm: 0.0,
            delta1: None,
            delta2: None,
            delta: None,
            kappa0: Some(1.5),
        };
        let text = String::from_utf8(DeviationRow::table(&[row]).to_bytes()).unwrap();
        assert_eq!(text, "t,xi1,xi2,xi_norm,delta1,delta2,delta,kappa0\n0,0,0,0,,,,1.5\n");
    }
}
