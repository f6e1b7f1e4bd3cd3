//! Run records (JSON) and trace CSV.

use std::fmt::Write as _;

use maxeig_core::iterate::{Capture, IterationTrace, Normalization};
use maxeig_core::{Complex64, ModelSpec, Scalar};
use serde::{Deserialize, Serialize};

use crate::solve::{sig6, SolveOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub z: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_im: Option<f64>,
    pub residual: f64,
    pub seconds: f64,
}

/// Converts a library trace, mapping each `z` through `map`.
pub fn trace_rows<T: Scalar>(trace: &IterationTrace<T>, map: impl Fn(f64) -> f64) -> Vec<TraceRow> {
    trace
        .steps
        .iter()
        .map(|s| TraceRow {
            k: s.k,
            z: map(s.z.re()),
            z_im: T::IS_COMPLEX.then(|| s.z.im()),
            residual: s.residual,
            seconds: s.seconds,
        })
        .collect()
}

/// First index from which every row prints like the last one at six
/// significant digits.
pub fn display_stable_at(rows: &[TraceRow]) -> usize {
    let shown = |r: &TraceRow| (sig6(r.z), r.z_im.map(sig6));
    let Some(last) = rows.last().map(shown) else { return 0 };
    rows.iter().rposition(|r| shown(r) != last).map_or(0, |i| rows[i + 1].k)
}

/// CSV with header `k,z,residual,seconds`; complex `z` is written `re+imi`.
pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from("k,z,residual,seconds\n");
    for r in rows {
        let z = match r.z_im {
            Some(im) => format!("{:?}{}{:?}i", r.z, if im < 0.0 { "-" } else { "+" }, im.abs()),
            None => format!("{:?}", r.z),
        };
        let _ = writeln!(s, "{},{z},{:?},{:?}", r.k, r.residual, r.seconds);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub eigenvalue: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalue_im: Option<f64>,
    pub eigenvector: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvector_im: Option<Vec<f64>>,
    /// First step from which `z` no longer changes within the tolerance.
    pub iterations: usize,
    /// First step from which the six-significant-digit value of `z` no
    /// longer changes.
    pub display_stable_at: usize,
    /// Linear solves (or matrix products for power iteration) performed.
    pub steps: usize,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifted_value: Option<f64>,
    pub normalization: Normalization,
}

impl ResultRecord {
    pub fn complex(value: Complex64, vector: &[Complex64]) -> (f64, Option<f64>, Vec<f64>, Option<Vec<f64>>) {
        (
            value.re,
            Some(value.im),
            vector.iter().map(|c| c.re).collect(),
            Some(vector.iter().map(|c| c.im).collect()),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputRecord {
    Model { spec: ModelSpec },
    File { path: String },
}

/// What the reported eigenvalue means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `rho(A)`.
    Maximal,
    /// `lambda_min(-Q) = -rho(Q)` for a Q-matrix input.
    MinOfNegated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub input: InputRecord,
    pub options: SolveOptions,
    pub mode: Mode,
    pub trace: Vec<TraceRow>,
    pub result: ResultRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture: Option<Capture>,
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_else(|e| unreachable!("{e}"))
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_complex_cells() {
        let rows = vec![
            TraceRow { k: 0, z: 1.5, z_im: None, residual: 0.25, seconds: 0.0 },
            TraceRow { k: 1, z: 3.0, z_im: Some(-0.5), residual: 1e-9, seconds: 0.125 },
        ];
        assert_eq!(trace_csv(&rows), "k,z,residual,seconds\n0,1.5,0.25,0.0\n1,3.0-0.5i,1e-9,0.125\n");
    }

    #[test]
    fn display_stability_ignores_digits_beyond_six() {
        let row = |k, z| TraceRow { k, z, z_im: None, residual: 0.0, seconds: 0.0 };
        let rows = [row(0, 24.0), row(1, 18.5316), row(2, 17.51244), row(3, 17.512372), row(4, 17.5123717)];
        assert_eq!(display_stable_at(&rows), 2);
        assert_eq!(display_stable_at(&rows[..1]), 0);
        assert_eq!(display_stable_at(&[]), 0);
    }
}
