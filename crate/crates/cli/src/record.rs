//! Machine-readable run records: config echo, computed quantities, oracle
//! comparisons with tolerances and pass flags, wall-clock time, library
//! version.

use anyhow::{bail, Result};
use holobec_core::linalg::C64;
use serde::{Deserialize, Serialize};

/// A complex matrix as row-major [re, im] pairs.
pub type MatrixEntries = Vec<Vec<[f64; 2]>>;

pub fn matrix_entries(m: &ndarray::Array2<C64>) -> MatrixEntries {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub abs_err: f64,
    pub rel_err: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl Comparison {
    /// |value − reference| ≤ tolerance.
    pub fn matches(name: &str, value: f64, reference: f64, tolerance: f64) -> Self {
        let abs_err = (value - reference).abs();
        let rel_err = (reference.abs() > 1e-14).then(|| abs_err / reference.abs());
        Self {
            name: name.to_string(),
            value,
            reference,
            abs_err,
            rel_err,
            tolerance,
            pass: abs_err <= tolerance,
        }
    }

    /// value ≤ bound; `abs_err` is the overshoot.
    pub fn upper_bound(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            reference: bound,
            abs_err: (value - bound).max(0.0),
            rel_err: None,
            tolerance: bound,
            pass: value <= bound,
        }
    }

    /// value ≥ bound; `abs_err` is the shortfall.
    pub fn lower_bound(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            reference: bound,
            abs_err: (bound - value).max(0.0),
            rel_err: None,
            tolerance: bound,
            pass: value >= bound,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub experiment: String,
    pub config: serde_json::Value,
    pub results: serde_json::Value,
    pub comparisons: Vec<Comparison>,
    pub passed: bool,
    pub duration_seconds: f64,
    pub library_version: String,
}

impl RunRecord {
    pub fn new(
        experiment: &str,
        config: serde_json::Value,
        results: serde_json::Value,
        comparisons: Vec<Comparison>,
        duration_seconds: f64,
    ) -> Result<Self> {
        let record = Self {
            schema_version: 1,
            experiment: experiment.to_string(),
            passed: comparisons.iter().all(|c| c.pass),
            config,
            results,
            comparisons,
            duration_seconds,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        validate_finite(&record.results)?;
        Ok(record)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

/// Every numeric field in a result payload must be finite.
pub fn validate_finite(value: &serde_json::Value) -> Result<()> {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if !f.is_finite() {
                    bail!("non-finite numeric field in results: {n}");
                }
            }
            Ok(())
        }
        serde_json::Value::Array(items) => {
            items.iter().try_for_each(validate_finite)
        }
        serde_json::Value::Object(map) => map.values().try_for_each(validate_finite),
        _ => Ok(()),
    }
}
