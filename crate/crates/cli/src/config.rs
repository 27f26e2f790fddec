//! Per-experiment configuration: JSON file plus flag overrides, flags winning.
//! Unknown keys are rejected by name. Angles are radians; times are in
//! inverse-energy units (ħ = 1).

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BerryConfig {
    pub j: f64,
    pub m: f64,
    pub theta: f64,
    pub alpha0: f64,
    pub beta0: f64,
    /// Sweep duration T; the phase is extracted from forward+reversed sweeps.
    pub t_final: f64,
    pub steps: usize,
    /// Quadrature subintervals per axis for the flux route.
    pub quadrature_steps: usize,
    /// Segments of the path-ordered loop.
    pub loop_segments: usize,
    pub tol_oracles: f64,
    pub tol_adiabatic: f64,
}

impl Default for BerryConfig {
    fn default() -> Self {
        Self {
            j: 5.0,
            m: 1.0,
            theta: PI / 3.0,
            alpha0: 1.0,
            beta0: 0.0,
            t_final: 400.0,
            steps: 20000,
            quadrature_steps: 32,
            loop_segments: 4096,
            tol_oracles: 1e-4,
            tol_adiabatic: 2e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectConfig {
    pub j: f64,
    pub theta: f64,
    pub alpha0: f64,
    pub t_final: f64,
    pub steps: usize,
    pub tol_overlap: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            j: 5.0,
            theta: (0.5f64).acos(),
            alpha0: 1.0,
            t_final: std::f64::consts::TAU * 40.0,
            steps: 16000,
            tol_overlap: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolonomyConfig {
    pub j: f64,
    pub m: f64,
    pub theta0: f64,
    /// Defaults to theta0 + pi/(2 rho) when null.
    pub theta1: Option<f64>,
    pub loop_segments: usize,
    pub stokes_grid: usize,
    pub t_final: f64,
    pub steps: usize,
    pub beta0: f64,
    pub leakage_threshold: f64,
    pub tol_stokes: f64,
    /// Closed-form agreement tolerance; defaults to 3/rho when null.
    pub tol_closed_form: Option<f64>,
    pub tol_adiabatic: f64,
}

impl Default for HolonomyConfig {
    fn default() -> Self {
        Self {
            j: 10.0,
            m: 0.0,
            theta0: PI / 3.0,
            theta1: None,
            loop_segments: 8192,
            stokes_grid: 512,
            t_final: 2400.0,
            steps: 120000,
            beta0: 1.0,
            leakage_threshold: 1e-3,
            tol_stokes: 1e-3,
            tol_closed_form: None,
            tol_adiabatic: 0.02,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferConfig {
    pub j: f64,
    pub m: f64,
    pub theta0: f64,
    /// Δθ in units of π/(2ρ): 1.0 is the full-transfer rectangle, 0.5 the
    /// equal-superposition one.
    pub half_periods: f64,
    pub beta0: f64,
    pub t_final: f64,
    pub steps: usize,
    pub leakage_threshold: f64,
    pub tol_closed_vs_adiabatic: f64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            j: 50.0,
            m: 0.0,
            theta0: PI / 3.0,
            half_periods: 1.0,
            beta0: 1.0,
            t_final: 600.0,
            steps: 60000,
            leakage_threshold: 1e-3,
            tol_closed_vs_adiabatic: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StokesConfig {
    pub j: f64,
    pub m: f64,
    pub theta0: f64,
    pub theta1: Option<f64>,
    pub loop_segments: usize,
    pub grid_sigma: usize,
    pub grid_tau: usize,
    pub tol: f64,
}

impl Default for StokesConfig {
    fn default() -> Self {
        Self {
            j: 5.0,
            m: 0.0,
            theta0: PI / 3.0,
            theta1: None,
            loop_segments: 8192,
            grid_sigma: 512,
            grid_tau: 512,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationConfig {
    pub j: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub gamma: f64,
    pub n_max: usize,
    pub draws: usize,
    pub seed: u64,
    pub tol_commutator: f64,
    pub tol_truncation: f64,
    pub ratio_window: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            j: 5.0,
            alpha0: 1.0,
            beta0: 0.05,
            gamma: 0.01,
            n_max: 60,
            draws: 20,
            seed: 1234,
            tol_commutator: 1e-12,
            tol_truncation: 1e-8,
            ratio_window: 0.5,
        }
    }
}

/// Load a config of type T from an optional JSON file, starting from the
/// experiment defaults.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config file {}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("invalid config: {e}"))
        }
    }
}

/// Apply a `key=value` override onto the serialized form of the config,
/// rejecting unknown keys by name.
pub fn apply_override<T>(cfg: &T, key: &str, value: &str) -> Result<T>
where
    T: Serialize + DeserializeOwned,
{
    let mut v = serde_json::to_value(cfg)?;
    let obj = v.as_object_mut().expect("configs are JSON objects");
    if !obj.contains_key(key) {
        let known: Vec<&String> = obj.keys().collect();
        bail!("unknown config key `{key}`; known keys: {known:?}");
    }
    let parsed: serde_json::Value = if let Ok(int) = value.parse::<i64>() {
        serde_json::json!(int)
    } else if let Ok(num) = value.parse::<f64>() {
        serde_json::json!(num)
    } else {
        serde_json::from_str(value).unwrap_or(serde_json::Value::String(value.to_string()))
    };
    obj.insert(key.to_string(), parsed);
    serde_json::from_value(v).with_context(|| format!("override `{key}={value}` rejected"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_round_trips_byte_stable() {
        let cfg = BerryConfig::default();
        let first = serde_json::to_string_pretty(&cfg).unwrap();
        let parsed: BerryConfig = serde_json::from_str(&first).unwrap();
        let second = serde_json::to_string_pretty(&parsed).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn unknown_keys_rejected_by_name() {
        let err = serde_json::from_str::<BerryConfig>(r#"{"j": 2.0, "bogus": 1}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("bogus"), "{err}");
        let cfg = BerryConfig::default();
        let err2 = apply_override(&cfg, "nonsense", "3").unwrap_err().to_string();
        assert!(err2.contains("nonsense"), "{err2}");
    }

    #[test]
    fn overrides_win() {
        let cfg = BerryConfig::default();
        let cfg = apply_override(&cfg, "j", "7").unwrap();
        assert_eq!(cfg.j, 7.0);
        let cfg = apply_override(&cfg, "steps", "12345").unwrap();
        assert_eq!(cfg.steps, 12345);
    }
}
