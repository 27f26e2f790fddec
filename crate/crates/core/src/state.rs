//! Normalized state vectors and the two-mode Fock correspondence.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::operator::Operator;
use crate::spin::SpinSystem;
use crate::tolerances;

#[derive(Debug, Clone)]
pub struct QuantumState {
    amplitudes: Array1<C64>,
}

impl QuantumState {
    /// Accepts a vector already normalized to within the library norm
    /// tolerance.
    pub fn new(amplitudes: Array1<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tolerances::NORM {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// For propagation internals whose per-step unitarity is established
    /// elsewhere: accepts the amplitudes as-is so that accumulated rounding
    /// stays observable through [`QuantumState::norm`] instead of tripping the
    /// construction gate on long trajectories.
    pub(crate) fn from_amplitudes_unchecked(amplitudes: Array1<C64>) -> Self {
        Self { amplitudes }
    }

    /// Normalizes the input vector.
    pub fn normalized(mut amplitudes: Array1<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        amplitudes.mapv_inplace(|z| z / C64::new(norm, 0.0));
        Ok(Self { amplitudes })
    }

    /// The basis state |j, m⟩.
    pub fn basis(sys: &SpinSystem, m: f64) -> Result<Self> {
        let idx = sys.index_of(m)?;
        let mut amp = Array1::zeros(sys.dim());
        amp[idx] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: amp })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨m|ψ⟩|² for each basis index, ascending m.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn apply(&self, op: &Operator) -> Result<Self> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: op.dim(),
                right: self.dim(),
            });
        }
        Ok(Self {
            amplitudes: op.matrix().dot(&self.amplitudes),
        })
    }

    /// ⟨ψ|M|ψ⟩ (real part; intended for Hermitian M).
    pub fn expectation(&self, op: &Operator) -> f64 {
        let mpsi = op.matrix().dot(&self.amplitudes);
        self.amplitudes
            .iter()
            .zip(mpsi.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

/// Atom numbers of the two modes under the Schwinger mapping
/// j = (n_a + n_b)/2, m = (n_a − n_b)/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoModeFock {
    pub n_a: u32,
    pub n_b: u32,
}

impl TwoModeFock {
    pub fn total(&self) -> u32 {
        self.n_a + self.n_b
    }
}
