//! Exact spin-J operator algebra and the Schwinger two-mode correspondence.
//!
//! Basis ordering is ascending in m: index k holds |j, −j + k⟩.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{self, C64, HermitianEig};
use crate::operator::{MatrixStructure, Operator};
use crate::state::{QuantumState, TwoModeFock};

/// A fixed total spin j (integer or half-integer), dim = 2j + 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinSystem {
    twice_j: u32,
}

impl SpinSystem {
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !(twice.is_finite() && twice >= 1.0 && (twice - twice.round()).abs() < 1e-9) {
            return Err(Error::InvalidSpin(j));
        }
        Ok(Self {
            twice_j: twice.round() as u32,
        })
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    /// Magnetic numbers in basis order, −j … +j.
    pub fn m_values(&self) -> Vec<f64> {
        let j = self.j();
        (0..self.dim()).map(|k| -j + k as f64).collect()
    }

    /// Basis index of |j, m⟩.
    pub fn index_of(&self, m: f64) -> Result<usize> {
        let shifted = 2.0 * m + self.twice_j as f64;
        let idx = shifted / 2.0;
        if !(shifted.is_finite() && (idx - idx.round()).abs() < 1e-9) {
            return Err(Error::MOutOfRange { m, j: self.j() });
        }
        let k = idx.round();
        if k < 0.0 || k as usize >= self.dim() {
            return Err(Error::MOutOfRange { m, j: self.j() });
        }
        Ok(k as usize)
    }

    /// Raising operator J+ with ⟨m+1|J+|m⟩ = √(j(j+1) − m(m+1)).
    pub fn j_plus(&self) -> Operator {
        let j = self.j();
        let n = self.dim();
        let mut mat = Array2::<C64>::zeros((n, n));
        for (k, m) in self.m_values().iter().enumerate().take(n - 1) {
            mat[(k + 1, k)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
        Operator::new(mat, MatrixStructure::Tridiagonal).expect("finite ladder elements")
    }

    pub fn jx(&self) -> Operator {
        let jp = self.j_plus().into_matrix();
        let m = (&jp + &linalg::adjoint(&jp)).mapv(|z| z * 0.5);
        Operator::new(m, MatrixStructure::Tridiagonal).expect("finite")
    }

    pub fn jy(&self) -> Operator {
        let jp = self.j_plus().into_matrix();
        let m = (&jp - &linalg::adjoint(&jp)).mapv(|z| z / (2.0 * linalg::I));
        Operator::new(m, MatrixStructure::Tridiagonal).expect("finite")
    }

    pub fn jz(&self) -> Operator {
        let entries: Vec<C64> = self.m_values().iter().map(|m| C64::new(*m, 0.0)).collect();
        Operator::diagonal(&entries)
    }
}

/// The triple (Jx, Jy, Jz).
pub fn build_spin_operators(sys: &SpinSystem) -> (Operator, Operator, Operator) {
    (sys.jx(), sys.jy(), sys.jz())
}

/// U(φ,θ) = exp(−iφJz)·exp(−iθJy).
pub fn rotation_u(sys: &SpinSystem, phi: f64, theta: f64) -> Operator {
    SpinRotation::new(sys).matrix(phi, theta)
}

/// Fock occupation of |j, m⟩: n_a = j + m, n_b = j − m.
pub fn fock_map(sys: &SpinSystem, m: f64) -> Result<TwoModeFock> {
    sys.index_of(m)?;
    let j = sys.j();
    Ok(TwoModeFock {
        n_a: (j + m).round() as u32,
        n_b: (j - m).round() as u32,
    })
}

/// Cached machinery for applying U(φ,θ) and its adjoint repeatedly: the Jy
/// eigendecomposition is computed once, after which each application costs two
/// dense mat-vecs plus diagonal phases.
#[derive(Debug, Clone)]
pub struct SpinRotation {
    m_values: Vec<f64>,
    jy_eig: HermitianEig,
}

impl SpinRotation {
    pub fn new(sys: &SpinSystem) -> Self {
        let jy = sys.jy();
        let jy_eig = jy.eigh().expect("Jy is Hermitian tridiagonal");
        Self {
            m_values: sys.m_values(),
            jy_eig,
        }
    }

    pub fn dim(&self) -> usize {
        self.m_values.len()
    }

    /// exp(−iθJy)·ψ.
    pub fn apply_y(&self, psi: &Array1<C64>, theta: f64) -> Array1<C64> {
        self.jy_eig
            .apply_spectrum(|w| (-linalg::I * C64::new(theta * w, 0.0)).exp(), psi)
    }

    /// U(φ,θ)·ψ.
    pub fn apply(&self, psi: &Array1<C64>, phi: f64, theta: f64) -> Array1<C64> {
        let mut out = self.apply_y(psi, theta);
        for (k, m) in self.m_values.iter().enumerate() {
            out[k] *= (-linalg::I * C64::new(phi * m, 0.0)).exp();
        }
        out
    }

    /// U†(φ,θ)·ψ.
    pub fn apply_adjoint(&self, psi: &Array1<C64>, phi: f64, theta: f64) -> Array1<C64> {
        let mut tmp = psi.clone();
        for (k, m) in self.m_values.iter().enumerate() {
            tmp[k] *= (linalg::I * C64::new(phi * m, 0.0)).exp();
        }
        self.apply_y(&tmp, -theta)
    }

    pub fn matrix(&self, phi: f64, theta: f64) -> Operator {
        let n = self.dim();
        let ey = self
            .jy_eig
            .map_spectrum(|w| (-linalg::I * C64::new(theta * w, 0.0)).exp());
        let mut m = ey;
        for k in 0..n {
            let ph = (-linalg::I * C64::new(phi * self.m_values[k], 0.0)).exp();
            for c in 0..n {
                m[(k, c)] *= ph;
            }
        }
        Operator::new(m, MatrixStructure::Dense).expect("finite rotation")
    }
}

/// The rotated extremal state U(φ,θ)|j,j⟩.
pub fn coherent_state(sys: &SpinSystem, phi: f64, theta: f64) -> QuantumState {
    let rot = SpinRotation::new(sys);
    let top = QuantumState::basis(sys, sys.j()).expect("top state exists");
    QuantumState::new(rot.apply(top.amplitudes(), phi, theta)).expect("rotation preserves norm")
}
