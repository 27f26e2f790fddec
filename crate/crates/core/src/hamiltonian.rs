//! The two-mode Hamiltonians: the reduced form
//! H = αJz + βJz² + γ[cos(φ)Jx + sin(φ)Jy], the diagonal H₀ = α₀Jz + β₀Jz²
//! whose ratio α₀/β₀ = −(2m+1) degenerates the pair {m, m+1}, and the
//! frame-conjugated U(φ,θ)H₀U†(φ,θ).

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::operator::{MatrixStructure, Operator};
use crate::spin::{rotation_u, SpinSystem};

/// Raw two-mode parameters: mode frequencies, collision strengths, laser
/// coupling and detuning (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub u_a: f64,
    pub u_b: f64,
    pub u_ab: f64,
    pub lambda: f64,
    pub detuning: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.omega_a,
            self.omega_b,
            self.u_a,
            self.u_b,
            self.u_ab,
            self.lambda,
            self.detuning,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "laser coupling lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Coefficients of the reduced Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi: f64,
}

impl ReducedParams {
    /// The frame parametrization α = α₀cosθ, γ = α₀sinθ (β = 0).
    pub fn from_frame(alpha0: f64, theta: f64, phi: f64) -> Self {
        Self {
            alpha: alpha0 * theta.cos(),
            beta: 0.0,
            gamma: alpha0 * theta.sin(),
            phi,
        }
    }
}

/// α = ω_a − ω_b + (2J−1)(U_a − U_b)/2, β = (U_a + U_b − U_ab)/2,
/// γ = λ, φ = Δ·t.
pub fn reduce_params(p: &PhysicalParams, sys: &SpinSystem, t: f64) -> Result<ReducedParams> {
    p.validate()?;
    let j = sys.j();
    Ok(ReducedParams {
        alpha: p.omega_a - p.omega_b + (2.0 * j - 1.0) * (p.u_a - p.u_b) / 2.0,
        beta: (p.u_a + p.u_b - p.u_ab) / 2.0,
        gamma: p.lambda,
        phi: p.detuning * t,
    })
}

/// H = αJz + βJz² + γ[cos(φ)Jx + sin(φ)Jy]; Hermitian tridiagonal.
pub fn build_hamiltonian(sys: &SpinSystem, r: &ReducedParams) -> Operator {
    let n = sys.dim();
    let ms = sys.m_values();
    let j = sys.j();
    let mut h = ndarray::Array2::<C64>::zeros((n, n));
    for (k, m) in ms.iter().enumerate() {
        h[(k, k)] = C64::new(r.alpha * m + r.beta * m * m, 0.0);
    }
    // with ladder element c = √(j(j+1) − m(m+1)):
    // ⟨m|·|m+1⟩ of cosφ Jx + sinφ Jy is (c/2)(cosφ + i sinφ)
    for (k, m) in ms.iter().enumerate().take(n.saturating_sub(1)) {
        let c = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        let upper = C64::new(
            r.gamma * r.phi.cos() * c / 2.0,
            r.gamma * r.phi.sin() * c / 2.0,
        );
        h[(k, k + 1)] = upper;
        h[(k + 1, k)] = upper.conj();
    }
    Operator::new(h, MatrixStructure::Tridiagonal).expect("finite Hamiltonian")
}

/// H₀ = α₀Jz + β₀Jz²; diagonal with entries α₀m + β₀m².
pub fn build_h0(sys: &SpinSystem, alpha0: f64, beta0: f64) -> Operator {
    let entries: Vec<C64> = sys
        .m_values()
        .iter()
        .map(|m| C64::new(alpha0 * m + beta0 * m * m, 0.0))
        .collect();
    Operator::diagonal(&entries)
}

/// The ratio α₀/β₀ = −(2m+1) that makes |j,m⟩ and |j,m+1⟩ degenerate.
pub fn degeneracy_ratio(m: f64) -> f64 {
    -(2.0 * m + 1.0)
}

/// U(φ,θ)·H₀·U†(φ,θ) by direct matrix conjugation; dense in general.
pub fn conjugated_hamiltonian(
    sys: &SpinSystem,
    alpha0: f64,
    beta0: f64,
    phi: f64,
    theta: f64,
) -> Operator {
    let h0 = build_h0(sys, alpha0, beta0);
    let u = rotation_u(sys, phi, theta);
    let m = u
        .matrix()
        .dot(h0.matrix())
        .dot(&linalg::adjoint(u.matrix()));
    Operator::new(m, MatrixStructure::Dense).expect("finite conjugation")
}
