//! Spin-J operator algebra and geometric-phase machinery for a coupled
//! two-mode Bose-Einstein condensate.
//!
//! The crate is organised around the control manifold (φ, θ) of the frame
//! rotation U(φ,θ) = exp(−iφJz)·exp(−iθJy):
//!
//! * [`spin`] — exact spin operators, rotations and the two-mode Fock map;
//! * [`operator`] — dense/tridiagonal/diagonal complex matrices, commutators
//!   and matrix exponentials (eigendecomposition and series routes);
//! * [`hamiltonian`] — the reduced two-mode Hamiltonian
//!   αJz + βJz² + γ[cosφ Jx + sinφ Jy], the degenerate H₀ = α₀Jz + β₀Jz²
//!   and its frame-conjugated form;
//! * [`geometry`] — Wilczek-Zee connections, field strengths, Berry phases
//!   and holonomies (closed form, path-ordered, surface-ordered);
//! * [`evolution`] — adiabatic Schrödinger propagation, phase extraction,
//!   the population-detection protocol and measured holonomies;
//! * [`perturbation`] — the generator series producing a transverse γJx term
//!   from the nonlinear H₀, with an exact resummed oracle.
//!
//! Basis convention everywhere: the (2j+1) basis states are ordered by
//! ascending magnetic number, |j,−j⟩ … |j,+j⟩, so index k holds m = −j + k.

pub mod error;
pub mod evolution;
pub mod geometry;
pub mod hamiltonian;
pub mod linalg;
pub mod operator;
pub mod perturbation;
pub mod spin;
pub mod state;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg::C64;
pub use operator::{MatrixStructure, Operator};
pub use spin::SpinSystem;
pub use state::{QuantumState, TwoModeFock};

/// Wrap an angle to the principal interval (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(std::f64::consts::TAU);
    if w > std::f64::consts::PI {
        w - std::f64::consts::TAU
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::wrap_angle;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_principal_interval() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.3) - 0.3).abs() < 1e-15);
        assert!((wrap_angle(-6.0 * PI - 0.1) + 0.1).abs() < 1e-12);
    }
}
