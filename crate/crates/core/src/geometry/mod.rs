//! Wilczek-Zee connections, field strengths, Berry phases and holonomies over
//! the (φ, θ) control manifold of the frame rotation U(φ,θ).
//!
//! Orientation bookkeeping (fixed once, used everywhere): with the connection
//! A_μ = ⟨i|U†∂_μU|j⟩, the holonomy of an oriented path is the path-ordered
//! product Γ = P exp ∫ A with later segments composing on the left — the
//! W₄W₃W₂W₁ ordering for a counterclockwise rectangle. Coefficients of a state
//! dragged around a loop in time obey ċ = −A·c, so the physically measured
//! transport equals Γ of the *reversed* path; loop constructors that exist to
//! be compared against measured evolutions document which orientation they
//! list.

mod connection;
mod holonomy;

pub use connection::{
    berry_phase_closed, berry_phase_flux, connection_analytic, connection_numeric,
    field_strength, BerryPhase, ConnectionField, DegenerateSubspace,
};
pub use holonomy::{
    holonomy_closed_form, holonomy_path_ordered, holonomy_stokes, holonomy_transport, Holonomy,
    HolonomyMethod, HolonomyRectangle, LoopPath,
};
