//! Connection components A_φ, A_θ over the degenerate subspaces of
//! H₀ = α₀Jz + β₀Jz², their field strength, and the Abelian Berry phase.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::hamiltonian::build_h0;
use crate::linalg::{self, C64, I, ZERO};
use crate::spin::{SpinRotation, SpinSystem};
use crate::tolerances;
use crate::wrap_angle;

/// Basis indices sharing one eigenvalue of H₀.
#[derive(Debug, Clone)]
pub struct DegenerateSubspace {
    indices: Vec<usize>,
    m_values: Vec<f64>,
    energy: f64,
}

impl DegenerateSubspace {
    /// One-dimensional (Abelian) subspace holding |j, m⟩.
    pub fn single(sys: &SpinSystem, m: f64, energy: f64) -> Result<Self> {
        let idx = sys.index_of(m)?;
        Ok(Self {
            indices: vec![idx],
            m_values: vec![m],
            energy,
        })
    }

    /// The pair {|j,m⟩, |j,m+1⟩} in that order.
    pub fn pair(sys: &SpinSystem, m: f64, energy: f64) -> Result<Self> {
        let i0 = sys.index_of(m)?;
        let i1 = sys.index_of(m + 1.0)?;
        Ok(Self {
            indices: vec![i0, i1],
            m_values: vec![m, m + 1.0],
            energy,
        })
    }

    /// Locate the pair {m, m+1} in the spectrum of H₀ = α₀Jz + β₀Jz²,
    /// verifying its degeneracy and rejecting accidental ≥3-fold clusters at
    /// the same energy.
    pub fn find_pair(sys: &SpinSystem, alpha0: f64, beta0: f64, m: f64) -> Result<Self> {
        let h0 = build_h0(sys, alpha0, beta0);
        let i0 = sys.index_of(m)?;
        let i1 = sys.index_of(m + 1.0)?;
        let e0 = h0[(i0, i0)].re;
        let e1 = h0[(i1, i1)].re;
        let gap = (e0 - e1).abs();
        if gap > tolerances::DEGENERACY {
            return Err(Error::DegeneracyViolated { gap });
        }
        let energy = 0.5 * (e0 + e1);
        let cluster = (0..sys.dim())
            .filter(|&k| (h0[(k, k)].re - energy).abs() <= tolerances::DEGENERACY)
            .count();
        if cluster > 2 {
            return Err(Error::UnsupportedSubspace(cluster));
        }
        Self::pair(sys, m, energy)
    }

    pub fn n(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn m_values(&self) -> &[f64] {
        &self.m_values
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    fn shape(&self, sys: &SpinSystem) -> Result<SubspaceShape> {
        match self.indices.len() {
            1 => Ok(SubspaceShape::Single { m: self.m_values[0] }),
            2 => {
                if (self.m_values[1] - self.m_values[0] - 1.0).abs() > 1e-9 {
                    return Err(Error::UnsupportedSubspace(2));
                }
                let j = sys.j();
                let m = self.m_values[0];
                Ok(SubspaceShape::Pair {
                    m,
                    rho: ((j - m) * (j + m + 1.0)).sqrt(),
                })
            }
            n => Err(Error::UnsupportedSubspace(n)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum SubspaceShape {
    Single { m: f64 },
    Pair { m: f64, rho: f64 },
}

/// Evaluator of the pair (A_φ, A_θ) at any point of the control manifold.
#[derive(Clone)]
pub enum ConnectionField {
    /// A_φ = −i m cosθ, A_θ = 0.
    AnalyticAbelian { m: f64 },
    /// A_φ = i[[−m cosθ, (ρ/2)sinθ], [(ρ/2)sinθ, −(m+1)cosθ]],
    /// A_θ = (ρ/2)[[0, 1], [−1, 0]], ρ = √((j−m)(j+m+1)).
    AnalyticPair { m: f64, rho: f64 },
    /// Central finite differences of A_μ = ⟨i|U†∂_μU|j⟩ restricted to the
    /// subspace indices.
    Numeric {
        rotation: std::sync::Arc<SpinRotation>,
        indices: Vec<usize>,
        step: f64,
    },
}

impl ConnectionField {
    pub fn analytic(sys: &SpinSystem, subspace: &DegenerateSubspace) -> Result<Self> {
        Ok(match subspace.shape(sys)? {
            SubspaceShape::Single { m } => ConnectionField::AnalyticAbelian { m },
            SubspaceShape::Pair { m, rho } => ConnectionField::AnalyticPair { m, rho },
        })
    }

    pub fn numeric(sys: &SpinSystem, subspace: &DegenerateSubspace, step: f64) -> Result<Self> {
        if !(1e-6..=1e-3).contains(&step) {
            return Err(Error::BadStep(step));
        }
        if subspace.n() > 2 {
            return Err(Error::UnsupportedSubspace(subspace.n()));
        }
        Ok(ConnectionField::Numeric {
            rotation: std::sync::Arc::new(SpinRotation::new(sys)),
            indices: subspace.indices().to_vec(),
            step,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConnectionField::AnalyticAbelian { .. } => 1,
            ConnectionField::AnalyticPair { .. } => 2,
            ConnectionField::Numeric { indices, .. } => indices.len(),
        }
    }

    /// (A_φ, A_θ) at (φ, θ).
    pub fn eval(&self, phi: f64, theta: f64) -> (Array2<C64>, Array2<C64>) {
        match self {
            ConnectionField::AnalyticAbelian { m } => {
                let mut aphi = Array2::zeros((1, 1));
                aphi[(0, 0)] = -I * (m * theta.cos());
                (aphi, Array2::zeros((1, 1)))
            }
            ConnectionField::AnalyticPair { m, rho } => {
                let (s, c) = theta.sin_cos();
                let mut aphi = Array2::zeros((2, 2));
                aphi[(0, 0)] = -I * (m * c);
                aphi[(0, 1)] = I * (rho / 2.0 * s);
                aphi[(1, 0)] = I * (rho / 2.0 * s);
                aphi[(1, 1)] = -I * ((m + 1.0) * c);
                let mut ath = Array2::zeros((2, 2));
                ath[(0, 1)] = C64::new(rho / 2.0, 0.0);
                ath[(1, 0)] = C64::new(-rho / 2.0, 0.0);
                (aphi, ath)
            }
            ConnectionField::Numeric {
                rotation,
                indices,
                step,
            } => numeric_connection(rotation, indices, phi, theta, *step),
        }
    }

    /// F = −∂_φA_θ + ∂_θA_φ + [A_φ, A_θ]; closed form for the analytic kinds,
    /// finite differences of the connection for the numeric kind.
    pub fn field_strength_at(&self, phi: f64, theta: f64) -> Array2<C64> {
        match self {
            ConnectionField::AnalyticAbelian { m } => {
                let mut f = Array2::zeros((1, 1));
                f[(0, 0)] = I * (m * theta.sin());
                f
            }
            ConnectionField::AnalyticPair { m, rho } => {
                let (s, c) = theta.sin_cos();
                let mut f = Array2::zeros((2, 2));
                f[(0, 0)] = I * ((m - rho * rho / 2.0) * s);
                f[(0, 1)] = I * (rho * c);
                f[(1, 0)] = I * (rho * c);
                f[(1, 1)] = I * ((m + 1.0 + rho * rho / 2.0) * s);
                f
            }
            ConnectionField::Numeric { step, .. } => {
                field_strength_fd(self, phi, theta, *step)
            }
        }
    }
}

fn numeric_connection(
    rotation: &SpinRotation,
    indices: &[usize],
    phi: f64,
    theta: f64,
    h: f64,
) -> (Array2<C64>, Array2<C64>) {
    let u0 = rotation.matrix(phi, theta).into_matrix();
    let u0d = linalg::adjoint(&u0);
    let dphi = {
        let up = rotation.matrix(phi + h, theta).into_matrix();
        let um = rotation.matrix(phi - h, theta).into_matrix();
        (up - um).mapv(|z| z / (2.0 * h))
    };
    let dth = {
        let up = rotation.matrix(phi, theta + h).into_matrix();
        let um = rotation.matrix(phi, theta - h).into_matrix();
        (up - um).mapv(|z| z / (2.0 * h))
    };
    let full_phi = u0d.dot(&dphi);
    let full_th = u0d.dot(&dth);
    let n = indices.len();
    let mut aphi = Array2::zeros((n, n));
    let mut ath = Array2::zeros((n, n));
    for (r, &i) in indices.iter().enumerate() {
        for (c, &k) in indices.iter().enumerate() {
            aphi[(r, c)] = full_phi[(i, k)];
            ath[(r, c)] = full_th[(i, k)];
        }
    }
    (aphi, ath)
}

/// Central finite differences of the connection evaluators plus commutator.
fn field_strength_fd(conn: &ConnectionField, phi: f64, theta: f64, h: f64) -> Array2<C64> {
    let (_, ath_p) = conn.eval(phi + h, theta);
    let (_, ath_m) = conn.eval(phi - h, theta);
    let (aphi_p, _) = conn.eval(phi, theta + h);
    let (aphi_m, _) = conn.eval(phi, theta - h);
    let (aphi, ath) = conn.eval(phi, theta);
    let d_ath_dphi = (&ath_p - &ath_m).mapv(|z| z / (2.0 * h));
    let d_aphi_dth = (&aphi_p - &aphi_m).mapv(|z| z / (2.0 * h));
    let comm = aphi.dot(&ath) - ath.dot(&aphi);
    -d_ath_dphi + d_aphi_dth + comm
}

/// The analytic connection matrices of the paper at one point.
pub fn connection_analytic(
    sys: &SpinSystem,
    subspace: &DegenerateSubspace,
    phi: f64,
    theta: f64,
) -> Result<(Array2<C64>, Array2<C64>)> {
    Ok(ConnectionField::analytic(sys, subspace)?.eval(phi, theta))
}

/// Central finite differences of A_μ = ⟨i|U†∂_μU|j⟩.
pub fn connection_numeric(
    sys: &SpinSystem,
    subspace: &DegenerateSubspace,
    phi: f64,
    theta: f64,
    step: f64,
) -> Result<(Array2<C64>, Array2<C64>)> {
    Ok(ConnectionField::numeric(sys, subspace, step)?.eval(phi, theta))
}

/// F = −∂_φA_θ + ∂_θA_φ + [A_φ, A_θ] by central differences of the analytic
/// connection.
pub fn field_strength(
    sys: &SpinSystem,
    subspace: &DegenerateSubspace,
    phi: f64,
    theta: f64,
    step: f64,
) -> Result<Array2<C64>> {
    if !(1e-6..=1e-3).contains(&step) {
        return Err(Error::BadStep(step));
    }
    let conn = ConnectionField::analytic(sys, subspace)?;
    Ok(field_strength_fd(&conn, phi, theta, step))
}

/// A geometric phase, raw (unwrapped) and wrapped to (−π, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerryPhase {
    pub raw: f64,
    pub wrapped: f64,
}

impl BerryPhase {
    fn from_raw(raw: f64) -> Self {
        Self {
            raw,
            wrapped: wrap_angle(raw),
        }
    }
}

/// −2πm(1 − cosθ): m times the solid angle of the circuit.
pub fn berry_phase_closed(m: f64, theta: f64) -> BerryPhase {
    BerryPhase::from_raw(-std::f64::consts::TAU * m * (1.0 - theta.cos()))
}

/// i ∫₀^{2π} ∫₀^{θ} F dθ′ dφ by composite Simpson quadrature of the
/// finite-difference field strength; `steps` subintervals per axis
/// (even, ≥ 16).
pub fn berry_phase_flux(m: f64, theta: f64, steps: usize) -> Result<BerryPhase> {
    if steps < 16 || steps % 2 != 0 {
        return Err(Error::BadDiscretization(format!(
            "flux quadrature needs an even number of steps >= 16, got {steps}"
        )));
    }
    let conn = ConnectionField::AnalyticAbelian { m };
    let h_fd = 1e-4;
    let weight = |i: usize, n: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let dphi = std::f64::consts::TAU / steps as f64;
    let dth = theta / steps as f64;
    let mut acc = ZERO;
    for iphi in 0..=steps {
        let phi = dphi * iphi as f64;
        let wphi = weight(iphi, steps);
        for ith in 0..=steps {
            let th = dth * ith as f64;
            let f = field_strength_fd(&conn, phi, th, h_fd);
            acc += f[(0, 0)] * (wphi * weight(ith, steps));
        }
    }
    let integral = acc * (dphi / 3.0) * (dth / 3.0);
    let raw = (I * integral).re;
    Ok(BerryPhase::from_raw(raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn abelian_connection_vanishes_on_equator() {
        let sys = SpinSystem::new(3.0).unwrap();
        let sub = DegenerateSubspace::single(&sys, 1.0, 1.0).unwrap();
        let (aphi, ath) = connection_analytic(&sys, &sub, 0.3, PI / 2.0).unwrap();
        assert!(aphi[(0, 0)].norm() < 1e-15);
        assert!(ath[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn pair_connection_matrices() {
        // degenerate, j=1, m=0: ρ=√2, A_θ = (√2/2)[[0,1],[−1,0]]
        let sys = SpinSystem::new(1.0).unwrap();
        let sub = DegenerateSubspace::pair(&sys, 0.0, 0.0).unwrap();
        let (_, ath) = connection_analytic(&sys, &sub, 0.0, 0.7).unwrap();
        assert!((ath[(0, 1)].re - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((ath[(1, 0)].re + 2f64.sqrt() / 2.0).abs() < 1e-15);

        // θ=0: A_φ = i·diag(−m, −(m+1))
        let (aphi0, _) = connection_analytic(&sys, &sub, 1.1, 0.0).unwrap();
        assert!(aphi0[(0, 1)].norm() < 1e-15);
        assert!((aphi0[(0, 0)] - ZERO).norm() < 1e-15);
        assert!((aphi0[(1, 1)] + I).norm() < 1e-15);
    }

    #[test]
    fn numeric_matches_analytic_both_shapes() {
        let mut rng = StdRng::seed_from_u64(19);
        for j in [1.0, 5.0, 10.0] {
            let sys = SpinSystem::new(j).unwrap();
            for _ in 0..6 {
                let phi = rng.gen_range(0.0..2.0 * PI);
                let theta = rng.gen_range(0.05..PI - 0.05);
                let m = if j > 1.5 { 1.0 } else { 0.0 };
                for sub in [
                    DegenerateSubspace::single(&sys, m, 0.0).unwrap(),
                    DegenerateSubspace::pair(&sys, m, 0.0).unwrap(),
                ] {
                    let (aa, at) = connection_analytic(&sys, &sub, phi, theta).unwrap();
                    let (na, nt) = connection_numeric(&sys, &sub, phi, theta, 1e-5).unwrap();
                    assert!(max_abs_diff(&aa, &na) < 1e-6, "j={j}");
                    assert!(max_abs_diff(&at, &nt) < 1e-6, "j={j}");
                    // anti-Hermiticity of the numeric output
                    let dev_a = max_abs_diff(&na, &linalg::adjoint(&na).mapv(|z| -z));
                    let dev_t = max_abs_diff(&nt, &linalg::adjoint(&nt).mapv(|z| -z));
                    assert!(dev_a < 1e-8 && dev_t < 1e-8);
                }
            }
        }
    }

    #[test]
    fn abelian_m0_connection_is_zero() {
        let sys = SpinSystem::new(2.0).unwrap();
        let sub = DegenerateSubspace::single(&sys, 0.0, 0.0).unwrap();
        for (phi, theta) in [(0.0, 0.4), (2.0, 1.2), (4.4, 2.8)] {
            let (na, nt) = connection_numeric(&sys, &sub, phi, theta, 1e-5).unwrap();
            assert!(na[(0, 0)].norm() < 1e-8);
            assert!(nt[(0, 0)].norm() < 1e-8);
        }
    }

    #[test]
    fn field_strength_abelian_closed_form() {
        let sys = SpinSystem::new(3.0).unwrap();
        let sub = DegenerateSubspace::single(&sys, 2.0, 0.0).unwrap();
        let f = field_strength(&sys, &sub, 0.9, PI / 6.0, 1e-4).unwrap();
        // i·m·sinθ = i·2·0.5 = i
        assert!((f[(0, 0)] - I).norm() < 1e-6);

        let sub0 = DegenerateSubspace::single(&sys, 0.0, 0.0).unwrap();
        let f0 = field_strength(&sys, &sub0, 0.2, 1.0, 1e-4).unwrap();
        assert!(f0[(0, 0)].norm() < 1e-8);
    }

    #[test]
    fn field_strength_pair_antihermitian_and_matches_closed_form() {
        let sys = SpinSystem::new(4.0).unwrap();
        let sub = DegenerateSubspace::pair(&sys, 1.0, 0.0).unwrap();
        let fd = field_strength(&sys, &sub, 0.4, 0.9, 1e-4).unwrap();
        let dev = max_abs_diff(&fd, &linalg::adjoint(&fd).mapv(|z| -z));
        assert!(dev < 1e-8);
        let conn = ConnectionField::analytic(&sys, &sub).unwrap();
        let exact = conn.field_strength_at(0.4, 0.9);
        assert!(max_abs_diff(&fd, &exact) < 1e-6);
    }

    #[test]
    fn triple_degeneracy_rejected() {
        let sys = SpinSystem::new(2.0).unwrap();
        // β₀ = 0, α₀ = 0: everything degenerate
        assert!(matches!(
            DegenerateSubspace::find_pair(&sys, 0.0, 0.0, 0.0),
            Err(Error::UnsupportedSubspace(_))
        ));
        // non-degenerate ratio rejected
        assert!(matches!(
            DegenerateSubspace::find_pair(&sys, 1.0, 0.3, 0.0),
            Err(Error::DegeneracyViolated { .. })
        ));
        // correct ratio accepted
        let sub = DegenerateSubspace::find_pair(&sys, -3.0, 1.0, 1.0).unwrap();
        assert_eq!(sub.n(), 2);
    }

    #[test]
    fn berry_phase_closed_examples() {
        let b = berry_phase_closed(1.0, PI / 3.0);
        assert!((b.raw + PI).abs() < 1e-12);
        assert!(berry_phase_closed(0.0, 2.2).raw.abs() < 1e-15);
        assert!(berry_phase_closed(5.0, 0.0).raw.abs() < 1e-15);
    }

    #[test]
    fn berry_phase_flux_matches_closed_form() {
        let f = berry_phase_flux(1.0, PI / 3.0, 32).unwrap();
        assert!((f.raw + PI).abs() < 1e-6, "err={}", (f.raw + PI).abs());
        // m=3, θ=π/2 → −6π raw, unwrapped
        let f2 = berry_phase_flux(3.0, PI / 2.0, 48).unwrap();
        assert!((f2.raw + 6.0 * PI).abs() < 1e-6);
        // θ=0 → 0
        let f3 = berry_phase_flux(2.0, 0.0, 32).unwrap();
        assert!(f3.raw.abs() < 1e-9);
        assert!(berry_phase_flux(1.0, 1.0, 15).is_err());
        assert!(berry_phase_flux(1.0, 1.0, 17).is_err());
    }
}
