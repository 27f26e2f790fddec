//! Holonomies of loops in the (φ, θ) control manifold: path-ordered products,
//! the paper's large-ρ closed form for the degenerate pair, and the
//! surface-ordered (non-Abelian Stokes) evaluation.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{self, exp_small, C64, I, ONE};
use crate::spin::SpinSystem;
use crate::wrap_angle;

use super::connection::ConnectionField;

/// Discretized oriented curve s ↦ (φ, θ).
#[derive(Debug, Clone)]
pub struct LoopPath {
    points: Vec<(f64, f64)>,
}

impl LoopPath {
    /// At least 8 segments; closure is not required here (holonomies of open
    /// paths are rejected at evaluation time).
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 9 {
            return Err(Error::PathTooShort {
                min: 8,
                got: points.len().saturating_sub(1),
            });
        }
        Ok(Self { points })
    }

    /// Counterclockwise rectangle starting at (φ₀, θ₀): sides run +φ, +θ, −φ,
    /// −θ (the W₁..W₄ sides of the Stokes construction). `k` segments are
    /// split across the sides in proportion to their lengths.
    pub fn rectangle(rect: &HolonomyRectangle, k: usize) -> Result<Self> {
        let lengths = [
            (rect.phi1 - rect.phi0).abs(),
            (rect.theta1 - rect.theta0).abs(),
            (rect.phi1 - rect.phi0).abs(),
            (rect.theta1 - rect.theta0).abs(),
        ];
        let total: f64 = lengths.iter().sum();
        if total <= 0.0 {
            return Err(Error::BadDiscretization(
                "rectangle has zero perimeter".into(),
            ));
        }
        let counts: Vec<usize> = lengths
            .iter()
            .map(|l| ((k as f64 * l / total).round() as usize).max(2))
            .collect();
        let mut pts = Vec::with_capacity(counts.iter().sum::<usize>() + 1);
        let corners = [
            (rect.phi0, rect.theta0),
            (rect.phi1, rect.theta0),
            (rect.phi1, rect.theta1),
            (rect.phi0, rect.theta1),
        ];
        for side in 0..4 {
            let (a, b) = (corners[side], corners[(side + 1) % 4]);
            let n = counts[side];
            for i in 0..n {
                let f = i as f64 / n as f64;
                pts.push((a.0 + (b.0 - a.0) * f, a.1 + (b.1 - a.1) * f));
            }
        }
        pts.push(corners[0]);
        Self::from_points(pts)
    }

    /// The constant-θ circle used for the Abelian Berry phase, listed with φ
    /// descending from 2π to 0.
    ///
    /// With that orientation the path-ordered holonomy of this loop equals the
    /// geometric factor e^{iφ_Berry} physically acquired under a +φ adiabatic
    /// sweep (coefficient transport runs anti-parallel to path ordering).
    pub fn berry_circle(theta: f64, k: usize) -> Result<Self> {
        let pts: Vec<(f64, f64)> = (0..=k)
            .map(|i| {
                (
                    std::f64::consts::TAU * (1.0 - i as f64 / k as f64),
                    theta,
                )
            })
            .collect();
        Self::from_points(pts)
    }

    /// A zero-area out-and-back excursion from (0, θ₀) to (φ₁, θ₁); closed,
    /// encloses nothing.
    pub fn out_and_back(target: (f64, f64), k: usize) -> Result<Self> {
        let half = (k / 2).max(4);
        let mut pts = Vec::with_capacity(2 * half + 1);
        for i in 0..=half {
            let f = i as f64 / half as f64;
            pts.push((target.0 * f, target.1 * f));
        }
        for i in (0..half).rev() {
            let f = i as f64 / half as f64;
            pts.push((target.0 * f, target.1 * f));
        }
        Self::from_points(pts)
    }

    pub fn reversed(&self) -> Self {
        let mut pts = self.points.clone();
        pts.reverse();
        Self { points: pts }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    /// Closed loops have bitwise-equal first and last samples, with φ compared
    /// modulo one full turn (the control manifold is periodic in φ).
    pub fn is_closed(&self) -> bool {
        let first = self.points.first().unwrap();
        let last = self.points.last().unwrap();
        let dphi = (first.0 - last.0).abs();
        (dphi == 0.0 || dphi == std::f64::consts::TAU) && first.1 == last.1
    }
}

/// The Fig.-2 rectangle [φ₀, φ₁] × [θ₀, θ₁].
#[derive(Debug, Clone, Copy)]
pub struct HolonomyRectangle {
    pub phi0: f64,
    pub phi1: f64,
    pub theta0: f64,
    pub theta1: f64,
}

impl HolonomyRectangle {
    /// The paper's geometry: base corner (0, θ₀), φ-width π/(ρ sinθ₀).
    pub fn paper_geometry(sys: &SpinSystem, m: f64, theta0: f64, theta1: f64) -> Result<Self> {
        sys.index_of(m)?;
        sys.index_of(m + 1.0)?;
        let j = sys.j();
        let rho = ((j - m) * (j + m + 1.0)).sqrt();
        if theta0.sin().abs() < 1e-12 {
            return Err(Error::SingularRectangle);
        }
        Ok(Self {
            phi0: 0.0,
            phi1: std::f64::consts::PI / (rho * theta0.sin()),
            theta0,
            theta1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolonomyMethod {
    ClosedForm,
    PathOrdered,
    Stokes,
    Adiabatic,
}

/// A unitary (to discretization accuracy) n×n holonomy matrix.
#[derive(Debug, Clone)]
pub struct Holonomy {
    pub matrix: Array2<C64>,
    pub method: HolonomyMethod,
}

impl Holonomy {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn unitarity_deviation(&self) -> f64 {
        linalg::unitarity_deviation(&self.matrix)
    }

    /// arg Γ for the 1×1 (Abelian) case, wrapped to (−π, π].
    pub fn phase(&self) -> f64 {
        debug_assert_eq!(self.dim(), 1);
        wrap_angle(self.matrix[(0, 0)].arg())
    }

    pub fn frobenius_distance(&self, other: &Array2<C64>) -> f64 {
        linalg::frobenius_diff(&self.matrix, other)
    }
}

fn ordered_product(conn: &ConnectionField, path: &LoopPath, sign: f64) -> Result<Holonomy> {
    if !path.is_closed() {
        return Err(Error::OpenLoop);
    }
    let n = conn.dim();
    let mut g = linalg::identity(n);
    let pts = path.points();
    for w in pts.windows(2) {
        let (p0, t0) = w[0];
        let (p1, t1) = w[1];
        let (dphi, dth) = (p1 - p0, t1 - t0);
        if dphi == 0.0 && dth == 0.0 {
            continue;
        }
        let (aphi, ath) = conn.eval(0.5 * (p0 + p1), 0.5 * (t0 + t1));
        let gen = aphi.mapv(|z| z * (sign * dphi)) + ath.mapv(|z| z * (sign * dth));
        g = exp_small(&gen).dot(&g);
    }
    Ok(Holonomy {
        matrix: g,
        method: HolonomyMethod::PathOrdered,
    })
}

/// Γ = P exp ∫ A over the loop: the ordered product of midpoint-rule segment
/// exponentials exp(A_φΔφ + A_θΔθ), later segments composing on the left —
/// the W₄W₃W₂W₁ composition for a counterclockwise rectangle.
pub fn holonomy_path_ordered(conn: &ConnectionField, path: &LoopPath) -> Result<Holonomy> {
    ordered_product(conn, path, 1.0)
}

/// P exp{−∫ A} over the loop: the coefficient-transport operator measured by
/// dragging the subspace basis around `path` forward in time (coefficients
/// obey ċ = −A·c).
///
/// For Abelian (1×1) connections this is exactly the conjugate holonomy; for
/// the degenerate pair it belongs to the reversed composition-order family,
/// which agrees with [`holonomy_path_ordered`] of the reversed listing up to
/// reordering corrections that vanish as O(1/ρ²) on the paper-geometry
/// rectangle.
pub fn holonomy_transport(conn: &ConnectionField, path: &LoopPath) -> Result<Holonomy> {
    ordered_product(conn, path, -1.0)
}

/// The large-ρ closed form for the Fig.-2 rectangle on the pair {m, m+1}:
/// exp{−i(cosθ₁ − cosθ₀)[(m + 1/2)·I − (ρ/sinθ₀)·σ₂]}.
pub fn holonomy_closed_form(
    sys: &SpinSystem,
    m: f64,
    theta0: f64,
    theta1: f64,
) -> Result<Holonomy> {
    sys.index_of(m)?;
    sys.index_of(m + 1.0)?;
    if theta0.sin().abs() < 1e-12 {
        return Err(Error::SingularRectangle);
    }
    let j = sys.j();
    let rho = ((j - m) * (j + m + 1.0)).sqrt();
    let d = theta1.cos() - theta0.cos();
    // exponent: −i·d·(m+1/2)·I + i·d·(ρ/sinθ₀)·σ₂
    let mut gen = Array2::<C64>::zeros((2, 2));
    let diag = -I * (d * (m + 0.5));
    let off = I * (d * rho / theta0.sin());
    gen[(0, 0)] = diag;
    gen[(1, 1)] = diag;
    gen[(0, 1)] = off * (-I);
    gen[(1, 0)] = off * I;
    Ok(Holonomy {
        matrix: linalg::exp2x2(&gen),
        method: HolonomyMethod::ClosedForm,
    })
}

fn inverse_small(t: &Array2<C64>) -> Array2<C64> {
    match t.nrows() {
        1 => {
            let mut out = Array2::zeros((1, 1));
            out[(0, 0)] = ONE / t[(0, 0)];
            out
        }
        2 => {
            let det = t[(0, 0)] * t[(1, 1)] - t[(0, 1)] * t[(1, 0)];
            let mut out = Array2::zeros((2, 2));
            out[(0, 0)] = t[(1, 1)] / det;
            out[(0, 1)] = -t[(0, 1)] / det;
            out[(1, 0)] = -t[(1, 0)] / det;
            out[(1, 1)] = t[(0, 0)] / det;
            out
        }
        _ => unreachable!("connections are 1x1 or 2x2"),
    }
}

/// Surface-ordered evaluation of the rectangle holonomy.
///
/// With the paper's field-strength sign convention
/// F = −∂_φA_θ + ∂_θA_φ + [A_φ,A_θ], the product reproducing the
/// counterclockwise W₄W₃W₂W₁ holonomy is
/// Γ = P_θ exp{∫ T⁻¹(−F)T dφ dθ}, where T transports from the base corner up
/// the left edge and then across at constant θ, and later-θ row factors
/// compose on the left (checked against the path-ordered product).
pub fn holonomy_stokes(
    conn: &ConnectionField,
    rect: &HolonomyRectangle,
    grid: (usize, usize),
) -> Result<Holonomy> {
    let (n_sigma, n_tau) = grid;
    if n_sigma < 4 || n_tau < 4 {
        return Err(Error::BadDiscretization(format!(
            "stokes grid {n_sigma}x{n_tau} too coarse (need >= 4 per axis)"
        )));
    }
    let n = conn.dim();
    let dsig = (rect.phi1 - rect.phi0) / n_sigma as f64;
    let dtau = (rect.theta1 - rect.theta0) / n_tau as f64;
    let mut g = linalg::identity(n);
    if dtau == 0.0 || dsig == 0.0 {
        return Ok(Holonomy {
            matrix: g,
            method: HolonomyMethod::Stokes,
        });
    }
    // vertical transport up the left edge, advanced row by row
    let mut vert = {
        let (_, ath) = conn.eval(rect.phi0, rect.theta0 + 0.25 * dtau);
        exp_small(&ath.mapv(|z| z * (0.5 * dtau)))
    };
    for row in 0..n_tau {
        let tau = rect.theta0 + (row as f64 + 0.5) * dtau;
        let mut row_sum = Array2::<C64>::zeros((n, n));
        let mut across = linalg::identity(n);
        for col in 0..n_sigma {
            let sig_mid = rect.phi0 + (col as f64 + 0.5) * dsig;
            let (aphi, _) = conn.eval(sig_mid, tau);
            let half = exp_small(&aphi.mapv(|z| z * (0.5 * dsig)));
            let t = half.dot(&across).dot(&vert);
            let t_inv = inverse_small(&t);
            let f = conn.field_strength_at(sig_mid, tau);
            row_sum += &t_inv.dot(&f).dot(&t).mapv(|z| z * (dsig * dtau));
            across = exp_small(&aphi.mapv(|z| z * dsig)).dot(&across);
        }
        g = exp_small(&row_sum.mapv(|z| -z)).dot(&g);
        if row + 1 < n_tau {
            let (_, ath) = conn.eval(rect.phi0, tau + 0.5 * dtau);
            vert = exp_small(&ath.mapv(|z| z * dtau)).dot(&vert);
        }
    }
    Ok(Holonomy {
        matrix: g,
        method: HolonomyMethod::Stokes,
    })
}
