//! The generator series G = Σ a_kl Jz^k Jy Jz^l whose first-order conjugation
//! turns the nonlinear H₀ = α₀Jz + β₀Jz² into H₀ + γJx, together with its
//! exact geometric resummation.
//!
//! Because Jz is diagonal, every term acts as a scalar weight on the Jy
//! matrix elements: ⟨m′|Jz^k Jy Jz^l|m⟩ = m′^k m^l ⟨m′|Jy|m⟩. Summing the
//! coefficients a_kl = (−1)^{k+l+1} (k+l)!/(k!l!) β₀^{k+l}/α₀^{k+l+1} over
//! k+l = n gives a geometric series in −β₀(m+m′)/α₀, so the resummed entries
//! are G_{m′m} = −(Jy)_{m′m}/(α₀ + β₀(m+m′)).

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, I};
use crate::operator::{expm, MatrixStructure, Operator};
use crate::spin::SpinSystem;

/// The triangular table a_kl, k + l ≤ n_max.
#[derive(Debug, Clone)]
pub struct GeneratorSeries {
    pub alpha0: f64,
    pub beta0: f64,
    pub n_max: usize,
    values: Vec<f64>,
}

impl GeneratorSeries {
    pub fn a(&self, k: usize, l: usize) -> f64 {
        debug_assert!(k + l <= self.n_max);
        self.values[index_of(k, l)]
    }
}

fn index_of(k: usize, l: usize) -> usize {
    let n = k + l;
    n * (n + 1) / 2 + l
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// a_kl = (−1)^{k+l+1} · (k+l)!/(k!·l!) · β₀^{k+l} / α₀^{k+l+1}.
pub fn coefficients(alpha0: f64, beta0: f64, n_max: usize) -> Result<GeneratorSeries> {
    if alpha0 == 0.0 {
        return Err(Error::ZeroAlpha);
    }
    let mut values = Vec::with_capacity((n_max + 1) * (n_max + 2) / 2);
    for n in 0..=n_max {
        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
        let prefactor = sign * beta0.powi(n as i32) / alpha0.powi(n as i32 + 1);
        for l in 0..=n {
            let k = n - l;
            values.push(prefactor * binomial(n, k));
        }
    }
    Ok(GeneratorSeries {
        alpha0,
        beta0,
        n_max,
        values,
    })
}

/// The partial sum of the series truncated at k+l ≤ n_max, evaluated by
/// diagonal scaling of the Jy matrix elements (exact, O(dim) per order).
#[derive(Debug, Clone)]
pub struct TruncatedGenerator {
    pub operator: Operator,
    /// Present when |β₀|(2j−1) ≥ |α₀|, i.e. outside the series' convergence
    /// region; carries the violated bound.
    pub divergence_warning: Option<String>,
}

pub fn generator_truncated(
    sys: &SpinSystem,
    alpha0: f64,
    beta0: f64,
    n_max: usize,
) -> Result<TruncatedGenerator> {
    if alpha0 == 0.0 {
        return Err(Error::ZeroAlpha);
    }
    let bound = beta0.abs() * (2.0 * sys.j() - 1.0);
    let divergence_warning = if bound >= alpha0.abs() {
        Some(format!(
            "series divergence: |beta0|(2j-1) = {bound:.6} >= |alpha0| = {:.6}",
            alpha0.abs()
        ))
    } else {
        None
    };
    let jy = sys.jy();
    let ms = sys.m_values();
    let n = sys.dim();
    let mut g = Array2::<C64>::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            if r.abs_diff(c) != 1 {
                continue;
            }
            let x = ms[r] + ms[c];
            // Σ_{q≤n_max} (−1)^{q+1} β₀^q x^q / α₀^{q+1}
            let ratio = -beta0 * x / alpha0;
            let mut term = -1.0 / alpha0;
            let mut sum = term;
            for _ in 1..=n_max {
                term *= ratio;
                sum += term;
            }
            g[(r, c)] = jy.matrix()[(r, c)] * sum;
        }
    }
    Ok(TruncatedGenerator {
        operator: Operator::new(g, MatrixStructure::Tridiagonal)?,
        divergence_warning,
    })
}

/// The exact resummation: G_{m′m} = −(Jy)_{m′m}/(α₀ + β₀(m+m′)) on the
/// superdiagonals, zero elsewhere.
pub fn generator_resummed(sys: &SpinSystem, alpha0: f64, beta0: f64) -> Result<Operator> {
    if alpha0 == 0.0 {
        return Err(Error::ZeroAlpha);
    }
    let jy = sys.jy();
    let ms = sys.m_values();
    let n = sys.dim();
    let mut g = Array2::<C64>::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            if r.abs_diff(c) != 1 {
                continue;
            }
            let denom = alpha0 + beta0 * (ms[r] + ms[c]);
            if denom.abs() < 1e-12 {
                return Err(Error::DegenerateDenominator { value: denom });
            }
            g[(r, c)] = -jy.matrix()[(r, c)] / denom;
        }
    }
    Operator::new(g, MatrixStructure::Tridiagonal)
}

/// ‖exp(iγG)·H₀·exp(−iγG) − (H₀ + γJx)‖_F with the resummed G; the residual
/// is the second-order remainder and scales as O(γ²).
pub fn first_order_check(sys: &SpinSystem, alpha0: f64, beta0: f64, gamma: f64) -> Result<f64> {
    let g = generator_resummed(sys, alpha0, beta0)?;
    let u = expm(&g, I * gamma)?;
    let h0 = crate::hamiltonian::build_h0(sys, alpha0, beta0);
    let conj = u
        .matrix()
        .dot(h0.matrix())
        .dot(&linalg::adjoint(u.matrix()));
    let target = h0.matrix() + &sys.jx().matrix().mapv(|z| z * gamma);
    Ok(linalg::frobenius_diff(&conj, &target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::operator::commutator;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn coefficient_table_values() {
        let t = coefficients(2.0, 0.5, 6).unwrap();
        // a00 = −1/α₀
        assert!((t.a(0, 0) + 0.5).abs() < 1e-15);
        // a10 = a01 = β₀/α₀²
        assert!((t.a(1, 0) - 0.125).abs() < 1e-15);
        assert!((t.a(0, 1) - 0.125).abs() < 1e-15);
        // symmetry across the whole table
        for n in 0..=6usize {
            for l in 0..=n {
                assert_eq!(t.a(n - l, l), t.a(l, n - l));
            }
        }
        // β₀ = 0 kills every order beyond the first
        let z = coefficients(1.5, 0.0, 4).unwrap();
        for n in 1..=4usize {
            for l in 0..=n {
                assert_eq!(z.a(n - l, l), 0.0);
            }
        }
        assert!(matches!(coefficients(0.0, 1.0, 3), Err(Error::ZeroAlpha)));
    }

    #[test]
    fn coefficient_formula_against_direct_evaluation() {
        let (a0, b0) = (1.3, -0.7);
        let t = coefficients(a0, b0, 8).unwrap();
        let fact = |n: usize| (1..=n).map(|x| x as f64).product::<f64>();
        for k in 0..=4usize {
            for l in 0..=4usize {
                let direct = (-1.0_f64).powi((k + l + 1) as i32) * fact(k + l)
                    / (fact(k) * fact(l))
                    * b0.powi((k + l) as i32)
                    / a0.powi((k + l + 1) as i32);
                assert!((t.a(k, l) - direct).abs() < 1e-12 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn beta_zero_truncation_is_exact_at_zeroth_order() {
        let sys = SpinSystem::new(2.0).unwrap();
        let g = generator_truncated(&sys, 2.0, 0.0, 0).unwrap();
        assert!(g.divergence_warning.is_none());
        let expect = sys.jy().scaled(C64::new(-0.5, 0.0));
        assert!(max_abs_diff(g.operator.matrix(), expect.matrix()) < 1e-15);
        let r = generator_resummed(&sys, 2.0, 0.0).unwrap();
        assert!(max_abs_diff(r.matrix(), expect.matrix()) < 1e-15);
    }

    #[test]
    fn truncated_approaches_resummed() {
        let sys = SpinSystem::new(2.0).unwrap();
        let (a0, b0) = (1.0, 0.1);
        let resummed = generator_resummed(&sys, a0, b0).unwrap();
        let trunc = generator_truncated(&sys, a0, b0, 40).unwrap();
        assert!(trunc.divergence_warning.is_none());
        assert!(max_abs_diff(trunc.operator.matrix(), resummed.matrix()) < 1e-10);
        assert!(trunc.operator.hermiticity_deviation() < 1e-12);
        assert!(resummed.hermiticity_deviation() < 1e-12);
    }

    #[test]
    fn truncation_tail_decreases_geometrically() {
        let sys = SpinSystem::new(3.0).unwrap();
        let (a0, b0) = (1.0, 0.08);
        let mut last: Option<f64> = None;
        for n_max in [10usize, 11, 12, 13, 14] {
            let lo = generator_truncated(&sys, a0, b0, n_max).unwrap();
            let hi = generator_truncated(&sys, a0, b0, n_max + 1).unwrap();
            let change = max_abs_diff(lo.operator.matrix(), hi.operator.matrix());
            if let Some(prev) = last {
                assert!(change < 0.8 * prev, "tail not shrinking: {change} vs {prev}");
            }
            last = Some(change);
        }
    }

    #[test]
    fn divergence_warning_outside_region() {
        let sys = SpinSystem::new(5.0).unwrap();
        // |β₀|(2j−1) = 0.9 ≥ |α₀| = 0.5
        let g = generator_truncated(&sys, 0.5, 0.1, 10).unwrap();
        assert!(g.divergence_warning.is_some());
    }

    #[test]
    fn resummed_satisfies_defining_commutator() {
        // i[G, H₀] = Jx exactly
        let mut rng = StdRng::seed_from_u64(77);
        for j in [1.0, 2.5, 5.0, 10.0] {
            let sys = SpinSystem::new(j).unwrap();
            for _ in 0..5 {
                let a0 = rng.gen_range(0.5..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let b0 = rng.gen_range(-0.2..0.2);
                let g = match generator_resummed(&sys, a0, b0) {
                    Ok(g) => g,
                    Err(Error::DegenerateDenominator { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                let h0 = crate::hamiltonian::build_h0(&sys, a0, b0);
                let comm = commutator(&g, &h0).unwrap().scaled(I);
                assert!(
                    max_abs_diff(comm.matrix(), sys.jx().matrix()) < 1e-12,
                    "j={j} a0={a0} b0={b0}"
                );
            }
        }
    }

    #[test]
    fn resummed_entry_formula() {
        // j=1, α₀=2, β₀=0.3 → G_{1,0} = −(Jy)_{1,0}/(2+0.3·(0+1))... indices
        // here are m-values: the (m′=1, m=0) entry divides by α₀+β₀(1+0)
        let sys = SpinSystem::new(1.0).unwrap();
        let g = generator_resummed(&sys, 2.0, 0.3).unwrap();
        let jy = sys.jy();
        let r = sys.index_of(1.0).unwrap();
        let c = sys.index_of(0.0).unwrap();
        let expect = -jy.matrix()[(r, c)] / (2.0 + 0.3);
        assert!((g.matrix()[(r, c)] - expect).norm() < 1e-15);
        // and the truncated series reproduces it
        let t = generator_truncated(&sys, 2.0, 0.3, 60).unwrap();
        assert!((t.operator.matrix()[(r, c)] - expect).norm() < 1e-12);
    }

    #[test]
    fn degenerate_denominator_rejected() {
        let sys = SpinSystem::new(2.0).unwrap();
        // α₀ + β₀(m+m′) = 0 at m+m′ = 1 when α₀/β₀ = −1
        assert!(matches!(
            generator_resummed(&sys, -1.0, 1.0),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn first_order_residual_quadratic_scaling() {
        let sys = SpinSystem::new(5.0).unwrap();
        let (a0, b0) = (1.0, 0.05);
        let r1 = first_order_check(&sys, a0, b0, 0.01).unwrap();
        let r2 = first_order_check(&sys, a0, b0, 0.005).unwrap();
        let ratio = r1 / r2;
        assert!((3.5..=4.5).contains(&ratio), "ratio={ratio}");
        // γ = 0 → residual 0
        let r0 = first_order_check(&sys, a0, b0, 0.0).unwrap();
        assert!(r0 < 1e-13);
        // β₀ = 0: exact rotation still deviates from the linear target at O(γ²)
        let q1 = first_order_check(&sys, 1.0, 0.0, 0.02).unwrap();
        let q2 = first_order_check(&sys, 1.0, 0.0, 0.01).unwrap();
        assert!((3.5..=4.5).contains(&(q1 / q2)), "ratio={}", q1 / q2);
    }
}
