//! Dense complex linear algebra specialised to the Hermitian matrices this
//! crate produces.
//!
//! Two independent exponential routes are kept deliberately separate so they
//! can cross-check each other: an eigendecomposition route (complex Hermitian
//! tridiagonal via phase gauging + implicit QL, dense Hermitian via Householder
//! reduction to tridiagonal) and a scaling-and-squaring series route that never
//! touches the eigensolver.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag(&Array1::from_elem(n, ONE))
}

pub fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn frobenius_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Largest element of |M − M†|.
pub fn hermiticity_deviation(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for k in i..n {
            dev = dev.max((m[(i, k)] - m[(k, i)].conj()).norm());
        }
    }
    dev
}

/// Largest element of |U†U − I|.
pub fn unitarity_deviation(u: &Array2<C64>) -> f64 {
    max_abs_diff(&adjoint(u).dot(u), &identity(u.nrows()))
}

pub fn all_finite(m: &Array2<C64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigendecomposition of a Hermitian matrix: M = V diag(values) V†.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    /// Columns are orthonormal eigenvectors.
    pub vectors: Array2<C64>,
}

impl HermitianEig {
    /// Reassemble f(M) = V diag(f(values)) V† for a scalar map on the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> Array2<C64> {
        let n = self.values.len();
        let mut out = Array2::zeros((n, n));
        for a in 0..n {
            let fa = f(self.values[a]);
            if fa == ZERO {
                continue;
            }
            for i in 0..n {
                let via = self.vectors[(i, a)] * fa;
                for k in 0..n {
                    out[(i, k)] += via * self.vectors[(k, a)].conj();
                }
            }
        }
        out
    }

    /// Apply f(M) to a vector without forming the matrix.
    pub fn apply_spectrum(&self, f: impl Fn(f64) -> C64, psi: &Array1<C64>) -> Array1<C64> {
        let n = self.values.len();
        let mut coeff = Array1::<C64>::zeros(n);
        for a in 0..n {
            let mut c = ZERO;
            for i in 0..n {
                c += self.vectors[(i, a)].conj() * psi[i];
            }
            coeff[a] = c * f(self.values[a]);
        }
        let mut out = Array1::<C64>::zeros(n);
        for a in 0..n {
            let ca = coeff[a];
            for i in 0..n {
                out[i] += self.vectors[(i, a)] * ca;
            }
        }
        out
    }
}

/// Implicit-QL iteration with Wilkinson-style shifts on a real symmetric
/// tridiagonal matrix; rotations are accumulated into `z`.
///
/// `d` holds the diagonal and returns the eigenvalues; `e[i]` couples i and
/// i+1 (e[n-1] is workspace).
fn tqli(d: &mut [f64], e: &mut [f64], z: &mut Array2<f64>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenNoConvergence(60));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut p = 0.0_f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigendecomposition of a complex Hermitian tridiagonal matrix given its real
/// diagonal and complex superdiagonal.
///
/// A diagonal phase similarity turns the superdiagonal real, after which the
/// implicit-QL iteration applies.
pub fn eigh_tridiagonal(diag: &[f64], offdiag: &[C64]) -> Result<HermitianEig> {
    let n = diag.len();
    if n == 0 {
        return Ok(HermitianEig {
            values: vec![],
            vectors: Array2::zeros((0, 0)),
        });
    }
    if offdiag.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: offdiag.len() + 1,
        });
    }
    // phases u with u_{i+1} = u_i e_i / |e_i| make u_i e_i conj(u_{i+1}) = |e_i|
    let mut u = vec![ONE; n];
    for i in 0..n - 1 {
        let mag = offdiag[i].norm();
        u[i + 1] = if mag > 0.0 {
            u[i] * offdiag[i] / C64::new(mag, 0.0)
        } else {
            u[i]
        };
    }
    let mut d: Vec<f64> = diag.to_vec();
    let mut e: Vec<f64> = (0..n)
        .map(|i| if i < n - 1 { offdiag[i].norm() } else { 0.0 })
        .collect();
    let mut z = Array2::<f64>::eye(n);
    tqli(&mut d, &mut e, &mut z)?;
    // eigenvectors of M are conj(u_i) z[i, a]
    let mut vectors = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        let ui = u[i].conj();
        for a in 0..n {
            vectors[(i, a)] = ui * C64::new(z[(i, a)], 0.0);
        }
    }
    Ok(HermitianEig { values: d, vectors })
}

/// Eigendecomposition of a dense Hermitian matrix via Householder reduction to
/// tridiagonal form followed by the implicit-QL iteration.
pub fn eigh(m: &Array2<C64>) -> Result<HermitianEig> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            left: n,
            right: m.ncols(),
        });
    }
    if !all_finite(m) {
        return Err(Error::NonFinite);
    }
    let dev = hermiticity_deviation(m);
    let scale = max_abs(m).max(1.0);
    if dev > 1e-9 * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    if n == 0 {
        return Ok(HermitianEig {
            values: vec![],
            vectors: Array2::zeros((0, 0)),
        });
    }
    let mut a = m.clone();
    let mut q = identity(n);
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut x = Array1::<C64>::zeros(len);
        for i in 0..len {
            x[i] = a[(k + 1 + i, k)];
        }
        let norm_x = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let below = x.iter().skip(1).map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if below <= 1e-300 || norm_x <= 1e-300 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / C64::new(x[0].norm(), 0.0)
        } else {
            ONE
        };
        let alpha = -phase * C64::new(norm_x, 0.0);
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn <= 1e-300 {
            continue;
        }
        v.mapv_inplace(|z| z / C64::new(vn, 0.0));
        // Hermitian update of the trailing block: A <- P A P, P = I - 2vv†
        let mut w = Array1::<C64>::zeros(len);
        for i in 0..len {
            let mut acc = ZERO;
            for jcol in 0..len {
                acc += a[(k + 1 + i, k + 1 + jcol)] * v[jcol];
            }
            w[i] = acc;
        }
        let c: C64 = v
            .iter()
            .zip(w.iter())
            .map(|(vi, wi)| vi.conj() * wi)
            .sum();
        for i in 0..len {
            for jcol in 0..len {
                let upd = -2.0 * v[i] * w[jcol].conj() - 2.0 * w[i] * v[jcol].conj()
                    + 4.0 * c * v[i] * v[jcol].conj();
                a[(k + 1 + i, k + 1 + jcol)] += upd;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in 2..=len {
            a[(k + i, k)] = ZERO;
            a[(k, k + i)] = ZERO;
        }
        // Q <- Q P on the trailing columns
        for row in 0..n {
            let mut acc = ZERO;
            for jcol in 0..len {
                acc += q[(row, k + 1 + jcol)] * v[jcol];
            }
            for jcol in 0..len {
                q[(row, k + 1 + jcol)] -= 2.0 * acc * v[jcol].conj();
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let offdiag: Vec<C64> = (0..n - 1).map(|i| a[(i, i + 1)]).collect();
    let tri = eigh_tridiagonal(&diag, &offdiag)?;
    let vectors = q.dot(&tri.vectors);
    Ok(HermitianEig {
        values: tri.values,
        vectors,
    })
}

/// exp(scale·M) by scaling and squaring of the Taylor series. Independent of
/// the eigendecomposition route; works for arbitrary square M.
pub fn expm_series(m: &Array2<C64>, scale: C64) -> Result<Array2<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            left: n,
            right: m.ncols(),
        });
    }
    if !all_finite(m) || !(scale.re.is_finite() && scale.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let a = m.mapv(|z| z * scale);
    // 1-norm (max column sum)
    let mut norm = 0.0_f64;
    for c in a.columns() {
        norm = norm.max(c.iter().map(|z| z.norm()).sum());
    }
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a.mapv(|z| z / C64::new(2.0_f64.powi(s as i32), 0.0));
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..200 {
        term = term.dot(&b).mapv(|z| z / C64::new(k as f64, 0.0));
        result += &term;
        if max_abs(&term) < 1e-19 {
            break;
        }
    }
    for _ in 0..s {
        result = result.dot(&result);
    }
    Ok(result)
}

/// Exact exponential of a 2x2 complex matrix via the Cayley-Hamilton closed
/// form; used on the hot paths of loop integration.
pub fn exp2x2(m: &Array2<C64>) -> Array2<C64> {
    debug_assert_eq!(m.nrows(), 2);
    let a = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let b00 = m[(0, 0)] - a;
    let b01 = m[(0, 1)];
    let b10 = m[(1, 0)];
    let s2 = b00 * b00 + b01 * b10;
    let s = s2.sqrt();
    let (ch, shs) = if s.norm() < 1e-6 {
        // cosh s, sinh(s)/s by series to avoid 0/0
        let ch = ONE + s2 / 2.0 + s2 * s2 / 24.0;
        let shs = ONE + s2 / 6.0 + s2 * s2 / 120.0;
        (ch, shs)
    } else {
        (s.cosh(), s.sinh() / s)
    };
    let ea = a.exp();
    let mut out = Array2::<C64>::zeros((2, 2));
    out[(0, 0)] = ea * (ch + shs * b00);
    out[(0, 1)] = ea * shs * b01;
    out[(1, 0)] = ea * shs * b10;
    out[(1, 1)] = ea * (ch - shs * b00);
    out
}

/// Exponential of a 1x1 or 2x2 matrix (loop-integration segments).
pub fn exp_small(m: &Array2<C64>) -> Array2<C64> {
    match m.nrows() {
        1 => {
            let mut out = Array2::<C64>::zeros((1, 1));
            out[(0, 0)] = m[(0, 0)].exp();
            out
        }
        2 => exp2x2(m),
        _ => expm_series(m, ONE).expect("finite small matrix"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(n: usize, rng: &mut StdRng) -> Array2<C64> {
        let mut m = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            m[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
            for k in i + 1..n {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, k)] = z;
                m[(k, i)] = z.conj();
            }
        }
        m
    }

    fn random_tridiag(n: usize, rng: &mut StdRng) -> (Vec<f64>, Vec<C64>) {
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let off: Vec<C64> = (0..n - 1)
            .map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        (diag, off)
    }

    fn tridiag_matrix(diag: &[f64], off: &[C64]) -> Array2<C64> {
        let n = diag.len();
        let mut m = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            m[(i, i)] = C64::new(diag[i], 0.0);
            if i + 1 < n {
                m[(i, i + 1)] = off[i];
                m[(i + 1, i)] = off[i].conj();
            }
        }
        m
    }

    #[test]
    fn tridiagonal_eig_reconstructs() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in [1usize, 2, 3, 7, 25, 101] {
            let (d, e) = random_tridiag(n.max(1), &mut rng);
            let m = tridiag_matrix(&d, &e);
            let eig = eigh_tridiagonal(&d, &e).unwrap();
            let rebuilt = eig.map_spectrum(|x| C64::new(x, 0.0));
            assert!(
                max_abs_diff(&rebuilt, &m) < 1e-11,
                "n={n} err={}",
                max_abs_diff(&rebuilt, &m)
            );
            assert!(unitarity_deviation(&eig.vectors) < 1e-12);
        }
    }

    #[test]
    fn dense_eig_reconstructs() {
        let mut rng = StdRng::seed_from_u64(13);
        for n in [2usize, 3, 5, 12, 40] {
            let m = random_hermitian(n, &mut rng);
            let eig = eigh(&m).unwrap();
            let rebuilt = eig.map_spectrum(|x| C64::new(x, 0.0));
            assert!(
                max_abs_diff(&rebuilt, &m) < 1e-11,
                "n={n} err={}",
                max_abs_diff(&rebuilt, &m)
            );
            assert!(unitarity_deviation(&eig.vectors) < 1e-12);
        }
    }

    #[test]
    fn dense_eig_rejects_non_hermitian() {
        let mut m = Array2::<C64>::zeros((2, 2));
        m[(0, 1)] = ONE;
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn series_matches_eig_on_tridiagonals() {
        // dual-route consistency up to dim 101 (j = 50)
        let mut rng = StdRng::seed_from_u64(29);
        for n in [3usize, 11, 41, 101] {
            let (d, e) = random_tridiag(n, &mut rng);
            let m = tridiag_matrix(&d, &e);
            let eig = eigh_tridiagonal(&d, &e).unwrap();
            for scale in [C64::new(0.0, -0.37), C64::new(0.21, 0.0)] {
                let via_eig = eig.map_spectrum(|x| (scale * x).exp());
                let via_series = expm_series(&m, scale).unwrap();
                assert!(
                    max_abs_diff(&via_eig, &via_series) < 1e-9,
                    "n={n} err={}",
                    max_abs_diff(&via_eig, &via_series)
                );
            }
        }
    }

    #[test]
    fn exp2x2_matches_series() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let mut m = Array2::<C64>::zeros((2, 2));
            for i in 0..2 {
                for k in 0..2 {
                    m[(i, k)] = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                }
            }
            let a = exp2x2(&m);
            let b = expm_series(&m, ONE).unwrap();
            assert!(max_abs_diff(&a, &b) < 1e-12);
        }
        // near-zero branch
        let m = Array2::<C64>::zeros((2, 2));
        assert!(max_abs_diff(&exp2x2(&m), &identity(2)) < 1e-15);
    }

    #[test]
    fn expm_zero_is_identity() {
        let mut rng = StdRng::seed_from_u64(5);
        let m = random_hermitian(6, &mut rng);
        let e = expm_series(&m, ZERO).unwrap();
        assert!(max_abs_diff(&e, &identity(6)) < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn prop_eig_unitary_vectors(seed in 0u64..1000, n in 2usize..24) {
            let mut rng = StdRng::seed_from_u64(seed);
            let m = random_hermitian(n, &mut rng);
            let eig = eigh(&m).unwrap();
            prop_assert!(unitarity_deviation(&eig.vectors) < 1e-11);
        }
    }
}
