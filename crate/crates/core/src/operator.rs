//! Operators on the (2j+1)-dimensional space: a dense complex matrix plus a
//! structure flag used to pick the right exponential path.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, HermitianEig};
use crate::tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixStructure {
    Diagonal,
    Tridiagonal,
    Dense,
}

#[derive(Debug, Clone)]
pub struct Operator {
    matrix: Array2<C64>,
    structure: MatrixStructure,
}

impl Operator {
    pub fn new(matrix: Array2<C64>, structure: MatrixStructure) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        if !linalg::all_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        Ok(Self { matrix, structure })
    }

    pub fn dense(matrix: Array2<C64>) -> Result<Self> {
        Self::new(matrix, MatrixStructure::Dense)
    }

    /// Build from the matrix, tightening the structure flag to the actual
    /// sparsity pattern.
    pub fn detect(matrix: Array2<C64>) -> Result<Self> {
        let structure = detect_structure(&matrix);
        Self::new(matrix, structure)
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Array2::zeros((n, n));
        for (i, z) in entries.iter().enumerate() {
            m[(i, i)] = *z;
        }
        Self {
            matrix: m,
            structure: MatrixStructure::Diagonal,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: linalg::identity(n),
            structure: MatrixStructure::Diagonal,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn structure(&self) -> MatrixStructure {
        self.structure
    }

    /// True when the declared flag is consistent with the actual sparsity
    /// (a Diagonal flag on a tridiagonal matrix is inconsistent; a Dense flag
    /// is always admissible).
    pub fn structure_is_consistent(&self) -> bool {
        let actual = detect_structure(&self.matrix);
        match self.structure {
            MatrixStructure::Dense => true,
            MatrixStructure::Tridiagonal => actual != MatrixStructure::Dense,
            MatrixStructure::Diagonal => actual == MatrixStructure::Diagonal,
        }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermiticity_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= tolerances::HERMITICITY * self.scale()
    }

    pub fn unitarity_deviation(&self) -> f64 {
        linalg::unitarity_deviation(&self.matrix)
    }

    fn scale(&self) -> f64 {
        linalg::max_abs(&self.matrix).max(1.0)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: linalg::adjoint(&self.matrix),
            structure: self.structure,
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            matrix: self.matrix.mapv(|z| z * s),
            structure: self.structure,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let structure = wider(self.structure, other.structure);
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            structure,
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Operator::detect(self.matrix.dot(&other.matrix))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    /// Eigendecomposition, dispatching tridiagonal-or-better matrices to the
    /// specialised phase-gauge + implicit-QL path.
    pub fn eigh(&self) -> Result<HermitianEig> {
        let dev = self.hermiticity_deviation();
        if dev > 1e-9 * self.scale() {
            return Err(Error::NotHermitian { deviation: dev });
        }
        match self.structure {
            MatrixStructure::Diagonal | MatrixStructure::Tridiagonal => {
                let n = self.dim();
                let diag: Vec<f64> = (0..n).map(|i| self.matrix[(i, i)].re).collect();
                let off: Vec<C64> = (0..n.saturating_sub(1))
                    .map(|i| self.matrix[(i, i + 1)])
                    .collect();
                linalg::eigh_tridiagonal(&diag, &off)
            }
            MatrixStructure::Dense => linalg::eigh(&self.matrix),
        }
    }
}

fn wider(a: MatrixStructure, b: MatrixStructure) -> MatrixStructure {
    use MatrixStructure::*;
    match (a, b) {
        (Diagonal, Diagonal) => Diagonal,
        (Dense, _) | (_, Dense) => Dense,
        _ => Tridiagonal,
    }
}

pub fn detect_structure(m: &Array2<C64>) -> MatrixStructure {
    let n = m.nrows();
    let mut widest = 0usize;
    for i in 0..n {
        for k in 0..n {
            if m[(i, k)] != linalg::ZERO {
                widest = widest.max(i.abs_diff(k));
            }
        }
    }
    match widest {
        0 => MatrixStructure::Diagonal,
        1 => MatrixStructure::Tridiagonal,
        _ => MatrixStructure::Dense,
    }
}

/// AB − BA.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let m = a.matrix().dot(b.matrix()) - b.matrix().dot(a.matrix());
    Operator::detect(m)
}

/// exp(scale·M).
///
/// Hermitian (and anti-Hermitian) matrices go through the eigendecomposition
/// path — diagonal and tridiagonal ones through the specialised tridiagonal
/// solver, which is the intended route for every Hamiltonian in this crate.
/// Anything else falls back to scaling-and-squaring.
pub fn expm(op: &Operator, scale: C64) -> Result<Operator> {
    if !linalg::all_finite(op.matrix()) {
        return Err(Error::NonFinite);
    }
    let sc = linalg::max_abs(op.matrix()).max(1.0);
    let herm_dev = op.hermiticity_deviation();
    if herm_dev <= 1e-9 * sc {
        if op.structure == MatrixStructure::Diagonal {
            let n = op.dim();
            let entries: Vec<C64> = (0..n).map(|i| (scale * op.matrix()[(i, i)]).exp()).collect();
            return Ok(Operator::diagonal(&entries));
        }
        let eig = op.eigh()?;
        let m = eig.map_spectrum(|x| (scale * x).exp());
        return Operator::detect(m);
    }
    // anti-Hermitian M: -iM is Hermitian and exp(scale M) = exp((i scale)(-iM))
    let anti = Operator::new(op.matrix().mapv(|z| z * -linalg::I), op.structure)?;
    if anti.hermiticity_deviation() <= 1e-9 * sc {
        return expm(&anti, scale * linalg::I);
    }
    let m = linalg::expm_series(op.matrix(), scale)?;
    Operator::detect(m)
}

/// The series/scaling route alone, for cross-checks against the
/// eigendecomposition path.
pub fn expm_series(op: &Operator, scale: C64) -> Result<Operator> {
    let m = linalg::expm_series(op.matrix(), scale)?;
    Operator::new(m, MatrixStructure::Dense)
}

/// Convenience: exp(scale·M) with M given as a bare matrix.
pub fn expm_matrix(m: &Array2<C64>, scale: C64) -> Result<Array2<C64>> {
    Ok(expm(&Operator::detect(m.clone())?, scale)?.into_matrix())
}

impl std::ops::Index<(usize, usize)> for Operator {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.matrix[idx]
    }
}
