//! Small dense square matrices, Cholesky factorization and a cyclic Jacobi
//! eigenvalue solver for symmetric input.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use crate::error::{PeakError, Result};

const JACOBI_SWEEPS: usize = 100;
const JACOBI_RTOL: f64 = 1e-13;
const SYMMETRY_RTOL: f64 = 1e-10;
/// Cholesky pivots must exceed this fraction of the trace.
pub const PIVOT_RTOL: f64 = 1e-12;

/// Square matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(PeakError::DimensionMismatch("dimension must be at least 1".into()));
        }
        if data.len() != n * n {
            return Err(PeakError::DimensionMismatch(format!(
                "{} entries for a {n}x{n} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(PeakError::InvalidParameter("matrix entries must be finite".into()));
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PeakError::DimensionMismatch("rows must have length n".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self, rtol: f64) -> bool {
        let tol = rtol * self.frobenius().max(1.0);
        (0..self.n).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// `(M + M^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        let mut s = self.clone();
        for i in 0..self.n {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    /// `self^k` by binary exponentiation.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut result = Self::identity(self.n);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub(crate) fn same_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(PeakError::DimensionMismatch(format!(
                "{}x{} against {}x{}",
                self.n, self.n, other.n, other.n
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in product");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.data.chunks(self.n).collect();
        f.debug_list().entries(rows).finish()
    }
}

/// Lower-triangular `L` with `M = L L^T`. Only the lower triangle of `M` is read.
///
/// Fails with [`PeakError::NotPositiveDefinite`] when a pivot is not above
/// `1e-12 * trace(M)`.
pub fn cholesky(m: &Matrix) -> Result<Matrix> {
    let n = m.dim();
    let threshold = PIVOT_RTOL * m.trace();
    if !(threshold > 0.0) {
        return Err(PeakError::NotPositiveDefinite);
    }
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let pivot = m[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if !(pivot > threshold) {
            return Err(PeakError::NotPositiveDefinite);
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = m[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix with nonzero diagonal.
pub fn lower_inverse(l: &Matrix) -> Matrix {
    let n = l.dim();
    let mut inv = Matrix::zeros(n);
    for col in 0..n {
        for i in col..n {
            let rhs = if i == col { 1.0 } else { 0.0 };
            let s: f64 = (col..i).map(|k| l[(i, k)] * inv[(k, col)]).sum();
            inv[(i, col)] = (rhs - s) / l[(i, i)];
        }
    }
    inv
}

/// All eigenvalues of a symmetric matrix in ascending order, by cyclic Jacobi
/// rotations until the off-diagonal norm is below `1e-13 * ||M||_F`.
pub fn sym_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    if !m.is_symmetric(SYMMETRY_RTOL) {
        return Err(PeakError::NotSymmetric);
    }
    let n = m.dim();
    let mut a = m.symmetrized();
    let target = JACOBI_RTOL * m.frobenius();

    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }

    let mut values: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn sym_eig_bounds(m: &Matrix) -> Result<(f64, f64)> {
    let values = sym_eigenvalues(m)?;
    Ok((values[0], values[values.len() - 1]))
}
