//! Small dense symmetric linear algebra: cyclic Jacobi eigenvalues and a
//! Cholesky SPD solver. Gram matrices here are at most a few hundred rows,
//! so simplicity wins over blocking.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Max |a_ij - a_ji| relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    /// Comma-separated rows, full float precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{:e}", self[(i, j)]));
            }
            out.push('\n');
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

fn require_symmetric(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSymmetric);
    }
    if a.symmetry_defect() > 1e-12 {
        return Err(Error::NotSymmetric);
    }
    Ok(())
}

fn offdiag_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Sweeps run until the off-diagonal norm falls below
/// `1e-12 * |A|_F`.
pub fn jacobi_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    require_symmetric(a)?;
    let n = a.rows();
    let mut m = a.clone();
    let scale = m.frobenius_norm();
    if scale == 0.0 || n == 1 {
        let mut d: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        return Ok(d);
    }
    let target = 1e-12 * scale;
    for _sweep in 0..100 {
        if offdiag_norm(&m) <= target {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = m[(k, p)];
                        let akq = m[(k, q)];
                        m[(k, p)] = c * akp - s * akq;
                        m[(p, k)] = m[(k, p)];
                        m[(k, q)] = s * akp + c * akq;
                        m[(q, k)] = m[(k, q)];
                    }
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &Matrix) -> Result<f64> {
    Ok(jacobi_eigenvalues(a)?[0])
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky_factor(a: &Matrix) -> Result<Matrix> {
    require_symmetric(a)?;
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag.is_finite() && diag > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        l[(j, j)] = diag.sqrt();
        for i in (j + 1)..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / l[(j, j)];
        }
    }
    Ok(l)
}

/// Solves `A x = b` given the Cholesky factor `L` of `A`.
pub fn solve_with_factor(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    assert_eq!(b.len(), n);
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[(i, k)] * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v -= l[(k, i)] * x[k];
        }
        x[i] = v / l[(i, i)];
    }
    x
}

/// Solves `A x = b` for symmetric positive-definite `A`.
pub fn cholesky_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: b.len(),
        });
    }
    Ok(solve_with_factor(&cholesky_factor(a)?, b))
}
