use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, got: bad.len() });
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.len());
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, got: c.len() });
            }
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum()).collect()
    }

    pub fn column_norms(&self) -> Vec<T> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)] * self[(i, j)]).sum::<T>().sqrt()).collect()
    }

    /// Copy with column `j` divided by `scale[j]`; zero scales leave the column as is.
    pub fn scale_columns(&self, scale: &[T]) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows {
            for (j, &s) in scale.iter().enumerate() {
                if s != T::zero() {
                    m[(i, j)] = m[(i, j)] / s;
                }
            }
        }
        m
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * c).collect() }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Thin SVD `A = U diag(s) V^T` with `s` descending.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    /// `rows x k` with orthonormal columns, `k = min(rows, cols)`.
    pub u: Matrix<T>,
    pub s: Vec<T>,
    /// `cols x k`.
    pub v: Matrix<T>,
}

const MAX_SWEEPS: usize = 80;

/// One-sided Jacobi SVD; relative accuracy of the singular values is
/// near machine precision for well-scaled columns.
pub fn svd<T: Real>(a: &Matrix<T>) -> Svd<T> {
    if a.rows < a.cols {
        let t = svd(&a.transpose());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let (m, n) = (a.rows, a.cols);
    // Work on columns: W = A V, rotate until the columns are orthogonal.
    let mut w: Vec<Vec<T>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<T>> =
        (0..n).map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: T = w[p].iter().map(|&x| x * x).sum();
                let beta: T = w[q].iter().map(|&x| x * x).sum();
                let gamma: T = w[p].iter().zip(&w[q]).map(|(&x, &y)| x * y).sum();
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let (x, y) = (w[p][k], w[q][k]);
                    w[p][k] = c * x - s * y;
                    w[q][k] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (v[p][k], v[q][k]);
                    v[p][k] = c * x - s * y;
                    v[q][k] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<T> = w.iter().map(|c| c.iter().map(|&x| x * x).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    let mut u = Matrix::zeros(m, n);
    let mut vm = Matrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (col, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        for k in 0..m {
            u[(k, col)] = if norms[j] > T::zero() { w[j][k] / norms[j] } else { T::zero() };
        }
        for k in 0..n {
            vm[(k, col)] = v[j][k];
        }
    }
    Svd { u, s, v: vm }
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(a: &Matrix<T>) -> Vec<T> {
    svd(a).s
}

/// Minimum-norm least-squares solution of `A x = b`, discarding singular
/// values below `rcond * s_max`.
pub fn least_squares<T: Real>(a: &Matrix<T>, b: &[T], rcond: T) -> Result<Vec<T>> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch { expected: a.rows, got: b.len() });
    }
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(T::zero());
    let mut x = vec![T::zero(); a.cols];
    for (k, &sk) in d.s.iter().enumerate() {
        if !(sk > rcond * smax) {
            continue;
        }
        let ub: T = (0..a.rows).map(|i| d.u[(i, k)] * b[i]).sum();
        let coef = ub / sk;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = *xj + coef * d.v[(j, k)];
        }
    }
    Ok(x)
}
