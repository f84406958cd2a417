//! Small dense linear algebra used by the estimation and PCA code.
//!
//! Matrices here are tiny (model dimension d is single digits, PCA ambient
//! dimension is a few hundred), so the implementations favor clarity and
//! determinism over blocking or vectorization.

use crate::error::{Error, Result};
use crate::scalar::{sc, Scalar};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        assert!(!rows.is_empty(), "from_rows: empty");
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "from_rows: ragged input");
            data.extend_from_slice(r);
        }
        Mat {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Mat<T> {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul: shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for j in 0..other.cols {
                    out_row[j] += a * orow[j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec: shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum::<T>()
            })
            .collect()
    }

    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Mat::from_flat(self.rows, self.cols, data)
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        Mat::from_flat(self.rows, self.cols, data)
    }

    pub fn scale(&self, s: T) -> Mat<T> {
        Mat::from_flat(self.rows, self.cols, self.data.iter().map(|&a| a * s).collect())
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&a| a * a).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &a| acc.max(a.abs()))
    }

    /// Symmetrize in place: M <- (M + M^T)/2.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        let half = sc::<T>(0.5);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let m = (self[(i, j)] + self[(j, i)]) * half;
                self[(i, j)] = m;
                self[(j, i)] = m;
            }
        }
    }
}

impl<T: Scalar> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Least-squares solve of `A x = b` (one column per rhs column) by Householder QR.
///
/// Returns `Err(DegenerateRegressors)` when `A` is numerically rank-deficient.
pub fn qr_least_squares<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Result<Mat<T>> {
    let m = a.rows();
    let n = a.cols();
    assert_eq!(b.rows(), m, "qr_least_squares: rhs rows");
    if m < n {
        return Err(Error::InsufficientData { needed: n, got: m });
    }
    let mut r = a.clone();
    let mut qtb = b.clone();
    let nrhs = b.cols();

    // Householder triangularization, applying reflectors to the rhs as we go.
    for k in 0..n {
        let mut norm_sq = T::zero();
        for i in k..m {
            let v = r[(i, k)];
            norm_sq += v * v;
        }
        let norm = norm_sq.sqrt();
        if norm == T::zero() {
            return Err(Error::DegenerateRegressors);
        }
        let alpha = if r[(k, k)] >= T::zero() { -norm } else { norm };
        let mut v = vec![T::zero(); m - k];
        v[0] = r[(k, k)] - alpha;
        for i in (k + 1)..m {
            v[i - k] = r[(i, k)];
        }
        let vtv = v.iter().map(|&x| x * x).sum::<T>();
        if vtv > T::zero() {
            let two = sc::<T>(2.0);
            for j in k..n {
                let mut dot = T::zero();
                for i in k..m {
                    dot += v[i - k] * r[(i, j)];
                }
                let f = two * dot / vtv;
                for i in k..m {
                    let d = f * v[i - k];
                    r[(i, j)] -= d;
                }
            }
            for j in 0..nrhs {
                let mut dot = T::zero();
                for i in k..m {
                    dot += v[i - k] * qtb[(i, j)];
                }
                let f = two * dot / vtv;
                for i in k..m {
                    let d = f * v[i - k];
                    qtb[(i, j)] -= d;
                }
            }
        }
        r[(k, k)] = alpha;
        for i in (k + 1)..m {
            r[(i, k)] = T::zero();
        }
    }

    // Rank check on the diagonal of R.
    let mut max_diag = T::zero();
    for k in 0..n {
        max_diag = max_diag.max(r[(k, k)].abs());
    }
    let tol = max_diag * sc::<T>(1e-12) * T::from_usize(m.max(n));
    for k in 0..n {
        if r[(k, k)].abs() <= tol {
            return Err(Error::DegenerateRegressors);
        }
    }

    // Back substitution.
    let mut x = Mat::zeros(n, nrhs);
    for j in 0..nrhs {
        for i in (0..n).rev() {
            let mut s = qtb[(i, j)];
            for k in (i + 1)..n {
                s -= r[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = s / r[(i, i)];
        }
    }
    Ok(x)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in nonincreasing order and the matching eigenvectors
/// as columns of the returned matrix.
pub fn symmetric_eigen<T: Scalar>(s: &Mat<T>) -> (Vec<T>, Mat<T>) {
    let n = s.rows();
    assert_eq!(n, s.cols(), "symmetric_eigen: square input required");
    let mut a = s.clone();
    a.symmetrize();
    let mut v = Mat::identity(n);

    let off = |a: &Mat<T>| -> T {
        let mut acc = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
        acc.sqrt()
    };

    let frob = a.frobenius_norm().max(T::min_positive_value());
    let tol = frob * sc::<T>(1e-14) * T::from_usize(n);
    let max_sweeps = 60;

    for _ in 0..max_sweeps {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= tol / T::from_usize(n * n + 1) {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (sc::<T>(2.0) * apq);
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let eigvals: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let mut eigvecs = Mat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            eigvecs[(k, new_col)] = v[(k, old_col)];
        }
    }
    (eigvals, eigvecs)
}

/// Cholesky factorization `S = L L^T` for a symmetric positive-definite matrix.
/// Returns `None` when a pivot is not strictly positive.
pub fn cholesky<T: Scalar>(s: &Mat<T>) -> Option<Mat<T>> {
    let n = s.rows();
    assert_eq!(n, s.cols());
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = s[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= T::zero() {
                    return None;
                }
                l[(i, j)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Solve `L L^T x = b` given the Cholesky factor `L`.
pub fn cholesky_solve<T: Scalar>(l: &Mat<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    assert_eq!(b.len(), n);
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// log-determinant of a symmetric positive-definite matrix via Cholesky.
pub fn logdet_spd<T: Scalar>(s: &Mat<T>) -> Option<T> {
    let l = cholesky(s)?;
    let mut acc = T::zero();
    for i in 0..s.rows() {
        acc += l[(i, i)].ln();
    }
    Some(acc * sc::<T>(2.0))
}

/// Symmetric square root of a positive-semidefinite matrix.
///
/// Eigenvalues in `[-psd_tol, 0)` are clamped to zero; anything below
/// `-psd_tol` is an error.
pub fn symmetric_sqrt<T: Scalar>(s: &Mat<T>, psd_tol: T) -> Result<Mat<T>> {
    let n = s.rows();
    let (vals, vecs) = symmetric_eigen(s);
    let mut scaled = vecs.clone();
    for (j, &lambda) in vals.iter().enumerate() {
        if lambda < -psd_tol {
            return Err(Error::NotPsd {
                min_eig: lambda.to_f64_lossy(),
            });
        }
        let root = lambda.max(T::zero()).sqrt();
        for i in 0..n {
            scaled[(i, j)] *= root;
        }
    }
    Ok(scaled.matmul(&vecs.transpose()))
}

/// Spectral radius estimate by normalized power iteration with averaged
/// per-step growth. Used only for stationarity diagnostics.
pub fn spectral_radius<T: Scalar>(a: &Mat<T>, iterations: usize) -> T {
    let n = a.rows();
    assert_eq!(n, a.cols());
    if n == 0 {
        return T::zero();
    }
    let mut v: Vec<T> = (0..n)
        .map(|i| T::one() + sc::<T>(0.01) * T::from_usize(i))
        .collect();
    let norm0 = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    for x in v.iter_mut() {
        *x /= norm0;
    }
    let mut log_growth = T::zero();
    let burn = iterations / 4;
    let mut counted = 0usize;
    for it in 0..iterations {
        let w = a.matvec(&v);
        let norm = w.iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm == T::zero() {
            return T::zero();
        }
        if it >= burn {
            log_growth += norm.ln();
            counted += 1;
        }
        v = w.into_iter().map(|x| x / norm).collect();
    }
    if counted == 0 {
        T::zero()
    } else {
        (log_growth / T::from_usize(counted)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn qr_solves_exact_system() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0], vec![0.0, 1.0]]);
        let x_true = Mat::from_rows(&[vec![1.5], vec![-2.0]]);
        let b = a.matmul(&x_true);
        let x = qr_least_squares(&a, &b).unwrap();
        assert_abs_diff_eq!(x[(0, 0)], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x[(1, 0)], -2.0, epsilon = 1e-12);
    }

    #[test]
    fn qr_matches_nalgebra_pseudoinverse() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(7, 0);
        let m = 20;
        let n = 5;
        let mut a = Mat::<f64>::zeros(m, n);
        let mut b = Mat::<f64>::zeros(m, 2);
        for i in 0..m {
            for j in 0..n {
                a[(i, j)] = rng.gen_range(-1.0..1.0);
            }
            b[(i, 0)] = rng.gen_range(-1.0..1.0);
            b[(i, 1)] = rng.gen_range(-1.0..1.0);
        }
        let x = qr_least_squares(&a, &b).unwrap();

        let na = nalgebra::DMatrix::from_fn(m, n, |i, j| a[(i, j)]);
        let nb = nalgebra::DMatrix::from_fn(m, 2, |i, j| b[(i, j)]);
        let pinv = na.pseudo_inverse(1e-13).unwrap();
        let nx = pinv * nb;
        for i in 0..n {
            for j in 0..2 {
                assert_abs_diff_eq!(x[(i, j)], nx[(i, j)], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn qr_detects_rank_deficiency() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]);
        let b = Mat::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]);
        assert!(matches!(
            qr_least_squares(&a, &b),
            Err(Error::DegenerateRegressors)
        ));
    }

    #[test]
    fn jacobi_matches_nalgebra() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(11, 0);
        let n = 16;
        let mut s = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        let (vals, vecs) = symmetric_eigen(&s);
        let ns = nalgebra::DMatrix::from_fn(n, n, |i, j| s[(i, j)]);
        let mut nvals: Vec<f64> = ns.symmetric_eigen().eigenvalues.iter().copied().collect();
        nvals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in vals.iter().zip(&nvals) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        // Columns are eigenvectors: S v = lambda v.
        for j in 0..n {
            let col: Vec<f64> = (0..n).map(|i| vecs[(i, j)]).collect();
            let sv = s.matvec(&col);
            for i in 0..n {
                assert_abs_diff_eq!(sv[i], vals[j] * col[i], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn cholesky_and_solve() {
        let s = Mat::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let l = cholesky(&s).unwrap();
        let x = cholesky_solve(&l, &[1.0, 2.0]);
        // Direct: inverse of [[4,2],[2,3]] is 1/8 [[3,-2],[-2,4]].
        assert_abs_diff_eq!(x[0], (3.0 - 4.0) / 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], (-2.0 + 8.0) / 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(logdet_spd(&s).unwrap(), (8.0f64).ln(), epsilon = 1e-12);
    }

    #[test]
    fn sqrt_roundtrip() {
        let s = Mat::from_rows(&[vec![2.0, 0.5, 0.0], vec![0.5, 1.0, 0.2], vec![0.0, 0.2, 0.7]]);
        let r = symmetric_sqrt(&s, 1e-10).unwrap();
        let back = r.matmul(&r.transpose());
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(back[(i, j)], s[(i, j)], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn spectral_radius_diagonal() {
        let a = Mat::from_rows(&[vec![0.9, 0.0], vec![0.0, 0.3]]);
        let rho = spectral_radius(&a, 400);
        assert_abs_diff_eq!(rho, 0.9, epsilon = 1e-6);
    }
}
