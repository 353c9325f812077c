//! Minimal dense complex matrix used by the solvers.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{LseError, Result};
use crate::scalar::Real;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LseError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Complex::one() } else { Complex::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Columns as contiguous vectors, for coordinate-wise solvers.
    pub fn columns(&self) -> Vec<Vec<Complex<T>>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        debug_assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).fold(Complex::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    /// `self^H y`.
    pub fn adj_mul_vec(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![Complex::zero(); self.cols];
        for (row, yi) in self.data.chunks_exact(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * yi;
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(LseError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self self^H`.
    pub fn gram_rows(&self) -> Self {
        let mut g = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let v = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .fold(Complex::zero(), |acc, (a, b)| acc + a * b.conj());
                g.set(i, j, v);
                g.set(j, i, v.conj());
            }
        }
        g
    }

    /// Largest squared singular value by power iteration on `self^H self`.
    pub fn spectral_norm_sqr(&self, iters: usize, tol: T) -> T {
        if self.rows == 0 || self.cols == 0 {
            return T::zero();
        }
        // deterministic, generic start vector
        let mut x: Vec<Complex<T>> = (0..self.cols)
            .map(|j| Complex::new(T::one(), T::lit(0.5 + (j % 7) as f64 * 0.1)))
            .collect();
        let mut est = T::zero();
        for _ in 0..iters {
            let nx = norm(&x);
            if nx == T::zero() {
                return T::zero();
            }
            x.iter_mut().for_each(|v| *v /= nx);
            let y = self.adj_mul_vec(&self.mul_vec(&x));
            let next = norm(&y);
            let done = (next - est).abs() <= tol * next;
            est = next;
            x = y;
            if done {
                break;
            }
        }
        est
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

pub fn norm_sqr<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|v| v.norm_sqr()).sum()
}

pub fn norm<T: Real>(x: &[Complex<T>]) -> T {
    norm_sqr(x).sqrt()
}

/// Solves `A x = b` for Hermitian positive definite `A` by Cholesky.
pub fn cholesky_solve<T: Real>(a: &CMatrix<T>, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(LseError::Dimension(format!(
            "{}x{} system with right-hand side of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let scale = (0..n).map(|i| a.get(i, i).re.abs()).fold(T::zero(), T::max);
    let floor = scale * T::epsilon() * T::lit(n.max(1) as f64);
    let mut l = CMatrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j).re;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        if !(d > floor) {
            return Err(LseError::Singular);
        }
        let d = d.sqrt();
        l.set(j, j, Complex::new(d, T::zero()));
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k).conj();
            }
            l.set(i, j, s / d);
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i).re;
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l.get(k, i).conj() * y[k];
        }
        y[i] = s / l.get(i, i).re;
    }
    Ok(y)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix<f64>) -> Result<Vec<f64>> {
    if a.rows() != a.cols() {
        return Err(LseError::Dimension("eigenvalues of a non-square matrix".into()));
    }
    let n = a.rows();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a.get(i, j));
    let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}
