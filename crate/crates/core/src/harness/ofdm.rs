use num_complex::Complex;

use crate::error::{LseError, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::scalar::Real;

/// Frequency-flat equivalent `H_t W_t^H` of an `L`-subcarrier OFDM link.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmChannel<T> {
    /// `KL x NL`; row `kK + r` is user `r` on subcarrier `k`, column `iL + m` is time sample `m` of antenna `i`.
    pub matrix: CMatrix<T>,
    pub subcarriers: usize,
    pub users: usize,
    pub antennas: usize,
    /// `max |W W^H - I|` of the IFFT matrix.
    pub unitarity_residual: T,
}

/// Unitary `L`-point IFFT matrix, `W[m, k] = e^{j 2 pi m k / L} / sqrt(L)`.
fn ifft_matrix<T: Real>(l: usize) -> CMatrix<T> {
    let scale = T::lit((l as f64).sqrt().recip());
    CMatrix::from_fn(l, l, |m, k| {
        // reduce the phase index first so large L stays exact
        let idx = (m * k) % l;
        Complex::from_polar(scale, T::lit(core::f64::consts::TAU * idx as f64 / l as f64))
    })
}

/// Builds `H_t W_t^H` from the per-subcarrier channels `H_1..H_L` (all `K x N`). In `H_t`,
/// column `iL + k` carries column `i` of `H_k` in the row block of subcarrier `k` and is zero
/// elsewhere; `W_t` is block diagonal with `N` copies of the IFFT matrix.
pub fn ofdm_equivalent_channel<T: Real>(h_list: &[CMatrix<T>]) -> Result<OfdmChannel<T>> {
    let l = h_list.len();
    let first = h_list.first().ok_or(LseError::Empty)?;
    let (k, n) = (first.rows(), first.cols());
    if k == 0 || n == 0 {
        return Err(LseError::Empty);
    }
    if let Some(bad) = h_list.iter().position(|h| h.rows() != k || h.cols() != n) {
        return Err(LseError::Dimension(format!("subcarrier {bad} channel is not {k}x{n}")));
    }
    let w = ifft_matrix::<T>(l);
    let unitarity_residual = w.mul(&w.adjoint())?.max_abs_diff(&CMatrix::identity(l));
    if unitarity_residual > T::lit(1e-10) {
        return Err(LseError::Degenerate(format!("IFFT matrix not unitary: {unitarity_residual}")));
    }
    let matrix = CMatrix::from_fn(k * l, n * l, |row, col| {
        let (sub, r) = (row / k, row % k);
        let (i, m) = (col / l, col % l);
        h_list[sub].get(r, i) * w.get(m, sub).conj()
    });
    Ok(OfdmChannel { matrix, subcarriers: l, users: k, antennas: n, unitarity_residual })
}

/// Eigenvalues of `(H_t W_t^H)^H (H_t W_t^H)`, ascending.
///
/// Undoing `W_t` gives back `H_t`, whose Gram matrix is block diagonal (one `N x N` block per
/// subcarrier) up to a permutation; the blocks are diagonalised separately.
pub fn ofdm_gram_eigenvalues<T: Real>(ch: &OfdmChannel<T>) -> Result<Vec<f64>> {
    let (l, k, n) = (ch.subcarriers, ch.users, ch.antennas);
    let w = ifft_matrix::<T>(l);
    let e = &ch.matrix;
    let mut eig = Vec::with_capacity(n * l);
    for sub in 0..l {
        // block[r, i] = H_t[(sub, r), (i, sub)] = sum_m E[(sub, r), (i, m)] W[m, sub]
        let block = CMatrix::from_fn(k, n, |r, i| {
            let row = e.row(sub * k + r);
            (0..l).map(|m| row[i * l + m] * w.get(m, sub)).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
        });
        let gram = block.adjoint().mul(&block)?;
        let gram64 = CMatrix::from_fn(n, n, |a, b| {
            let v = gram.get(a, b);
            Complex::new(v.re.as_f64(), v.im.as_f64())
        });
        eig.extend(hermitian_eigenvalues(&gram64)?);
    }
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Kolmogorov-Smirnov distance between the empirical CDFs of two samples.
pub fn eigen_cdf_compare<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(LseError::Empty);
    }
    let sorted = |v: &[T]| {
        let mut s: Vec<f64> = v.iter().map(|x| x.as_f64()).collect();
        s.sort_by(f64::total_cmp);
        s
    };
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(T::lit(d))
}
