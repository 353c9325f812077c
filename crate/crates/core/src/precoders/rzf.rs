use num_complex::Complex;

use super::{check_dims, objective, PrecodeResult};
use crate::error::Result;
use crate::linalg::{cholesky_solve, norm, CMatrix};
use crate::model::SystemParams;
use crate::scalar::Real;

/// `v = sqrt(gamma) H^H (H H^H + lambda I)^{-1} u`, the unconstrained minimiser.
pub fn rzf_precode<T: Real>(h: &CMatrix<T>, u: &[Complex<T>], params: &SystemParams<T>) -> Result<PrecodeResult<T>> {
    check_dims(h, u)?;
    params.validate()?;
    let mut a = h.gram_rows();
    for i in 0..a.rows() {
        let d = a.get(i, i);
        a.set(i, i, d + Complex::new(params.lambda, T::zero()));
    }
    let y = cholesky_solve(&a, u)?;
    let r: Vec<Complex<T>> = a.mul_vec(&y).iter().zip(u).map(|(p, q)| p - q).collect();
    let sg = params.gamma.sqrt();
    let v: Vec<Complex<T>> = h.adj_mul_vec(&y).into_iter().map(|x| x * sg).collect();
    let objective = objective(h, u, params, &v)?;
    Ok(PrecodeResult { v, objective, iterations: 1, converged: true, residual_norm: norm(&r), trace: Vec::new() })
}
