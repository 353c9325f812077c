use num_complex::Complex;

use super::{check_dims, objective, PrecodeResult};
use crate::error::{LseError, Result};
use crate::linalg::CMatrix;
use crate::model::{ConstraintSet, SystemParams};
use crate::scalar::Real;

pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1 << 24;

/// Exact PSK minimiser by enumerating all `M^N` transmit vectors.
pub fn lse_bruteforce<T: Real>(
    h: &CMatrix<T>,
    u: &[Complex<T>],
    params: &SystemParams<T>,
    order: usize,
    power: T,
    limit: u64,
) -> Result<PrecodeResult<T>> {
    check_dims(h, u)?;
    params.validate()?;
    let set = ConstraintSet::Mpsk { order, power };
    set.validate()?;
    let n = h.cols();
    let states = (order as f64).powi(n as i32);
    if states > limit as f64 {
        return Err(LseError::TooLarge { states, limit });
    }
    let points = set.points();
    let cols = h.columns();
    let sg = params.gamma.sqrt();
    let mut digits = vec![0usize; n];
    let mut v = vec![points[0]; n];
    let mut e: Vec<Complex<T>> = h.mul_vec(&v).iter().zip(u).map(|(a, b)| a - b * sg).collect();
    let energy = |e: &[Complex<T>]| e.iter().map(|x| x.norm_sqr()).sum::<T>();
    let mut best = (energy(&e), v.clone());
    let mut visited = 1u64;
    'outer: loop {
        // odometer step, updating the residual for every digit that changes
        let mut i = 0;
        loop {
            let old = digits[i];
            digits[i] = (old + 1) % order;
            let d = points[digits[i]] - points[old];
            e.iter_mut().zip(&cols[i]).for_each(|(ek, hk)| *ek += hk * d);
            v[i] = points[digits[i]];
            if digits[i] != 0 {
                break;
            }
            i += 1;
            if i == n {
                break 'outer;
            }
        }
        visited += 1;
        let f = energy(&e);
        if f < best.0 {
            best = (f, v.clone());
        }
    }
    let v = best.1;
    let objective = objective(h, u, params, &v)?;
    Ok(PrecodeResult { v, objective, iterations: visited as usize, converged: true, residual_norm: T::zero(), trace: Vec::new() })
}
