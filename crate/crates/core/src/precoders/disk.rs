use num_complex::Complex;

use super::{check_dims, objective, residual_energy, rzf_precode, PrecodeResult, SolverOptions};
use crate::error::{LseError, Result};
use crate::linalg::{norm_sqr, CMatrix};
use crate::model::{ConstraintSet, SystemParams};
use crate::scalar::Real;

/// Accelerated projected gradient (FISTA with function-value restart) on the disk `|x_i|^2 <= P`.
///
/// For `lambda >= 0` the problem is convex and the result is a global minimiser up to `tol`.
/// Negative `lambda` is accepted (the step is sized for it) but then only stationarity holds.
pub fn lse_disk<T: Real>(
    h: &CMatrix<T>,
    u: &[Complex<T>],
    params: &SystemParams<T>,
    power: T,
    opts: &SolverOptions,
) -> Result<PrecodeResult<T>> {
    check_dims(h, u)?;
    params.validate()?;
    let set = ConstraintSet::Disk { power };
    set.validate()?;
    let lam = params.lambda;
    let sigma2 = h.spectral_norm_sqr(50, T::lit(1e-8));
    // power iteration approaches sigma_max^2 from below; pad slightly
    let lip = T::lit(2.02) * (sigma2 + lam).max(-lam);
    if !(lip > T::zero()) {
        return Err(LseError::Degenerate("zero channel".into()));
    }
    let step = lip.recip();
    let sg = params.gamma.sqrt();
    let target: Vec<Complex<T>> = u.iter().map(|x| x * sg).collect();
    let project = |x: &mut [Complex<T>]| x.iter_mut().for_each(|v| *v = set.scalar_min(*v, T::one()));
    let f_of = |hx: &[Complex<T>], x: &[Complex<T>]| {
        hx.iter().zip(&target).map(|(a, b)| (a - b).norm_sqr()).sum::<T>() + lam * norm_sqr(x)
    };
    let grad = |hy: &[Complex<T>], y: &[Complex<T>]| -> Vec<Complex<T>> {
        let r: Vec<Complex<T>> = hy.iter().zip(&target).map(|(a, b)| a - b).collect();
        h.adj_mul_vec(&r)
            .into_iter()
            .zip(y)
            .map(|(g, yi)| (g + yi * lam) * T::lit(2.0))
            .collect()
    };

    let mut x = match rzf_precode(h, u, params) {
        Ok(r) if lam >= T::zero() => r.v,
        _ => vec![Complex::new(T::zero(), T::zero()); h.cols()],
    };
    project(&mut x);
    let mut hx = h.mul_vec(&x);
    let mut f = f_of(&hx, &x);
    let (mut y, mut hy, mut t) = (x.clone(), hx.clone(), T::one());
    let tol = T::lit(opts.tol);
    // progress is measured against the signal energy too, so a vanishing optimum still terminates
    let floor = norm_sqr(&target).max(T::min_positive_value());
    let mut quiet = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;
    while iterations < opts.max_iter {
        iterations += 1;
        let g = grad(&hy, &y);
        let mut xn: Vec<Complex<T>> = y.iter().zip(&g).map(|(yi, gi)| yi - gi * step).collect();
        project(&mut xn);
        let hxn = h.mul_vec(&xn);
        let fn_ = f_of(&hxn, &xn);
        if fn_ > f && t > T::one() {
            // momentum overshoot: restart from the current iterate
            y.clone_from(&x);
            hy.clone_from(&hx);
            t = T::one();
            continue;
        }
        let rel = (f - fn_).abs() / fn_.abs().max(floor);
        let tn = (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / T::lit(2.0);
        let beta = (t - T::one()) / tn;
        y = xn.iter().zip(&x).map(|(a, b)| a + (a - b) * beta).collect();
        hy = if iterations.is_multiple_of(64) {
            h.mul_vec(&y)
        } else {
            hxn.iter().zip(&hx).map(|(a, b)| a + (a - b) * beta).collect()
        };
        x = xn;
        hx = hxn;
        f = fn_;
        t = tn;
        quiet = if rel < tol { quiet + 1 } else { 0 };
        if quiet >= 3 {
            converged = true;
            break;
        }
    }
    // projected-gradient (gradient-mapping) norm at the final iterate
    let g = grad(&hx, &x);
    let mut pg: Vec<Complex<T>> = x.iter().zip(&g).map(|(xi, gi)| xi - gi * step).collect();
    project(&mut pg);
    let residual_norm = pg.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<T>().sqrt() * lip;
    let objective = objective(h, u, params, &x)?;
    debug_assert!((objective - residual_energy(h, u, params, &x) - lam * norm_sqr(&x)).abs() <= T::epsilon().sqrt() * objective.abs().max(T::one()));
    Ok(PrecodeResult { v: x, objective, iterations, converged, residual_norm, trace: Vec::new() })
}
