use crate::error::{LseError, Result};
use crate::model::{r_transform, ChannelEnsemble, ConstraintSet, SystemParams};
use crate::scalar::Real;

use super::rs::{rs_distortion, rs_map, rs_moments, rs_scales, rs_solve, RsOptions, RsSolution};

/// RS fixed point whose average power equals `q_target`, with `lambda` solved for.
///
/// The fixed-point equations are inverted directly rather than bisecting on `lambda`:
/// the argmin scale `c` follows from `E|x_c(z)|^2 = q`, then `chi` from `chi f(q, chi) = E Re{z* x_c}`,
/// and finally `lambda = c f - R(-chi)`. The returned `lambda` may be negative.
///
/// Errors with `OutOfRegion` when `chi` diverges, i.e. the target power admits zero distortion.
pub fn rs_pinned<T: Real>(
    set: &ConstraintSet<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    q_target: T,
    opts: &RsOptions<T>,
) -> Result<RsSolution<T>> {
    set.validate()?;
    params.validate()?;
    if !(q_target > T::zero()) {
        return Err(LseError::InvalidParameter(format!("target power must be positive, got {q_target}")));
    }
    match *set {
        ConstraintSet::Circle { power } | ConstraintSet::Mpsk { power, .. } => {
            if (power - q_target).abs() > T::lit(1e-12) * power {
                return Err(LseError::InvalidParameter(format!(
                    "average power of {set:?} is fixed at {power}"
                )));
            }
            return rs_solve(set, ens, params, opts);
        }
        ConstraintSet::Disk { power } if q_target >= power => {
            return Err(LseError::InvalidParameter(format!(
                "average power {q_target} not below the peak power {power}; use the circle"
            )));
        }
        _ => {}
    }
    let quad = &opts.quadrature;
    // E|x_c|^2 decreases in c
    let (mut lo, mut hi) = (T::lit(-40.0), T::lit(40.0));
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if rs_moments(set, mid.exp(), quad).1 > q_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = ((lo + hi) / T::lit(2.0)).exp();
    let (h, _) = rs_moments(set, c, quad);

    let s = params.signal_power();
    let phi = |chi: T| -> Option<T> {
        let rp = crate::model::r_transform_derivative(ens, -chi).ok()?;
        let r = r_transform(ens, -chi).ok()?;
        let f2 = (q_target - chi * s) * rp + s * r;
        (f2 > T::zero()).then(|| chi * f2.sqrt() - h)
    };
    let mut hi = T::one();
    while phi(hi).is_some_and(|v| v < T::zero()) {
        hi *= T::lit(2.0);
        if hi > T::lit(1e12) {
            return Err(LseError::OutOfRegion(format!(
                "no finite chi for average power {q_target}: zero-distortion regime"
            )));
        }
    }
    if phi(hi).is_none() {
        return Err(LseError::OutOfRegion("f^2 <= 0 while bracketing chi".into()));
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        match phi(mid) {
            Some(v) if v < T::zero() => lo = mid,
            Some(_) => hi = mid,
            None => return Err(LseError::OutOfRegion("f^2 <= 0 inside the chi bracket".into())),
        }
    }
    let chi = (lo + hi) / T::lit(2.0);
    let r = r_transform(ens, -chi)?;
    let f = (phi(chi).ok_or_else(|| LseError::OutOfRegion("f^2 <= 0 at the pinned chi".into()))? + h) / chi;
    let lambda = c * f - r;
    let pinned = params.with_lambda(lambda);
    let (_, _, e) = rs_scales(q_target, chi, ens, &pinned)?;
    let (qn, cn) = rs_map(set, ens, &pinned, quad, q_target, chi)?;
    let residual = ((qn - q_target).abs() / q_target.max(T::one())).max((cn - chi).abs() / chi.max(T::one()));
    Ok(RsSolution {
        q: q_target,
        chi,
        f,
        e,
        distortion: rs_distortion(q_target, chi, ens, &pinned)?,
        lambda,
        converged: residual <= T::lit(opts.tol.max(1e-8)),
        residual,
        iterations: 0,
    })
}
