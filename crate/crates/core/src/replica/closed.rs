use crate::error::{LseError, Result};
use crate::model::{gaussian_q, r_transform, ChannelEnsemble, SystemParams};
use crate::scalar::Real;

use super::rs::{rs_scales, RsSolution};

fn require_iid<T: Real>(ens: &ChannelEnsemble<T>) -> Result<()> {
    if ens.is_iid() {
        Ok(())
    } else {
        Err(LseError::InvalidParameter("closed form needs the iid ensemble".into()))
    }
}

/// RS fixed point for the per-antenna peak-power disk `|x|^2 <= P`, iid channel, in closed form:
/// `q = c^2 (1 - e^{-P/c^2})`, `chi = sqrt(alpha/(q+s)) (1+chi) h` with
/// `h = c - c e^{-P/c^2} + sqrt(P pi) Q(sqrt(2P)/c)` and `c = sqrt(alpha (q+s)) / (alpha lambda (1+chi) + 1)`.
pub fn rs_peak_power<T: Real>(
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    power: T,
    tol: f64,
    max_iter: usize,
) -> Result<RsSolution<T>> {
    require_iid(ens)?;
    params.validate()?;
    if !(power > T::zero()) {
        return Err(LseError::InvalidParameter("peak power must be positive".into()));
    }
    let alpha = ens.alpha();
    let s = params.signal_power();
    let lam = params.lambda;
    let map = |q: T, chi: T| -> Result<(T, T)> {
        let den = alpha * lam * (T::one() + chi) + T::one();
        if !(den > T::zero()) {
            return Err(LseError::OutOfRegion(format!("alpha lambda (1+chi) + 1 = {den}")));
        }
        let c = (alpha * (q + s)).sqrt() / den;
        let ex = (-power / (c * c)).exp();
        let qn = c * c * (T::one() - ex);
        let h = c - c * ex + (power * T::PI()).sqrt() * gaussian_q((T::lit(2.0) * power).sqrt() / c);
        let cn = (alpha / (q + s)).sqrt() * (T::one() + chi) * h;
        Ok((qn, cn))
    };
    let (mut q, mut chi) = (power.min(T::one()) / T::lit(2.0), T::one());
    let mut theta = T::lit(0.5);
    let mut last = T::infinity();
    for it in 1..=max_iter {
        let (qn, cn) = map(q, chi)?;
        let res = ((qn - q).abs() / q.max(T::one())).max((cn - chi).abs() / chi.max(T::one()));
        if res < T::lit(tol) {
            let (f, _, e) = rs_scales(qn, cn, ens, params)?;
            let (q2, c2) = map(qn, cn)?;
            let residual = ((q2 - qn).abs() / qn.max(T::one())).max((c2 - cn).abs() / cn.max(T::one()));
            return Ok(RsSolution {
                q: qn,
                chi: cn,
                f,
                e,
                distortion: (qn + s) / (T::one() + cn).powi(2),
                lambda: lam,
                converged: true,
                residual,
                iterations: it,
            });
        }
        if res > last {
            theta = (theta * T::lit(0.7)).max(T::lit(1e-3));
        }
        last = res;
        q = q + (qn - q) * theta;
        chi = chi + (cn - chi) * theta;
        if chi > T::lit(1e12) {
            return Err(LseError::OutOfRegion("chi diverges (zero-distortion regime)".into()));
        }
    }
    Err(LseError::NoConvergence(format!("peak-power RS after {max_iter} iterations")))
}

fn psk_solution<T: Real>(
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    m_sin: T,
) -> Result<RsSolution<T>> {
    require_iid(ens)?;
    params.validate()?;
    let s = params.signal_power();
    let inv = T::lit(2.0) / m_sin * (T::PI() * (T::one() + s) / ens.alpha()).sqrt() - T::one();
    if !(inv > T::zero()) {
        return Err(LseError::OutOfRegion(format!("1/chi = {inv} <= 0")));
    }
    let chi = inv.recip();
    let q = T::one();
    let rp = (ens.alpha() * (T::one() + chi).powi(2)).recip();
    let r = r_transform(ens, -chi)?;
    let f = ((q - chi * s) * rp + s * r).sqrt();
    Ok(RsSolution {
        q,
        chi,
        f,
        e: r + params.lambda,
        distortion: (T::one() + s) / (T::one() + chi).powi(2),
        lambda: params.lambda,
        converged: true,
        residual: T::zero(),
        iterations: 0,
    })
}

/// Closed-form RS solution for unit-power `M`-PSK on an iid channel (`q = 1`; `lambda` does not enter).
pub fn rs_psk<T: Real>(order: usize, ens: &ChannelEnsemble<T>, params: &SystemParams<T>) -> Result<RsSolution<T>> {
    if order < 2 {
        return Err(LseError::InvalidParameter(format!("PSK order must be at least 2, got {order}")));
    }
    let m = T::lit(order as f64);
    psk_solution(ens, params, m * (T::PI() / m).sin())
}

/// The `M -> infinity` limit of [`rs_psk`]: the unit constant-envelope set.
pub fn rs_constant_envelope<T: Real>(ens: &ChannelEnsemble<T>, params: &SystemParams<T>) -> Result<RsSolution<T>> {
    psk_solution(ens, params, T::PI())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replica::to_db;

    fn iid(alpha: f64) -> ChannelEnsemble<f64> {
        ChannelEnsemble::iid_alpha(alpha).unwrap()
    }

    #[test]
    fn bpsk_reference() {
        let sol = rs_psk(2, &iid(2.0), &SystemParams::new(1.0, 0.0)).unwrap();
        // 1/chi = sqrt(2 pi / alpha) - 1
        let chi = 1.0 / (std::f64::consts::PI.sqrt() - 1.0);
        assert!((sol.chi - chi).abs() < 1e-12);
        assert!((sol.chi - 1.29458).abs() < 1e-5);
        assert!((to_db(sol.distortion) + 4.204).abs() < 1e-3);
    }

    #[test]
    fn constant_envelope_limit() {
        let p = SystemParams::new(1.0, 0.0);
        let ce = rs_constant_envelope(&iid(2.0), &p).unwrap();
        let inv = 2.0 / std::f64::consts::PI * std::f64::consts::PI.sqrt() - 1.0;
        assert!((ce.chi - 1.0 / inv).abs() < 1e-10);
        let big = rs_psk(2048, &iid(2.0), &p).unwrap();
        assert!((to_db(big.distortion) - to_db(ce.distortion)).abs() < 1e-3);
        // monotone in M
        let d: Vec<f64> = (2..10).map(|m| rs_psk(m, &iid(1.5), &p).unwrap().distortion).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn outside_region() {
        assert!(matches!(rs_psk(2, &iid(7.0), &SystemParams::new(1.0, 0.0)), Err(LseError::OutOfRegion(_))));
    }

    #[test]
    fn peak_power_large_p_is_unconstrained() {
        let p = SystemParams::new(1.0, 0.1);
        let pk = rs_peak_power(&iid(2.0), &p, 1e6, 1e-12, 100_000).unwrap();
        // unconstrained: lambda alpha chi^2 + (1 + lambda alpha - alpha) chi - alpha = 0
        let (a, b, c): (f64, f64, f64) = (0.2, 1.0 + 0.2 - 2.0, -2.0);
        let chi = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        assert!((pk.chi - chi).abs() < 1e-8 * chi);
    }
}
