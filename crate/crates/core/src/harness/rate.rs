use crate::error::{LseError, Result};
use crate::model::SystemParams;
use crate::scalar::Real;

/// `log2(1 + gamma sigma_u^2 / (sigma_n^2 + D))`, bits per channel use.
pub fn rate_lower_bound<T: Real>(distortion: T, params: &SystemParams<T>) -> Result<T> {
    if !(distortion >= T::zero()) {
        return Err(LseError::Domain { what: "distortion", value: distortion.as_f64() });
    }
    let den = params.sigma_n2 + distortion;
    if !(den > T::zero()) {
        return Err(LseError::Degenerate("noise variance plus distortion is zero".into()));
    }
    Ok((params.signal_power() / den).ln_1p() / T::LN_2())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaOptimum<T> {
    pub gamma: T,
    pub rate: T,
    pub distortion: T,
}

const SCAN_POINTS: usize = 64;

/// Maximises `rate_lower_bound(predict(params with gamma))` over `gamma` in `bracket`.
///
/// A log-spaced scan (points where `predict` fails are skipped) locates the best cell, which
/// golden-section search then refines to `1e-4` relative in `gamma`. Predictors should map a
/// zero-distortion regime to `D = 0` rather than fail.
pub fn optimize_gamma<T: Real>(
    params: &SystemParams<T>,
    bracket: (T, T),
    predict: impl Fn(&SystemParams<T>) -> Result<T>,
) -> Result<GammaOptimum<T>> {
    let (lo, hi) = bracket;
    if !(lo > T::zero() && hi > lo && hi.is_finite()) {
        return Err(LseError::InvalidParameter(format!("gamma bracket ({lo}, {hi})")));
    }
    let eval = |lg: T| -> Result<GammaOptimum<T>> {
        let gamma = lg.exp();
        let p = params.with_gamma(gamma);
        let distortion = predict(&p)?;
        Ok(GammaOptimum { gamma, rate: rate_lower_bound(distortion, &p)?, distortion })
    };
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / T::lit((SCAN_POINTS - 1) as f64);
    let grid: Vec<Option<GammaOptimum<T>>> =
        (0..SCAN_POINTS).map(|i| eval(a + step * T::lit(i as f64)).ok()).collect();
    let (best, start) = grid
        .iter()
        .enumerate()
        .filter_map(|(i, g)| g.map(|g| (i, g)))
        .max_by(|x, y| x.1.rate.partial_cmp(&y.1.rate).unwrap_or(core::cmp::Ordering::Equal))
        .ok_or_else(|| LseError::NoConvergence("predictor failed on the whole gamma bracket".into()))?;
    let mut x0 = a + step * T::lit(best.saturating_sub(1) as f64);
    let mut x3 = a + step * T::lit((best + 1).min(SCAN_POINTS - 1) as f64);
    let ratio = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = x3 - ratio * (x3 - x0);
    let mut x2 = x0 + ratio * (x3 - x0);
    // a failure inside the refined cell ranks below every success
    let geval = |lg: T| {
        eval(lg).unwrap_or(GammaOptimum { gamma: lg.exp(), rate: T::neg_infinity(), distortion: T::nan() })
    };
    let mut f1 = geval(x1);
    let mut f2 = geval(x2);
    // tolerance on log(gamma) equals relative tolerance on gamma
    while x3 - x0 > T::lit(1e-4) {
        if f1.rate >= f2.rate {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - ratio * (x3 - x0);
            f1 = geval(x1);
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + ratio * (x3 - x0);
            f2 = geval(x2);
        }
    }
    let refined = if f1.rate >= f2.rate { f1 } else { f2 };
    Ok(if refined.rate >= start.rate { refined } else { start })
}
