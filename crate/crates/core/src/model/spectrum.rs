use gauss_quad::legendre::GaussLegendre;

use super::{ChannelEnsemble, Spectrum};
use crate::error::{LseError, Result};
use crate::scalar::Real;

/// Eigenvalues of `R = H^H H`, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectrum<T> {
    eigs: Vec<T>,
}

impl<T: Real> EmpiricalSpectrum<T> {
    pub fn new(mut eigs: Vec<T>) -> Result<Self> {
        if eigs.is_empty() {
            return Err(LseError::Empty);
        }
        if eigs.iter().any(|e| !e.is_finite() || *e < T::zero()) {
            return Err(LseError::InvalidParameter("eigenvalues must be finite and nonnegative".into()));
        }
        eigs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(Self { eigs })
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigs
    }

    fn min(&self) -> T {
        self.eigs[0]
    }

    fn max(&self) -> T {
        self.eigs[self.eigs.len() - 1]
    }

    /// `phi(r) = mean[(r - l) / (1 + w (r - l))]`; `R(w)` is its unique root on the
    /// branch `1 + w (r - l) > 0`. This is `G(r + 1/w) = w` rewritten without cancellation.
    fn phi(&self, r: T, w: T) -> T {
        let n = T::lit(self.eigs.len() as f64);
        self.eigs.iter().map(|&l| (r - l) / (T::one() + w * (r - l))).sum::<T>() / n
    }

    fn r_transform(&self, w: T) -> Result<T> {
        let (lmin, lmax) = (self.min(), self.max());
        if lmax - lmin <= T::epsilon() * lmax.max(T::one()) {
            return Ok(lmin);
        }
        let (mut lo, mut hi) = if w > T::zero() {
            (lmin.max(lmax - w.recip()), lmax)
        } else if w < T::zero() {
            (lmin, lmax.min(lmin - w.recip()))
        } else {
            (lmin, lmax)
        };
        // phi is increasing in r; bisect to the floating-point fixed point
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.phi(mid, w);
            if !v.is_finite() {
                return Err(LseError::NoConvergence(format!("R-transform inversion at w={w}")));
            }
            if v > T::zero() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok((lo + hi) / T::lit(2.0))
    }

    /// Implicit derivative of the root of `phi`.
    fn r_derivative(&self, w: T) -> Result<T> {
        let r = self.r_transform(w)?;
        let (mut a, mut b) = (T::zero(), T::zero());
        for &l in &self.eigs {
            let d = r - l;
            let den = (T::one() + w * d).powi(2);
            a += d * d / den;
            b += den.recip();
        }
        Ok(a / b)
    }
}

fn check_domain<T: Real>(ens: &ChannelEnsemble<T>, w: T) -> Result<()> {
    if !w.is_finite() || (ens.is_iid() && w >= T::one()) {
        return Err(LseError::Domain { what: "R-transform", value: w.as_f64() });
    }
    Ok(())
}

/// R-transform of the spectrum of `H^H H`: `alpha^-1 / (1 - w)` for the iid ensemble.
pub fn r_transform<T: Real>(ens: &ChannelEnsemble<T>, w: T) -> Result<T> {
    check_domain(ens, w)?;
    match &ens.spectrum {
        Spectrum::IidGaussian => Ok((ens.alpha() * (T::one() - w)).recip()),
        Spectrum::Empirical(s) => s.r_transform(w),
    }
}

pub fn r_transform_derivative<T: Real>(ens: &ChannelEnsemble<T>, w: T) -> Result<T> {
    check_domain(ens, w)?;
    match &ens.spectrum {
        Spectrum::IidGaussian => Ok((ens.alpha() * (T::one() - w).powi(2)).recip()),
        Spectrum::Empirical(s) => s.r_derivative(w),
    }
}

/// `int_a^b R(-w) dw`.
pub fn r_integral<T: Real>(ens: &ChannelEnsemble<T>, a: T, b: T) -> Result<T> {
    match &ens.spectrum {
        Spectrum::IidGaussian => {
            check_domain(ens, -a)?;
            check_domain(ens, -b)?;
            Ok(((T::one() + b) / (T::one() + a)).ln() / ens.alpha())
        }
        Spectrum::Empirical(_) => {
            let rule = GaussLegendre::new(48.try_into().expect("nonzero"));
            let (af, bf) = (a.as_f64(), b.as_f64());
            let mut acc = 0.0;
            for &(x, wgt) in rule.as_node_weight_pairs() {
                let t = 0.5 * (bf - af) * x + 0.5 * (af + bf);
                acc += wgt * r_transform(ens, T::lit(-t))?.as_f64();
            }
            Ok(T::lit(0.5 * (bf - af) * acc))
        }
    }
}
