use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::EmpiricalSpectrum;
use crate::error::{LseError, Result};
use crate::linalg::CMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum<T> {
    /// Entries of `H` iid `CN(0, 1/N)`.
    IidGaussian,
    /// Eigenvalues of `H^H H`.
    Empirical(EmpiricalSpectrum<T>),
}

/// `K` users, `N` antennas and the spectral law of `H^H H`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEnsemble<T> {
    pub k: usize,
    pub n: usize,
    /// `N / K`; exact even when `k`, `n` only approximate it (see [`Self::iid_alpha`]).
    pub alpha: T,
    pub spectrum: Spectrum<T>,
}

impl<T: Real> ChannelEnsemble<T> {
    pub fn iid(k: usize, n: usize) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(LseError::InvalidParameter(format!("need K, N >= 1, got K={k}, N={n}")));
        }
        Ok(Self { k, n, alpha: ratio(n, k), spectrum: Spectrum::IidGaussian })
    }

    /// Iid ensemble with a prescribed load `alpha = N / K`, for asymptotic predictions
    /// where only the ratio matters.
    pub fn iid_alpha(alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(LseError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        // nominal dimensions; predictions only use `alpha`
        let k = 1_000usize;
        let n = (alpha.as_f64() * k as f64).round().max(1.0) as usize;
        Ok(Self { k, n, alpha, spectrum: Spectrum::IidGaussian })
    }

    /// Ensemble described by the `N` eigenvalues of `H^H H` for `K` users.
    pub fn empirical(k: usize, eigenvalues: Vec<T>) -> Result<Self> {
        if k == 0 {
            return Err(LseError::InvalidParameter("need K >= 1".into()));
        }
        let n = eigenvalues.len();
        let spec = EmpiricalSpectrum::new(eigenvalues)?;
        Ok(Self { k, n, alpha: ratio(n, k), spectrum: Spectrum::Empirical(spec) })
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn is_iid(&self) -> bool {
        matches!(self.spectrum, Spectrum::IidGaussian)
    }
}

fn ratio<T: Real>(n: usize, k: usize) -> T {
    T::lit(n as f64) / T::lit(k as f64)
}

/// RNG for trial (or restart) `stream` of master seed `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `H` (K x N) with iid `CN(0, 1/N)` entries.
pub fn sample_channel<T: Real>(ens: &ChannelEnsemble<T>, seed: u64) -> Result<CMatrix<T>> {
    sample_channel_with(ens, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_channel_with<T: Real, R: Rng + ?Sized>(
    ens: &ChannelEnsemble<T>,
    rng: &mut R,
) -> Result<CMatrix<T>> {
    if !ens.is_iid() {
        return Err(LseError::NoRealization);
    }
    let sd = (0.5 / ens.n as f64).sqrt();
    Ok(CMatrix::from_fn(ens.k, ens.n, |_, _| complex_normal(rng, sd)))
}

/// User symbols `u ~ CN(0, sigma_u2 I)`.
pub fn sample_symbols<T: Real, R: Rng + ?Sized>(k: usize, sigma_u2: T, rng: &mut R) -> Vec<Complex<T>> {
    let sd = (0.5 * sigma_u2.as_f64()).sqrt();
    (0..k).map(|_| complex_normal(rng, sd)).collect()
}

fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R, sd: f64) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(sd * re), T::lit(sd * im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_channel_has_unit_power() {
        let ens = ChannelEnsemble::<f64>::iid(1, 1).unwrap();
        let mean = (0..10_000)
            .map(|s| sample_channel(&ens, s).unwrap().get(0, 0).norm_sqr())
            .sum::<f64>()
            / 1e4;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn rows_have_unit_norm() {
        let ens = ChannelEnsemble::<f64>::iid(200, 400).unwrap();
        let h = sample_channel(&ens, 3).unwrap();
        let tr: f64 = h.as_slice().iter().map(|v| v.norm_sqr()).sum();
        assert!((tr / 200.0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn deterministic_given_seed() {
        let ens = ChannelEnsemble::<f64>::iid(5, 7).unwrap();
        assert_eq!(sample_channel(&ens, 11).unwrap(), sample_channel(&ens, 11).unwrap());
        assert_ne!(sample_channel(&ens, 11).unwrap(), sample_channel(&ens, 12).unwrap());
    }

    #[test]
    fn empirical_cannot_be_sampled() {
        let ens = ChannelEnsemble::empirical(2, vec![1.0, 2.0]).unwrap();
        assert_eq!(sample_channel(&ens, 0), Err(LseError::NoRealization));
    }

    #[test]
    fn streams_differ() {
        let a: u64 = trial_rng(1, 0).random();
        let b: u64 = trial_rng(1, 1).random();
        assert_ne!(a, b);
    }
}
