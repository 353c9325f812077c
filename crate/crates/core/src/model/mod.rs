//! Domain types: constraint sets, channel ensembles, spectral transforms.

mod channel;
mod constraint;
mod special;
mod spectrum;

pub use channel::{sample_channel, sample_channel_with, sample_symbols, trial_rng, ChannelEnsemble, Spectrum};
pub use constraint::{scalar_constrained_min, ConstraintSet};
pub use special::gaussian_q;
pub use spectrum::{r_integral, r_transform, r_transform_derivative, EmpiricalSpectrum};

use crate::error::{LseError, Result};
use crate::scalar::Real;

/// Scalars of the precoding problem `min ||Hx - sqrt(gamma) u||^2 + lambda ||x||^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    pub gamma: T,
    /// Negative values are accepted: pinning a large average power can require them.
    pub lambda: T,
    pub sigma_u2: T,
    pub sigma_n2: T,
}

impl<T: Real> SystemParams<T> {
    pub fn new(gamma: T, lambda: T) -> Self {
        Self { gamma, lambda, sigma_u2: T::one(), sigma_n2: T::zero() }
    }

    pub fn with_lambda(self, lambda: T) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_gamma(self, gamma: T) -> Self {
        Self { gamma, ..self }
    }

    /// `gamma * sigma_u^2`, the target power per user.
    #[inline]
    pub fn signal_power(&self) -> T {
        self.gamma * self.sigma_u2
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.gamma, self.lambda, self.sigma_u2, self.sigma_n2]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(LseError::InvalidParameter(format!("non-finite system parameter: {self:?}")));
        }
        if self.gamma < T::zero() || self.sigma_u2 <= T::zero() || self.sigma_n2 < T::zero() {
            return Err(LseError::InvalidParameter(format!(
                "need gamma >= 0, sigma_u2 > 0, sigma_n2 >= 0: {self:?}"
            )));
        }
        Ok(())
    }
}
