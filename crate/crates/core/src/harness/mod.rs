//! Monte Carlo validation of the predictions, the ergodic-rate bound, and the OFDM
//! equivalent-channel experiment.

mod empirical;
mod ofdm;
mod rate;

pub use empirical::{empirical_distortion, sweep_alpha, EmpiricalDistortion, SweepResult};
pub use ofdm::{eigen_cdf_compare, ofdm_equivalent_channel, ofdm_gram_eigenvalues, OfdmChannel};
pub use rate::{optimize_gamma, rate_lower_bound, GammaOptimum};
