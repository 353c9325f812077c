use rayon::prelude::*;

use crate::error::{LseError, Result};
use crate::model::{sample_channel_with, sample_symbols, trial_rng, ChannelEnsemble, SystemParams};
use crate::precoders::{residual_energy, Precoder};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistortion<T> {
    pub mean: T,
    /// Sample standard deviation over `sqrt(trials)`; zero for a single trial.
    pub stderr: T,
    pub trials: usize,
    /// Trials whose solver reported non-convergence (they still count towards the mean).
    pub nonconverged: usize,
    /// Per-trial `||Hv - sqrt(gamma) u||^2 / K`, in trial order.
    pub samples: Vec<T>,
}

/// Mean and standard error of `||Hv - sqrt(gamma) u||^2 / K` over `trials` draws of `(H, u)`.
///
/// Trial `t` draws `H` and then `u` from `trial_rng(seed, t)`, so different precoders run with
/// the same `(ens, seed)` see identical realisations. Solver restarts are seeded from
/// `seed + t`. The result does not depend on thread scheduling.
pub fn empirical_distortion<T: Real>(
    precoder: &Precoder<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalDistortion<T>> {
    if trials == 0 {
        return Err(LseError::InvalidParameter("need at least one trial".into()));
    }
    params.validate()?;
    let k = T::lit(ens.k as f64);
    let runs: Vec<(T, bool)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<(T, bool)> {
            let mut rng = trial_rng(seed, t);
            let h = sample_channel_with(ens, &mut rng)?;
            let u = sample_symbols(ens.k, params.sigma_u2, &mut rng);
            let res = precoder.with_seed(seed.wrapping_add(t)).solve(&h, &u, params)?;
            Ok((residual_energy(&h, &u, params, &res.v) / k, res.converged))
        })
        .collect::<Result<_>>()?;
    let samples: Vec<T> = runs.iter().map(|r| r.0).collect();
    let n = T::lit(trials as f64);
    let mean = samples.iter().copied().sum::<T>() / n;
    let stderr = if trials > 1 {
        let var = samples.iter().map(|&x| (x - mean).powi(2)).sum::<T>() / (n - T::one());
        (var / n).sqrt()
    } else {
        T::zero()
    };
    Ok(EmpiricalDistortion {
        mean,
        stderr,
        trials,
        nonconverged: runs.iter().filter(|r| !r.1).count(),
        samples,
    })
}

/// Predicted and simulated distortion along a grid of loads.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub axis: Vec<T>,
    /// `None` where the predictor failed.
    pub predicted: Vec<Option<T>>,
    pub empirical: Vec<EmpiricalDistortion<T>>,
    pub trials: usize,
    pub seed: u64,
}

/// For each `alpha`, simulates `K = k` users on `N = round(alpha K)` antennas and evaluates
/// `predict` on the matching asymptotic ensemble.
pub fn sweep_alpha<T: Real>(
    precoder: &Precoder<T>,
    alphas: &[T],
    k: usize,
    params: &SystemParams<T>,
    trials: usize,
    seed: u64,
    predict: impl Fn(&ChannelEnsemble<T>) -> Result<T>,
) -> Result<SweepResult<T>> {
    let mut predicted = Vec::with_capacity(alphas.len());
    let mut empirical = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let n = (alpha.as_f64() * k as f64).round().max(1.0) as usize;
        let sim = ChannelEnsemble::iid(k, n)?;
        predicted.push(predict(&ChannelEnsemble::iid_alpha(alpha)?).ok());
        empirical.push(empirical_distortion(precoder, &sim, params, trials, seed)?);
    }
    Ok(SweepResult { axis: alphas.to_vec(), predicted, empirical, trials, seed })
}
