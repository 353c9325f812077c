//! Solvers for `min_{x in X^N} ||Hx - sqrt(gamma) u||^2 + lambda ||x||^2`.

mod bruteforce;
mod coordinate;
mod disk;
mod rzf;

pub use bruteforce::{lse_bruteforce, DEFAULT_ENUMERATION_LIMIT};
pub use coordinate::{lse_circle, lse_mpsk};
pub use disk::lse_disk;
pub use rzf::rzf_precode;

use num_complex::Complex;

use crate::error::{LseError, Result};
use crate::linalg::{norm_sqr, CMatrix};
use crate::model::{ConstraintSet, SystemParams};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct PrecodeResult<T> {
    pub v: Vec<Complex<T>>,
    pub objective: T,
    /// Iterations (gradient steps, or coordinate sweeps summed over restarts).
    pub iterations: usize,
    pub converged: bool,
    /// Solver-specific optimality residual: projected-gradient norm for the disk,
    /// last relative sweep change for coordinate descent, linear-system residual for RZF.
    pub residual_norm: T,
    /// Objective after every sweep of the returned restart (coordinate solvers only).
    pub trace: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100_000, restarts: 8, seed: 0 }
    }
}

impl SolverOptions {
    /// Defaults for the discrete PSK search: 32 restarts.
    pub fn psk() -> Self {
        Self { restarts: 32, ..Self::default() }
    }
}

/// `||Hx - sqrt(gamma) u||^2 + lambda ||x||^2`.
pub fn objective<T: Real>(
    h: &CMatrix<T>,
    u: &[Complex<T>],
    params: &SystemParams<T>,
    x: &[Complex<T>],
) -> Result<T> {
    check_dims(h, u)?;
    if x.len() != h.cols() {
        return Err(LseError::Dimension(format!("x has length {}, H has {} columns", x.len(), h.cols())));
    }
    Ok(residual_energy(h, u, params, x) + params.lambda * norm_sqr(x))
}

/// `||Hx - sqrt(gamma) u||^2`, the distortion part of the objective.
pub fn residual_energy<T: Real>(h: &CMatrix<T>, u: &[Complex<T>], params: &SystemParams<T>, x: &[Complex<T>]) -> T {
    let sg = params.gamma.sqrt();
    h.mul_vec(x).iter().zip(u).map(|(a, b)| (a - b * sg).norm_sqr()).sum()
}

pub(crate) fn check_dims<T: Real>(h: &CMatrix<T>, u: &[Complex<T>]) -> Result<()> {
    if u.len() != h.rows() {
        return Err(LseError::Dimension(format!("u has length {}, H has {} rows", u.len(), h.rows())));
    }
    if h.rows() == 0 || h.cols() == 0 {
        return Err(LseError::Empty);
    }
    Ok(())
}

/// Solver selection by constraint set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Precoder<T> {
    /// RZF for the unconstrained set, projected gradient for the disk,
    /// coordinate descent for the circle and PSK.
    Lse { set: ConstraintSet<T>, opts: SolverOptions },
    /// Exhaustive PSK search.
    BruteForce { order: usize, power: T, limit: u64 },
}

impl<T: Real> Precoder<T> {
    pub fn lse(set: ConstraintSet<T>) -> Self {
        let opts = match set {
            ConstraintSet::Mpsk { .. } => SolverOptions::psk(),
            _ => SolverOptions::default(),
        };
        Self::Lse { set, opts }
    }

    pub fn set(&self) -> ConstraintSet<T> {
        match *self {
            Self::Lse { set, .. } => set,
            Self::BruteForce { order, power, .. } => ConstraintSet::Mpsk { order, power },
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Self::Lse { set, opts } => Self::Lse { set, opts: SolverOptions { seed, ..opts } },
            other => other,
        }
    }

    pub fn solve(&self, h: &CMatrix<T>, u: &[Complex<T>], params: &SystemParams<T>) -> Result<PrecodeResult<T>> {
        match *self {
            Self::Lse { set, opts } => match set {
                ConstraintSet::Unconstrained => rzf_precode(h, u, params),
                ConstraintSet::Disk { power } => lse_disk(h, u, params, power, &opts),
                ConstraintSet::Circle { power } => lse_circle(h, u, params, power, &opts),
                ConstraintSet::Mpsk { order, power } => lse_mpsk(h, u, params, order, power, &opts),
            },
            Self::BruteForce { order, power, limit } => lse_bruteforce(h, u, params, order, power, limit),
        }
    }
}
