use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_dims, objective, rzf_precode, PrecodeResult, SolverOptions};
use crate::error::Result;
use crate::linalg::{norm_sqr, CMatrix};
use crate::model::{trial_rng, ConstraintSet, SystemParams};
use crate::scalar::Real;

/// Cyclic phase coordinate descent on the circle `|x_i|^2 = P`, best of `opts.restarts` starts.
pub fn lse_circle<T: Real>(
    h: &CMatrix<T>,
    u: &[Complex<T>],
    params: &SystemParams<T>,
    power: T,
    opts: &SolverOptions,
) -> Result<PrecodeResult<T>> {
    let set = ConstraintSet::Circle { power };
    multistart(h, u, params, set, opts, |rng| {
        let phase = T::lit(rng.random::<f64>() * core::f64::consts::TAU);
        Complex::from_polar(power.sqrt(), phase)
    })
}

/// Discrete cyclic coordinate descent over `M`-PSK; returns a 1-opt point.
pub fn lse_mpsk<T: Real>(
    h: &CMatrix<T>,
    u: &[Complex<T>],
    params: &SystemParams<T>,
    order: usize,
    power: T,
    opts: &SolverOptions,
) -> Result<PrecodeResult<T>> {
    let set = ConstraintSet::Mpsk { order, power };
    set.validate()?;
    let points = set.points();
    multistart(h, u, params, set, opts, |rng| points[rng.random_range(0..order)])
}

fn multistart<T: Real>(
    h: &CMatrix<T>,
    u: &[Complex<T>],
    params: &SystemParams<T>,
    set: ConstraintSet<T>,
    opts: &SolverOptions,
    mut random_point: impl FnMut(&mut rand_chacha::ChaCha8Rng) -> Complex<T>,
) -> Result<PrecodeResult<T>> {
    check_dims(h, u)?;
    params.validate()?;
    set.validate()?;
    let n = h.cols();
    let engine = Engine::new(h, u, params, set);

    // restart 0: the RZF solution mapped onto the set, ascending order
    let warm = rzf_precode(h, u, &params.with_lambda(params.lambda.max(T::lit(1e-9))))
        .map(|r| r.v)
        .unwrap_or_else(|_| vec![Complex::new(T::zero(), T::zero()); n]);
    let init: Vec<Complex<T>> = warm.into_iter().map(|v| set.scalar_min(v, T::one())).collect();
    let order: Vec<usize> = (0..n).collect();
    let mut best = engine.run(init, &order, opts);
    let mut sweeps = best.iterations;

    for r in 1..opts.restarts.max(1) {
        let mut rng = trial_rng(opts.seed, r as u64);
        let init: Vec<Complex<T>> = (0..n).map(|_| random_point(&mut rng)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let cand = engine.run(init, &order, opts);
        sweeps += cand.iterations;
        if cand.objective < best.objective {
            best = cand;
        }
    }
    best.objective = objective(h, u, params, &best.v)?;
    best.iterations = sweeps;
    Ok(best)
}

const RESYNC: usize = 16;

struct Engine<'a, T> {
    h: &'a CMatrix<T>,
    params: &'a SystemParams<T>,
    set: ConstraintSet<T>,
    cols: Vec<Vec<Complex<T>>>,
    col_norm2: Vec<T>,
    target: Vec<Complex<T>>,
    discrete: bool,
}

impl<'a, T: Real> Engine<'a, T> {
    fn new(h: &'a CMatrix<T>, u: &[Complex<T>], params: &'a SystemParams<T>, set: ConstraintSet<T>) -> Self {
        let cols = h.columns();
        let col_norm2 = cols.iter().map(|c| norm_sqr(c)).collect();
        let sg = params.gamma.sqrt();
        let target = u.iter().map(|x| x * sg).collect();
        let discrete = matches!(set, ConstraintSet::Mpsk { .. });
        Self { h, params, set, cols, col_norm2, target, discrete }
    }

    fn evaluate(&self, v: &[Complex<T>]) -> (Vec<Complex<T>>, T) {
        let e: Vec<Complex<T>> = self.h.mul_vec(v).iter().zip(&self.target).map(|(a, b)| a - b).collect();
        let f = norm_sqr(&e) + self.params.lambda * norm_sqr(v);
        (e, f)
    }

    fn run(&self, mut v: Vec<Complex<T>>, order: &[usize], opts: &SolverOptions) -> PrecodeResult<T> {
        let (mut e, mut f) = self.evaluate(&v);
        let mut trace = vec![f];
        let tol = T::lit(opts.tol);
        // relative to the signal energy as well: in the zero-distortion regime f decays geometrically
        let floor = norm_sqr(&self.target).max(T::min_positive_value());
        let mut converged = false;
        let mut change = T::infinity();
        let mut sweeps = 0;
        while sweeps < opts.max_iter {
            sweeps += 1;
            let mut moved = false;
            for &i in order {
                let c0 = self.col_norm2[i];
                if c0 == T::zero() {
                    continue;
                }
                let c = c0 + self.params.lambda;
                let col = &self.cols[i];
                // z = h_i^H r_i with r_i the target minus every other antenna's contribution
                let z = v[i] * c0 - col.iter().zip(&e).map(|(a, b)| a.conj() * b).sum::<Complex<T>>();
                let cand = self.set.scalar_min(z, c);
                let gain = |x: Complex<T>| c * x.norm_sqr() - T::lit(2.0) * (x.conj() * z).re;
                let delta = gain(cand) - gain(v[i]);
                let accept = if self.discrete {
                    delta < -T::lit(1e-13) * (T::one() + f.abs())
                } else {
                    delta < T::zero()
                };
                if accept {
                    let d = cand - v[i];
                    e.iter_mut().zip(col).for_each(|(ek, hk)| *ek += hk * d);
                    v[i] = cand;
                    moved = true;
                }
            }
            // the running residual is resynchronised periodically to bound rounding drift
            let f_new = if sweeps % RESYNC == 0 || !moved {
                let (e_exact, f_exact) = self.evaluate(&v);
                e = e_exact;
                f_exact
            } else {
                norm_sqr(&e) + self.params.lambda * norm_sqr(&v)
            };
            change = (f - f_new) / f_new.abs().max(floor);
            f = f_new;
            trace.push(f);
            if (self.discrete && !moved) || (!self.discrete && change.abs() < tol) {
                converged = true;
                break;
            }
        }
        PrecodeResult { v, objective: f, iterations: sweeps, converged, residual_norm: change.abs(), trace }
    }
}
