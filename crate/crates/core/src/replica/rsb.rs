//! One-step replica symmetry breaking.
//!
//! For a fixed Parisi parameter `mu` the three moment equations are solved by damped
//! iteration on `(q1, p1, chi1)`; `mu` itself is then located by bracketing the scalar
//! equation on a log grid and bisecting. The RS point (`p1 = 0`) solves the moment
//! equations for every `mu` and is reported separately.

use core::f64::consts::{PI, SQRT_2, TAU};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{LseError, Result};
use crate::model::{r_integral, r_transform, r_transform_derivative, ChannelEnsemble, ConstraintSet, SystemParams};
use crate::quadrature::{composite_legendre, panel_breaks, PolarRule, QuadratureRule};
use crate::scalar::Real;

use super::rs::{rs_solve, RsOptions, RsSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsbSolution<T> {
    pub q1: T,
    pub p1: T,
    pub chi1: T,
    pub mu1: T,
    /// `chi1 + mu1 p1`.
    pub eta1: T,
    pub f1: T,
    pub g1: T,
    /// `R(-chi1) + lambda`.
    pub e1: T,
    pub distortion: T,
    /// Free-energy score `D-breve`; the physical fixed point maximises it. Equals `D + alpha lambda q`
    /// on the RS branch.
    pub selection_score: T,
    /// Residual of the scalar equation for `mu1` (left minus right side).
    pub mu_residual: T,
    /// Max-norm residual of the moment equations, re-evaluated at the returned point.
    pub residual: T,
    pub converged: bool,
    pub reduced_to_rs: bool,
}

impl<T: Real> RsbSolution<T> {
    /// The RS fixed point seen as a 1-RSB point with `p1 = 0`. `mu1` does not enter anything
    /// on this branch and is set to one.
    pub fn from_rs(rs: &RsSolution<T>, alpha: T) -> Self {
        Self {
            q1: rs.q,
            p1: T::zero(),
            chi1: rs.chi,
            mu1: T::one(),
            eta1: rs.chi,
            f1: rs.f,
            g1: T::zero(),
            e1: rs.e,
            distortion: rs.distortion,
            selection_score: rs.selection_score(alpha),
            mu_residual: T::zero(),
            residual: rs.residual,
            converged: rs.converged,
            reduced_to_rs: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsbOptions<T> {
    /// Inner fixed-point tolerance (relative max norm).
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Log-grid bracket for `mu1`.
    pub mu_range: (f64, f64),
    pub mu_grid: usize,
    /// Relative width at which bisection on `mu1` stops.
    pub mu_tol: f64,
    /// `p1` at or below this is the RS branch.
    pub p_floor: f64,
    /// Inner `Dy` rule of the general (complex) kernel.
    pub quadrature: QuadratureRule<T>,
    /// Angular nodes per decision sector of the outer `Dz` rule of the general kernel.
    pub per_sector: usize,
    pub rs: RsOptions<T>,
}

impl<T: Real> Default for RsbOptions<T> {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20_000,
            damping: 0.5,
            mu_range: (1e-3, 1e3),
            mu_grid: 25,
            mu_tol: 1e-9,
            p_floor: 1e-8,
            quadrature: QuadratureRule::default(),
            per_sector: 8,
            rs: RsOptions::default(),
        }
    }
}

/// Everything [`rsb1_solve_all`] found.
#[derive(Debug, Clone, PartialEq)]
pub struct RsbReport<T> {
    pub rs: RsSolution<T>,
    /// Roots of the `mu1` equation with `p1 > 0`.
    pub roots: Vec<RsbSolution<T>>,
    /// `(mu, residual)` on the scan grid; `None` where the inner iteration collapsed to RS or failed.
    pub scan: Vec<(T, Option<T>)>,
    pub selected: RsbSolution<T>,
}

impl<T: Real> RsbReport<T> {
    pub fn ambiguous(&self) -> bool {
        self.roots.len() > 1
    }
}

/// `D = s - (alpha chi1/mu1) R(-chi1) + alpha [q1 + eta1/mu1 - 2 s eta1] R(-eta1) - alpha eta1 [q1 - s eta1] R'(-eta1)`.
pub fn rsb1_distortion<T: Real>(sol: &RsbSolution<T>, ens: &ChannelEnsemble<T>, params: &SystemParams<T>) -> Result<T> {
    let RsbSolution { q1, p1, chi1, mu1, .. } = *sol;
    if mu1 == T::zero() {
        return Err(LseError::Degenerate("mu1 = 0".into()));
    }
    if ![q1, p1, chi1, mu1].iter().all(|v| v.is_finite()) {
        return Err(LseError::InvalidParameter("non-finite 1-RSB parameters".into()));
    }
    let s = params.signal_power();
    let alpha = ens.alpha();
    let eta = chi1 + mu1 * p1;
    let rc = r_transform(ens, -chi1)?;
    let re = r_transform(ens, -eta)?;
    let rpe = r_transform_derivative(ens, -eta)?;
    let two = T::lit(2.0);
    Ok(s - alpha * chi1 / mu1 * rc + alpha * (q1 + eta / mu1 - two * s * eta) * re - alpha * eta * (q1 - s * eta) * rpe)
}

struct Scales<T> {
    eta: T,
    e: T,
    f: T,
    g: T,
}

fn rsb_scales<T: Real>(q: T, p: T, chi: T, mu: T, ens: &ChannelEnsemble<T>, params: &SystemParams<T>) -> Result<Scales<T>> {
    if !(mu > T::zero()) {
        return Err(LseError::Degenerate(format!("mu1 = {mu}")));
    }
    let s = params.signal_power();
    let eta = chi + mu * p;
    let rc = r_transform(ens, -chi)?;
    let re = r_transform(ens, -eta)?;
    let rpe = r_transform_derivative(ens, -eta)?;
    let f2 = s * re + (q - s * eta) * rpe;
    let g2 = (rc - re) / mu;
    let e = rc + params.lambda;
    if !(f2 > T::zero() && g2 > T::zero() && e > T::zero()) {
        return Err(LseError::OutOfRegion(format!("f1^2 = {f2}, g1^2 = {g2}, e1 = {e}")));
    }
    Ok(Scales { eta, e, f: f2.sqrt(), g: g2.sqrt() })
}

/// Tilted expectations: `a = E Re{z* x}`, `b = E |x|^2`, `c = E Re{y* x}` under `Y~ Dy Dz`,
/// and `l = E_z log E_y Y`.
#[derive(Debug, Clone, Copy, Default)]
struct Moments<T> {
    a: T,
    b: T,
    c: T,
    l: T,
}

enum Kernel<'a, T> {
    /// Antipodal (BPSK) set: the inner integral has a closed form and the outer one is one-dimensional.
    RealLine { power: f64 },
    General { set: &'a ConstraintSet<T>, outer: Vec<(Complex<T>, T)>, inner: &'a QuadratureRule<T> },
}

impl<'a, T: Real> Kernel<'a, T> {
    fn new(set: &'a ConstraintSet<T>, opts: &'a RsbOptions<T>) -> Result<Self> {
        match *set {
            ConstraintSet::Unconstrained => {
                Err(LseError::InvalidParameter("1-RSB needs a bounded set; use RS for the unconstrained one".into()))
            }
            ConstraintSet::Mpsk { order: 2, power } => Ok(Kernel::RealLine { power: power.as_f64() }),
            ConstraintSet::Mpsk { order, .. } => {
                // the y-averaged integrand is invariant under rotating z by 2 pi / M: one sector suffices
                let half = PI / order as f64;
                let outer = PolarRule::<T>::new(&[], Some(order), opts.per_sector)
                    .nodes
                    .into_iter()
                    .filter(|(z, _)| z.arg().as_f64().abs() < half)
                    .map(|(z, w)| (z, w * T::lit(order as f64)))
                    .collect();
                Ok(Kernel::General { set, outer, inner: &opts.quadrature })
            }
            _ => {
                let outer = PolarRule::<T>::new(&[], None, 1).nodes;
                Ok(Kernel::General { set, outer, inner: &opts.quadrature })
            }
        }
    }

    fn moments(&self, sc: &Scales<T>, mu: T) -> Moments<T> {
        match self {
            Kernel::RealLine { power } => {
                let m = real_line_moments(sc.f.as_f64(), sc.g.as_f64(), sc.e.as_f64(), mu.as_f64(), *power);
                Moments { a: T::lit(m.a), b: T::lit(m.b), c: T::lit(m.c), l: T::lit(m.l) }
            }
            Kernel::General { set, outer, inner } => general_moments(set, sc, mu, outer, inner),
        }
    }
}

/// `log Phi(x)` for the standard normal CDF, accurate far into the lower tail.
fn ln_phi(x: f64) -> f64 {
    if x > 0.0 {
        (-0.5 * libm::erfc(x / SQRT_2)).ln_1p()
    } else if x > -35.0 {
        (0.5 * libm::erfc(-x / SQRT_2)).ln()
    } else {
        let x2 = x * x;
        -0.5 * x2 - (-x).ln() - 0.5 * TAU.ln() + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)).ln()
    }
}

const A_MAX: f64 = 6.5;

/// BPSK: `x = sqrt(P) sgn(u)` with `u = f a + g b`, `a, b ~ N(0, 1/2)` the real parts of `z, y`
/// (imaginary parts drop out). With `k = 2 mu sqrt(P)`, `E_b e^{k|u|}` is a sum of two shifted
/// normal CDFs, and `E_b[b sgn(u) e^{k|u|}]` follows from Stein's lemma.
fn real_line_moments(f: f64, g: f64, e: f64, mu: f64, power: f64) -> Moments<f64> {
    let sp = power.sqrt();
    let k = 2.0 * mu * sp;
    let sd = g / SQRT_2;
    let scales = [1.0 / (k * f), g / f, k * g * g / (2.0 * f)];
    let extra = scales.into_iter().flat_map(|s| [0.5, 1.0, 2.0, 4.0].map(|m| m * s));
    let breaks = panel_breaks(0.0, A_MAX, [0.5, 1.0, 2.0, 3.0, 4.5].into_iter().chain(extra));
    let norm = 2.0 / PI.sqrt();
    let mut out = Moments::default();
    for (a, w) in composite_legendre(&breaks, 16) {
        let w = w * norm * (-a * a).exp();
        let m = f * a;
        let a1 = k * m + ln_phi((m + k * sd * sd) / sd);
        let a2 = -k * m + ln_phi((-m + k * sd * sd) / sd);
        let hi = a1.max(a2);
        let lz = 0.5 * k * k * sd * sd + hi + ((a1 - hi).exp() + (a2 - hi).exp()).ln();
        let t = (0.5 * (a1 - a2)).tanh();
        out.a += w * a * sp * t;
        out.c += w * sp * (0.5 * g * k + (-(m * m) / (g * g) - lz).exp() / PI.sqrt());
        out.l += w * lz;
    }
    out.b = power;
    out.l -= mu * e * power;
    out
}

fn general_moments<T: Real>(
    set: &ConstraintSet<T>,
    sc: &Scales<T>,
    mu: T,
    outer: &[(Complex<T>, T)],
    inner: &QuadratureRule<T>,
) -> Moments<T> {
    let two = T::lit(2.0);
    outer
        .par_iter()
        .map(|&(z, wz)| {
            let pts: Vec<(Complex<T>, Complex<T>, T, T)> = inner
                .iter()
                .map(|(y, wy)| {
                    let w = z * sc.f + y * sc.g;
                    let x = set.scalar_min(w, sc.e);
                    let ell = mu * (two * (x.conj() * w).re - sc.e * x.norm_sqr());
                    (x, y, wy, ell)
                })
                .collect();
            let top = pts.iter().map(|p| p.3).fold(T::neg_infinity(), T::max);
            let mut acc = Moments::<T>::default();
            let mut zsum = T::zero();
            for &(x, y, wy, ell) in &pts {
                let v = wy * (ell - top).exp();
                zsum += v;
                acc.a += v * (z.conj() * x).re;
                acc.b += v * x.norm_sqr();
                acc.c += v * (y.conj() * x).re;
            }
            Moments {
                a: wz * acc.a / zsum,
                b: wz * acc.b / zsum,
                c: wz * acc.c / zsum,
                l: wz * (zsum.ln() + top),
            }
        })
        .reduce(Moments::default, |u, v| Moments { a: u.a + v.a, b: u.b + v.b, c: u.c + v.c, l: u.l + v.l })
}

/// The scalar `mu1` equation, left minus right:
/// `int_{chi1}^{eta1} R(-w) dw - [L - 2 chi1 R(-chi1) + (mu1 q1 + 2 eta1 - 2 mu1 eta1 s) R(-eta1)
///  - 2 mu1 eta1 (q1 - s eta1) R'(-eta1) + lambda mu1 (p1 + q1)]` with `L = E_z log E_y Y`.
/// It vanishes identically at `p1 = 0`.
#[allow(clippy::too_many_arguments)]
fn mu_equation<T: Real>(
    q: T,
    p: T,
    chi: T,
    mu: T,
    sc: &Scales<T>,
    l: T,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
) -> Result<T> {
    let s = params.signal_power();
    let two = T::lit(2.0);
    let eta = sc.eta;
    let j = r_integral(ens, chi, eta)?;
    let rc = r_transform(ens, -chi)?;
    let re = r_transform(ens, -eta)?;
    let rpe = r_transform_derivative(ens, -eta)?;
    let rhs = l - two * chi * rc + (mu * q + two * eta - two * mu * eta * s) * re - two * mu * eta * (q - s * eta) * rpe
        + params.lambda * mu * (p + q);
    Ok(j - rhs)
}

/// `D-breve = s - alpha F` with
/// `F = -f1^2 eta1 - g1^2 (mu1 q1 + eta1) + e1 (q1 + p1) + (L - J)/mu1 - (q1 - s eta1) R(-eta1) - lambda (q1 + p1)`.
/// Stationary in `mu1` exactly where the `mu1` equation holds.
#[allow(clippy::too_many_arguments)]
fn score<T: Real>(
    q: T,
    p: T,
    mu: T,
    sc: &Scales<T>,
    l: T,
    j: T,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
) -> Result<T> {
    let s = params.signal_power();
    let re = r_transform(ens, -sc.eta)?;
    let f = -sc.f * sc.f * sc.eta - sc.g * sc.g * (mu * q + sc.eta) + sc.e * (q + p) + (l - j) / mu
        - (q - s * sc.eta) * re
        - params.lambda * (q + p);
    Ok(s - ens.alpha() * f)
}

fn rel_gap<T: Real>(a: T, b: T) -> T {
    (a - b).abs() / T::one().max(a.abs())
}

type State<T> = (T, T, T);

fn moment_map<T: Real>(
    kernel: &Kernel<'_, T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    mu: T,
    (q, p, chi): State<T>,
) -> Result<(State<T>, Scales<T>, Moments<T>)> {
    let sc = rsb_scales(q, p, chi, mu, ens, params)?;
    let m = kernel.moments(&sc, mu);
    let eta = m.a / sc.f;
    let qn = (m.c / sc.g - eta) / mu;
    let pn = m.b - qn;
    let chin = eta - mu * pn;
    if ![qn, pn, chin].iter().all(|v| v.is_finite()) {
        return Err(LseError::OutOfRegion(format!("moment map undefined at mu={mu}")));
    }
    Ok(((qn, pn, chin), sc, m))
}

fn assemble<T: Real>(
    kernel: &Kernel<'_, T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    mu: T,
    state: State<T>,
    tol: f64,
) -> Result<RsbSolution<T>> {
    let (q1, p1, chi1) = state;
    let ((qn, pn, cn), sc, m) = moment_map(kernel, ens, params, mu, state)?;
    let residual = rel_gap(qn, q1).max(rel_gap(pn, p1)).max(rel_gap(cn, chi1));
    let mu_residual = mu_equation(q1, p1, chi1, mu, &sc, m.l, ens, params)?;
    let j = r_integral(ens, chi1, sc.eta)?;
    let mut sol = RsbSolution {
        q1,
        p1,
        chi1,
        mu1: mu,
        eta1: sc.eta,
        f1: sc.f,
        g1: sc.g,
        e1: sc.e,
        distortion: T::nan(),
        selection_score: score(q1, p1, mu, &sc, m.l, j, ens, params)?,
        mu_residual,
        residual,
        converged: residual <= T::lit(tol.max(1e-8)),
        reduced_to_rs: false,
    };
    sol.distortion = rsb1_distortion(&sol, ens, params)?;
    Ok(sol)
}

/// Damped iteration of the moment equations at fixed `mu`, handing over to Newton's method
/// when it stalls (fixed points that repel the damped map do occur). `Ok(None)` when `p1`
/// collapses onto the RS branch.
fn inner_solve<T: Real>(
    kernel: &Kernel<'_, T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    mu: T,
    start: State<T>,
    opts: &RsbOptions<T>,
) -> Result<Option<RsbSolution<T>>> {
    let floor = T::lit(opts.p_floor);
    let tol = T::lit(opts.tol);
    let min_theta = T::lit(1e-4);
    let mut theta = T::lit(opts.damping);
    let mut state = start;
    let mut last = T::infinity();
    let mut best = (T::infinity(), start);
    let mut since_best = 0;
    let mut worse = 0;
    for _ in 0..opts.max_iter {
        let (next, _, _) = moment_map(kernel, ens, params, mu, state)?;
        let (q, p, chi) = state;
        let res = state_gap(next, state);
        if res < tol {
            if next.1 <= floor {
                return Ok(None);
            }
            return assemble(kernel, ens, params, mu, next, opts.tol).map(Some);
        }
        if res < best.0 * T::lit(0.9) {
            best = (res, state);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STALL {
                break;
            }
        }
        if res > last {
            worse += 1;
            if worse >= 3 {
                theta = (theta / T::lit(2.0)).max(min_theta);
                worse = 0;
            }
        } else {
            worse = 0;
        }
        last = res;
        let mut step = theta;
        loop {
            let trial = (q + (next.0 - q) * step, p + (next.1 - p) * step, chi + (next.2 - chi) * step);
            if trial.1 <= floor {
                return Ok(None);
            }
            if rsb_scales(trial.0, trial.1, trial.2, mu, ens, params).is_ok() {
                state = trial;
                break;
            }
            step /= T::lit(2.0);
            if step < min_theta {
                return Err(LseError::OutOfRegion(format!("1-RSB iteration leaves the valid region at mu={mu}")));
            }
        }
    }
    match newton(kernel, ens, params, mu, best.1, opts)? {
        Some(x) if x.1 <= floor => Ok(None),
        Some(x) => assemble(kernel, ens, params, mu, x, opts.tol).map(Some),
        None => Err(LseError::NoConvergence(format!("1-RSB moment equations at mu={mu} (last residual {last})"))),
    }
}

/// Damped iterations without a tenfold improvement before switching to Newton.
const STALL: usize = 200;

fn state_gap<T: Real>(a: State<T>, b: State<T>) -> T {
    rel_gap(a.0, b.0).max(rel_gap(a.1, b.1)).max(rel_gap(a.2, b.2))
}

/// Newton's method on `M(x) - x` with a forward-difference Jacobian and backtracking on its norm.
fn newton<T: Real>(
    kernel: &Kernel<'_, T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    mu: T,
    start: State<T>,
    opts: &RsbOptions<T>,
) -> Result<Option<State<T>>> {
    let tol = T::lit(opts.tol);
    let to_vec = |s: State<T>| nalgebra::Vector3::new(s.0.as_f64(), s.1.as_f64(), s.2.as_f64());
    let from_vec = |v: nalgebra::Vector3<f64>| (T::lit(v[0]), T::lit(v[1]), T::lit(v[2]));
    let resid = |x: nalgebra::Vector3<f64>| -> Option<nalgebra::Vector3<f64>> {
        let s = from_vec(x);
        rsb_scales(s.0, s.1, s.2, mu, ens, params).ok()?;
        let (n, _, _) = moment_map(kernel, ens, params, mu, s).ok()?;
        Some(to_vec(n) - x)
    };
    let mut x = to_vec(start);
    let Some(mut g) = resid(x) else { return Ok(None) };
    for _ in 0..100 {
        let s = from_vec(x);
        let n = (s.0 + T::lit(g[0]), s.1 + T::lit(g[1]), s.2 + T::lit(g[2]));
        if state_gap(n, s) < tol {
            return Ok(Some(n));
        }
        let mut jac = nalgebra::Matrix3::zeros();
        for c in 0..3 {
            let h = 1e-7 * x[c].abs().max(1e-3);
            let mut xp = x;
            xp[c] += h;
            let Some(gp) = resid(xp) else { return Ok(None) };
            jac.set_column(c, &((gp - g) / h));
        }
        let Some(dx) = jac.lu().solve(&-g) else { return Ok(None) };
        let mut t = 1.0;
        loop {
            let xt = x + dx * t;
            if let Some(gt) = resid(xt) {
                if gt.norm() < g.norm() {
                    x = xt;
                    g = gt;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-6 {
                return Ok(None);
            }
        }
    }
    Ok(None)
}

fn default_start<T: Real>(rs: &RsSolution<T>) -> State<T> {
    (T::lit(0.6) * rs.q, T::lit(0.4) * rs.q, T::lit(0.9) * rs.chi)
}

/// Solves the moment equations at a fixed `mu1` (which need not satisfy its own equation).
/// `start` is `(q1, p1, chi1)`; defaults to a split of the RS point. Errors with `Degenerate`
/// if the iteration collapses onto the RS branch.
pub fn rsb1_solve_at_mu<T: Real>(
    set: &ConstraintSet<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    mu: T,
    start: Option<(T, T, T)>,
    opts: &RsbOptions<T>,
) -> Result<RsbSolution<T>> {
    set.validate()?;
    params.validate()?;
    let kernel = Kernel::new(set, opts)?;
    let start = match start {
        Some(s) => s,
        None => default_start(&rs_solve(set, ens, params, &opts.rs)?),
    };
    inner_solve(&kernel, ens, params, mu, start, opts)?
        .ok_or_else(|| LseError::Degenerate(format!("p1 collapses to zero at mu={mu}")))
}

/// Residual of the `mu1` equation at the given parameters (zero at a 1-RSB saddle point and
/// identically zero when `p1 = 0`).
pub fn mu_equation_residual<T: Real>(
    set: &ConstraintSet<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    sol: &RsbSolution<T>,
    opts: &RsbOptions<T>,
) -> Result<T> {
    let kernel = Kernel::new(set, opts)?;
    let sc = rsb_scales(sol.q1, sol.p1, sol.chi1, sol.mu1, ens, params)?;
    let m = kernel.moments(&sc, sol.mu1);
    mu_equation(sol.q1, sol.p1, sol.chi1, sol.mu1, &sc, m.l, ens, params)
}

/// Scans `mu1` over the log grid, bisects every sign change of the `mu1` equation on the
/// non-trivial branch and returns all roots alongside the RS point. The selected point is the
/// root with the largest free-energy score, or the RS point when there is no root with `p1 > 0`.
pub fn rsb1_solve_all<T: Real>(
    set: &ConstraintSet<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    opts: &RsbOptions<T>,
) -> Result<RsbReport<T>> {
    set.validate()?;
    params.validate()?;
    let kernel = Kernel::new(set, opts)?;
    let (lo, hi) = opts.mu_range;
    if !(lo > 0.0 && hi > lo && opts.mu_grid >= 2) {
        return Err(LseError::InvalidParameter(format!("mu range {lo}..{hi} with {} points", opts.mu_grid)));
    }
    let rs = rs_solve(set, ens, params, &opts.rs)?;
    let alpha = ens.alpha();

    let n = opts.mu_grid;
    let mut grid: Vec<(T, Option<RsbSolution<T>>)> = Vec::with_capacity(n);
    let mut warm = default_start(&rs);
    for i in 0..n {
        let mu = T::lit(lo * (hi / lo).powf(i as f64 / (n - 1) as f64));
        let sol = match inner_solve(&kernel, ens, params, mu, warm, opts) {
            Ok(Some(s)) if s.converged => Some(s),
            _ => None,
        };
        if let Some(s) = &sol {
            warm = (s.q1, s.p1, s.chi1);
        }
        grid.push((mu, sol));
    }

    let noise = T::lit(1e-12);
    let mut roots: Vec<RsbSolution<T>> = Vec::new();
    for pair in grid.windows(2) {
        let (Some(a), Some(b)) = (&pair[0].1, &pair[1].1) else { continue };
        let (ra, rb) = (a.mu_residual, b.mu_residual);
        if ra.abs() <= noise || rb.abs() <= noise || (ra > T::zero()) == (rb > T::zero()) {
            continue;
        }
        if let Some(root) = bisect_mu(&kernel, ens, params, *a, *b, opts) {
            roots.push(root);
        }
    }

    let selected = roots
        .iter()
        .copied()
        .max_by(|a, b| a.selection_score.partial_cmp(&b.selection_score).unwrap_or(core::cmp::Ordering::Equal))
        .unwrap_or_else(|| RsbSolution::from_rs(&rs, alpha));
    let scan = grid.into_iter().map(|(mu, s)| (mu, s.map(|s| s.mu_residual))).collect();
    Ok(RsbReport { rs, roots, scan, selected })
}

fn bisect_mu<T: Real>(
    kernel: &Kernel<'_, T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    mut lo: RsbSolution<T>,
    mut hi: RsbSolution<T>,
    opts: &RsbOptions<T>,
) -> Option<RsbSolution<T>> {
    let lo_sign = lo.mu_residual > T::zero();
    for _ in 0..200 {
        let mu = (lo.mu1 * hi.mu1).sqrt();
        let mid = inner_solve(kernel, ens, params, mu, (lo.q1, lo.p1, lo.chi1), opts).ok().flatten()?;
        if mid.mu_residual == T::zero() || hi.mu1 / lo.mu1 - T::one() < T::lit(opts.mu_tol) {
            return Some(mid);
        }
        if (mid.mu_residual > T::zero()) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    None
}

/// The selected 1-RSB point (see [`rsb1_solve_all`]).
pub fn rsb1_solve<T: Real>(
    set: &ConstraintSet<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    opts: &RsbOptions<T>,
) -> Result<RsbSolution<T>> {
    rsb1_solve_all(set, ens, params, opts).map(|r| r.selected)
}
