use crate::error::{LseError, Result};
use crate::model::{r_transform, r_transform_derivative, ChannelEnsemble, ConstraintSet, Spectrum, SystemParams};
use crate::quadrature::{PolarRule, QuadratureRule};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsSolution<T> {
    /// Average power per antenna.
    pub q: T,
    pub chi: T,
    pub f: T,
    /// `R(-chi) + lambda`.
    pub e: T,
    pub distortion: T,
    /// `lambda` the solution belongs to (differs from the input when power is pinned).
    pub lambda: T,
    pub converged: bool,
    /// Max-norm fixed-point residual, re-evaluated at the returned point.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> RsSolution<T> {
    /// `D + alpha lambda q`, the quantity maximised when choosing among fixed points.
    pub fn selection_score(&self, alpha: T) -> T {
        self.distortion + alpha * self.lambda * self.q
    }
}

/// How the Gaussian expectations of the RS equations are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum RsQuadrature<T> {
    /// Polar rule split at the kinks of the scalar minimiser (default; near machine precision).
    Adaptive { per_sector: usize },
    /// Tensor Gauss-Hermite rule.
    Hermite(QuadratureRule<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsOptions<T> {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub quadrature: RsQuadrature<T>,
    /// Initial `(q, chi)` pairs.
    pub starts: Vec<(f64, f64)>,
}

impl<T: Real> Default for RsOptions<T> {
    fn default() -> Self {
        let grid = [0.1, 1.0, 10.0];
        let starts = grid.iter().flat_map(|&q| grid.iter().map(move |&c| (q, c))).collect();
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            damping: 0.5,
            quadrature: RsQuadrature::Adaptive { per_sector: 16 },
            starts,
        }
    }
}

/// All distinct fixed points found from the configured starts, with the selected one.
#[derive(Debug, Clone, PartialEq)]
pub struct RsFixedPoints<T> {
    pub points: Vec<RsSolution<T>>,
    pub selected: usize,
}

impl<T: Real> RsFixedPoints<T> {
    pub fn solution(&self) -> &RsSolution<T> {
        &self.points[self.selected]
    }

    pub fn ambiguous(&self) -> bool {
        self.points.len() > 1
    }
}

/// `D = gamma sigma_u^2 + alpha d/dchi [(q - chi gamma sigma_u^2) chi R(-chi)]` with `q` held fixed.
pub fn rs_distortion<T: Real>(q: T, chi: T, ens: &ChannelEnsemble<T>, params: &SystemParams<T>) -> Result<T> {
    let s = params.signal_power();
    let alpha = ens.alpha();
    match ens.spectrum {
        Spectrum::IidGaussian => Ok((q + s) / (T::one() + chi).powi(2)),
        Spectrum::Empirical(_) => {
            let g = |c: T| -> Result<T> { Ok((q - c * s) * c * r_transform(ens, -c)?) };
            let h = T::lit(1e-6);
            Ok(s + alpha * (g(chi + h)? - g(chi - h)?) / (h + h))
        }
    }
}

/// Quantities derived from `(q, chi)`: `(f, argmin scale c, e)`.
pub(crate) fn rs_scales<T: Real>(
    q: T,
    chi: T,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
) -> Result<(T, T, T)> {
    let s = params.signal_power();
    let r = r_transform(ens, -chi)?;
    let rp = r_transform_derivative(ens, -chi)?;
    let f2 = (q - chi * s) * rp + s * r;
    if !(f2 > T::zero()) {
        return Err(LseError::OutOfRegion(format!("f^2 = {f2} at q={q}, chi={chi}")));
    }
    let f = f2.sqrt();
    let e = r + params.lambda;
    if !(e > T::zero()) {
        return Err(LseError::OutOfRegion(format!("R(-chi) + lambda = {e} <= 0")));
    }
    Ok((f, e / f, e))
}

/// `(E Re{z* x(z)}, E |x(z)|^2)` for `x(z) = argmin_x |z - c x|`, `z ~ CN(0,1)`.
pub(crate) fn rs_moments<T: Real>(set: &ConstraintSet<T>, c: T, quad: &RsQuadrature<T>) -> (T, T) {
    let mut acc = (T::zero(), T::zero());
    let mut add = |z: num_complex::Complex<T>, w: T| {
        let x = set.scalar_min(z, c);
        acc.0 += w * (z.conj() * x).re;
        acc.1 += w * x.norm_sqr();
    };
    match quad {
        RsQuadrature::Adaptive { per_sector } => {
            let breaks: Vec<T> = set.radial_breakpoint(c).into_iter().collect();
            let rule = PolarRule::new(&breaks, set.angular_sectors(), *per_sector);
            rule.nodes.iter().for_each(|&(z, w)| add(z, w));
        }
        RsQuadrature::Hermite(rule) => rule.iter().for_each(|(z, w)| add(z, w)),
    }
    acc
}

/// One application of the RS map: `(q, chi) -> (E|x|^2, E Re{z* x} / f)`.
pub(crate) fn rs_map<T: Real>(
    set: &ConstraintSet<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    quad: &RsQuadrature<T>,
    q: T,
    chi: T,
) -> Result<(T, T)> {
    let (f, c, _) = rs_scales(q, chi, ens, params)?;
    let (h, qn) = rs_moments(set, c, quad);
    let qn = match *set {
        // the modulus is fixed; keep q exact rather than quadrature-rounded
        ConstraintSet::Circle { power } | ConstraintSet::Mpsk { power, .. } => power,
        _ => qn,
    };
    Ok((qn, h / f))
}

fn rel_gap<T: Real>(a: T, b: T) -> T {
    (a - b).abs() / T::one().max(a.abs())
}

fn iterate<T: Real>(
    set: &ConstraintSet<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    opts: &RsOptions<T>,
    start: (T, T),
) -> Result<RsSolution<T>> {
    let (mut q, mut chi) = start;
    if let ConstraintSet::Circle { power } | ConstraintSet::Mpsk { power, .. } = *set {
        q = power;
    }
    let mut theta = T::lit(opts.damping);
    let min_theta = T::lit(1e-4);
    let tol = T::lit(opts.tol);
    let mut last_res = T::infinity();
    let mut worse = 0;
    for it in 1..=opts.max_iter {
        let (qn, cn) = match rs_map(set, ens, params, &opts.quadrature, q, chi) {
            Ok(v) if v.0.is_finite() && v.1.is_finite() => v,
            _ => {
                return Err(LseError::OutOfRegion(format!("RS map undefined at q={q}, chi={chi}")));
            }
        };
        let res = rel_gap(qn, q).max(rel_gap(cn, chi));
        if res < tol {
            return finish(set, ens, params, opts, qn, cn, it);
        }
        if res > last_res {
            worse += 1;
            if worse >= 3 {
                theta = (theta / T::lit(2.0)).max(min_theta);
                worse = 0;
            }
        } else {
            worse = 0;
        }
        last_res = res;
        let mut step = theta;
        // back off if the damped step leaves the valid region
        loop {
            let qt = q + (qn - q) * step;
            let ct = chi + (cn - chi) * step;
            if ct >= T::zero() && rs_scales(qt, ct, ens, params).is_ok() {
                q = qt;
                chi = ct;
                break;
            }
            step /= T::lit(2.0);
            if step < min_theta {
                return Err(LseError::OutOfRegion(format!("persistent negative radicand near chi={chi}")));
            }
        }
        if chi > T::lit(1e12) {
            return Err(LseError::OutOfRegion("chi diverges (zero-distortion regime)".into()));
        }
    }
    Err(LseError::NoConvergence(format!("RS iteration after {} steps (last residual {last_res})", opts.max_iter)))
}

fn finish<T: Real>(
    set: &ConstraintSet<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    opts: &RsOptions<T>,
    q: T,
    chi: T,
    iterations: usize,
) -> Result<RsSolution<T>> {
    let (f, _, e) = rs_scales(q, chi, ens, params)?;
    let (qn, cn) = rs_map(set, ens, params, &opts.quadrature, q, chi)?;
    let residual = rel_gap(qn, q).max(rel_gap(cn, chi));
    let distortion = rs_distortion(q, chi, ens, params)?;
    Ok(RsSolution {
        q,
        chi,
        f,
        e,
        distortion,
        lambda: params.lambda,
        converged: residual <= T::lit(opts.tol.max(1e-8)),
        residual,
        iterations,
    })
}

/// Fixed points for sets of constant modulus, where `q = P` leaves a scalar equation in `chi`:
/// sign changes of `map(chi) - chi` on a log grid, each refined by bisection in `log chi`.
fn fixed_modulus_roots<T: Real>(
    set: &ConstraintSet<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    opts: &RsOptions<T>,
    q: T,
) -> Result<Vec<RsSolution<T>>> {
    let phi = |lc: T| -> Option<T> {
        let chi = lc.exp();
        rs_map(set, ens, params, &opts.quadrature, q, chi).ok().map(|(_, cn)| cn / chi - T::one()).filter(|v| v.is_finite())
    };
    // 8 points per decade over [1e-8, 1e12]
    let (lo, hi) = (T::lit(1e-8f64.ln()), T::lit(1e12f64.ln()));
    let n = 161;
    let step = (hi - lo) / T::lit((n - 1) as f64);
    let grid: Vec<(T, Option<T>)> = (0..n).map(|i| {
        let x = lo + step * T::lit(i as f64);
        (x, phi(x))
    }).collect();
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let ((mut a, Some(fa)), (mut b, Some(fb))) = (w[0], w[1]) else { continue };
        if fa == T::zero() {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        for _ in 0..200 {
            let m = (a + b) / T::lit(2.0);
            if m <= a || m >= b {
                break;
            }
            match phi(m) {
                Some(fm) if fm.signum() == fa.signum() => a = m,
                Some(_) => b = m,
                None => break,
            }
        }
        roots.push((a + b) / T::lit(2.0));
    }
    if roots.is_empty() {
        return Err(match grid.last() {
            Some((_, Some(v))) if *v > T::zero() => {
                LseError::OutOfRegion("no finite chi solves the RS equation (zero-distortion regime)".into())
            }
            _ => LseError::NoConvergence("no sign change of the RS chi equation".into()),
        });
    }
    roots.into_iter().map(|lc| finish(set, ens, params, opts, q, lc.exp(), 0)).collect()
}

/// Distinct RS fixed points. Constant-modulus sets are solved as a scalar equation in `chi`;
/// otherwise the damped iteration runs from every configured start.
pub fn rs_solve_all<T: Real>(
    set: &ConstraintSet<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    opts: &RsOptions<T>,
) -> Result<RsFixedPoints<T>> {
    set.validate()?;
    params.validate()?;
    let mut points: Vec<RsSolution<T>> = Vec::new();
    let mut last_err = None;
    if let ConstraintSet::Circle { power } | ConstraintSet::Mpsk { power, .. } = *set {
        points = fixed_modulus_roots(set, ens, params, opts, power)?;
    }
    let starts: &[(f64, f64)] = if points.is_empty() { &opts.starts } else { &[] };
    for &(q0, c0) in starts {
        match iterate(set, ens, params, opts, (T::lit(q0), T::lit(c0))) {
            Ok(sol) => {
                let dup = points.iter().any(|p| rel_gap(p.q, sol.q) < T::lit(1e-6) && rel_gap(p.chi, sol.chi) < T::lit(1e-6));
                if !dup {
                    points.push(sol);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    if points.is_empty() {
        return Err(last_err.unwrap_or_else(|| LseError::NoConvergence("no RS start converged".into())));
    }
    let alpha = ens.alpha();
    let selected = (0..points.len())
        .max_by(|&a, &b| {
            points[a]
                .selection_score(alpha)
                .partial_cmp(&points[b].selection_score(alpha))
                .unwrap_or(core::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    Ok(RsFixedPoints { points, selected })
}

/// Selected RS fixed point.
pub fn rs_solve<T: Real>(
    set: &ConstraintSet<T>,
    ens: &ChannelEnsemble<T>,
    params: &SystemParams<T>,
    opts: &RsOptions<T>,
) -> Result<RsSolution<T>> {
    rs_solve_all(set, ens, params, opts).map(|fp| *fp.solution())
}
