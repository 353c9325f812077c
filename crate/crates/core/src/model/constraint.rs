use num_complex::Complex;

use crate::error::{LseError, Result};
use crate::scalar::Real;

/// Per-antenna alphabet the transmit entries are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintSet<T> {
    Unconstrained,
    /// `|x|^2 <= power`.
    Disk { power: T },
    /// `|x|^2 == power` (constant envelope).
    Circle { power: T },
    /// `sqrt(power) * exp(j 2 pi k / order)`, `k = 1..=order`.
    Mpsk { order: usize, power: T },
}

impl<T: Real> ConstraintSet<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = |p: T| p > T::zero() && p.is_finite();
        match *self {
            Self::Unconstrained => Ok(()),
            Self::Disk { power } | Self::Circle { power } if ok(power) => Ok(()),
            Self::Mpsk { order, power } if order >= 2 && ok(power) => Ok(()),
            Self::Mpsk { order, .. } if order < 2 => Err(LseError::InvalidParameter(format!(
                "PSK order must be at least 2, got {order}"
            ))),
            _ => Err(LseError::InvalidParameter(format!(
                "constraint power must be positive and finite: {self:?}"
            ))),
        }
    }

    pub fn power(&self) -> Option<T> {
        match *self {
            Self::Unconstrained => None,
            Self::Disk { power } | Self::Circle { power } | Self::Mpsk { power, .. } => Some(power),
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Self::Unconstrained)
    }

    /// True when every point of the set lies on the real axis (BPSK).
    pub fn is_real_line(&self) -> bool {
        matches!(self, Self::Mpsk { order: 2, .. })
    }

    /// Constellation points in phase order `0, 2pi/M, ...`. Empty for continuous sets.
    pub fn points(&self) -> Vec<Complex<T>> {
        match *self {
            Self::Mpsk { order, power } => (0..order).map(|k| psk_point(k, order, power)).collect(),
            _ => Vec::new(),
        }
    }

    /// Membership test with absolute tolerance `tol` on the modulus.
    /// PSK membership is exact: the entry must equal one of [`Self::points`].
    pub fn contains(&self, x: Complex<T>, tol: T) -> bool {
        match *self {
            Self::Unconstrained => x.re.is_finite() && x.im.is_finite(),
            Self::Disk { power } => x.norm() <= power.sqrt() + tol,
            Self::Circle { power } => (x.norm() - power.sqrt()).abs() <= tol,
            Self::Mpsk { order, power } => {
                (0..order).any(|k| psk_point(k, order, power) == x)
            }
        }
    }

    /// `argmin_{x in X} |z - c x|` for `c > 0`.
    ///
    /// Ties go to the smallest phase in `[0, 2pi)`; for the circle and PSK that makes
    /// `z = 0` map to `sqrt(P)`.
    pub fn scalar_min(&self, z: Complex<T>, c: T) -> Complex<T> {
        match *self {
            Self::Unconstrained => z / c,
            Self::Disk { power } => {
                let r = z.norm();
                let cap = power.sqrt();
                if r / c <= cap {
                    z / c
                } else {
                    z * (cap / r)
                }
            }
            Self::Circle { power } => {
                let r = z.norm();
                if r == T::zero() {
                    Complex::new(power.sqrt(), T::zero())
                } else {
                    z * (power.sqrt() / r)
                }
            }
            Self::Mpsk { order, power } => psk_point(nearest_psk_index(z, order), order, power),
        }
    }

    /// Radius of the circle on which the scalar minimiser changes regime, if any.
    pub(crate) fn radial_breakpoint(&self, c: T) -> Option<T> {
        match *self {
            Self::Disk { power } => Some(c * power.sqrt()),
            _ => None,
        }
    }

    /// Number of equal angular sectors the argmin is constant on (PSK decision regions).
    pub(crate) fn angular_sectors(&self) -> Option<usize> {
        match *self {
            Self::Mpsk { order, .. } => Some(order),
            _ => None,
        }
    }
}

/// Shorthand for [`ConstraintSet::scalar_min`].
pub fn scalar_constrained_min<T: Real>(set: &ConstraintSet<T>, z: Complex<T>, c: T) -> Complex<T> {
    set.scalar_min(z, c)
}

pub(crate) fn psk_point<T: Real>(k: usize, order: usize, power: T) -> Complex<T> {
    let amp = power.sqrt();
    let k = k % order;
    // exact values on the axes so that membership checks stay bitwise
    if 4 * k == 0 {
        return Complex::new(amp, T::zero());
    }
    if 2 * k == order {
        return Complex::new(-amp, T::zero());
    }
    if 4 * k == order {
        return Complex::new(T::zero(), amp);
    }
    if 4 * k == 3 * order {
        return Complex::new(T::zero(), -amp);
    }
    let phase = T::TAU() * T::lit(k as f64) / T::lit(order as f64);
    Complex::from_polar(amp, phase)
}

fn nearest_psk_index<T: Real>(z: Complex<T>, order: usize) -> usize {
    if z.re == T::zero() && z.im == T::zero() {
        return 0;
    }
    let mut phi = z.im.atan2(z.re);
    if phi < T::zero() {
        phi += T::TAU();
    }
    let t = phi * T::lit(order as f64) / T::TAU();
    let lo = t.floor();
    let frac = t - lo;
    let lo = lo.to_usize().unwrap_or(0);
    let a = lo % order;
    let b = (lo + 1) % order;
    let half = T::lit(0.5);
    if frac < half {
        a
    } else if frac > half {
        b
    } else {
        a.min(b)
    }
}
