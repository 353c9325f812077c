//! Quadrature for expectations over the complex standard Gaussian `Dz = e^{-|z|^2}/pi d^2z`.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex;

use crate::error::{LseError, Result};
use crate::scalar::Real;

/// Tensor product of two real Gauss-Hermite rules, normalised to the measure `Dz`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    nodes_per_axis: usize,
    nodes: Vec<Complex<T>>,
    weights: Vec<T>,
}

impl<T: Real> Default for QuadratureRule<T> {
    fn default() -> Self {
        Self::new(40).expect("40 nodes")
    }
}

impl<T: Real> QuadratureRule<T> {
    pub fn new(nodes_per_axis: usize) -> Result<Self> {
        let axis = hermite_normal(nodes_per_axis)?;
        let mut nodes = Vec::with_capacity(axis.len() * axis.len());
        let mut weights = Vec::with_capacity(axis.len() * axis.len());
        for &(x, wx) in &axis {
            for &(y, wy) in &axis {
                nodes.push(Complex::new(T::lit(x), T::lit(y)));
                weights.push(T::lit(wx * wy));
            }
        }
        Ok(Self { nodes_per_axis, nodes, weights })
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn iter(&self) -> impl Iterator<Item = (Complex<T>, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int f(z) Dz`.
    pub fn expect(&self, mut f: impl FnMut(Complex<T>) -> T) -> T {
        self.iter().map(|(z, w)| w * f(z)).sum()
    }
}

/// Gauss-Hermite nodes and weights for one real axis of `Dz`, i.e. for `N(0, 1/2)`.
pub(crate) fn hermite_normal(n: usize) -> Result<Vec<(f64, f64)>> {
    let n = NonZeroUsize::new(n).ok_or_else(|| LseError::InvalidParameter("quadrature needs at least one node".into()))?;
    let rule = GaussHermite::new(n);
    let norm = core::f64::consts::PI.sqrt();
    Ok(rule.as_node_weight_pairs().iter().map(|&(x, w)| (x, w / norm)).collect())
}

/// Gauss-Legendre rule mapped to each panel `[b_i, b_{i+1}]` of `breaks`.
pub(crate) fn composite_legendre(breaks: &[f64], per_panel: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(per_panel.max(1)).expect("nonzero"));
    let mut out = Vec::with_capacity(per_panel * breaks.len());
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
        out.extend(rule.as_node_weight_pairs().iter().map(|&(x, w)| (mid + half * x, half * w)));
    }
    out
}

/// Sorted panel boundaries on `[lo, hi]` including the interior points of `extra`.
pub(crate) fn panel_breaks(lo: f64, hi: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut b: Vec<f64> = extra.into_iter().filter(|x| x.is_finite() && *x > lo && *x < hi).collect();
    b.push(lo);
    b.push(hi);
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, c| (*a - *c).abs() <= 1e-12 * (1.0 + c.abs()));
    b
}

const R_MAX: f64 = 9.0;
const RADIAL_PANEL: usize = 24;

/// Polar product rule for `Dz` whose radial panels are split at the caller's breakpoints
/// and whose angular nodes are Gauss-Legendre per decision sector. Piecewise-smooth
/// integrands (clipping, quantisation) are integrated to near machine precision this way,
/// where a plain Gauss-Hermite tensor rule only converges like `1/n`.
#[derive(Debug, Clone)]
pub(crate) struct PolarRule<T> {
    pub nodes: Vec<(Complex<T>, T)>,
}

impl<T: Real> PolarRule<T> {
    /// `radial_breaks`: radii where the integrand has a kink. `sectors`: number of equal
    /// angular sectors (centered on phase `2 pi k / M`) on which it is smooth; `None` means
    /// the integrand is radial and a single angular node is exact.
    pub fn new(radial_breaks: &[T], sectors: Option<usize>, per_sector: usize) -> Self {
        let breaks = panel_breaks(
            0.0,
            R_MAX,
            [1.5, 3.0, 5.0].into_iter().chain(radial_breaks.iter().map(|b| b.as_f64())),
        );
        let radial: Vec<(f64, f64)> = composite_legendre(&breaks, RADIAL_PANEL)
            .into_iter()
            .map(|(r, w)| (r, w * 2.0 * r * (-r * r).exp()))
            .collect();
        let angular: Vec<(f64, f64)> = match sectors {
            None => vec![(0.0, 1.0)],
            Some(m) => {
                let width = core::f64::consts::TAU / m as f64;
                let edges: Vec<f64> = (0..=m).map(|k| (k as f64 - 0.5) * width).collect();
                composite_legendre(&edges, per_sector)
                    .into_iter()
                    .map(|(t, w)| (t, w / core::f64::consts::TAU))
                    .collect()
            }
        };
        let mut nodes = Vec::with_capacity(radial.len() * angular.len());
        for &(r, wr) in &radial {
            for &(t, wt) in &angular {
                nodes.push((Complex::from_polar(T::lit(r), T::lit(t)), T::lit(wr * wt)));
            }
        }
        Self { nodes }
    }
}
