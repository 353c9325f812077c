//! Replica-method predictions of the large-system distortion: the replica-symmetric (RS)
//! fixed point, its closed forms for iid channels, and one-step replica symmetry breaking.

mod closed;
mod pinned;
mod rs;
mod rsb;

pub use closed::{rs_constant_envelope, rs_peak_power, rs_psk};
pub use pinned::rs_pinned;
pub use rsb::{mu_equation_residual, rsb1_distortion, rsb1_solve, rsb1_solve_all, rsb1_solve_at_mu, RsbOptions, RsbReport, RsbSolution};
pub use rs::{rs_distortion, rs_solve, rs_solve_all, RsFixedPoints, RsOptions, RsQuadrature, RsSolution};

use crate::scalar::Real;

/// `10 log10(x)`.
pub fn to_db<T: Real>(x: T) -> T {
    T::lit(10.0) * x.log10()
}

pub fn from_db<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}
