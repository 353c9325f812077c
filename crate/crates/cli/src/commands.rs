use rayon::prelude::*;

use lse_core::harness::{
    eigen_cdf_compare, empirical_distortion, ofdm_equivalent_channel, ofdm_gram_eigenvalues, optimize_gamma,
};
use lse_core::linalg::hermitian_eigenvalues;
use lse_core::model::{sample_channel_with, trial_rng};
use lse_core::precoders::Precoder;
use lse_core::quadrature::QuadratureRule;
use lse_core::replica::{rs_pinned, rs_solve, rsb1_solve, RsOptions, RsQuadrature, RsbOptions};
use lse_core::{Constraint, Ensemble, LseError, Matrix, Params, RsPoint, RsbPoint};

use crate::config::{ConfigError, RunConfig};
use crate::output::{Meta, OfdmRow, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Rs,
    Rsb,
    Simulate,
    Rate,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rs => "rs",
            Self::Rsb => "rsb",
            Self::Simulate => "simulate",
            Self::Rate => "rate",
            Self::Sweep => "sweep",
        }
    }
}

const RS_PER_SECTOR: usize = 16;

fn rs_options(cfg: &RunConfig) -> RsOptions<f64> {
    RsOptions { tol: cfg.tol, quadrature: RsQuadrature::Adaptive { per_sector: RS_PER_SECTOR }, ..RsOptions::default() }
}

fn rsb_options(cfg: &RunConfig) -> lse_core::Result<RsbOptions<f64>> {
    Ok(RsbOptions { tol: cfg.tol, quadrature: QuadratureRule::new(cfg.nodes)?, rs: rs_options(cfg), ..RsbOptions::default() })
}

/// RS point at `params`, with the average power pinned when the config asks for it.
fn rs_point(cfg: &RunConfig, alpha: f64, params: &Params) -> lse_core::Result<RsPoint> {
    let ens = Ensemble::iid_alpha(alpha)?;
    match cfg.q {
        Some(q) => rs_pinned(&cfg.constraint, &ens, params, q, &rs_options(cfg)),
        None => rs_solve(&cfg.constraint, &ens, params, &rs_options(cfg)),
    }
}

fn fill_rs(row: &mut Row, r: &RsPoint) {
    row.q = Some(r.q);
    row.chi = Some(r.chi);
    row.set_distortion(r.distortion);
    if !r.converged {
        row.fail(format!("RS residual {:.3e}", r.residual));
    }
}

fn fill_rsb(row: &mut Row, r: &RsbPoint) {
    row.q = Some(r.q1);
    row.chi = Some(r.chi1);
    row.set_distortion(r.distortion);
    row.p1 = Some(r.p1);
    row.mu1 = Some(r.mu1);
    row.eta1 = Some(r.eta1);
    if !r.converged {
        row.fail(format!("1-RSB residual {:.3e}", r.residual));
    }
}

/// Solver and tolerance choices that shape the numbers, for the output header.
pub fn meta(cfg: &RunConfig, command: &str) -> Meta {
    let p = &cfg.params;
    let mut m: Meta = vec![
        ("version", env!("CARGO_PKG_VERSION").to_string()),
        ("command", command.to_string()),
        ("seed", cfg.seed.to_string()),
    ];
    if command == "ofdm-check" {
        m.push(("ks_max", cfg.ks_max.to_string()));
        return m;
    }
    m.extend([
        ("constraint", cfg.constraint_text.clone()),
        ("q_pinned", cfg.q.map_or_else(|| "none".into(), |q| q.to_string())),
        ("gamma", p.gamma.to_string()),
        ("lambda", p.lambda.to_string()),
        ("sigma_u2", p.sigma_u2.to_string()),
        ("sigma_n2", p.sigma_n2.to_string()),
        ("tol", cfg.tol.to_string()),
        ("rs_nodes_per_sector", RS_PER_SECTOR.to_string()),
    ]);
    if matches!(command, "rsb" | "sweep") {
        m.push(("rsb_nodes", cfg.nodes.to_string()));
    }
    if matches!(command, "simulate" | "sweep") {
        m.push(("K", cfg.users.to_string()));
        m.push(("trials", cfg.trials.to_string()));
    }
    if matches!(command, "rate" | "sweep") {
        m.push(("gamma_bracket", format!("{}:{}", cfg.gamma_bracket.0, cfg.gamma_bracket.1)));
    }
    m
}

/// Rejects combinations a command cannot evaluate.
pub fn check(cfg: &RunConfig, cmd: Command) -> Result<(), ConfigError> {
    let wants_rsb = cmd == Command::Rsb || (cmd == Command::Sweep && cfg.rsb);
    if wants_rsb && cfg.constraint == Constraint::Unconstrained {
        return Err(ConfigError("1-RSB needs a bounded constraint (disk, circle or psk)".into()));
    }
    if wants_rsb && cfg.q.is_some() {
        return Err(ConfigError("1-RSB does not support a pinned average power; set --lambda instead".into()));
    }
    Ok(())
}

fn simulate_into(row: &mut Row, cfg: &RunConfig, alpha: f64, lambda: f64) {
    let k = cfg.users;
    let n = ((alpha * k as f64).round() as usize).max(1);
    let result = Ensemble::iid(k, n).and_then(|ens| {
        empirical_distortion(&Precoder::lse(cfg.constraint), &ens, &cfg.params.with_lambda(lambda), cfg.trials, cfg.seed)
    });
    match result {
        Ok(e) => {
            row.d_emp_mean = Some(e.mean);
            row.d_emp_stderr = Some(e.stderr);
            if e.nonconverged > 0 {
                row.fail(format!("{} of {} trials did not converge", e.nonconverged, e.trials));
            }
        }
        Err(e) => row.fail(format!("simulation: {e}")),
    }
}

fn rate_into(row: &mut Row, cfg: &RunConfig, alpha: f64) {
    let predict = |p: &Params| match rs_point(cfg, alpha, p) {
        Ok(r) => Ok(r.distortion),
        // zero-distortion regime of a pinned power
        Err(LseError::OutOfRegion(_)) if cfg.q.is_some() => Ok(0.0),
        Err(e) => Err(e),
    };
    match optimize_gamma(&cfg.params, cfg.gamma_bracket, predict) {
        Ok(opt) => {
            row.rate_bits = Some(opt.rate);
            row.gamma_opt = Some(opt.gamma);
            if row.d_linear.is_none() {
                row.set_distortion(opt.distortion);
                if let Ok(r) = rs_point(cfg, alpha, &cfg.params.with_gamma(opt.gamma)) {
                    row.q = Some(r.q);
                    row.chi = Some(r.chi);
                }
            }
        }
        Err(e) => row.fail(format!("rate: {e}")),
    }
}

fn point(cfg: &RunConfig, cmd: Command, alpha: f64) -> Row {
    let mut row = Row::new(alpha);
    match cmd {
        Command::Rs | Command::Simulate => {
            let rs = rs_point(cfg, alpha, &cfg.params);
            match &rs {
                Ok(r) => fill_rs(&mut row, r),
                Err(e) => row.fail(format!("RS: {e}")),
            }
            if cmd == Command::Simulate {
                match (&rs, cfg.q) {
                    (Ok(r), Some(_)) => simulate_into(&mut row, cfg, alpha, r.lambda),
                    (Err(_), Some(_)) => row.fail("no regularisation for the pinned power; simulation skipped"),
                    (_, None) => simulate_into(&mut row, cfg, alpha, cfg.params.lambda),
                }
            }
        }
        Command::Rsb => {
            match rsb_options(cfg).and_then(|o| rsb1_solve(&cfg.constraint, &Ensemble::iid_alpha(alpha)?, &cfg.params, &o)) {
                Ok(r) => fill_rsb(&mut row, &r),
                Err(e) => row.fail(format!("1-RSB: {e}")),
            }
        }
        Command::Rate => rate_into(&mut row, cfg, alpha),
        Command::Sweep => {
            let mut lambda = cfg.params.lambda;
            if cfg.rsb {
                match rsb_options(cfg).and_then(|o| rsb1_solve(&cfg.constraint, &Ensemble::iid_alpha(alpha)?, &cfg.params, &o)) {
                    Ok(r) => fill_rsb(&mut row, &r),
                    Err(e) => row.fail(format!("1-RSB: {e}")),
                }
            } else {
                match rs_point(cfg, alpha, &cfg.params) {
                    Ok(r) => {
                        lambda = r.lambda;
                        fill_rs(&mut row, &r);
                    }
                    Err(e) => row.fail(format!("RS: {e}")),
                }
            }
            if cfg.q.is_none() || row.d_linear.is_some() {
                simulate_into(&mut row, cfg, alpha, lambda);
            }
            let prediction = (row.q, row.chi, row.d_linear, row.d_db);
            rate_into(&mut row, cfg, alpha);
            // rate_into only fills the prediction columns when they are empty
            (row.q, row.chi, row.d_linear, row.d_db) = prediction;
        }
    }
    row
}

/// Every sweep point, in axis order.
pub fn sweep(cfg: &RunConfig, cmd: Command) -> Vec<Row> {
    cfg.alphas.par_iter().map(|&a| point(cfg, cmd, a)).collect()
}

/// KS distance between the OFDM Gram spectrum and that of a single subcarrier.
pub fn ofdm_check(cfg: &RunConfig) -> lse_core::Result<OfdmRow> {
    let ens = Ensemble::iid(cfg.users, cfg.antennas)?;
    let hs: Vec<Matrix> = (0..cfg.subcarriers as u64)
        .map(|j| sample_channel_with(&ens, &mut trial_rng(cfg.seed, j)))
        .collect::<lse_core::Result<_>>()?;
    let ofdm = ofdm_equivalent_channel(&hs)?;
    let joint = ofdm_gram_eigenvalues(&ofdm)?;
    let single = hermitian_eigenvalues(&hs[0].adjoint().mul(&hs[0])?)?;
    let ks = eigen_cdf_compare(&joint, &single)?;
    Ok(OfdmRow {
        seed: cfg.seed,
        subcarriers: cfg.subcarriers,
        users: cfg.users,
        antennas: cfg.antennas,
        ks,
        unitarity_residual: ofdm.unitarity_residual,
        pass: ks <= cfg.ks_max,
    })
}
