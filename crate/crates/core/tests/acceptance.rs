//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::time::{Duration, Instant};

use lse_core::harness::{
    eigen_cdf_compare, empirical_distortion, ofdm_equivalent_channel, ofdm_gram_eigenvalues, optimize_gamma,
};
use lse_core::linalg::{hermitian_eigenvalues, CMatrix};
use lse_core::model::{sample_channel_with, sample_symbols, trial_rng, ChannelEnsemble, ConstraintSet, SystemParams};
use lse_core::precoders::{lse_bruteforce, lse_circle, lse_disk, lse_mpsk, objective, Precoder, SolverOptions};
use lse_core::quadrature::QuadratureRule;
use lse_core::replica::{
    from_db, rs_constant_envelope, rs_peak_power, rs_pinned, rs_psk, rs_solve, rsb1_distortion, rsb1_solve_all,
    to_db, RsOptions, RsbOptions, RsbSolution,
};
use lse_core::{LseError, Result};

type Ens = ChannelEnsemble<f64>;
type Params = SystemParams<f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn iid(alpha: f64) -> Ens {
    ChannelEnsemble::iid_alpha(alpha).unwrap()
}

fn params(gamma: f64, lambda: f64) -> Params {
    SystemParams::new(gamma, lambda)
}

fn sim_ensemble(alpha: f64, k: usize) -> Ens {
    ChannelEnsemble::iid(k, (alpha * k as f64).round() as usize).unwrap()
}

// ---------------------------------------------------------------------------------------------

const C1_TARGET_DB: f64 = -4.204;
const C1_TOL_DB: f64 = 1e-3;

fn criterion_1() -> Outcome {
    let p = params(1.0, 1e-6);
    let closed = rs_psk(2, &iid(2.0), &p).unwrap();
    let general = rs_solve(&ConstraintSet::Mpsk { order: 2, power: 1.0 }, &iid(2.0), &p, &RsOptions::default()).unwrap();
    let (a, b) = (to_db(closed.distortion), to_db(general.distortion));
    Outcome {
        pass: (a - C1_TARGET_DB).abs() <= C1_TOL_DB && (a - b).abs() <= C1_TOL_DB,
        detail: format!("closed form {a:.5} dB, general solver {b:.5} dB"),
    }
}

// ---------------------------------------------------------------------------------------------

const C2_TOL_DB: f64 = 0.3;

fn criterion_2() -> Outcome {
    let p = params(1.0, 0.01);
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [1.0, 2.0, 4.0] {
        let rs = rs_solve(&ConstraintSet::Unconstrained, &iid(alpha), &p, &RsOptions::default()).unwrap();
        let emp = empirical_distortion(&Precoder::lse(ConstraintSet::Unconstrained), &sim_ensemble(alpha, 200), &p, 50, 2)
            .unwrap();
        let gap = to_db(emp.mean) - to_db(rs.distortion);
        pass &= gap.abs() <= C2_TOL_DB;
        detail.push(format!("a={alpha}: RS {:.3} / MC {:.3} dB", to_db(rs.distortion), to_db(emp.mean)));
    }
    Outcome { pass, detail: detail.join("; ") }
}

// ---------------------------------------------------------------------------------------------

const C3_Q: f64 = 0.5;
const C3A_TOL_DB: f64 = 0.75;
const C3B_TOL_DB: f64 = 0.5;
const C3_ALPHAS: [f64; 8] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];

/// RS distortion with the average power pinned; `Ok(None)` in the zero-distortion regime.
fn pinned(set: ConstraintSet<f64>, alpha: f64) -> Result<Option<(f64, f64)>> {
    let r = match set {
        ConstraintSet::Circle { .. } => rs_solve(&set, &iid(alpha), &params(1.0, 0.0), &RsOptions::default()),
        _ => rs_pinned(&set, &iid(alpha), &params(1.0, 0.0), C3_Q, &RsOptions::default()),
    };
    match r {
        Ok(s) => Ok(Some((s.distortion, s.lambda))),
        Err(LseError::OutOfRegion(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn criterion_3a() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    let sets = [
        ("0dB", ConstraintSet::Circle { power: C3_Q }),
        ("1dB", ConstraintSet::Disk { power: C3_Q * from_db(1.0) }),
    ];
    for (name, set) in sets {
        for alpha in C3_ALPHAS {
            let (d_rs, lam) = match pinned(set, alpha) {
                Ok(Some(v)) => v,
                Ok(None) => {
                    detail.push(format!("{name} a={alpha}: RS zero-distortion, skipped"));
                    continue;
                }
                Err(e) => {
                    pass = false;
                    detail.push(format!("{name} a={alpha}: RS failed ({e})"));
                    continue;
                }
            };
            let emp = empirical_distortion(&Precoder::lse(set), &sim_ensemble(alpha, 200), &params(1.0, lam), 25, 3).unwrap();
            let gap = to_db(emp.mean) - to_db(d_rs);
            let ok = gap.abs() <= C3A_TOL_DB;
            pass &= ok;
            detail.push(format!(
                "{name} a={alpha}: RS {:.2} / MC {:.2} dB{}",
                to_db(d_rs),
                to_db(emp.mean),
                if ok { "" } else { " (!)" }
            ));
        }
    }
    Outcome { pass, detail: detail.join("; ") }
}

fn criterion_3b() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in C3_ALPHAS.into_iter().filter(|&a| a >= 1.0) {
        let free = pinned(ConstraintSet::Unconstrained, alpha).unwrap();
        let peak = pinned(ConstraintSet::Disk { power: C3_Q * from_db(3.0) }, alpha).unwrap();
        let (a, b) = (free.map_or(f64::NEG_INFINITY, |v| to_db(v.0)), peak.map_or(f64::NEG_INFINITY, |v| to_db(v.0)));
        let ok = if a.is_infinite() && b.is_infinite() { true } else { (a - b).abs() <= C3B_TOL_DB };
        pass &= ok;
        detail.push(format!("a={alpha}: no-peak {a:.2} / 3dB {b:.2} dB{}", if ok { "" } else { " (!)" }));
    }
    Outcome { pass, detail: detail.join("; ") }
}

// ---------------------------------------------------------------------------------------------

const C4_TARGET_D: f64 = 0.1;

fn peak_distortion(alpha: f64, lambda: f64) -> Result<(f64, f64)> {
    let s = rs_peak_power(&iid(alpha), &params(1.0, lambda), 1.0, 1e-13, 200_000)?;
    Ok((s.distortion, s.q))
}

/// Average power needed for `D = -10 dB` with unit peak power: bisect `lambda` (D increases with it).
fn required_power(alpha: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e3f64.ln());
    if peak_distortion(alpha, lo.exp())?.0 > C4_TARGET_D || peak_distortion(alpha, hi.exp())?.0 < C4_TARGET_D {
        return Err(LseError::OutOfRegion(format!("D = -10 dB not bracketed at alpha={alpha}")));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if peak_distortion(alpha, mid.exp())?.0 < C4_TARGET_D {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(peak_distortion(alpha, (0.5 * (lo + hi)).exp())?.1)
}

fn criterion_4() -> Outcome {
    let alphas: Vec<f64> = (0..9).map(|i| 4.0 * 5f64.powf(i as f64 / 8.0)).collect();
    let mut pts = Vec::new();
    for &a in &alphas {
        match required_power(a) {
            Ok(q) => pts.push((a.ln(), q.ln())),
            Err(e) => return Outcome { pass: false, detail: format!("alpha={a}: {e}") },
        }
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let kappa = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    Outcome {
        pass: kappa <= -1.0,
        detail: format!("fitted slope {kappa:.4} (q(4)={:.4}, q(20)={:.4})", pts[0].1.exp(), pts[8].1.exp()),
    }
}

// ---------------------------------------------------------------------------------------------

/// Numerical slack for comparing optimised rates (golden-section resolution).
const C5_RATE_SLACK: f64 = 1e-6;
const C5_OVERHEAD: (f64, f64) = (5.5, 7.0);

fn fig3_rate(set: ConstraintSet<f64>, alpha: f64) -> Result<f64> {
    let base = SystemParams { gamma: 1.0, lambda: 0.0, sigma_u2: 1.0, sigma_n2: 1.0 };
    let ens = iid(alpha);
    let opt = optimize_gamma(&base, (1e-2, 1e3), |p| {
        let r = match set {
            ConstraintSet::Circle { .. } => rs_solve(&set, &ens, p, &RsOptions::default()),
            _ => rs_pinned(&set, &ens, p, 1.0, &RsOptions::default()),
        };
        match r {
            Ok(s) => Ok(s.distortion),
            // the average power admits zero distortion at this gamma
            Err(LseError::OutOfRegion(_)) => Ok(0.0),
            Err(e) => Err(e),
        }
    })?;
    Ok(opt.rate)
}

fn criterion_5() -> Outcome {
    let sets = [
        ConstraintSet::Unconstrained,
        ConstraintSet::Disk { power: from_db(3.0) },
        ConstraintSet::Disk { power: from_db(2.0) },
        ConstraintSet::Disk { power: from_db(1.0) },
        ConstraintSet::Circle { power: 1.0 },
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in (1..=10).map(f64::from) {
        let rates: Vec<f64> = match sets.iter().map(|&s| fig3_rate(s, alpha)).collect::<Result<_>>() {
            Ok(r) => r,
            Err(e) => return Outcome { pass: false, detail: format!("alpha={alpha}: {e}") },
        };
        let ordered = rates.windows(2).all(|w| w[0] >= w[1] - C5_RATE_SLACK);
        pass &= ordered;
        if alpha == 5.0 || !ordered {
            detail.push(format!("a={alpha}: {}", rates.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(" >= ")));
        }
    }
    let target = fig3_rate(ConstraintSet::Unconstrained, 5.0).unwrap();
    let ce = |a: f64| fig3_rate(ConstraintSet::Circle { power: 1.0 }, a).unwrap() - target;
    let (mut lo, mut hi) = (5.0, 12.0);
    if ce(lo) > 0.0 || ce(hi) < 0.0 {
        return Outcome { pass: false, detail: format!("constant envelope never reaches {target:.4} bits") };
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if ce(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a_prime = 0.5 * (lo + hi);
    pass &= (C5_OVERHEAD.0..=C5_OVERHEAD.1).contains(&a_prime);
    detail.push(format!("constant envelope matches the no-peak rate at 5 for a'={a_prime:.3}"));
    Outcome { pass, detail: detail.join("; ") }
}

// ---------------------------------------------------------------------------------------------

const BPSK: ConstraintSet<f64> = ConstraintSet::Mpsk { order: 2, power: 1.0 };
const C6A_TOL_DB: f64 = 0.05;

fn bpsk_predictions(alpha: f64) -> Result<(f64, RsbSolution<f64>)> {
    let p = params(1.0, 1e-6);
    let rs = rs_psk(2, &iid(alpha), &p)?;
    let report = rsb1_solve_all(&BPSK, &iid(alpha), &p, &RsbOptions::default())?;
    Ok((rs.distortion, report.selected))
}

fn describe(alpha: f64, rs: f64, rsb: &RsbSolution<f64>) -> String {
    format!(
        "a={alpha}: RS {:.4} / 1-RSB {:.4} dB (p1={:.3}, mu1={:.3}{})",
        to_db(rs),
        to_db(rsb.distortion),
        rsb.p1,
        rsb.mu1,
        if rsb.reduced_to_rs { ", RS branch" } else { "" }
    )
}

fn criterion_6a() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [1.0, 1.5, 2.0] {
        match bpsk_predictions(alpha) {
            Ok((rs, rsb)) => {
                pass &= (to_db(rsb.distortion) - to_db(rs)).abs() <= C6A_TOL_DB;
                detail.push(describe(alpha, rs, &rsb));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("a={alpha}: {e}"));
            }
        }
    }
    Outcome { pass, detail: detail.join("; ") }
}

fn criterion_6b() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    // RS has a finite BPSK solution only for alpha < 2 pi
    for alpha in [5.0, 5.5, 6.0] {
        match bpsk_predictions(alpha) {
            Ok((rs, rsb)) => {
                pass &= to_db(rsb.distortion) < to_db(rs);
                detail.push(describe(alpha, rs, &rsb));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("a={alpha}: {e}"));
            }
        }
    }
    Outcome { pass, detail: detail.join("; ") }
}

fn criterion_6c() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [1.0, 2.0, 3.0, 4.0, 5.0, 6.0] {
        let (rs, rsb) = match bpsk_predictions(alpha) {
            Ok(v) => v,
            Err(e) => {
                pass = false;
                detail.push(format!("a={alpha}: {e}"));
                continue;
            }
        };
        let floor = rs.min(rsb.distortion);
        let k = (100.0 / alpha).round() as usize;
        let ens = ChannelEnsemble::iid(k, 100).unwrap();
        let emp = empirical_distortion(&Precoder::lse(BPSK), &ens, &params(1.0, 1e-6), 50, 4).unwrap();
        let ok = emp.mean >= floor - 2.0 * emp.stderr;
        pass &= ok;
        detail.push(format!("a={alpha}: MC {:.3} dB vs floor {:.3} dB", to_db(emp.mean), to_db(floor)));
    }
    Outcome { pass, detail: detail.join("; ") }
}

// ---------------------------------------------------------------------------------------------

const C7_TOL_DB: f64 = 0.2;

fn criterion_7() -> Outcome {
    let p = params(1.0, 0.0);
    let mut pass = true;
    let mut detail = Vec::new();
    for i in 0..=14 {
        let alpha = 1.0 + 0.5 * i as f64;
        let psk = rs_psk(8, &iid(alpha), &p);
        let ce = rs_constant_envelope(&iid(alpha), &p);
        match (psk, ce) {
            (Ok(a), Ok(b)) => {
                let gap = to_db(a.distortion) - to_db(b.distortion);
                let ok = gap.abs() <= C7_TOL_DB;
                pass &= ok;
                if !ok || i == 0 {
                    detail.push(format!("a={alpha}: 8-PSK {:.3} / CE {:.3} dB", to_db(a.distortion), to_db(b.distortion)));
                }
            }
            (a, b) => {
                pass = false;
                detail.push(format!(
                    "a={alpha}: 8-PSK {} / CE {}",
                    a.map_or("no RS solution".into(), |s| format!("{:.3} dB", to_db(s.distortion))),
                    b.map_or("no RS solution".into(), |s| format!("{:.3} dB", to_db(s.distortion)))
                ));
            }
        }
    }
    Outcome { pass, detail: detail.join("; ") }
}

// ---------------------------------------------------------------------------------------------

const C8_KS: f64 = 0.05;

fn criterion_8() -> Outcome {
    let ens = ChannelEnsemble::<f64>::iid(100, 100).unwrap();
    let mut worst = 0.0f64;
    for seed in 1..=5u64 {
        let hs: Vec<CMatrix<f64>> =
            (0..32).map(|j| sample_channel_with(&ens, &mut trial_rng(seed, j)).unwrap()).collect();
        let ofdm = ofdm_equivalent_channel(&hs).unwrap();
        let t = ofdm_gram_eigenvalues(&ofdm).unwrap();
        let single = hermitian_eigenvalues(&hs[0].adjoint().mul(&hs[0]).unwrap()).unwrap();
        worst = worst.max(eigen_cdf_compare(&t, &single).unwrap());
    }
    Outcome { pass: worst <= C8_KS, detail: format!("largest KS distance over 5 seeds {worst:.4}") }
}

// ---------------------------------------------------------------------------------------------

fn criterion_9() -> Outcome {
    let mut failures: Vec<String> = Vec::new();
    let mut check = |ok: bool, what: String| {
        if !ok {
            failures.push(what);
        }
    };

    // feasibility and monotone descent of the solvers
    for seed in 0..20u64 {
        let mut rng = trial_rng(900, seed);
        let ens = ChannelEnsemble::<f64>::iid(6, 10).unwrap();
        let h = sample_channel_with(&ens, &mut rng).unwrap();
        let u = sample_symbols(6, 1.0, &mut rng);
        let p = params(1.0, 0.05);
        let opts = SolverOptions { seed, ..SolverOptions::default() };
        for (set, res) in [
            (ConstraintSet::Disk { power: 0.3 }, lse_disk(&h, &u, &p, 0.3, &opts)),
            (ConstraintSet::Circle { power: 0.3 }, lse_circle(&h, &u, &p, 0.3, &opts)),
            (ConstraintSet::Mpsk { order: 4, power: 0.3 }, lse_mpsk(&h, &u, &p, 4, 0.3, &opts)),
        ] {
            let r = res.unwrap();
            check(r.v.iter().all(|&x| set.contains(x, 1e-9)), format!("infeasible {set:?} seed {seed}"));
            check(r.trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-12), format!("ascent {set:?} seed {seed}"));
        }
    }

    // brute-force dominance: 1000 BPSK instances with N <= 12
    for inst in 0..1000u64 {
        let mut rng = trial_rng(901, inst);
        let n = 2 + (inst % 11) as usize;
        let k = 1 + (inst % n as u64) as usize;
        let ens = ChannelEnsemble::<f64>::iid(k, n).unwrap();
        let h = sample_channel_with(&ens, &mut rng).unwrap();
        let u = sample_symbols(k, 1.0, &mut rng);
        let p = params(1.0, 0.0);
        let bf = lse_bruteforce(&h, &u, &p, 2, 1.0, 1 << 20).unwrap();
        let cd = lse_mpsk(&h, &u, &p, 2, 1.0, &SolverOptions { restarts: 2, seed: inst, ..SolverOptions::default() }).unwrap();
        let obj = objective(&h, &u, &p, &bf.v).unwrap();
        check(bf.objective <= cd.objective + 1e-9 * (1.0 + cd.objective), format!("brute force beaten, instance {inst}"));
        check((obj - bf.objective).abs() <= 1e-9 * (1.0 + obj), format!("brute-force objective, instance {inst}"));
    }

    // quadrature moments
    let q = QuadratureRule::<f64>::default();
    check((q.expect(|_| 1.0) - 1.0).abs() < 1e-12, "mass".into());
    check((q.expect(|z| z.norm_sqr()) - 1.0).abs() < 1e-10, "second moment".into());
    check((q.expect(|z| z.norm_sqr().powi(2)) - 2.0).abs() < 1e-8, "fourth moment".into());
    check(q.expect(|z| (z * z).re).abs() < 1e-8 && q.expect(|z| z.re.powi(3)).abs() < 1e-8, "odd moments".into());

    // fixed-point residuals and cross-solver agreement
    for (alpha, power, lam) in [(1.0, 0.5, 0.01), (2.0, 1.0, 0.1), (4.0, 2.0, 0.01)] {
        let p = params(1.0, lam);
        let gen = rs_solve(&ConstraintSet::Disk { power }, &iid(alpha), &p, &RsOptions::default()).unwrap();
        let closed = rs_peak_power(&iid(alpha), &p, power, 1e-13, 200_000).unwrap();
        check(gen.residual < 1e-8 && closed.residual < 1e-8, format!("residual at a={alpha}"));
        check(
            (gen.q - closed.q).abs() < 1e-6 && (gen.chi - closed.chi).abs() < 1e-6 * closed.chi.max(1.0),
            format!("disk RS vs closed form at a={alpha}"),
        );
    }

    // p1 = 0 reduction and stored 1-RSB identities
    let p = params(1.0, 1e-6);
    let rs = rs_psk(2, &iid(2.0), &p).unwrap();
    for mu in [0.2, 1.0, 5.0] {
        let sol = RsbSolution { mu1: mu, ..RsbSolution::from_rs(&rs, 2.0) };
        check((rsb1_distortion(&sol, &iid(2.0), &p).unwrap() - rs.distortion).abs() < 1e-6, format!("p1=0 reduction mu={mu}"));
    }
    let report = rsb1_solve_all(&BPSK, &iid(3.0), &p, &RsbOptions::default()).unwrap();
    for r in &report.roots {
        check(r.eta1 == r.chi1 + r.mu1 * r.p1, "eta1 identity".into());
        check((r.e1 - (1.0 / (3.0 * (1.0 + r.chi1)) + 1e-6)).abs() < 1e-9, "e1 identity".into());
        check(r.residual < 1e-8, "1-RSB residual".into());
    }

    let pass = failures.is_empty();
    let detail = if pass {
        "feasibility, descent, 1000 brute-force instances, quadrature, residuals, 1-RSB identities".into()
    } else {
        failures.join("; ")
    };
    Outcome { pass, detail }
}

// ---------------------------------------------------------------------------------------------

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 12] = [
        ("1", criterion_1, Duration::from_secs(1)),
        ("2", criterion_2, Duration::from_secs(60)),
        ("3a", criterion_3a, Duration::from_secs(600)),
        ("3b", criterion_3b, Duration::from_secs(600)),
        ("4", criterion_4, Duration::from_secs(60)),
        ("5", criterion_5, Duration::from_secs(300)),
        ("6a", criterion_6a, Duration::from_secs(900)),
        ("6b", criterion_6b, Duration::from_secs(900)),
        ("6c", criterion_6c, Duration::from_secs(900)),
        ("7", criterion_7, Duration::from_secs(1)),
        ("8", criterion_8, Duration::from_secs(60)),
        ("9", criterion_9, Duration::from_secs(600)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == name) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let pass = out.pass && took <= budget;
        println!(
            "criterion {name}: {} ({:.1}s{}) {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            if took > budget { ", over budget" } else { "" },
            out.detail
        );
        if !pass {
            failed.push(name);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
