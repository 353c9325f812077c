//! Solvers against independent oracles.

use lse_core::linalg::{cholesky_solve, CMatrix};
use lse_core::model::{sample_channel_with, sample_symbols, trial_rng, ChannelEnsemble, ConstraintSet, SystemParams};
use lse_core::precoders::{
    lse_bruteforce, lse_circle, lse_disk, lse_mpsk, objective, rzf_precode, Precoder, SolverOptions,
    DEFAULT_ENUMERATION_LIMIT,
};
use lse_core::LseError;
use num_complex::Complex;

type C = Complex<f64>;

fn draw(k: usize, n: usize, seed: u64) -> (CMatrix<f64>, Vec<C>) {
    let mut rng = trial_rng(seed, 0);
    let h = sample_channel_with(&ChannelEnsemble::iid(k, n).unwrap(), &mut rng).unwrap();
    let u = sample_symbols(k, 1.0, &mut rng);
    (h, u)
}

/// Exact cyclic coordinate minimisation of the convex disk problem, run to stagnation.
fn disk_oracle(h: &CMatrix<f64>, u: &[C], p: &SystemParams<f64>, power: f64) -> Vec<C> {
    let n = h.cols();
    let cols = h.columns();
    let set = ConstraintSet::Disk { power };
    let mut v = vec![C::new(0.0, 0.0); n];
    let target: Vec<C> = u.iter().map(|x| x * p.gamma.sqrt()).collect();
    for _ in 0..200_000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let hv = h.mul_vec(&v);
            let r: Vec<C> = target.iter().zip(&hv).map(|(t, a)| t - a).collect();
            let c0: f64 = cols[i].iter().map(|x| x.norm_sqr()).sum();
            let z = v[i] * c0 + cols[i].iter().zip(&r).map(|(a, b)| a.conj() * b).sum::<C>();
            let x = set.scalar_min(z, c0 + p.lambda);
            moved = moved.max((x - v[i]).norm());
            v[i] = x;
        }
        if moved < 1e-14 {
            break;
        }
    }
    v
}

#[test]
fn disk_matches_coordinate_oracle() {
    for seed in 0..5 {
        let (h, u) = draw(8, 16, seed);
        let p = SystemParams::new(1.0, 0.05);
        let got = lse_disk(&h, &u, &p, 0.2, &SolverOptions::default()).unwrap();
        let want = disk_oracle(&h, &u, &p, 0.2);
        let fo = objective(&h, &u, &p, &want).unwrap();
        assert!((got.objective - fo).abs() <= 1e-8 * fo, "{} vs {fo}", got.objective);
        assert!(got.converged);
    }
}

#[test]
fn rzf_matches_normal_equations() {
    // v = (H^H H + lambda I)^-1 H^H sqrt(gamma) u
    let (h, u) = draw(5, 9, 11);
    let p = SystemParams::new(2.0, 0.3);
    let got = rzf_precode(&h, &u, &p).unwrap();
    let mut a = h.adjoint().mul(&h).unwrap();
    for i in 0..9 {
        a.set(i, i, a.get(i, i) + 0.3);
    }
    let rhs: Vec<C> = h.adj_mul_vec(&u).iter().map(|x| x * 2f64.sqrt()).collect();
    let want = cholesky_solve(&a, &rhs).unwrap();
    for (x, y) in got.v.iter().zip(&want) {
        assert!((x - y).norm() < 1e-10);
    }
}

#[test]
fn large_disk_is_rzf() {
    let (h, u) = draw(6, 12, 3);
    let p = SystemParams::new(1.0, 0.1);
    let rzf = rzf_precode(&h, &u, &p).unwrap();
    let disk = lse_disk(&h, &u, &p, 1e6, &SolverOptions::default()).unwrap();
    assert!((rzf.objective - disk.objective).abs() < 1e-9 * rzf.objective);
}

#[test]
fn circle_beats_phase_grid() {
    // N = 3: every phase triple on a 48-point grid, refined locally, is no better than the solver
    let (h, u) = draw(2, 3, 5);
    let p = SystemParams::new(1.0, 0.0);
    let got = lse_circle(&h, &u, &p, 1.0, &SolverOptions::default()).unwrap();
    let steps = 48;
    let mut best = f64::INFINITY;
    for a in 0..steps {
        for b in 0..steps {
            for c in 0..steps {
                let ph = |k: usize| C::from_polar(1.0, std::f64::consts::TAU * k as f64 / steps as f64);
                best = best.min(objective(&h, &u, &p, &[ph(a), ph(b), ph(c)]).unwrap());
            }
        }
    }
    assert!(got.objective <= best + 1e-12, "{} vs grid {best}", got.objective);
    // and the grid is fine enough to be close to it
    assert!(best - got.objective < 0.05 * (1.0 + best));
}

#[test]
fn mpsk_is_one_opt_and_near_brute_force() {
    let mut hits = 0;
    for seed in 0..30 {
        let (h, u) = draw(4, 10, 100 + seed);
        let p = SystemParams::new(1.0, 0.0);
        let set = ConstraintSet::Mpsk { order: 2, power: 1.0 };
        let cd = lse_mpsk(&h, &u, &p, 2, 1.0, &SolverOptions::psk()).unwrap();
        let bf = lse_bruteforce(&h, &u, &p, 2, 1.0, DEFAULT_ENUMERATION_LIMIT).unwrap();
        assert!(bf.objective <= cd.objective + 1e-12);
        if cd.objective - bf.objective < 1e-12 {
            hits += 1;
        }
        // no single flip improves
        for i in 0..10 {
            for x in set.points() {
                let mut w = cd.v.clone();
                w[i] = x;
                assert!(objective(&h, &u, &p, &w).unwrap() >= cd.objective - 1e-12);
            }
        }
    }
    // the multi-start search finds the optimum on small instances nearly always
    assert!(hits >= 27, "{hits}/30");
}

#[test]
fn precoder_dispatch() {
    let (h, u) = draw(3, 5, 8);
    let p = SystemParams::new(1.0, 0.1);
    let direct = lse_mpsk(&h, &u, &p, 4, 1.0, &SolverOptions::psk()).unwrap();
    let via = Precoder::lse(ConstraintSet::Mpsk { order: 4, power: 1.0 }).solve(&h, &u, &p).unwrap();
    assert_eq!(direct, via);
    let bf = Precoder::BruteForce { order: 4, power: 1.0, limit: 10 }.solve(&h, &u, &p);
    assert!(matches!(bf, Err(LseError::TooLarge { .. })));
}
