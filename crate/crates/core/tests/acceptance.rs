//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psido_core::builtin::{broken_builtins, lattice_builtins, torus_builtins};
use psido_core::calculus::{
    column_residual_slope, column_residuals, compose, formal_adjoint, max_column_residual,
    parametrix_auto, parametrix_residual, ResidualSide,
};
use psido_core::diagnostics::{
    compactness_verdict, garding_constants, garding_lattice, gohberg_d, random_coefficients,
    sharp_garding_constant, weighted_l2_lattice_norm, CompactnessThresholds, CompactnessVerdict,
};
use psido_core::fourier::{forward_transform, inverse_transform, l2_norm, lattice_fourier, CoeffVector, GridFunction};
use psido_core::oracle::{diagonal_gohberg_oracle, quantization_oracle};
use psido_core::quantization::{adjoint_matrix, apply, duality_identity_check, duality_transfer, matrix};
use psido_core::solver::{lambda0_estimate, solve, SolveMethod, SolveOptions};
use psido_core::symbols::{check_m_membership, check_s_membership, Symbol, SymbolClass, Verdict};
use psido_core::weights::WeightFunction;

const ORACLE_TOL: f64 = 1e-10;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const PLANCHEREL_TOL: f64 = 1e-12;
const DUALITY_TOL: f64 = 1e-10;
const SLOPE_SLACK: f64 = 0.2;
const D_MARGIN: f64 = 0.01;
const STABILITY: f64 = 0.1;
const LATTICE_AGREEMENT: f64 = 1e-6;
const SPOT_RELATIVE: f64 = 1e-8;
const DIAGONAL_RESIDUAL: f64 = 1e-12;
const SOLVE_RESIDUAL: f64 = 1e-8;
const GALERKIN_TOL: f64 = 1e-7;
const SUITE_BUDGET: Duration = Duration::from_secs(600);

type Outcome = Result<String, String>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn jap(order: f64) -> SymbolClass {
    SymbolClass::new(order, 1.0, WeightFunction::japanese())
}

fn bracket(order: f64) -> Symbol {
    let w = WeightFunction::japanese();
    Symbol::multiplier(jap(order), move |k| c(w.pow(k, order))).unwrap()
}

fn modulated(order: f64, a: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Symbol {
    let w = WeightFunction::japanese();
    Symbol::torus(jap(order), move |x, k| a(x) * w.pow(k, order)).unwrap()
}

fn sin_bracket(order: f64) -> Symbol {
    modulated(order, |x| c(2.0 + x.sin()))
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn smooth_f(seed: u64, n: usize, m: usize) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = CoeffVector::from_fn(n, |k| {
        let damp = (-((k * k) as f64) / 32.0).exp();
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * damp
    });
    inverse_transform(&coeffs, m).unwrap()
}

fn random_symbol(rng: &mut ChaCha8Rng) -> Symbol {
    let order = [-1.0, 0.0, 0.5, 1.0, 2.0][rng.random_range(0..5)];
    let modes: Vec<Complex64> = (0..7)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let phase = rng.random_range(0.0..0.2);
    let w = WeightFunction::japanese();
    Symbol::torus(jap(order), move |x, k| {
        let a: Complex64 = modes
            .iter()
            .enumerate()
            .map(|(j, m)| m * Complex64::from_polar(1.0, (j as f64 - 3.0) * x))
            .sum();
        a * w.pow(k, order) * Complex64::from_polar(1.0, phase * (k as f64 / 8.0).sin())
    })
    .unwrap()
}

fn criterion_1() -> Outcome {
    let (n, m) = (32, 128);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let s = random_symbol(&mut rng);
        let f = GridFunction::new(
            (0..m)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        let fast = apply(&s, &f, n).map_err(|e| e.to_string())?;
        let slow = quantization_oracle(&s, &f, n, m).map_err(|e| e.to_string())?;
        for (a, b) in fast.samples().iter().zip(slow.samples()) {
            worst = worst.max((a - b).norm());
        }
    }
    let elapsed = start.elapsed();
    check(
        worst < ORACLE_TOL && elapsed < ORACLE_BUDGET,
        format!("max error {worst:.2e}, runtime {:.2}s", elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut plancherel = 0.0f64;
    for n in [8usize, 16, 32] {
        let coeffs = random_coefficients(&mut rng, n);
        let g = inverse_transform(&coeffs, 4 * n + 1).unwrap();
        plancherel = plancherel.max((l2_norm(&g) - coeffs.l2_norm()).abs() / coeffs.l2_norm());
        let back = forward_transform(&g, n).unwrap();
        plancherel = plancherel.max((back.l2_norm() - coeffs.l2_norm()).abs() / coeffs.l2_norm());
        let lf = lattice_fourier(&coeffs, 4 * n + 1).unwrap();
        plancherel = plancherel.max((l2_norm(&lf) - coeffs.l2_seq_norm()).abs() / coeffs.l2_seq_norm());
    }
    let mut duality = 0.0f64;
    for b in lattice_builtins() {
        duality = duality.max(duality_identity_check(&b.symbol, 16, 64).map_err(|e| e.to_string())?);
    }
    check(
        plancherel < PLANCHEREL_TOL && duality < DUALITY_TOL,
        format!(
            "Plancherel {plancherel:.2e}, duality {duality:.2e} over {} lattice built-ins",
            lattice_builtins().len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let (s, t) = (sin_bracket(1.0), bracket(-1.0));
    let n = 32;
    let w = WeightFunction::japanese();
    // T_τ T_σ exercises every term of the expansion; T_σ T_τ is already exact at K=1.
    let literal = matrix(&s, n).unwrap().mul(&matrix(&t, n).unwrap()).unwrap();
    let lam1 = compose(&s, &t, 1).map_err(|e| e.to_string())?;
    let literal_err =
        max_column_residual(&column_residuals(&matrix(&lam1, n).unwrap(), &literal, 0..=30, &w).unwrap());
    let truth = matrix(&t, n).unwrap().mul(&matrix(&s, n).unwrap()).unwrap();
    let mut prev = f64::INFINITY;
    let mut ok = literal_err < 1e-12;
    let mut parts = vec![format!("sigma#tau exact at K=1 ({literal_err:.1e})")];
    for k in 1..=3 {
        let lam = compose(&t, &s, k).map_err(|e| e.to_string())?;
        let r = column_residuals(&matrix(&lam, n).unwrap(), &truth, 8..=30, &w).unwrap();
        let max = max_column_residual(&r);
        let slope = column_residual_slope(&r).unwrap_or(f64::NAN);
        ok &= max < prev && slope <= -(k as f64) + SLOPE_SLACK;
        parts.push(format!("K={k}: {max:.2e} slope {slope:.2}"));
        prev = max;
    }
    check(ok, parts.join(", "))
}

fn criterion_4() -> Outcome {
    let s = sin_bracket(1.0);
    let n = 32;
    let truth = adjoint_matrix(&matrix(&s, n).unwrap());
    let w = WeightFunction::japanese();
    let mut prev = f64::INFINITY;
    let mut ok = true;
    let mut parts = Vec::new();
    for k in 1..=3 {
        let adj = formal_adjoint(&s, k).map_err(|e| e.to_string())?;
        let r = column_residuals(&matrix(&adj, n).unwrap(), &truth, 8..=30, &w).unwrap();
        let max = max_column_residual(&r);
        ok &= max < prev;
        parts.push(format!("K={k}: {max:.2e}"));
        prev = max;
    }
    check(ok, parts.join(", "))
}

fn criterion_5() -> Outcome {
    let s = sin_bracket(2.0);
    let p = parametrix_auto(&s, 3).map_err(|e| e.to_string())?;
    let prof = parametrix_residual(&s, &p.symbol, 64).map_err(|e| e.to_string())?;
    let left = prof.decay_slope(8..=24, ResidualSide::Left).unwrap_or(f64::NAN);
    let right = prof.decay_slope(8..=24, ResidualSide::Right).unwrap_or(f64::NAN);
    let bound = -3.0 * s.rho() + SLOPE_SLACK;
    let mut csv = Vec::new();
    prof.write_csv(&mut csv).map_err(|e| e.to_string())?;
    check(
        left <= bound && right <= bound && !csv.is_empty(),
        format!("R={}, slopes left {left:.2} right {right:.2} (bound {bound:.1})", p.threshold),
    )
}

fn criterion_6() -> Outcome {
    let th = CompactnessThresholds::default();
    let mut parts = Vec::new();
    let mut ok = true;

    let diagonal: Vec<(&str, Symbol)> = vec![
        ("<k>^-1", bracket(-1.0)),
        ("1", bracket(0.0)),
        ("(-1)^k", Symbol::multiplier(jap(0.0), |k| c(if k % 2 == 0 { 1.0 } else { -1.0 })).unwrap()),
    ];
    for (name, s) in &diagonal {
        let exact = diagonal_gohberg_oracle(s, th.k0, 64).map_err(|e| e.to_string())?;
        let est = gohberg_d(s, th.k0, 64).map_err(|e| e.to_string())?;
        let sv = matrix(s, 64).unwrap().singular_values();
        let sv_err = sv
            .iter()
            .zip(&exact.singular_values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let good = est.d_estimate == exact.d && sv_err < 1e-12;
        ok &= good;
        if !good {
            parts.push(format!("diagonal {name}: d {} vs {}, sv {sv_err:.1e}", est.d_estimate, exact.d));
        }
    }
    parts.push(format!("{} diagonal symbols certified", diagonal.len()));

    for (name, s) in [("(2+cos x)<k>^-1", modulated(-1.0, |x| c(2.0 + x.cos())))] {
        let r = compactness_verdict(&s, &th).map_err(|e| e.to_string())?;
        ok &= r.verdict == CompactnessVerdict::Compact && r.counts_stabilize;
        parts.push(format!("{name}: {:?}", r.verdict));
    }
    for (name, s) in [
        ("1", bracket(0.0)),
        ("e^{ix}", modulated(0.0, |x| Complex64::from_polar(1.0, x))),
    ] {
        let r = compactness_verdict(&s, &th).map_err(|e| e.to_string())?;
        let d = r.gohberg.d_4k0;
        let counts_ok = th.ns.iter().all(|&n| {
            let sv = matrix(&s, n).unwrap().singular_values();
            sv.iter().filter(|v| **v > d - D_MARGIN).count() + 4 >= 2 * n + 1
        });
        ok &= r.verdict == CompactnessVerdict::NotCompact && counts_ok;
        parts.push(format!("{name}: {:?} (d={d:.3})", r.verdict));
    }
    check(ok, parts.join(", "))
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    let exact = garding_constants(&bracket(2.0), 1.0, &[16, 32, 64]).map_err(|e| e.to_string())?;
    let mut ok = exact.c0 == 1.0 && exact.c1 == 0.0;
    parts.push(format!("<k>^2: ({}, {})", exact.c0, exact.c1));

    let s = sin_bracket(2.0);
    let r = garding_constants(&s, 1.0, &[16, 32, 64]).map_err(|e| e.to_string())?;
    let c0s: Vec<f64> = r.trajectory.iter().map(|t| t.c0_n).collect();
    let hi = c0s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = c0s.iter().copied().fold(f64::INFINITY, f64::min);
    ok &= r.c0 >= 0.5 && (hi - lo) <= STABILITY * hi;
    parts.push(format!("(2+sin x)<k>^2: C0={:.4} C1={:.4}", r.c0, r.c1));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let w = WeightFunction::japanese();
    let mut violations = 0;
    let mats: Vec<_> = [16usize, 32, 64].iter().map(|&n| matrix(&s, n).unwrap()).collect();
    for i in 0..500 {
        let a = &mats[i % 3];
        let f = random_coefficients(&mut rng, a.radius());
        let margin = r.margin(a, &f, &w).map_err(|e| e.to_string())?;
        if margin < -SPOT_RELATIVE * weighted_l2_lattice_norm(&f, 1.0, &w).powi(2) {
            violations += 1;
        }
    }
    ok &= violations == 0;

    let mut lattice_gap = 0.0f64;
    let mut lattice_violations = 0;
    for b in lattice_builtins().into_iter().filter(|b| b.symbol.order() == 2.0) {
        let lat = garding_lattice(&b.symbol, 1.0, &[16, 32, 64], 500, 11).map_err(|e| e.to_string())?;
        let tor = garding_constants(&duality_transfer(&b.symbol).unwrap(), 1.0, &[16, 32, 64])
            .map_err(|e| e.to_string())?;
        lattice_gap = lattice_gap
            .max((lat.constants.c0 - tor.c0).abs())
            .max((lat.constants.c1 - tor.c1).abs());
        lattice_violations += lat.spot_check.violations;
    }
    ok &= lattice_gap < LATTICE_AGREEMENT && lattice_violations == 0;
    parts.push(format!(
        "lattice vs torus {lattice_gap:.1e}, spot-check violations {violations}+{lattice_violations}"
    ));
    check(ok, parts.join(", "))
}

fn criterion_8() -> Outcome {
    let s = modulated(1.0, |x| c(1.0 + x.sin()));
    let r = sharp_garding_constant(&s, &[16, 32, 64]).map_err(|e| e.to_string())?;
    let cs: Vec<f64> = r.trajectory.iter().map(|(_, c)| *c).collect();
    let bounded = cs.iter().all(|c| c.is_finite()) && cs[2] <= cs[1] * (1.0 + STABILITY) + 1e-9;
    check(bounded, format!("C trajectory {cs:.4?}"))
}

fn criterion_9() -> Outcome {
    let mut parts = Vec::new();
    let f = smooth_f(9, 64, 256);
    let diag = solve(&bracket(2.0), 0.0, &f, 64, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let mut ok = diag.residual < DIAGONAL_RESIDUAL;
    parts.push(format!("diagonal {:.1e}", diag.residual));

    let s = sin_bracket(2.0);
    let lambda = lambda0_estimate(&s, 1.0, 64).map_err(|e| e.to_string())?;
    let direct = solve(&s, lambda, &f, 64, &SolveOptions::default()).map_err(|e| e.to_string())?;
    ok &= direct.residual < SOLVE_RESIDUAL;
    parts.push(format!("lambda0={lambda:.4}, residual {:.1e}", direct.residual));

    let mut opts = SolveOptions {
        method: SolveMethod::Gmres,
        ..SolveOptions::default()
    };
    let plain = solve(&s, lambda, &f, 64, &opts).map_err(|e| e.to_string())?;
    opts.method = SolveMethod::PreconditionedGmres;
    let pre = solve(&s, lambda, &f, 64, &opts).map_err(|e| e.to_string())?;
    ok &= plain.converged && pre.converged && pre.iterations < plain.iterations;
    ok &= pre.residual < SOLVE_RESIDUAL;
    parts.push(format!("iterations {} vs {}", pre.iterations, plain.iterations));

    let coarse = solve(&s, lambda, &f, 32, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let gap = (-32i64..=32)
        .map(|k| (coarse.coefficients.get(k) - direct.coefficients.get(k)).norm())
        .fold(0.0, f64::max);
    ok &= gap < GALERKIN_TOL;
    parts.push(format!("N=32 vs N=64 {gap:.1e}"));
    check(ok, parts.join(", "))
}

fn criterion_10() -> Outcome {
    let windows = [32, 64, 128];
    let mut ok = true;
    let mut parts = Vec::new();
    let all: Vec<_> = torus_builtins().into_iter().chain(lattice_builtins()).collect();
    for b in &all {
        let mr = check_m_membership(&b.symbol, 2, 1, &windows, 16).map_err(|e| e.to_string())?;
        let base = if b.symbol.side() == psido_core::symbols::Side::Lattice {
            b.symbol.dual()
        } else {
            b.symbol.clone()
        };
        let sr = check_s_membership(&base, 2, 1, &windows, 16).map_err(|e| e.to_string())?;
        if mr.verdict != Verdict::Consistent || sr.verdict != Verdict::Consistent {
            ok = false;
            parts.push(format!("{}: M {:?} S {:?}", b.name, mr.verdict, sr.verdict));
        }
    }
    parts.push(format!("{} built-ins in M and S", all.len()));
    for b in broken_builtins() {
        let mr = check_m_membership(&b.symbol, 2, 1, &windows, 16).map_err(|e| e.to_string())?;
        let sr = check_s_membership(&b.symbol, 2, 1, &windows, 16).map_err(|e| e.to_string())?;
        let expected = match b.name {
            "wrong-order" => sr.verdict == Verdict::Inconsistent && mr.verdict == Verdict::Inconsistent,
            _ => mr.verdict == Verdict::Inconsistent && mr.k_difference.verdict == Verdict::Inconsistent,
        };
        ok &= expected;
        parts.push(format!("{}: M {:?} S {:?}", b.name, mr.verdict, sr.verdict));
    }
    check(ok, parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("quantization oracle equivalence", criterion_1),
        ("Plancherel and duality", criterion_2),
        ("composition decay", criterion_3),
        ("adjoint expansion", criterion_4),
        ("parametrix residual", criterion_5),
        ("Gohberg compactness", criterion_6),
        ("Garding constants", criterion_7),
        ("sharp Garding", criterion_8),
        ("solver", criterion_9),
        ("class diagnostics", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, msg) = match run() {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!(
            "criterion {:>2} {tag} {name} [{:.1}s]: {msg}",
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    let total = start.elapsed();
    let within = total < SUITE_BUDGET;
    println!(
        "acceptance: {}/10 passed in {:.1}s{}",
        10 - failed,
        total.as_secs_f64(),
        if within { "" } else { " (over time budget)" }
    );
    if failed == 0 && within {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
