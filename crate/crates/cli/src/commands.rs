use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use psido_core::calculus::{m_ellipticity, parametrix, parametrix_residual, ResidualSide, DEFAULT_R_GRID};
use psido_core::diagnostics::{
    compactness_verdict, garding_constants, garding_lattice, sharp_garding_constant, CompactnessThresholds,
    CompactnessVerdict,
};
use psido_core::fourier::GridFunction;
use psido_core::solver::{lambda0_estimate, smooth_random_rhs, solve, SolveMethod, SolveOptions};
use psido_core::symbols::{check_m_membership, Side, Verdict};
use serde_json::{json, Value};

use crate::config::{self, Options};
use crate::error::CliError;
use crate::expr::Expr;

/// Report and exit code of one run.
pub struct Outcome {
    pub report: Value,
    pub code: u8,
}

/// Residuals below this count as exact.
const EXACT_RESIDUAL: f64 = 1e-12;

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn classify(o: &Options) -> Result<Outcome, CliError> {
    let s = config::symbol(o)?;
    let windows = o.windows.clone().unwrap_or_else(|| vec![32, 64, 128]);
    let m = o.resolution.unwrap_or(16);
    let rep = check_m_membership(&s, o.alpha_max.unwrap_or(2), o.beta_max.unwrap_or(1), &windows, m)?;
    let consistent = rep.verdict == Verdict::Consistent;
    Ok(Outcome {
        code: if consistent { 0 } else { 2 },
        report: json!({
            "symbol": o.symbol,
            "order": s.order(),
            "rho": s.rho(),
            "verdict": rep.verdict,
            "s_class": rep.symbol.verdict,
            "k_difference": rep.k_difference.verdict,
            "offenses": rep.symbol.offenses.iter().chain(&rep.k_difference.offenses).collect::<Vec<_>>(),
            "seminorms": rep.symbol.tables,
        }),
    })
}

pub fn parametrix_cmd(o: &Options) -> Result<Outcome, CliError> {
    let s = config::symbol(o)?;
    if s.side() != Side::Torus {
        return Err(CliError::Config("parametrix needs a torus symbol".into()));
    }
    let n = o.n.unwrap_or(64);
    let lengths = o.length.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let band = match o.band.as_deref() {
        None => (8, 24),
        Some([lo, hi]) if lo <= hi => (*lo, *hi),
        Some(_) => return Err(CliError::Config("field `band`: expected `lo,hi`".into())),
    };
    let ell = m_ellipticity(&s, 64, &DEFAULT_R_GRID);
    if !ell.is_elliptic {
        return Err(CliError::Hypothesis("symbol is not M-elliptic".into()));
    }
    let mut profiles = Vec::new();
    for &l in &lengths {
        let p = parametrix(&s, l, ell.r)?;
        let prof = parametrix_residual(&s, &p.symbol, n)?;
        if let Some(path) = &o.csv {
            let path = if lengths.len() == 1 { path.clone() } else { suffixed(path, &format!("L{l}")) };
            prof.write_csv(create(&path)?)?;
        }
        let beyond = (2 * ell.r + 1)..=prof.interior;
        let max_beyond = prof
            .max_in(beyond.clone(), ResidualSide::Left)
            .max(prof.max_in(beyond, ResidualSide::Right));
        let exact = max_beyond <= EXACT_RESIDUAL;
        let range = band.0..=band.1.min(prof.interior);
        profiles.push(json!({
            "length": l,
            "interior": prof.interior,
            "status": if exact { "exact beyond cutoff" } else { "decaying" },
            "slope_left": if exact { None } else { prof.decay_slope(range.clone(), ResidualSide::Left) },
            "slope_right": if exact { None } else { prof.decay_slope(range.clone(), ResidualSide::Right) },
            "max_left": prof.max_in(range.clone(), ResidualSide::Left),
            "max_right": prof.max_in(range, ResidualSide::Right),
        }));
    }
    Ok(Outcome {
        code: 0,
        report: json!({
            "threshold": ell.r,
            "ellipticity_constant": ell.c,
            "n": n,
            "band": [band.0, band.1],
            "profiles": profiles,
        }),
    })
}

pub fn compactness(o: &Options) -> Result<Outcome, CliError> {
    let s = config::symbol(o)?;
    let mut th = CompactnessThresholds::default();
    if let Some(k0) = o.k0 {
        th.k0 = k0;
    }
    if let Some(ns) = &o.ns {
        th.ns = ns.clone();
    }
    let rep = compactness_verdict(&s, &th)?;
    let code = match rep.verdict {
        CompactnessVerdict::Compact => 0,
        CompactnessVerdict::NotCompact => 2,
        CompactnessVerdict::Inconclusive => 3,
    };
    Ok(Outcome {
        code,
        report: serde_json::to_value(&rep).expect("serializable"),
    })
}

pub fn garding(o: &Options) -> Result<Outcome, CliError> {
    let s = config::symbol(o)?;
    let ns = o.ns.clone().unwrap_or_else(|| vec![16, 32, 64]);
    let report = if o.sharp.unwrap_or(false) {
        serde_json::to_value(sharp_garding_constant(&s, &ns)?)
    } else {
        let m = o.garding_m.unwrap_or(s.order() / 2.0);
        match s.side() {
            Side::Torus => serde_json::to_value(garding_constants(&s, m, &ns)?),
            Side::Lattice => serde_json::to_value(garding_lattice(
                &s,
                m,
                &ns,
                o.samples.unwrap_or(500),
                o.seed.unwrap_or(0),
            )?),
        }
    };
    Ok(Outcome {
        code: 0,
        report: report.expect("serializable"),
    })
}

fn rhs(o: &Options, n: usize, m: usize) -> Result<GridFunction, CliError> {
    match o.rhs.as_deref().unwrap_or("random") {
        "random" => Ok(smooth_random_rhs(o.seed.unwrap_or(0), n, m)?),
        spec => {
            let e = Expr::parse(spec, "k").map_err(|e| CliError::Config(format!("field `rhs`: {e}")))?;
            let w = config::weight(o)?;
            Ok(GridFunction::from_fn(m, |x| e.eval(x, 0, &w)))
        }
    }
}

pub fn solve_cmd(o: &Options) -> Result<Outcome, CliError> {
    let s = config::symbol(o)?;
    if s.side() != Side::Torus {
        return Err(CliError::Config("solve needs a torus symbol".into()));
    }
    let n = o.n.unwrap_or(64);
    let m = o.resolution.unwrap_or(4 * n);
    let f = rhs(o, n, m)?;
    let lambda = match o.lambda.as_deref().unwrap_or("auto") {
        "auto" => lambda0_estimate(&s, s.order() / 2.0, n)?,
        v => v
            .parse()
            .map_err(|_| CliError::Config(format!("field `lambda`: expected `auto` or a number, got `{v}`")))?,
    };
    let method = match o.method.as_deref().unwrap_or("direct") {
        "direct" => SolveMethod::Direct,
        "gmres" => SolveMethod::Gmres,
        "preconditioned" => SolveMethod::PreconditionedGmres,
        other => return Err(CliError::Config(format!("field `method`: unknown method `{other}`"))),
    };
    let defaults = SolveOptions::default();
    let opts = SolveOptions {
        tol: o.tol.unwrap_or(defaults.tol),
        method,
        parametrix_length: o.length.as_ref().and_then(|l| l.first().copied()).unwrap_or(2),
        max_iter: o.max_iter.unwrap_or(defaults.max_iter),
        restart: defaults.restart,
        allow_below_lambda0: o.allow_below_lambda0.unwrap_or(false),
    };
    let r = solve(&s, lambda, &f, n, &opts)?;
    if let Some(path) = &o.csv {
        r.u.write_csv(create(path)?)?;
    }
    let mut report = serde_json::to_value(&r).expect("serializable");
    report["n"] = json!(n);
    report["resolution"] = json!(m);
    Ok(Outcome {
        code: if r.converged { 0 } else { 3 },
        report,
    })
}
