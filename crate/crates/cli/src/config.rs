//! Run configuration: a TOML file merged with command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use psido_core::builtin;
use psido_core::symbols::{Side, Symbol, SymbolClass};
use psido_core::weights::WeightFunction;
use serde::Deserialize;

use crate::error::CliError;
use crate::expr::Expr;

/// Options shared by every subcommand. Each may also be set in the config file
/// under the same name (with `-` replaced by `_`); flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Config files only: the subcommand the file is meant for.
    #[arg(skip)]
    pub subcommand: Option<String>,
    /// Symbol: an expression in `x` and `k` (or `n` on the lattice side), or a built-in name.
    #[arg(long)]
    pub symbol: Option<String>,
    /// `torus` or `lattice`.
    #[arg(long)]
    pub side: Option<String>,
    /// Declared order `m`.
    #[arg(long, allow_hyphen_values = true)]
    pub order: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// `japanese`, `constant` or `power:<p>`.
    #[arg(long)]
    pub weight: Option<String>,
    /// Truncation radius `N`.
    #[arg(short = 'n', long)]
    pub n: Option<usize>,
    /// Grid resolution `M`.
    #[arg(short = 'm', long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub k0: Option<i64>,
    /// Parametrix lengths `L`.
    #[arg(long, value_delimiter = ',')]
    pub length: Option<Vec<usize>>,
    /// `auto` or a number.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub windows: Option<Vec<i64>>,
    #[arg(long)]
    pub alpha_max: Option<u32>,
    #[arg(long)]
    pub beta_max: Option<u32>,
    /// Gårding index `m` (defaults to half the order).
    #[arg(long)]
    pub garding_m: Option<f64>,
    /// Extract the sharp constant instead of `(C₀, C₁)`.
    #[arg(long)]
    pub sharp: Option<bool>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// `direct`, `gmres` or `preconditioned`.
    #[arg(long)]
    pub method: Option<String>,
    /// Right-hand side: `random` or an expression in `x`.
    #[arg(long)]
    pub rhs: Option<String>,
    #[arg(long)]
    pub allow_below_lambda0: Option<bool>,
    /// Frequency band `lo,hi` for slope fits.
    #[arg(long, value_delimiter = ',')]
    pub band: Option<Vec<i64>>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write CSV output here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl Options {
    /// `self` with every field set in `flags` replaced.
    pub fn overlay(mut self, flags: Options) -> Options {
        overlay!(
            self, flags, symbol, side, order, rho, weight, n, resolution, k0, length, lambda, tol, seed, ns,
            windows, alpha_max, beta_max, garding_m, sharp, samples, method, rhs, allow_below_lambda0, band,
            max_iter, json, csv
        );
        self
    }
}

/// Reads a config file; `subcommand`, if present, must match `expected`.
pub fn load(path: &Path, expected: &str) -> Result<Options, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let file: Options =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(sub) = &file.subcommand {
        if sub != expected {
            return Err(CliError::Config(format!(
                "{}: field `subcommand`: file is for `{sub}`, invoked as `{expected}`",
                path.display()
            )));
        }
    }
    Ok(file)
}

pub fn weight(opts: &Options) -> Result<WeightFunction, CliError> {
    let spec = opts.weight.as_deref().unwrap_or("japanese");
    let w = match spec.split_once(':') {
        None if spec == "japanese" => WeightFunction::japanese(),
        None if spec == "constant" => WeightFunction::constant(),
        Some(("power", p)) => {
            let p: u32 = p
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("field `weight`: bad exponent in `{spec}`")))?;
            WeightFunction::power(p).map_err(|e| CliError::Config(format!("field `weight`: {e}")))?
        }
        _ => return Err(CliError::Config(format!("field `weight`: unknown weight `{spec}`"))),
    };
    Ok(w)
}

fn side(opts: &Options) -> Result<Side, CliError> {
    match opts.side.as_deref().unwrap_or("torus") {
        "torus" => Ok(Side::Torus),
        "lattice" => Ok(Side::Lattice),
        other => Err(CliError::Config(format!("field `side`: expected torus or lattice, got `{other}`"))),
    }
}

fn is_builtin_name(spec: &str) -> bool {
    let name = spec.split_once(':').map_or(spec, |(n, _)| n).trim();
    name == "japanese"
        || builtin::torus_builtins()
            .iter()
            .chain(&builtin::lattice_builtins())
            .chain(&builtin::broken_builtins())
            .any(|b| b.name == name)
}

/// Builds the symbol described by `symbol`, `side`, `order`, `rho` and `weight`.
/// Built-ins carry their own weight; `order` still overrides theirs.
pub fn symbol(opts: &Options) -> Result<Symbol, CliError> {
    let spec = opts
        .symbol
        .as_deref()
        .ok_or_else(|| CliError::Config("field `symbol` is required".into()))?;
    let w = weight(opts)?;
    if is_builtin_name(spec) {
        let s = builtin::lookup(spec).map_err(|e| CliError::Config(format!("field `symbol`: {e}")))?;
        return Ok(match opts.order {
            Some(m) => s.with_order(m),
            None => s,
        });
    }
    let order = opts
        .order
        .ok_or_else(|| CliError::Config("field `order` is required for expression symbols".into()))?;
    let rho = opts.rho.unwrap_or_else(|| if w.mu() > 0.0 { 1.0 / w.mu() } else { 1.0 });
    let class = SymbolClass::new(order, rho, w.clone());
    let sym = match side(opts)? {
        Side::Torus => {
            let e = Expr::parse(spec, "k").map_err(|e| CliError::Config(format!("field `symbol`: {e}")))?;
            if e.depends_on_x() {
                Symbol::torus(class, move |x, k| e.eval(x, k, &w))
            } else {
                Symbol::multiplier(class, move |k| e.eval(0.0, k, &w))
            }
        }
        Side::Lattice => {
            let e = Expr::parse(spec, "n").map_err(|e| CliError::Config(format!("field `symbol`: {e}")))?;
            Symbol::lattice(class, move |n, x| e.eval(x, n, &w))
        }
    };
    sym.map_err(|e| CliError::Config(format!("symbol class: {e}")))
}
