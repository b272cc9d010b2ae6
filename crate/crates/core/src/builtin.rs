//! Named symbols shared by the test suites and the command line.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantization::bessel_potential;
use crate::symbols::{Symbol, SymbolClass};
use crate::weights::WeightFunction;

#[derive(Clone)]
pub struct Builtin {
    pub name: &'static str,
    pub description: &'static str,
    pub symbol: Symbol,
}

fn jap(order: f64) -> SymbolClass {
    SymbolClass::new(order, 1.0, WeightFunction::japanese())
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn bracket(order: f64) -> Symbol {
    let w = WeightFunction::japanese();
    Symbol::multiplier(jap(order), move |k| re(w.pow(k, order))).expect("valid class")
}

fn modulated(order: f64, a: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Symbol {
    let w = WeightFunction::japanese();
    Symbol::torus(jap(order), move |x, k| a(x) * w.pow(k, order)).expect("valid class")
}

fn lattice_modulated(order: f64, a: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Symbol {
    let w = WeightFunction::japanese();
    Symbol::lattice(jap(order), move |n, x| a(x) * w.pow(n, order)).expect("valid class")
}

/// Well-formed torus symbols, all with the weight `⟨k⟩`.
pub fn torus_builtins() -> Vec<Builtin> {
    vec![
        Builtin {
            name: "identity",
            description: "1, order 0",
            symbol: bracket(0.0),
        },
        Builtin {
            name: "laplace",
            description: "<k>^2, order 2",
            symbol: bracket(2.0),
        },
        Builtin {
            name: "bessel",
            description: "<k>^-1, order -1",
            symbol: bracket(-1.0),
        },
        Builtin {
            name: "elliptic1",
            description: "(2+sin x)<k>, order 1",
            symbol: modulated(1.0, |x| re(2.0 + x.sin())),
        },
        Builtin {
            name: "elliptic2",
            description: "(2+sin x)<k>^2, order 2",
            symbol: modulated(2.0, |x| re(2.0 + x.sin())),
        },
        Builtin {
            name: "separable",
            description: "(2+cos x)<k>^-1, order -1",
            symbol: modulated(-1.0, |x| re(2.0 + x.cos())),
        },
        Builtin {
            name: "shift",
            description: "e^{ix}, order 0",
            symbol: modulated(0.0, |x| Complex64::from_polar(1.0, x)),
        },
        Builtin {
            name: "sharp",
            description: "(1+sin x)<k>, order 1",
            symbol: modulated(1.0, |x| re(1.0 + x.sin())),
        },
        Builtin {
            name: "mixed",
            description: "exp(i sin x)<k>^1/2, order 1/2",
            symbol: modulated(0.5, |x| Complex64::from_polar(1.0, x.sin())),
        },
    ]
}

/// Well-formed lattice symbols `σ(n, x)`.
pub fn lattice_builtins() -> Vec<Builtin> {
    vec![
        Builtin {
            name: "lattice-laplace",
            description: "<n>^2(2+cos x), order 2",
            symbol: lattice_modulated(2.0, |x| re(2.0 + x.cos())),
        },
        Builtin {
            name: "lattice-shift",
            description: "e^{ix}<n>^-1, order -1",
            symbol: lattice_modulated(-1.0, |x| Complex64::from_polar(1.0, x)),
        },
        Builtin {
            name: "lattice-complex",
            description: "(1+i/2 sin x)<n>, order 1",
            symbol: lattice_modulated(1.0, |x| Complex64::new(1.0, 0.5 * x.sin())),
        },
        Builtin {
            name: "lattice-bounded",
            description: "cos(2x), order 0",
            symbol: lattice_modulated(0.0, |x| re((2.0 * x).cos())),
        },
    ]
}

/// Symbols that must be rejected by the class checks.
pub fn broken_builtins() -> Vec<Builtin> {
    let w = WeightFunction::japanese();
    vec![
        Builtin {
            name: "wrong-order",
            description: "<k>^2 declared at order 1",
            symbol: bracket(2.0).with_order(1.0),
        },
        Builtin {
            name: "rough",
            description: "sin(k)<k> declared at order 1",
            symbol: Symbol::multiplier(jap(1.0), move |k| re((k as f64).sin() * w.eval(k)))
                .expect("valid class"),
        },
    ]
}

/// Looks up `name` or `name:key=value,...` among the torus and lattice built-ins.
///
/// `bessel:s=<s>` and `japanese:m=<m>` are parametrized; other names take no parameters.
pub fn lookup(spec: &str) -> Result<Symbol> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n.trim(), p.trim()),
        None => (spec.trim(), ""),
    };
    let mut kv = Vec::new();
    for part in params.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Precondition(format!("malformed parameter `{part}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Precondition(format!("parameter `{}` is not a number", k.trim())))?;
        kv.push((k.trim().to_string(), v));
    }
    let param = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| *v);
    match name {
        "bessel" if !kv.is_empty() => {
            let s = param("s").ok_or_else(|| Error::Precondition("bessel needs s=<value>".into()))?;
            bessel_potential(s, WeightFunction::japanese())
        }
        "japanese" => {
            let m = param("m").ok_or_else(|| Error::Precondition("japanese needs m=<value>".into()))?;
            Ok(bracket(m))
        }
        _ if !kv.is_empty() => Err(Error::Precondition(format!("built-in `{name}` takes no parameters"))),
        _ => torus_builtins()
            .into_iter()
            .chain(lattice_builtins())
            .chain(broken_builtins())
            .find(|b| b.name == name)
            .map(|b| b.symbol)
            .ok_or_else(|| Error::Precondition(format!("unknown built-in `{name}`"))),
    }
}
