//! Arithmetic expressions in `x` and a frequency variable, evaluated over complex numbers.

use std::f64::consts::PI;
use std::sync::Arc;

use psido_core::weights::WeightFunction;
use psido_core::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("at column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Bracket,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    I,
    X,
    Freq,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Parsed expression, cheap to clone and share across threads.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Arc<Node>,
    uses_x: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse().map_err(|_| ParseError {
                column: start + 1,
                message: format!("bad number `{text}`"),
            })?;
            out.push((start + 1, Tok::Num(v)));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start + 1, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(ch) {
            out.push((i + 1, Tok::Op(ch)));
            i += 1;
        } else {
            return Err(ParseError {
                column: i + 1,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    freq: &'static str,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map(|(c, _)| *c).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat('-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    "sqrt" => Some(Func::Sqrt),
                    "L" => Some(Func::Bracket),
                    _ => None,
                };
                if let Some(f) = func {
                    self.pos += 1;
                    if !self.eat('(') {
                        return self.err(format!("expected `(` after `{name}`"));
                    }
                    let arg = self.sum()?;
                    if !self.eat(')') {
                        return self.err("expected `)`");
                    }
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                let node = match name.as_str() {
                    "x" => Node::X,
                    "i" => Node::I,
                    "pi" => Node::Num(PI),
                    v if v == self.freq => Node::Freq,
                    _ => return self.err(format!("unknown name `{name}`")),
                };
                self.pos += 1;
                Ok(node)
            }
            Tok::Op(op) => self.err(format!("unexpected `{op}`")),
        }
    }
}

fn mentions_x(n: &Node) -> bool {
    match n {
        Node::X => true,
        Node::Num(_) | Node::I | Node::Freq => false,
        Node::Neg(a) | Node::Call(_, a) => mentions_x(a),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            mentions_x(a) || mentions_x(b)
        }
    }
}

impl Expr {
    /// Parses `src` with `freq` (`"k"` or `"n"`) as the frequency variable.
    pub fn parse(src: &str, freq: &'static str) -> Result<Self, ParseError> {
        let toks = tokenize(src)?;
        let mut p = Parser {
            toks,
            pos: 0,
            end: src.chars().count() + 1,
            freq,
        };
        let root = p.sum()?;
        if p.pos != p.toks.len() {
            return p.err("unexpected trailing input");
        }
        Ok(Self {
            uses_x: mentions_x(&root),
            root: Arc::new(root),
        })
    }

    pub fn depends_on_x(&self) -> bool {
        self.uses_x
    }

    pub fn eval(&self, x: f64, k: i64, w: &WeightFunction) -> Complex64 {
        eval(&self.root, x, k, w)
    }
}

fn eval(n: &Node, x: f64, k: i64, w: &WeightFunction) -> Complex64 {
    let re = |v: f64| Complex64::new(v, 0.0);
    match n {
        Node::Num(v) => re(*v),
        Node::I => Complex64::new(0.0, 1.0),
        Node::X => re(x),
        Node::Freq => re(k as f64),
        Node::Neg(a) => -eval(a, x, k, w),
        Node::Add(a, b) => eval(a, x, k, w) + eval(b, x, k, w),
        Node::Sub(a, b) => eval(a, x, k, w) - eval(b, x, k, w),
        Node::Mul(a, b) => eval(a, x, k, w) * eval(b, x, k, w),
        Node::Div(a, b) => eval(a, x, k, w) / eval(b, x, k, w),
        Node::Pow(a, b) => {
            let (base, e) = (eval(a, x, k, w), eval(b, x, k, w));
            if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() <= 64.0 {
                base.powi(e.re as i32)
            } else if e.im == 0.0 && base.im == 0.0 && base.re >= 0.0 {
                re(base.re.powf(e.re))
            } else {
                base.powc(e)
            }
        }
        Node::Call(f, a) => {
            let v = eval(a, x, k, w);
            match f {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
                Func::Sqrt => v.sqrt(),
                Func::Bracket => {
                    let r = v.re.round();
                    if v.im == 0.0 && r == v.re {
                        re(w.eval(r as i64))
                    } else {
                        (Complex64::new(1.0, 0.0) + v * v).sqrt()
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: f64, k: i64) -> Complex64 {
        Expr::parse(src, "k").unwrap().eval(x, k, &WeightFunction::japanese())
    }

    #[test]
    fn arithmetic() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0), Complex64::new(7.0, 0.0));
        assert_eq!(ev("-2^2", 0.0, 0), Complex64::new(-4.0, 0.0));
        assert_eq!(ev("2^3^2", 0.0, 0), Complex64::new(512.0, 0.0));
        assert_eq!(ev("(1+i)*(1-i)", 0.0, 0), Complex64::new(2.0, 0.0));
        assert_eq!(ev("k/2", 0.0, 3), Complex64::new(1.5, 0.0));
        assert_eq!(ev("1e-1 * 10", 0.0, 0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn functions_and_bracket() {
        assert!((ev("(2+sin(x))*L(k)", PI / 2.0, 2) - Complex64::new(3.0 * 5f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!((ev("L(k)^2", 0.0, 7) - 50.0).norm() < 1e-12);
        assert!((ev("exp(i*pi)", 0.0, 0) + 1.0).norm() < 1e-15);
        assert_eq!(ev("sqrt(4)", 0.0, 0), Complex64::new(2.0, 0.0));
        assert_eq!(ev("L(k)^(1/2)", 0.0, 0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn errors_carry_columns() {
        let e = Expr::parse("1 + foo", "k").unwrap_err();
        assert_eq!(e.column, 5);
        let e = Expr::parse("sin(x", "k").unwrap_err();
        assert_eq!(e.column, 6);
        assert!(Expr::parse("2 $ 3", "k").is_err());
        assert!(Expr::parse("n", "k").is_err());
        assert!(Expr::parse("n", "n").is_ok());
        assert!(Expr::parse("1 2", "k").is_err());
    }

    #[test]
    fn x_dependence() {
        assert!(Expr::parse("sin(x)*k", "k").unwrap().depends_on_x());
        assert!(!Expr::parse("L(k)^2 - 5", "k").unwrap().depends_on_x());
    }
}
