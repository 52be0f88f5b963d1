//! Text form of rational functions.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := ('-' | '+') unary | power
//! power    := primary ('^' exponent)?
//! exponent := ('-' | '+')? INTEGER
//! primary  := NUMBER 'i'? | 'i' | 'z' | '(' expr ')'
//! NUMBER   := digits ('.' digits)? (('e' | 'E') ('-' | '+')? digits)?
//! ```
//!
//! `^` binds tighter than unary minus, so `-z^2` is `-(z^2)`. A number
//! directly followed by `i` is one imaginary literal (`3i`, `2.5e-3i`).
//! There is no implicit multiplication: write `2*z`, not `2z`.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::cpoly::{Poly, DEFAULT_CLUSTER_TOL};
use crate::ratfun::{RatFun, Target};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax { expected: String, found: String },
    Semantic(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax { expected, found } => {
                write!(f, "expected {expected}, found {found}")
            }
            ParseErrorKind::Semantic(msg) => f.write_str(msg),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    I,
    Z,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Imag(v) => format!("imaginary literal {v}i"),
            Tok::I => "'i'".into(),
            Tok::Z => "'z'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, expected: &str, found: String) -> ParseError {
    ParseError {
        offset,
        kind: ParseErrorKind::Syntax {
            expected: expected.into(),
            found,
        },
    }
}

fn semantic(offset: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        offset,
        kind: ParseErrorKind::Semantic(msg.into()),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let tok = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'z' => Tok::Z,
            b'i' => Tok::I,
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    let digits = k;
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == digits {
                        return Err(syntax(k, "exponent digits", found_at(text, k)));
                    }
                    j = k;
                }
                let lit = &text[i..j];
                let v: f64 = lit
                    .parse()
                    .map_err(|_| syntax(start, "a number", format!("'{lit}'")))?;
                i = j;
                if i < bytes.len() && bytes[i] == b'i' {
                    i += 1;
                    out.push((Tok::Imag(v), start));
                } else {
                    out.push((Tok::Num(v), start));
                }
                continue;
            }
            _ => {
                return Err(syntax(start, "a number, 'z', 'i', an operator or '('", found_at(text, start)));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

fn found_at(text: &str, offset: usize) -> String {
    match text[offset..].chars().next() {
        Some(ch) => format!("'{ch}'"),
        None => "end of input".into(),
    }
}

#[derive(Debug, Clone)]
enum Expr {
    Const(Complex64),
    Z,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, i32, usize),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    let (_, at) = self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), at);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let (_, at) = self.bump();
        let negative = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let off = self.offset();
        let (tok, _) = self.bump();
        let n = match tok {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => v as i32,
            other => return Err(syntax(off, "an integer exponent", other.describe())),
        };
        if *self.peek() == Tok::Caret {
            return Err(syntax(
                self.offset(),
                "an operator other than a second '^' (use parentheses)",
                "'^'".into(),
            ));
        }
        Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }, at))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let off = self.offset();
        let (tok, _) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(Complex64::new(v, 0.0))),
            Tok::Imag(v) => Ok(Expr::Const(Complex64::new(0.0, v))),
            Tok::I => Ok(Expr::Const(Complex64::new(0.0, 1.0))),
            Tok::Z => Ok(Expr::Z),
            Tok::LParen => {
                let inner = self.expr()?;
                let off = self.offset();
                let (close, _) = self.bump();
                if close != Tok::RParen {
                    return Err(syntax(off, "')'", close.describe()));
                }
                Ok(inner)
            }
            other => Err(syntax(off, "a number, 'z', 'i' or '('", other.describe())),
        }
    }
}

fn lower(e: &Expr, tol: f64) -> Result<RatFun, ParseError> {
    Ok(match e {
        Expr::Const(c) => RatFun::constant(*c).with_tol(tol),
        Expr::Z => RatFun::z().with_tol(tol),
        Expr::Neg(a) => lower(a, tol)?.neg(),
        Expr::Add(a, b) => lower(a, tol)?.add(&lower(b, tol)?),
        Expr::Sub(a, b) => lower(a, tol)?.sub(&lower(b, tol)?),
        Expr::Mul(a, b) => lower(a, tol)?.mul(&lower(b, tol)?),
        Expr::Div(a, b, at) => {
            let den = lower(b, tol)?;
            if den.is_zero() {
                return Err(semantic(*at, "division by an expression that is identically zero"));
            }
            lower(a, tol)?
                .div(&den)
                .map_err(|e| semantic(*at, e.to_string()))?
        }
        Expr::Pow(a, n, at) => {
            let base = lower(a, tol)?;
            if *n < 0 && base.is_zero() {
                return Err(semantic(*at, "negative power of an expression that is identically zero"));
            }
            base.powi(*n).map_err(|e| semantic(*at, e.to_string()))?
        }
    })
}

/// Parses and lowers an expression with the default cluster tolerance.
pub fn parse_expr(text: &str) -> Result<RatFun, ParseError> {
    parse_expr_with_tol(text, DEFAULT_CLUSTER_TOL)
}

pub fn parse_expr_with_tol(text: &str, tol: f64) -> Result<RatFun, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(syntax(p.offset(), "an operator or end of input", p.peek().describe()));
    }
    lower(&e, tol)
}

/// A constant such as `0.5`, `-1e-8`, `1+2i` or `2i`.
pub fn parse_complex(text: &str) -> Result<Complex64, ParseError> {
    let g = parse_expr(text)?;
    g.as_constant()
        .ok_or_else(|| semantic(0, format!("'{text}' is not a constant")))
}

/// A constant or `inf` / `infinity` / `∞`.
pub fn parse_target(text: &str) -> Result<Target, ParseError> {
    let t = text.trim();
    match t {
        "inf" | "infinity" | "Inf" | "∞" => Ok(Target::Infinity),
        _ => parse_complex(t).map(Target::Finite),
    }
}

/// Renders `x` with `precision` significant digits, shortest form.
pub fn format_real(x: f64, precision: usize) -> String {
    let p = precision.max(1);
    let rounded: f64 = format!("{:.*e}", p - 1, x).parse().unwrap_or(x);
    if rounded == 0.0 {
        return "0".into();
    }
    let a = rounded.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn format_imag(y: f64, precision: usize) -> String {
    match format_real(y, precision).as_str() {
        "1" => "i".into(),
        "-1" => "-i".into(),
        s => format!("{s}i"),
    }
}

/// `a`, `bi`, or `a+bi` / `a-bi`.
pub fn format_complex(c: Complex64, precision: usize) -> String {
    let re = format_real(c.re, precision);
    let im = format_real(c.im, precision);
    match (re.as_str(), im.as_str()) {
        (_, "0") => re,
        ("0", _) => format_imag(c.im, precision),
        _ => {
            let imag = format_imag(c.im.abs(), precision);
            let sign = if c.im < 0.0 { '-' } else { '+' };
            format!("{re}{sign}{imag}")
        }
    }
}

fn format_poly(p: &Poly, precision: usize) -> String {
    let floor = 10f64.powi(-(precision as i32)) * p.norm();
    let mut terms: Vec<String> = Vec::new();
    for (k, c) in p.coeffs().iter().enumerate().rev() {
        let c = Complex64::new(
            if c.re.abs() <= floor { 0.0 } else { c.re },
            if c.im.abs() <= floor { 0.0 } else { c.im },
        );
        let coef = format_complex(c, precision);
        if coef == "0" {
            continue;
        }
        let is_sum = format_real(c.re, precision) != "0" && format_real(c.im, precision) != "0";
        let coef = if is_sum { format!("({coef})") } else { coef };
        let power = match k {
            0 => String::new(),
            1 => "z".into(),
            _ => format!("z^{k}"),
        };
        let term = if k == 0 {
            coef
        } else {
            match coef.as_str() {
                "1" => power,
                "-1" => format!("-{power}"),
                _ => format!("{coef}*{power}"),
            }
        };
        terms.push(term);
    }
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = terms[0].clone();
    for t in &terms[1..] {
        match t.strip_prefix('-') {
            Some(rest) => {
                out.push_str(" - ");
                out.push_str(rest);
            }
            None => {
                out.push_str(" + ");
                out.push_str(t);
            }
        }
    }
    out
}

/// Canonical `(num)` or `(num)/(den)` rendering with `precision`
/// significant digits per coefficient part.
pub fn format_expr(g: &RatFun, precision: usize) -> String {
    let num = format_poly(g.num(), precision);
    if g.is_polynomial() {
        format!("({num})")
    } else {
        format!("({num})/({})", format_poly(g.den(), precision))
    }
}
