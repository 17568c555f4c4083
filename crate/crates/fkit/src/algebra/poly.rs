//! Polynomials over an exact or error-tracking scalar.
//!
//! `Poly<Rat>` is the exact model of polynomial functions on ℝ^d; `Poly<Ef64>`
//! carries Monte-Carlo-weighted coefficients together with linearly propagated
//! error bounds, so every ħ-series coefficient downstream knows its own
//! uncertainty.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Exact rational scalar used everywhere the mathematics is exact.
pub type Rat = BigRational;

/// Builds an exact rational from a numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num.into(), den.into())
}

/// Scalar interface shared by exact rationals and error-tracking floats.
pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Central value as a float (for norms and reports).
    fn value_f64(&self) -> f64;
    /// Propagated error bound; identically 0 for exact scalars.
    fn err_f64(&self) -> f64;
}

impl Scalar for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        Rat::from_integer(v.into())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        rat(num, den)
    }
    fn value_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn err_f64(&self) -> f64 {
        0.0
    }
}

/// A float with a linearly propagated absolute error bound.
///
/// Products propagate as |a|·f + |b|·e + e·f so the bound stays a bound under
/// the usual first-order model with the cross term kept for safety.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ef64 {
    pub val: f64,
    pub err: f64,
}

impl Ef64 {
    pub fn new(val: f64, err: f64) -> Self {
        Ef64 { val, err: err.abs() }
    }

    pub fn exact(val: f64) -> Self {
        Ef64 { val, err: 0.0 }
    }
}

impl fmt::Display for Ef64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.err > 0.0 {
            write!(f, "{}±{:.3e}", self.val, self.err)
        } else {
            write!(f, "{}", self.val)
        }
    }
}

impl Scalar for Ef64 {
    fn zero() -> Self {
        Ef64::exact(0.0)
    }
    fn one() -> Self {
        Ef64::exact(1.0)
    }
    fn is_zero(&self) -> bool {
        self.val == 0.0 && self.err == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        Ef64 { val: self.val + other.val, err: self.err + other.err }
    }
    fn sub(&self, other: &Self) -> Self {
        Ef64 { val: self.val - other.val, err: self.err + other.err }
    }
    fn mul(&self, other: &Self) -> Self {
        Ef64 {
            val: self.val * other.val,
            err: self.val.abs() * other.err + other.val.abs() * self.err + self.err * other.err,
        }
    }
    fn neg(&self) -> Self {
        Ef64 { val: -self.val, err: self.err }
    }
    fn from_i64(v: i64) -> Self {
        Ef64::exact(v as f64)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Ef64::exact(num as f64 / den as f64)
    }
    fn value_f64(&self) -> f64 {
        self.val
    }
    fn err_f64(&self) -> f64 {
        self.err
    }
}

/// A polynomial on ℝ^d: exponent multi-indices (length `dim`) to scalars.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S: Scalar> {
    dim: usize,
    terms: BTreeMap<Vec<u32>, S>,
}

impl<S: Scalar> Poly<S> {
    pub fn zero(dim: usize) -> Self {
        Poly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: S) -> Self {
        let mut p = Poly::zero(dim);
        if !c.is_zero() {
            p.terms.insert(vec![0; dim], c);
        }
        p
    }

    pub fn one(dim: usize) -> Self {
        Poly::constant(dim, S::one())
    }

    /// The coordinate function x_{i+1} (0-based index).
    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim, "variable index out of range");
        let mut expo = vec![0; dim];
        expo[i] = 1;
        let mut p = Poly::zero(dim);
        p.terms.insert(expo, S::one());
        p
    }

    /// Single monomial c·x^expo.
    pub fn monomial(dim: usize, expo: Vec<u32>, c: S) -> Self {
        assert_eq!(expo.len(), dim);
        let mut p = Poly::zero(dim);
        if !c.is_zero() {
            p.terms.insert(expo, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, expo: &[u32]) -> S {
        self.terms.get(expo).cloned().unwrap_or_else(S::zero)
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn insert_add(&mut self, expo: Vec<u32>, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&expo) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&expo);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(expo, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_add(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.neg());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = Poly::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let expo: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert_add(expo, ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Poly::zero(self.dim);
        if s.is_zero() {
            return out;
        }
        for (e, c) in &self.terms {
            let v = c.mul(s);
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Poly::one(self.dim);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative ∂/∂x_{i+1}.
    pub fn deriv(&self, i: usize) -> Self {
        assert!(i < self.dim);
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut expo = e.clone();
            expo[i] -= 1;
            out.insert_add(expo, c.mul(&S::from_i64(e[i] as i64)));
        }
        out
    }

    /// Iterated derivative ∂^multi (plain, no combinatorial normalization).
    pub fn deriv_multi(&self, multi: &[u32]) -> Self {
        assert_eq!(multi.len(), self.dim);
        let mut out = self.clone();
        for (i, &k) in multi.iter().enumerate() {
            for _ in 0..k {
                out = out.deriv(i);
            }
        }
        out
    }

    /// Drops every monomial of total degree above `d`.
    pub fn truncate_degree(&self, d: u32) -> Self {
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() <= d {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Largest |coefficient| (0 for the zero polynomial).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.value_f64().abs()).fold(0.0, f64::max)
    }

    /// Largest propagated coefficient error bound.
    pub fn max_err(&self) -> f64 {
        self.terms.values().map(|c| c.err_f64()).fold(0.0, f64::max)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }
}

impl Poly<Rat> {
    /// Exact coefficients into error-tracking floats (error 0).
    pub fn to_numeric(&self) -> Poly<Ef64> {
        self.map_scalars(|c| Ef64::exact(c.value_f64()))
    }
}

impl Poly<Ef64> {
    /// Evaluates at a point (errors propagated linearly).
    pub fn eval(&self, x: &[f64]) -> Ef64 {
        assert_eq!(x.len(), self.dim);
        let mut acc = Ef64::exact(0.0);
        for (e, c) in &self.terms {
            let mono: f64 = e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product();
            acc = Scalar::add(&acc, &c.mul(&Ef64::exact(mono)));
        }
        acc
    }
}

/// Graded-lex descending order used for printing.
fn display_order(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    db.cmp(&da).then_with(|| a.cmp(b))
}

impl<S: Scalar> fmt::Display for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| display_order(a, b));
        let mut first = true;
        for e in keys {
            let c = &self.terms[e];
            let cs = c.to_string();
            let (neg, mag) = match cs.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, cs),
            };
            if first {
                if neg {
                    f.write_str("-")?;
                }
                first = false;
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, k) })
                .collect();
            if vars.is_empty() {
                f.write_str(&mag)?;
            } else if mag == "1" {
                f.write_str(&vars.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Parse error with byte position.
#[derive(Debug, thiserror::Error)]
#[error("polynomial parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn uint(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a number");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError { pos: start, msg: "number too large".into() })
    }

    fn expr(&mut self) -> Result<Poly<Rat>, ParseError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.bump();
                self.term()?.neg()
            }
            Some(b'+') => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly<Rat>, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.bump();
                    acc = acc.mul(&self.factor()?);
                }
                // juxtaposition like `2 x1` is not in the grammar; require '*'
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Poly<Rat>, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.bump();
            let k = self.uint()?;
            if k > 64 {
                return self.err("exponent too large");
            }
            return Ok(base.pow(k as u32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly<Rat>, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected `)`");
                }
                self.bump();
                Ok(inner)
            }
            Some(b'x') => {
                self.bump();
                let k = self.uint()?;
                if k == 0 || k as usize > self.dim {
                    return self.err(&format!("variable x{k} out of range for dimension {}", self.dim));
                }
                Ok(Poly::var(self.dim, k as usize - 1))
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.uint()? as i64;
                if self.peek() == Some(b'/') {
                    self.bump();
                    let den = self.uint()? as i64;
                    if den == 0 {
                        return self.err("zero denominator");
                    }
                    Ok(Poly::constant(self.dim, rat(num, den)))
                } else {
                    Ok(Poly::constant(self.dim, Rat::from_integer(num.into())))
                }
            }
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of input"),
        }
    }
}

impl Poly<Rat> {
    /// Parses the plain grammar `3/2*x1^2*x2 - x3` (variables are 1-based).
    pub fn parse(src: &str, dim: usize) -> Result<Self, ParseError> {
        let mut p = Parser { src: src.as_bytes(), pos: 0, dim };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return p.err("trailing input");
        }
        Ok(out)
    }
}

/// Multinomial coefficient |multi|! / ∏ multi_i! as an exact rational.
pub fn multinomial(multi: &[u32]) -> Rat {
    let total: u32 = multi.iter().sum();
    let mut num = <Rat as Scalar>::one();
    for k in 1..=total as i64 {
        num = num * Rat::from_integer(k.into());
    }
    for &m in multi {
        for k in 1..=m as i64 {
            num = num / Rat::from_integer(k.into());
        }
    }
    num
}

/// k! as an exact rational.
pub fn factorial(k: u32) -> Rat {
    let mut out = <Rat as Scalar>::one();
    for j in 1..=k as i64 {
        out = out * Rat::from_integer(j.into());
    }
    out
}
