use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One factor of an ordered operator product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    /// Position power `x^k`, `k ≥ 1`.
    X(u32),
    /// Momentum `−iħ ∂/∂x`.
    D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term<T> {
    pub coefficient: T,
    /// Left-to-right operator order; the rightmost factor acts first.
    pub factors: Vec<Factor>,
}

/// Quantum Hamiltonian written as a sum of ordered products of `X^k` and
/// `D`. Factor order is kept exactly as given.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorExpr<T> {
    terms: Vec<Term<T>>,
}

impl<T: Real> OperatorExpr<T> {
    pub fn new(terms: Vec<Term<T>>) -> Result<Self> {
        for t in &terms {
            if t.factors.iter().any(|f| matches!(f, Factor::X(0))) {
                return Err(Error::Structural("position factors need exponent >= 1".into()));
            }
        }
        Ok(Self { terms })
    }

    pub fn term(coefficient: T, factors: Vec<Factor>) -> Self {
        Self {
            terms: vec![Term {
                coefficient,
                factors: normalise_factors(factors),
            }],
        }
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    /// `½D² + ½ω²X²`.
    pub fn harmonic(omega: T) -> Self {
        let half = T::lit(0.5);
        Self::term(half, vec![Factor::D, Factor::D]).plus(&Self::term(half * omega * omega, vec![Factor::X(2)]))
    }

    /// `D X D`.
    pub fn model_one() -> Self {
        Self::term(T::one(), vec![Factor::D, Factor::X(1), Factor::D])
    }

    pub fn position() -> Self {
        Self::term(T::one(), vec![Factor::X(1)])
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coefficient: t.coefficient * c,
                    factors: t.factors.clone(),
                })
                .collect(),
        }
    }

    /// Formal adjoint: each factor is self-adjoint, so only the order flips.
    pub fn adjoint(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coefficient: t.coefficient,
                    factors: normalise_factors(t.factors.iter().rev().copied().collect()),
                })
                .collect(),
        }
    }

    /// Terms with identical factor sequences merged, zero terms dropped.
    pub fn collected(&self) -> BTreeMap<Vec<Factor>, T> {
        let mut map: BTreeMap<Vec<Factor>, T> = BTreeMap::new();
        for t in &self.terms {
            *map.entry(normalise_factors(t.factors.clone())).or_insert(T::zero()) += t.coefficient;
        }
        map.retain(|_, c| *c != T::zero());
        map
    }

    /// Term-by-term comparison with the formal adjoint.
    pub fn is_hermitian(&self) -> bool {
        let a = self.collected();
        let b = self.adjoint().collected();
        let tol = T::lit(1e-12);
        a.len() == b.len()
            && a.iter().all(|(k, v)| {
                b.get(k)
                    .map(|w| (*v - *w).abs() <= tol * (T::one() + v.abs()))
                    .unwrap_or(false)
            })
    }

    /// Largest number of `D` factors and largest total `X` power in any term.
    pub fn degrees(&self) -> (u32, u32) {
        self.terms.iter().fold((0, 0), |(dm, xm), t| {
            let d = t.factors.iter().filter(|f| matches!(f, Factor::D)).count() as u32;
            let x = t
                .factors
                .iter()
                .map(|f| if let Factor::X(k) = f { *k } else { 0 })
                .sum::<u32>();
            (dm.max(d), xm.max(x))
        })
    }

    /// Classical function `𝓗(p, q)`: every factor replaced by its c-number.
    pub fn classical(&self, p: T, q: T) -> T {
        self.terms
            .iter()
            .map(|t| {
                t.factors.iter().fold(t.coefficient, |acc, f| match f {
                    Factor::D => acc * p,
                    Factor::X(k) => acc * q.powi(*k as i32),
                })
            })
            .sum()
    }
}

/// Adjacent `X^a X^b` merge into `X^{a+b}`.
fn normalise_factors(factors: Vec<Factor>) -> Vec<Factor> {
    let mut out: Vec<Factor> = Vec::with_capacity(factors.len());
    for f in factors {
        match (out.last_mut(), f) {
            (Some(Factor::X(a)), Factor::X(b)) => *a += b,
            _ => out.push(f),
        }
    }
    out
}

impl<T: Real> fmt::Display for OperatorExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{:?} *", t.coefficient.to_f64_lossy())?;
            if t.factors.is_empty() {
                write!(f, " 1")?;
            }
            for fac in &t.factors {
                match fac {
                    Factor::D => write!(f, " D")?,
                    Factor::X(1) => write!(f, " X")?,
                    Factor::X(k) => write!(f, " X^{k}")?,
                }
            }
        }
        Ok(())
    }
}

impl<T: Real> FromStr for OperatorExpr<T> {
    type Err = Error;

    /// Parses `"1.0 * D X D"` or `"0.5 * D D + 0.5 * X X"`. Factors are
    /// whitespace separated (`X`, `X^k`, `D`, `D^k`, `1`); a missing
    /// coefficient means 1 and `-` separates a negated term.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Err(Error::Parse("empty operator expression".into()));
        }
        let terms = split_terms(s)
            .into_iter()
            .map(|(sign, chunk)| parse_term::<T>(chunk.trim(), T::lit(sign)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }
}

/// Splits at `+`/`-` signs that follow a complete factor or number, so
/// `a * X + -b * D` and exponents like `2.5e-1` stay intact.
fn split_terms(s: &str) -> Vec<(f64, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut sign = 1.0;
    let mut prev: Option<char> = None;
    for (i, c) in s.char_indices() {
        if c == '+' || c == '-' {
            let separator = match prev {
                None => false,
                Some(p) => !matches!(p, '*' | '+' | '-') && !is_exponent_sign(s, i),
            };
            if separator {
                out.push((sign, &s[start..i]));
                start = i + 1;
                sign = if c == '-' { -1.0 } else { 1.0 };
                prev = Some(c);
                continue;
            }
        }
        if !c.is_whitespace() {
            prev = Some(c);
        }
    }
    out.push((sign, &s[start..]));
    out
}

fn is_exponent_sign(s: &str, i: usize) -> bool {
    let b = s.as_bytes();
    i >= 2 && (b[i - 1] == b'e' || b[i - 1] == b'E') && (b[i - 2].is_ascii_digit() || b[i - 2] == b'.')
}

fn parse_term<T: Real>(chunk: &str, mut sign: T) -> Result<Term<T>> {
    let mut chunk = chunk;
    while let Some(c) = chunk.strip_prefix('-').or_else(|| chunk.strip_prefix('+')) {
        if chunk.starts_with('-') {
            sign = -sign;
        }
        chunk = c.trim_start();
    }
    if chunk.is_empty() {
        return Err(Error::Parse("empty term".into()));
    }
    let (coef, body) = match chunk.split_once('*') {
        Some((c, b)) => {
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient `{}`", c.trim())))?;
            (T::lit(c), b)
        }
        None => match chunk.split_whitespace().next().map(str::parse::<f64>) {
            Some(Ok(c)) => (T::lit(c), chunk.trim_start().split_once(char::is_whitespace).map_or("", |x| x.1)),
            _ => (T::one(), chunk),
        },
    };
    let mut factors = Vec::new();
    for tok in body.split_whitespace() {
        let (base, power) = match tok.split_once('^') {
            Some((b, k)) => {
                let k: u32 = k.parse().map_err(|_| Error::Parse(format!("bad exponent in `{tok}`")))?;
                if k == 0 {
                    return Err(Error::Parse(format!("zero exponent in `{tok}`")));
                }
                (b, k)
            }
            None => (tok, 1),
        };
        match base {
            "X" | "x" => factors.push(Factor::X(power)),
            "D" | "P" => factors.extend(std::iter::repeat_n(Factor::D, power as usize)),
            "1" if power == 1 => {}
            _ => return Err(Error::Parse(format!("unknown factor `{tok}` (expected X, X^k, D, D^k)"))),
        }
    }
    Ok(Term {
        coefficient: sign * coef,
        factors: normalise_factors(factors),
    })
}
