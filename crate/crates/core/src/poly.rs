//! Sparse multivariate polynomials with integer coefficients, their ASCII
//! grammar and modular evaluation.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! poly   := term { ('+' | '-') term }
//! term   := [sign] [integer '*'] factor { '*' factor } | [sign] integer
//! factor := var [ '^' positive-integer ]
//! var    := 'x' [index]        (bare 'x' only in single-variable input)
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::big_pow;

/// Exponent vector of a monomial.
pub type Exponent = Vec<u32>;

/// A polynomial in `nvars` variables with nonzero integer coefficients on
/// pairwise distinct exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparsePolynomial {
    nvars: usize,
    terms: BTreeMap<Exponent, BigInt>,
}

impl SparsePolynomial {
    /// Builds a polynomial, merging like terms and dropping zero coefficients.
    pub fn new<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, BigInt)>,
    {
        if nvars == 0 {
            return Err(Error::invalid("polynomial needs at least one variable"));
        }
        let mut map: BTreeMap<Exponent, BigInt> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::invalid(format!(
                    "exponent vector {e:?} does not have {nvars} entries"
                )));
            }
            *map.entry(e).or_insert_with(BigInt::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(SparsePolynomial { nvars, terms: map })
    }

    pub fn from_i64_terms(nvars: usize, terms: &[(&[u32], i64)]) -> Result<Self> {
        Self::new(
            nvars,
            terms.iter().map(|(e, c)| (e.to_vec(), BigInt::from(*c))),
        )
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, e: &[u32]) -> Option<&BigInt> {
        self.terms.get(e)
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Degree in the variable `j`.
    pub fn degree_in(&self, j: usize) -> u32 {
        self.terms.keys().map(|e| e[j]).max().unwrap_or(0)
    }

    /// Nonconstant with vanishing constant term, as required of a phase `f`.
    pub fn check_phase(&self) -> Result<()> {
        if self.is_constant() {
            return Err(Error::invalid("polynomial must be nonconstant"));
        }
        if !self.constant_term().is_zero() {
            return Err(Error::invalid("polynomial must satisfy f(0) = 0"));
        }
        Ok(())
    }

    pub fn partial(&self, j: usize) -> SparsePolynomial {
        let terms = self.terms.iter().filter(|(e, _)| e[j] > 0).map(|(e, c)| {
            let mut d = e.clone();
            d[j] -= 1;
            (d, c * BigInt::from(e[j]))
        });
        Self::new(self.nvars, terms).expect("same arity")
    }

    pub fn gradient(&self) -> Vec<SparsePolynomial> {
        (0..self.nvars).map(|j| self.partial(j)).collect()
    }

    /// The sub-polynomial of terms whose exponents are in `support`.
    pub fn restrict_to<'a, I>(&self, support: I) -> SparsePolynomial
    where
        I: IntoIterator<Item = &'a Exponent>,
    {
        let terms = support
            .into_iter()
            .filter_map(|e| self.terms.get(e).map(|c| (e.clone(), c.clone())));
        Self::new(self.nvars, terms).expect("same arity")
    }

    /// Coefficients reduced into `[0, p)`, zero terms dropped.
    pub fn reduce_mod(&self, p: u64) -> SparsePolynomial {
        let pb = BigInt::from(p);
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), c.mod_floor(&pb)));
        Self::new(self.nvars, terms).expect("same arity")
    }

    /// Places the variables at positions `offset..offset+nvars` of a
    /// polynomial in `total` variables.
    pub fn embed(&self, offset: usize, total: usize) -> Result<SparsePolynomial> {
        if offset + self.nvars > total {
            return Err(Error::invalid("embedding exceeds target arity"));
        }
        let terms = self.terms.iter().map(|(e, c)| {
            let mut d = vec![0; total];
            d[offset..offset + self.nvars].copy_from_slice(e);
            (d, c.clone())
        });
        Self::new(total, terms)
    }

    pub fn add(&self, other: &SparsePolynomial) -> Result<SparsePolynomial> {
        if self.nvars != other.nvars {
            return Err(Error::invalid("adding polynomials of different arity"));
        }
        Self::new(
            self.nvars,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(e, c)| (e.clone(), c.clone())),
        )
    }

    pub fn eval(&self, x: &[BigInt]) -> BigInt {
        assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(c.clone(), |acc, (&k, xi)| acc * num_traits::pow(xi.clone(), k as usize))
            })
            .sum()
    }

    /// The coefficients of `self` as machine integers, if they fit.
    pub fn small_coefficients(&self) -> Option<Vec<(Exponent, i64)>> {
        self.terms
            .iter()
            .map(|(e, c)| c.to_i64().map(|c| (e.clone(), c)))
            .collect()
    }

    pub fn max_abs_coefficient(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

/// `f(x) mod p^m`, reduced into `[0, p^m)`.
pub fn poly_eval_mod(f: &SparsePolynomial, x: &[BigInt], p: u64, m: u32) -> Result<BigInt> {
    if m == 0 {
        return Err(Error::invalid("modular evaluation needs level m >= 1"));
    }
    if x.len() != f.nvars() {
        return Err(Error::invalid("point has the wrong dimension"));
    }
    let modulus = big_pow(p, m);
    let xr: Vec<BigInt> = x.iter().map(|xi| xi.mod_floor(&modulus)).collect();
    let mut acc = BigInt::zero();
    for (e, c) in f.terms() {
        let mut t = c.mod_floor(&modulus);
        for (&k, xi) in e.iter().zip(&xr) {
            if k > 0 {
                t = t * xi.modpow(&BigInt::from(k), &modulus) % &modulus;
            }
        }
        acc = (acc + t) % &modulus;
    }
    Ok(acc)
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let single = self.nvars == 1;
        // Highest degree first reads more naturally.
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let constant = e.iter().all(|&k| k == 0);
            let mut parts: Vec<String> = Vec::new();
            if constant || !mag.is_one() {
                parts.push(mag.to_string());
            }
            for (j, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let var = if single {
                    "x".to_string()
                } else {
                    format!("x{}", j + 1)
                };
                parts.push(if k == 1 { var } else { format!("{var}^{k}") });
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// Parses the polynomial grammar; the arity is the largest variable index
/// (1 for bare `x`).
pub fn parse_polynomial(text: &str) -> Result<SparsePolynomial> {
    Parser::new(text).parse(None)
}

/// Like [`parse_polynomial`] but with a fixed number of variables, which must
/// be at least the largest index used.
pub fn parse_polynomial_in(text: &str, nvars: usize) -> Result<SparsePolynomial> {
    Parser::new(text).parse(Some(nvars))
}

struct Parser {
    chars: Vec<char>,
    // Offsets of the non-whitespace characters in the original text.
    origin: Vec<usize>,
    pos: usize,
    text_len: usize,
}

enum Var {
    Bare,
    Indexed(usize),
}

impl Parser {
    fn new(text: &str) -> Self {
        let mut chars = Vec::new();
        let mut origin = Vec::new();
        for (i, ch) in text.chars().enumerate() {
            if !ch.is_whitespace() {
                chars.push(ch);
                origin.push(i);
            }
        }
        Parser {
            chars,
            origin,
            pos: 0,
            text_len: text.chars().count(),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let position = self.origin.get(self.pos).copied().unwrap_or(self.text_len);
        Error::Parse {
            position,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    fn parse(mut self, nvars: Option<usize>) -> Result<SparsePolynomial> {
        if self.chars.is_empty() {
            return Err(self.err("empty polynomial"));
        }
        let mut raw: Vec<(Vec<(Var, u32)>, BigInt)> = Vec::new();
        let mut first = true;
        while self.pos < self.chars.len() {
            let mut negative = false;
            match self.peek() {
                Some('+') => self.pos += 1,
                Some('-') => {
                    negative = true;
                    self.pos += 1;
                }
                _ if !first => return Err(self.err("expected '+' or '-'")),
                _ => {}
            }
            first = false;
            let (factors, coeff) = self.term()?;
            raw.push((factors, if negative { -coeff } else { coeff }));
        }

        let mut bare = false;
        let mut max_index = 0usize;
        for (factors, _) in &raw {
            for (v, _) in factors {
                match v {
                    Var::Bare => bare = true,
                    Var::Indexed(i) => max_index = max_index.max(*i),
                }
            }
        }
        if bare && max_index > 0 {
            return Err(Error::Parse {
                position: 0,
                message: "bare 'x' is only allowed in single-variable input".into(),
            });
        }
        let used = if bare { 1 } else { max_index.max(1) };
        let n = match nvars {
            Some(n) if n < used => {
                return Err(Error::invalid(format!(
                    "polynomial uses {used} variables but {n} were requested"
                )))
            }
            Some(n) => n,
            None => used,
        };
        let terms = raw.into_iter().map(|(factors, c)| {
            let mut e = vec![0u32; n];
            for (v, k) in factors {
                let j = match v {
                    Var::Bare => 0,
                    Var::Indexed(i) => i - 1,
                };
                e[j] += k;
            }
            (e, c)
        });
        SparsePolynomial::new(n, terms)
    }

    fn term(&mut self) -> Result<(Vec<(Var, u32)>, BigInt)> {
        let mut coeff = BigInt::one();
        let mut factors = Vec::new();
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            let d = self.digits().expect("digit present");
            if self.peek() == Some('.') {
                return Err(self.err("non-integer coefficient"));
            }
            coeff = d.parse().expect("digits parse");
            match self.peek() {
                Some('*') => self.pos += 1,
                Some('/') => return Err(self.err("non-integer coefficient")),
                None | Some('+') | Some('-') => return Ok((factors, coeff)),
                _ => return Err(self.err("expected '*' after coefficient")),
            }
        }
        loop {
            factors.push(self.factor()?);
            if self.peek() == Some('*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((factors, coeff))
    }

    fn factor(&mut self) -> Result<(Var, u32)> {
        if self.peek() != Some('x') {
            return Err(self.err("expected variable 'x'"));
        }
        self.pos += 1;
        let var = match self.digits() {
            None => Var::Bare,
            Some(d) => {
                let i: usize = d.parse().map_err(|_| self.err("variable index too large"))?;
                if i == 0 {
                    return Err(self.err("variable indices start at 1"));
                }
                Var::Indexed(i)
            }
        };
        let mut exp = 1u32;
        if self.peek() == Some('^') {
            self.pos += 1;
            let d = self
                .digits()
                .ok_or_else(|| self.err("expected positive integer exponent"))?;
            exp = d.parse().map_err(|_| self.err("exponent too large"))?;
            if exp == 0 {
                return Err(self.err("exponent must be positive"));
            }
        }
        Ok((var, exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms(f: &SparsePolynomial) -> Vec<(Vec<u32>, i64)> {
        f.small_coefficients().unwrap()
    }

    #[test]
    fn parse_examples() {
        let f = parse_polynomial("x1^2 + x2^2").unwrap();
        assert_eq!(terms(&f), vec![(vec![0, 2], 1), (vec![2, 0], 1)]);
        let f = parse_polynomial("x^3").unwrap();
        assert_eq!(terms(&f), vec![(vec![3], 1)]);
        let f = parse_polynomial("2*x1*x2^3 - x1^4").unwrap();
        assert_eq!(terms(&f), vec![(vec![1, 3], 2), (vec![4, 0], -1)]);
    }

    #[test]
    fn parse_merges_and_drops() {
        let f = parse_polynomial("x^2 + 3*x - x^2 + x*x").unwrap();
        assert_eq!(terms(&f), vec![(vec![1], 3), (vec![2], 1)]);
        let f = parse_polynomial("x - x").unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn parse_constant_and_whitespace() {
        let f = parse_polynomial(" x ^ 2 + x + 1 ").unwrap();
        assert_eq!(terms(&f), vec![(vec![0], 1), (vec![1], 1), (vec![2], 1)]);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_polynomial("x1^2 + 1.5*x2") {
            Err(Error::Parse { position, message }) => {
                assert_eq!(position, 8);
                assert!(message.contains("non-integer"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_polynomial("x^"), Err(Error::Parse { .. })));
        assert!(matches!(parse_polynomial("x + x2"), Err(Error::Parse { .. })));
        assert!(matches!(parse_polynomial("y^2"), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(parse_polynomial("1/2*x"), Err(Error::Parse { .. })));
        assert!(matches!(parse_polynomial(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn display_round_trips() {
        for s in ["x1^2 + x2^2", "2*x1*x2^3 - x1^4", "x^3", "x^2 + x + 1", "-x1 + 7*x3^2"] {
            let f = parse_polynomial(s).unwrap();
            let g = parse_polynomial_in(&f.to_string(), f.nvars()).unwrap();
            assert_eq!(f, g, "{s}");
        }
    }

    #[test]
    fn eval_mod_examples() {
        let f = parse_polynomial("x^2").unwrap();
        assert_eq!(poly_eval_mod(&f, &[2.into()], 3, 2).unwrap(), 4.into());
        let f = parse_polynomial("x1^2 + x2^2").unwrap();
        assert_eq!(poly_eval_mod(&f, &[2.into(), 2.into()], 3, 1).unwrap(), 2.into());
        let f = parse_polynomial("x^3").unwrap();
        assert_eq!(poly_eval_mod(&f, &[5.into()], 7, 2).unwrap(), 27.into());
    }

    #[test]
    fn eval_mod_handles_negative_values() {
        let f = parse_polynomial("-x^3 - 2").unwrap();
        let exact = f.eval(&[4.into()]);
        let r = poly_eval_mod(&f, &[4.into()], 5, 3).unwrap();
        assert_eq!(r, exact.mod_floor(&BigInt::from(125)));
    }

    #[test]
    fn partials() {
        let f = parse_polynomial("x1^2*x2 + 3*x2^4").unwrap();
        assert_eq!(terms(&f.partial(0)), vec![(vec![1, 1], 2)]);
        assert_eq!(terms(&f.partial(1)), vec![(vec![0, 3], 12), (vec![2, 0], 1)]);
    }
}
