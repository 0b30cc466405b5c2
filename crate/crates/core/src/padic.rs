//! Exact arithmetic on the subring `Z[1/p]` of `Q_p`, the standard additive
//! character, and balls of `Q_p^n` with their residue systems.
//!
//! Every scalar is stored as `unit * p^val` with `unit` coprime to `p`, so
//! valuation, absolute value and angular component are read off directly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default precision `N` for angular components (`ac(x) mod p^N`).
pub const DEFAULT_PRECISION: u32 = 8;

/// Default cap on the number of enumerated residue points.
pub const DEFAULT_CAP: u64 = 100_000_000;

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn big_pow(p: u64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

/// `p^k` as a `u64`, or `None` on overflow.
pub fn checked_pow(p: u64, k: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

/// `p^k` for any integer `k`, as an exact rational.
pub fn p_power(p: u64, k: i64) -> BigRational {
    let mag = big_pow(p, k.unsigned_abs() as u32);
    if k >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// Strips the factors of `p` out of `a`, returning the cofactor and the count.
fn split_p(p: u64, mut a: BigInt) -> (BigInt, i64) {
    let pb = BigInt::from(p);
    let mut v = 0i64;
    loop {
        let (q, r) = a.div_rem(&pb);
        if !r.is_zero() {
            return (a, v);
        }
        a = q;
        v += 1;
    }
}

/// An element of `Z[1/p] ⊂ Q_p`, stored exactly as `unit * p^val`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicRational {
    prime: u64,
    unit: BigInt,
    /// `None` encodes `+∞`, the valuation of zero.
    val: Option<i64>,
}

impl PadicRational {
    pub fn zero(prime: u64) -> Self {
        PadicRational {
            prime,
            unit: BigInt::zero(),
            val: None,
        }
    }

    pub fn one(prime: u64) -> Self {
        Self::from_int(prime, 1)
    }

    pub fn from_int(prime: u64, a: i64) -> Self {
        Self::from_parts(prime, BigInt::from(a), 0)
    }

    pub fn from_bigint(prime: u64, a: BigInt) -> Self {
        Self::from_parts(prime, a, 0)
    }

    /// `a * p^v`, normalised so the stored unit is coprime to `p`.
    pub fn from_parts(prime: u64, a: BigInt, v: i64) -> Self {
        if a.is_zero() {
            return Self::zero(prime);
        }
        let (unit, extra) = split_p(prime, a);
        PadicRational {
            prime,
            unit,
            val: Some(v + extra),
        }
    }

    /// `p^k`.
    pub fn p_pow(prime: u64, k: i64) -> Self {
        PadicRational {
            prime,
            unit: BigInt::one(),
            val: Some(k),
        }
    }

    /// Converts an exact rational whose denominator is a power of `p`.
    pub fn from_ratio(prime: u64, x: &BigRational) -> Result<Self> {
        if x.is_zero() {
            return Ok(Self::zero(prime));
        }
        let (den_unit, den_v) = split_p(prime, x.denom().clone());
        if !den_unit.abs().is_one() {
            return Err(Error::invalid(format!(
                "denominator of {x} is not a power of {prime}"
            )));
        }
        // numer/denom is already reduced, so the numerator is prime to p
        // whenever den_v > 0.
        let numer = if den_unit.is_negative() {
            -x.numer().clone()
        } else {
            x.numer().clone()
        };
        Ok(Self::from_parts(prime, numer, -den_v))
    }

    /// Parses `"a"`, `"-a"` or `"a/b"` with `b` a power of `p`.
    pub fn parse(prime: u64, text: &str) -> Result<Self> {
        let t = text.trim();
        let bad = || Error::invalid(format!("cannot parse p-adic rational {text:?}"));
        let ratio = match t.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                BigRational::new(n, d)
            }
            None => BigRational::from_integer(t.parse().map_err(|_| bad())?),
        };
        Self::from_ratio(prime, &ratio)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    /// `v(x)`, `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        self.val
    }

    pub fn is_zero(&self) -> bool {
        self.val.is_none()
    }

    /// True when `x ∈ Z_p`.
    pub fn is_integral(&self) -> bool {
        self.val.is_none_or(|v| v >= 0)
    }

    /// `|x|_p = p^{-v(x)}`.
    pub fn abs(&self) -> BigRational {
        match self.val {
            None => BigRational::zero(),
            Some(v) => p_power(self.prime, -v),
        }
    }

    /// The angular component `x p^{-v(x)}` reduced into `[0, p^n)`.
    pub fn ac_mod(&self, n: u32) -> Option<BigUint> {
        self.val?;
        let m = big_pow(self.prime, n);
        Some(self.unit.mod_floor(&m).to_biguint().expect("non-negative"))
    }

    pub fn to_ratio(&self) -> BigRational {
        match self.val {
            None => BigRational::zero(),
            Some(v) => BigRational::from_integer(self.unit.clone()) * p_power(self.prime, v),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_ratio().to_f64().unwrap_or(f64::NAN)
    }

    /// `x * p^k`.
    pub fn mul_p_pow(&self, k: i64) -> Self {
        match self.val {
            None => self.clone(),
            Some(v) => PadicRational {
                prime: self.prime,
                unit: self.unit.clone(),
                val: Some(v + k),
            },
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return Self::one(self.prime);
        }
        match self.val {
            None => self.clone(),
            Some(v) => PadicRational {
                prime: self.prime,
                unit: num_traits::pow(self.unit.clone(), e as usize),
                val: Some(v * e as i64),
            },
        }
    }

    /// The integer `x * p^shift`, which must lie in `Z`.
    pub(crate) fn scaled_integer(&self, shift: i64) -> BigInt {
        match self.val {
            None => BigInt::zero(),
            Some(v) => {
                let k = v + shift;
                assert!(k >= 0, "x * p^shift is not integral");
                &self.unit * big_pow(self.prime, k as u32)
            }
        }
    }

    /// `(x * p^shift) mod p^level` as a machine word; `x p^shift` must be an
    /// integer and `p^level` must fit in a `u64`.
    pub(crate) fn scaled_residue(&self, shift: i64, modulus: u64) -> u64 {
        let n = self.scaled_integer(shift);
        n.mod_floor(&BigInt::from(modulus))
            .to_u64()
            .expect("residue fits in u64")
    }

    fn check_prime(&self, other: &Self) {
        assert_eq!(self.prime, other.prime, "mixed primes in p-adic arithmetic");
    }
}

impl fmt::Display for PadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.to_ratio();
        if r.denom().is_one() {
            write!(f, "{}", r.numer())
        } else {
            write!(f, "{}/{}", r.numer(), r.denom())
        }
    }
}

impl Add for &PadicRational {
    type Output = PadicRational;

    fn add(self, rhs: &PadicRational) -> PadicRational {
        self.check_prime(rhs);
        let (va, vb) = match (self.val, rhs.val) {
            (None, _) => return rhs.clone(),
            (_, None) => return self.clone(),
            (Some(a), Some(b)) => (a, b),
        };
        let base = va.min(vb);
        let a = &self.unit * big_pow(self.prime, (va - base) as u32);
        let b = &rhs.unit * big_pow(self.prime, (vb - base) as u32);
        PadicRational::from_parts(self.prime, a + b, base)
    }
}

impl Neg for &PadicRational {
    type Output = PadicRational;

    fn neg(self) -> PadicRational {
        PadicRational {
            prime: self.prime,
            unit: -self.unit.clone(),
            val: self.val,
        }
    }
}

impl Sub for &PadicRational {
    type Output = PadicRational;

    fn sub(self, rhs: &PadicRational) -> PadicRational {
        self + &(-rhs)
    }
}

impl Mul for &PadicRational {
    type Output = PadicRational;

    fn mul(self, rhs: &PadicRational) -> PadicRational {
        self.check_prime(rhs);
        match (self.val, rhs.val) {
            (Some(a), Some(b)) => PadicRational {
                prime: self.prime,
                unit: &self.unit * &rhs.unit,
                val: Some(a + b),
            },
            _ => PadicRational::zero(self.prime),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PadicRational {
            type Output = PadicRational;
            fn $m(self, rhs: PadicRational) -> PadicRational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Valuation, absolute value and angular component of a rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicMeta {
    pub valuation: Option<i64>,
    pub abs: BigRational,
    /// `ac(x) mod p^N`; absent for `x = 0`.
    pub ac: Option<BigUint>,
}

pub fn padic_meta(prime: u64, x: &BigRational, precision: u32) -> Result<PadicMeta> {
    if precision == 0 {
        return Err(Error::invalid("angular-component precision must be >= 1"));
    }
    let x = PadicRational::from_ratio(prime, x)?;
    Ok(PadicMeta {
        valuation: x.valuation(),
        abs: x.abs(),
        ac: x.ac_mod(precision),
    })
}

/// The root of unity `exp(2πi r / p^m)`, kept in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    prime: u64,
    level: u32,
    numerator: BigUint,
}

impl RootOfUnity {
    pub fn one(prime: u64) -> Self {
        RootOfUnity {
            prime,
            level: 0,
            numerator: BigUint::zero(),
        }
    }

    pub fn new(prime: u64, numerator: BigInt, level: u32) -> Self {
        let modulus = big_pow(prime, level);
        let mut r = numerator.mod_floor(&modulus).to_biguint().expect("reduced");
        let mut level = level;
        let p = BigUint::from(prime);
        while level > 0 {
            if r.is_zero() {
                level = 0;
                break;
            }
            let (q, rem) = r.div_rem(&p);
            if !rem.is_zero() {
                break;
            }
            r = q;
            level -= 1;
        }
        if level == 0 {
            r = BigUint::zero();
        }
        RootOfUnity {
            prime,
            level,
            numerator: r,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_one(&self) -> bool {
        self.level == 0
    }

    pub fn value(&self) -> Complex64 {
        if self.level == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let modulus = big_pow(self.prime, self.level);
        let frac = BigRational::new(BigInt::from(self.numerator.clone()), modulus)
            .to_f64()
            .unwrap_or(0.0);
        Complex64::from_polar(1.0, std::f64::consts::TAU * frac)
    }

    pub fn conj(&self) -> Self {
        RootOfUnity::new(self.prime, -BigInt::from(self.numerator.clone()), self.level)
    }
}

impl Mul for &RootOfUnity {
    type Output = RootOfUnity;

    fn mul(self, rhs: &RootOfUnity) -> RootOfUnity {
        assert_eq!(self.prime, rhs.prime);
        let level = self.level.max(rhs.level);
        let a = BigInt::from(self.numerator.clone()) * big_pow(self.prime, level - self.level);
        let b = BigInt::from(rhs.numerator.clone()) * big_pow(self.prime, level - rhs.level);
        RootOfUnity::new(self.prime, a + b, level)
    }
}

/// The additive character `Ψ(x) = exp(2πi {x}_p)`: trivial on `Z_p`,
/// nontrivial on `p^{-1} Z_p`.
pub fn character(x: &PadicRational) -> RootOfUnity {
    match x.valuation() {
        Some(v) if v < 0 => RootOfUnity::new(x.prime(), x.unit().clone(), (-v) as u32),
        _ => RootOfUnity::one(x.prime()),
    }
}

/// `min_i v(x_i)` over a vector, `None` when every entry is zero.
pub fn min_valuation(xs: &[PadicRational]) -> Option<i64> {
    xs.iter().filter_map(|x| x.valuation()).min()
}

/// The ball `center + (p^radius_exp Z_p)^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    prime: u64,
    center: Vec<PadicRational>,
    radius_exp: i64,
}

impl Ball {
    pub fn new(prime: u64, center: Vec<PadicRational>, radius_exp: i64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::invalid("ball must have dimension >= 1"));
        }
        if center.iter().any(|c| c.prime() != prime) {
            return Err(Error::invalid("ball center uses a different prime"));
        }
        Ok(Ball {
            prime,
            center,
            radius_exp,
        })
    }

    /// `p^e Z_p^n`.
    pub fn centered(prime: u64, n: usize, radius_exp: i64) -> Self {
        Ball {
            prime,
            center: vec![PadicRational::zero(prime); n],
            radius_exp,
        }
    }

    /// `Z_p^n`.
    pub fn unit(prime: u64, n: usize) -> Self {
        Self::centered(prime, n, 0)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[PadicRational] {
        &self.center
    }

    pub fn radius_exp(&self) -> i64 {
        self.radius_exp
    }

    /// Haar volume `p^{-n e}` with `vol(Z_p^n) = 1`.
    pub fn volume(&self) -> BigRational {
        p_power(self.prime, -(self.dim() as i64) * self.radius_exp)
    }

    pub fn contains(&self, x: &[PadicRational]) -> bool {
        assert_eq!(x.len(), self.dim());
        x.iter()
            .zip(&self.center)
            .all(|(xi, ci)| (xi - ci).valuation().is_none_or(|v| v >= self.radius_exp))
    }

    /// True when the two balls share a point; ultrametric balls are then nested.
    pub fn intersects(&self, other: &Ball) -> bool {
        let e = self.radius_exp.min(other.radius_exp);
        self.center
            .iter()
            .zip(&other.center)
            .all(|(a, b)| (a - b).valuation().is_none_or(|v| v >= e))
    }

    pub fn intersection(&self, other: &Ball) -> Option<Ball> {
        if !self.intersects(other) {
            return None;
        }
        match self.radius_exp.cmp(&other.radius_exp) {
            Ordering::Less => Some(other.clone()),
            _ => Some(self.clone()),
        }
    }

    /// `other ⊆ self`.
    pub fn contains_ball(&self, other: &Ball) -> bool {
        other.radius_exp >= self.radius_exp && self.contains(&other.center)
    }

    /// Same underlying set, regardless of the chosen center.
    pub fn same_set(&self, other: &Ball) -> bool {
        self.radius_exp == other.radius_exp && self.intersects(other)
    }

    /// The `p^n` balls of radius exponent `e + 1` partitioning this ball.
    pub fn children(&self) -> Vec<Ball> {
        let n = self.dim();
        let count = (self.prime as usize).pow(n as u32);
        (0..count)
            .map(|mut idx| {
                let mut center = self.center.clone();
                for c in center.iter_mut().rev() {
                    let digit = PadicRational::from_int(self.prime, (idx % self.prime as usize) as i64);
                    *c = &*c + &digit.mul_p_pow(self.radius_exp);
                    idx /= self.prime as usize;
                }
                Ball {
                    prime: self.prime,
                    center,
                    radius_exp: self.radius_exp + 1,
                }
            })
            .collect()
    }

    /// True when every coordinate of the ball lies in `Z_p`.
    pub fn is_integral(&self) -> bool {
        self.radius_exp >= 0 && self.center.iter().all(|c| c.is_integral())
    }

    /// Projection onto the first `k` coordinates.
    pub fn project(&self, k: usize) -> Ball {
        Ball {
            prime: self.prime,
            center: self.center[..k].to_vec(),
            radius_exp: self.radius_exp,
        }
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ball")?;
        for c in &self.center {
            write!(f, " {c}")?;
        }
        write!(f, " {}", self.radius_exp)
    }
}

/// Representatives of the cosets of `(p^m Z_p)^n` contained in a ball,
/// in lexicographic order of their digit vectors.
#[derive(Clone, Debug)]
pub struct ResidueIter {
    ball: Ball,
    per_axis: u64,
    digits: Vec<u64>,
    remaining: u64,
}

impl Iterator for ResidueIter {
    type Item = Vec<PadicRational>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let p = self.ball.prime;
        let e = self.ball.radius_exp;
        let point = self
            .ball
            .center
            .iter()
            .zip(&self.digits)
            .map(|(c, &k)| c + &PadicRational::from_parts(p, BigInt::from(k), e))
            .collect();
        for d in self.digits.iter_mut().rev() {
            *d += 1;
            if *d < self.per_axis {
                break;
            }
            *d = 0;
        }
        Some(point)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }
}

/// Enumerates the residue classes mod `p^m` of a ball: exactly
/// `p^{n max(0, m - e)}` representatives.
pub fn enumerate_residues(ball: &Ball, m: i64, cap: u64) -> Result<ResidueIter> {
    let depth = (m - ball.radius_exp).max(0);
    let n = ball.dim() as u32;
    let overflow = || {
        Error::limit(
            "residue enumeration",
            format!("{}^{}", ball.prime, depth as u128 * n as u128),
            cap,
        )
    };
    let depth32 = u32::try_from(depth).map_err(|_| overflow())?;
    let per_axis = checked_pow(ball.prime, depth32).ok_or_else(overflow)?;
    let total = checked_pow(per_axis, n).ok_or_else(overflow)?;
    if total > cap {
        return Err(Error::limit("residue enumeration", total, cap));
    }
    Ok(ResidueIter {
        ball: ball.clone(),
        per_axis,
        digits: vec![0; ball.dim()],
        remaining: total,
    })
}
