//! Schwartz-Bruhat functions (finite combinations of ball indicators) and
//! their exact Fourier transforms.
//!
//! The forward transform is `Fg(ξ) = ∫ g(x) Ψ(-[x, ξ]) |dx|` and the inverse
//! uses `Ψ(+[x, ξ])`, with `[x, ξ] = Σ x_i ξ_i`. For a single ball,
//! `F 1_{a + p^e Z_p^n}(ξ) = Ψ(-[a, ξ]) p^{-ne} 1_{‖ξ‖ ≤ p^e}`.

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::padic::{character, Ball, PadicRational};

/// `[x, y] = Σ x_i y_i`.
pub fn pairing(x: &[PadicRational], y: &[PadicRational]) -> PadicRational {
    let p = x.first().map_or(2, |v| v.prime());
    x.iter()
        .zip(y)
        .fold(PadicRational::zero(p), |acc, (a, b)| &acc + &(a * b))
}

fn volume_f64(b: &Ball) -> f64 {
    b.volume().to_f64().unwrap_or(0.0)
}

/// `Σ c_j 1_{B_j}` with pairwise disjoint balls.
#[derive(Clone, Debug, PartialEq)]
pub struct SchwartzBruhatFn {
    prime: u64,
    n: usize,
    terms: Vec<(Ball, Complex64)>,
}

impl SchwartzBruhatFn {
    pub fn new(prime: u64, n: usize, terms: Vec<(Ball, Complex64)>) -> Result<Self> {
        for (b, _) in &terms {
            if b.prime() != prime || b.dim() != n {
                return Err(Error::invalid(format!("ball {b} does not live in Q_{prime}^{n}")));
            }
        }
        for i in 0..terms.len() {
            for j in 0..i {
                if terms[i].0.intersects(&terms[j].0) {
                    return Err(Error::invalid(format!(
                        "balls {} and {} overlap",
                        terms[j].0, terms[i].0
                    )));
                }
            }
        }
        Ok(SchwartzBruhatFn { prime, n, terms })
    }

    /// `1_B`.
    pub fn indicator(ball: Ball) -> Self {
        SchwartzBruhatFn {
            prime: ball.prime(),
            n: ball.dim(),
            terms: vec![(ball, Complex64::new(1.0, 0.0))],
        }
    }

    /// Rewrites a sum of possibly nested ball indicators as a disjoint one.
    pub fn from_overlapping(prime: u64, n: usize, terms: Vec<(Ball, Complex64)>) -> Result<Self> {
        let mut out = Vec::new();
        let mut remaining = terms;
        while let Some(first) = remaining.first().cloned() {
            let top = remaining
                .iter()
                .filter(|(b, _)| b.contains_ball(&first.0))
                .min_by_key(|(b, _)| b.radius_exp())
                .map(|(b, _)| b.clone())
                .unwrap_or(first.0);
            let (inside, outside): (Vec<_>, Vec<_>) =
                remaining.into_iter().partition(|(b, _)| top.contains_ball(b));
            split_into(&top, Complex64::zero(), inside, &mut out);
            remaining = outside;
        }
        Self::new(prime, n, out)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Ball, Complex64)] {
        &self.terms
    }

    pub fn eval(&self, x: &[PadicRational]) -> Complex64 {
        self.terms
            .iter()
            .find(|(b, _)| b.contains(x))
            .map_or(Complex64::zero(), |(_, c)| *c)
    }

    /// `c · g`.
    pub fn scale(&self, c: Complex64) -> Self {
        SchwartzBruhatFn {
            prime: self.prime,
            n: self.n,
            terms: self.terms.iter().map(|(b, v)| (b.clone(), v * c)).collect(),
        }
    }

    /// `x ↦ g(x - a)`.
    pub fn translate(&self, a: &[PadicRational]) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(b, v)| {
                let center = b.center().iter().zip(a).map(|(c, ai)| c + ai).collect();
                (Ball::new(self.prime, center, b.radius_exp()).expect("same prime"), *v)
            })
            .collect();
        SchwartzBruhatFn {
            prime: self.prime,
            n: self.n,
            terms,
        }
    }

    /// `‖g‖_ρ`, exact up to the final floating point step; `ρ = ∞` gives
    /// the largest coefficient modulus.
    pub fn lp_norm(&self, rho: f64) -> f64 {
        if rho.is_infinite() {
            return self.terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        }
        let s: f64 = self
            .terms
            .iter()
            .map(|(b, c)| c.norm().powf(rho) * volume_f64(b))
            .sum();
        s.powf(1.0 / rho)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    /// Largest radius exponent `e` with `supp Fg ⊆ {‖ξ‖ ≤ p^e}`, i.e. the
    /// negated finest scale of `g`.
    pub fn frequency_bound(&self) -> Option<i64> {
        self.terms.iter().map(|(b, _)| b.radius_exp()).max()
    }
}

fn split_into(
    ball: &Ball,
    base: Complex64,
    inner: Vec<(Ball, Complex64)>,
    out: &mut Vec<(Ball, Complex64)>,
) {
    let mut value = base;
    let mut rest = Vec::new();
    for (b, c) in inner {
        if b.same_set(ball) {
            value += c;
        } else {
            rest.push((b, c));
        }
    }
    if rest.is_empty() {
        if value != Complex64::zero() {
            out.push((ball.clone(), value));
        }
        return;
    }
    for child in ball.children() {
        let (mine, others): (Vec<_>, Vec<_>) =
            rest.into_iter().partition(|(b, _)| child.contains_ball(b));
        rest = others;
        split_into(&child, value, mine, out);
    }
}

/// Direction of a Fourier transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    /// `Ψ(-[x, ξ])`.
    Forward,
    /// `Ψ(+[x, ξ])`.
    Inverse,
}

/// One term `c · Ψ(-[b, ξ]) · 1_B(ξ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulatedTerm {
    pub ball: Ball,
    pub modulation: Vec<PadicRational>,
    pub coeff: Complex64,
}

impl ModulatedTerm {
    pub fn eval(&self, xi: &[PadicRational]) -> Complex64 {
        if !self.ball.contains(xi) {
            return Complex64::zero();
        }
        self.coeff * character(&-&pairing(&self.modulation, xi)).value()
    }
}

/// Sum of modulated ball indicators; the image of `fourier_sb`. The balls
/// may be nested.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulatedSBFn {
    prime: u64,
    n: usize,
    terms: Vec<ModulatedTerm>,
}

impl ModulatedSBFn {
    pub fn new(prime: u64, n: usize, terms: Vec<ModulatedTerm>) -> Result<Self> {
        for t in &terms {
            if t.ball.prime() != prime || t.ball.dim() != n || t.modulation.len() != n {
                return Err(Error::invalid("term dimension or prime mismatch"));
            }
        }
        Ok(ModulatedSBFn { prime, n, terms })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[ModulatedTerm] {
        &self.terms
    }

    pub fn eval(&self, xi: &[PadicRational]) -> Complex64 {
        self.terms.iter().map(|t| t.eval(xi)).sum()
    }

    /// `‖h‖_2`, from the exact pairwise integrals
    /// `∫_{B_j ∩ B_k} Ψ(-[b_j - b_k, ξ]) dξ`.
    pub fn l2_norm(&self) -> f64 {
        let mut total = Complex64::zero();
        for tj in &self.terms {
            for tk in &self.terms {
                let Some(ball) = tj.ball.intersection(&tk.ball) else {
                    continue;
                };
                let d: Vec<PadicRational> = tj
                    .modulation
                    .iter()
                    .zip(&tk.modulation)
                    .map(|(a, b)| a - b)
                    .collect();
                total += tj.coeff * tk.coeff.conj() * ball_character_integral(&ball, &d);
            }
        }
        total.re.max(0.0).sqrt()
    }
}

/// `∫_B Ψ(-[d, ξ]) dξ`: zero unless `‖d‖ ≤ p^{e}` for `B = c + p^e Z_p^n`,
/// in which case it is `Ψ(-[d, c]) vol(B)`.
pub fn ball_character_integral(ball: &Ball, d: &[PadicRational]) -> Complex64 {
    let e = ball.radius_exp();
    if d.iter().any(|x| x.valuation().is_some_and(|v| v < -e)) {
        return Complex64::zero();
    }
    character(&-&pairing(d, ball.center())).value() * volume_f64(ball)
}

/// Exact Fourier transform of `g`.
pub fn fourier_sb(g: &SchwartzBruhatFn, sign: Sign) -> ModulatedSBFn {
    let p = g.prime;
    let terms = g
        .terms
        .iter()
        .map(|(b, c)| {
            let modulation = match sign {
                Sign::Forward => b.center().to_vec(),
                Sign::Inverse => b.center().iter().map(|x| -x).collect(),
            };
            let vol = volume_f64(b);
            ModulatedTerm {
                ball: Ball::centered(p, g.n, -b.radius_exp()),
                modulation,
                coeff: c * vol,
            }
        })
        .collect();
    ModulatedSBFn {
        prime: p,
        n: g.n,
        terms,
    }
}

/// Transform of `h` in the direction opposite to `sign`; the balls of `h`
/// must contain the origin. `inverse(&fourier_sb(g, s), s) = g`.
pub fn inverse(h: &ModulatedSBFn, sign: Sign) -> Result<SchwartzBruhatFn> {
    let p = h.prime;
    let zero = vec![PadicRational::zero(p); h.n];
    let mut terms = Vec::with_capacity(h.terms.len());
    for t in &h.terms {
        if !t.ball.contains(&zero) {
            return Err(Error::invalid(format!(
                "inverse transform needs balls around the origin, got {}",
                t.ball
            )));
        }
        // ∫_{p^k Z^n} Ψ(±[x - b', ξ]) dξ = p^{-nk} 1[‖x - b'‖ ≤ p^k].
        let center: Vec<PadicRational> = match sign {
            Sign::Forward => t.modulation.clone(),
            Sign::Inverse => t.modulation.iter().map(|x| -x).collect(),
        };
        let k = t.ball.radius_exp();
        let ball = Ball::new(p, center, -k)?;
        terms.push((ball, t.coeff * volume_f64(&t.ball)));
    }
    SchwartzBruhatFn::from_overlapping(p, h.n, terms)
}

/// Random disjoint Schwartz-Bruhat function with up to `max_terms` balls,
/// radius exponents in `e_range`, centers in `p^{e-2} Z` and coefficients in
/// the unit square.
pub fn random_sb<R: Rng>(
    rng: &mut R,
    prime: u64,
    n: usize,
    max_terms: usize,
    e_range: std::ops::RangeInclusive<i64>,
) -> SchwartzBruhatFn {
    let count = rng.gen_range(1..=max_terms.max(1));
    let mut terms: Vec<(Ball, Complex64)> = Vec::new();
    let mut attempts = 0;
    while terms.len() < count && attempts < 200 {
        attempts += 1;
        let e = rng.gen_range(e_range.clone());
        let center: Vec<PadicRational> = (0..n)
            .map(|_| {
                let u = rng.gen_range(0..(prime * prime)) as i64;
                PadicRational::from_int(prime, u).mul_p_pow(e - 2)
            })
            .collect();
        let ball = Ball::new(prime, center, e).expect("valid prime");
        if terms.iter().any(|(b, _)| b.intersects(&ball)) {
            continue;
        }
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        terms.push((ball, c));
    }
    SchwartzBruhatFn::new(prime, n, terms).expect("disjoint by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pr(p: u64, s: &str) -> PadicRational {
        PadicRational::parse(p, s).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn norms() {
        let g = SchwartzBruhatFn::indicator(Ball::unit(3, 1));
        assert_eq!(g.lp_norm(1.5), 1.0);
        let c = Complex64::new(2.0, 0.0);
        let g = SchwartzBruhatFn::new(3, 1, vec![(Ball::centered(3, 1, 1), c)]).unwrap();
        for rho in [1.0, 2.0, 3.5] {
            assert!((g.lp_norm(rho) - 2.0 * 3f64.powf(-1.0 / rho)).abs() < 1e-15);
        }
        let g = SchwartzBruhatFn::new(
            3,
            1,
            vec![
                (Ball::unit(3, 1), one()),
                (Ball::new(3, vec![pr(3, "1/3")], 1).unwrap(), one()),
            ],
        )
        .unwrap();
        assert!((g.l2_norm() - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(g.lp_norm(f64::INFINITY), 1.0);
    }

    #[test]
    fn overlapping_balls_rejected() {
        let err = SchwartzBruhatFn::new(
            3,
            1,
            vec![(Ball::unit(3, 1), one()), (Ball::centered(3, 1, 1), one())],
        );
        assert!(err.is_err());
    }

    #[test]
    fn transform_examples() {
        let h = fourier_sb(&SchwartzBruhatFn::indicator(Ball::unit(3, 2)), Sign::Forward);
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].ball, Ball::unit(3, 2));
        assert_eq!(h.terms()[0].coeff, one());

        let h = fourier_sb(&SchwartzBruhatFn::indicator(Ball::centered(3, 1, 1)), Sign::Forward);
        assert_eq!(h.terms()[0].ball.radius_exp(), -1);
        assert!((h.terms()[0].coeff.re - 1.0 / 3.0).abs() < 1e-16);

        let b = Ball::new(3, vec![pr(3, "1")], 1).unwrap();
        let g = SchwartzBruhatFn::indicator(b);
        for sign in [Sign::Forward, Sign::Inverse] {
            let h = fourier_sb(&g, sign);
            let xi = [pr(3, "1/3")];
            let s = if sign == Sign::Forward { -1.0 } else { 1.0 };
            let expect = Complex64::from_polar(1.0 / 3.0, s * std::f64::consts::TAU / 3.0);
            assert!((h.eval(&xi) - expect).norm() < 1e-15);
            assert_eq!(h.eval(&[pr(3, "1/9")]), Complex64::zero());
        }
    }

    #[test]
    fn transform_matches_engine() {
        // Fg(ξ) against a direct character integral over each ball.
        let p = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_sb(&mut rng, p, 1, 3, -1..=1);
        let h = fourier_sb(&g, Sign::Forward);
        for xi in ["0", "1/3", "2/9", "5/27", "7"] {
            let xi = vec![pr(p, xi)];
            let direct: Complex64 = g
                .terms()
                .iter()
                .map(|(b, c)| c * ball_character_integral(b, &xi))
                .sum();
            assert!((h.eval(&xi) - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in [2, 3, 5] {
            for _ in 0..10 {
                let g = random_sb(&mut rng, p, 2, 4, -2..=2);
                let h = fourier_sb(&g, Sign::Forward);
                assert!((h.l2_norm() - g.l2_norm()).abs() < 1e-12);
                let back = inverse(&h, Sign::Forward).unwrap();
                for (b, c) in g.terms() {
                    assert!((back.eval(b.center()) - c).norm() < 1e-12);
                }
                assert!((back.l2_norm() - g.l2_norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nested_balls_are_split() {
        let p = 3;
        let g = SchwartzBruhatFn::from_overlapping(
            p,
            1,
            vec![(Ball::unit(p, 1), one()), (Ball::centered(p, 1, 2), one())],
        )
        .unwrap();
        assert_eq!(g.eval(&[pr(p, "0")]), Complex64::new(2.0, 0.0));
        assert_eq!(g.eval(&[pr(p, "3")]), one());
        assert_eq!(g.eval(&[pr(p, "1")]), one());
        assert_eq!(g.terms().len(), 5);
        assert!((g.l2_norm().powi(2) - (1.0 + 3.0 / 9.0)).abs() < 1e-15);
    }
}
