use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use padic_dispersion::engine::{integrate, EngineOptions, QpPoly};
use padic_dispersion::expsum::residue_histogram;
use padic_dispersion::padic::{character, enumerate_residues, padic_meta};
use padic_dispersion::{parse_polynomial, Ball, PadicRational};
use proptest::prelude::*;

fn padic(p: u64, a: i64, k: i64) -> PadicRational {
    PadicRational::from_int(p, a).mul_p_pow(k)
}

fn pr(p: u64) -> impl Strategy<Value = PadicRational> {
    (-100_000i64..100_000, -6i64..4).prop_map(move |(a, k)| padic(p, a, k))
}

fn additivity(p: u64) -> impl Strategy<Value = (PadicRational, PadicRational)> {
    (pr(p), pr(p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn character_is_additive_p2((x, y) in additivity(2)) {
        prop_assert_eq!(character(&(&x + &y)), &character(&x) * &character(&y));
    }

    #[test]
    fn character_is_additive_p3((x, y) in additivity(3)) {
        prop_assert_eq!(character(&(&x + &y)), &character(&x) * &character(&y));
    }

    #[test]
    fn character_is_additive_p5((x, y) in additivity(5)) {
        prop_assert_eq!(character(&(&x + &y)), &character(&x) * &character(&y));
    }

    #[test]
    fn character_is_additive_p7((x, y) in additivity(7)) {
        prop_assert_eq!(character(&(&x + &y)), &character(&x) * &character(&y));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn meta_is_multiplicative(
        p in prop::sample::select(vec![2u64, 3, 5, 7]),
        a in 1i64..50_000, b in 1i64..50_000,
        ka in -5i64..5, kb in -5i64..5,
        n in 1u32..6,
    ) {
        let x = padic(p, a, ka).to_ratio();
        let y = padic(p, b, kb).to_ratio();
        let mx = padic_meta(p, &x, n).unwrap();
        let my = padic_meta(p, &y, n).unwrap();
        let mxy = padic_meta(p, &(&x * &y), n).unwrap();
        prop_assert_eq!(mxy.valuation, Some(mx.valuation.unwrap() + my.valuation.unwrap()));
        let modulus = num_bigint::BigUint::from(p).pow(n);
        let prod = (mx.ac.unwrap() * my.ac.unwrap()) % &modulus;
        prop_assert_eq!(mxy.ac.unwrap(), prod);
        prop_assert_eq!(mxy.abs, &mx.abs * &my.abs);
    }

    #[test]
    fn residue_count_matches_volume(
        p in prop::sample::select(vec![2u64, 3, 5]),
        n in 1usize..3,
        e in -1i64..2,
        m in 0i64..3,
        c in 0i64..30,
    ) {
        let center = vec![padic(p, c, e - 1); n];
        let ball = Ball::new(p, center, e).unwrap();
        let count = enumerate_residues(&ball, m, 1_000_000).map(|it| it.count() as u64);
        let expected = ball.volume() * BigRational::from_integer(BigInt::from(p).pow((n as i64 * m) as u32));
        if expected >= BigRational::one() && expected.is_integer() {
            prop_assert_eq!(BigRational::from_integer(BigInt::from(count.unwrap())), expected);
        } else {
            // A ball smaller than the classes lies inside a single class.
            prop_assert_eq!(count.unwrap(), 1);
        }
    }
}

#[test]
fn full_residue_system_sums_to_zero() {
    let f = parse_polynomial("x").unwrap();
    for p in [2u64, 3, 5, 7] {
        for m in 1..=4 {
            let h = residue_histogram(&f, m, &Ball::unit(p, 1), 10_000).unwrap();
            assert!(h.counts().values().all(|&n| n == 1));
            assert_eq!(h.total_count(), p.pow(m));
            assert!(h.is_exact_zero());
        }
    }
}

#[test]
fn zero_phase_integrates_to_volume() {
    for p in [2u64, 3, 5] {
        let b = Ball::new(p, vec![padic(p, 1, -1), PadicRational::zero(p)], -1).unwrap();
        let r = integrate(&b, &QpPoly::zero(p, 2), &EngineOptions::default()).unwrap();
        assert_eq!(r.mass(), b.volume());
        assert!(!r.mass().is_zero());
    }
}
