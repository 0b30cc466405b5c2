use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use padic_dispersion::newton::{
    beta_and_t0, newton_facets, quasi_homogeneous_detect, NewtonPolyhedron, DEFAULT_QH_BOUND,
};
use padic_dispersion::SparsePolynomial;
use proptest::prelude::*;

type Exp = Vec<u32>;

fn poly_of(m: usize, support: &BTreeSet<Exp>) -> SparsePolynomial {
    SparsePolynomial::new(m, support.iter().map(|e| (e.clone(), BigInt::from(1)))).unwrap()
}

fn rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, piv);
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = &a[i][c] / &a[r][c];
                for k in 0..cols {
                    let t = &f * &a[r][k];
                    a[i][k] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

fn dot(a: &[u64], e: &[u32]) -> u64 {
    a.iter().zip(e).map(|(&x, &y)| x * y as u64).sum()
}

/// Every primitive positive normal up to `bound` whose minimising face spans
/// a hyperplane: the compact facets, found by exhaustion.
fn brute_compact_facets(m: usize, support: &BTreeSet<Exp>, bound: u64) -> BTreeSet<(Vec<u64>, u64)> {
    let mut out = BTreeSet::new();
    let total = bound.pow(m as u32);
    for idx in 0..total {
        let mut a = Vec::with_capacity(m);
        let mut rest = idx;
        for _ in 0..m {
            a.push(rest % bound + 1);
            rest /= bound;
        }
        if a.iter().fold(0u64, |g, &x| g.gcd(&x)) != 1 {
            continue;
        }
        let min = support.iter().map(|e| dot(&a, e)).min().unwrap();
        let face: Vec<&Exp> = support.iter().filter(|e| dot(&a, e) == min).collect();
        let diffs: Vec<Vec<i64>> = face[1..]
            .iter()
            .map(|e| e.iter().zip(face[0]).map(|(&x, &y)| x as i64 - y as i64).collect())
            .collect();
        if rank(&diffs) == m - 1 {
            out.insert((a, min));
        }
    }
    out
}

fn computed_compact(poly: &NewtonPolyhedron) -> BTreeSet<(Vec<u64>, u64)> {
    poly.compact_facets()
        .map(|f| (f.normal().to_vec(), f.support_value()))
        .collect()
}

fn factorial(k: u64) -> u64 {
    (1..=k).product()
}

fn support_strategy() -> impl Strategy<Value = (usize, BTreeSet<Exp>)> {
    (1usize..=3).prop_flat_map(|m| {
        let max_deg = if m == 3 { 4u32 } else { 6 };
        let exp = prop::collection::vec(0..=max_deg, m).prop_filter("nonconstant", |e| e.iter().any(|&k| k > 0));
        (Just(m), prop::collection::btree_set(exp, 1..6))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn facets_match_brute_force((m, support) in support_strategy()) {
        let f = poly_of(m, &support);
        let poly = newton_facets(&f).unwrap();
        for facet in poly.facets() {
            let a = facet.normal();
            prop_assert!(support.iter().all(|e| dot(a, e) >= facet.support_value()));
            let on: Vec<&Exp> = support.iter().filter(|e| dot(a, e) == facet.support_value()).collect();
            prop_assert!(!on.is_empty());
        }
        let d = support.iter().flat_map(|e| e.iter().copied()).max().unwrap() as u64;
        let bound = (factorial(m as u64 - 1) * d.pow(m as u32 - 1)).max(d).max(1);
        prop_assert_eq!(brute_compact_facets(m, &support, bound), computed_compact(&poly));
    }

    #[test]
    fn interior_monomials_change_nothing((m, support) in support_strategy(), pick in 0usize..6, bump in 1u32..3) {
        let f = poly_of(m, &support);
        let base = support.iter().nth(pick % support.len()).unwrap();
        let mut bigger = support.clone();
        bigger.insert(base.iter().map(|k| k + bump).collect());
        let g = poly_of(m, &bigger);
        let pf = newton_facets(&f).unwrap();
        let pg = newton_facets(&g).unwrap();
        let key = |p: &NewtonPolyhedron| -> BTreeSet<(Vec<u64>, u64)> {
            p.facets().iter().map(|f| (f.normal().to_vec(), f.support_value())).collect()
        };
        prop_assert_eq!(key(&pf), key(&pg));
        prop_assert_eq!(beta_and_t0(&pf).ok(), beta_and_t0(&pg).ok());
    }

    #[test]
    fn t0_lies_on_the_boundary((m, support) in support_strategy()) {
        let f = poly_of(m, &support);
        let poly = newton_facets(&f).unwrap();
        let Ok((_, t0)) = beta_and_t0(&poly) else { return Ok(()); };
        let value = |a: &[u64]| -> BigRational {
            a.iter().zip(&t0).map(|(&x, t)| t * BigRational::from_integer(x.into())).sum()
        };
        let mut touches = false;
        for facet in poly.facets() {
            let lhs = value(facet.normal());
            let rhs = BigRational::from_integer(facet.support_value().into());
            prop_assert!(lhs >= rhs);
            touches |= lhs == rhs && facet.support_value() > 0;
        }
        prop_assert!(touches);
    }

    #[test]
    fn quasi_homogeneous_beta(
        alpha in prop::collection::vec(1u64..=3, 1..=3),
        c in 1u64..=2,
        extra in prop::collection::vec(prop::collection::vec(0u32..=6, 3), 0..4),
    ) {
        let m = alpha.len();
        let d = alpha.iter().fold(1u64, |l, &a| l.lcm(&a)) * c;
        let mut support: BTreeSet<Exp> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { (d / alpha[i]) as u32 } else { 0 }).collect())
            .collect();
        for e in extra {
            let e: Exp = e[..m].to_vec();
            if dot(&alpha, &e) == d {
                support.insert(e);
            }
        }
        let f = poly_of(m, &support);
        let witness = quasi_homogeneous_detect(&f, DEFAULT_QH_BOUND).unwrap();
        prop_assert!(witness.is_some());
        let w = witness.unwrap();
        let (beta, _) = beta_and_t0(&newton_facets(&f).unwrap()).unwrap();
        prop_assert_eq!(beta, w.beta());
        prop_assert!(!w.beta().is_negative());
    }
}

#[test]
fn reference_exponents() {
    let cases = [
        ("x1^2+x2^2", (1, 1)),
        ("x^2", (1, 2)),
        ("x^3", (1, 3)),
        ("x^4", (1, 4)),
        ("x^5", (1, 5)),
        ("x1^2+x2^3", (5, 6)),
    ];
    for (text, (num, den)) in cases {
        let f = padic_dispersion::parse_polynomial(text).unwrap();
        let (beta, _) = beta_and_t0(&newton_facets(&f).unwrap()).unwrap();
        assert_eq!(beta, BigRational::new(num.into(), den.into()), "{text}");
    }
}
