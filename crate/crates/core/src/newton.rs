//! Newton polyhedra `Γ(f) = conv(⋃ (l + R_+^m))` over the support of `f`,
//! the decay exponent `β_f`, quasi-homogeneity and a mod-p non-degeneracy
//! check.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::checked_pow;
use crate::poly::{Exponent, SparsePolynomial};

/// Largest number of variables accepted by facet enumeration.
pub const MAX_VARS: usize = 4;
/// Default search bound on the weights of a quasi-homogeneity witness.
pub const DEFAULT_QH_BOUND: u64 = 32;

/// A facet `{⟨a, x⟩ = m(a)} ∩ Γ(f)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Facet {
    normal: Vec<u64>,
    support_value: u64,
    points: Vec<Exponent>,
}

impl Facet {
    /// Primitive perpendicular `a_γ`.
    pub fn normal(&self) -> &[u64] {
        &self.normal
    }

    /// `m(a_γ) = min_l ⟨a_γ, l⟩`.
    pub fn support_value(&self) -> u64 {
        self.support_value
    }

    /// `σ(a_γ) = Σ a_i`.
    pub fn weight(&self) -> u64 {
        self.normal.iter().sum()
    }

    /// Support points lying on the facet.
    pub fn points(&self) -> &[Exponent] {
        &self.points
    }

    /// Compact facets have a strictly positive normal.
    pub fn is_compact(&self) -> bool {
        self.normal.iter().all(|&a| a > 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolyhedron {
    dim: usize,
    support: Vec<Exponent>,
    facets: Vec<Facet>,
}

impl NewtonPolyhedron {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[Exponent] {
        &self.support
    }

    /// All facets, ordered by normal.
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn compact_facets(&self) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(|f| f.is_compact())
    }

    /// Whether `x` lies in `Γ(f)`, tested against every facet inequality.
    pub fn contains(&self, x: &[BigRational]) -> bool {
        self.facets.iter().all(|f| {
            let s: BigRational = f
                .normal
                .iter()
                .zip(x)
                .map(|(&a, xi)| xi * BigRational::from_integer(BigInt::from(a)))
                .sum();
            s >= BigRational::from_integer(BigInt::from(f.support_value))
        }) && x.iter().all(|xi| *xi >= BigRational::zero())
    }
}

/// Exponent vectors with nonzero coefficient.
pub fn support(f: &SparsePolynomial) -> Result<Vec<Exponent>> {
    f.check_phase()?;
    Ok(f.terms().map(|(e, _)| e.clone()).collect())
}

fn det(rows: &[Vec<i128>]) -> i128 {
    match rows.len() {
        0 => 1,
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        n => {
            let mut acc = 0;
            for c in 0..n {
                if rows[0][c] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i128>> = rows[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                    .collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                acc += sign * rows[0][c] * det(&minor);
            }
            acc
        }
    }
}

/// Rank over `Q` by fraction-free elimination.
pub(crate) fn rank(vectors: &[Vec<i128>]) -> usize {
    let mut rows: Vec<Vec<i128>> = vectors.to_vec();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pivot);
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let (a, b) = (rows[r][c], rows[i][c]);
                let g = a.gcd(&b);
                let (ma, mb) = (a / g, b / g);
                let mut gcd_row = 0i128;
                for j in 0..cols {
                    rows[i][j] = rows[i][j] * ma - rows[r][j] * mb;
                    gcd_row = gcd_row.gcd(&rows[i][j]);
                }
                if gcd_row > 1 {
                    for v in rows[i].iter_mut() {
                        *v /= gcd_row;
                    }
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Normal to the span of `m - 1` vectors in `Z^m`: the vector of signed
/// maximal minors.
fn cross(vectors: &[Vec<i128>], m: usize) -> Vec<i128> {
    (0..m)
        .map(|i| {
            let minor: Vec<Vec<i128>> = vectors
                .iter()
                .map(|v| v.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect())
                .collect();
            let d = det(&minor);
            if i % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

/// Scales a nonzero vector with entries of one sign to a primitive vector
/// in `N^m`.
fn primitive_nonnegative(v: &[i128]) -> Option<Vec<u64>> {
    if v.iter().all(|&x| x == 0) {
        return None;
    }
    let sign = if v.iter().all(|&x| x >= 0) {
        1
    } else if v.iter().all(|&x| x <= 0) {
        -1
    } else {
        return None;
    };
    let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
    Some(v.iter().map(|&x| (sign * x / g) as u64).collect())
}

fn dot(a: &[u64], l: &[u32]) -> u64 {
    a.iter().zip(l).map(|(&x, &y)| x * y as u64).sum()
}

/// Tests whether `a` supports a facet of the polyhedron spanned by `support`.
pub(crate) fn facet_for_normal(support: &[Exponent], a: &[u64]) -> Option<Facet> {
    let m = a.len();
    let support_value = support.iter().map(|l| dot(a, l)).min()?;
    let points: Vec<Exponent> = support
        .iter()
        .filter(|l| dot(a, l) == support_value)
        .cloned()
        .collect();
    let base = &points[0];
    let mut span: Vec<Vec<i128>> = points[1..]
        .iter()
        .map(|l| l.iter().zip(base).map(|(&x, &y)| x as i128 - y as i128).collect())
        .collect();
    for j in 0..m {
        if a[j] == 0 {
            let mut e = vec![0i128; m];
            e[j] = 1;
            span.push(e);
        }
    }
    if rank(&span) + 1 == m {
        Some(Facet {
            normal: a.to_vec(),
            support_value,
            points,
        })
    } else {
        None
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Facets of the Newton polyhedron of a support set.
pub fn polyhedron_of_support(dim: usize, support: &[Exponent]) -> Result<NewtonPolyhedron> {
    if dim == 0 || dim > MAX_VARS {
        return Err(Error::invalid(format!(
            "facet enumeration supports 1..={MAX_VARS} variables, got {dim}"
        )));
    }
    if support.is_empty() || support.iter().any(|l| l.len() != dim) {
        return Err(Error::invalid("support must be nonempty with matching dimension"));
    }
    let mut support: Vec<Exponent> = support.to_vec();
    support.sort();
    support.dedup();

    // Candidate hyperplanes pass through `s` support points and contain
    // `m - s` coordinate directions.
    let mut normals: BTreeSet<Vec<u64>> = BTreeSet::new();
    for s in 1..=dim {
        for pts in combinations(support.len(), s) {
            for dirs in combinations(dim, dim - s) {
                let base = &support[pts[0]];
                let mut vectors: Vec<Vec<i128>> = pts[1..]
                    .iter()
                    .map(|&i| {
                        support[i]
                            .iter()
                            .zip(base)
                            .map(|(&x, &y)| x as i128 - y as i128)
                            .collect()
                    })
                    .collect();
                for &j in &dirs {
                    let mut e = vec![0i128; dim];
                    e[j] = 1;
                    vectors.push(e);
                }
                if let Some(a) = primitive_nonnegative(&cross(&vectors, dim)) {
                    normals.insert(a);
                }
            }
        }
    }
    let facets: Vec<Facet> = normals
        .iter()
        .filter_map(|a| facet_for_normal(&support, a))
        .collect();
    Ok(NewtonPolyhedron {
        dim,
        support,
        facets,
    })
}

pub fn newton_facets(f: &SparsePolynomial) -> Result<NewtonPolyhedron> {
    let s = support(f)?;
    polyhedron_of_support(f.nvars(), &s)
}

/// `β_f = min σ(a)/m(a)` over facets with `m(a) ≠ 0`, and `T_0 = (1/β_f, …)`.
pub fn beta_and_t0(p: &NewtonPolyhedron) -> Result<(BigRational, Vec<BigRational>)> {
    let beta = p
        .facets
        .iter()
        .filter(|f| f.support_value != 0)
        .map(|f| {
            BigRational::new(
                BigInt::from(f.weight()),
                BigInt::from(f.support_value),
            )
        })
        .min()
        .ok_or_else(|| Error::Degenerate("no facet with nonzero supporting value".into()))?;
    let t = beta.recip();
    Ok((beta, vec![t; p.dim]))
}

/// `f(λ^{α_1} x_1, …) = λ^d f(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiHomogeneityWitness {
    pub alpha: Vec<u64>,
    pub degree: u64,
}

impl QuasiHomogeneityWitness {
    /// `σ(α) / d`.
    pub fn beta(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.alpha.iter().sum::<u64>()),
            BigInt::from(self.degree),
        )
    }
}

/// Smallest witness by `(d, α)` with weights in `[1, bound]`, if any.
pub fn quasi_homogeneous_detect(
    f: &SparsePolynomial,
    bound: u64,
) -> Result<Option<QuasiHomogeneityWitness>> {
    let support = support(f)?;
    let m = f.nvars();
    let mut best: Option<(u64, Vec<u64>)> = None;
    let mut alpha = vec![1u64; m];
    loop {
        let d = dot(&alpha, &support[0]);
        if d > 0 && support.iter().all(|l| dot(&alpha, l) == d) {
            let g = alpha.iter().fold(d, |g, &a| g.gcd(&a));
            if g == 1 {
                let cand = (d, alpha.clone());
                if best.as_ref().is_none_or(|b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(best.map(|(degree, alpha)| QuasiHomogeneityWitness { alpha, degree }));
            }
            i -= 1;
            if alpha[i] < bound {
                alpha[i] += 1;
                break;
            }
            alpha[i] = 1;
        }
    }
}

/// A proper face: the facets containing it, its support points, and the
/// coordinate directions of its recession cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub facets: Vec<usize>,
    pub points: Vec<Exponent>,
    pub recession: Vec<usize>,
}

impl Face {
    pub fn is_compact(&self) -> bool {
        self.recession.is_empty()
    }

    /// Dimension of the face.
    pub fn dim(&self) -> usize {
        let Some(base) = self.points.first() else {
            return 0;
        };
        let m = base.len();
        let mut span: Vec<Vec<i128>> = self.points[1..]
            .iter()
            .map(|l| l.iter().zip(base).map(|(&x, &y)| x as i128 - y as i128).collect())
            .collect();
        for &j in &self.recession {
            let mut e = vec![0i128; m];
            e[j] = 1;
            span.push(e);
        }
        rank(&span)
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self
            .points
            .iter()
            .map(|l| format!("({})", l.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{}", pts.join(" "))?;
        if !self.recession.is_empty() {
            let dirs: Vec<String> = self.recession.iter().map(|j| format!("e{}", j + 1)).collect();
            write!(f, " + cone({})", dirs.join(","))?;
        }
        Ok(())
    }
}

/// All proper faces of `P` (intersections of facets), each with `f_γ`.
pub fn face_polynomials(
    f: &SparsePolynomial,
    p: &NewtonPolyhedron,
) -> Vec<(Face, SparsePolynomial)> {
    let m = p.dim;
    let mut seen: BTreeMap<(Vec<Exponent>, Vec<usize>), Vec<usize>> = BTreeMap::new();
    let mut frontier: Vec<Vec<usize>> = (0..p.facets.len()).map(|i| vec![i]).collect();
    while let Some(set) = frontier.pop() {
        let points: Vec<Exponent> = p
            .support
            .iter()
            .filter(|l| set.iter().all(|&i| dot(&p.facets[i].normal, l) == p.facets[i].support_value))
            .cloned()
            .collect();
        if points.is_empty() {
            continue;
        }
        let recession: Vec<usize> = (0..m)
            .filter(|&j| set.iter().all(|&i| p.facets[i].normal[j] == 0))
            .collect();
        // The full facet set of a face is the set of facets containing it.
        let closure: Vec<usize> = (0..p.facets.len())
            .filter(|&i| {
                let fa = &p.facets[i];
                points.iter().all(|l| dot(&fa.normal, l) == fa.support_value)
                    && recession.iter().all(|&j| fa.normal[j] == 0)
            })
            .collect();
        let key = (points, recession);
        if seen.contains_key(&key) {
            continue;
        }
        for i in 0..p.facets.len() {
            if !closure.contains(&i) {
                let mut next = closure.clone();
                next.push(i);
                next.sort_unstable();
                frontier.push(next);
            }
        }
        seen.insert(key, closure);
    }
    let mut faces: Vec<(Face, SparsePolynomial)> = seen
        .into_iter()
        .map(|((points, recession), facets)| {
            let terms: Vec<(Exponent, BigInt)> = points
                .iter()
                .map(|l| (l.clone(), f.coefficient(l).cloned().unwrap_or_default()))
                .collect();
            let poly = SparsePolynomial::new(m, terms).expect("subset of a valid polynomial");
            (
                Face {
                    facets,
                    points,
                    recession,
                },
                poly,
            )
        })
        .collect();
    faces.sort_by(|a, b| {
        b.0.dim()
            .cmp(&a.0.dim())
            .then_with(|| a.0.points.cmp(&b.0.points))
            .then_with(|| a.0.recession.cmp(&b.0.recession))
    });
    faces
}

/// Outcome of the mod-p non-degeneracy check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Nondegeneracy {
    /// Both conditions hold for the reduction mod p, hence for `f`.
    Certified,
    /// A witness point in `F_p^m` violating one of the conditions.
    DegenerateModP { face: Option<String>, point: Vec<u64> },
    /// The reduction loses information needed to decide.
    Indeterminate(String),
}

impl fmt::Display for Nondegeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nondegeneracy::Certified => write!(f, "certified"),
            Nondegeneracy::DegenerateModP { .. } => write!(f, "degenerate-mod-p"),
            Nondegeneracy::Indeterminate(_) => write!(f, "indeterminate"),
        }
    }
}

/// Small-modulus evaluation for brute force over `F_p^m`.
struct ModPoly {
    terms: Vec<(Exponent, u64)>,
}

impl ModPoly {
    fn new(f: &SparsePolynomial, p: u64) -> ModPoly {
        let terms = f
            .reduce_mod(p)
            .terms()
            .map(|(e, c)| {
                let r = c.mod_floor(&BigInt::from(p));
                (e.clone(), u64::try_from(r).expect("reduced"))
            })
            .filter(|(_, c)| *c != 0)
            .collect();
        ModPoly { terms }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn eval(&self, x: &[u64], p: u64) -> u64 {
        let mut acc = 0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (&k, &xi) in e.iter().zip(x) {
                for _ in 0..k {
                    t = t * xi % p;
                }
            }
            acc = (acc + t) % p;
        }
        acc
    }
}

fn points_mod_p(p: u64, m: usize, cap: u64) -> Result<impl Iterator<Item = Vec<u64>>> {
    let count = checked_pow(p, m as u32)
        .filter(|&c| c <= cap)
        .ok_or_else(|| Error::limit("points of F_p^m", format!("{p}^{m}"), cap))?;
    Ok((0..count).map(move |mut idx| {
        let mut x = vec![0u64; m];
        for slot in x.iter_mut().rev() {
            *slot = idx % p;
            idx /= p;
        }
        x
    }))
}

/// Sufficient mod-p criterion: `∇f̄` has no nonzero zero in `F_p^m` and no
/// proper face polynomial `f̄_γ` has a singular zero in `(F_p^×)^m`.
pub fn nondegeneracy_mod_p(f: &SparsePolynomial, p: u64, cap: u64) -> Result<Nondegeneracy> {
    let poly = newton_facets(f)?;
    let m = f.nvars();
    let grad: Vec<ModPoly> = f.gradient().iter().map(|g| ModPoly::new(g, p)).collect();
    if grad.iter().all(ModPoly::is_zero) {
        return Ok(Nondegeneracy::Indeterminate("gradient vanishes identically mod p".into()));
    }
    for x in points_mod_p(p, m, cap)? {
        if x.iter().any(|&v| v != 0) && grad.iter().all(|g| g.eval(&x, p) == 0) {
            return Ok(Nondegeneracy::DegenerateModP {
                face: None,
                point: x,
            });
        }
    }
    for (face, fg) in face_polynomials(f, &poly) {
        let fbar = ModPoly::new(&fg, p);
        if fbar.is_zero() {
            return Ok(Nondegeneracy::Indeterminate(format!(
                "face polynomial on {face} vanishes mod p"
            )));
        }
        let dg: Vec<ModPoly> = fg.gradient().iter().map(|g| ModPoly::new(g, p)).collect();
        for x in points_mod_p(p, m, cap)? {
            if x.iter().all(|&v| v != 0)
                && fbar.eval(&x, p) == 0
                && dg.iter().all(|g| g.eval(&x, p) == 0)
            {
                return Ok(Nondegeneracy::DegenerateModP {
                    face: Some(face.to_string()),
                    point: x,
                });
            }
        }
    }
    Ok(Nondegeneracy::Certified)
}

/// Exact rational `1/β_f`, convenient for reporting.
pub fn t0_coordinate(beta: &BigRational) -> BigRational {
    if beta.is_zero() {
        BigRational::one()
    } else {
        beta.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::DEFAULT_CAP;
    use crate::poly::parse_polynomial;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    fn compact(f: &str) -> Vec<(Vec<u64>, u64, u64)> {
        let p = newton_facets(&parse_polynomial(f).unwrap()).unwrap();
        p.compact_facets()
            .map(|f| (f.normal().to_vec(), f.support_value(), f.weight()))
            .collect()
    }

    #[test]
    fn support_sets() {
        let s = support(&parse_polynomial("x1^2 + x2^3").unwrap()).unwrap();
        assert_eq!(s, vec![vec![0, 3], vec![2, 0]]);
        assert!(support(&parse_polynomial("x + 1").unwrap()).is_err());
    }

    #[test]
    fn facets_of_examples() {
        assert_eq!(compact("x1^2 + x2^2"), vec![(vec![1, 1], 2, 2)]);
        assert_eq!(compact("x1^2 + x2^3"), vec![(vec![3, 2], 6, 5)]);
        assert_eq!(compact("x^4"), vec![(vec![1], 4, 1)]);
        let p = newton_facets(&parse_polynomial("x1^2 + x2^2").unwrap()).unwrap();
        let coord: Vec<_> = p.facets().iter().filter(|f| !f.is_compact()).collect();
        assert_eq!(coord.len(), 2);
        assert!(coord.iter().all(|f| f.support_value() == 0));
    }

    #[test]
    fn beta_values() {
        let b = |f: &str| beta_and_t0(&newton_facets(&parse_polynomial(f).unwrap()).unwrap()).unwrap();
        assert_eq!(b("x1^2 + x2^2"), (rat(1, 1), vec![rat(1, 1); 2]));
        assert_eq!(b("x^3"), (rat(1, 3), vec![rat(3, 1)]));
        assert_eq!(b("x1^2 + x2^3"), (rat(5, 6), vec![rat(6, 5); 2]));
        assert_eq!(b("x1*x2").0, rat(1, 1));
    }

    #[test]
    fn three_variable_polyhedron() {
        let p = newton_facets(&parse_polynomial("x1^2 + x2^3 + x3^6").unwrap()).unwrap();
        let c: Vec<_> = p.compact_facets().collect();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].normal(), &[3, 2, 1]);
        assert_eq!(c[0].support_value(), 6);
        assert_eq!(beta_and_t0(&p).unwrap().0, rat(1, 1));
    }

    #[test]
    fn quasi_homogeneity() {
        let q = |f: &str| quasi_homogeneous_detect(&parse_polynomial(f).unwrap(), 32).unwrap();
        assert_eq!(
            q("x1^2 + x2^2"),
            Some(QuasiHomogeneityWitness { alpha: vec![1, 1], degree: 2 })
        );
        assert_eq!(
            q("x1^2 + x2^3"),
            Some(QuasiHomogeneityWitness { alpha: vec![3, 2], degree: 6 })
        );
        assert_eq!(q("x1^2 + x2^2 + x1*x2^3"), None);
    }

    #[test]
    fn faces_of_examples() {
        let f = parse_polynomial("x1^2 + x2^3").unwrap();
        let p = newton_facets(&f).unwrap();
        let faces = face_polynomials(&f, &p);
        let compact_facet = faces
            .iter()
            .find(|(face, _)| face.is_compact() && face.dim() == 1)
            .unwrap();
        assert_eq!(compact_facet.1, f);
        let vertex = faces
            .iter()
            .find(|(face, _)| face.is_compact() && face.points == vec![vec![2, 0]])
            .unwrap();
        assert_eq!(vertex.1, parse_polynomial("x1^2").unwrap().embed(0, 2).unwrap());
    }

    #[test]
    fn nondegeneracy_examples() {
        let nd = |f: &str, p| nondegeneracy_mod_p(&parse_polynomial(f).unwrap(), p, DEFAULT_CAP).unwrap();
        assert_eq!(nd("x1^2 + x2^2", 3), Nondegeneracy::Certified);
        assert!(matches!(
            nd("x1^2 + 2*x1*x2 + x2^2", 3),
            Nondegeneracy::DegenerateModP { .. }
        ));
        assert!(matches!(nd("x^2", 2), Nondegeneracy::Indeterminate(_)));
        assert_eq!(nd("x^3", 7), Nondegeneracy::Certified);
    }

    #[test]
    fn rank_and_cross() {
        assert_eq!(rank(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(rank(&[vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]]), 2);
        assert_eq!(cross(&[vec![-2, 3]], 2), vec![3, 2]);
    }
}
