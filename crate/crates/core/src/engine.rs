//! Exact evaluation of `∫_B Ψ(G(x)) |dx|` for polynomials `G` with
//! coefficients in `Z[1/p]` and balls `B`.
//!
//! After the change of variables `x = c + p^e y` the integrand is
//! `exp(2πi H(y) / p^L)` for an integer polynomial `H`, and `H mod p^L`
//! depends on `y_i` only modulo `p^{s_i}`, where `s_i` is the largest
//! denominator exponent among the terms containing `y_i`. The integral is
//! therefore a finite average over a box of residues, recorded as an integer
//! histogram of `H(y) mod p^L`. Variables that never share a monomial are
//! enumerated separately and their histograms convolved.
//!
//! Only integer counts are accumulated in parallel; the single complex
//! evaluation runs in ascending residue order, so results do not depend on
//! the number of worker threads.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::padic::{checked_pow, Ball, PadicRational, DEFAULT_CAP};
use crate::poly::{Exponent, SparsePolynomial};

/// Histograms over moduli up to this size are stored densely.
const DENSE_LIMIT: u64 = 1 << 22;
/// Points per parallel work item.
const CHUNK: u64 = 1 << 12;
/// Below this many points a block is enumerated on the calling thread.
const PARALLEL_THRESHOLD: u64 = 1 << 15;

/// Polynomial with coefficients in `Z[1/p]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QpPoly {
    prime: u64,
    nvars: usize,
    terms: BTreeMap<Exponent, PadicRational>,
}

impl QpPoly {
    pub fn zero(prime: u64, nvars: usize) -> Self {
        QpPoly {
            prime,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    /// `scale * f`.
    pub fn from_poly(prime: u64, f: &SparsePolynomial, scale: &PadicRational) -> Self {
        let mut q = Self::zero(prime, f.nvars());
        for (e, c) in f.terms() {
            q.add_term(e.clone(), &(&PadicRational::from_bigint(prime, c.clone()) * scale));
        }
        q
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_term(&mut self, e: Exponent, c: &PadicRational) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let slot = self
            .terms
            .entry(e)
            .or_insert_with(|| PadicRational::zero(self.prime));
        *slot = &*slot + c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    /// Adds `Σ coeffs[i] x_i`.
    pub fn add_linear(&mut self, coeffs: &[PadicRational]) {
        assert_eq!(coeffs.len(), self.nvars);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; self.nvars];
            e[i] = 1;
            self.add_term(e, c);
        }
    }

    pub fn add_constant(&mut self, c: &PadicRational) {
        self.add_term(vec![0; self.nvars], c);
    }

    pub fn add_poly(&mut self, other: &QpPoly) {
        for (e, c) in &other.terms {
            self.add_term(e.clone(), c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &PadicRational)> {
        self.terms.iter()
    }

    pub fn constant(&self) -> PadicRational {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(|| PadicRational::zero(self.prime))
    }

    pub fn eval(&self, x: &[PadicRational]) -> PadicRational {
        let mut acc = PadicRational::zero(self.prime);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (&k, xi) in e.iter().zip(x) {
                if k > 0 {
                    t = &t * &xi.pow(k);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Smallest coefficient valuation among nonconstant terms.
    pub fn min_nonconstant_valuation(&self) -> Option<i64> {
        self.terms
            .iter()
            .filter(|(e, _)| e.iter().any(|&k| k > 0))
            .filter_map(|(_, c)| c.valuation())
            .min()
    }

    /// The polynomial in `y` obtained from `x = center + p^e y`.
    pub fn substitute_ball(&self, center: &[PadicRational], e: i64) -> QpPoly {
        assert_eq!(center.len(), self.nvars);
        let p = self.prime;
        let mut out = QpPoly::zero(p, self.nvars);
        for (exp, coeff) in &self.terms {
            // Expand Π (c_i + p^e y_i)^{k_i} one variable at a time.
            let mut partial: BTreeMap<Exponent, PadicRational> = BTreeMap::new();
            partial.insert(vec![0; self.nvars], coeff.clone());
            for (i, &k) in exp.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let mut next: BTreeMap<Exponent, PadicRational> = BTreeMap::new();
                let mut binom = BigInt::from(1);
                for j in 0..=k {
                    if j > 0 {
                        binom = binom * BigInt::from(k - j + 1) / BigInt::from(j);
                    }
                    let factor = &(&PadicRational::from_bigint(p, binom.clone())
                        * &center[i].pow(k - j))
                        * &PadicRational::p_pow(p, e * j as i64);
                    if factor.is_zero() {
                        continue;
                    }
                    for (pe, pc) in &partial {
                        let mut ne = pe.clone();
                        ne[i] += j;
                        let v = &(pc * &factor) + next.get(&ne).unwrap_or(&PadicRational::zero(p));
                        next.insert(ne, v);
                    }
                }
                partial = next;
            }
            for (pe, pc) in partial {
                out.add_term(pe, &pc);
            }
        }
        out
    }
}

/// Options shared by every engine call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineOptions {
    /// Cap on the number of residue points enumerated in one block (and on
    /// the work of one histogram convolution).
    pub cap: u64,
    /// Extra refinement levels added to every variable; the result must not
    /// depend on it.
    pub extra_levels: u32,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            cap: DEFAULT_CAP,
            extra_levels: 0,
        }
    }
}

impl EngineOptions {
    pub fn with_cap(cap: u64) -> Self {
        EngineOptions {
            cap,
            ..Self::default()
        }
    }
}

/// Integer histogram of `H(y) mod p^level` over a box of residue cells,
/// together with the Haar volume the box represents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpSumResult {
    prime: u64,
    level: u32,
    counts: BTreeMap<u64, u64>,
    cells: u64,
    volume: BigRational,
}

impl ExpSumResult {
    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// `m`: residues are taken mod `p^m`.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn modulus(&self) -> u64 {
        checked_pow(self.prime, self.level).expect("checked at construction")
    }

    /// Nonzero counts `N_r`, ascending in `r`.
    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    /// Number of enumerated cells.
    pub fn cells(&self) -> u64 {
        self.cells
    }

    /// `Σ_r N_r`; equals `cells()` unless a filter discarded cells.
    pub fn total_count(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Haar volume of the integration domain.
    pub fn volume(&self) -> &BigRational {
        &self.volume
    }

    /// Volume of a single cell.
    pub fn scale(&self) -> BigRational {
        &self.volume / BigRational::from_integer(BigInt::from(self.cells))
    }

    /// `scale · Σ_r N_r e^{2πi r / p^m}`, summed in ascending `r`.
    pub fn value(&self) -> Complex64 {
        let modulus = self.modulus() as f64;
        let mut acc = Complex64::zero();
        for (&r, &n) in &self.counts {
            let angle = std::f64::consts::TAU * (r as f64 / modulus);
            acc += Complex64::from_polar(n as f64, angle);
        }
        acc * self.scale().to_f64().unwrap_or(0.0)
    }

    pub fn abs(&self) -> f64 {
        self.value().norm()
    }

    /// `scale · Σ N_r`, the trivial bound on `|value|`.
    pub fn mass(&self) -> BigRational {
        self.scale() * BigRational::from_integer(BigInt::from(self.total_count()))
    }

    /// Exact vanishing test. Since the minimal polynomial of a primitive
    /// `p^m`-th root of unity is `Σ_j X^{j p^{m-1}}`, the sum vanishes iff
    /// within every class `r mod p^{m-1}` the `p` counts are equal.
    pub fn is_exact_zero(&self) -> bool {
        if self.counts.is_empty() {
            return true;
        }
        if self.level == 0 {
            return false;
        }
        let step = checked_pow(self.prime, self.level - 1).expect("fits");
        let mut groups: HashMap<u64, Vec<u64>> = HashMap::new();
        for (&r, &n) in &self.counts {
            groups.entry(r % step).or_default().push(n);
        }
        groups
            .values()
            .all(|g| g.len() as u64 == self.prime && g.iter().all(|&n| n == g[0]))
    }

    /// Rewrites the histogram at a finer modulus `p^level` (counts move from
    /// `r` to `r p^{level - m}`); the value is unchanged.
    pub fn lift(&self, level: u32) -> Result<ExpSumResult> {
        if level < self.level {
            return Err(Error::invalid("cannot lift to a coarser level"));
        }
        let shift = checked_pow(self.prime, level - self.level)
            .filter(|_| checked_pow(self.prime, level).is_some())
            .ok_or_else(|| Error::limit("histogram modulus", format!("{}^{level}", self.prime), u64::MAX))?;
        Ok(ExpSumResult {
            prime: self.prime,
            level,
            counts: self.counts.iter().map(|(&r, &n)| (r * shift, n)).collect(),
            cells: self.cells,
            volume: self.volume.clone(),
        })
    }

    /// Builds a result from raw parts, validating the modulus.
    pub fn from_parts(
        prime: u64,
        level: u32,
        counts: BTreeMap<u64, u64>,
        cells: u64,
        volume: BigRational,
    ) -> Result<Self> {
        let m = checked_pow(prime, level)
            .ok_or_else(|| Error::limit("histogram modulus", format!("{prime}^{level}"), u64::MAX))?;
        if counts.keys().any(|&r| r >= m) {
            return Err(Error::invalid("residue outside [0, p^m)"));
        }
        if cells == 0 {
            return Err(Error::invalid("histogram needs at least one cell"));
        }
        Ok(ExpSumResult {
            prime,
            level,
            counts,
            cells,
            volume,
        })
    }
}

/// `H(y) = Σ h_e y^e mod p^level` with per-variable cell levels.
#[derive(Clone, Debug)]
struct IntegerForm {
    modulus: u64,
    level: u32,
    terms: Vec<(Exponent, u64)>,
    constant: u64,
    var_levels: Vec<u32>,
}

fn modulus_for(prime: u64, level: i64) -> Result<(u32, u64)> {
    let err = || Error::limit("character modulus", format!("{prime}^{level}"), 1 << 62);
    let l = u32::try_from(level.max(0)).map_err(|_| err())?;
    let m = checked_pow(prime, l).filter(|&m| m <= 1 << 62).ok_or_else(err)?;
    Ok((l, m))
}

/// Integer form of `Ψ(G(y))`: `G = H / p^L`.
fn phase_form(g: &QpPoly) -> Result<IntegerForm> {
    let p = g.prime;
    let min_v = g.terms().filter_map(|(_, c)| c.valuation()).min().unwrap_or(0);
    let (level, modulus) = modulus_for(p, -min_v)?;
    let mut var_levels = vec![0u32; g.nvars];
    let mut terms = Vec::new();
    let mut constant = 0;
    for (e, c) in g.terms() {
        let v = c.valuation().expect("nonzero");
        if v >= 0 {
            continue;
        }
        let r = c.scaled_residue(level as i64, modulus);
        if e.iter().all(|&k| k == 0) {
            constant = r;
            continue;
        }
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                var_levels[i] = var_levels[i].max((-v) as u32);
            }
        }
        terms.push((e.clone(), r));
    }
    Ok(IntegerForm {
        modulus,
        level,
        terms,
        constant,
        var_levels,
    })
}

/// Integer form of the condition `v(G(y)) >= threshold`: with `G = H / p^L`
/// it reads `H(y) ≡ 0 mod p^{threshold + L}`. `None` when always true.
fn filter_form(g: &QpPoly, threshold: i64) -> Result<Option<IntegerForm>> {
    let p = g.prime;
    let min_v = g.terms().filter_map(|(_, c)| c.valuation()).min();
    let Some(min_v) = min_v else {
        // G ≡ 0 has infinite valuation everywhere.
        return Ok(None);
    };
    if min_v >= threshold {
        return Ok(None);
    }
    let shift = (-min_v).max(0);
    let (level, modulus) = modulus_for(p, threshold + shift)?;
    let mut var_levels = vec![0u32; g.nvars];
    let mut terms = Vec::new();
    let mut constant = 0;
    for (e, c) in g.terms() {
        let v = c.valuation().expect("nonzero");
        if v >= threshold {
            continue;
        }
        let r = c.scaled_residue(shift, modulus);
        if e.iter().all(|&k| k == 0) {
            constant = r;
            continue;
        }
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                var_levels[i] = var_levels[i].max((threshold - v) as u32);
            }
        }
        terms.push((e.clone(), r));
    }
    Ok(Some(IntegerForm {
        modulus,
        level,
        terms,
        constant,
        var_levels,
    }))
}

#[inline]
fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    if m <= u32::MAX as u64 {
        (a * b) % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

#[inline]
fn addmod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % m as u128) as u64
}

/// Histogram accumulator.
#[derive(Clone, Debug)]
enum Counts {
    Dense(Vec<u64>),
    Sparse(HashMap<u64, u64>),
}

impl Counts {
    fn new(modulus: u64) -> Self {
        if modulus <= DENSE_LIMIT {
            Counts::Dense(vec![0; modulus as usize])
        } else {
            Counts::Sparse(HashMap::new())
        }
    }

    #[inline]
    fn add(&mut self, r: u64, n: u64) {
        match self {
            Counts::Dense(v) => v[r as usize] += n,
            Counts::Sparse(h) => *h.entry(r).or_insert(0) += n,
        }
    }

    fn merge(mut self, other: Counts) -> Counts {
        match other {
            Counts::Dense(v) => {
                for (r, n) in v.into_iter().enumerate() {
                    if n > 0 {
                        self.add(r as u64, n);
                    }
                }
            }
            Counts::Sparse(h) => {
                for (r, n) in h {
                    self.add(r, n);
                }
            }
        }
        self
    }

    fn nonzero(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = match self {
            Counts::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(r, &n)| (r as u64, n))
                .collect(),
            Counts::Sparse(h) => h.iter().map(|(&r, &n)| (r, n)).collect(),
        };
        out.sort_unstable();
        out
    }
}

/// One group of variables enumerated jointly.
struct Block {
    vars: Vec<usize>,
    radices: Vec<u64>,
    points: u64,
    // Terms restricted to the block, exponents indexed by position in `vars`.
    phase: Vec<(Vec<(usize, u32)>, u64)>,
    phase_mod: u64,
    // Each filter keeps a cell when its terms sum to 0 mod its modulus.
    filters: Vec<(Vec<(Vec<(usize, u32)>, u64)>, u64)>,
    // Common multiple of all moduli, used for the power tables.
    work: u64,
    max_exp: Vec<u32>,
}

fn localize(terms: &[(Exponent, u64)], vars: &[usize]) -> Vec<(Vec<(usize, u32)>, u64)> {
    terms
        .iter()
        .filter(|(e, _)| e.iter().all(|&k| k == 0) || vars.iter().any(|&v| e[v] > 0))
        .map(|(e, c)| {
            let f = vars
                .iter()
                .enumerate()
                .filter(|(_, &v)| e[v] > 0)
                .map(|(j, &v)| (j, e[v]))
                .collect();
            (f, *c)
        })
        .collect()
}

impl Block {
    fn new(
        prime: u64,
        vars: Vec<usize>,
        levels: &[u32],
        phase: &[(Exponent, u64)],
        phase_mod: u64,
        filters: &[(Vec<(Exponent, u64)>, u64)],
        cap: u64,
    ) -> Result<Block> {
        let mut radices = Vec::with_capacity(vars.len());
        let mut points: u64 = 1;
        let mut required = BigInt::from(1);
        for &v in &vars {
            let r = checked_pow(prime, levels[v]);
            required *= num_traits::pow(BigInt::from(prime), levels[v] as usize);
            match r.and_then(|r| points.checked_mul(r).map(|pts| (r, pts))) {
                Some((r, pts)) => {
                    radices.push(r);
                    points = pts;
                }
                None => return Err(Error::limit("residue cells", required, cap)),
            }
        }
        if points > cap {
            return Err(Error::limit("residue cells", points, cap));
        }
        let phase = localize(phase, &vars);
        let filters: Vec<_> = filters
            .iter()
            .map(|(t, m)| (localize(t, &vars), *m))
            .collect();
        let mut max_exp = vec![0u32; vars.len()];
        for (f, _) in phase.iter().chain(filters.iter().flat_map(|(t, _)| t.iter())) {
            for &(j, k) in f {
                max_exp[j] = max_exp[j].max(k);
            }
        }
        // All moduli are powers of p, so the largest is a common multiple.
        let work = filters.iter().map(|(_, m)| *m).fold(phase_mod, u64::max);
        Ok(Block {
            vars,
            radices,
            points,
            phase,
            phase_mod,
            filters,
            work,
            max_exp,
        })
    }

    fn eval_terms(
        terms: &[(Vec<(usize, u32)>, u64)],
        pows: &[Vec<u64>],
        modulus: u64,
    ) -> u64 {
        let mut acc = 0u64;
        for (f, c) in terms {
            let mut t = *c;
            for &(j, k) in f {
                t = mulmod(t, pows[j][k as usize], modulus);
            }
            acc = addmod(acc, t, modulus);
        }
        acc
    }

    fn accumulate(&self, range: std::ops::Range<u64>, counts: &mut Counts) {
        let n = self.vars.len();
        let mut digits = vec![0u64; n];
        let mut rest = range.start;
        for j in (0..n).rev() {
            digits[j] = rest % self.radices[j];
            rest /= self.radices[j];
        }
        let mut pows: Vec<Vec<u64>> = self
            .max_exp
            .iter()
            .map(|&d| vec![1u64; d as usize + 1])
            .collect();
        let work = self.work;
        let mut dirty = 0;
        for _ in range {
            for j in dirty..n {
                let y = digits[j] % work;
                for k in 1..pows[j].len() {
                    pows[j][k] = mulmod(pows[j][k - 1], y, work);
                }
            }
            let keep = self
                .filters
                .iter()
                .all(|(t, m)| Self::eval_terms(t, &pows, work) % m == 0);
            if keep {
                counts.add(Self::eval_terms(&self.phase, &pows, work) % self.phase_mod, 1);
            }
            for j in (0..n).rev() {
                dirty = j;
                digits[j] += 1;
                if digits[j] < self.radices[j] {
                    break;
                }
                digits[j] = 0;
            }
        }
    }

    fn histogram(&self) -> Counts {
        let phase_mod = self.phase_mod;
        let run = |range: std::ops::Range<u64>, counts: &mut Counts| self.accumulate(range, counts);
        if self.points < PARALLEL_THRESHOLD {
            let mut c = Counts::new(phase_mod);
            run(0..self.points, &mut c);
            return c;
        }
        let chunks = self.points.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .fold(
                || Counts::new(phase_mod),
                |mut acc, c| {
                    let start = c * CHUNK;
                    let end = (start + CHUNK).min(self.points);
                    run(start..end, &mut acc);
                    acc
                },
            )
            .reduce(|| Counts::new(phase_mod), Counts::merge)
    }
}

fn convolve(a: &[(u64, u64)], b: &[(u64, u64)], modulus: u64, cap: u64) -> Result<Vec<(u64, u64)>> {
    let work = (a.len() as u128) * (b.len() as u128);
    if work > cap as u128 {
        return Err(Error::limit("histogram convolution", work, cap));
    }
    let mut out = Counts::new(modulus);
    for &(ra, na) in a {
        for &(rb, nb) in b {
            out.add(addmod(ra, rb, modulus), na * nb);
        }
    }
    Ok(out.nonzero())
}

/// Groups variables that share a monomial of the given term lists.
fn components(nvars: usize, levels: &[u32], term_lists: &[&[(Exponent, u64)]]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..nvars).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for list in term_lists {
        for (e, _) in list.iter() {
            let vars: Vec<usize> = (0..nvars).filter(|&i| e[i] > 0).collect();
            for w in vars.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..nvars {
        if levels[i] > 0 {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
    }
    groups.into_values().collect()
}

/// `∫_domain Ψ(phase(x)) |dx|` as an exact histogram.
pub fn integrate(domain: &Ball, phase: &QpPoly, opts: &EngineOptions) -> Result<ExpSumResult> {
    integrate_filtered(domain, phase, &[], opts)
}

/// `∫_domain Ψ(phase(x)) Π_k 1[v(h_k(x)) >= t_k] |dx|` as an exact
/// histogram over the cells of the domain, for filters `(h_k, t_k)`.
pub fn integrate_filtered(
    domain: &Ball,
    phase: &QpPoly,
    filters: &[(&QpPoly, i64)],
    opts: &EngineOptions,
) -> Result<ExpSumResult> {
    let p = domain.prime();
    let n = domain.dim();
    if phase.nvars() != n {
        return Err(Error::invalid("phase arity does not match domain dimension"));
    }
    let g = phase.substitute_ball(domain.center(), domain.radius_exp());
    let pf = phase_form(&g)?;
    let mut ff = Vec::new();
    for (h, threshold) in filters {
        if h.nvars() != n {
            return Err(Error::invalid("filter arity does not match domain dimension"));
        }
        if let Some(f) = filter_form(&h.substitute_ball(domain.center(), domain.radius_exp()), *threshold)? {
            ff.push(f);
        }
    }

    let mut levels: Vec<u32> = pf.var_levels.clone();
    for f in &ff {
        for (l, fl) in levels.iter_mut().zip(&f.var_levels) {
            *l = (*l).max(*fl);
        }
    }
    for l in levels.iter_mut() {
        *l += opts.extra_levels;
    }

    let mut cells: u64 = 1;
    let mut required = BigInt::from(1);
    let mut overflow = false;
    for &l in &levels {
        required *= num_traits::pow(BigInt::from(p), l as usize);
        match checked_pow(p, l).and_then(|r| cells.checked_mul(r)) {
            Some(c) => cells = c,
            None => overflow = true,
        }
    }
    if overflow {
        return Err(Error::limit("residue cells", required, opts.cap));
    }

    // Filter constants become terms with the zero exponent so that
    // evaluation stays uniform.
    let filter_terms: Vec<(Vec<(Exponent, u64)>, u64)> = ff
        .iter()
        .map(|f| {
            let mut t = f.terms.clone();
            if f.constant != 0 {
                t.push((vec![0; n], f.constant));
            }
            (t, f.modulus)
        })
        .collect();

    let blocks: Vec<Vec<usize>> = if !ff.is_empty() {
        let all: Vec<usize> = (0..n).filter(|&i| levels[i] > 0).collect();
        vec![all]
    } else {
        components(n, &levels, &[&pf.terms])
    };

    let mut hist: Vec<(u64, u64)> = vec![(pf.constant, 1)];
    let mut seen_points: u64 = 1;
    for vars in blocks {
        let block = Block::new(p, vars, &levels, &pf.terms, pf.modulus, &filter_terms, opts.cap)?;
        let counts = block.histogram();
        seen_points = seen_points.saturating_mul(block.points);
        hist = convolve(&hist, &counts.nonzero(), pf.modulus, opts.cap)?;
    }
    // Variables outside every block carry no phase; each cell of theirs
    // repeats the histogram.
    let multiplicity = cells / seen_points.max(1);
    let counts: BTreeMap<u64, u64> = hist
        .into_iter()
        .filter(|&(_, c)| c > 0)
        .map(|(r, c)| (r, c * multiplicity))
        .collect();
    ExpSumResult::from_parts(p, pf.level, counts, cells, domain.volume())
}
