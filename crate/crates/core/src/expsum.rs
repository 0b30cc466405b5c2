//! Exponential sums `E_A(z, f) = ∫_A Ψ(z f(x)) |dx|`, solution counts of
//! congruences, stationary-phase vanishing and decay fits.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

pub use crate::engine::ExpSumResult;
use crate::engine::{integrate, EngineOptions, QpPoly};
use crate::error::{Error, Result};
use crate::newton::{beta_and_t0, newton_facets, quasi_homogeneous_detect, DEFAULT_QH_BOUND};
use crate::padic::{checked_pow, Ball, PadicRational};
use crate::poly::SparsePolynomial;

/// Samples with `|E|` at or below this are treated as vanishing in fits.
pub const FIT_FLOOR: f64 = 1e-12;
/// Allowed shortfall of the fitted slope for quasi-homogeneous `f`.
pub const FIT_TOLERANCE: f64 = 0.05;
/// Allowed shortfall otherwise, absorbing the `ε` and logarithmic factors.
pub const EPSILON_MARGIN: f64 = 0.1;
/// Default depth of residue-class refinement for stationary certificates.
pub const DEFAULT_DEPTH_CAP: u32 = 12;
/// Tolerance for numerical vanishing.
pub const VANISHING_TOLERANCE: f64 = 1e-9;

/// `E_A(z, f)` as an exact histogram.
pub fn exp_sum(f: &SparsePolynomial, z: &PadicRational, a: &Ball, cap: u64) -> Result<ExpSumResult> {
    exp_sum_with(f, z, a, &EngineOptions::with_cap(cap))
}

pub fn exp_sum_with(
    f: &SparsePolynomial,
    z: &PadicRational,
    a: &Ball,
    opts: &EngineOptions,
) -> Result<ExpSumResult> {
    if z.is_zero() {
        return Err(Error::invalid("z = 0: the integral is vol(A)"));
    }
    if f.nvars() != a.dim() {
        return Err(Error::invalid(format!(
            "polynomial has {} variables but the ball has dimension {}",
            f.nvars(),
            a.dim()
        )));
    }
    integrate(a, &QpPoly::from_poly(a.prime(), f, z), opts)
}

/// `N_m(c) = #{x mod p^m in A : f(x) ≡ c mod p^m}` for an integral ball `A`,
/// packaged so that `value()` is `E_A(p^{-m}, f)`.
pub fn residue_histogram(f: &SparsePolynomial, m: u32, a: &Ball, cap: u64) -> Result<ExpSumResult> {
    if !a.is_integral() {
        return Err(Error::invalid("residue counts need a ball inside Z_p^n"));
    }
    let p = a.prime();
    let r = exp_sum(f, &PadicRational::p_pow(p, -(m as i64)), a, cap)?.lift(m)?;
    let depth = (m as i64 - a.radius_exp()).max(0) as u32;
    let points = checked_pow(p, depth)
        .and_then(|q| q.checked_pow(a.dim() as u32))
        .ok_or_else(|| Error::limit("residue points", format!("{p}^{}", depth as usize * a.dim()), cap))?;
    if points > cap {
        return Err(Error::limit("residue points", points, cap));
    }
    // The engine may resolve fewer digits than `m`; each of its cells stands
    // for the same number of residues mod p^m.
    let factor = points / r.cells();
    let counts: BTreeMap<u64, u64> = r.counts().iter().map(|(&c, &n)| (c, n * factor)).collect();
    ExpSumResult::from_parts(p, m, counts, points, a.volume())
}

/// Outcome of refining `A` into classes on which `min_i v(∂_i f)` is
/// constant, plus the checked vanishing range.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryCertificate {
    /// `I(f, A)`: largest gradient valuation over `A`.
    pub index: u32,
    /// `E_A(z, f) = 0` is claimed for `|z| > p^{threshold_exp}`, where
    /// `threshold_exp = I + max(I + 1, e)` for `A = c + p^e Z_p^n`; this is
    /// `2I + 1` unless `A` is smaller than the classes mod `p^{I+1}`.
    pub threshold_exp: u32,
    /// Number of stable classes covering `A`.
    pub classes: usize,
    /// `(m, |E_A(p^{-m}, f)|, exact zero)` for each checked `m`.
    pub verified: Vec<(u32, f64, bool)>,
}

impl StationaryCertificate {
    /// Whether every checked level vanished both numerically and exactly.
    pub fn all_vanish(&self) -> bool {
        self.verified
            .iter()
            .all(|&(_, abs, exact)| exact && abs <= VANISHING_TOLERANCE)
    }
}

fn valuation_of(x: &BigInt, p: u64) -> Option<u32> {
    PadicRational::from_bigint(p, x.clone())
        .valuation()
        .map(|v| v as u32)
}

/// Computes `I(f, A)` by breadth-first refinement of residue classes and
/// checks `E_A(p^{-m}, f) = 0` for `threshold_exp < m <= m_max`.
pub fn stationary_certificate(
    f: &SparsePolynomial,
    a: &Ball,
    depth_cap: u32,
    m_max: u32,
    cap: u64,
) -> Result<StationaryCertificate> {
    if !a.is_integral() || a.radius_exp() < 0 {
        return Err(Error::invalid("stationary certificates need a ball inside Z_p^n"));
    }
    if f.nvars() != a.dim() {
        return Err(Error::invalid("polynomial and ball dimensions differ"));
    }
    let p = a.prime();
    let n = a.dim();
    let grad = f.gradient();
    let start: Vec<BigInt> = a
        .center()
        .iter()
        .map(|c| c.scaled_integer(0))
        .collect();
    let k0 = a.radius_exp() as u32;
    let mut level: Vec<Vec<BigInt>> = vec![start];
    let mut k = k0;
    let mut index = 0u32;
    let mut classes = 0usize;
    let mut examined: u64 = 0;
    while !level.is_empty() {
        if k - k0 > depth_cap {
            return Err(Error::Indeterminate(format!(
                "gradient valuation not stable after {depth_cap} refinements"
            )));
        }
        let mut next = Vec::new();
        let step = BigInt::from(p).pow(k);
        for center in level {
            examined += 1;
            if examined > cap {
                return Err(Error::limit("residue classes", examined, cap));
            }
            let vals: Vec<Option<u32>> = grad.iter().map(|g| valuation_of(&g.eval(&center), p)).collect();
            let mu = vals.iter().flatten().min().copied();
            match mu {
                None => {
                    let class = format!(
                        "({}) + {p}^{k} Z_{p}^{n}",
                        center.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
                    );
                    return Err(Error::CertificateUnavailable { class });
                }
                Some(mu) if mu < k => {
                    index = index.max(mu);
                    classes += 1;
                }
                Some(_) => {
                    let count = checked_pow(p, n as u32).expect("small dimension");
                    for j in 0..count {
                        let mut child = center.clone();
                        let mut rest = j;
                        for c in child.iter_mut().rev() {
                            *c += &step * BigInt::from(rest % p);
                            rest /= p;
                        }
                        next.push(child);
                    }
                }
            }
        }
        level = next;
        k += 1;
    }
    let threshold_exp = index + (index + 1).max(k0);
    let mut verified = Vec::new();
    for m in (threshold_exp + 1)..=m_max {
        let r = exp_sum(f, &PadicRational::p_pow(p, -(m as i64)), a, cap)?;
        verified.push((m, r.abs(), r.is_exact_zero()));
    }
    Ok(StationaryCertificate {
        index,
        threshold_exp,
        classes,
        verified,
    })
}

/// Least-squares decay exponent of `|E_A(p^{-m}, f)|` against `β_f`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    /// `(m, |E|)` for every requested level.
    pub samples: Vec<(u32, f64)>,
    /// Levels actually used in the fit.
    pub used: Vec<u32>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// `β_f` when `f` has a Newton polyhedron with a qualifying facet.
    pub beta: Option<BigRational>,
    pub quasi_homogeneous: bool,
    pub consistent: bool,
}

/// Ordinary least squares `y ≈ slope·x + intercept`, with the RMS residual.
pub fn least_squares(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    Some((slope, intercept, (rss / n).sqrt()))
}

pub fn decay_fit(
    f: &SparsePolynomial,
    a: &Ball,
    m_range: std::ops::RangeInclusive<u32>,
    cap: u64,
) -> Result<DecayFit> {
    if m_range.is_empty() {
        return Err(Error::invalid("empty level range"));
    }
    let p = a.prime();
    let ln_p = (p as f64).ln();
    let mut samples = Vec::new();
    let mut points = Vec::new();
    let mut used = Vec::new();
    for m in m_range {
        let r = exp_sum(f, &PadicRational::p_pow(p, -(m as i64)), a, cap)?;
        let abs = r.abs();
        samples.push((m, abs));
        if abs > FIT_FLOOR && !r.is_exact_zero() {
            points.push((m as f64, -abs.ln() / ln_p));
            used.push(m);
        }
    }
    if points.is_empty() {
        return Err(Error::FitUndefined(
            "every sample vanishes: super-polynomial decay".into(),
        ));
    }
    let (slope, intercept, residual) = least_squares(&points)
        .ok_or_else(|| Error::FitUndefined("fewer than two nonvanishing samples".into()))?;
    let beta = newton_facets(f)
        .ok()
        .and_then(|poly| beta_and_t0(&poly).ok())
        .map(|(b, _)| b);
    let quasi_homogeneous = f.check_phase().is_ok()
        && quasi_homogeneous_detect(f, DEFAULT_QH_BOUND)?.is_some();
    let consistent = match &beta {
        Some(b) => {
            let b = b.to_f64().unwrap_or(f64::NAN);
            let margin = if quasi_homogeneous { FIT_TOLERANCE } else { EPSILON_MARGIN };
            slope >= b - margin
        }
        None => true,
    };
    Ok(DecayFit {
        samples,
        used,
        slope,
        intercept,
        residual,
        beta,
        quasi_homogeneous,
        consistent,
    })
}
