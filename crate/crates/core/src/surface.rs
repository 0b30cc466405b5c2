//! Fourier transforms of surface measures on graphs `x_n = φ(x')`,
//! restriction ratios and the `ζ_z` interpolation kernel.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::engine::{integrate, integrate_filtered, EngineOptions, ExpSumResult, QpPoly};
use crate::error::{Error, Result};
use crate::expsum::least_squares;
use crate::newton::{nondegeneracy_mod_p, Nondegeneracy, MAX_VARS};
use crate::padic::{Ball, PadicRational};
use crate::poly::SparsePolynomial;
use crate::schwartz::SchwartzBruhatFn;

/// Allowed gap between a fitted decay slope and its reference exponent.
pub const SLOPE_TOLERANCE: f64 = 0.05;

/// The graph `Y = {x_n = φ(x')}` carrying the measure `1_S(x', φ(x')) dx'`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphHypersurface {
    prime: u64,
    phi: SparsePolynomial,
    window: Ball,
    status: Nondegeneracy,
}

impl GraphHypersurface {
    pub fn new(prime: u64, phi: SparsePolynomial, window: Ball, cap: u64) -> Result<Self> {
        phi.check_phase()?;
        if window.dim() != phi.nvars() + 1 || window.prime() != prime {
            return Err(Error::invalid(format!(
                "window must be a ball in Q_{prime}^{}",
                phi.nvars() + 1
            )));
        }
        let status = if phi.nvars() <= MAX_VARS {
            nondegeneracy_mod_p(&phi, prime, cap)
                .unwrap_or_else(|e| Nondegeneracy::Indeterminate(e.to_string()))
        } else {
            Nondegeneracy::Indeterminate("too many variables".into())
        };
        Ok(GraphHypersurface {
            prime,
            phi,
            window,
            status,
        })
    }

    /// Graph of `φ` over the unit window `Z_p^n`.
    pub fn over_unit_ball(prime: u64, phi: SparsePolynomial, cap: u64) -> Result<Self> {
        let n = phi.nvars() + 1;
        Self::new(prime, phi, Ball::unit(prime, n), cap)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn phi(&self) -> &SparsePolynomial {
        &self.phi
    }

    pub fn window(&self) -> &Ball {
        &self.window
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Mod-p non-degeneracy verdict for `φ`.
    pub fn status(&self) -> &Nondegeneracy {
        &self.status
    }

    /// `S'`, the projection of the window to the first `n - 1` coordinates.
    pub fn base(&self) -> Ball {
        self.window.project(self.dim() - 1)
    }

    fn phi_q(&self) -> QpPoly {
        QpPoly::from_poly(self.prime, &self.phi, &PadicRational::one(self.prime))
    }

    /// `φ(x') - c_n` with threshold `e`: the condition `φ(x') ∈ S_n`.
    fn window_filter(&self) -> (QpPoly, i64) {
        let mut h = self.phi_q();
        h.add_constant(&-&self.window.center()[self.dim() - 1]);
        (h, self.window.radius_exp())
    }

    /// `∫ Ψ(phase) dμ_{Y,S}` over `domain ⊆ S'` with extra valuation filters.
    fn integrate_on(
        &self,
        domain: &Ball,
        phase: &QpPoly,
        extra: &[(&QpPoly, i64)],
        opts: &EngineOptions,
    ) -> Result<ExpSumResult> {
        let (h, t) = self.window_filter();
        let mut filters: Vec<(&QpPoly, i64)> = vec![(&h, t)];
        filters.extend_from_slice(extra);
        integrate_filtered(domain, phase, &filters, opts)
    }

    /// `μ(Y ∩ S)`.
    pub fn measure(&self, opts: &EngineOptions) -> Result<BigRational> {
        let zero = QpPoly::zero(self.prime, self.dim() - 1);
        Ok(self.integrate_on(&self.base(), &zero, &[], opts)?.mass())
    }

    /// The exponent quoted for the two model families: `(n-1)/2` for
    /// `Σ a_i x_i^2` and `1/d` for `a x^d`.
    pub fn model_exponent(&self) -> Option<BigRational> {
        let m = self.phi.nvars();
        let terms: Vec<_> = self.phi.terms().collect();
        if m == 1 && terms.len() == 1 {
            let d = terms[0].0[0];
            return Some(BigRational::new(1.into(), (d as i64).into()));
        }
        let diagonal_square = terms.len() == m
            && terms
                .iter()
                .all(|(e, _)| e.iter().filter(|&&k| k > 0).count() == 1 && e.iter().sum::<u32>() == 2);
        let covers_all = (0..m).all(|j| self.phi.degree_in(j) == 2);
        if diagonal_square && covers_all {
            return Some(BigRational::new((m as i64).into(), 2.into()));
        }
        None
    }

    /// `max_j d_j(φ)`, the largest partial degree.
    pub fn max_partial_degree(&self) -> u32 {
        (0..self.phi.nvars()).map(|j| self.phi.degree_in(j)).max().unwrap_or(0)
    }
}

/// `∫_Y Ψ(-[x, ξ]) dμ_{Y,S}(x) = ∫_{S'} Ψ(-ξ_n φ(x') - [x', ξ']) dx'`.
pub fn surface_ft(y: &GraphHypersurface, xi: &[PadicRational], opts: &EngineOptions) -> Result<ExpSumResult> {
    let n = y.dim();
    if xi.len() != n {
        return Err(Error::invalid(format!("frequency must have {n} coordinates")));
    }
    let mut phase = QpPoly::from_poly(y.prime, &y.phi, &-&xi[n - 1]);
    let lin: Vec<PadicRational> = xi[..n - 1].iter().map(|x| -x).collect();
    phase.add_linear(&lin);
    y.integrate_on(&y.base(), &phase, &[], opts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    /// `‖ξ‖ = p^k`.
    pub k: u32,
    pub abs: f64,
}

/// `|surface_ft|` along a ray, with the fitted slope of `-log_p |·|` vs `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    pub slope: Option<f64>,
    /// Exponent the slope is compared with, if any.
    pub reference: Option<f64>,
    pub model_exponent: Option<BigRational>,
    /// `max_j d_j(φ)` and its reciprocal, reported side by side.
    pub max_partial_degree: u32,
    pub consistent: Option<bool>,
}

/// Samples `ξ(k) = p^{-k} · direction` for `k` in `k_range`; `direction`
/// must have norm 1. The slope is compared with the model exponent when `φ`
/// is a model family and with `reference` otherwise.
pub fn decay_table(
    y: &GraphHypersurface,
    direction: &[PadicRational],
    k_range: std::ops::RangeInclusive<u32>,
    reference: Option<f64>,
    opts: &EngineOptions,
) -> Result<DecayTable> {
    let p = y.prime;
    if direction.iter().filter_map(|d| d.valuation()).min() != Some(0) {
        return Err(Error::invalid("ray direction must have norm 1"));
    }
    let ln_p = (p as f64).ln();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for k in k_range {
        let xi: Vec<PadicRational> = direction.iter().map(|d| d.mul_p_pow(-(k as i64))).collect();
        let r = surface_ft(y, &xi, opts)?;
        let abs = r.abs();
        if abs > 1e-12 && !r.is_exact_zero() {
            points.push((k as f64, -abs.ln() / ln_p));
        }
        rows.push(DecayRow { k, abs });
    }
    let slope = least_squares(&points).map(|(s, _, _)| s);
    let model_exponent = y.model_exponent();
    let reference = model_exponent
        .as_ref()
        .and_then(|b| b.to_f64())
        .or(reference);
    let consistent = match (slope, reference) {
        (Some(s), Some(r)) => Some((s - r).abs() <= SLOPE_TOLERANCE),
        _ => None,
    };
    Ok(DecayTable {
        rows,
        slope,
        reference,
        model_exponent,
        max_partial_degree: y.max_partial_degree(),
        consistent,
    })
}

/// Upper end `2(1+β)/(2+β)` of the exponent range `1 ≤ ρ < ·` for
/// restriction with decay exponent `β`.
pub fn restriction_bound(beta: f64) -> f64 {
    2.0 * (1.0 + beta) / (2.0 + beta)
}

pub fn restriction_admissible(rho: f64, beta: f64) -> bool {
    rho >= 1.0 && rho < restriction_bound(beta)
}

/// `(∫_Y |Fg|^2 dμ_{Y,S})^{1/2} / ‖g‖_ρ`.
///
/// With `Fg = Σ_j C_j Ψ(-[a_j, ξ]) 1[ξ ∈ p^{-e_j} Z^n]` the surface integral
/// expands into pairs, each an exact engine integral over
/// `S' ∩ p^K Z^{n-1}` filtered by `v(φ(x')) ≥ K`, `K = -min(e_j, e_k)`.
pub fn restriction_ratio(
    g: &SchwartzBruhatFn,
    y: &GraphHypersurface,
    rho: f64,
    opts: &EngineOptions,
) -> Result<f64> {
    if g.dim() != y.dim() || g.prime() != y.prime {
        return Err(Error::invalid("test function and surface live in different spaces"));
    }
    let norm = g.lp_norm(rho);
    if norm == 0.0 {
        return Err(Error::invalid("‖g‖ = 0"));
    }
    Ok(restricted_l2(g, y, opts)?.sqrt() / norm)
}

/// `∫_Y |Fg|^2 dμ_{Y,S}`.
pub fn restricted_l2(g: &SchwartzBruhatFn, y: &GraphHypersurface, opts: &EngineOptions) -> Result<f64> {
    let p = y.prime;
    let n = y.dim();
    let base = y.base();
    let phi = y.phi_q();
    let coeffs: Vec<Complex64> = g
        .terms()
        .iter()
        .map(|(b, c)| c * b.volume().to_f64().unwrap_or(0.0))
        .collect();
    let mut total = 0.0;
    for j in 0..g.terms().len() {
        for k in j..g.terms().len() {
            let (bj, bk) = (&g.terms()[j].0, &g.terms()[k].0);
            let level = -bj.radius_exp().min(bk.radius_exp());
            let Some(domain) = base.intersection(&Ball::centered(p, n - 1, level)) else {
                continue;
            };
            let d: Vec<PadicRational> = bj
                .center()
                .iter()
                .zip(bk.center())
                .map(|(a, b)| a - b)
                .collect();
            let mut phase = QpPoly::from_poly(p, y.phi(), &-&d[n - 1]);
            phase.add_linear(&d[..n - 1].iter().map(|x| -x).collect::<Vec<_>>());
            let r = y.integrate_on(&domain, &phase, &[(&phi, level)], opts)?;
            let term = coeffs[j] * coeffs[k].conj() * r.value();
            total += if j == k { term.re } else { 2.0 * term.re };
        }
    }
    Ok(total.max(0.0))
}

/// `ζ_z(x_n)` in closed form: `q^{-e_0 z}` when `|x_n| ≤ q^{e_0}`, else
/// `((1 - q^{z-1}) / (1 - q^{-1})) |x_n|^{-z}`.
pub fn zeta_kernel(prime: u64, z: Complex64, x: &PadicRational, e0: i64) -> Complex64 {
    let q = prime as f64;
    let ln_q = q.ln();
    match x.valuation() {
        Some(v) if -v > e0 => {
            let abs_pow = (-z * (-v as f64) * ln_q).exp();
            (Complex64::new(1.0, 0.0) - ((z - 1.0) * ln_q).exp()) / (1.0 - 1.0 / q) * abs_pow
        }
        _ => (-z * (e0 as f64) * ln_q).exp(),
    }
}

/// `ζ_z(x_n) = γ(z) ∫_{p^{e_0} Z_p} Ψ(x_n y) |y|^{z-1} dy` with
/// `γ(z) = (1 - q^{-z}) / (1 - q^{-1})`, summed over the shells
/// `v(y) = k`; each shell integral comes from the engine. Needs `Re z > 0`.
pub fn zeta_kernel_shells(
    prime: u64,
    z: Complex64,
    x: &PadicRational,
    e0: i64,
    opts: &EngineOptions,
) -> Result<Complex64> {
    if z.re <= 0.0 {
        return Err(Error::invalid("shell sums converge only for Re z > 0"));
    }
    let q = prime as f64;
    let ln_q = q.ln();
    let gamma = (Complex64::new(1.0, 0.0) - (-z * ln_q).exp()) / (1.0 - 1.0 / q);
    let tail_factor = gamma.norm() * (1.0 - 1.0 / q) / (1.0 - q.powf(-z.re));
    let ball_integral = |k: i64| -> Result<Complex64> {
        let mut phase = QpPoly::zero(prime, 1);
        phase.add_linear(std::slice::from_ref(x));
        Ok(integrate(&Ball::centered(prime, 1, k), &phase, opts)?.value())
    };
    let mut acc = Complex64::zero();
    let mut k = e0;
    let mut inner = ball_integral(k)?;
    loop {
        let outer = inner;
        inner = ball_integral(k + 1)?;
        let weight = (-(z - 1.0) * (k as f64) * ln_q).exp();
        acc += weight * (outer - inner);
        let tail = tail_factor * q.powf(-((k + 1) as f64) * z.re);
        if tail < 1e-15 {
            break;
        }
        k += 1;
        if k - e0 > 100_000 {
            return Err(Error::limit("zeta shells", k - e0, 100_000));
        }
    }
    Ok(gamma * acc)
}
