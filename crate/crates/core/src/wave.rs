//! The initial value problem `∂_t u = φ(∂) u`, `u(x, 0) = f_0(x)`, solved by
//! `u(x, t) = ∫ Ψ(t φ(ξ) + [x, ξ]) (F f_0)(ξ) |dξ|`.
//!
//! With `f_0 = Σ_j c_j 1_{a_j + p^{e_j} Z_p^n}` every term of `F f_0` lives
//! on a ball around the origin, so `u` is a finite sum of engine integrals
//! `C_j ∫_{p^{-e_j} Z_p^n} Ψ(t φ(ξ) + [x - a_j, ξ]) |dξ|`.

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::engine::{integrate, integrate_filtered, EngineOptions, QpPoly};
use crate::error::{Error, Result};
use crate::padic::{checked_pow, Ball, PadicRational};
use crate::poly::SparsePolynomial;
use crate::schwartz::{fourier_sb, ModulatedSBFn, SchwartzBruhatFn, Sign};

/// Initial data, symbol and the scales on which the solution is constant.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionSpec {
    f0: SchwartzBruhatFn,
    phi: SparsePolynomial,
    spectrum: ModulatedSBFn,
    freq_bound: i64,
    phase_bound: i64,
}

impl SolutionSpec {
    pub fn new(f0: SchwartzBruhatFn, phi: SparsePolynomial) -> Result<Self> {
        phi.check_phase()?;
        if phi.nvars() != f0.dim() {
            return Err(Error::invalid(format!(
                "symbol has {} variables but the initial data lives in dimension {}",
                phi.nvars(),
                f0.dim()
            )));
        }
        let freq_bound = f0
            .frequency_bound()
            .ok_or_else(|| Error::invalid("initial data has no terms"))?;
        let p = f0.prime();
        let phase_bound = phi
            .terms()
            .map(|(e, c)| {
                let v = PadicRational::from_bigint(p, c.clone()).valuation().unwrap_or(0);
                freq_bound * e.iter().sum::<u32>() as i64 - v
            })
            .max()
            .unwrap_or(0);
        let spectrum = fourier_sb(&f0, Sign::Forward);
        Ok(SolutionSpec {
            f0,
            phi,
            spectrum,
            freq_bound,
            phase_bound,
        })
    }

    pub fn prime(&self) -> u64 {
        self.f0.prime()
    }

    pub fn dim(&self) -> usize {
        self.f0.dim()
    }

    pub fn f0(&self) -> &SchwartzBruhatFn {
        &self.f0
    }

    pub fn phi(&self) -> &SparsePolynomial {
        &self.phi
    }

    /// `F f_0`.
    pub fn spectrum(&self) -> &ModulatedSBFn {
        &self.spectrum
    }

    /// `e` with `supp F f_0 ⊆ {‖ξ‖ ≤ p^e}`; `u(·, t)` is constant on cosets
    /// of `p^e Z_p^n`.
    pub fn freq_bound(&self) -> i64 {
        self.freq_bound
    }

    /// `e'` with `|φ(ξ)| ≤ p^{e'}` on the spectrum; `u(x, ·)` is constant on
    /// cosets of `p^{e'} Z_p`.
    pub fn phase_bound(&self) -> i64 {
        self.phase_bound
    }

    /// The same problem with initial data `c · f_0`.
    pub fn scaled(&self, c: Complex64) -> Self {
        SolutionSpec::new(self.f0.scale(c), self.phi.clone()).expect("valid spec")
    }
}

/// `‖f_0‖_{L^2}`.
pub fn l2_norm(f0: &SchwartzBruhatFn) -> f64 {
    f0.l2_norm()
}

fn check_point(spec: &SolutionSpec, x: &[PadicRational], t: &PadicRational) -> Result<()> {
    let p = spec.prime();
    if x.len() != spec.dim() {
        return Err(Error::invalid(format!("x must have {} coordinates", spec.dim())));
    }
    if x.iter().chain(std::iter::once(t)).any(|v| v.prime() != p) {
        return Err(Error::invalid("mixed primes"));
    }
    Ok(())
}

/// `u(x, t)`.
pub fn solve_u(spec: &SolutionSpec, x: &[PadicRational], t: &PadicRational, opts: &EngineOptions) -> Result<Complex64> {
    check_point(spec, x, t)?;
    let p = spec.prime();
    let n = spec.dim();
    let mut acc = Complex64::zero();
    for (ball, c) in spec.f0.terms() {
        let weight = c * ball.volume().to_f64().unwrap_or(0.0);
        let mut phase = QpPoly::from_poly(p, &spec.phi, t);
        let shift: Vec<PadicRational> = x.iter().zip(ball.center()).map(|(a, b)| a - b).collect();
        phase.add_linear(&shift);
        let r = integrate(&Ball::centered(p, n, -ball.radius_exp()), &phase, opts)?;
        acc += weight * r.value();
    }
    Ok(acc)
}

/// `W_R(ξ, τ) = ∫_{‖x‖ ≤ p^R} ∫_{|t| ≤ p^R} u(x, t) Ψ(-t τ - [x, ξ]) dt dx`.
///
/// Integrating out `x` and `t` leaves
/// `p^{R(n+1)} ∫_{ξ + p^R Z^n} 1[v(φ(η) - τ) ≥ R] (F f_0)(η) dη`, which
/// vanishes unless the window meets the hypersurface `τ = φ(η)`.
pub fn windowed_spectrum(
    spec: &SolutionSpec,
    xi: &[PadicRational],
    tau: &PadicRational,
    r: i64,
    opts: &EngineOptions,
) -> Result<Complex64> {
    check_point(spec, xi, tau)?;
    let p = spec.prime();
    let n = spec.dim();
    let window = Ball::new(p, xi.to_vec(), r)?;
    let mut filter = QpPoly::from_poly(p, &spec.phi, &PadicRational::one(p));
    filter.add_constant(&-tau);
    let mut acc = Complex64::zero();
    for (ball, c) in spec.f0.terms() {
        let Some(domain) = window.intersection(&Ball::centered(p, n, -ball.radius_exp())) else {
            continue;
        };
        let weight = c * ball.volume().to_f64().unwrap_or(0.0);
        let mut phase = QpPoly::zero(p, n);
        phase.add_linear(&ball.center().iter().map(|a| -a).collect::<Vec<_>>());
        let res = integrate_filtered(&domain, &phase, &[(&filter, r)], opts)?;
        acc += weight * res.value();
    }
    let scale = (p as f64).powi((r * (n as i64 + 1)) as i32);
    Ok(acc * scale)
}

/// Sample points of one cell family: `j p^{-R}` for `j < p^{R + c}`.
fn grid(p: u64, r_max: i64, cell: i64, cap: u64) -> Result<Vec<PadicRational>> {
    let depth = (r_max + cell).max(0) as u32;
    let count = checked_pow(p, depth)
        .filter(|&c| c <= cap)
        .ok_or_else(|| Error::limit("Strichartz cells", format!("{p}^{depth}"), cap))?;
    Ok((0..count)
        .map(|j| PadicRational::from_int(p, j as i64).mul_p_pow(-r_max))
        .collect())
}

fn shell(x: &PadicRational) -> i64 {
    x.valuation().map_or(0, |v| (-v).max(0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrichartzRow {
    pub r: i64,
    /// `‖u‖_{L^σ}` over `{‖x‖ ≤ p^R, |t| ≤ p^R}`.
    pub norm: f64,
    /// `norm / ‖f_0‖_2`.
    pub ratio: f64,
    /// `norm(R)^σ - norm(R-1)^σ` (for `R = 0`, `norm(0)^σ`).
    pub increment: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrichartzReport {
    pub sigma: f64,
    pub l2: f64,
    pub rows: Vec<StrichartzRow>,
    /// Increments are non-increasing from `R = 1` on.
    pub converging: bool,
    /// None of the last three increments shrank.
    pub diverging: bool,
}

impl StrichartzReport {
    /// The last ratio, the empirical constant.
    pub fn constant(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.ratio)
    }
}

/// Per-shell sums `∫ |u|^σ` over `max(‖x‖, |t|) = p^r` (`r = 0` is the unit
/// box), or per-shell maxima for `σ = ∞`.
fn shell_sums(spec: &SolutionSpec, sigma: f64, r_max: i64, opts: &EngineOptions) -> Result<Vec<f64>> {
    if r_max < 0 {
        return Err(Error::invalid("R must be non-negative"));
    }
    let p = spec.prime();
    let n = spec.dim();
    let cx = spec.freq_bound.max(0);
    let ct = spec.phase_bound.max(0);
    let xs = grid(p, r_max, cx, opts.cap)?;
    let ts = grid(p, r_max, ct, opts.cap)?;
    let nx = (xs.len() as u128).pow(n as u32);
    let cells = nx * ts.len() as u128;
    if cells > opts.cap as u128 {
        return Err(Error::limit("Strichartz cells", cells, opts.cap));
    }
    let cells = cells as u64;
    let cell_volume = (p as f64).powi(-(n as i32) * cx as i32 - ct as i32);
    let values: Vec<Result<(usize, f64)>> = (0..cells)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let ti = (rest % ts.len() as u64) as usize;
            rest /= ts.len() as u64;
            let mut x = Vec::with_capacity(n);
            for _ in 0..n {
                x.push(xs[(rest % xs.len() as u64) as usize].clone());
                rest /= xs.len() as u64;
            }
            let t = &ts[ti];
            let s = x.iter().map(shell).chain(std::iter::once(shell(t))).max().unwrap_or(0);
            let u = solve_u(spec, &x, t, opts)?.norm();
            let v = if sigma.is_infinite() { u } else { u.powf(sigma) * cell_volume };
            Ok((s as usize, v))
        })
        .collect();
    let mut sums = vec![0.0f64; r_max as usize + 1];
    for v in values {
        let (s, val) = v?;
        if sigma.is_infinite() {
            sums[s] = sums[s].max(val);
        } else {
            sums[s] += val;
        }
    }
    Ok(sums)
}

/// `‖u‖_{L^σ}` over `{‖x‖ ≤ p^R, |t| ≤ p^R}`.
pub fn strichartz_truncated(spec: &SolutionSpec, sigma: f64, r: i64, opts: &EngineOptions) -> Result<f64> {
    Ok(strichartz_report(spec, sigma, r, opts)?
        .rows
        .last()
        .map_or(0.0, |row| row.norm))
}

/// Truncated norms for `R = 0..=R_max`, their ratios to `‖f_0‖_2` and a
/// convergence diagnosis from the shell increments.
pub fn strichartz_report(spec: &SolutionSpec, sigma: f64, r_max: i64, opts: &EngineOptions) -> Result<StrichartzReport> {
    if sigma.is_nan() || sigma < 1.0 {
        return Err(Error::invalid("σ must be at least 1"));
    }
    let sums = shell_sums(spec, sigma, r_max, opts)?;
    let l2 = l2_norm(&spec.f0);
    let mut rows = Vec::new();
    let mut acc = 0.0f64;
    for (r, &s) in sums.iter().enumerate() {
        let norm = if sigma.is_infinite() {
            acc = acc.max(s);
            acc
        } else {
            acc += s;
            acc.powf(1.0 / sigma)
        };
        rows.push(StrichartzRow {
            r: r as i64,
            norm,
            ratio: if l2 > 0.0 { norm / l2 } else { f64::NAN },
            increment: s,
        });
    }
    let inc: Vec<f64> = rows.iter().skip(1).map(|row| row.increment).collect();
    let converging = inc.windows(2).all(|w| w[1] <= w[0]);
    let diverging = inc.len() >= 4 && inc[inc.len() - 4..].windows(2).all(|w| w[1] >= w[0]);
    Ok(StrichartzReport {
        sigma,
        l2,
        rows,
        converging,
        diverging,
    })
}
