use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::config::{parse_ball, parse_f0, parse_vector, Command, JobConfig};
use super::emit::{complex, emit, float, rational, Report, Table};
use crate::engine::EngineOptions;
use crate::error::{Error, Result};
use crate::expsum::{
    decay_fit, exp_sum, least_squares, residue_histogram, stationary_certificate, DEFAULT_DEPTH_CAP,
};
use crate::newton::{
    beta_and_t0, newton_facets, nondegeneracy_mod_p, quasi_homogeneous_detect, Nondegeneracy,
    DEFAULT_QH_BOUND,
};
use crate::padic::{Ball, PadicRational};
use crate::poly::{parse_polynomial, SparsePolynomial};
use crate::schwartz::random_sb;
use crate::surface::{
    decay_table, restriction_admissible, restriction_bound, restriction_ratio, zeta_kernel,
    zeta_kernel_shells, GraphHypersurface,
};
use crate::wave::{solve_u, strichartz_report, windowed_spectrum, SolutionSpec};

/// Random test functions drawn for the restriction sup.
pub const RESTRICTION_SAMPLES: usize = 50;
/// Each has at most this many balls, with radius exponents in `-2..=2`.
pub const RESTRICTION_TERMS: usize = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ResourceLimit { .. } => 3,
        Error::CertificateUnavailable { .. } => 4,
        _ => 2,
    }
}

/// Validates `cfg`, runs it on the configured number of workers and returns
/// the report.
pub fn run(cfg: &JobConfig) -> Result<Report> {
    cfg.validate()?;
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?
            .install(|| dispatch(cfg)),
        None => dispatch(cfg),
    }
}

/// Runs `cfg` and writes the emitted bytes to `--out`, returning them too.
pub fn execute(cfg: &JobConfig) -> Result<Vec<u8>> {
    let report = run(cfg)?;
    let bytes = emit(&report, cfg.format)?;
    if let Some(path) = &cfg.out {
        std::fs::write(path, &bytes)?;
    }
    Ok(bytes)
}

fn dispatch(cfg: &JobConfig) -> Result<Report> {
    match cfg.command {
        Command::Newton => newton(cfg),
        Command::Expsum => expsum(cfg),
        Command::Surface => surface(cfg),
        Command::Solve => solve(cfg),
        Command::Strichartz => strichartz(cfg),
    }
}

fn text<'a>(field: &'a Option<String>, flag: &str) -> Result<&'a str> {
    field
        .as_deref()
        .ok_or_else(|| Error::invalid(format!("missing --{flag}")))
}

fn ints(v: &[u64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn point(x: &[PadicRational]) -> String {
    x.iter()
        .map(|c| {
            let r = c.to_ratio();
            format!("{}/{}", r.numer(), r.denom())
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn newton(cfg: &JobConfig) -> Result<Report> {
    let f = parse_polynomial(text(&cfg.poly, "poly")?)?;
    let poly = newton_facets(&f)?;
    let mut table = Table::new(&["normal", "support_value", "weight", "compact", "points"]);
    for facet in poly.facets() {
        let pts: Vec<String> = facet
            .points()
            .iter()
            .map(|e| format!("({})", e.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        table.push(vec![
            ints(facet.normal()).into(),
            facet.support_value().into(),
            facet.weight().into(),
            facet.is_compact().into(),
            pts.join(" ").into(),
        ]);
    }
    let mut report = Report::new("newton", table);
    report.set("polynomial", f.to_string());
    report.set("nvars", f.nvars());
    let (beta, t0) = beta_and_t0(&poly)?;
    report.set("beta", rational(&beta));
    report.set("t0", Value::Array(t0.iter().map(rational).collect()));
    let qh = match quasi_homogeneous_detect(&f, DEFAULT_QH_BOUND)? {
        Some(w) => json!({
            "alpha": w.alpha,
            "degree": w.degree,
            "beta": rational(&w.beta()),
        }),
        None => Value::Null,
    };
    report.set("quasi_homogeneous", qh);
    let verdict = nondegeneracy_mod_p(&f, cfg.prime, cfg.cap)?;
    report.set("nondegeneracy", verdict.to_string());
    match &verdict {
        Nondegeneracy::DegenerateModP { face, point } => {
            report.set("witness", json!({ "face": face, "point": point }));
        }
        Nondegeneracy::Indeterminate(why) => report.set("witness", why.clone()),
        Nondegeneracy::Certified => {}
    }
    Ok(report)
}

fn domain(cfg: &JobConfig, n: usize) -> Result<Ball> {
    match &cfg.ball {
        Some(spec) => parse_ball(cfg.prime, n, spec),
        None => Ok(Ball::unit(cfg.prime, n)),
    }
}

fn expsum(cfg: &JobConfig) -> Result<Report> {
    let p = cfg.prime;
    let f = parse_polynomial(text(&cfg.poly, "poly")?)?;
    let span = cfg.m.ok_or_else(|| Error::invalid("missing --m"))?;
    let a = domain(cfg, f.nvars())?;
    let mut table = Table::new(&["m", "abs_value", "re", "im", "exact_zero"]);
    for m in span.range() {
        let r = exp_sum(&f, &PadicRational::p_pow(p, -(m as i64)), &a, cfg.cap)?;
        let z = r.value();
        table.push(vec![m.into(), float(r.abs()), float(z.re), float(z.im), r.is_exact_zero().into()]);
    }
    let mut report = Report::new("expsum", table);
    report.set("polynomial", f.to_string());
    report.set("ball", a.to_string());

    let fit = match decay_fit(&f, &a, span.range(), cfg.cap) {
        Ok(fit) => json!({
            "slope": float(fit.slope),
            "intercept": float(fit.intercept),
            "residual": float(fit.residual),
            "used": fit.used,
            "beta": fit.beta.as_ref().map(rational),
            "quasi_homogeneous": fit.quasi_homogeneous,
            "consistent": fit.consistent,
        }),
        Err(Error::FitUndefined(why)) => json!({ "undefined": why }),
        Err(e) => return Err(e),
    };
    report.set("decay_fit", fit);

    let h = residue_histogram(&f, span.start, &a, cfg.cap)?;
    let counts: Map<String, Value> = h
        .counts()
        .iter()
        .map(|(r, n)| (r.to_string(), Value::from(*n)))
        .collect();
    report.set(
        "histogram",
        json!({ "m": span.start, "modulus": h.modulus(), "cells": h.cells(), "counts": counts }),
    );

    if cfg.certificate {
        let c = stationary_certificate(&f, &a, DEFAULT_DEPTH_CAP, span.end, cfg.cap)?;
        let verified: Vec<Value> = c
            .verified
            .iter()
            .map(|&(m, abs, exact)| json!({ "m": m, "abs_value": float(abs), "exact_zero": exact }))
            .collect();
        report.set(
            "certificate",
            json!({
                "index": c.index,
                "threshold_exp": c.threshold_exp,
                "classes": c.classes,
                "verified": verified,
                "all_vanish": c.all_vanish(),
            }),
        );
    }
    Ok(report)
}

const ZETA_Z: [(f64, f64); 4] = [(0.5, 0.0), (1.0, 0.0), (2.0, 1.0), (0.25, -3.0)];

/// Largest gap between the closed-form and shell-sum kernels on a small grid,
/// and whether `ζ_0 ≡ 1` holds there.
fn zeta_check(p: u64, opts: &EngineOptions) -> Result<(f64, bool)> {
    let mut worst = 0.0f64;
    let mut zero_is_one = true;
    for e0 in [1i64, 2] {
        for v in [-2i64, -1, 0, 1] {
            let x = PadicRational::p_pow(p, v);
            let one = zeta_kernel(p, Complex64::new(0.0, 0.0), &x, e0);
            zero_is_one &= (one - 1.0).norm() < 1e-12;
            for (re, im) in ZETA_Z {
                let z = Complex64::new(re, im);
                let gap = (zeta_kernel(p, z, &x, e0) - zeta_kernel_shells(p, z, &x, e0, opts)?).norm();
                worst = worst.max(gap);
            }
        }
    }
    Ok((worst, zero_is_one))
}

fn surface(cfg: &JobConfig) -> Result<Report> {
    let p = cfg.prime;
    let phi = parse_polynomial(text(&cfg.phi, "phi")?)?;
    let n = phi.nvars() + 1;
    let window = domain(cfg, n)?;
    let y = GraphHypersurface::new(p, phi, window, cfg.cap)?;
    let opts = EngineOptions::with_cap(cfg.cap);
    let span = cfg.k.ok_or_else(|| Error::invalid("missing --k"))?;
    let direction = match &cfg.direction {
        Some(d) => parse_vector(p, n, d)?,
        None => (0..n)
            .map(|j| PadicRational::from_int(p, (j == n - 1) as i64))
            .collect(),
    };
    let dt = decay_table(&y, &direction, span.range(), None, &opts)?;
    let ln_p = (p as f64).ln();
    let mut table = Table::new(&["k", "abs_value", "fitted_slope"]);
    let mut points = Vec::new();
    for row in &dt.rows {
        if row.abs > 1e-12 {
            points.push((row.k as f64, -row.abs.ln() / ln_p));
        }
        let slope = least_squares(&points).map(|(s, _, _)| s);
        table.push(vec![row.k.into(), float(row.abs), slope.map_or(Value::Null, float)]);
    }
    let mut report = Report::new("surface", table);
    report.set("phi", y.phi().to_string());
    report.set("window", y.window().to_string());
    report.set("direction", point(&direction));
    report.set("status", y.status().to_string());
    report.set("measure", rational(&y.measure(&opts)?));
    report.set("slope", dt.slope.map_or(Value::Null, float));
    report.set("model_exponent", dt.model_exponent.as_ref().map_or(Value::Null, rational));
    report.set("max_partial_degree", dt.max_partial_degree);
    report.set(
        "inverse_max_partial_degree",
        format!("1/{}", dt.max_partial_degree.max(1)),
    );
    report.set("consistent", dt.consistent.map_or(Value::Null, Value::from));

    let (gap, zero_is_one) = zeta_check(p, &opts)?;
    report.set("zeta_max_abs_diff", float(gap));
    report.set("zeta_zero_is_one", zero_is_one);

    if let Some(rho) = cfg.rho {
        let seed = cfg.seed.ok_or_else(|| Error::invalid("--rho needs --seed"))?;
        let beta = dt
            .model_exponent
            .as_ref()
            .and_then(|b| b.to_f64())
            .or(dt.slope)
            .ok_or_else(|| Error::FitUndefined("no decay exponent for the restriction range".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sup = 0.0f64;
        for _ in 0..RESTRICTION_SAMPLES {
            let g = random_sb(&mut rng, p, n, RESTRICTION_TERMS, -2..=2);
            sup = sup.max(restriction_ratio(&g, &y, rho.0, &opts)?);
        }
        report.set(
            "restriction",
            json!({
                "rho": rho.to_string(),
                "beta": float(beta),
                "bound": float(restriction_bound(beta)),
                "admissible": restriction_admissible(rho.0, beta),
                "samples": RESTRICTION_SAMPLES,
                "sup_ratio": float(sup),
            }),
        );
    }
    Ok(report)
}

fn wave_spec(cfg: &JobConfig) -> Result<SolutionSpec> {
    let phi: SparsePolynomial = parse_polynomial(text(&cfg.phi, "phi")?)?;
    let f0 = parse_f0(cfg.prime, phi.nvars(), text(&cfg.f0, "f0")?)?;
    SolutionSpec::new(f0, phi)
}

fn cartesian(values: &[PadicRational], n: usize) -> Vec<Vec<PadicRational>> {
    let mut out: Vec<Vec<PadicRational>> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    out
}

fn solve(cfg: &JobConfig) -> Result<Report> {
    let p = cfg.prime;
    let spec = wave_spec(cfg)?;
    let n = spec.dim();
    let opts = EngineOptions::with_cap(cfg.cap);
    let rmax = cfg.rmax.unwrap_or(3) as i64;
    let xs = cartesian(
        &[
            PadicRational::zero(p),
            PadicRational::one(p),
            PadicRational::p_pow(p, -1),
        ],
        n,
    );
    let ts: Vec<PadicRational> = std::iter::once(PadicRational::zero(p))
        .chain((1..=rmax).map(|k| PadicRational::p_pow(p, -k)))
        .collect();
    let mut table = Table::new(&["x", "t", "re", "im", "abs_value"]);
    for x in &xs {
        for t in &ts {
            let u = solve_u(&spec, x, t, &opts)?;
            table.push(vec![point(x).into(), point(std::slice::from_ref(t)).into(), float(u.re), float(u.im), float(u.norm())]);
        }
    }
    let mut report = Report::new("solve", table);
    report.set("phi", spec.phi().to_string());
    report.set("l2", float(spec.f0().l2_norm()));
    report.set("freq_bound", spec.freq_bound());
    report.set("phase_bound", spec.phase_bound());

    let residues: Vec<PadicRational> = (0..p as i64).map(|j| PadicRational::from_int(p, j)).collect();
    let mut grid = Vec::new();
    for xi in cartesian(&residues, n) {
        for tau in &residues {
            let w = windowed_spectrum(&spec, &xi, tau, 1, &opts)?;
            grid.push(json!({ "xi": point(&xi), "tau": point(std::slice::from_ref(tau)), "value": complex(w) }));
        }
    }
    report.set("windowed_spectrum", json!({ "r": 1, "grid": grid }));
    Ok(report)
}

fn strichartz(cfg: &JobConfig) -> Result<Report> {
    let spec = wave_spec(cfg)?;
    let opts = EngineOptions::with_cap(cfg.cap);
    let sigma = cfg.sigma.ok_or_else(|| Error::invalid("missing --sigma"))?;
    let rmax = cfg.rmax.ok_or_else(|| Error::invalid("missing --rmax"))? as i64;
    let rep = strichartz_report(&spec, sigma.0, rmax, &opts)?;
    let mut table = Table::new(&["r", "norm", "ratio", "increment"]);
    for row in &rep.rows {
        table.push(vec![row.r.into(), float(row.norm), float(row.ratio), float(row.increment)]);
    }
    let mut report = Report::new("strichartz", table);
    report.set("phi", spec.phi().to_string());
    report.set("sigma", sigma.to_string());
    report.set("l2", float(rep.l2));
    report.set("constant", float(rep.constant()));
    report.set("converging", rep.converging);
    report.set("diverging", rep.diverging);
    Ok(report)
}
