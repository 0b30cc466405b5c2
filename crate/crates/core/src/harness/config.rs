use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{is_prime, Ball, PadicRational, DEFAULT_CAP};
use crate::schwartz::SchwartzBruhatFn;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Newton,
    Expsum,
    Surface,
    Solve,
    Strichartz,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Newton => "newton",
            Command::Expsum => "expsum",
            Command::Surface => "surface",
            Command::Solve => "solve",
            Command::Strichartz => "strichartz",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Inclusive integer range written `A..B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Span {
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub fn new(start: u32, end: u32) -> Result<Self> {
        if start > end {
            return Err(Error::invalid(format!("empty range {start}..{end}")));
        }
        Ok(Span { start, end })
    }

    pub fn range(self) -> std::ops::RangeInclusive<u32> {
        self.start..=self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for Span {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| Error::invalid(format!("range `{s}` is not of the form A..B")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::invalid(format!("bad range bound `{t}`")))
        };
        Span::new(parse(a)?, parse(b)?)
    }
}

impl TryFrom<String> for Span {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Span> for String {
    fn from(s: Span) -> String {
        s.to_string()
    }
}

/// A Lebesgue exponent in `[1, ∞]`, written as a decimal or `inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LpExponent(pub f64);

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for LpExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let v = if t.eq_ignore_ascii_case("inf") {
            f64::INFINITY
        } else if let Some((a, b)) = t.split_once('/') {
            let a: f64 = a.parse().map_err(|_| Error::invalid(format!("bad exponent `{s}`")))?;
            let b: f64 = b.parse().map_err(|_| Error::invalid(format!("bad exponent `{s}`")))?;
            a / b
        } else {
            t.parse().map_err(|_| Error::invalid(format!("bad exponent `{s}`")))?
        };
        if v.is_nan() || v < 1.0 {
            return Err(Error::invalid(format!("exponent {s} is below 1")));
        }
        Ok(LpExponent(v))
    }
}

impl TryFrom<String> for LpExponent {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<LpExponent> for String {
    fn from(e: LpExponent) -> String {
        e.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Parser)]
#[command(name = "padic-dispersion", version, about = "Exact p-adic oscillatory integrals and dispersive estimates")]
pub struct JobConfig {
    #[arg(value_enum)]
    pub command: Command,

    #[arg(long)]
    pub prime: u64,

    /// Polynomial for `newton` and `expsum`, e.g. "x1^2+x2^3".
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,

    /// Graph function for `surface`, symbol for `solve` and `strichartz`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,

    /// Initial data: "ball <c1> .. <cn> <e> [re|re,im]", ';'-separated.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<String>,

    /// Domain ball for `expsum`, window for `surface`: "ball <c1> .. <cn> <e>".
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball: Option<String>,

    /// Unit ray direction for the `surface` decay table, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Span>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Span>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmax: Option<u32>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<LpExponent>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<LpExponent>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    #[arg(long, default_value_t = DEFAULT_CAP)]
    #[serde(default = "default_cap")]
    pub cap: u64,

    #[arg(long, env = "PADIC_THREADS")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    #[serde(default)]
    pub format: Format,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Also run the stationary-phase certificate (`expsum`).
    #[arg(long)]
    #[serde(default)]
    pub certificate: bool,
}

fn default_cap() -> u64 {
    DEFAULT_CAP
}

impl JobConfig {
    pub fn new(command: Command, prime: u64) -> Self {
        JobConfig {
            command,
            prime,
            poly: None,
            phi: None,
            f0: None,
            ball: None,
            direction: None,
            m: None,
            k: None,
            rmax: None,
            sigma: None,
            rho: None,
            seed: None,
            cap: DEFAULT_CAP,
            threads: None,
            format: Format::Json,
            out: None,
            certificate: false,
        }
    }

    /// Parses command-line arguments (without the program name).
    pub fn from_args<I, S>(args: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<std::ffi::OsString> + Clone,
    {
        let argv = std::iter::once(std::ffi::OsString::from("padic-dispersion"))
            .chain(args.into_iter().map(Into::into));
        JobConfig::try_parse_from(argv).map_err(|e| Error::invalid(e.to_string()))
    }

    /// The argument vector that parses back to this config.
    pub fn to_args(&self) -> Vec<String> {
        let mut a = vec![self.command.name().to_string(), "--prime".into(), self.prime.to_string()];
        let mut opt = |flag: &str, v: Option<String>| {
            if let Some(v) = v {
                a.push(format!("--{flag}"));
                a.push(v);
            }
        };
        opt("poly", self.poly.clone());
        opt("phi", self.phi.clone());
        opt("f0", self.f0.clone());
        opt("ball", self.ball.clone());
        opt("direction", self.direction.clone());
        opt("m", self.m.map(|s| s.to_string()));
        opt("k", self.k.map(|s| s.to_string()));
        opt("rmax", self.rmax.map(|r| r.to_string()));
        opt("sigma", self.sigma.map(|s| s.to_string()));
        opt("rho", self.rho.map(|s| s.to_string()));
        opt("seed", self.seed.map(|s| s.to_string()));
        opt("cap", Some(self.cap.to_string()));
        opt("threads", self.threads.map(|t| t.to_string()));
        opt(
            "format",
            Some(match self.format {
                Format::Json => "json".into(),
                Format::Csv => "csv".into(),
            }),
        );
        opt("out", self.out.as_ref().map(|p| p.display().to_string()));
        if self.certificate {
            a.push("--certificate".into());
        }
        a
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.prime) {
            return Err(Error::invalid(format!("{} is not prime", self.prime)));
        }
        if self.cap == 0 {
            return Err(Error::invalid("cap must be positive"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("thread count must be positive"));
        }
        let need = |name: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(Error::invalid(format!("`{}` needs --{name}", self.command.name())))
            }
        };
        match self.command {
            Command::Newton => need("poly", self.poly.is_some()),
            Command::Expsum => {
                need("poly", self.poly.is_some())?;
                need("m", self.m.is_some())
            }
            Command::Surface => {
                need("phi", self.phi.is_some())?;
                need("k", self.k.is_some())?;
                if self.rho.is_some() {
                    need("seed", self.seed.is_some())?;
                }
                Ok(())
            }
            Command::Solve => {
                need("phi", self.phi.is_some())?;
                need("f0", self.f0.is_some())
            }
            Command::Strichartz => {
                need("phi", self.phi.is_some())?;
                need("f0", self.f0.is_some())?;
                need("sigma", self.sigma.is_some())?;
                need("rmax", self.rmax.is_some())
            }
        }
    }
}

fn parse_ball_tokens(p: u64, n: usize, tokens: &[&str]) -> Result<Ball> {
    let center = tokens[..n]
        .iter()
        .map(|t| PadicRational::parse(p, t))
        .collect::<Result<Vec<_>>>()?;
    let e: i64 = tokens[n]
        .parse()
        .map_err(|_| Error::invalid(format!("bad radius exponent `{}`", tokens[n])))?;
    Ball::new(p, center, e)
}

fn ball_words(spec: &str) -> Result<Vec<&str>> {
    let mut words = spec.split_whitespace();
    match words.next() {
        Some("ball") => Ok(words.collect()),
        _ => Err(Error::invalid(format!("`{}` does not start with `ball`", spec.trim()))),
    }
}

/// Parses "ball <c1> .. <cn> <e>".
pub fn parse_ball(p: u64, n: usize, spec: &str) -> Result<Ball> {
    let words = ball_words(spec)?;
    if words.len() != n + 1 {
        return Err(Error::invalid(format!(
            "ball in dimension {n} needs {n} center components and a radius exponent"
        )));
    }
    parse_ball_tokens(p, n, &words)
}

fn parse_coefficient(t: &str) -> Result<Complex64> {
    let bad = || Error::invalid(format!("bad coefficient `{t}`"));
    let (re, im) = match t.split_once(',') {
        Some((a, b)) => (a, b),
        None => (t, "0"),
    };
    Ok(Complex64::new(
        re.trim().parse().map_err(|_| bad())?,
        im.trim().parse().map_err(|_| bad())?,
    ))
}

/// Parses the ';'-separated ball list into a Schwartz-Bruhat function.
/// Overlapping balls are allowed; their coefficients add.
pub fn parse_f0(p: u64, n: usize, spec: &str) -> Result<SchwartzBruhatFn> {
    let mut terms = Vec::new();
    for part in spec.split(';').filter(|s| !s.trim().is_empty()) {
        let words = ball_words(part)?;
        let coeff = match words.len() {
            l if l == n + 1 => Complex64::new(1.0, 0.0),
            l if l == n + 2 => parse_coefficient(words[n + 1])?,
            _ => {
                return Err(Error::invalid(format!(
                    "`{}` does not describe a ball in dimension {n}",
                    part.trim()
                )))
            }
        };
        terms.push((parse_ball_tokens(p, n, &words)?, coeff));
    }
    if terms.is_empty() {
        return Err(Error::invalid("initial data has no balls"));
    }
    SchwartzBruhatFn::from_overlapping(p, n, terms)
}

/// Parses a comma-separated vector of rationals.
pub fn parse_vector(p: u64, n: usize, spec: &str) -> Result<Vec<PadicRational>> {
    let v = spec
        .split(',')
        .map(|t| PadicRational::parse(p, t.trim()))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != n {
        return Err(Error::invalid(format!("expected {n} components, got {}", v.len())));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_parses_and_prints() {
        let s: Span = "1..6".parse().unwrap();
        assert_eq!(s, Span { start: 1, end: 6 });
        assert_eq!(s.to_string(), "1..6");
        assert!("6..1".parse::<Span>().is_err());
        assert!("3".parse::<Span>().is_err());
    }

    #[test]
    fn exponent_accepts_inf_and_fractions() {
        assert!("inf".parse::<LpExponent>().unwrap().0.is_infinite());
        assert_eq!("6/5".parse::<LpExponent>().unwrap().0, 1.2);
        assert!("0.5".parse::<LpExponent>().is_err());
    }

    #[test]
    fn cli_example_parses() {
        let c = JobConfig::from_args(["newton", "--prime", "3", "--poly", "x1^2+x2^2"]).unwrap();
        assert_eq!(c.command, Command::Newton);
        assert_eq!(c.poly.as_deref(), Some("x1^2+x2^2"));
        c.validate().unwrap();
        assert_eq!(JobConfig::from_args(c.to_args()).unwrap(), c);
    }

    #[test]
    fn validation_catches_missing_flags() {
        let c = JobConfig::new(Command::Expsum, 3);
        assert!(c.validate().is_err());
        let c = JobConfig::new(Command::Newton, 4);
        assert!(c.validate().is_err());
    }

    #[test]
    fn f0_grammar() {
        let f = parse_f0(3, 1, "ball 0 0").unwrap();
        assert_eq!(f.terms().len(), 1);
        let f = parse_f0(3, 2, "ball 0 0 1 2,-1; ball 1/3 1 -1 0.5").unwrap();
        assert!(f.terms().len() >= 2);
        assert!(parse_f0(3, 1, "ball 0").is_err());
        assert!(parse_f0(3, 1, "cube 0 0").is_err());
    }
}
