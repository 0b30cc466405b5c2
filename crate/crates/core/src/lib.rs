//! Exact p-adic oscillatory integrals.
//!
//! The crate evaluates integrals of the additive character `Ψ` of `Q_p`
//! against polynomial phases over balls, and builds on them: Newton polyhedra
//! and decay exponents, exponential sums with stationary-phase certificates,
//! Fourier transforms of surface-carried measures, restriction ratios, and
//! solutions of wave-type equations `∂_t u = φ(∂) u` with truncated
//! Strichartz norms.
//!
//! All integrals reduce to integer histograms of a polynomial modulo `p^m`;
//! see [`engine`].

pub mod engine;
pub mod error;
pub mod expsum;
pub mod harness;
pub mod newton;
pub mod padic;
pub mod poly;
pub mod schwartz;
pub mod surface;
pub mod wave;

pub use engine::{EngineOptions, ExpSumResult, QpPoly};
pub use error::{Error, Result};
pub use padic::{Ball, PadicRational, RootOfUnity};
pub use poly::{parse_polynomial, SparsePolynomial};
