//! Truncated space-time norms of solutions and their growth in R.

use padic_dispersion::engine::EngineOptions;
use padic_dispersion::schwartz::SchwartzBruhatFn;
use padic_dispersion::wave::{strichartz_report, SolutionSpec};
use padic_dispersion::{parse_polynomial, Ball};

fn main() -> padic_dispersion::Result<()> {
    let p = 3;
    let opts = EngineOptions::default();
    let f0 = SchwartzBruhatFn::indicator(Ball::unit(p, 1));
    for (phi, sigma) in [("x^2", 6.0), ("x^3", 8.0), ("x^2", 2.0)] {
        let spec = SolutionSpec::new(f0.clone(), parse_polynomial(phi)?)?;
        let rep = strichartz_report(&spec, sigma, 4, &opts)?;
        println!("phi={phi} sigma={sigma}: converging={} diverging={}", rep.converging, rep.diverging);
        for row in &rep.rows {
            println!("  R={} norm={:.8} increment={:.6e}", row.r, row.norm, row.increment);
        }
    }
    Ok(())
}
