//! u(x, t) for the p-adic Schrodinger-type equation with phi = xi^2.

use padic_dispersion::engine::EngineOptions;
use padic_dispersion::schwartz::SchwartzBruhatFn;
use padic_dispersion::wave::{solve_u, windowed_spectrum, SolutionSpec};
use padic_dispersion::{parse_polynomial, Ball, PadicRational};

fn main() -> padic_dispersion::Result<()> {
    let p = 3;
    let opts = EngineOptions::default();
    let f0 = SchwartzBruhatFn::indicator(Ball::unit(p, 1));
    let spec = SolutionSpec::new(f0, parse_polynomial("x^2")?)?;
    let origin = [PadicRational::zero(p)];
    for m in 0..=5 {
        let t = PadicRational::p_pow(p, -m);
        let u = solve_u(&spec, &origin, &t, &opts)?;
        println!("|u(0, 3^-{m})| = {:.12} (|t|^-1/2 = {:.12})", u.norm(), 3f64.powf(-(m as f64) / 2.0));
    }
    for (xi, tau) in [(1, 1), (1, 2), (2, 0)] {
        let w = windowed_spectrum(
            &spec,
            &[PadicRational::from_int(p, xi)],
            &PadicRational::from_int(p, tau),
            1,
            &opts,
        )?;
        println!("W_1({xi}, {tau}) = {w:.6}");
    }
    Ok(())
}
