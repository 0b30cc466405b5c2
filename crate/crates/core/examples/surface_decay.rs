//! Fourier decay of surface measures on graphs y = phi(x').

use padic_dispersion::engine::EngineOptions;
use padic_dispersion::surface::{decay_table, GraphHypersurface};
use padic_dispersion::{parse_polynomial, PadicRational};

fn main() -> padic_dispersion::Result<()> {
    let opts = EngineOptions::default();
    for (p, text) in [(3u64, "x^2"), (7, "x^3"), (3, "x1^2+x2^2")] {
        let phi = parse_polynomial(text)?;
        let y = GraphHypersurface::over_unit_ball(p, phi, opts.cap)?;
        let n = y.dim();
        let dir: Vec<PadicRational> = (0..n).map(|j| PadicRational::from_int(p, (j == n - 1) as i64)).collect();
        let t = decay_table(&y, &dir, 1..=6, None, &opts)?;
        println!("p={p} phi={text} status={}", y.status());
        for row in &t.rows {
            println!("  k={} |mu^(xi)| = {:.6e}", row.k, row.abs);
        }
        println!("  slope {:?}, model exponent {:?}", t.slope, t.model_exponent.map(|b| b.to_string()));
    }
    Ok(())
}
