//! Restriction ratios ||Fg||_{L^2(Y)} / ||g||_rho for random test functions.

use padic_dispersion::engine::EngineOptions;
use padic_dispersion::schwartz::random_sb;
use padic_dispersion::surface::{restriction_bound, restriction_ratio, GraphHypersurface};
use padic_dispersion::parse_polynomial;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> padic_dispersion::Result<()> {
    let p = 3;
    let opts = EngineOptions::default();
    let y = GraphHypersurface::over_unit_ball(p, parse_polynomial("x^2")?, opts.cap)?;
    println!("rho must stay below {}", restriction_bound(0.5));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for rho in [1.0, 1.1, 1.19] {
        let mut sup = 0.0f64;
        for _ in 0..20 {
            let g = random_sb(&mut rng, p, 2, 3, -1..=1);
            sup = sup.max(restriction_ratio(&g, &y, rho, &opts)?);
        }
        println!("rho={rho}: sup ratio over 20 samples = {sup:.6}");
    }
    Ok(())
}
