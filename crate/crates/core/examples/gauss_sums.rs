//! Exact Gauss sums E(p^-m, x^2) and their residue histograms.

use padic_dispersion::expsum::{exp_sum, residue_histogram};
use padic_dispersion::{parse_polynomial, Ball, PadicRational};

fn main() -> padic_dispersion::Result<()> {
    let f = parse_polynomial("x^2")?;
    for p in [3u64, 5, 7] {
        let a = Ball::unit(p, 1);
        for m in 1..=6 {
            let e = exp_sum(&f, &PadicRational::p_pow(p, -m), &a, 100_000_000)?;
            let expected = (p as f64).powf(-(m as f64) / 2.0);
            println!("p={p} m={m} |E| = {:.12} (p^(-m/2) = {:.12})", e.abs(), expected);
        }
    }
    let h = residue_histogram(&f, 2, &Ball::unit(3, 1), 1000)?;
    println!("x^2 mod 9: {:?}", h.counts());
    Ok(())
}
