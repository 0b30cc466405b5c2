//! Vanishing of exponential sums away from critical points.

use padic_dispersion::expsum::{stationary_certificate, DEFAULT_DEPTH_CAP};
use padic_dispersion::{parse_polynomial, Ball, Error, PadicRational};

fn main() -> padic_dispersion::Result<()> {
    let p = 3;
    let cases = [
        ("x^2+x+1", Ball::centered(p, 1, 1)),
        ("x^2", Ball::new(p, vec![PadicRational::one(p)], 1)?),
        ("x^2", Ball::unit(p, 1)),
    ];
    for (text, a) in cases {
        let f = parse_polynomial(text)?;
        match stationary_certificate(&f, &a, DEFAULT_DEPTH_CAP, 6, 1_000_000) {
            Ok(c) => {
                println!("{text} on {a}: I = {}, vanishing beyond 3^{}", c.index, c.threshold_exp);
                for (m, abs, exact) in &c.verified {
                    println!("  m={m} |E| = {abs:.3e} exact zero: {exact}");
                }
            }
            Err(Error::CertificateUnavailable { class }) => {
                println!("{text} on {a}: critical point in {class}");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
