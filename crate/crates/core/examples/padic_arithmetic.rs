//! Valuations, the additive character and ball bookkeeping in Q_p.

use padic_dispersion::padic::{character, Ball, PadicRational};

fn main() -> padic_dispersion::Result<()> {
    let p = 5;
    let x = PadicRational::parse(p, "7/25")?;
    println!("x = 7/25, v_5(x) = {:?}, |x| = {}", x.valuation(), x.abs());

    let psi = character(&x);
    println!("Psi(x) = e^(2 pi i {}/{}) = {}", psi.numerator(), 5u64.pow(psi.level()), psi.value());

    let y = PadicRational::parse(p, "3/10")?;
    let sum = character(&(&x + &y));
    let prod = character(&x).value() * character(&y).value();
    println!("Psi(x+y) = {}, Psi(x)Psi(y) = {}", sum.value(), prod);

    let b = Ball::new(p, vec![PadicRational::parse(p, "1/5")?], 1)?;
    println!("{b} has volume {}", b.volume());
    for child in b.children().iter().take(2) {
        println!("  child {child}");
    }
    Ok(())
}
