//! The kernel zeta_z in closed form and as a shell sum.

use num_complex::Complex64;
use padic_dispersion::engine::EngineOptions;
use padic_dispersion::surface::{zeta_kernel, zeta_kernel_shells};
use padic_dispersion::PadicRational;

fn main() -> padic_dispersion::Result<()> {
    let p = 3;
    let opts = EngineOptions::default();
    for v in [-2i64, 0, 1] {
        let x = PadicRational::p_pow(p, v);
        for z in [Complex64::new(0.5, 0.0), Complex64::new(2.0, 1.0)] {
            let closed = zeta_kernel(p, z, &x, 0);
            let shells = zeta_kernel_shells(p, z, &x, 0, &opts)?;
            println!("v(x)={v} z={z}: {closed:.12} vs {shells:.12}");
        }
    }
    Ok(())
}
