//! Newton polyhedra, the decay exponent beta_f and quasi-homogeneity.

use padic_dispersion::newton::{
    beta_and_t0, newton_facets, nondegeneracy_mod_p, quasi_homogeneous_detect, DEFAULT_QH_BOUND,
};
use padic_dispersion::parse_polynomial;

fn main() -> padic_dispersion::Result<()> {
    for text in ["x1^2+x2^2", "x^3", "x1^2+x2^3", "x1^4+x1^2*x2^2+x2^4"] {
        let f = parse_polynomial(text)?;
        let poly = newton_facets(&f)?;
        let (beta, t0) = beta_and_t0(&poly)?;
        let t0: Vec<String> = t0.iter().map(|t| t.to_string()).collect();
        println!("{text}: beta = {beta}, t0 = ({})", t0.join(", "));
        for facet in poly.facets() {
            println!("  normal {:?} . x >= {}", facet.normal(), facet.support_value());
        }
        if let Some(w) = quasi_homogeneous_detect(&f, DEFAULT_QH_BOUND)? {
            println!("  quasi-homogeneous, alpha = {:?}, d = {}", w.alpha, w.degree);
        }
        println!("  mod 5: {}", nondegeneracy_mod_p(&f, 5, 1_000_000)?);
    }
    Ok(())
}
