//! Walk the example catalog: build every id, run its expected facts, and
//! print the key geometric quantities at the domain center.
//!
//!     cargo run --example catalog_tour

use trapvol::catalog;
use trapvol::nullframe::{shape_operator, theta, NullSign};

fn main() {
    for id in catalog::ids() {
        let rec = catalog::build(id).unwrap();
        println!("{id}  (chart {})", rec.chart.name);
        let center = rec.immersion.domain.center();
        let h = rec.immersion.mean_curvature_vector(&center).unwrap();
        let tp = theta(&rec.immersion, &rec.frame, &center, NullSign::Plus).unwrap();
        let tm = theta(&rec.immersion, &rec.frame, &center, NullSign::Minus).unwrap();
        let a = shape_operator(&rec.immersion, &rec.frame, &center, NullSign::Plus).unwrap();
        println!("  at center: |H| = {:.3}, θ⁺ = {:+.2e}, θ⁻ = {:+.3}", h.norm(), tp.value, tm.value);
        println!("  A₊ = [[{:+.3}, {:+.3}], [{:+.3}, {:+.3}]], tr(A₊²) = {:.3}",
            a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)], (&a * &a).trace());
        for outcome in catalog::verify_all_facts(&rec, 8).unwrap() {
            println!(
                "  {:32} residual {:9.2e}  tol {:8.1e}  {}",
                outcome.label,
                outcome.max_residual,
                outcome.tolerance,
                if outcome.pass { "ok" } else { "FAIL" }
            );
        }
        println!();
    }
}
