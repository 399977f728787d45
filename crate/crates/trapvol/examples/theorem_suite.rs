//! The volume-maximality property suite: seeded random variations inside
//! the null sweep are reparametrized into characteristic variations, whose
//! first variation must vanish and second variation must be non-positive.
//!
//!     cargo run --example theorem_suite [seeds]

use trapvol::catalog;
use trapvol::nullspace::{theorem_suite, NullSpaceMap, TheoremTolerances};
use trapvol::quad::QuadratureGrid;

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    for id in catalog::ids() {
        let rec = catalog::build(id).unwrap();
        let nmap = NullSpaceMap::new(rec.immersion.clone(), rec.frame.clone(), rec.t_window);
        let grid = QuadratureGrid::for_domain(&rec.immersion.domain, 10);
        let report = theorem_suite(&nmap, &grid, 0..seeds, TheoremTolerances::default()).unwrap();
        println!(
            "{id:26} {}  min d²Vol = {:+.3e}",
            if report.pass { "pass" } else { "FAIL" },
            report.min_second_formula
        );
        for row in &report.rows {
            println!(
                "  seed {:2}  δ = {:.3}  dVol = {:+.2e} (floor {:.1e})  d²Vol fd = {:+.4e}, formula = {:+.4e}",
                row.seed, row.delta, row.first_fd, row.first_floor, row.second_fd, row.second_formula
            );
        }
    }
}
