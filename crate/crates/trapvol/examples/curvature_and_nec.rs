//! Curvature of the built-in charts and the pointwise null energy
//! condition sweep: the focusing pp-wave passes, the defocusing one fails.
//!
//!     cargo run --example curvature_and_nec

use trapvol::ambient::charts;
use trapvol::AVec;

fn main() {
    let points: Vec<Vec<f64>> = vec![
        vec![0.0, 0.0, 0.5, 0.5],
        vec![0.3, -0.2, -0.8, 1.0],
        vec![-0.5, 0.4, 1.2, -0.7],
    ];

    for chart in [charts::minkowski(4), charts::ppwave(-1.0), charts::ppwave(1.0)] {
        println!("chart {}", chart.name);
        let x = &points[1];
        let sample = chart.riemann(x).unwrap();
        println!("  max |R| component at {x:?}: {:.3e}", sample.riemann.max_abs());
        let eu = AVec::from_column_slice(&[1.0, 0.0, 0.0, 0.0]);
        println!("  Ric(∂u, ∂u) = {:+.6}", chart.ricci(x, &eu, &eu).unwrap());
        let nec = chart.nec_check(&points, 32, 1e-8).unwrap();
        println!(
            "  NEC over {} null directions per point: min Ric(ℓ,ℓ) = {:+.3e} → {}",
            nec.directions_per_point,
            nec.min_value,
            if nec.pass { "pass" } else { "VIOLATED" }
        );
        println!();
    }

    // geodesics curve in the focusing chart: transverse coordinates
    // oscillate while u advances linearly
    let chart = charts::ppwave(-1.0);
    let p = AVec::from_column_slice(&[0.0, 0.0, 1.0, 0.0]);
    let v = AVec::from_column_slice(&[1.0, 0.0, 0.0, 0.0]);
    println!("geodesic from x = 1 with velocity ∂u in ppwave(-1):");
    for k in 1..=4 {
        let t = 0.4 * k as f64;
        let s = chart.exp_map(&p, &v, t).unwrap();
        println!(
            "  t = {t:.1}: u = {:+.3}, x = {:+.4} (cos t = {:+.4})",
            s.position[0],
            s.position[2],
            t.cos()
        );
    }
}
