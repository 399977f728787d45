//! Null normal frames: constructing them from the normal plane, the frame
//! pairings, expansions, shape operators and the marginally-trapped test —
//! including the untrapped round sphere as the negative control.
//!
//!     cargo run --example frames_and_expansions

use trapvol::catalog;
use trapvol::nullframe::{
    build_null_frame, marginally_trapped_check, shape_operator_via_nabla, NullSign,
};
use trapvol::quad::sample_lattice;

fn main() {
    let rec = catalog::build("lightcone-flat").unwrap();
    let imm = &rec.immersion;
    let x = [0.3, -0.4];

    // pointwise construction from the normal plane, no prescription needed
    // where H ≠ 0
    let sample = build_null_frame(imm, &x, None).unwrap();
    let p = imm.position(&x).unwrap();
    println!("constructed frame on lightcone-flat at {x:?}:");
    println!("  ℓ₊ = {:?}", sample.ell_plus.as_slice());
    println!("  ⟨ℓ₊,ℓ₊⟩ = {:+.2e}", imm.chart.pairing(p.as_slice(), &sample.ell_plus, &sample.ell_plus));
    println!("  ⟨ℓ₊,ℓ₋⟩ = {:+.6}", imm.chart.pairing(p.as_slice(), &sample.ell_plus, &sample.ell_minus));

    // the derivative route −⟨∇̄ℓ₊, ·⟩ agrees with the second-derivative one
    let a = shape_operator_via_nabla(imm, &rec.frame, &x, NullSign::Plus).unwrap();
    println!("  A₊ via ∇̄ℓ₊: diag = ({:+.4}, {:+.4})\n", a[(0, 0)], a[(1, 1)]);

    for id in catalog::ids() {
        let rec = catalog::build(id).unwrap();
        let pts = sample_lattice(&rec.immersion.domain.box_intervals, 10);
        let report =
            marginally_trapped_check(&rec.immersion, &rec.frame, &pts, 1e-6).unwrap();
        println!(
            "{id:26} max|θ⁺| = {:8.2e}  max|tr A₊| = {:8.2e}  trapped: {}",
            report.max_theta_plus,
            report.max_trace_a_plus,
            report.pass
        );
    }

    let (sphere, frame) = catalog::round_sphere_control(1.0);
    let pts = sample_lattice(&sphere.domain.box_intervals, 10);
    let report = marginally_trapped_check(&sphere, &frame, &pts, 1e-6).unwrap();
    println!(
        "{:26} max|θ⁺| = {:8.2e}  trapped: {}   (negative control)",
        "round-sphere-control", report.max_theta_plus, report.pass
    );
}
