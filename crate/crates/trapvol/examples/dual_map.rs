//! The dual map of a light-cone immersion: the unique null field q with
//! ⟨p,q⟩ = 1 normal to the surface, and the identity H = −n q.
//!
//!     cargo run --example dual_map

use trapvol::catalog;
use trapvol::nullframe::dual_map;
use trapvol::quad::sample_lattice;

fn main() {
    for id in ["lightcone-flat", "lightcone-parabolic"] {
        let rec = catalog::build(id).unwrap();
        let imm = &rec.immersion;
        println!("{id}:");
        let x = [0.25, -0.55];
        let q = dual_map(imm, &x).unwrap();
        let data = imm.eval(&x).unwrap();
        let p = data.position.as_slice();
        println!("  q({x:?}) = {:?}", q.as_slice());
        println!("  ⟨q,q⟩ = {:+.2e}", imm.chart.pairing(p, &q, &q));
        println!("  ⟨p,q⟩ = {:+.12}", imm.chart.pairing(p, &data.position, &q));
        println!(
            "  ⟨∂p,q⟩ = {:+.2e}, {:+.2e}",
            imm.chart.pairing(p, &data.partials[0], &q),
            imm.chart.pairing(p, &data.partials[1], &q)
        );

        let mut worst = 0.0f64;
        for node in sample_lattice(&imm.domain.box_intervals, 12) {
            let q = dual_map(imm, &node).unwrap();
            let h = imm.mean_curvature_vector(&node).unwrap();
            worst = worst.max((&h + &q * 2.0).norm());
        }
        println!("  max |H + 2q| over a 12×12 lattice: {worst:.2e}\n");
    }
}
