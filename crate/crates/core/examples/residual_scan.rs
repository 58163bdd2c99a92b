//! Prints grid residuals of the three-photon ansatz for several B and grid
//! sizes.

use solitonq_core::eigencheck::residual;
use solitonq_core::{GridSpec, SolitonParams};

fn main() {
    println!("B,points,global_residual,bulk_residual,region_spread");
    for b in [0.0, 1.0, 2.0 / 3.0, 2.0] {
        for pts in [32, 48, 64, 96, 128] {
            let params = SolitonParams::new(-1.0, 1.0, b, 2, 1);
            let r = residual(&params, &GridSpec::new(pts, 8.0).unwrap(), 0.0).unwrap();
            println!("{b:.4},{pts},{:.4e},{:.4e},{:.4e}", r.global_residual, r.bulk_residual, r.region_spread());
        }
    }
}
