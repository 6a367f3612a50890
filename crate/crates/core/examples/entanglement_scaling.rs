//! Second Renyi entropy across left/right cuts of a 10-site chain for a
//! local RBM (area law, bounded by crossing hidden units) and a fully
//! connected RBM (entropy growing with the smaller region).
//!
//! cargo run --release --example entanglement_scaling

use nqs::bm::RbmState;
use nqs::entanglement::{arealaw_probe, Bipartition};
use nqs::{Result, C64};
use rand::Rng;
use std::f64::consts::PI;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Zero biases and phase-only couplings spread weight over all configurations.
fn main() -> Result<()> {
    let n = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cuts = (1..n).map(|k| Bipartition::left(n, k)).collect::<Result<Vec<_>>>()?;

    let mut local = RbmState::random_local(n, 2, 1, 1.0, &mut rng)?;
    local.visible_bias_mut().fill(C64::new(0.0, 0.0));
    local.hidden_bias_mut().fill(C64::new(0.0, 0.0));
    for w in local.weights_mut().iter_mut().filter(|w| w.norm() > 0.0) {
        *w = C64::new(0.0, rng.gen_range(-PI..PI));
    }
    let mut dense = RbmState::zeros(n, n);
    dense.weights_mut().iter_mut().for_each(|w| *w = C64::new(0.0, rng.gen_range(-PI..PI)));
    let local_rows = arealaw_probe(&local, &cuts)?;
    let dense_rows = arealaw_probe(&dense, &cuts)?;

    println!("{:>3} | {:>9} {:>9} | {:>9} {:>9}", "|A|", "local S2", "bound", "dense S2", "bound");
    for (l, d) in local_rows.iter().zip(&dense_rows) {
        println!("{:>3} | {:>9.4} {:>9.4} | {:>9.4} {:>9.4}", l.size_a, l.s2, l.bound, d.s2, d.bound);
    }
    let max = |rows: &[nqs::entanglement::CutReport]| rows.iter().map(|r| r.s2).fold(0.0, f64::max);
    println!("max S2: local {:.4}, fully connected {:.4}", max(&local_rows), max(&dense_rows));
    Ok(())
}
