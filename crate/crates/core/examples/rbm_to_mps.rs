//! Exact conversion of local RBMs to matrix product states. The bond
//! dimension at each cut is bounded by 2^(hidden units crossing the cut).
//!
//! cargo run --release --example rbm_to_mps

use nqs::bm::RbmState;
use nqs::exact::materialize;
use nqs::spin::all_configurations;
use nqs::tensor::{mps_amplitude, rbm_to_mps, rbm_to_tensor_network, DEFAULT_MAX_BOND};
use nqs::{NqsState, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, window, per_window) in [(6, 2, 1), (8, 2, 2), (8, 3, 1), (10, 4, 1)] {
        let rbm = RbmState::random_local(n, window, per_window, 0.5, &mut rng)?;
        let conv = rbm_to_mps(&rbm, DEFAULT_MAX_BOND)?;
        let exact = materialize(&rbm, n)?;
        let scale = exact.amplitudes().iter().map(|a| a.norm()).fold(0.0, f64::max);
        let c = conv.log_constant.exp();
        let mut dev: f64 = 0.0;
        for v in all_configurations(n, rbm.visible_convention()) {
            dev = dev.max((exact.amplitudes()[v.index()] - c * mps_amplitude(&conv.mps, &v)?).norm());
        }
        println!(
            "n={n:>2} window={window} per_window={per_window}  crossings {:?}  bonds {:?}  rel dev {:.1e}",
            conv.crossings,
            conv.mps.bond_dims(),
            dev / scale
        );
    }

    // the same amplitude from contracting the RBM tensor network directly
    let rbm = RbmState::random_local(6, 2, 1, 0.5, &mut rng)?;
    let tn = rbm_to_tensor_network(&rbm)?;
    let v = nqs::SpinConfiguration::new(vec![1, 0, 0, 1, 1, 0], rbm.visible_convention());
    println!("network contraction {:.6}  direct {:.6}", tn.amplitude(&v)?, rbm.amplitude(&v)?);
    Ok(())
}
