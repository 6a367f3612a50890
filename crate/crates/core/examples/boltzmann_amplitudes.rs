//! Amplitudes of random RBM, BM and DBM states, compared with a direct sum
//! over hidden configurations, plus a tiny feed-forward network.
//!
//! cargo run --example boltzmann_amplitudes

use nalgebra::{DMatrix, DVector};
use nqs::bm::{BmState, DbmState, RbmState};
use nqs::net::{ffn_amplitude, perceptron_nand, Activation, DenseLayer, FeedForwardNet};
use nqs::spin::all_configurations;
use nqs::{Convention, NqsState, Result, SpinConfiguration, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sum over hidden bits of exp(a.v + b.h + v^T W h) with v, h in {0, 1}.
fn rbm_by_hand(s: &RbmState, v: &SpinConfiguration) -> C64 {
    let m = s.n_hidden();
    (0..1usize << m)
        .map(|hi| {
            let h: Vec<f64> = (0..m).map(|j| ((hi >> (m - 1 - j)) & 1) as f64).collect();
            let mut e = C64::new(0.0, 0.0);
            for i in 0..v.len() {
                e += s.visible_bias()[i] * v.value(i);
                for j in 0..m {
                    e += s.weights()[(i, j)] * v.value(i) * h[j];
                }
            }
            for j in 0..m {
                e += s.hidden_bias()[j] * h[j];
            }
            e.exp()
        })
        .sum()
}

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let rbm = RbmState::random(4, 3, 0.5, &mut rng);
    let bm = BmState::random(4, 3, 0.3, &mut rng);
    let dbm = DbmState::random(4, 3, 2, 0.3, &mut rng);

    println!("{:>4} {:>28} {:>12} {:>28} {:>28}", "v", "rbm", "|rbm-ref|", "bm", "dbm");
    let mut worst: f64 = 0.0;
    for v in all_configurations(4, Convention::ZeroOne) {
        let a = rbm.amplitude(&v)?;
        let reference = rbm_by_hand(&rbm, &v);
        worst = worst.max((a - reference).norm() / reference.norm());
        let bits: String = v.bits().iter().map(|b| char::from(b'0' + b)).collect();
        println!(
            "{bits:>4} {:>28} {:>12.2e} {:>28} {:>28}",
            format!("{:.5}", a),
            (a - reference).norm(),
            format!("{:.5}", bm.amplitude(&v)?),
            format!("{:.5}", dbm.amplitude(&v)?)
        );
    }
    println!("largest relative deviation of the RBM from the hand sum: {worst:.2e}");

    // a single neuron computing NAND
    for (x1, x2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        println!("NAND({x1}, {x2}) = {}", perceptron_nand(x1, x2));
    }

    // two-layer complex network with a cosine hidden layer
    let w1 = DMatrix::from_fn(3, 4, |i, j| C64::new(0.3 * (i as f64 - j as f64), 0.1 * (i + j) as f64));
    let l1 = DenseLayer::new(w1, DVector::from_element(3, C64::new(0.1, 0.0)), Activation::Cos)?;
    let l2 = DenseLayer::new(DMatrix::from_element(1, 3, C64::new(0.5, 0.2)), DVector::zeros(1), Activation::Softplus)?;
    let net = FeedForwardNet::new(vec![l1, l2])?;
    let v = SpinConfiguration::new(vec![1, 0, 1, 1], Convention::ZeroOne);
    println!("feed-forward amplitude at 1011: {:.6}", ffn_amplitude(&net, &v)?);
    Ok(())
}
