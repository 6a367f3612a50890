//! Metropolis sampling from |Psi|^2 of a small RBM, compared with the exact
//! Born distribution.
//!
//! cargo run --release --example metropolis_sampling

use nqs::bm::RbmState;
use nqs::exact::materialize;
use nqs::vmc::{sample, SamplerOptions};
use nqs::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let n = 4;
    let psi = RbmState::random(n, 4, 0.6, &mut ChaCha8Rng::seed_from_u64(3));
    let exact = materialize(&psi, n)?.normalized()?.probabilities();

    let n_samples = 100_000;
    let (configs, acceptance) = sample(&psi, n_samples, 9, &SamplerOptions::default())?;
    let mut counts = vec![0usize; 1 << n];
    for v in &configs {
        counts[v.index()] += 1;
    }
    println!("acceptance {acceptance:.3}");
    println!("{:>5} {:>10} {:>10}", "v", "exact", "sampled");
    let mut tv = 0.0;
    for (i, p) in exact.iter().enumerate() {
        let q = counts[i] as f64 / n_samples as f64;
        tv += 0.5 * (p - q).abs();
        println!("{:>5} {p:>10.5} {q:>10.5}", format!("{i:04b}"));
    }
    println!("total variation distance {tv:.4}");
    Ok(())
}
