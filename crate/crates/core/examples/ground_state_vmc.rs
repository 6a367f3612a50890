//! Variational ground state of a transverse-field Ising chain with an RBM,
//! once with exact full-sum expectations and stochastic reconfiguration,
//! once with Metropolis sampling and plain stochastic gradient descent.
//!
//! cargo run --release --example ground_state_vmc

use nqs::bm::RbmState;
use nqs::exact::ground_state_exact;
use nqs::hamiltonian::{build_tfim, Boundary};
use nqs::vmc::{solve_ground_state, Optimizer, TrainConfig};
use nqs::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let n = 8;
    let h = build_tfim(n, 1.0, 1.0, Boundary::Periodic)?;
    let (exact, _) = ground_state_exact(&h)?;
    let psi0 = RbmState::random(n, 2 * n, 0.01, &mut ChaCha8Rng::seed_from_u64(1));

    let full = TrainConfig {
        learning_rate: 0.05,
        batch_size: 1,
        sweeps: 150,
        samples_per_step: 0,
        seed: 1,
        gradient_clip: None,
        optimizer: Optimizer::Sr { diag_shift: 1e-3 },
        full_sum: true,
        magnetization: None,
    };
    let sampled = TrainConfig {
        learning_rate: 0.02,
        batch_size: 500,
        sweeps: 300,
        samples_per_step: 500,
        optimizer: Optimizer::Sgd,
        full_sum: false,
        ..full.clone()
    };

    println!("exact E0 = {exact:.8}");
    for (name, cfg) in [("full sum + SR", full), ("sampled + SGD", sampled)] {
        let r = solve_ground_state(&h, &psi0, &cfg)?;
        println!("{name}");
        for row in r.trace.iter().step_by(25) {
            println!("  iter {:>4}  E = {:>12.6} +- {:.2e}  acc {:.2}", row.iter, row.mean.re, row.stderr, row.acceptance);
        }
        println!("  best E = {:.8}, relative error {:.2e}", r.best_energy, (r.best_energy - exact).abs() / exact.abs());
    }
    Ok(())
}
