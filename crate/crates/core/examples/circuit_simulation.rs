//! Circuit simulation by growing a deep Boltzmann machine gate by gate,
//! checked against a state-vector simulation.
//!
//! cargo run --release --example circuit_simulation

use nqs::circuit::{statevector_oracle, Circuit, DbmCircuitGraph, InitialState};
use nqs::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn max_dev(a: &nqs::exact::DenseState, b: &nqs::exact::DenseState) -> f64 {
    a.amplitudes().iter().zip(b.amplitudes().iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn main() -> Result<()> {
    let ghz = Circuit::parse(3, "H 0\nH 1\nCZ 0 1\nH 1\nH 2\nCZ 1 2\nH 2\n")?;
    let init = InitialState::zeros(3);
    let graph = DbmCircuitGraph::from_circuit(&ghz, &init)?;
    let amps = graph.amplitudes()?;
    println!("GHZ circuit: {} visible vertices, {} hidden units", graph.vertices().len(), graph.hidden_units().len());
    for (i, a) in amps.amplitudes().iter().enumerate() {
        if a.norm() > 1e-12 {
            println!("  |{i:03b}>  {a:.6}");
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..5 {
        let c = Circuit::random(6, 10, &mut rng);
        let init: InitialState = "0+0+0+".parse()?;
        let dbm = DbmCircuitGraph::from_circuit(&c, &init)?.amplitudes()?;
        let sv = statevector_oracle(&c, &init)?;
        println!("random circuit {trial}: {} gates, max |dbm - statevector| = {:.1e}", c.gates().len(), max_dev(&dbm, &sv));
    }
    Ok(())
}
