//! Neural-network tomography from exact Pauli-basis statistics: a pure Bell
//! state, a W state and a depolarized Bell pair with a purified model.
//!
//! cargo run --release --example tomography

use nalgebra::{DMatrix, DVector};
use nqs::exact::DenseState;
use nqs::tomo::{all_pauli_bases, records_from_state, tomo_mixed, tomo_pure, MeasuredState, PurifiedRbm, TomoConfig};
use nqs::{Result, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state(amps: &[(usize, f64)], n: usize) -> Result<DenseState> {
    let mut v = DVector::from_element(1 << n, C64::new(0.0, 0.0));
    for &(i, a) in amps {
        v[i] = C64::new(a, 0.0);
    }
    DenseState::new(v)
}

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = std::f64::consts::FRAC_1_SQRT_2;

    let bell = state(&[(0, s), (3, s)], 2)?;
    let records = records_from_state(MeasuredState::Pure(&bell), &all_pauli_bases(2))?;
    let model = PurifiedRbm::random(2, 2, 0, 0.5, &mut rng)?;
    let cfg = TomoConfig { learning_rate: 0.1, epochs: 5000, tolerance: 0.0, direction: Default::default() };
    let r = tomo_pure(&records, &model, &cfg, Some(&bell))?;
    println!("bell: divergence {:.2e}, fidelity {:.5}", r.divergence.last().unwrap(), r.fidelity.last().unwrap());

    let h = 0.5;
    let w = state(&[(1, h), (2, h), (4, h), (8, h)], 4)?;
    let records = records_from_state(MeasuredState::Pure(&w), &all_pauli_bases(4))?;
    let model = PurifiedRbm::random(4, 8, 0, 0.5, &mut rng)?;
    let cfg = TomoConfig { epochs: 1000, ..cfg };
    let r = tomo_pure(&records, &model, &cfg, Some(&w))?;
    println!("w4 ({} bases): fidelity {:.5} after {} epochs", records.len(), r.fidelity.last().unwrap(), cfg.epochs);

    let a = bell.amplitudes();
    let rho = a * a.adjoint() * C64::new(0.8, 0.0) + DMatrix::identity(4, 4) * C64::new(0.05, 0.0);
    let records = records_from_state(MeasuredState::Mixed(&rho), &all_pauli_bases(2))?;
    let model = PurifiedRbm::random(2, 4, 2, 0.5, &mut rng)?;
    let cfg = TomoConfig { epochs: 5000, ..cfg };
    let r = tomo_mixed(&records, &model, &cfg, Some(&rho))?;
    println!("depolarized bell: trace distance {:.2e}", r.trace_distance.last().unwrap());
    Ok(())
}
