use nalgebra::DVector;

use super::{Circuit, Gate, InitialState, QubitInit};
use crate::error::Result;
use crate::exact::DenseState;
use crate::state::C64;

/// Gate-by-gate simulation of the full 2^n state vector with the exact
/// unitaries H, Z(theta) = diag(e^{-i theta/2}, e^{i theta/2}), CZ and
/// CZ(theta) = diag(1, 1, 1, e^{i theta}).
pub fn statevector_oracle(circuit: &Circuit, initial: &InitialState) -> Result<DenseState> {
    let n = circuit.n_qubits();
    if initial.len() != n {
        return Err(crate::NqsError::Shape { expected: n, got: initial.len() });
    }
    let dim = 1usize << n;
    let mask = |q: usize| 1usize << (n - 1 - q);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = DVector::from_element(dim, C64::new(1.0, 0.0));
    for (q, init) in initial.0.iter().enumerate() {
        for idx in 0..dim {
            let one = idx & mask(q) != 0;
            psi[idx] *= match init {
                QubitInit::Zero => C64::new(if one { 0.0 } else { 1.0 }, 0.0),
                QubitInit::Plus => C64::new(h, 0.0),
            };
        }
    }
    for gate in circuit.gates() {
        match *gate {
            Gate::H(q) => {
                for idx in (0..dim).filter(|i| i & mask(q) == 0) {
                    let (a, b) = (psi[idx], psi[idx | mask(q)]);
                    psi[idx] = (a + b) * h;
                    psi[idx | mask(q)] = (a - b) * h;
                }
            }
            Gate::Z { qubit, theta } => {
                for idx in 0..dim {
                    let sign = if idx & mask(qubit) != 0 { 1.0 } else { -1.0 };
                    psi[idx] *= C64::from_polar(1.0, sign * theta / 2.0);
                }
            }
            Gate::Cz(a, b) => {
                for idx in (0..dim).filter(|i| i & mask(a) != 0 && i & mask(b) != 0) {
                    psi[idx] = -psi[idx];
                }
            }
            Gate::CzPhase { q1, q2, theta } => {
                for idx in (0..dim).filter(|i| i & mask(q1) != 0 && i & mask(q2) != 0) {
                    psi[idx] *= C64::from_polar(1.0, theta);
                }
            }
        }
    }
    DenseState::new(psi)
}
