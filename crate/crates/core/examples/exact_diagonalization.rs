//! Ground-state energies of the transverse-field Ising, Heisenberg and
//! J1-J2 chains by exact diagonalization.
//!
//! cargo run --release --example exact_diagonalization

use nqs::exact::{ground_state_exact, rayleigh_quotient};
use nqs::hamiltonian::{build_afh, build_j1j2, build_tfim, Boundary};
use nqs::Result;

fn main() -> Result<()> {
    println!("{:<28} {:>4} {:>18} {:>14}", "model", "n", "E0", "E0 / n");
    for n in [4, 6, 8, 10, 12] {
        let cases = [
            ("tfim J=1 B=1 periodic", build_tfim(n, 1.0, 1.0, Boundary::Periodic)?),
            ("heisenberg J=1 periodic", build_afh(n, 1.0, Boundary::Periodic)?),
            ("j1-j2 J2=0.5 periodic", build_j1j2(n, 1.0, 0.5, Boundary::Periodic)?),
        ];
        for (name, h) in cases {
            let (e, psi) = ground_state_exact(&h)?;
            let check = rayleigh_quotient(&h, &psi)?;
            assert!((check - e).abs() < 1e-9 * e.abs().max(1.0));
            println!("{name:<28} {n:>4} {e:>18.12} {:>14.8}", e / n as f64);
        }
    }
    // the J2 = 0.5 chain sits at the Majumdar-Ghosh point, E0 = -3n/8
    let n = 8;
    let (e, _) = ground_state_exact(&build_j1j2(n, 1.0, 0.5, Boundary::Periodic)?)?;
    println!("Majumdar-Ghosh check n={n}: E0 = {e:.12}, -3n/8 = {:.12}", -3.0 * n as f64 / 8.0);
    Ok(())
}
