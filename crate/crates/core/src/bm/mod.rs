//! Boltzmann-machine wavefunctions: restricted, fully connected and deep.
//!
//! Amplitudes are unnormalized: the partition function and any global
//! normalization are dropped, Psi(v) = sum_h exp(-E(v, h)).

mod bm;
mod dbm;
mod model;
mod rbm;

pub use bm::{bm_log_amplitude, BmState};
pub use dbm::{dbm_log_amplitude_exact, DbmState};
pub use model::{BoltzmannModel, Family};
pub use rbm::{rbm_log_amplitude, rbm_log_derivatives, RbmState};

/// Largest hidden-unit count summed by explicit enumeration.
pub const ENUMERATION_LIMIT: usize = 22;

use crate::state::{LogAmplitude, C64};

/// log of a sum of exponentials of complex terms, with exact cancellation
/// reported as a zero amplitude.
pub(crate) fn log_sum_exp(terms: &[C64]) -> LogAmplitude {
    let max = terms.iter().map(|t| t.re).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return LogAmplitude::Zero;
    }
    let mut sum = C64::new(0.0, 0.0);
    let mut mag = 0.0;
    for t in terms {
        let e = (t - max).exp();
        sum += e;
        mag += e.norm();
    }
    if sum.norm() <= LogAmplitude::ZERO_TOLERANCE * mag {
        LogAmplitude::Zero
    } else {
        LogAmplitude::Finite(sum.ln() + max)
    }
}
