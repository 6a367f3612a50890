//! Neural density operators by latent-space purification, measurement
//! records in local Pauli bases, and tomography by KL-divergence descent.

mod basis;
mod purified;
mod train;

pub use basis::{
    all_pauli_bases, measurement_probabilities, read_records, records_from_state, write_records, MeasuredState,
    MeasurementData, MeasurementRecord, PauliBasis,
};
pub use purified::{density_matrix, purified_amplitude, PurificationNet, PurifiedRbm, MAX_PURIFIED_UNITS};
pub use train::{tomo_mixed, tomo_pure, total_divergence, KlDirection, TomoConfig, TomoResult};
