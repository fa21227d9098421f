//! Channels `X → W` as Stinespring isometries, classical conditional
//! channels, and flagged mixtures.

pub mod classical;
pub mod flagged;
pub mod isometry;

pub use classical::{classical_to_quantum_channel, ConditionalChannel, MeasurePrepare};
pub use flagged::{flagged_mix, FlaggedChannel, FLAG_LABEL};
pub use isometry::{
    antihermitian_from_params, isometry_from_params, params_from_antihermitian, random_channel_params,
    stinespring_extend, StinespringIsometry, ISOMETRY_TOL,
};
