//! Classical and quantum information-bottleneck and privacy-funnel curves,
//! and the quantum rate region with side information, for small explicit
//! sources.

pub mod channels;
pub mod classical;
pub mod cli;
pub mod curve;
pub mod error;
pub mod optim;
pub mod quantum;
pub mod rate_region;
pub mod solver;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
