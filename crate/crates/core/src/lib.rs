//! Analysis of networks of Markov-modulated infinite-server queues with
//! multiplicative population transitions.
//!
//! The population vector `m` of `N` infinite-server queues evolves under
//! Poisson arrivals and per-customer departures whose rates are modulated by
//! a background Markov chain on `I` states; in addition, marked transitions
//! replace the whole population by `A m` for a nonnegative integer matrix
//! `A` while the background state jumps. That one primitive covers retrial
//! networks (failures flush a station into its pool), rerouting (failures
//! move a route's clients to a backup or destroy them) and storage systems
//! (location failures degrade the replication level of every affected
//! file).
//!
//! The crate computes transient and stationary first moments by dense
//! matrix-exponential formulas (with block embeddings for the convolution
//! and time-integral terms), decides stability through the spectral abscissa
//! of the drift matrix, and cross-validates everything against exact
//! simulation and a truncated master-equation solver.

pub mod analysis;
pub mod assembly;
pub mod builders;
pub mod error;
pub mod model;
pub mod numerics;
pub mod oracles;

pub use error::{Error, Result};
pub use model::{InitialCondition, NetworkModel, ValidationReport};
