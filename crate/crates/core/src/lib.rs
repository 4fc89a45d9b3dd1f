//! Learned measurement matrices for compressive classification of sparse
//! PPM symbols.
//!
//! A known alphabet of P pulse-position symbols is classified from M < N
//! linear measurements `y = phi r` without reconstructing the signal. The
//! matrix `phi` is trained by a sequential rank-one rule that drives
//! `||phi x||^2` toward `||x||^2` for every prototype and every pairwise
//! difference, which makes the projection a near-isometry on the alphabet.
//!
//! Modules:
//! - [`symbols`] — PPM alphabet synthesis and the trainer's input set
//! - [`riptrain`] — the sequential trainer and isometry diagnostics
//! - [`receiver`] — projection, minimum-distance and matched-filter decisions
//! - [`channel`] — AWGN and Toeplitz multipath simulation
//! - [`experiment`] — seeded Monte Carlo error-rate sweeps
//! - [`io`] — symbol CSV and matrix file formats

pub mod channel;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod receiver;
pub mod riptrain;
pub mod seed;
pub mod symbols;

pub use error::{Error, Result};
pub use matrix::{MeasurementMatrix, Provenance};
pub use riptrain::{train, TrainConfig, TrainLog};
pub use symbols::{build_training_set, generate_ppm_set, PpmParams, SymbolSet};
