//! Finite-time quantum Otto engine cycles under diagnostic energy monitoring.
//!
//! The crate builds the four strokes of an Otto cycle for a finite-dimensional
//! working substance, assembles the one-cycle CPTP map for the unmonitored
//! cycle, the two-point projective measurement (TPM) scheme and three
//! Gaussian-pointer schemes (`S1`, `S2`, `S3`), solves for the cycle steady
//! state and returns exact joint work/heat statistics as Gaussian mixtures.
//!
//! Measurement schemes are strategies behind the [`schemes::MeasurementScheme`]
//! trait and are looked up by name in a [`schemes::SchemeRegistry`].
//!
//! Units: `hbar = 1` and the pointer coupling is scaled so that a pointer
//! shift equals the measured energy.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linops;
pub mod oracle;
pub mod pointer;
pub mod schemes;
pub mod stats;
pub mod strokes;

pub use error::{OttoError, Result};
pub use linops::{Channel, ComplexMatrix, DensityMatrix, C64};
pub use pointer::PointerWidth;
pub use schemes::{
    CycleBlocks, CycleSpec, MeasurementScheme, SchemeConfig, SchemeRegistry,
};
pub use strokes::{BathSpec, ColdStroke, OccupationConvention, StrokeHamiltonian, WorkStrokeSpec};
