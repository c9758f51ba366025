//! Transfer of an unknown qubit over a noisy teleportation channel when only
//! `N` Werner-state ebits and `N` copies of the qubit are available.
//!
//! Three strategies are modelled:
//!
//! - [`entpur`]: distil the ebits with repeated recurrence purification, then
//!   teleport once through the best surviving ebit.
//! - [`qubitpur`]: teleport all `N` copies through the raw channel and let the
//!   receiver concentrate them with a collective total-spin projection.
//! - [`estimate`]: skip the channel, estimate the state optimally and send
//!   the classical description.
//!
//! [`compare`] ranks them and locates the channel qualities where the
//! purification strategies overtake estimation. Every closed form is backed
//! by an independent dense density-matrix or quadrature oracle.
//!
//! The crate is `no_std` (with `alloc`); IO and the command line live in the
//! companion `qtransfer-cli` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod channel;
mod combin;
pub mod compare;
pub mod entpur;
mod error;
pub mod estimate;
pub mod qmath;
pub mod quadrature;
pub mod qubitpur;

pub use error::{Error, Result};
pub use qmath::{BellDiagonal, BellLabel, BlochAngles, ComplexMatrix, DensityOperator, WernerParam, C64};
