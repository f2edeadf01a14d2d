//! Simulation core for interaction-free measurement (IFM) interferometer circuits.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure computation:
//!
//! * [`optics`]: two-mode transfer-matrix engine for couplers, phase sections,
//!   absorbers and loss, propagating a single-photon amplitude state.
//! * [`analysis`]: closed-form and propagated IFM probabilities and efficiencies
//!   for the two-stage Elitzur–Vaidman scheme and the N-stage Zeno chain.
//! * [`spectrum`]: wavelength sweeps through imbalanced interferometers, fringe
//!   spacing, visibility and the coupler-mismatch contrast study.
//! * [`coupler`]: directional-coupler design from supermode index tables.
//! * [`counting`]: Monte Carlo photon counting with an attenuated-laser source and
//!   the count-based efficiency estimators.
//!
//! File formats, configuration, parallel drivers and the command line live in the
//! `ifm-tools` crate.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod counting;
pub mod coupler;
mod error;
mod math;
pub mod optics;
pub mod spectrum;

pub use error::{Error, Result};
