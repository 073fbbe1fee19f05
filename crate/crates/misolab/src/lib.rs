//! Large-system analysis of linear precoding in MISO broadcast channels.
//!
//! An `M`-antenna transmitter serves `K` single-antenna users through a
//! zero-forcing (ZF) or regularized zero-forcing (RZF) precoder, with
//! imperfect channel knowledge at the transmitter, transmit-side antenna
//! correlation and per-user path loss. When `M` and `K` are large with a
//! fixed ratio `beta = M/K`, the per-user SINR concentrates around a
//! deterministic value that can be computed without drawing a single
//! channel realization. This crate provides
//!
//! - the fixed-point machinery behind those deterministic equivalents
//!   ([`rmt`]),
//! - channel and CSIT-distortion sampling ([`channel`]),
//! - the exact per-realization precoders used as Monte-Carlo ground truth
//!   ([`precoding`]),
//! - deterministic SINR/sum-rate equivalents for ZF and RZF ([`det_equiv`]),
//! - every optimizer derived from them: regularization, feedback-bit
//!   scaling, active-user count, TDD training split ([`optimize`]),
//! - a seeded, parallel Monte-Carlo experiment runner with CSV output and
//!   figure-reproduction presets ([`sim`]).
//!
//! The `examples/` directory of this crate contains one runnable example per
//! capability; the thin `simlab` binary drives experiments from config files.

// Validation guards are written as `!(x > 0.0)` so that NaN inputs fall
// into the error path; `x <= 0.0` would wave them through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod det_equiv;
pub mod error;
pub mod optimize;
pub mod precoding;
pub mod rmt;
pub mod sim;

pub use error::{Error, Result};
