//! Toolkit for the discretized Gaussian shift channel that models the
//! reader-to-tag link of an inductively coupled (near-field) RFID system.
//!
//! The tag communicates by on-off keying of a subcarrier and recovers both
//! power and data from the reader field, so the transmitted signal is best
//! described by its run-length sequence: the lengths of maximal runs of
//! identical bits. The dominant impairment is a slowly varying multiplicative
//! gain, so a run of nominal length `x` is received with length `x * K`,
//! `K ~ N(1, eps^2)`, and then quantized back to a discrete length. This
//! crate provides:
//!
//! * the channel model itself ([`channel`]): quantization schemes, exact
//!   transition distributions and run-sequence transmission;
//! * a numerical solver for the capacity of the resulting discrete
//!   memoryless channel under a per-run power cost ([`capacity`]);
//! * run-length-limited line codes with table-driven decoders and their
//!   reconstruction from published decoding tables ([`codes`]);
//! * exact rational power metrics and RLL constraint capacities
//!   ([`metrics`]);
//! * seeded Monte Carlo frame-error-rate simulation ([`fer`]).
//!
//! The crate is `no_std` (with `alloc`); all floating point goes through
//! `libm` so results are identical across targets.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod capacity;
pub mod channel;
pub mod codes;
pub mod fer;
pub mod metrics;
pub mod qfunc;
pub mod rng;

mod error;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
