//! Complementary-sequence toolkit for non-contiguous OFDM resource allocations.
//!
//! The crate builds Golay complementary pairs (GCPs) whose members, mapped onto
//! an interlace of equally spaced resource blocks, keep the OFDM peak-to-average
//! power ratio at or below 3 dB. Around the construction sit the pieces needed to
//! evaluate and use it:
//!
//! - [`seqcore`]: sequence algebra (aperiodic autocorrelation, upsampling,
//!   convolution, reverse-conjugation, cyclic-shift modulation).
//! - [`golay`]: the generalized concatenation/interleaving construction, GCP
//!   equivalence orbits and exhaustive quaternary GCP enumeration.
//! - [`interlace`]: non-coherent and coherent interlace builders plus the
//!   Zadoff-Chu and cycling baselines.
//! - [`metrics`]: oversampled synthesis, PAPR, cubic metric, cross-correlation.
//! - [`setsearch`]: greedy design of low cross-correlation GCP sets.
//! - [`linksim`]: Monte-Carlo DTX/ACK/NACK detection under Rayleigh fading.
//! - [`fixtures`] and [`io`]: shipped sequence tables and file formats.

pub mod error;
pub mod fixtures;
pub mod golay;
pub mod interlace;
pub mod io;
pub mod linksim;
pub mod metrics;
pub mod seqcore;
pub mod setsearch;

pub use error::{Error, Result};
pub use num_complex::Complex64;
