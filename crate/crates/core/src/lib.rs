//! Secrecy regions of the Shannon cipher system over wiretap channels.
//!
//! The crate computes capacity and rate-distortion quantities with
//! Blahut-Arimoto iterations, evaluates the equivocation functions of a
//! wiretap channel, assembles lossless, lossy and Gaussian region bounds, and
//! simulates the uncoded and separate schemes at finite blocklength.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod gamma;
pub mod prob;
pub mod rd;
pub mod regions;
pub mod sim;
pub mod spectrum;
pub mod util;

pub use error::{Error, Result};
pub use prob::{Channel, DistortionMatrix, JointPmf, Pmf, WiretapChannel};
