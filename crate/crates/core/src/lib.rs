//! Classical restrictions of matrix product states.
//!
//! The chain is specified by a left-normalized Kraus family `{A_x}` together
//! with boundary vectors and block lengths. Measuring the middle block in
//! the computational basis yields a classical distribution; this crate
//! computes its string probabilities, the post-measurement entropies and
//! conditional mutual information, local Gibbs reconstructions, purity
//! certificates for the measured channel, and the measurement martingale.

pub mod enumerate;
pub mod error;
pub mod gibbsfit;
pub mod matcore;
pub mod mpschain;
pub mod puritycert;
pub mod random;
pub mod restriction;
pub mod trajectories;
pub mod zoo;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil;
