//! Identification coding over Gaussian channels.
//!
//! This crate simulates identification codes (receiver answers "was message
//! i sent?", not "which message was sent?") over Gaussian channels with a
//! passive eavesdropper. It provides:
//!
//! - [`prob`]: discrete distributions and information measures,
//! - [`capacity`]: closed-form capacities, converse bounds, and MIMO
//!   waterfilling,
//! - [`channel`]: seeded sampling models for the scalar Gaussian channel and
//!   the wiretap pair,
//! - [`mimo`]: complex MIMO channel with SVD pre/post-processing,
//! - [`id_code`]: construction, encoding, and verification of concatenated
//!   identification codes (inner transmission code, outer color code with
//!   random binning, per-identity coloring family),
//! - [`quantizer`]: lattice discretization of the continuous channel with
//!   total-variation gap verification,
//! - [`sim`]: deterministic parallel Monte Carlo estimation of error rates
//!   and eavesdropper distinguishability.
//!
//! The numeric core is generic over the scalar type through [`num::Real`];
//! simulation code works in `f64`, and the `*64` aliases at the crate root
//! name the concrete types most callers want.

pub mod capacity;
pub mod channel;
pub mod id_code;
pub mod mimo;
pub mod num;
pub mod prob;
pub mod quantizer;

/// Error type shared by the whole crate.
///
/// Variants mirror the failure classes of the public contracts: domain
/// errors for out-of-range arguments, invariant errors for values that
/// break a type's stated guarantees, shape errors for dimension mismatches,
/// configuration errors for unusable settings, resource errors for blown
/// memory or size budgets, and refusals for constructions whose
/// preconditions (for example positive secrecy capacity) do not hold.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("construction refused: {0}")]
    Refused(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use prob::LogBase;

/// Concrete aliases for the generic core at the default `f64` precision.
pub type Pmf64 = prob::Pmf<f64>;
pub type JointPmf64 = prob::JointPmf<f64>;
pub type GaussianChannel64 = capacity::GaussianChannelParams<f64>;
pub type Wiretap64 = capacity::WiretapParams<f64>;
pub type PowerAllocation64 = capacity::PowerAllocation<f64>;
pub type QuantizationSpec64 = quantizer::QuantizationSpec<f64>;
pub type QuantizedChannel64 = quantizer::QuantizedChannel<f64>;
