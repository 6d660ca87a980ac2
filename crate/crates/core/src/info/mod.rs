//! Probability-simplex types, information measures and the lower convex
//! envelope used by every rate computation.
//!
//! All information quantities are in bits.

mod channel;
mod curve;
mod distortion;
mod measures;
mod pmf;

pub use channel::Channel;
pub use curve::{lower_convex_envelope, CurvePoint, PointStatus, RateCurve};
pub use distortion::DistortionMatrix;
pub use measures::{
    binary_entropy, binary_entropy_inverse, entropy, entropy_of, kl_divergence, mutual_information,
    mutual_information_raw,
};
pub use pmf::Pmf;

/// Probabilities below this are exact zeros inside logarithms.
pub const PROB_FLOOR: f64 = 1e-15;

/// Normalization tolerance for pmfs after construction.
pub const NORM_TOL: f64 = 1e-12;
