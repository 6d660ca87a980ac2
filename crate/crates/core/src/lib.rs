//! Minimal compression rates for similarity identification.
//!
//! A signature `T(x)` of a source sequence is stored instead of `x`; a query
//! `y` is answered with `no` (certainly dissimilar) or `maybe` from the
//! signature alone. Schemes must never answer `no` to a pair with
//! `d(x, y) <= D`. This crate computes the single-letter rate quantities that
//! govern such schemes over finite alphabets and simulates the triangle
//! inequality schemes at small blocklength.
//!
//! | module | contents |
//! |--------|----------|
//! | [`info`] | pmfs, channels, distortion matrices, entropies, rate curves |
//! | [`transport`] | the transport distance between pmfs and its dual pieces |
//! | [`solver`] | minimum mutual information under one linear constraint |
//! | [`rates`] | identification rate, triangle-scheme rates, bounds |
//! | [`sim`] | covering codebooks, triangle decisions, Monte Carlo |
//! | [`cli`] | job parsing and result emission for the `simid` binary |

pub mod cli;
mod error;
pub mod info;
pub mod rates;
pub mod sim;
pub mod solver;
pub mod transport;

pub use error::{Error, Result};
pub use info::{Channel, DistortionMatrix, Pmf, RateCurve};
