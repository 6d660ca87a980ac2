//! Finite-blocklength triangle-inequality schemes.
//!
//! [`build_codebook`] covers the sequence space with a greedy set cover,
//! [`assign_signature`] and [`decide_triangle`] implement the scheme, and
//! [`estimate_maybe_probability`] measures it. Every scheme built here is
//! admissible by construction; [`exhaustive_admissibility_check`] verifies it.

mod codebook;
mod monte_carlo;
mod scheme;
mod sequence;

pub use codebook::{
    build_codebook, Codebook, CodebookOptions, Coverage, CoverageReport, TypeCoverage,
    DEFAULT_POOL, PAIR_BUDGET, SPACE_BUDGET,
};
pub use monte_carlo::{estimate_maybe_probability, SimulationResult, CHUNK};
pub use scheme::{
    admissibility_check_with, assign_signature, decide_triangle, exhaustive_admissibility_check,
    signature_table, AdmissibilityReport, Decision, ScanMode, Signature, SignatureIndex,
    EXHAUSTIVE_PAIR_BUDGET, SAMPLED_PAIRS,
};
pub use sequence::{pack, SequenceCost, SequenceSpace, MAX_ALPHABET, MAX_BLOCKLENGTH};
