//! Rate quantities for similarity identification.
//!
//! * [`r_id_hamming`], [`r_id_general`]: the identification rate, as a
//!   minimum over linear pieces of the transport constraint of a
//!   min-mutual-information program.
//! * [`r_id_tc`], [`d_id_tc`], [`d_id_lc`], [`r_id_lc`]: the triangle
//!   schemes.
//! * [`hamming_lower_bound`], [`closed_form_binary_symmetric`]: bounds and
//!   closed forms.
//! * [`r_id_curve`] and friends: sweeps over a distortion grid.

mod bounds;
mod curve;
mod identification;
mod patterns;
mod triangle;

pub use bounds::{
    binary_rate_distortion, closed_form_binary_symmetric, hamming_lower_bound, LowerBound,
};
pub use curve::{
    bound_curve, check_grid, lc_curve, r_id_curve, r_id_curve_with, rd_curve, tc_curve,
    CurveOptions, IdCurve, SchemeCurve,
};
pub use identification::{
    r_id, r_id_general, r_id_general_with, r_id_hamming, Assignments, IdRateResult, Winner,
    ASSIGNMENT_BUDGET,
};
pub use patterns::{
    distinct_columns, enumerate_sign_patterns, linear_score_of_pattern, sign_pattern_count,
    SignPattern, PATTERN_BUDGET,
};
pub use triangle::{
    constant_d0, constant_query_distortion, d_id_lc, d_id_tc, r_id_lc, r_id_tc, LcRate,
    TriangleThreshold,
};
