//! Exact arithmetic for integral group rings `Z[G × F_m]`, the Milnor squares built from them,
//! and certificates for the rank-1 stably free modules they produce.

pub mod coeff;
pub mod construction;
pub mod error;
pub mod group_ring;
pub mod matrix;
pub mod milnor;
pub mod parse;
pub mod word;

pub use error::{AlgebraError, Result};
