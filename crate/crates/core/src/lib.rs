//! Deterministic simulation toolkit for urban air mobility operations.

// `!(x > 0.0)` is how validation rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod graph;
pub mod route;
pub mod daa;
pub mod link;
pub mod fmcw;
pub mod sim;
