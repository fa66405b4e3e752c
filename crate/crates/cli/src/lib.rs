//! Command-line front end for `synlab-core` and the reproduction suite
//! behind `synlab reproduce` and the acceptance tests.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod suite;

pub use cli::{run, Cli, Status};
