//! Syntactic machinery for prefix-free generative descriptions of histories.
//!
//! The crate covers the full chain from grammars to weights:
//!
//! * [`grammar`]: prefix-free, boundary-delimited languages, exact string
//!   counting and one-pass decoding;
//! * [`encoder`]: discretized histories, their programs and minimal costs;
//! * [`redundancy`]: junk-sector multiplicities under a length ceiling and
//!   the induced exponential weights;
//! * [`variational`]: discrete Euler-Lagrange operators and the
//!   proportionality-plus-boundary decomposition of EL-equivalent costs;
//! * [`pathint`]: exhaustive Euclidean lattice path sums;
//! * [`gauge`]: the two-site Z2 orbit model;
//! * [`cosmo`]: the holographic calibration chain.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cosmo;
pub mod cost;
pub mod encoder;
pub mod error;
pub mod gauge;
pub mod grammar;
pub mod numeric;
pub mod pathint;
pub mod redundancy;
pub mod variational;

pub use cost::{LocalCost, Potential};
pub use error::{Error, Result};
pub use grammar::{Grammar, GrammarSpec, HeaderDef, JunkRule, SegmentList};
