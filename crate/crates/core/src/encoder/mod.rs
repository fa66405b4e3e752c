//! Discretized histories, their prefix-free programs, and minimal costs.

mod cost;
mod history;
mod program;

pub use cost::{
    encoding_choices, minimal_cost, minimize, sandwich_constant, within_sandwich, Alternative, CostSpec,
    EncodingChoice, MinimalCost,
};
pub use history::{discretize, DiscreteHistory};
pub use program::{decode_history, encode, ClassRule, Classifier, Program, Quantizer, SegmentClass};
