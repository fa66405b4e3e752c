use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),

    #[error("degenerate grammar: growth rate {gamma} is not above 1")]
    DegenerateGrammar { gamma: f64 },

    #[error("incomplete program: input ends inside a segment at position {position}")]
    IncompleteProgram { position: usize },

    #[error("parse error at position {position}: symbol {symbol} has no admissible continuation")]
    ParseError { position: usize, symbol: u8 },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("value {value} outside quantizer range [{lo}, {hi}]")]
    RangeError { value: f64, lo: f64, hi: f64 },

    #[error("segment {segment} has no admissible encoding")]
    A4Violation { segment: usize },

    #[error("ceiling K = {ceiling} is below the cost {cost}")]
    CeilingTooSmall { ceiling: f64, cost: f64 },

    #[error("node index {index} is not interior (valid range 1..={max})")]
    IndexError { index: usize, max: usize },

    #[error("no stationary configuration found: {0}")]
    EmptyResult(String),

    #[error("unidentifiable fit: {0}")]
    Unidentifiable(String),

    #[error("enumeration of {count} histories exceeds the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("selection rule leaves orbit W = {w} without a representative")]
    OrbitUncovered { w: i8 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
