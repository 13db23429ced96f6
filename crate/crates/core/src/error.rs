use thiserror::Error;

/// Errors raised by field evaluation, numerical calculus, flows and charts.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("expected {expected} components, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("point {point:?} lies outside the domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("evaluation singularity at {point:?}")]
    Singular { point: Vec<f64> },

    #[error("trajectory left the domain at t = {time} near {point:?}")]
    DomainExit { time: f64, point: Vec<f64> },

    #[error("step size underflow at t = {time} near {point:?}")]
    StepUnderflow { time: f64, point: Vec<f64> },

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("too many singular samples: {singular} of {total}")]
    TooManySingular { singular: usize, total: usize },

    #[error("involutivity gate failed: bracket statistic {value:e} exceeds {gate:e}")]
    InvolutivityGate { value: f64, gate: f64 },

    #[error("injectivity search collapsed below {min_radius}")]
    InjectivityCollapse { min_radius: f64 },

    #[error("point {point:?} is not in the chart image (round-trip residual {residual:e})")]
    NotInImage { point: Vec<f64>, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input: bad expression, unknown name, bad arguments.
    Input,
    /// A numerical procedure could not complete.
    Numerical,
    /// A checked property does not hold.
    Property,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::Arity { .. }
            | Error::InvalidArgument(_)
            | Error::UnknownCatalog(_) => ErrorClass::Input,
            Error::InvolutivityGate { .. } => ErrorClass::Property,
            _ => ErrorClass::Numerical,
        }
    }

    /// True for failures that an a.e.-tolerant sweep may skip and count.
    pub fn is_pointwise(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::OutOfDomain { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
