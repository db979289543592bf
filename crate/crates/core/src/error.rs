use thiserror::Error;

/// Errors raised by graph construction, measure validation and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid graph spec `{spec}`: {reason}")]
    GraphSpec { spec: String, reason: String },

    #[error("vertex {vertex} out of range for a graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("time {0} outside [0, 1]")]
    TimeOutOfRange(f64),

    #[error("{count} geodesics exceed the enumeration cap {cap}")]
    EnumerationCap { count: String, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("derivative undefined (-inf direction) along edge {from} -> {to}")]
    DerivativeUndefined { from: usize, to: usize },

    #[error("not a product graph: {0}")]
    NotProduct(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGraph(_) => "invalid_graph",
            Error::GraphSpec { .. } => "graph_spec",
            Error::VertexOutOfRange { .. } => "vertex_out_of_range",
            Error::InvalidMeasure(_) => "invalid_measure",
            Error::InvalidCoupling(_) => "invalid_coupling",
            Error::TimeOutOfRange(_) => "time_out_of_range",
            Error::EnumerationCap { .. } => "enumeration_cap",
            Error::Dimension { .. } => "dimension",
            Error::DerivativeUndefined { .. } => "derivative_undefined",
            Error::NotProduct(_) => "not_product",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Hypothesis(_) => "hypothesis",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
