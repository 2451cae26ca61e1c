use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({u}, {v}) has an endpoint outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("vertex {vertex} is not in a graph with {n} vertices")]
    NoSuchVertex { vertex: usize, n: usize },
    #[error("edge mask has {got} bits but the graph has {expected} edges")]
    MaskLength { expected: usize, got: usize },
    #[error("degree sequence is not graphical")]
    NonGraphical,
    #[error("degree sum is odd")]
    OddDegreeSum,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph has {n} vertices, exact expansion is capped at {cap}; use the heuristic")]
    ExpansionCap { n: usize, cap: usize },
    #[error("graph has {m} edges, exact enumeration is capped at {cap}")]
    EnumerationCap { m: usize, cap: usize },
    #[error("no motif table registered for external degree {0}")]
    MissingMotifTable(usize),
    #[error("invalid motif: {0}")]
    InvalidMotif(String),
    #[error("fixed-point iteration did not converge after {iterations} steps (last gap {gap:e})")]
    NoConvergence {
        iterations: usize,
        gap: f64,
        last: f64,
    },
    #[error("empty seed set")]
    EmptySeeds,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code, printed by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SelfLoop(_) => "E_SELF_LOOP",
            Error::VertexOutOfRange { .. } => "E_VERTEX_RANGE",
            Error::NoSuchVertex { .. } => "E_VERTEX_RANGE",
            Error::MaskLength { .. } => "E_MASK_LENGTH",
            Error::NonGraphical => "E_NON_GRAPHICAL",
            Error::OddDegreeSum => "E_PARITY",
            Error::InvalidParameter(_) => "E_PARAMETER",
            Error::ExpansionCap { .. } => "E_EXPANSION_CAP",
            Error::EnumerationCap { .. } => "E_ENUMERATION_CAP",
            Error::MissingMotifTable(_) => "E_MOTIF_TABLE",
            Error::InvalidMotif(_) => "E_MOTIF",
            Error::NoConvergence { .. } => "E_NO_CONVERGENCE",
            Error::EmptySeeds => "E_EMPTY_SEEDS",
            Error::Parse { .. } => "E_PARSE",
            Error::Config(_) => "E_CONFIG",
            Error::Io(_) => "E_IO",
            Error::Json(_) => "E_JSON",
        }
    }

    /// True for errors caused by bad input rather than a failure while running.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::NoConvergence { .. })
    }
}
