use thiserror::Error;

/// Errors raised while reading an instance file.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: malformed edge line: {msg}")]
    MalformedEdge { line: usize, msg: String },
    #[error("line {line}: negative length {value}")]
    NegativeLength { line: usize, value: f64 },
    #[error("line {line}: negative profit {value}")]
    NegativeProfit { line: usize, value: f64 },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: loop edge at vertex {v}")]
    LoopEdge { line: usize, v: usize },
    #[error("line {line}: vertex {v} out of range 1..={n}")]
    VertexOutOfRange { line: usize, v: usize, n: usize },
    #[error("root {root} out of range 1..={n}")]
    RootOutOfRange { root: usize, n: usize },
    #[error("expected {expected} edge lines, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error("line {line}: bad OPTMAX value: {msg}")]
    OptMax { line: usize, msg: String },
    #[error("empty input")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid walk: {0}")]
    InvalidWalk(String),
    #[error("multigraph has odd-degree vertex {0}")]
    OddDegree(usize),
    #[error("multigraph is not connected through root {0}")]
    Disconnected(usize),
    #[error("odd cardinality point set ({0} points)")]
    OddCardinality(usize),
    #[error("T-join terminals {0} and {1} lie in different components")]
    TJoinUnreachable(usize, usize),
    #[error("LP backend failure: {0}")]
    LpBackend(String),
    #[error("cutting-plane loop did not converge within {0} rounds")]
    LpNonConvergence(usize),
    #[error("splitting at vertex {vertex} stuck with residual degree {residual}")]
    SplitStuck { vertex: usize, residual: f64 },
    #[error("infeasible input: {0}")]
    Infeasible(String),
    #[error("tree decomposition failed: {0}")]
    Decomposition(String),
    #[error("coupling violated for positive edge {0}")]
    Coupling(usize),
    #[error("{what} cap exceeded: {size} > {cap}")]
    CapExceeded { what: &'static str, size: usize, cap: usize },
    #[error("approximation guarantee violated: {value} > 1.6 * {lower_bound}")]
    Guarantee { value: f64, lower_bound: f64 },
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
