use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no positive mass: distribution is empty or all zero")]
    NoPositiveMass,

    #[error("negative probability {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("non-finite probability at index {index}")]
    NonFiniteEntry { index: usize },

    #[error("product support 2^{log2_support:.3} exceeds materialization limit {limit}")]
    SupportOverflow { log2_support: f64, limit: usize },

    #[error("at least one factor distribution is required")]
    NoFactors,

    #[error("{name} = {value} outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("bound `{0}` needs the minimum probability")]
    MissingMinProb(&'static str),

    #[error("inconsistent entropy input: min_prob {min_prob} vs log2_min_prob {log2_min_prob}")]
    InconsistentMinProb { min_prob: f64, log2_min_prob: f64 },

    #[error("objective not finite at alpha = {alpha}")]
    NonFiniteObjective { alpha: f64 },

    #[error("unknown sampler `{0}`")]
    UnknownSampler(String),

    #[error(
        "Hamming-weight class {class} observed {count} times in profiling set (need at least 2)"
    )]
    UnobservedClass { class: usize, count: usize },

    #[error("degenerate template variance {0}")]
    DegenerateVariance(f64),

    #[error("attack trace set is empty")]
    EmptyTraceSet,

    #[error("invalid trace schedule: {0}")]
    Schedule(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line() as usize);
        match e.kind() {
            csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
            _ => Error::Parse {
                line,
                message: e.to_string(),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
