use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |H_ij - conj(H_ji)| = {max_asymmetry:.3e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix is not unitary: ||G^dag G - I||_F = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty sector: {0}")]
    EmptySector(String),

    #[error("site {site} out of range 1..={sites}")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error("configuration rejected:\n{}", format_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

/// One itemized configuration problem, addressed by key path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| format!("  - {i}")).collect::<Vec<_>>().join("\n")
}
