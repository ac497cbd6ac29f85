use thiserror::Error;

/// All domain errors surfaced by the library.
///
/// The CLI maps each variant to exit code 1 and prints [`Error::name`] on
/// stderr; anything else (flag parsing, I/O misuse) is a usage error with
/// exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("truncation failure: {0}")]
    TruncationFailure(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("mode cap exceeded: n={n} > n_max={n_max}")]
    ModeCapExceeded { n: usize, n_max: usize },
    #[error("eigensolver failed to converge: {0}")]
    ConvergenceFailure(String),
    #[error("chemical potential within 1e-12 of a level: mu={mu}, level n={n}")]
    DegenerateFermiLevel { mu: f64, n: usize },
    #[error("chemical potential outside the spectral band: mu={0}")]
    OutOfBand(f64),
    #[error("Christoffel-Darboux form is off-diagonal only (x=y={0})")]
    DiagonalNotSupported(usize),
    #[error("Christoffel-Darboux form unavailable at K=N (no mode N+1)")]
    CDUnavailable,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid excitation set: {0}")]
    InvalidExcitationSet(String),
    #[error("magnon sector too large: {0}")]
    SectorTooLarge(String),
}

impl Error {
    /// Stable machine-readable name, printed on stderr by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::ParameterOutOfRange(_) => "ParameterOutOfRange",
            Error::TruncationFailure(_) => "TruncationFailure",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::ModeCapExceeded { .. } => "ModeCapExceeded",
            Error::ConvergenceFailure(_) => "ConvergenceFailure",
            Error::DegenerateFermiLevel { .. } => "DegenerateFermiLevel",
            Error::OutOfBand(_) => "OutOfBand",
            Error::DiagonalNotSupported(_) => "DiagonalNotSupported",
            Error::CDUnavailable => "CDUnavailable",
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::InvalidExcitationSet(_) => "InvalidExcitationSet",
            Error::SectorTooLarge(_) => "SectorTooLarge",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
