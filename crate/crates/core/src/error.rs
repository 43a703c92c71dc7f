//! Error type shared across the crate.

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// Invalid parameters, incompatible manifold/rule pairs, malformed config.
    Config(String),
    /// Collision geometry for which no impulse is defined.
    DegenerateGeometry(String),
    /// Ensemble state on which an estimator or reduction is undefined.
    DegenerateEnsemble(String),
    /// Requested quantity does not exist for these parameters.
    NotApplicable(String),
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::DegenerateGeometry(msg) => write!(f, "degenerate geometry: {msg}"),
            Error::DegenerateEnsemble(msg) => write!(f, "degenerate ensemble: {msg}"),
            Error::NotApplicable(msg) => write!(f, "not applicable: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}

impl Error {
    /// Stable machine-readable tag, used in CLI reason lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::DegenerateEnsemble(_) => "degenerate_ensemble",
            Error::NotApplicable(_) => "not_applicable",
            Error::Io(_) => "io",
        }
    }
}
