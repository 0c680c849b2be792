use thiserror::Error;

/// Failures shared by every module of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("photon number {n} exceeds truncation n_max = {n_max}")]
    Truncation { n: usize, n_max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("improbable outcome: probability {probability:e} is below the 1e-14 floor")]
    ImprobableOutcome { probability: f64 },

    #[error("cannot normalize a vector of zero norm")]
    ZeroNorm,

    #[error("series did not converge within {terms} terms")]
    Nonconvergence { terms: usize },

    #[error("impossible event: evidence {evidence:e}")]
    ImpossibleEvent { evidence: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
