use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A Wigner d-matrix larger than the configured maximum was requested.
    #[error("2J = {two_j} exceeds the configured maximum {max}")]
    ResourceGuard { two_j: u32, max: u32 },

    #[error("Fock truncation at n_max = {n_max} leaves tail mass {tail:.3e} (tolerance {tol:.1e})")]
    Truncation { n_max: usize, tail: f64, tol: f64 },

    /// The operation needs cos(theta_b - 2 theta_a) = +1.
    #[error("inputs are not phase matched: cos(theta_b - 2 theta_a) = {cos:.12}")]
    PhaseMismatch { cos: f64 },

    #[error("N = {n} component has generation probability {g:.3e} below the floor")]
    NegligibleComponent { n: u32, g: f64 },

    #[error("objective is not unimodal on the scan grid ({peaks} local maxima)")]
    NonUnimodal { peaks: usize },

    #[error("cross-check failed for {what}: {a} vs {b}")]
    CrossCheck { what: &'static str, a: f64, b: f64 },

    #[error("outcome mu = {two_mu}/2 has P = {p:.3e} but dP/dphi = {dp:.3e}")]
    InconsistentDerivative { two_mu: i32, p: f64, dp: f64 },

    #[error("log-likelihood is flat over the search interval (range {range:.3e})")]
    FlatLikelihood { range: f64 },

    #[error("Fisher information is zero: {0}")]
    NoInformation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
