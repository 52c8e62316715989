use crate::lp::LpError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid preference: {0}")]
    InvalidPreference(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("a domain needs at least one preference")]
    EmptyDomain,

    #[error("preference {0} appears twice in the domain")]
    DuplicatePreference(String),

    #[error("FTT undefined below three objects")]
    FttUndefined,

    #[error("{what} needs at least {min} objects, got {n}")]
    TooFewObjects { what: &'static str, min: usize, n: usize },

    #[error("domain is not FPT: no preference ranks {0} first and {1} second")]
    NotFpt(String, String),

    #[error("domain is not FTT: no preference ranks {0}, {1}, {2} in the top three")]
    NotFtt(String, String, String),

    #[error("not bi-stochastic: {0}")]
    NotBistochastic(String),

    #[error("not a probability distribution: {0}")]
    NotDistribution(String),

    #[error("invalid deterministic assignment: {0}")]
    InvalidAssignment(String),

    #[error("n = {n} exceeds the size cap of {cap} for {what} (raise it with TTC_VERIFY_MAX_N)")]
    SizeCap { what: &'static str, n: usize, cap: usize },

    #[error("profile is not in the rule's domain")]
    OutsideDomain,

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Lp(#[from] LpError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
