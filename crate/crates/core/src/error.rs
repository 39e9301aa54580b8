use thiserror::Error;

use crate::scalar::Scalar;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error(
        "{requested} parties requested but dense tables are capped at {cap} \
         (4^n exact entries); split the computation into smaller independent boxes"
    )]
    PartyCap { requested: usize, cap: usize },

    #[error("xi = {0} lies outside [-1, 1]")]
    XiOutOfRange(Box<Scalar>),

    #[error("invalid party index: {0}")]
    InvalidParty(String),

    #[error("signaling detected: marginal depends on the input of party {party}")]
    Signaling { party: usize },

    #[error("arity mismatch: expected {expected} parties, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("coupler invalid on this input (branch b'={branch}): {reason}")]
    CouplerInvalid {
        branch: u8,
        reason: String,
        /// Branch mass, when it was at least input-independent.
        mass: Option<Box<Scalar>>,
    },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("coupler {coupler} failed on branch path {}: {source}", path_label(.path))]
    BranchFailure {
        coupler: usize,
        path: Vec<u8>,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn path_label(path: &[u8]) -> String {
    if path.is_empty() {
        "(root)".to_string()
    } else {
        path.iter().map(|b| char::from(b'0' + b)).collect()
    }
}

impl Error {
    /// True when the failure is a coupler producing an invalid branch,
    /// possibly wrapped in a scenario branch path.
    pub fn is_coupler_invalid(&self) -> bool {
        match self {
            Error::CouplerInvalid { .. } => true,
            Error::BranchFailure { source, .. } => source.is_coupler_invalid(),
            _ => false,
        }
    }
}
