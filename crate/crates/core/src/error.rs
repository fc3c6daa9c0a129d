use thiserror::Error;

use crate::hodge::HodgePairing;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("base value unavailable for genus {genus} ({pairing})")]
    BaseValueUnavailable { genus: u32, pairing: HodgePairing },
    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
