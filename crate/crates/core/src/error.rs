use std::fmt;

use thiserror::Error;

/// Location of a coin entry inside a profile, used in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    At(i64),
    Left,
    Right,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::At(x) => write!(f, "x={x}"),
            Site::Left => f.write_str("left limit"),
            Site::Right => f.write_str("right limit"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("normalization violated: p^2 + |q|^2 = {0}")]
    Normalization(f64),
    #[error("q must be nonzero")]
    ZeroQ,
    #[error("invalid coin entry at {site}: {detail}")]
    Coin { site: Site, detail: String },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("transfer matrix undefined at {0}")]
    TransferUndefined(Site),
    #[error("not Fredholm: {0}")]
    NotFredholm(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
