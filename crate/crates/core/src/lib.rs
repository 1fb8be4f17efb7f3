//! Witten index of one-dimensional split-step supersymmetric quantum walks
//! with anisotropic coins.
//!
//! [`analytic`] holds the closed forms; [`lattice`] and [`solver`] provide
//! finite-window numerical oracles that check them independently.

pub mod analytic;
pub mod draw;
pub mod error;
pub mod grid;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod solver;
pub mod suite;

pub use error::{Error, Result, Site};
pub use model::{
    classify_coin, load_profile, load_setup, validate_parameters, CoinEntry, CoinProfile,
    CoinType, IndexReport, LimitCoin, WalkParameters, WalkSetup,
};

pub type C64 = num_complex::Complex64;

/// Chirality sector `±` of `Q_eps±`, `H_eps±`, `A_±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}
