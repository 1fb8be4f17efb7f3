//! Seeded random draws of valid walk data.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{CoinEntry, CoinProfile, LimitCoin, WalkParameters};
use crate::C64;

/// Independent stream seed for item `k` of a run seeded with `seed`.
pub fn trial_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn random_phase(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-PI..PI)
}

/// `p` uniform in `(-0.95, 0.95)`, `theta` uniform.
pub fn random_params(rng: &mut ChaCha8Rng) -> WalkParameters {
    let p = rng.random_range(-0.95..0.95);
    WalkParameters::from_p_theta(p, random_phase(rng)).expect("|p| < 1")
}

/// Nontrivial limit with `b != 0` and `|a| < 0.95`.
pub fn random_offdiagonal_limit(rng: &mut ChaCha8Rng) -> LimitCoin {
    let a = rng.random_range(-0.95..0.95);
    LimitCoin::from_a_phase(a, random_phase(rng)).expect("valid by construction")
}

/// Any valid limit: off-diagonal, diagonal `±diag(1, -1)` or `±I`.
pub fn random_limit(rng: &mut ChaCha8Rng) -> LimitCoin {
    match rng.random_range(0..10) {
        0..=6 => {
            let a = rng.random_range(-1.0..1.0);
            LimitCoin::from_a_phase(a, random_phase(rng)).expect("valid by construction")
        }
        7 | 8 => LimitCoin::new(diagonal(rng.random())),
        _ => LimitCoin::new(CoinEntry::identity(if rng.random() { 1.0 } else { -1.0 })),
    }
}

fn diagonal(up: bool) -> CoinEntry {
    let a = if up { 1.0 } else { -1.0 };
    CoinEntry { a1: a, a2: -a, b: C64::new(0.0, 0.0) }
}

/// Site entry for compact perturbations.
pub fn random_entry(rng: &mut ChaCha8Rng) -> CoinEntry {
    match rng.random_range(0..5) {
        0..=2 => {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b = C64::from_polar((1.0 - a * a).sqrt(), random_phase(rng));
            CoinEntry { a1: a, a2: -a, b }
        }
        3 => diagonal(rng.random()),
        _ => CoinEntry::identity(if rng.random() { 1.0 } else { -1.0 }),
    }
}

pub fn random_step_profile(rng: &mut ChaCha8Rng) -> CoinProfile {
    CoinProfile::step(random_limit(rng), random_limit(rng))
}

pub fn random_type_iii(rng: &mut ChaCha8Rng) -> CoinProfile {
    CoinProfile::step(random_offdiagonal_limit(rng), random_offdiagonal_limit(rng))
}
