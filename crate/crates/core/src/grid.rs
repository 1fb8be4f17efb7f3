//! The reference parameter grid used for oracle comparisons.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::draw::{random_phase, trial_seed};
use crate::model::{CoinEntry, CoinProfile, LimitCoin, WalkParameters};
use crate::C64;

pub const GRID_P: [f64; 10] = [-0.9, -0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7, 0.9];
pub const GRID_A: [f64; 5] = [-0.95, -0.6, 0.0, 0.6, 0.95];
/// Points with `||p| - |a(#)|| < EXCLUSION` are left out.
pub const EXCLUSION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub id: usize,
    pub params: WalkParameters,
    pub profile: CoinProfile,
}

/// Limit choices per side: the five off-diagonal coins with
/// `b = sqrt(1 - a^2) e^{i phase}` and the two diagonal coins `a = ±1`.
fn limit_options(phase: f64) -> Vec<LimitCoin> {
    let mut out: Vec<LimitCoin> =
        GRID_A.iter().map(|&a| LimitCoin::from_a_phase(a, phase).expect("grid coin")).collect();
    for a in [1.0, -1.0] {
        out.push(LimitCoin::new(CoinEntry { a1: a, a2: -a, b: C64::new(0.0, 0.0) }));
    }
    out
}

const OPTIONS: usize = GRID_A.len() + 2;

fn excluded(p: f64, profile: &CoinProfile) -> bool {
    // the cut sits exactly on 0.9 vs 0.95; that tie is kept
    let close = |a: f64| (p.abs() - a.abs()).abs() < EXCLUSION - 1e-12;
    close(profile.left.a()) || close(profile.right.a())
}

fn point(id: usize, p: f64, li: usize, ri: usize, seed: u64) -> GridPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, id as u64));
    let theta = random_phase(&mut rng);
    let left = limit_options(random_phase(&mut rng))[li];
    let right = limit_options(random_phase(&mut rng))[ri];
    GridPoint {
        id,
        params: WalkParameters::from_p_theta(p, theta).expect("grid p"),
        profile: CoinProfile::step(left, right),
    }
}

fn sweep(ps: &[f64], seed: u64) -> Vec<GridPoint> {
    let mut out = Vec::new();
    let mut id = 0;
    for &p in ps {
        for li in 0..OPTIONS {
            for ri in 0..OPTIONS {
                let g = point(id, p, li, ri, seed);
                id += 1;
                if !excluded(p, &g.profile) {
                    out.push(g);
                }
            }
        }
    }
    out
}

/// All four coin types over `GRID_P`; phases and `theta` are drawn from
/// `seed`, which cannot change any classification.
pub fn oracle_grid(seed: u64) -> Vec<GridPoint> {
    sweep(&GRID_P, seed)
}

/// The same coin choices at `p = 0`.
pub fn zero_p_slice(seed: u64) -> Vec<GridPoint> {
    sweep(&[0.0], seed)
}
