//! Index stability under compact perturbations of the coin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::witten_index;
use crate::draw::{random_entry, trial_seed};
use crate::error::{Error, Result};
use crate::lattice::{build_q_epsilon, LatticeWindow, Scaling};
use crate::model::{CoinEntry, CoinProfile, WalkParameters};
use crate::solver::kernel::kernel_pair_svd;
use crate::{Sign, C64};

/// Largest number of perturbed sites per trial.
pub const MAX_SITES: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct Trial {
    pub sites: Vec<i64>,
    pub d_plus: usize,
    pub d_minus: usize,
    pub conclusive: bool,
}

impl Trial {
    pub fn index(&self) -> i64 {
        self.d_plus as i64 - self.d_minus as i64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub expected: i64,
    pub trials: Vec<Trial>,
    pub pass: bool,
}

impl InvarianceReport {
    pub fn conclusive_trials(&self) -> usize {
        self.trials.iter().filter(|t| t.conclusive).count()
    }
}

/// Random overrides at up to ten distinct sites of the middle quarter.
pub fn random_perturbation(rng: &mut ChaCha8Rng, window: &LatticeWindow, force_zero_b: bool) -> Vec<(i64, CoinEntry)> {
    let reach = (window.half_width / 4).max(1) as i64;
    let count = rng.random_range(1..=MAX_SITES);
    let mut sites: Vec<i64> = Vec::with_capacity(count);
    while sites.len() < count.min(2 * reach as usize + 1) {
        let x = rng.random_range(-reach..=reach);
        if !sites.contains(&x) {
            sites.push(x);
        }
    }
    sites.sort_unstable();
    sites
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let entry = if force_zero_b && k == 0 {
                let a = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let a2 = if rng.random::<bool>() { a } else { -a };
                CoinEntry { a1: a, a2, b: C64::new(0.0, 0.0) }
            } else {
                random_entry(rng)
            };
            (x, entry)
        })
        .collect()
}

pub fn perturbation_invariance_test(
    params: &WalkParameters,
    profile: &CoinProfile,
    trials: usize,
    seed: u64,
    window: &LatticeWindow,
) -> Result<InvarianceReport> {
    if !profile.is_canonical_step() {
        return Err(Error::Unsupported("perturbation test starts from a step profile".into()));
    }
    let expected = match witten_index(params, profile).index {
        Some(i) => i as i64,
        None => return Err(Error::NotFredholm("perturbation test needs a Fredholm profile".into())),
    };
    let outcomes: Result<Vec<Trial>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t as u64));
            let mut perturbed = profile.clone();
            let changes = random_perturbation(&mut rng, window, t % 4 == 0);
            let sites = changes.iter().map(|c| c.0).collect();
            for (x, entry) in changes {
                perturbed = perturbed.with_override(x, entry);
            }
            let q = build_q_epsilon(window, params, &perturbed, Sign::Plus, Scaling::Rescaled);
            let pair = kernel_pair_svd(&q, true)?;
            Ok(Trial {
                sites,
                d_plus: pair.plus.dimension,
                d_minus: pair.minus.dimension,
                conclusive: pair.conclusive(),
            })
        })
        .collect();
    let trials = outcomes?;
    let pass = trials.iter().filter(|t| t.conclusive).all(|t| t.index() == expected);
    Ok(InvarianceReport { expected, trials, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LimitCoin;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn e1_survives_perturbation() {
        let params = WalkParameters::from_p_theta(0.5, 0.0).unwrap();
        let prof = CoinProfile::step(
            LimitCoin::anisotropic(0.8, c(0.6, 0.0)).unwrap(),
            LimitCoin::anisotropic(0.0, c(1.0, 0.0)).unwrap(),
        );
        let w = LatticeWindow::open(80).unwrap();
        let r = perturbation_invariance_test(&params, &prof, 6, 7, &w).unwrap();
        assert_eq!(r.expected, 1);
        assert!(r.pass, "{:?}", r.trials);
        assert!(r.conclusive_trials() > 0);
    }

    #[test]
    fn zero_b_site_keeps_index() {
        let params = WalkParameters::from_p_theta(0.5, 0.0).unwrap();
        let prof = CoinProfile::step(
            LimitCoin::anisotropic(0.8, c(0.6, 0.0)).unwrap(),
            LimitCoin::anisotropic(0.0, c(1.0, 0.0)).unwrap(),
        );
        let w = LatticeWindow::open(80).unwrap();
        let cut = prof.clone().with_override(3, CoinEntry { a1: 1.0, a2: -1.0, b: c(0.0, 0.0) });
        let q = build_q_epsilon(&w, &params, &cut, Sign::Plus, Scaling::Rescaled);
        let pair = kernel_pair_svd(&q, true).unwrap();
        assert!(!pair.conclusive() || pair.index() == 1);
    }

    #[test]
    fn deterministic_for_seed() {
        let mut a = ChaCha8Rng::seed_from_u64(trial_seed(3, 1));
        let mut b = ChaCha8Rng::seed_from_u64(trial_seed(3, 1));
        let w = LatticeWindow::open(40).unwrap();
        assert_eq!(random_perturbation(&mut a, &w, true), random_perturbation(&mut b, &w, true));
    }

    #[test]
    fn perturbations_stay_compact_and_valid() {
        let w = LatticeWindow::open(40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let ch = random_perturbation(&mut rng, &w, true);
            assert!(!ch.is_empty() && ch.len() <= MAX_SITES);
            assert_eq!(ch[0].1.b, c(0.0, 0.0));
            for (x, e) in ch {
                assert!(x.abs() <= 10);
                assert!(CoinEntry::new(e.a1, e.a2, e.b).is_ok());
            }
        }
    }
}
