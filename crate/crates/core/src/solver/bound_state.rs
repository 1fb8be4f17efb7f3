//! Explicit square-summable solutions of `Q_eps± psi = 0` for step profiles.
//!
//! Amplitudes are carried as complex logarithms so that long windows with
//! `|z|` far from one neither overflow nor underflow before normalization.

use ndarray::Array1;

use crate::analytic::{kernel_dimensions, transfer_eigenvalues, EigenPair};
use crate::error::{Error, Result, Site};
use crate::lattice::{alpha, beta, LatticeWindow};
use crate::model::{classify_coin, CoinProfile, CoinType, WalkParameters};
use crate::solver::transfer::{mat_apply, mat_inv, transfer_matrix};
use crate::{Sign, C64};

/// Relative size below which a matching coefficient counts as zero.
const MATCH_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct BoundState {
    pub sign: Sign,
    pub window: LatticeWindow,
    pub coin_type: CoinType,
    /// Which transfer eigenvalue `z_{±,j}` carries the state.
    pub branch: usize,
    /// Normalized amplitudes on the window, in site order.
    pub samples: Vec<(i64, C64)>,
    /// `ln |psi(x)|` before normalization; `-inf` where the state vanishes.
    pub log_modulus: Vec<f64>,
    /// Per-site decay factors `(left, right)` away from the wall; zero on a
    /// side where the state vanishes identically.
    pub decay_rates: (f64, f64),
}

impl BoundState {
    pub fn vector(&self) -> Array1<C64> {
        self.samples.iter().map(|&(_, z)| z).collect()
    }

    /// Decay factors from a least-squares fit of `ln |psi|` on each side.
    pub fn fitted_decay_rates(&self) -> (f64, f64) {
        let side = |keep: &dyn Fn(i64) -> bool| -> Option<f64> {
            let pts: Vec<(f64, f64)> = self
                .samples
                .iter()
                .zip(&self.log_modulus)
                .filter(|((x, _), l)| keep(*x) && l.is_finite())
                .map(|((x, _), &l)| (*x as f64, l))
                .collect();
            if pts.len() < 2 {
                return None;
            }
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            Some(sxy / sxx)
        };
        let left = side(&|x| x < 0).map_or(0.0, |s| (-s).exp());
        let right = side(&|x| x > 0).map_or(0.0, f64::exp);
        (left, right)
    }

    /// Largest residual of the three-term recursion over interior sites.
    pub fn recursion_residual(&self, params: &WalkParameters, profile: &CoinProfile) -> f64 {
        let s = self.sign.value();
        let psi: Vec<C64> = self.samples.iter().map(|p| p.1).collect();
        let mut worst: f64 = 0.0;
        for i in 1..psi.len() - 1 {
            let x = self.samples[i].0;
            let (here, next) = (profile.coin_at(x), profile.coin_at(x + 1));
            let r = alpha(params, next.b, self.sign) * psi[i + 1]
                - alpha(params, here.b, self.sign.flip()).conj() * psi[i - 1]
                + s * beta(params, &here, &next) * psi[i];
            worst = worst.max(r.norm());
        }
        worst
    }
}

/// Coefficients of `v` in the eigenbasis `P`; returns the dominant branch
/// after checking that the other coefficient vanishes.
fn single_branch(eig: &EigenPair, v: [C64; 2]) -> Result<(usize, C64)> {
    let k = mat_apply(&mat_inv(&eig.p_matrix), v);
    let (j, big, small) = if k[0].norm() >= k[1].norm() { (1, k[0], k[1]) } else { (2, k[1], k[0]) };
    if small.norm() > MATCH_TOL * big.norm() {
        return Err(Error::Consistency(format!(
            "matching coefficients {} and {} are both nonzero",
            k[0], k[1]
        )));
    }
    Ok((j, big))
}

/// `ln psi(x)` on each side of the wall.
struct Shape {
    left: Option<(C64, C64)>,
    right: Option<(C64, C64)>,
}

impl Shape {
    /// Returns `ln psi(x)`, or `None` where `psi(x) = 0`.
    fn log_at(&self, x: i64) -> Option<C64> {
        let side = if x < 0 || (x == 0 && self.left.is_some()) { self.left } else { self.right };
        side.map(|(c0, lz)| c0 + lz * x as f64)
    }
}

pub fn construct_bound_state(
    params: &WalkParameters,
    profile: &CoinProfile,
    sign: Sign,
    window: &LatticeWindow,
) -> Result<Option<BoundState>> {
    let coin_type = classify_coin(profile);
    if coin_type == CoinType::I {
        return Err(Error::Unsupported("type I kernel vectors are single-site; no transfer construction".into()));
    }
    let (dp, dm) = kernel_dimensions(params, profile)?;
    let expected = if sign == Sign::Plus { dp } else { dm };
    let s = sign.value();

    let (branch, shape, rates) = match coin_type {
        CoinType::III => {
            let el = transfer_eigenvalues(params, &profile.left, sign)?;
            let er = transfer_eigenvalues(params, &profile.right, sign)?;
            let admissible: Vec<usize> =
                (1..=2).filter(|&j| el.z(j).norm() > 1.0 && er.z(j).norm() < 1.0).collect();
            if admissible.len() > 1 {
                return Err(Error::Consistency("both branches square summable".into()));
            }
            if admissible.len() as u32 != expected {
                return Err(Error::Consistency(format!(
                    "{} admissible branches but d = {expected}",
                    admissible.len()
                )));
            }
            let Some(&j) = admissible.first() else { return Ok(None) };
            let zl = el.z(j);
            // Phi(0) = P(L) e_j, transported across the wall by A(0)
            let phi0 = [zl, C64::new(1.0, 0.0)];
            let a0 = transfer_matrix(params, profile, sign, Site::At(0))?;
            let phi1 = mat_apply(&a0.value, phi0);
            let (jr, kr) = single_branch(&er, phi1)?;
            if jr != j || (kr - zl).norm() > MATCH_TOL * zl.norm() {
                return Err(Error::Consistency("wall transport left the eigenline".into()));
            }
            let zr = er.z(j);
            let shape = Shape { left: Some((zl.ln(), zl.ln())), right: Some((kr.ln(), zr.ln())) };
            (j, shape, (1.0 / zl.norm(), zr.norm()))
        }
        CoinType::II => {
            let er = transfer_eigenvalues(params, &profile.right, sign)?;
            let b0 = beta(params, &profile.coin_at(0), &profile.coin_at(1));
            let phi1 = [C64::from(-s * b0) / alpha(params, profile.right.b(), sign), C64::new(1.0, 0.0)];
            let (j, k) = single_branch(&er, phi1)?;
            let zr = er.z(j);
            let decays = zr.norm() < 1.0;
            if decays != (expected == 1) {
                return Err(Error::Consistency(format!("|z_{j}(R)| = {} but d = {expected}", zr.norm())));
            }
            if !decays {
                return Ok(None);
            }
            (j, Shape { left: None, right: Some((k.ln(), zr.ln())) }, (0.0, zr.norm()))
        }
        CoinType::IIprime => {
            let el = transfer_eigenvalues(params, &profile.left, sign)?;
            let b0 = beta(params, &profile.coin_at(0), &profile.coin_at(1));
            let phi0 = [C64::new(1.0, 0.0), C64::from(s * b0) / alpha(params, profile.left.b(), sign.flip()).conj()];
            let (j, k) = single_branch(&el, phi0)?;
            let zl = el.z(j);
            let decays = zl.norm() > 1.0;
            if decays != (expected == 1) {
                return Err(Error::Consistency(format!("|z_{j}(L)| = {} but d = {expected}", zl.norm())));
            }
            if !decays {
                return Ok(None);
            }
            (j, Shape { left: Some(((k * zl).ln(), zl.ln())), right: None }, (1.0 / zl.norm(), 0.0))
        }
        CoinType::I | CoinType::TrivialLimit => unreachable!(),
    };

    let logs: Vec<Option<C64>> = window.sites().map(|x| shape.log_at(x)).collect();
    let log_modulus: Vec<f64> = logs.iter().map(|l| l.map_or(f64::NEG_INFINITY, |l| l.re)).collect();
    let peak = log_modulus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mass: f64 = log_modulus.iter().map(|l| (2.0 * (l - peak)).exp()).sum();
    let log_norm = peak + 0.5 * mass.ln();
    let samples = window
        .sites()
        .zip(&logs)
        .map(|(x, l)| (x, l.map_or(C64::new(0.0, 0.0), |l| (l - log_norm).exp())))
        .collect();
    Ok(Some(BoundState { sign, window: *window, coin_type, branch, samples, log_modulus, decay_rates: rates }))
}
