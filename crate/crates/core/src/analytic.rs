//! Closed forms: the f-function, transfer eigenvalues, kernel dimensions,
//! Fredholm criterion, essential spectrum and the index formula.

use crate::error::{Error, Result};
use crate::model::{classify_coin, CoinProfile, CoinType, IndexReport, LimitCoin, WalkParameters};
use crate::{Sign, C64};

/// Default half-width of the band flagged as near a classification boundary.
pub const NEAR_BOUNDARY_BAND: f64 = 1e-9;

/// Nonnegative extended real; `Infinity` compares above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Extended {
    Finite(f64),
    Infinity,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinity => None,
        }
    }
}

/// `f(k) = sqrt((1 + k) / (1 - k))` on `[-1, 1]`.
pub fn f_kappa(kappa: f64) -> Result<Extended> {
    if !(kappa.abs() <= 1.0) {
        return Err(Error::Domain(format!("f_kappa needs |kappa| <= 1, got {kappa}")));
    }
    if kappa == 1.0 {
        return Ok(Extended::Infinity);
    }
    Ok(Extended::Finite(f(kappa)))
}

fn f(kappa: f64) -> f64 {
    ((1.0 + kappa) / (1.0 - kappa)).sqrt()
}

/// Eigenvalues `z_{±,1}, z_{±,2}` of `A_±(#)` and the eigenvector matrix `P_±(#)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub z1: C64,
    pub z2: C64,
    pub p_matrix: [[C64; 2]; 2],
}

impl EigenPair {
    pub fn z(&self, j: usize) -> C64 {
        if j == 1 {
            self.z1
        } else {
            self.z2
        }
    }

    pub fn det(&self) -> C64 {
        self.z1 - self.z2
    }
}

pub fn transfer_eigenvalues(params: &WalkParameters, limit: &LimitCoin, sign: Sign) -> Result<EigenPair> {
    if limit.trivial || limit.b_is_zero() {
        return Err(Error::Domain("transfer eigenvalues need b(#) != 0".into()));
    }
    let s = sign.value();
    let pre = params.q.conj() / (1.0 + s * params.p);
    let a = limit.a();
    let b = limit.b();
    let z1 = pre * (-1.0 + s * a) / b;
    let z2 = pre * (1.0 + s * a) / b;
    let one = C64::new(1.0, 0.0);
    Ok(EigenPair { z1, z2, p_matrix: [[z1, z2], [one, one]] })
}

/// `(|z_{±,1}|, |z_{±,2}|) = (f(∓p) f(∓a), f(∓p) f(±a))`.
pub fn eigenvalue_moduli(p: f64, a_sharp: f64, sign: Sign) -> Result<(f64, f64)> {
    if !(p.abs() < 1.0 && a_sharp.abs() < 1.0) {
        return Err(Error::Domain("eigenvalue moduli need |p| < 1 and |a| < 1".into()));
    }
    let s = sign.value();
    let fp = f(-s * p);
    Ok((fp * f(-s * a_sharp), fp * f(s * a_sharp)))
}

/// Fredholm verdict with the reason for failure.
pub fn is_fredholm(params: &WalkParameters, profile: &CoinProfile) -> (bool, Option<String>) {
    if profile.left.trivial || profile.right.trivial {
        return (false, Some("trivial limit".into()));
    }
    let p = params.p.abs();
    if p == profile.left.a().abs() {
        return (false, Some("|p| = |a(L)|".into()));
    }
    if p == profile.right.a().abs() {
        return (false, Some("|p| = |a(R)|".into()));
    }
    (true, None)
}

/// Kernel dimensions `(d_+, d_-)` of `Q_eps±` for a Fredholm step profile.
pub fn kernel_dimensions(params: &WalkParameters, profile: &CoinProfile) -> Result<(u32, u32)> {
    let (fredholm, reason) = is_fredholm(params, profile);
    if !fredholm {
        return Err(Error::NotFredholm(reason.unwrap_or_default()));
    }
    if !profile.is_canonical_step() {
        return Err(Error::Unsupported(
            "kernel dimensions are tabulated for step profiles only".into(),
        ));
    }
    let p = params.p;
    let al = profile.left.a();
    let ar = profile.right.a();
    let d = |s: f64| -> u32 {
        let one = match classify_coin(profile) {
            CoinType::I => al * ar < 0.0,
            CoinType::II => -s * p + al * ar < 0.0,
            CoinType::IIprime => s * p + al * ar < 0.0,
            CoinType::III => (ar < s * p && s * p < al) || (al < -s * p && -s * p < ar),
            CoinType::TrivialLimit => unreachable!("trivial limits are not Fredholm"),
        };
        one as u32
    };
    Ok((d(1.0), d(-1.0)))
}

/// True when the inputs lie within `band` of a Fredholm or classification
/// boundary.
pub fn near_boundary(params: &WalkParameters, profile: &CoinProfile, band: f64) -> bool {
    if profile.left.trivial || profile.right.trivial {
        return false;
    }
    let p = params.p;
    let al = profile.left.a();
    let ar = profile.right.a();
    let mut gaps = vec![(p.abs() - al.abs()).abs(), (p.abs() - ar.abs()).abs()];
    match classify_coin(profile) {
        CoinType::I => gaps.push((al * ar).abs()),
        CoinType::II | CoinType::IIprime => {
            gaps.push((p + al * ar).abs());
            gaps.push((-p + al * ar).abs());
        }
        CoinType::III | CoinType::TrivialLimit => {}
    }
    gaps.into_iter().any(|g| g < band)
}

/// Index from the closed-form formula in terms of `p`, `a(L)`, `a(R)`.
fn index_formula(p: f64, al: f64, ar: f64) -> i32 {
    let (ap, al, ar) = (p.abs(), al.abs(), ar.abs());
    let sgn = if p > 0.0 {
        1
    } else if p < 0.0 {
        -1
    } else {
        0
    };
    if ar < ap && ap < al {
        sgn
    } else if al < ap && ap < ar {
        -sgn
    } else {
        0
    }
}

pub fn witten_index(params: &WalkParameters, profile: &CoinProfile) -> IndexReport {
    witten_index_with_band(params, profile, NEAR_BOUNDARY_BAND)
}

pub fn witten_index_with_band(params: &WalkParameters, profile: &CoinProfile, band: f64) -> IndexReport {
    let coin_type = classify_coin(profile);
    let near = near_boundary(params, profile, band);
    let (fredholm, reason) = is_fredholm(params, profile);
    if !fredholm {
        return IndexReport {
            fredholm,
            reason,
            d_plus: None,
            d_minus: None,
            index: None,
            coin_type,
            near_boundary: near,
        };
    }
    let index = index_formula(params.p, profile.left.a(), profile.right.a());
    let (d_plus, d_minus) = match kernel_dimensions(params, profile) {
        Ok((dp, dm)) => (Some(dp), Some(dm)),
        Err(_) => (None, None),
    };
    IndexReport {
        fredholm,
        reason: None,
        d_plus,
        d_minus,
        index: Some(index),
        coin_type,
        near_boundary: near,
    }
}

/// Real parts of the spectrum of the homogeneous evolution with coin `C(#)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInterval {
    pub lo: f64,
    pub hi: f64,
    pub degenerate: bool,
}

impl SpectralInterval {
    /// Distance from `x` to the set; the degenerate set is `{-1, +1}`.
    pub fn distance(&self, x: f64) -> f64 {
        if self.degenerate {
            (x - 1.0).abs().min((x + 1.0).abs())
        } else if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.distance(x) == 0.0
    }
}

pub fn essential_spectrum(params: &WalkParameters, limit: &LimitCoin) -> SpectralInterval {
    if limit.trivial {
        return SpectralInterval { lo: -1.0, hi: 1.0, degenerate: true };
    }
    let centre = params.p * limit.a();
    let half = (params.q * limit.b()).norm();
    SpectralInterval {
        lo: (centre - half).max(-1.0),
        hi: (centre + half).min(1.0),
        degenerate: false,
    }
}

/// The same interval in the angle form `[-cos(T + T#), cos(T - T#)]` with
/// `T = arcsin p`, `T# = arcsin a(#)`.
pub fn angle_interval(params: &WalkParameters, limit: &LimitCoin) -> Option<SpectralInterval> {
    if limit.trivial {
        return None;
    }
    let t = params.p.asin();
    let ts = limit.a().clamp(-1.0, 1.0).asin();
    Some(SpectralInterval { lo: -(t + ts).cos(), hi: (t - ts).cos(), degenerate: false })
}

/// Fredholm verdict from the spectral gap test `±1 ∉ I_L, I_R`, using the
/// angle form of the intervals.
pub fn gap_fredholm_check(params: &WalkParameters, profile: &CoinProfile) -> bool {
    [profile.left, profile.right].iter().all(|limit| match angle_interval(params, limit) {
        Some(i) => i.lo > -1.0 && i.hi < 1.0,
        None => false,
    })
}

/// `(ind(Gamma, -C), ind(-Gamma, C))` through the classification.
pub fn sign_flip_identities(params: &WalkParameters, profile: &CoinProfile) -> Result<(i32, i32)> {
    let (fredholm, reason) = is_fredholm(params, profile);
    if !fredholm {
        return Err(Error::NotFredholm(reason.unwrap_or_default()));
    }
    let neg_coin = witten_index(params, &profile.negated());
    let neg_shift = witten_index(&params.negated(), profile);
    match (neg_coin.index, neg_shift.index) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Consistency("sign flip lost Fredholmness".into())),
    }
}
