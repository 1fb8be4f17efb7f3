//! Transfer matrices `A_±(x)` and the wall sandwich identity.

use crate::analytic::transfer_eigenvalues;
use crate::error::{Error, Result, Site};
use crate::lattice::{alpha, beta};
use crate::model::{classify_coin, CoinEntry, CoinProfile, CoinType, WalkParameters};
use crate::{Sign, C64};

pub type Mat2 = [[C64; 2]; 2];

/// `A_±` at a site or at a limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub value: Mat2,
    pub site: Site,
    pub sign: Sign,
}

/// `[[∓beta/alpha_±(next), conj(alpha_∓(here))/alpha_±(next)], [1, 0]]`.
fn assemble(params: &WalkParameters, here: &CoinEntry, next: &CoinEntry, sign: Sign, site: Site) -> Result<Mat2> {
    let den = alpha(params, next.b, sign);
    if den.norm() < 1e-300 {
        return Err(Error::TransferUndefined(site));
    }
    let b = beta(params, here, next);
    let num = alpha(params, here.b, sign.flip()).conj();
    let zero = C64::new(0.0, 0.0);
    Ok([[C64::from(-sign.value() * b) / den, num / den], [C64::new(1.0, 0.0), zero]])
}

pub fn transfer_matrix(params: &WalkParameters, profile: &CoinProfile, sign: Sign, site: Site) -> Result<TransferMatrix> {
    let (here, next) = match site {
        Site::At(x) => (profile.coin_at(x), profile.coin_at(x + 1)),
        Site::Left => (profile.left.entry, profile.left.entry),
        Site::Right => (profile.right.entry, profile.right.entry),
    };
    let value = assemble(params, &here, &next, sign, site)?;
    Ok(TransferMatrix { value, site, sign })
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

pub fn mat_inv(a: &Mat2) -> Mat2 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]
}

pub fn mat_apply(a: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// `max |P_±(R)^{-1} A_±(0) P_±(L) - diag(z_{±,1}(L), z_{±,2}(L))|`.
pub fn sandwich_check(params: &WalkParameters, profile: &CoinProfile, sign: Sign) -> Result<f64> {
    if classify_coin(profile) != CoinType::III || !profile.is_canonical_step() {
        return Err(Error::Unsupported("sandwich identity needs a type III step profile".into()));
    }
    let el = transfer_eigenvalues(params, &profile.left, sign)?;
    let er = transfer_eigenvalues(params, &profile.right, sign)?;
    let a0 = transfer_matrix(params, profile, sign, Site::At(0))?;
    let m = mat_mul(&mat_mul(&mat_inv(&er.p_matrix), &a0.value), &el.p_matrix);
    let target = [[el.z1, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), el.z2]];
    let mut r: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            r = r.max((m[i][j] - target[i][j]).norm());
        }
    }
    Ok(r)
}
