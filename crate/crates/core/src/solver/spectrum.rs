//! Spectrum of the truncated evolution `U = Gamma C` on a periodic window.
//!
//! `U` is normal, so its real and imaginary parts are commuting Hermitian
//! matrices. The real parts of the eigenvalues are the spectrum of
//! `(U + U*)/2` and the imaginary parts that of `(U - U*)/2i`. Chiral
//! symmetry makes the spectrum closed under conjugation, which pairs them.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lattice::{adjoint, build_evolution, Boundary, LatticeWindow};
use crate::model::{CoinProfile, WalkParameters};
use crate::C64;

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    /// Eigenvalues ordered by real part, conjugate partners adjacent.
    pub eigenvalues: Vec<C64>,
    /// `max_k |(1 - r_k^2) - s_k^2|` over sorted real parts `r` and sorted
    /// imaginary moduli `s`.
    pub modulus_residual: f64,
    /// `max |U U* - I|`.
    pub unitarity_residual: f64,
}

impl Spectrum {
    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }
}

/// `max |U U* - I|` from the nonzero pattern of `U`, which has at most four
/// entries per row.
fn unitarity_residual(u: &Array2<C64>) -> f64 {
    let rows: Vec<Vec<(usize, C64)>> = u
        .rows()
        .into_iter()
        .map(|r| r.iter().enumerate().filter(|(_, z)| z.norm_sqr() > 0.0).map(|(j, &z)| (j, z)).collect())
        .collect();
    let mut by_col: Vec<Vec<usize>> = vec![Vec::new(); u.ncols()];
    for (i, r) in rows.iter().enumerate() {
        for &(j, _) in r {
            by_col[j].push(i);
        }
    }
    let mut worst: f64 = 0.0;
    for (i, r) in rows.iter().enumerate() {
        let mut partners: Vec<usize> = r.iter().flat_map(|&(j, _)| by_col[j].iter().copied()).collect();
        partners.sort_unstable();
        partners.dedup();
        for k in partners {
            let dot: C64 = r
                .iter()
                .filter_map(|&(j, z)| rows[k].iter().find(|e| e.0 == j).map(|e| z * e.1.conj()))
                .sum();
            let target = if i == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

pub fn sample_spectrum(window: &LatticeWindow, params: &WalkParameters, profile: &CoinProfile) -> Result<Spectrum> {
    if window.boundary != Boundary::Periodic {
        return Err(Error::Unsupported("spectrum sampling needs a periodic window".into()));
    }
    let u = build_evolution(window, params, profile).matrix;
    let ud = adjoint(&u);
    let unitarity_residual = unitarity_residual(&u);

    let real = (&u + &ud).mapv(|z| z * 0.5);
    let mut re: Vec<f64> = linalg::eigvalsh(&real)?.into_iter().map(|r| r.clamp(-1.0, 1.0)).collect();
    re.sort_by(f64::total_cmp);
    let imag = (&u - &ud).mapv(|z| z / C64::new(0.0, 2.0));
    let mut im2: Vec<f64> = linalg::eigvalsh(&imag)?.into_iter().map(|s| s * s).collect();
    im2.sort_by(f64::total_cmp);

    let mut from_re: Vec<f64> = re.iter().map(|r| 1.0 - r * r).collect();
    from_re.sort_by(f64::total_cmp);
    let modulus_residual = from_re.iter().zip(&im2).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let eigenvalues = re
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let s = (1.0 - r * r).max(0.0).sqrt();
            C64::new(r, if k % 2 == 0 { s } else { -s })
        })
        .collect();
    Ok(Spectrum { eigenvalues, modulus_residual, unitarity_residual })
}

/// Hausdorff distance between a finite point set and an interval.
pub fn hausdorff_to_interval(points: &[f64], lo: f64, hi: f64) -> f64 {
    if points.is_empty() {
        return f64::INFINITY;
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let outside = sorted.iter().fold(0.0f64, |m, &x| m.max((lo - x).max(x - hi).max(0.0)));
    let inside: Vec<f64> = sorted.iter().map(|x| x.clamp(lo, hi)).collect();
    let mut cover = (inside[0] - lo).max(hi - inside[inside.len() - 1]);
    for w in inside.windows(2) {
        cover = cover.max((w[1] - w[0]) / 2.0);
    }
    outside.max(cover)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::essential_spectrum;
    use crate::model::{CoinEntry, LimitCoin};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matches_general_eigensolver() {
        let params = WalkParameters::from_p_theta(0.35, 1.2).unwrap();
        let prof = CoinProfile::step(LimitCoin::from_a_phase(0.7, 0.3).unwrap(), LimitCoin::from_a_phase(-0.2, 2.5).unwrap())
            .with_override(3, CoinEntry::identity(-1.0));
        let w = LatticeWindow::periodic(12).unwrap();
        let sp = sample_spectrum(&w, &params, &prof).unwrap();
        let mut reference = linalg::eigvals(&build_evolution(&w, &params, &prof).matrix).unwrap();
        assert_eq!(reference.len(), sp.eigenvalues.len());
        for z in &sp.eigenvalues {
            let (k, d) = reference
                .iter()
                .enumerate()
                .map(|(k, r)| (k, (r - z).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(d < 1e-7, "{z} unmatched ({d})");
            reference.swap_remove(k);
        }
        assert!(sp.modulus_residual < 1e-12);
        assert!(sp.unitarity_residual < 1e-13);
        let u = build_evolution(&w, &params, &prof).matrix;
        let dense = crate::lattice::max_abs(&(linalg::matmul(&u, &adjoint(&u)) - Array2::<C64>::eye(u.nrows())));
        assert!((sp.unitarity_residual - dense).abs() < 1e-15);
    }

    #[test]
    fn homogeneous_band_is_filled() {
        let params = WalkParameters::from_p_theta(0.5, 0.0).unwrap();
        let coin = LimitCoin::anisotropic(0.0, c(1.0, 0.0)).unwrap();
        let w = LatticeWindow::periodic(64).unwrap();
        let sp = sample_spectrum(&w, &params, &CoinProfile::homogeneous(coin)).unwrap();
        let i = essential_spectrum(&params, &coin);
        let re = sp.real_parts();
        assert!(re.iter().all(|&r| r >= i.lo - 1e-8 && r <= i.hi + 1e-8));
        assert!(hausdorff_to_interval(&re, i.lo, i.hi) < 10.0 / 64.0);
    }

    #[test]
    fn trivial_coin_sits_at_plus_minus_one() {
        let params = WalkParameters::from_p_theta(0.5, 0.7).unwrap();
        let w = LatticeWindow::periodic(16).unwrap();
        let prof = CoinProfile::homogeneous(LimitCoin::new(CoinEntry::identity(1.0)));
        let sp = sample_spectrum(&w, &params, &prof).unwrap();
        assert!(sp.real_parts().iter().all(|r| (r.abs() - 1.0).abs() < 1e-10));
    }

    #[test]
    fn diagonal_coin_collapses_band_to_p() {
        let params = WalkParameters::from_p_theta(0.5, 0.7).unwrap();
        let w = LatticeWindow::periodic(16).unwrap();
        let coin = LimitCoin::anisotropic(1.0, c(0.0, 0.0)).unwrap();
        let sp = sample_spectrum(&w, &params, &CoinProfile::homogeneous(coin)).unwrap();
        assert!(sp.real_parts().iter().all(|r| (r - 0.5).abs() < 1e-10));
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_to_interval(&[0.0, 1.0], 0.0, 1.0), 0.5);
        assert_eq!(hausdorff_to_interval(&[0.5], 0.0, 1.0), 0.5);
        assert!((hausdorff_to_interval(&[-0.2, 0.0, 0.5, 1.0], 0.0, 1.0) - 0.25).abs() < 1e-15);
    }
}
