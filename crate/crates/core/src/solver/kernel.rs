//! Kernel dimensions of truncated `Q_eps±` from singular values.

use ndarray::{Array1, Array2, Axis};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lattice::{Boundary, LatticeWindow, Role, TruncatedOperator};
use crate::C64;

/// Relative zero threshold on singular values.
pub const ZERO_TOL: f64 = 1e-8;
/// Required ratio between the smallest uncounted and largest counted value.
pub const GAP_RATIO: f64 = 100.0;
/// Smallest uncounted singular value, relative to the largest, that still
/// counts as resolved bulk spectrum.
pub const RESOLUTION_FLOOR: f64 = 1e-3;
/// Share of squared amplitude that a counted vector keeps in the middle half.
pub const LOCALIZED: f64 = 0.9;
/// Below this share a near-null direction is an edge artifact.
pub const DELOCALIZED: f64 = 0.1;
/// An uncounted singular value this far below the next one, with a vector
/// sitting near the wall, is a bound state the window fails to resolve.
pub const ISOLATION: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct KernelCount {
    pub dimension: usize,
    /// All singular values, ascending.
    pub singular_values: Vec<f64>,
    pub gap_ratio: f64,
    pub conclusive: bool,
    /// Number of singular values below the threshold before localization.
    pub near_null: usize,
    /// Orthonormal columns spanning the counted vectors.
    #[serde(skip)]
    pub basis: Array2<C64>,
}

impl KernelCount {
    /// Norm of the projection of a unit vector onto the counted subspace.
    pub fn overlap(&self, v: &Array1<C64>) -> f64 {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let proj = self.basis.t().mapv(|z| z.conj()).dot(v);
        proj.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / norm
    }
}

/// Counts for `Q_eps+` and `Q_eps-` from one decomposition of `Q_eps+`;
/// `Q_eps- = -Q_eps+^*`, so its kernel is spanned by left singular vectors.
#[derive(Debug, Clone, Serialize)]
pub struct KernelPair {
    pub plus: KernelCount,
    pub minus: KernelCount,
}

impl KernelPair {
    pub fn conclusive(&self) -> bool {
        self.plus.conclusive && self.minus.conclusive
    }

    pub fn index(&self) -> i64 {
        self.plus.dimension as i64 - self.minus.dimension as i64
    }
}

fn check_operator(op: &TruncatedOperator) -> Result<()> {
    if !matches!(op.role, Role::QPlus | Role::QMinus) {
        return Err(Error::Unsupported("kernel counting expects Q_eps+ or Q_eps-".into()));
    }
    if op.window.boundary != Boundary::Open {
        return Err(Error::Unsupported("kernel counting expects an open window".into()));
    }
    Ok(())
}

fn count(window: &LatticeWindow, s: &Array1<f64>, vectors: &Array2<C64>, localize: bool) -> Result<KernelCount> {
    let n = s.len();
    let smax = s[0];
    let mut ascending: Vec<f64> = s.to_vec();
    ascending.reverse();
    if smax == 0.0 {
        return Ok(KernelCount {
            dimension: n,
            singular_values: ascending,
            gap_ratio: 1.0,
            conclusive: false,
            near_null: n,
            basis: vectors.clone(),
        });
    }
    let tau = ZERO_TOL * smax;
    let k = ascending.iter().take_while(|&&x| x < tau).count();
    let smallest_uncounted = ascending.get(k).copied().unwrap_or(f64::INFINITY);
    let largest_counted = if k > 0 { ascending[k - 1].max(tau) } else { tau };
    let gap_ratio = smallest_uncounted / largest_counted;
    // the k smallest singular values sit in the last k columns
    let null = vectors.slice(ndarray::s![.., n - k..]).to_owned();
    let extensive = k > 8.max(n / 8);
    let mid: Vec<bool> = window.sites().map(|x| window.in_middle(x)).collect();
    let middle_weight = |col: usize| -> f64 {
        vectors.column(col).iter().zip(&mid).filter(|(_, &m)| m).map(|(z, _)| z.norm_sqr()).sum()
    };
    let unresolved = k + 1 < n && smallest_uncounted < ISOLATION * ascending[k + 1] && middle_weight(n - k - 1) > DELOCALIZED;

    let (dimension, basis, ambiguous) = if localize && k > 0 {
        let mut pm = null.clone();
        for (i, mut row) in pm.axis_iter_mut(Axis(0)).enumerate() {
            if !mid[i] {
                row.fill(C64::new(0.0, 0.0));
            }
        }
        let gram = null.t().mapv(|z| z.conj()).dot(&pm);
        let (w, rot) = linalg::eigh(&gram)?;
        let keep: Vec<usize> = (0..k).filter(|&i| w[i] >= LOCALIZED).collect();
        let ambiguous = w.iter().any(|&x| x > DELOCALIZED && x < LOCALIZED);
        let sel = rot.select(Axis(1), &keep);
        (keep.len(), null.dot(&sel), ambiguous)
    } else {
        (k, null, false)
    };
    let conclusive = gap_ratio >= GAP_RATIO
        && smallest_uncounted >= RESOLUTION_FLOOR * smax
        && !ambiguous
        && !unresolved
        && !extensive;
    Ok(KernelCount { dimension, singular_values: ascending, gap_ratio, conclusive, near_null: k, basis })
}

pub fn kernel_count_svd(op: &TruncatedOperator, localization_filter: bool) -> Result<KernelCount> {
    check_operator(op)?;
    let (_, s, v) = linalg::svd(&op.matrix)?;
    count(&op.window, &s, &v, localization_filter)
}

/// Kernel and cokernel counts of `Q_eps+` from a single SVD.
pub fn kernel_pair_svd(q_plus: &TruncatedOperator, localization_filter: bool) -> Result<KernelPair> {
    check_operator(q_plus)?;
    if q_plus.role != Role::QPlus {
        return Err(Error::Unsupported("kernel_pair_svd expects Q_eps+".into()));
    }
    let (u, s, v) = linalg::svd(&q_plus.matrix)?;
    Ok(KernelPair {
        plus: count(&q_plus.window, &s, &v, localization_filter)?,
        minus: count(&q_plus.window, &s, &u, localization_filter)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_q_epsilon, Scaling};
    use crate::model::{CoinEntry, CoinProfile, LimitCoin, WalkParameters};
    use crate::Sign;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn e1() -> (WalkParameters, CoinProfile) {
        (
            WalkParameters::from_p_theta(0.5, 0.0).unwrap(),
            CoinProfile::step(
                LimitCoin::anisotropic(0.8, c(0.6, 0.0)).unwrap(),
                LimitCoin::anisotropic(0.0, c(1.0, 0.0)).unwrap(),
            ),
        )
    }

    #[test]
    fn e1_counts_at_300() {
        let (params, prof) = e1();
        let w = LatticeWindow::open(300).unwrap();
        let qp = build_q_epsilon(&w, &params, &prof, Sign::Plus, Scaling::Rescaled);
        let kp = kernel_count_svd(&qp, true).unwrap();
        assert_eq!(kp.dimension, 1);
        assert!(kp.conclusive && kp.gap_ratio >= GAP_RATIO);
        let qm = build_q_epsilon(&w, &params, &prof, Sign::Minus, Scaling::Rescaled);
        let km = kernel_count_svd(&qm, true).unwrap();
        assert_eq!(km.dimension, 0);
        assert!(km.conclusive);

        let pair = kernel_pair_svd(&qp, true).unwrap();
        assert_eq!((pair.plus.dimension, pair.minus.dimension), (1, 0));
        assert!(pair.conclusive());
    }

    #[test]
    fn trivial_limit_is_inconclusive() {
        let params = WalkParameters::from_p_theta(0.4, 0.0).unwrap();
        let prof = CoinProfile::step(
            LimitCoin::new(CoinEntry::identity(1.0)),
            LimitCoin::anisotropic(1.0, c(0.0, 0.0)).unwrap(),
        );
        let w = LatticeWindow::open(40).unwrap();
        let q = build_q_epsilon(&w, &params, &prof, Sign::Plus, Scaling::Rescaled);
        let k = kernel_count_svd(&q, true).unwrap();
        assert!(k.near_null > 20, "{}", k.near_null);
        assert!(!k.conclusive);
    }

    #[test]
    fn type_i_single_site_kernel() {
        let params = WalkParameters::from_p_theta(0.3, 0.0).unwrap();
        let prof = CoinProfile::step(
            LimitCoin::anisotropic(1.0, c(0.0, 0.0)).unwrap(),
            LimitCoin::anisotropic(-1.0, c(0.0, 0.0)).unwrap(),
        );
        let w = LatticeWindow::open(30).unwrap();
        let q = build_q_epsilon(&w, &params, &prof, Sign::Plus, Scaling::Rescaled);
        let pair = kernel_pair_svd(&q, true).unwrap();
        assert_eq!((pair.plus.dimension, pair.minus.dimension), (1, 1));
        assert!(pair.conclusive());
        let mut delta = Array1::zeros(w.len());
        delta[w.index(0).unwrap()] = c(1.0, 0.0);
        assert!((pair.plus.overlap(&delta) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_wrong_inputs() {
        let (params, prof) = e1();
        let w = LatticeWindow::periodic(10).unwrap();
        let q = build_q_epsilon(&w, &params, &prof, Sign::Plus, Scaling::Rescaled);
        assert!(kernel_count_svd(&q, true).is_err());
    }

    #[test]
    fn unresolved_slow_decay_is_flagged() {
        // decay factor 0.905 per site: a window of 40 cannot resolve it
        let params = WalkParameters::from_p_theta(0.1, 0.0).unwrap();
        let prof = CoinProfile::step(
            LimitCoin::from_a_phase(0.6, 0.0).unwrap(),
            LimitCoin::from_a_phase(0.0, 0.0).unwrap(),
        );
        let w = LatticeWindow::open(40).unwrap();
        let q = build_q_epsilon(&w, &params, &prof, Sign::Plus, Scaling::Rescaled);
        let k = kernel_count_svd(&q, true).unwrap();
        assert!(!k.conclusive);
        let wide = LatticeWindow::open(400).unwrap();
        let q = build_q_epsilon(&wide, &params, &prof, Sign::Plus, Scaling::Rescaled);
        let k = kernel_count_svd(&q, true).unwrap();
        assert!(k.conclusive && k.dimension == 1);
    }
}
