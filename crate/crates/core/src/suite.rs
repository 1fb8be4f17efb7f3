//! Measurement drivers shared by the `verify` command and the acceptance
//! suite. Each driver returns raw numbers; callers decide pass or fail.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{essential_spectrum, kernel_dimensions, sign_flip_identities, transfer_eigenvalues, witten_index};
use crate::draw::{random_offdiagonal_limit, random_params, random_step_profile, random_type_iii, trial_seed};
use crate::error::{Result, Site};
use crate::grid::GridPoint;
use crate::linalg;
use crate::lattice::{build_q_epsilon, verify_algebra_with, Fault, LatticeWindow, Scaling};
use crate::model::{classify_coin, CoinProfile, CoinType, IndexReport, LimitCoin, WalkParameters};
use crate::solver::invariance::{perturbation_invariance_test, InvarianceReport};
use crate::solver::kernel::{kernel_pair_svd, KernelCount};
use crate::solver::spectrum::{hausdorff_to_interval, sample_spectrum};
use crate::solver::trace::{trace_report, TraceReport};
use crate::solver::transfer::{sandwich_check, transfer_matrix};
use crate::solver::construct_bound_state;
use crate::{Sign, C64};

/// Tolerance for a real part to count as inside the essential spectrum.
pub const SPECTRUM_TOL: f64 = 1e-6;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Type III wall with `p = 0.5`, `C(L)` with `a = 0.8, b = 0.6`, `C(R)` with
/// `a = 0, b = 1`; index `+1`.
pub fn wall_e1() -> (WalkParameters, CoinProfile) {
    (
        WalkParameters::from_p_theta(0.5, 0.0).expect("valid"),
        CoinProfile::step(
            LimitCoin::anisotropic(0.8, c(0.6, 0.0)).expect("valid"),
            LimitCoin::anisotropic(0.0, c(1.0, 0.0)).expect("valid"),
        ),
    )
}

/// Type I wall `diag(1,-1) | diag(-1,1)` at `p = 0.3`; index `0`.
pub fn wall_type_i() -> (WalkParameters, CoinProfile) {
    (
        WalkParameters::from_p_theta(0.3, 0.0).expect("valid"),
        CoinProfile::step(
            LimitCoin::anisotropic(1.0, c(0.0, 0.0)).expect("valid"),
            LimitCoin::anisotropic(-1.0, c(0.0, 0.0)).expect("valid"),
        ),
    )
}

// ---------------------------------------------------------------------------
// operator algebra

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraSummary {
    pub draws: usize,
    pub max_residual: f64,
    pub worst_check: String,
}

pub fn algebra_suite(draws: usize, half_width: usize, seed: u64, fault: Option<Fault>) -> Result<AlgebraSummary> {
    let window = LatticeWindow::periodic(half_width)?;
    let reports: Result<Vec<_>> = (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, k as u64));
            let params = random_params(&mut rng);
            let profile = random_step_profile(&mut rng);
            verify_algebra_with(&window, &params, &profile, fault)
        })
        .collect();
    let mut max_residual = 0.0;
    let mut worst_check = String::new();
    for r in reports? {
        for res in r.residuals {
            if res.value >= max_residual {
                max_residual = res.value;
                worst_check = res.name.to_string();
            }
        }
    }
    Ok(AlgebraSummary { draws, max_residual, worst_check })
}

// ---------------------------------------------------------------------------
// transfer eigenvalues

#[derive(Debug, Clone, Serialize)]
pub struct EigenSummary {
    pub draws: usize,
    /// Largest `|z_closed - z_numeric| / max(1, |z|)`.
    pub max_solver_error: f64,
    /// Largest `||z| - f-product| / max(1, |z|)`.
    pub max_modulus_error: f64,
    /// Smallest `|z1 - z2|` divided by `2|q| / ((1 ± p)|b|)`.
    pub min_separation_ratio: f64,
}

fn eigvals2(m: &[[C64; 2]; 2]) -> Result<Vec<C64>> {
    linalg::eigvals(&Array2::from_shape_fn((2, 2), |(i, j)| m[i][j]))
}

pub fn eigen_suite(draws: usize, seed: u64) -> Result<EigenSummary> {
    let mut out = EigenSummary { draws, max_solver_error: 0.0, max_modulus_error: 0.0, min_separation_ratio: f64::INFINITY };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..draws {
        let params = random_params(&mut rng);
        let limit = random_offdiagonal_limit(&mut rng);
        let sign = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let closed = transfer_eigenvalues(&params, &limit, sign)?;
        let a = transfer_matrix(&params, &CoinProfile::homogeneous(limit), sign, Site::Right)?;
        let mut numeric = eigvals2(&a.value)?;
        for z in [closed.z1, closed.z2] {
            let (i, d) = numeric
                .iter()
                .enumerate()
                .map(|(i, w)| (i, (w - z).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("two eigenvalues");
            numeric.remove(i);
            out.max_solver_error = out.max_solver_error.max(d / z.norm().max(1.0));
        }
        let (m1, m2) = crate::analytic::eigenvalue_moduli(params.p, limit.a(), sign)?;
        for (z, m) in [(closed.z1, m1), (closed.z2, m2)] {
            out.max_modulus_error = out.max_modulus_error.max((z.norm() - m).abs() / m.max(1.0));
        }
        let bound = 2.0 * params.q_abs() / ((1.0 + sign.value() * params.p) * limit.b().norm());
        out.min_separation_ratio = out.min_separation_ratio.min(closed.det().norm() / bound);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// sandwich identity

pub fn sandwich_suite(draws: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for k in 0..draws {
        let params = random_params(&mut rng);
        let profile = random_type_iii(&mut rng);
        let sign = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
        worst = worst.max(sandwich_check(&params, &profile, sign)?);
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// kernel counts and bound states on the grid

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub sign: &'static str,
    pub residual: f64,
    pub overlap: f64,
    /// Largest amplitude of the normalized state at the two window ends;
    /// the residual cannot fall below this scale.
    pub edge: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridOutcome {
    pub id: usize,
    pub p: f64,
    pub a_left: f64,
    pub a_right: f64,
    pub coin_type: CoinType,
    pub analytic: IndexReport,
    pub svd_plus: usize,
    pub svd_minus: usize,
    pub conclusive: bool,
    pub gap_ratio: f64,
    pub bound_states: Vec<BoundCheck>,
}

impl GridOutcome {
    pub fn table_match(&self) -> bool {
        self.analytic.d_plus == Some(self.svd_plus as u32) && self.analytic.d_minus == Some(self.svd_minus as u32)
    }

    pub fn svd_index(&self) -> i64 {
        self.svd_plus as i64 - self.svd_minus as i64
    }
}

fn rel_residual(q: &Array2<C64>, v: &Array1<C64>) -> f64 {
    let r = q.dot(v);
    let num: f64 = r.iter().map(|z| z.norm_sqr()).sum();
    let den: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    (num / den).sqrt()
}

fn bound_checks(point: &GridPoint, window: &LatticeWindow, kernels: [&KernelCount; 2], dims: (u32, u32)) -> Result<Vec<BoundCheck>> {
    let mut out = Vec::new();
    for (sign, kernel, d) in [(Sign::Plus, kernels[0], dims.0), (Sign::Minus, kernels[1], dims.1)] {
        if d != 1 {
            continue;
        }
        let psi = if classify_coin(&point.profile) == CoinType::I {
            let mut v = Array1::zeros(window.len());
            v[window.index(0).expect("wall in window")] = c(1.0, 0.0);
            v
        } else {
            match construct_bound_state(&point.params, &point.profile, sign, window)? {
                Some(st) => st.vector(),
                None => continue,
            }
        };
        let q = build_q_epsilon(window, &point.params, &point.profile, sign, Scaling::Rescaled).matrix;
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let edge = psi[0].norm().max(psi[psi.len() - 1].norm()) / norm;
        out.push(BoundCheck { sign: sign.symbol(), residual: rel_residual(&q, &psi), overlap: kernel.overlap(&psi), edge });
    }
    Ok(out)
}

pub fn grid_suite(points: &[GridPoint], half_width: usize) -> Result<Vec<GridOutcome>> {
    let window = LatticeWindow::open(half_width)?;
    points
        .par_iter()
        .map(|g| {
            let analytic = witten_index(&g.params, &g.profile);
            let q = build_q_epsilon(&window, &g.params, &g.profile, Sign::Plus, Scaling::Rescaled);
            let pair = kernel_pair_svd(&q, true)?;
            let conclusive = pair.conclusive();
            let bound_states = match (conclusive, kernel_dimensions(&g.params, &g.profile)) {
                (true, Ok(dims)) => bound_checks(g, &window, [&pair.plus, &pair.minus], dims)?,
                _ => Vec::new(),
            };
            Ok(GridOutcome {
                id: g.id,
                p: g.params.p,
                a_left: g.profile.left.a(),
                a_right: g.profile.right.a(),
                coin_type: classify_coin(&g.profile),
                analytic,
                svd_plus: pair.plus.dimension,
                svd_minus: pair.minus.dimension,
                conclusive,
                gap_ratio: pair.plus.gap_ratio.min(pair.minus.gap_ratio),
                bound_states,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub points: usize,
    pub fredholm: usize,
    pub conclusive: usize,
    /// Conclusive points whose SVD counts differ from the tables.
    pub table_mismatches: usize,
    /// Fredholm points where the tabulated `d_+ - d_-` differs from the
    /// index formula, or where a conclusive SVD difference does.
    pub index_mismatches: usize,
    pub bound_states: usize,
    pub max_bound_residual: f64,
    pub min_bound_overlap: f64,
}

pub fn summarize_grid(outcomes: &[GridOutcome]) -> GridSummary {
    let mut s = GridSummary {
        points: outcomes.len(),
        fredholm: 0,
        conclusive: 0,
        table_mismatches: 0,
        index_mismatches: 0,
        bound_states: 0,
        max_bound_residual: 0.0,
        min_bound_overlap: f64::INFINITY,
    };
    for o in outcomes {
        let Some(index) = o.analytic.index else { continue };
        s.fredholm += 1;
        let tab = o.analytic.d_plus.unwrap_or(0) as i64 - o.analytic.d_minus.unwrap_or(0) as i64;
        let mut bad_index = tab != index as i64;
        if o.conclusive {
            s.conclusive += 1;
            if !o.table_match() {
                s.table_mismatches += 1;
            }
            bad_index |= o.svd_index() != index as i64;
        }
        if bad_index {
            s.index_mismatches += 1;
        }
        for b in &o.bound_states {
            s.bound_states += 1;
            s.max_bound_residual = s.max_bound_residual.max(b.residual);
            s.min_bound_overlap = s.min_bound_overlap.min(b.overlap);
        }
    }
    s
}

// ---------------------------------------------------------------------------
// trace formula

/// Ten Fredholm type III walls with indices `-1`, `0` and `+1`.
pub fn trace_points() -> Vec<GridPoint> {
    let walls: [(f64, f64, f64, f64, f64, f64); 10] = [
        (0.5, 0.0, 0.8, 0.0, 0.0, 0.0),
        (-0.5, 0.4, 0.0, 1.0, 0.8, -2.0),
        (0.5, -1.1, 0.0, 0.5, 0.8, 2.2),
        (0.3, 0.9, 0.6, -0.4, -0.6, 1.3),
        (0.0, 2.0, 0.6, 0.0, -0.3, -1.0),
        (0.4, -0.2, 0.9, 3.0, 0.1, 0.7),
        (-0.3, 1.7, 0.7, -2.5, -0.1, 0.2),
        (0.6, 0.0, -0.9, 0.6, 0.2, -0.6),
        (0.2, -2.9, 0.5, 1.1, 0.5, -1.1),
        (-0.7, 0.5, 0.3, 0.0, -0.95, 2.8),
    ];
    walls.iter()
        .enumerate()
        .map(|(id, &(p, theta, al, pl, ar, pr))| GridPoint {
            id,
            params: WalkParameters::from_p_theta(p, theta).expect("valid"),
            profile: CoinProfile::step(
                LimitCoin::from_a_phase(al, pl).expect("valid"),
                LimitCoin::from_a_phase(ar, pr).expect("valid"),
            ),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceOutcome {
    pub id: usize,
    pub index: i32,
    pub report: TraceReport,
    pub final_error: f64,
    pub monotone: bool,
}

pub fn trace_suite(points: &[GridPoint], half_width: usize, t_grid: &[f64]) -> Result<Vec<TraceOutcome>> {
    let window = LatticeWindow::open(half_width)?;
    points
        .par_iter()
        .map(|g| {
            let index = witten_index(&g.params, &g.profile).index.unwrap_or(0);
            let report = trace_report(&window, &g.params, &g.profile, t_grid)?;
            let last = report.estimates[report.estimates.len() - 1];
            Ok(TraceOutcome {
                id: g.id,
                index,
                final_error: (last - index as f64).abs(),
                monotone: report.monotone_towards(index as f64),
                report,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// spectrum

#[derive(Debug, Clone, Serialize)]
pub struct BandOutcome {
    pub id: usize,
    /// Largest distance of a real part outside `I_#`.
    pub max_outside: f64,
    pub hausdorff: f64,
    pub modulus_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WallSpectrumOutcome {
    pub id: usize,
    /// Real parts farther than `SPECTRUM_TOL` from `I_L ∪ I_R`.
    pub outliers: Vec<f64>,
    /// `2 (d_+ + d_-)`.
    pub allowed: usize,
    /// Whether `I_L ∪ I_R` stays away from `±1`.
    pub analytic_gap: bool,
    /// Largest `|Re z|` among the non-outliers.
    pub bulk_edge: f64,
    pub modulus_residual: f64,
}

pub fn band_points() -> Vec<GridPoint> {
    [(0.5, 0.0, 0.0, 0.0), (-0.3, 1.0, 0.6, 1.0), (0.7, -2.0, -0.95, 0.4)]
        .iter()
        .enumerate()
        .map(|(id, &(p, theta, a, phase))| GridPoint {
            id,
            params: WalkParameters::from_p_theta(p, theta).expect("valid"),
            profile: CoinProfile::homogeneous(LimitCoin::from_a_phase(a, phase).expect("valid")),
        })
        .collect()
}

pub fn band_suite(points: &[GridPoint], half_width: usize) -> Result<Vec<BandOutcome>> {
    let window = LatticeWindow::periodic(half_width)?;
    points
        .par_iter()
        .map(|g| {
            let sp = sample_spectrum(&window, &g.params, &g.profile)?;
            let band = essential_spectrum(&g.params, &g.profile.left);
            let re = sp.real_parts();
            Ok(BandOutcome {
                id: g.id,
                max_outside: re.iter().fold(0.0, |m: f64, &r| m.max(band.distance(r))),
                hausdorff: hausdorff_to_interval(&re, band.lo, band.hi),
                modulus_residual: sp.modulus_residual,
            })
        })
        .collect()
}

pub fn wall_spectrum_suite(points: &[GridPoint], half_width: usize) -> Result<Vec<WallSpectrumOutcome>> {
    let window = LatticeWindow::periodic(half_width)?;
    points
        .par_iter()
        .map(|g| {
            let sp = sample_spectrum(&window, &g.params, &g.profile)?;
            let il = essential_spectrum(&g.params, &g.profile.left);
            let ir = essential_spectrum(&g.params, &g.profile.right);
            let (dp, dm) = kernel_dimensions(&g.params, &g.profile)?;
            let mut outliers = Vec::new();
            let mut bulk_edge: f64 = 0.0;
            for r in sp.real_parts() {
                if il.distance(r).min(ir.distance(r)) > SPECTRUM_TOL {
                    outliers.push(r);
                } else {
                    bulk_edge = bulk_edge.max(r.abs());
                }
            }
            let edge = |i: &crate::analytic::SpectralInterval| i.lo > -1.0 && i.hi < 1.0;
            Ok(WallSpectrumOutcome {
                id: g.id,
                outliers,
                allowed: 2 * (dp + dm) as usize,
                analytic_gap: edge(&il) && edge(&ir),
                bulk_edge,
                modulus_residual: sp.modulus_residual,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// invariance

pub fn invariance_suite(half_width: usize, trials: usize, seed: u64) -> Result<Vec<InvarianceReport>> {
    let window = LatticeWindow::open(half_width)?;
    [wall_e1(), wall_type_i()]
        .iter()
        .map(|(params, profile)| perturbation_invariance_test(params, profile, trials, seed, &window))
        .collect()
}

/// Grid points where a sign-flip identity fails.
pub fn sign_flip_mismatches(points: &[GridPoint]) -> Result<usize> {
    let mut bad = 0;
    for g in points {
        let Some(index) = witten_index(&g.params, &g.profile).index else { continue };
        let (neg_coin, neg_shift) = sign_flip_identities(&g.params, &g.profile)?;
        if neg_coin != index || neg_shift != -index {
            bad += 1;
        }
    }
    Ok(bad)
}

// ---------------------------------------------------------------------------
// p = 0

#[derive(Debug, Clone, Serialize)]
pub struct ZeroSliceSummary {
    pub fredholm: usize,
    pub nonzero_analytic: usize,
    pub conclusive: usize,
    pub nonzero_numeric: usize,
}

pub fn zero_slice_suite(points: &[GridPoint], half_width: usize) -> Result<ZeroSliceSummary> {
    let outcomes = grid_suite(points, half_width)?;
    let mut s = ZeroSliceSummary { fredholm: 0, nonzero_analytic: 0, conclusive: 0, nonzero_numeric: 0 };
    for o in &outcomes {
        let Some(index) = o.analytic.index else { continue };
        s.fredholm += 1;
        if index != 0 || o.analytic.d_plus != o.analytic.d_minus {
            s.nonzero_analytic += 1;
        }
        if o.conclusive {
            s.conclusive += 1;
            if o.svd_index() != 0 {
                s.nonzero_numeric += 1;
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::oracle_grid;

    #[test]
    fn trace_points_are_fredholm_type_iii() {
        let pts = trace_points();
        assert_eq!(pts.len(), 10);
        let mut seen = std::collections::HashSet::new();
        for g in &pts {
            let r = witten_index(&g.params, &g.profile);
            assert!(r.fredholm && !r.near_boundary);
            assert_eq!(r.coin_type, CoinType::III);
            seen.insert(r.index.unwrap());
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn small_suites_run() {
        assert!(algebra_suite(3, 8, 1, None).unwrap().max_residual < 1e-11);
        assert!(algebra_suite(3, 8, 1, Some(Fault::BetaSign)).unwrap().max_residual > 1e-3);
        let e = eigen_suite(50, 2).unwrap();
        assert!(e.max_solver_error < 1e-10 && e.max_modulus_error < 1e-12);
        assert!(e.min_separation_ratio >= 1.0 - 1e-12);
        assert!(sandwich_suite(20, 3).unwrap() < 1e-11);
        assert_eq!(sign_flip_mismatches(&oracle_grid(0)).unwrap(), 0);
    }

    #[test]
    fn small_grid_slice_is_consistent() {
        let pts: Vec<_> = oracle_grid(4).into_iter().filter(|g| g.id % 37 == 0).collect();
        let out = grid_suite(&pts, 120).unwrap();
        let s = summarize_grid(&out);
        assert_eq!(s.table_mismatches, 0);
        assert_eq!(s.index_mismatches, 0);
        assert!(s.min_bound_overlap > 0.999 || s.bound_states == 0);
    }
}
