//! The `verify` command: the property suite at configurable size.

use serde::Serialize;

use ssqw_core::grid::{oracle_grid, zero_p_slice};
use ssqw_core::lattice::{Fault, LatticeWindow, MAX_HALF_WIDTH};
use ssqw_core::solver::trace::{trace_report, DEFAULT_T_GRID};
use ssqw_core::suite::*;

use crate::{CliError, Result};

/// Smallest open window used for the trace estimate.
const TRACE_MIN_WINDOW: usize = 120;
/// Bound states with more amplitude than this at the window ends are
/// truncated, so their residual says nothing about the construction.
const RESOLVED_EDGE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub window: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

pub fn run_checks(config: &VerifyConfig) -> Result<Vec<Check>> {
    let n = config.window;
    if !(8..=MAX_HALF_WIDTH).contains(&n) {
        return Err(CliError::Input(format!("window must lie in 8..={MAX_HALF_WIDTH}, got {n}")));
    }
    let seed = config.seed;
    let mut out = Vec::new();

    let a = algebra_suite(20, n.min(64), seed, config.fault)?;
    out.push(check("algebra", a.max_residual < 1e-11, format!("max residual {:.2e} ({})", a.max_residual, a.worst_check)));

    let e = eigen_suite(200, seed)?;
    out.push(check(
        "eigenvalues",
        e.max_solver_error < 1e-10 && e.max_modulus_error < 1e-12 && e.min_separation_ratio >= 1.0 - 1e-12,
        format!("solver {:.2e}, modulus {:.2e}", e.max_solver_error, e.max_modulus_error),
    ));

    let s = sandwich_suite(100, seed)?;
    out.push(check("sandwich", s < 1e-11, format!("max residual {s:.2e}")));

    let grid = oracle_grid(seed);
    let flips = sign_flip_mismatches(&grid)?;
    out.push(check("sign flips", flips == 0, format!("{flips} mismatches over {} points", grid.len())));

    let outcomes = grid_suite(&grid, n)?;
    let g = summarize_grid(&outcomes);
    out.push(check(
        "index oracle",
        g.table_mismatches == 0 && g.index_mismatches == 0,
        format!(
            "{} Fredholm, {} conclusive, {} table mismatches, {} index mismatches",
            g.fredholm, g.conclusive, g.table_mismatches, g.index_mismatches
        ),
    ));
    let resolved: Vec<&BoundCheck> =
        outcomes.iter().flat_map(|o| &o.bound_states).filter(|b| b.edge < RESOLVED_EDGE).collect();
    let residual = resolved.iter().fold(0.0f64, |m, b| m.max(b.residual));
    out.push(check(
        "bound states",
        residual < 1e-8 && (g.bound_states == 0 || g.min_bound_overlap > 0.999),
        format!(
            "{} states ({} resolved), max residual {residual:.2e}, min overlap {:.6}",
            g.bound_states,
            resolved.len(),
            g.min_bound_overlap
        ),
    ));

    let z = zero_slice_suite(&zero_p_slice(seed), n)?;
    out.push(check(
        "zero p",
        z.nonzero_analytic == 0 && z.nonzero_numeric == 0,
        format!("{} Fredholm, {} conclusive, {} nonzero", z.fredholm, z.conclusive, z.nonzero_analytic + z.nonzero_numeric),
    ));

    let (params, profile) = wall_e1();
    let tw = LatticeWindow::open(n.max(TRACE_MIN_WINDOW))?;
    let t = trace_report(&tw, &params, &profile, &DEFAULT_T_GRID)?;
    let last = t.estimates[t.estimates.len() - 1];
    out.push(check(
        "trace",
        (last - 1.0).abs() < 0.1 && t.monotone_towards(1.0),
        format!("estimates {:?}", t.estimates),
    ));

    let bands = band_suite(&band_points(), n)?;
    let outside = bands.iter().fold(0.0f64, |m, b| m.max(b.max_outside));
    let hausdorff = bands.iter().fold(0.0f64, |m, b| m.max(b.hausdorff));
    out.push(check(
        "spectrum",
        outside <= 1e-6 && hausdorff <= 10.0 / n as f64,
        format!("outside {outside:.2e}, Hausdorff {hausdorff:.2e}"),
    ));

    let inv = invariance_suite(n, 20, seed)?;
    out.push(check(
        "invariance",
        inv.iter().all(|r| r.pass),
        format!("conclusive trials {:?}", inv.iter().map(|r| r.conclusive_trials()).collect::<Vec<_>>()),
    ));
    Ok(out)
}
