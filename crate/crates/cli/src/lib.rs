//! Command-line front end for `ssqw-core`.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use ssqw_core::analytic::{witten_index_with_band, NEAR_BOUNDARY_BAND};
use ssqw_core::error::Error as CoreError;
use ssqw_core::lattice::{Boundary, Fault, LatticeWindow, MAX_HALF_WIDTH};
use ssqw_core::model::{classify_coin, load_setup, CoinType, WalkParameters, WalkSetup};
use ssqw_core::solver::construct_bound_state;
use ssqw_core::solver::spectrum::sample_spectrum;
use ssqw_core::solver::trace::{trace_report, DEFAULT_T_GRID};
use ssqw_core::{Sign, C64};

mod verify;

pub use verify::{run_checks, Check, VerifyConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Core(CoreError::Linalg(_) | CoreError::Consistency(_)) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ssqw", version, about = "Witten index, spectra and bound states of split-step quantum walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    BetaSign,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// JSON profile document.
    #[arg(long)]
    pub profile: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to a file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Half width N; the window holds sites -N..=N.
    #[arg(long, default_value_t = 200)]
    pub window: usize,
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fredholm verdict, kernel dimensions and index from closed forms.
    Index {
        #[command(flatten)]
        profile: ProfileArgs,
        /// Width of the band around |p| = |a| flagged as near the boundary.
        #[arg(long, default_value_t = NEAR_BOUNDARY_BAND)]
        band: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Index table over a grid of p values, keeping the profile's coins.
    PhaseDiagram {
        #[command(flatten)]
        profile: ProfileArgs,
        /// Grid as START:STOP:STEP, inclusive of STOP.
        #[arg(long, allow_hyphen_values = true)]
        p_grid: String,
        #[arg(long, default_value_t = NEAR_BOUNDARY_BAND)]
        band: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the property suite and report every check.
    Verify {
        /// Half width for the kernel, invariance and spectrum checks.
        #[arg(long, default_value_t = 200)]
        window: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
        /// Deliberately corrupt the lattice operators (mutation testing).
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Eigenvalues of the truncated evolution on a periodic window.
    Spectrum {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Heat-kernel estimates of the index over a grid of t.
    Trace {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Comma separated positive values.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_T_GRID)]
        t_grid: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Amplitudes of the square-summable kernel vector of Q_eps±.
    BoundState {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, value_enum, default_value_t = SignArg::Plus)]
        sign: SignArg,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn read_setup(args: &ProfileArgs) -> Result<WalkSetup> {
    let text = fs::read_to_string(&args.profile)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.profile.display())))?;
    Ok(load_setup(&text)?)
}

fn make_window(args: &WindowArgs, default: Boundary) -> Result<LatticeWindow> {
    if args.window > MAX_HALF_WIDTH {
        return Err(CliError::Input(format!("window {} exceeds {MAX_HALF_WIDTH}", args.window)));
    }
    let boundary = match args.boundary {
        None => default,
        Some(BoundaryArg::Periodic) => Boundary::Periodic,
        Some(BoundaryArg::Open) => Boundary::Open,
    };
    Ok(LatticeWindow::new(args.window, boundary)?)
}

/// JSON text with sorted keys, so re-serializing a parsed copy reproduces it.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report serializes");
    serde_json::to_string(&v).expect("value serializes")
}

fn emit(out: &OutArgs, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Parses `START:STOP:STEP`; points are rounded to `1e-12`.
pub fn parse_p_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Input(format!("p-grid must be START:STOP:STEP, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|s| s.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
    let (start, stop, step) = (v[0], v[1], v[2]);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(CliError::Input(format!("p-grid needs START <= STOP and STEP > 0, got {spec:?}")));
    }
    if start <= -1.0 || stop >= 1.0 {
        return Err(CliError::Input(format!("p-grid must lie inside (-1, 1), got {spec:?}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // adding 0.0 turns a rounded -0 into 0
    Ok((0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12 + 0.0).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagramRow {
    pub p: f64,
    pub fredholm: bool,
    pub d_plus: Option<u32>,
    pub d_minus: Option<u32>,
    pub index: Option<i32>,
    pub near_boundary: bool,
}

pub fn phase_diagram(setup: &WalkSetup, grid: &[f64], band: f64) -> Result<Vec<PhaseDiagramRow>> {
    grid.par_iter()
        .map(|&p| {
            let params = WalkParameters::from_p_theta(p, setup.params.theta)?;
            let r = witten_index_with_band(&params, &setup.profile, band);
            Ok(PhaseDiagramRow {
                p,
                fredholm: r.fredholm,
                d_plus: r.d_plus,
                d_minus: r.d_minus,
                index: r.index,
                near_boundary: r.near_boundary,
            })
        })
        .collect()
}

fn na<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

#[derive(Serialize)]
struct BoundStateDoc {
    sign: &'static str,
    coin_type: CoinType,
    branch: Option<usize>,
    decay_rates: (f64, f64),
    fitted_decay_rates: (f64, f64),
    /// `[x, re, im]` per site.
    samples: Vec<(i64, f64, f64)>,
}

fn bound_state_doc(setup: &WalkSetup, window: &LatticeWindow, sign: Sign) -> Result<Option<BoundStateDoc>> {
    let coin_type = classify_coin(&setup.profile);
    if coin_type == CoinType::I {
        let (dp, dm) = ssqw_core::analytic::kernel_dimensions(&setup.params, &setup.profile)?;
        if (if sign == Sign::Plus { dp } else { dm }) == 0 {
            return Ok(None);
        }
        let samples = window.sites().map(|x| (x, if x == 0 { 1.0 } else { 0.0 }, 0.0)).collect();
        return Ok(Some(BoundStateDoc {
            sign: sign.symbol(),
            coin_type,
            branch: None,
            decay_rates: (0.0, 0.0),
            fitted_decay_rates: (0.0, 0.0),
            samples,
        }));
    }
    Ok(construct_bound_state(&setup.params, &setup.profile, sign, window)?.map(|st| BoundStateDoc {
        sign: sign.symbol(),
        coin_type,
        branch: Some(st.branch),
        decay_rates: st.decay_rates,
        fitted_decay_rates: st.fitted_decay_rates(),
        samples: st.samples.iter().map(|&(x, z): &(i64, C64)| (x, z.re, z.im)).collect(),
    }))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Index { profile, band, out } => {
            let setup = read_setup(&profile)?;
            let r = witten_index_with_band(&setup.params, &setup.profile, band);
            match out.format.unwrap_or(Format::Json) {
                Format::Json => emit(&out, &(to_json(&r) + "\n")),
                Format::Csv => emit(
                    &out,
                    &csv_text(
                        &["fredholm", "d_plus", "d_minus", "index", "coin_type", "near_boundary"],
                        [vec![
                            r.fredholm.to_string(),
                            na(r.d_plus),
                            na(r.d_minus),
                            na(r.index),
                            r.coin_type.to_string(),
                            r.near_boundary.to_string(),
                        ]],
                    )?,
                ),
            }
        }
        Command::PhaseDiagram { profile, p_grid, band, out } => {
            let setup = read_setup(&profile)?;
            let grid = parse_p_grid(&p_grid)?;
            let rows = phase_diagram(&setup, &grid, band)?;
            match out.format.unwrap_or(Format::Csv) {
                Format::Json => emit(&out, &(to_json(&rows) + "\n")),
                Format::Csv => emit(
                    &out,
                    &csv_text(
                        &["p", "fredholm", "d_plus", "d_minus", "index", "near_boundary"],
                        rows.iter().map(|r| {
                            vec![
                                r.p.to_string(),
                                r.fredholm.to_string(),
                                na(r.d_plus),
                                na(r.d_minus),
                                na(r.index),
                                r.near_boundary.to_string(),
                            ]
                        }),
                    )?,
                ),
            }
        }
        Command::Verify { window, seed, out, inject_fault } => {
            let config = VerifyConfig {
                window,
                seed,
                fault: inject_fault.map(|FaultArg::BetaSign| Fault::BetaSign),
            };
            let checks = run_checks(&config)?;
            match out.format.unwrap_or(Format::Csv) {
                Format::Json => emit(&out, &(to_json(&checks) + "\n"))?,
                Format::Csv => emit(
                    &out,
                    &csv_text(
                        &["check", "pass", "detail"],
                        checks.iter().map(|c| vec![c.name.to_string(), c.pass.to_string(), c.detail.clone()]),
                    )?,
                )?,
            }
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verification(format!("failed checks: {}", failed.join(", "))))
            }
        }
        Command::Spectrum { profile, window, out } => {
            let setup = read_setup(&profile)?;
            let w = make_window(&window, Boundary::Periodic)?;
            let sp = sample_spectrum(&w, &setup.params, &setup.profile)?;
            match out.format.unwrap_or(Format::Csv) {
                Format::Json => emit(&out, &(to_json(&sp) + "\n")),
                Format::Csv => emit(
                    &out,
                    &csv_text(&["re", "im"], sp.eigenvalues.iter().map(|z| vec![z.re.to_string(), z.im.to_string()]))?,
                ),
            }
        }
        Command::Trace { profile, window, t_grid, out } => {
            let setup = read_setup(&profile)?;
            let w = make_window(&window, Boundary::Open)?;
            let report = trace_report(&w, &setup.params, &setup.profile, &t_grid)?;
            match out.format.unwrap_or(Format::Csv) {
                Format::Json => emit(&out, &(to_json(&report) + "\n")),
                Format::Csv => emit(
                    &out,
                    &csv_text(
                        &["t", "estimate"],
                        report.t_grid.iter().zip(&report.estimates).map(|(t, e)| vec![t.to_string(), e.to_string()]),
                    )?,
                ),
            }
        }
        Command::BoundState { profile, window, sign, out } => {
            let setup = read_setup(&profile)?;
            let w = make_window(&window, Boundary::Open)?;
            let sign = match sign {
                SignArg::Plus => Sign::Plus,
                SignArg::Minus => Sign::Minus,
            };
            let doc = bound_state_doc(&setup, &w, sign)?;
            if doc.is_none() {
                eprintln!("no square-summable kernel vector for sign {}", sign.symbol());
            }
            match out.format.unwrap_or(Format::Csv) {
                Format::Json => emit(&out, &(to_json(&doc) + "\n")),
                Format::Csv => {
                    if let Some(d) = &doc {
                        eprintln!("decay rates: left {} right {}", d.fitted_decay_rates.0, d.fitted_decay_rates.1);
                    }
                    let rows = doc.iter().flat_map(|d| d.samples.iter()).map(|&(x, re, im)| vec![x.to_string(), re.to_string(), im.to_string()]);
                    emit(&out, &csv_text(&["x", "re", "im"], rows)?)
                }
            }
        }
    }
}

/// Caps the worker pool from `SSQW_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SSQW_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Input(format!("SSQW_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(CliError::Input("SSQW_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(())
}
