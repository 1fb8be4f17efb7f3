//! Finite-window matrices of the shift, coin, evolution, supercharge, the
//! diagonalizer `eps` and the blocks `Q_eps±`, with an algebra checker.
//!
//! Two-component operators use component-major ordering: index
//! `c * (2N + 1) + (x + N)` for component `c` at site `x`.

use std::io::Write;

use ndarray::{s, Array2};
use serde::Serialize;

use crate::linalg::matmul;
use crate::error::{Error, Result};
use crate::model::{CoinEntry, CoinProfile, WalkParameters};
use crate::{Sign, C64};

/// Largest half-width stored as a dense matrix.
pub const MAX_HALF_WIDTH: usize = 1024;

/// Residuals above this are reported as failures.
pub const ALGEBRA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

/// Sites `[-N, N]` with periodic or open ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeWindow {
    pub half_width: usize,
    pub boundary: Boundary,
}

impl LatticeWindow {
    pub fn new(half_width: usize, boundary: Boundary) -> Result<Self> {
        if half_width == 0 || half_width > MAX_HALF_WIDTH {
            return Err(Error::Domain(format!(
                "window half-width must lie in 1..={MAX_HALF_WIDTH}, got {half_width}"
            )));
        }
        Ok(Self { half_width, boundary })
    }

    pub fn periodic(half_width: usize) -> Result<Self> {
        Self::new(half_width, Boundary::Periodic)
    }

    pub fn open(half_width: usize) -> Result<Self> {
        Self::new(half_width, Boundary::Open)
    }

    /// Number of sites `2N + 1`.
    pub fn len(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn site(&self, i: usize) -> i64 {
        i as i64 - self.half_width as i64
    }

    pub fn index(&self, x: i64) -> Option<usize> {
        let i = x + self.half_width as i64;
        (0..self.len() as i64).contains(&i).then_some(i as usize)
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        let n = self.half_width as i64;
        -n..=n
    }

    /// Site following `x`: wraps `N + 1` to `-N` on periodic windows.
    fn next_site(&self, x: i64) -> i64 {
        let n = self.half_width as i64;
        if x == n && self.boundary == Boundary::Periodic {
            -n
        } else {
            x + 1
        }
    }

    /// Whether site `x` lies in the middle half `|x| <= N/2`.
    pub fn in_middle(&self, x: i64) -> bool {
        x.unsigned_abs() as usize <= self.half_width / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    Gamma,
    Coin,
    Evolution,
    Supercharge,
    Epsilon,
    QPlus,
    QMinus,
    HPlus,
    HMinus,
}

impl Role {
    pub fn q(sign: Sign) -> Self {
        match sign {
            Sign::Plus => Role::QPlus,
            Sign::Minus => Role::QMinus,
        }
    }
}

/// `Raw` keeps the overall factor `1/(-2i)`; `Rescaled` drops it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    Raw,
    Rescaled,
}

/// Deliberate defects for mutation testing of the checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    BetaSign,
}

#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub role: Role,
    pub window: LatticeWindow,
    pub matrix: Array2<C64>,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Dense CSV dump: a header row, then one row per matrix row with each
    /// entry as two adjacent `re,im` columns.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.matrix.ncols();
        let header: Vec<String> = (0..n).flat_map(|j| [format!("re{j}"), format!("im{j}")]).collect();
        writeln!(out, "{}", header.join(","))?;
        for row in self.matrix.rows() {
            let cells: Vec<String> = row.iter().map(|z| format!("{},{}", z.re, z.im)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

pub fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

/// `alpha_±(x) = (1 ± p) e^{i theta} b(x)`.
pub fn alpha(params: &WalkParameters, b: C64, sign: Sign) -> C64 {
    (1.0 + sign.value() * params.p) * C64::from_polar(1.0, params.theta) * b
}

/// `beta(x) = |q| (a2(x+1) - a1(x))`.
pub fn beta(params: &WalkParameters, here: &CoinEntry, next: &CoinEntry) -> f64 {
    params.q_abs() * (next.a2 - here.a1)
}

/// The left shift `(L psi)(x) = psi(x + 1)`.
fn shift(window: &LatticeWindow) -> Array2<C64> {
    let n = window.len();
    let mut l = Array2::zeros((n, n));
    for i in 0..n - 1 {
        l[[i, i + 1]] = C64::from(1.0);
    }
    if window.boundary == Boundary::Periodic {
        l[[n - 1, 0]] = C64::from(1.0);
    }
    l
}

fn blocks(tl: &Array2<C64>, tr: &Array2<C64>, bl: &Array2<C64>, br: &Array2<C64>) -> Array2<C64> {
    let n = tl.nrows();
    let mut m = Array2::zeros((2 * n, 2 * n));
    m.slice_mut(s![..n, ..n]).assign(tl);
    m.slice_mut(s![..n, n..]).assign(tr);
    m.slice_mut(s![n.., ..n]).assign(bl);
    m.slice_mut(s![n.., n..]).assign(br);
    m
}

pub fn build_gamma(window: &LatticeWindow, params: &WalkParameters) -> TruncatedOperator {
    let n = window.len();
    let l = shift(window);
    let id = identity(n);
    let matrix = blocks(
        &id.mapv(|z| z * params.p),
        &l.mapv(|z| z * params.q),
        &adjoint(&l).mapv(|z| z * params.q.conj()),
        &id.mapv(|z| -z * params.p),
    );
    TruncatedOperator { role: Role::Gamma, window: *window, matrix }
}

pub fn build_coin(window: &LatticeWindow, profile: &CoinProfile) -> TruncatedOperator {
    let n = window.len();
    let mut m = Array2::zeros((2 * n, 2 * n));
    for (i, x) in window.sites().enumerate() {
        let c = profile.coin_at(x);
        m[[i, i]] = C64::from(c.a1);
        m[[i, n + i]] = c.b.conj();
        m[[n + i, i]] = c.b;
        m[[n + i, n + i]] = C64::from(c.a2);
    }
    TruncatedOperator { role: Role::Coin, window: *window, matrix: m }
}

/// `U = Gamma C` assembled entry by entry from
/// `[[p a1 + q L b, p conj(b) + q L a2], [conj(q) L* a1 - p b, conj(q) L* conj(b) - p a2]]`.
pub fn build_evolution(window: &LatticeWindow, params: &WalkParameters, profile: &CoinProfile) -> TruncatedOperator {
    let n = window.len();
    let (p, q) = (params.p, params.q);
    let mut m = Array2::zeros((2 * n, 2 * n));
    let coins: Vec<CoinEntry> = window.sites().map(|x| profile.coin_at(x)).collect();
    let periodic = window.boundary == Boundary::Periodic;
    for i in 0..n {
        let c = coins[i];
        m[[i, i]] += p * c.a1;
        m[[i, n + i]] += p * c.b.conj();
        m[[n + i, i]] -= p * c.b;
        m[[n + i, n + i]] -= p * c.a2;
        // L couples row i to column i + 1, L* couples row i + 1 to column i
        let j = if i + 1 < n {
            Some(i + 1)
        } else if periodic {
            Some(0)
        } else {
            None
        };
        if let Some(j) = j {
            let cj = coins[j];
            m[[i, j]] += q * cj.b;
            m[[i, n + j]] += q * cj.a2;
            m[[n + j, i]] += q.conj() * c.a1;
            m[[n + j, n + i]] += q.conj() * c.b.conj();
        }
    }
    TruncatedOperator { role: Role::Evolution, window: *window, matrix: m }
}

/// `Q = [Gamma, C] / 2i`.
pub fn build_supercharge(window: &LatticeWindow, params: &WalkParameters, profile: &CoinProfile) -> TruncatedOperator {
    let g = build_gamma(window, params).matrix;
    let c = build_coin(window, profile).matrix;
    let comm = matmul(&g, &c) - matmul(&c, &g);
    let matrix = comm.mapv(|z| z / C64::new(0.0, 2.0));
    TruncatedOperator { role: Role::Supercharge, window: *window, matrix }
}

pub fn build_epsilon(window: &LatticeWindow, params: &WalkParameters) -> Result<TruncatedOperator> {
    if window.boundary != Boundary::Periodic {
        return Err(Error::Unsupported("eps needs a periodic window".into()));
    }
    let n = window.len();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let sp = (1.0 + params.p).sqrt() * r;
    let sm = (1.0 - params.p).sqrt() * r;
    let phase = C64::from_polar(1.0, -params.theta);
    let ls = adjoint(&shift(window)).mapv(|z| z * phase);
    let id = identity(n);
    let matrix = blocks(&id.mapv(|z| z * sp), &id.mapv(|z| -z * sm), &ls.mapv(|z| z * sm), &ls.mapv(|z| z * sp));
    Ok(TruncatedOperator { role: Role::Epsilon, window: *window, matrix })
}

pub fn build_q_epsilon(
    window: &LatticeWindow,
    params: &WalkParameters,
    profile: &CoinProfile,
    sign: Sign,
    scaling: Scaling,
) -> TruncatedOperator {
    build_q_epsilon_with(window, params, profile, sign, scaling, None)
}

pub fn build_q_epsilon_with(
    window: &LatticeWindow,
    params: &WalkParameters,
    profile: &CoinProfile,
    sign: Sign,
    scaling: Scaling,
    fault: Option<Fault>,
) -> TruncatedOperator {
    let n = window.len();
    let s = sign.value();
    let diag_sign = if fault == Some(Fault::BetaSign) { -s } else { s };
    let mut m = Array2::zeros((n, n));
    for (i, x) in window.sites().enumerate() {
        let here = profile.coin_at(x);
        let xn = window.next_site(x);
        let next = profile.coin_at(xn);
        m[[i, i]] = C64::from(diag_sign * beta(params, &here, &next));
        let sub = -alpha(params, here.b, sign.flip()).conj();
        let sup = alpha(params, next.b, sign);
        match window.boundary {
            Boundary::Open => {
                if i + 1 < n {
                    m[[i, i + 1]] = sup;
                }
                if i > 0 {
                    m[[i, i - 1]] = sub;
                }
            }
            Boundary::Periodic => {
                m[[i, (i + 1) % n]] += sup;
                m[[i, (i + n - 1) % n]] += sub;
            }
        }
    }
    if scaling == Scaling::Raw {
        m.mapv_inplace(|z| z / C64::new(0.0, -2.0));
    }
    TruncatedOperator { role: Role::q(sign), window: *window, matrix: m }
}

/// `H_eps± = Q_eps±^* Q_eps±` built from the rescaled blocks.
pub fn build_h_epsilon(window: &LatticeWindow, params: &WalkParameters, profile: &CoinProfile, sign: Sign) -> TruncatedOperator {
    let q = build_q_epsilon(window, params, profile, sign, Scaling::Rescaled).matrix;
    let role = match sign {
        Sign::Plus => Role::HPlus,
        Sign::Minus => Role::HMinus,
    };
    TruncatedOperator { role, window: *window, matrix: matmul(&adjoint(&q), &q) }
}

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub name: &'static str,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraReport {
    pub residuals: Vec<Residual>,
}

impl AlgebraReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.pass)
    }

    pub fn max(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.value))
    }
}

pub fn verify_algebra(window: &LatticeWindow, params: &WalkParameters, profile: &CoinProfile) -> Result<AlgebraReport> {
    verify_algebra_with(window, params, profile, None)
}

pub fn verify_algebra_with(
    window: &LatticeWindow,
    params: &WalkParameters,
    profile: &CoinProfile,
    fault: Option<Fault>,
) -> Result<AlgebraReport> {
    if window.boundary != Boundary::Periodic {
        return Err(Error::Unsupported("algebra checks need a periodic window".into()));
    }
    let n = window.len();
    let id2 = identity(2 * n);
    let g = build_gamma(window, params).matrix;
    let c = build_coin(window, profile).matrix;
    let u = build_evolution(window, params, profile).matrix;
    let q = build_supercharge(window, params, profile).matrix;
    let e = build_epsilon(window, params)?.matrix;
    let ed = adjoint(&e);

    let mut out = Vec::new();
    let mut push = |name: &'static str, value: f64| {
        out.push(Residual { name, value, pass: value <= ALGEBRA_TOL });
    };
    push("gamma^2 - I", max_abs(&(g.dot(&g) - &id2)));
    push("C^2 - I", max_abs(&(c.dot(&c) - &id2)));
    push("U - gamma C", max_abs(&(&u - matmul(&g, &c))));
    let two_i = C64::new(0.0, 2.0);
    push("2iQ - (U - U*)", max_abs(&(q.mapv(|z| z * two_i) - (&u - &adjoint(&u)))));
    push("Q gamma + gamma Q", max_abs(&(q.dot(&g) + g.dot(&q))));
    push("eps* eps - I", max_abs(&(ed.dot(&e) - &id2)));
    let mut diag = Array2::<C64>::zeros((2 * n, 2 * n));
    for i in 0..n {
        diag[[i, i]] = C64::from(1.0);
        diag[[n + i, n + i]] = C64::from(-1.0);
    }
    push("eps* gamma eps - diag(1,-1)", max_abs(&(ed.dot(&g).dot(&e) - diag)));
    let qe = ed.dot(&q).dot(&e);
    let diag_blocks = max_abs(&qe.slice(s![..n, ..n]).to_owned()).max(max_abs(&qe.slice(s![n.., n..]).to_owned()));
    push("diagonal blocks of eps* Q eps", diag_blocks);
    let qp = build_q_epsilon_with(window, params, profile, Sign::Plus, Scaling::Raw, fault).matrix;
    let qm = build_q_epsilon_with(window, params, profile, Sign::Minus, Scaling::Raw, fault).matrix;
    push("lower block of eps* Q eps - Q_eps+", max_abs(&(&qe.slice(s![n.., ..n]) - &qp)));
    push("upper block of eps* Q eps - Q_eps-", max_abs(&(&qe.slice(s![..n, n..]) - &qm)));
    Ok(AlgebraReport { residuals: out })
}
