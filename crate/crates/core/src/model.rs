//! Walk parameters, coin entries and profiles, and the coin-type table.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Site};
use crate::C64;

/// Absolute tolerance for every normalization constraint.
pub const TOL: f64 = 1e-12;

/// Shift data `(p, q, theta)` with `p^2 + |q|^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParameters {
    pub p: f64,
    pub q: C64,
    pub theta: f64,
}

impl WalkParameters {
    pub fn q_abs(&self) -> f64 {
        self.q.norm()
    }

    /// `q = sqrt(1 - p^2) e^{i theta}`.
    pub fn from_p_theta(p: f64, theta: f64) -> Result<Self> {
        if !(p.abs() < 1.0) {
            return Err(Error::ZeroQ);
        }
        validate_parameters(p, C64::from_polar((1.0 - p * p).sqrt(), theta))
    }

    /// Parameters of `-Gamma`: `p -> -p`, `q -> -q`.
    pub fn negated(&self) -> Self {
        let q = -self.q;
        Self { p: -self.p, q, theta: principal_arg(q) }
    }
}

fn principal_arg(z: C64) -> f64 {
    let t = z.arg();
    // atan2 returns -pi for (-x, -0.0); fold onto the (-pi, pi] branch
    if t <= -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

pub fn validate_parameters(p: f64, q: C64) -> Result<WalkParameters> {
    if !p.is_finite() || !q.re.is_finite() || !q.im.is_finite() {
        return Err(Error::Domain("non-finite walk parameter".into()));
    }
    let norm = p * p + q.norm_sqr();
    if (norm - 1.0).abs() > TOL {
        return Err(Error::Normalization(norm));
    }
    if q.norm() < TOL {
        return Err(Error::ZeroQ);
    }
    Ok(WalkParameters { p, q, theta: principal_arg(q) })
}

/// One site's coin `[[a1, conj(b)], [b, a2]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinEntry {
    pub a1: f64,
    pub a2: f64,
    pub b: C64,
}

impl CoinEntry {
    pub fn new(a1: f64, a2: f64, b: C64) -> std::result::Result<Self, String> {
        if !a1.is_finite() || !a2.is_finite() || !b.re.is_finite() || !b.im.is_finite() {
            return Err("non-finite entry".into());
        }
        let b2 = b.norm_sqr();
        for (name, a) in [("a1", a1), ("a2", a2)] {
            let s = a * a + b2;
            if (s - 1.0).abs() > TOL {
                return Err(format!("{name}^2 + |b|^2 = {s} (must be 1)"));
            }
        }
        let c = (b * (a1 + a2)).norm();
        if c > TOL {
            return Err(format!("|b (a1 + a2)| = {c} (must be 0)"));
        }
        Ok(Self { a1, a2, b })
    }

    /// Nontrivial involution with `a1 = a`, `a2 = -a`.
    pub fn anisotropic(a: f64, b: C64) -> std::result::Result<Self, String> {
        Self::new(a, -a, b)
    }

    /// `a1 = a2 = s` with `s = ±1`.
    pub fn identity(s: f64) -> Self {
        Self { a1: s.signum(), a2: s.signum(), b: C64::new(0.0, 0.0) }
    }

    pub fn is_trivial(&self) -> bool {
        self.b.norm() < TOL && (self.a1 - self.a2).abs() < TOL
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [[C64::from(self.a1), self.b.conj()], [self.b, C64::from(self.a2)]]
    }

    pub fn negated(&self) -> Self {
        Self { a1: -self.a1, a2: -self.a2, b: -self.b }
    }
}

/// A limit coin `C(L)` or `C(R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCoin {
    pub entry: CoinEntry,
    pub trivial: bool,
}

impl LimitCoin {
    pub fn new(entry: CoinEntry) -> Self {
        Self { entry, trivial: entry.is_trivial() }
    }

    pub fn anisotropic(a: f64, b: C64) -> std::result::Result<Self, String> {
        CoinEntry::anisotropic(a, b).map(Self::new)
    }

    /// Shorthand for `a = ±sqrt(1 - |b|^2)` with phase on `b`.
    pub fn from_a_phase(a: f64, phase: f64) -> std::result::Result<Self, String> {
        let r = (1.0 - a * a).max(0.0).sqrt();
        Self::anisotropic(a, C64::from_polar(r, phase))
    }

    /// `a(#)`, meaningful for nontrivial limits.
    pub fn a(&self) -> f64 {
        self.entry.a1
    }

    pub fn b(&self) -> C64 {
        self.entry.b
    }

    pub fn b_is_zero(&self) -> bool {
        self.entry.b.norm() < TOL
    }

    pub fn negated(&self) -> Self {
        Self::new(self.entry.negated())
    }
}

/// Two-sided coin profile: `C(L)` on `x <= 0`, `C(R)` on `x >= 1`, plus
/// finitely many site overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinProfile {
    pub left: LimitCoin,
    pub right: LimitCoin,
    pub overrides: BTreeMap<i64, CoinEntry>,
}

impl CoinProfile {
    pub fn step(left: LimitCoin, right: LimitCoin) -> Self {
        Self { left, right, overrides: BTreeMap::new() }
    }

    pub fn homogeneous(coin: LimitCoin) -> Self {
        Self::step(coin, coin)
    }

    pub fn with_override(mut self, x: i64, entry: CoinEntry) -> Self {
        self.overrides.insert(x, entry);
        self
    }

    pub fn is_canonical_step(&self) -> bool {
        self.overrides.is_empty()
    }

    pub fn step_reduction(&self) -> Self {
        Self::step(self.left, self.right)
    }

    pub fn coin_at(&self, x: i64) -> CoinEntry {
        match self.overrides.get(&x) {
            Some(c) => *c,
            None if x <= 0 => self.left.entry,
            None => self.right.entry,
        }
    }

    /// Profile of `-C`.
    pub fn negated(&self) -> Self {
        Self {
            left: self.left.negated(),
            right: self.right.negated(),
            overrides: self.overrides.iter().map(|(&x, c)| (x, c.negated())).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoinType {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
    #[serde(rename = "II'")]
    IIprime,
    #[serde(rename = "III")]
    III,
    #[serde(rename = "trivial-limit")]
    TrivialLimit,
}

impl fmt::Display for CoinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoinType::I => "I",
            CoinType::II => "II",
            CoinType::IIprime => "II'",
            CoinType::III => "III",
            CoinType::TrivialLimit => "trivial-limit",
        })
    }
}

pub fn classify_coin(profile: &CoinProfile) -> CoinType {
    if profile.left.trivial || profile.right.trivial {
        return CoinType::TrivialLimit;
    }
    match (profile.left.b_is_zero(), profile.right.b_is_zero()) {
        (true, true) => CoinType::I,
        (true, false) => CoinType::II,
        (false, true) => CoinType::IIprime,
        (false, false) => CoinType::III,
    }
}

/// Fredholm verdict, kernel dimensions and Witten index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexReport {
    pub fredholm: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_plus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_minus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<i32>,
    pub coin_type: CoinType,
    pub near_boundary: bool,
}

// ---------------------------------------------------------------------------
// profile documents

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitDoc {
    a: Option<f64>,
    a1: Option<f64>,
    a2: Option<f64>,
    b: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverrideDoc {
    x: i64,
    a1: f64,
    a2: f64,
    b: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    p: f64,
    theta: Option<f64>,
    q: Option<[f64; 2]>,
    left: LimitDoc,
    right: LimitDoc,
    #[serde(default)]
    overrides: Vec<OverrideDoc>,
}

/// A parsed profile document: shift parameters plus coin profile.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSetup {
    pub params: WalkParameters,
    pub profile: CoinProfile,
}

fn limit_from_doc(doc: &LimitDoc, site: Site) -> Result<LimitCoin> {
    let b = C64::new(doc.b[0], doc.b[1]);
    let (a1, a2) = match (doc.a, doc.a1, doc.a2) {
        (Some(a), None, None) => (a, -a),
        (None, Some(a1), Some(a2)) => (a1, a2),
        _ => {
            return Err(Error::Schema(format!(
                "{site}: give either \"a\" or both \"a1\" and \"a2\""
            )))
        }
    };
    CoinEntry::new(a1, a2, b)
        .map(LimitCoin::new)
        .map_err(|detail| Error::Coin { site, detail })
}

/// Parse a JSON profile document into parameters and profile.
pub fn load_setup(document: &str) -> Result<WalkSetup> {
    let doc: ProfileDoc =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    let params = match (doc.q, doc.theta) {
        (Some([re, im]), theta) => {
            let params = validate_parameters(doc.p, C64::new(re, im))?;
            if let Some(t) = theta {
                let d = C64::from_polar(1.0, t) - C64::from_polar(1.0, params.theta);
                if d.norm() > 1e-12 {
                    return Err(Error::Schema(format!(
                        "theta = {t} disagrees with Arg q = {}",
                        params.theta
                    )));
                }
            }
            params
        }
        (None, theta) => WalkParameters::from_p_theta(doc.p, theta.unwrap_or(0.0))?,
    };
    let left = limit_from_doc(&doc.left, Site::Left)?;
    let right = limit_from_doc(&doc.right, Site::Right)?;
    let mut profile = CoinProfile::step(left, right);
    for o in &doc.overrides {
        let site = Site::At(o.x);
        if profile.overrides.contains_key(&o.x) {
            return Err(Error::Coin { site, detail: "duplicate override".into() });
        }
        let entry = CoinEntry::new(o.a1, o.a2, C64::new(o.b[0], o.b[1]))
            .map_err(|detail| Error::Coin { site, detail })?;
        profile.overrides.insert(o.x, entry);
    }
    Ok(WalkSetup { params, profile })
}

pub fn load_profile(document: &str) -> Result<CoinProfile> {
    load_setup(document).map(|s| s.profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn validate_examples() {
        let w = validate_parameters(0.0, c(1.0, 0.0)).unwrap();
        assert_eq!((w.p, w.theta), (0.0, 0.0));
        let w = validate_parameters(0.5, c(0.75f64.sqrt(), 0.0)).unwrap();
        assert_eq!(w.theta, 0.0);
        let e = validate_parameters(0.5, c(0.5, 0.0)).unwrap_err();
        assert!(e.to_string().contains("normalization violated"));
        assert!(validate_parameters(1.0, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn theta_branch_is_principal() {
        let w = validate_parameters(0.0, c(-1.0, -0.0)).unwrap();
        assert_eq!(w.theta, PI);
        let n = WalkParameters::from_p_theta(0.3, 0.0).unwrap().negated();
        assert_eq!(n.theta, PI);
        assert_eq!(n.p, -0.3);
    }

    #[test]
    fn classify_examples() {
        let diag = |a: f64| LimitCoin::anisotropic(a, c(0.0, 0.0)).unwrap();
        let p = CoinProfile::step(diag(1.0), diag(-1.0));
        assert_eq!(classify_coin(&p), CoinType::I);
        let p = CoinProfile::step(diag(1.0), LimitCoin::anisotropic(0.0, c(1.0, 0.0)).unwrap());
        assert_eq!(classify_coin(&p), CoinType::II);
        let p = CoinProfile::step(LimitCoin::new(CoinEntry::identity(1.0)), diag(1.0));
        assert_eq!(classify_coin(&p), CoinType::TrivialLimit);
        let p = CoinProfile::step(LimitCoin::anisotropic(0.0, c(1.0, 0.0)).unwrap(), diag(-1.0));
        assert_eq!(classify_coin(&p), CoinType::IIprime);
    }

    #[test]
    fn coin_entry_rejects_broken_constraints() {
        assert!(CoinEntry::new(0.8, -0.8, c(0.6, 0.0)).is_ok());
        assert!(CoinEntry::new(0.8, 0.8, c(0.6, 0.0)).is_err());
        assert!(CoinEntry::new(0.9, -0.9, c(0.6, 0.0)).is_err());
        assert!(CoinEntry::new(1.0, 1.0, c(0.0, 0.0)).unwrap().is_trivial());
        assert!(!CoinEntry::new(1.0, -1.0, c(0.0, 0.0)).unwrap().is_trivial());
    }

    #[test]
    fn load_step_document() {
        let doc = r#"{"p":0.5,"left":{"a":0.8,"b":[0.6,0]},"right":{"a":0,"b":[1,0]}}"#;
        let s = load_setup(doc).unwrap();
        assert!(s.profile.is_canonical_step());
        assert_eq!(s.profile.left.a(), 0.8);
        assert_eq!(s.profile.left.entry.a2, -0.8);
        assert!((s.params.q.re - 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.profile.coin_at(0), s.profile.left.entry);
        assert_eq!(s.profile.coin_at(1), s.profile.right.entry);
    }

    #[test]
    fn load_reports_override_site() {
        let doc = r#"{"p":0.5,"left":{"a":0.8,"b":[0.6,0]},"right":{"a":0,"b":[1,0]},
            "overrides":[{"x":0,"a1":0.9,"a2":-0.9,"b":[0.6,0]}]}"#;
        let e = load_profile(doc).unwrap_err().to_string();
        assert!(e.contains("x=0"), "{e}");
    }

    #[test]
    fn load_trivial_limit_and_q() {
        let doc = r#"{"p":0.6,"q":[0,0.8],"left":{"a1":1,"a2":1,"b":[0,0]},"right":{"a":0,"b":[0,1]}}"#;
        let s = load_setup(doc).unwrap();
        assert!(s.profile.left.trivial);
        assert!((s.params.theta - PI / 2.0).abs() < 1e-15);
        let bad = r#"{"p":0.6,"q":[0,0.8],"theta":0,"left":{"a":1,"b":[0,0]},"right":{"a":0,"b":[0,1]}}"#;
        assert!(matches!(load_setup(bad), Err(Error::Schema(_))));
        let complex_diag = r#"{"p":0.6,"left":{"a":[1,0],"b":[0,0]},"right":{"a":0,"b":[0,1]}}"#;
        assert!(matches!(load_setup(complex_diag), Err(Error::Schema(_))));
    }

    #[test]
    fn report_skips_absent_fields() {
        let r = IndexReport {
            fredholm: false,
            reason: Some("|p| = |a(L)|".into()),
            d_plus: None,
            d_minus: None,
            index: None,
            coin_type: CoinType::III,
            near_boundary: false,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"fredholm":false,"reason":"|p| = |a(L)|","coin_type":"III","near_boundary":false}"#
        );
    }
}
