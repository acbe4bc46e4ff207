//! Spherically symmetric initial data sets `(g, k)`:
//!
//! ```text
//! g = g11(r) dr^2 + rho(r)^2 dOmega^2,    k = ka n n + kb (g - n n)
//! ```
//!
//! with `n` the unit radial normal. Closed-form families and sampled data
//! share one evaluation interface ([`RadialProfile`]). The radial metric is
//! carried through its inverse `g^11`, which stays finite at a minimal
//! sphere written in area-radius coordinates where `g11` itself diverges.

pub mod families;
pub mod interp;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::decay_exponent;
use crate::grid::RadialGrid;
use families::{BumpedConformal, Flat, PainleveGullstrand, SchwarzschildStatic};
use interp::MonotoneCubic;

/// Relative tolerance (against the local scale `2/rho`) for deciding that a
/// null expansion vanishes.
pub const HORIZON_TOL: f64 = 1e-8;
/// Absolute tolerance on `mu - |J|_g`.
pub const DEC_TOL: f64 = 1e-10;
/// Minimum number of samples for sampled data.
pub const MIN_SAMPLES: usize = 16;

const SCAN_CELLS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("unknown data family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },
    #[error("r = {r} outside data domain [{lo}, {hi}]")]
    OutOfDomain { r: f64, lo: f64, hi: f64 },
    #[error("sample arrays differ in length ({0})")]
    LengthMismatch(String),
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample radii not strictly increasing at index {0}")]
    NonMonotone(usize),
    #[error("`{field}` must be positive, found {value} at index {index}")]
    NonPositive {
        field: &'static str,
        index: usize,
        value: f64,
    },
    #[error("non-finite `{field}` sample at index {index}")]
    NonFinite { field: &'static str, index: usize },
    #[error("more than one apparent horizon: expansions change sign at r = {roots:?}")]
    MultipleHorizons { roots: Vec<f64> },
    #[error("null expansion nonpositive outside the outermost horizon at r = {r}")]
    InteriorHorizon { r: f64 },
    #[error("data tail too short for fall-off fits: reaches r = {reach}, need {need}")]
    InsufficientTail { reach: f64, need: f64 },
}

/// Metric and extrinsic-curvature coefficients with the derivatives the
/// solver and verifier need, at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    /// `g^11 = 1 / g11`
    pub ginv: f64,
    pub ginv_r: f64,
    pub rho: f64,
    pub rho_r: f64,
    pub rho_rr: f64,
    pub ka: f64,
    pub ka_r: f64,
    pub kb: f64,
    pub kb_r: f64,
}

impl RadialPoint {
    pub fn g11(&self) -> f64 {
        1.0 / self.ginv
    }

    pub fn g11_r(&self) -> f64 {
        -self.ginv_r / (self.ginv * self.ginv)
    }

    pub fn sqrt_ginv(&self) -> f64 {
        self.ginv.sqrt()
    }

    /// Half the mean curvature of `S_r` in `g`: `sqrt(g^11) rho_r / rho`.
    pub fn half_mean_curvature(&self) -> f64 {
        self.sqrt_ginv() * self.rho_r / self.rho
    }

    /// `(theta_plus, theta_minus)`.
    pub fn expansions(&self) -> (f64, f64) {
        let h = self.half_mean_curvature();
        (2.0 * (h + self.kb), 2.0 * (h - self.kb))
    }

    pub fn trace_k(&self) -> f64 {
        self.ka + 2.0 * self.kb
    }
}

/// Evaluation interface for a radial profile in its own raw coordinate.
pub trait RadialProfile: fmt::Debug + Send + Sync {
    fn eval(&self, r: f64) -> RadialPoint;
    fn domain(&self) -> (f64, f64);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub r: Vec<f64>,
    pub g11: Vec<f64>,
    pub rho: Vec<f64>,
    pub ka: Vec<f64>,
    pub kb: Vec<f64>,
}

/// JSON data descriptor: a builtin family or explicit samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataDescriptor {
    Builtin {
        family: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Sampled {
        samples: SampleSet,
    },
}

impl DataDescriptor {
    pub fn builtin(family: &str, params: &[(&str, f64)]) -> Self {
        DataDescriptor::Builtin {
            family: family.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn build(&self) -> Result<InitialData, DataError> {
        match self {
            DataDescriptor::Builtin { family, params } => build_builtin(family, params),
            DataDescriptor::Sampled { samples } => load_sampled(samples),
        }
    }
}

/// Immutable initial data on `[lo, hi]` in the working coordinate.
#[derive(Clone)]
pub struct InitialData {
    profile: Arc<dyn RadialProfile>,
    offset: f64,
    lo: f64,
    hi: f64,
    mass_scale: f64,
    label: String,
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData")
            .field("label", &self.label)
            .field("domain", &(self.lo, self.hi))
            .field("offset", &self.offset)
            .field("mass_scale", &self.mass_scale)
            .finish()
    }
}

impl InitialData {
    /// Wraps a profile; the working coordinate equals the raw one.
    pub fn from_profile(
        profile: Arc<dyn RadialProfile>,
        mass_scale: f64,
        label: impl Into<String>,
    ) -> Self {
        let (lo, hi) = profile.domain();
        InitialData {
            profile,
            offset: 0.0,
            lo,
            hi,
            mass_scale,
            label: label.into(),
        }
    }

    pub fn eval(&self, r: f64) -> Result<RadialPoint, DataError> {
        if !(r >= self.lo && r <= self.hi) {
            return Err(DataError::OutOfDomain {
                r,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(self.profile.eval(r + self.offset))
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn r_min(&self) -> f64 {
        self.lo
    }

    pub fn mass_scale(&self) -> f64 {
        self.mass_scale
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same data re-coordinatized so that `r_h` becomes `r = 0` and the
    /// region inside it is dropped.
    pub fn truncated_at(&self, r_h: f64) -> Self {
        InitialData {
            profile: Arc::clone(&self.profile),
            offset: self.offset + r_h,
            lo: 0.0,
            hi: self.hi - r_h,
            mass_scale: self.mass_scale,
            label: self.label.clone(),
        }
    }
}

pub fn null_expansions(data: &InitialData, r: f64) -> Result<(f64, f64), DataError> {
    Ok(data.eval(r)?.expansions())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HorizonKind {
    /// `theta_minus(0) = 0`, Jang surface blows up with `v(0) = +1`.
    Past,
    /// `theta_plus(0) = 0`, `v(0) = -1`.
    Future,
    Both,
    #[serde(rename = "none")]
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonClassification {
    pub kind: HorizonKind,
    pub theta_plus: f64,
    pub theta_minus: f64,
    /// One-sided derivatives at the inner boundary.
    pub theta_plus_r: f64,
    pub theta_minus_r: f64,
}

fn kind_from(theta_plus: f64, theta_minus: f64, scale: f64) -> HorizonKind {
    let tol = HORIZON_TOL * scale;
    match (theta_plus.abs() <= tol, theta_minus.abs() <= tol) {
        (true, true) => HorizonKind::Both,
        (false, true) => HorizonKind::Past,
        (true, false) => HorizonKind::Future,
        (false, false) => HorizonKind::Absent,
    }
}

/// Classifies the inner boundary sphere from the expansions there.
pub fn classify_horizon(data: &InitialData) -> HorizonClassification {
    let r0 = data.r_min();
    let p = data.eval(r0).expect("inner boundary lies in the domain");
    let (tp, tm) = p.expansions();
    let scale = 2.0 / p.rho;
    // fourth-order forward differences
    let delta = 1e-3 * data.mass_scale().min(data.domain().1 - r0);
    let mut fp = [0.0; 5];
    let mut fm = [0.0; 5];
    for k in 0..5 {
        let (a, b) = null_expansions(data, r0 + k as f64 * delta).expect("probe inside domain");
        fp[k] = a;
        fm[k] = b;
    }
    let d = |f: &[f64; 5]| {
        (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * delta)
    };
    HorizonClassification {
        kind: kind_from(tp, tm, scale),
        theta_plus: tp,
        theta_minus: tm,
        theta_plus_r: d(&fp),
        theta_minus_r: d(&fm),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonLocation {
    pub r: f64,
    pub kind: HorizonKind,
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    // closest to the sign change at machine resolution
    if f(b).abs() < fa.abs() {
        b
    } else {
        a
    }
}

/// Largest radius where `theta_plus` or `theta_minus` vanishes, located by a
/// sign scan over a clustered grid and bisection to machine resolution.
/// Returns `Ok(None)` when both expansions stay positive.
pub fn find_outermost_horizon(data: &InitialData) -> Result<Option<HorizonLocation>, DataError> {
    let (lo, hi) = data.domain();
    let upper = hi.min(lo + 1e4 * data.mass_scale());
    let grid = RadialGrid::clustered(lo, upper, data.mass_scale(), SCAN_CELLS).expect("scan grid");
    let nodes = grid.nodes();
    let mut thetas = Vec::with_capacity(nodes.len());
    for &r in nodes {
        thetas.push(null_expansions(data, r)?);
    }
    let theta = |r: f64, plus: bool| {
        let (a, b) = null_expansions(data, r).expect("bracket inside domain");
        if plus {
            a
        } else {
            b
        }
    };

    let mut roots: Vec<f64> = Vec::new();
    let p0 = data.eval(lo)?;
    if kind_from(thetas[0].0, thetas[0].1, 2.0 / p0.rho) != HorizonKind::Absent {
        roots.push(lo);
    }
    for plus in [true, false] {
        let pick = |t: &(f64, f64)| if plus { t.0 } else { t.1 };
        for i in 0..nodes.len() - 1 {
            let (a, b) = (pick(&thetas[i]), pick(&thetas[i + 1]));
            if i > 0 && a == 0.0 {
                roots.push(nodes[i]);
            } else if a * b < 0.0 {
                roots.push(bisect(|r| theta(r, plus), nodes[i], nodes[i + 1]));
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * data.mass_scale());

    if roots.len() > 1 {
        return Err(DataError::MultipleHorizons { roots });
    }
    let outer = roots.first().copied();
    let start = outer.unwrap_or(f64::NEG_INFINITY);
    for (&r, t) in nodes.iter().zip(&thetas) {
        if r > start && (t.0 <= 0.0 || t.1 <= 0.0) {
            if outer.is_none() || (r - start) > 1e-10 * data.mass_scale() {
                return Err(DataError::InteriorHorizon { r });
            }
        }
    }
    Ok(outer.map(|r| {
        let p = data.eval(r).expect("root inside domain");
        let (tp, tm) = p.expansions();
        let mut kind = kind_from(tp, tm, 2.0 / p.rho);
        if kind == HorizonKind::Absent {
            // root from a sign change resolved to machine precision
            kind = if tp.abs() < tm.abs() {
                HorizonKind::Future
            } else {
                HorizonKind::Past
            };
        }
        HorizonLocation { r, kind }
    }))
}

/// Scalar curvature of `g11 dr^2 + rho^2 dOmega^2`, written with `g^11` so
/// it stays finite where `g11` diverges:
///
/// ```text
/// R = 2/rho^2 (1 - g^11 rho_r^2) - 4/rho (g^11 rho_rr + 1/2 (g^11)_r rho_r)
/// ```
pub fn scalar_curvature(p: &RadialPoint) -> f64 {
    2.0 / (p.rho * p.rho) * (1.0 - p.ginv * p.rho_r * p.rho_r)
        - 4.0 / p.rho * (p.ginv * p.rho_rr + 0.5 * p.ginv_r * p.rho_r)
}

pub fn scalar_curvature_g(data: &InitialData, r: f64) -> Result<f64, DataError> {
    Ok(scalar_curvature(&data.eval(r)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyMomentum {
    pub mu: f64,
    /// Covariant radial component `J_1`.
    pub j1: f64,
    /// `|J|_g = sqrt(g^11) |J_1|`
    pub j_norm: f64,
}

/// Constraint densities. The momentum constraint reduces to
/// `8 pi J_1 = 2 (rho_r / rho)(ka - kb) - 2 kb_r`.
pub fn energy_momentum_at(p: &RadialPoint) -> EnergyMomentum {
    let r = scalar_curvature(p);
    let mu = (r - (p.ka * p.ka + 2.0 * p.kb * p.kb) + p.trace_k() * p.trace_k()) / (16.0 * PI);
    let j1 = (2.0 * p.rho_r / p.rho * (p.ka - p.kb) - 2.0 * p.kb_r) / (8.0 * PI);
    EnergyMomentum {
        mu,
        j1,
        j_norm: p.sqrt_ginv() * j1.abs(),
    }
}

pub fn energy_momentum(data: &InitialData, r: f64) -> Result<EnergyMomentum, DataError> {
    Ok(energy_momentum_at(&data.eval(r)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecReport {
    /// `min (mu - |J|_g)` over the grid.
    pub min_margin: f64,
    pub worst_r: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Dominant energy condition over the nodes of `grid`.
pub fn check_dec(data: &InitialData, grid: &RadialGrid) -> Result<DecReport, DataError> {
    let mut min_margin = f64::INFINITY;
    let mut worst_r = grid.nodes()[0];
    for &r in grid.nodes() {
        let em = energy_momentum(data, r)?;
        let margin = em.mu - em.j_norm;
        if margin < min_margin {
            min_margin = margin;
            worst_r = r;
        }
    }
    Ok(DecReport {
        min_margin,
        worst_r,
        tolerance: DEC_TOL,
        pass: min_margin >= -DEC_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalloffClause {
    pub name: String,
    /// Fitted decay exponent; `None` when the quantity vanishes on the tail.
    pub exponent: Option<f64>,
    pub required: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalloffReport {
    pub tail: (f64, f64),
    pub clauses: Vec<FalloffClause>,
    pub pass: bool,
}

/// Slack allowed between a fitted exponent and the required power.
pub const FALLOFF_SLACK: f64 = 0.1;

/// Power-law tail fits of the asymptotic-flatness bounds on `k` and `g`.
pub fn check_falloff(data: &InitialData) -> Result<FalloffReport, DataError> {
    let scale = data.mass_scale();
    let (lo, hi) = data.domain();
    let reach = hi.min(lo + 1e4 * scale);
    let need = lo + 1e3 * scale;
    if reach < need {
        return Err(DataError::InsufficientTail { reach, need });
    }
    let a = reach / 10.0;
    let rs: Vec<f64> = (0..64)
        .map(|k| a * (reach / a).powf(k as f64 / 63.0))
        .collect();
    let pts: Vec<RadialPoint> = rs.iter().map(|&r| data.eval(r)).collect::<Result<_, _>>()?;

    let quantities: [(&str, f64, Box<dyn Fn(f64, &RadialPoint) -> f64>); 4] = [
        (
            "|k|_g <= C r^-2",
            2.0,
            Box::new(|_, p| (p.ka * p.ka + 2.0 * p.kb * p.kb).sqrt()),
        ),
        ("|Tr k| <= C r^-3", 3.0, Box::new(|_, p| p.trace_k().abs())),
        (
            "|g11-1| + r|g11_r| <= C r^-1",
            1.0,
            Box::new(|r, p| (p.g11() - 1.0).abs() + r * p.g11_r().abs()),
        ),
        (
            "|rho-r| + r|rho_r-1| + r^2|rho_rr| <= C",
            0.0,
            Box::new(|r, p| (p.rho - r).abs() + r * (p.rho_r - 1.0).abs() + r * r * p.rho_rr.abs()),
        ),
    ];
    let mut clauses = Vec::new();
    for (name, required, q) in quantities.iter() {
        let ys: Vec<f64> = rs.iter().zip(&pts).map(|(&r, p)| q(r, p)).collect();
        let vanishing = ys.iter().all(|y| y.abs() <= 1e-14 * (1.0 + scale));
        let exponent = if vanishing {
            None
        } else {
            decay_exponent(&rs, &ys)
        };
        let pass = vanishing || exponent.is_some_and(|e| e >= required - FALLOFF_SLACK);
        clauses.push(FalloffClause {
            name: name.to_string(),
            exponent,
            required: *required,
            pass,
        });
    }
    let pass = clauses.iter().all(|c| c.pass);
    Ok(FalloffReport {
        tail: (a, reach),
        clauses,
        pass,
    })
}

fn param(params: &BTreeMap<String, f64>, name: &str, default: f64) -> f64 {
    params.get(name).copied().unwrap_or(default)
}

/// Names of the builtin families.
pub const FAMILIES: [&str; 4] = [
    "schwarzschild-static",
    "painleve-gullstrand",
    "bumped-conformal",
    "flat",
];

/// Builds a closed-form family, truncated so that `r = 0` is its outermost
/// apparent horizon (families without a horizon keep their inner sphere).
///
/// Parameters: `M` (mass, default 1) for the black-hole families, `eps`
/// (bump amplitude, default 0) for `bumped-conformal`, `r0` (inner radius,
/// default 1) for `flat`.
pub fn build_builtin(
    family: &str,
    params: &BTreeMap<String, f64>,
) -> Result<InitialData, DataError> {
    let allowed: &[&str] = match family {
        "schwarzschild-static" | "painleve-gullstrand" => &["M"],
        "bumped-conformal" => &["M", "eps"],
        "flat" => &["r0"],
        other => return Err(DataError::UnknownFamily(other.to_string())),
    };
    for (k, &v) in params {
        if !allowed.contains(&k.as_str()) {
            return Err(DataError::InvalidParameter {
                name: k.clone(),
                value: v,
                reason: "not a parameter of this family",
            });
        }
        if !v.is_finite() {
            return Err(DataError::InvalidParameter {
                name: k.clone(),
                value: v,
                reason: "must be finite",
            });
        }
    }
    let positive = |name: &str, v: f64| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(DataError::InvalidParameter {
                name: name.to_string(),
                value: v,
                reason: "must be positive",
            })
        }
    };
    let untruncated = match family {
        "schwarzschild-static" => {
            let m = positive("M", param(params, "M", 1.0))?;
            InitialData::from_profile(Arc::new(SchwarzschildStatic { mass: m }), m, family)
        }
        "painleve-gullstrand" => {
            let m = positive("M", param(params, "M", 1.0))?;
            InitialData::from_profile(
                Arc::new(PainleveGullstrand {
                    mass: m,
                    rho_inner: m,
                }),
                m,
                family,
            )
        }
        "bumped-conformal" => {
            let m = positive("M", param(params, "M", 1.0))?;
            let eps = param(params, "eps", 0.0);
            if eps < 0.0 {
                return Err(DataError::InvalidParameter {
                    name: "eps".into(),
                    value: eps,
                    reason: "must be >= 0",
                });
            }
            InitialData::from_profile(
                Arc::new(BumpedConformal {
                    mass: m,
                    eps,
                    x_inner: 0.1 * m,
                }),
                m,
                family,
            )
        }
        _ => {
            let r0 = positive("r0", param(params, "r0", 1.0))?;
            InitialData::from_profile(Arc::new(Flat { r0 }), r0, family)
        }
    };
    Ok(match find_outermost_horizon(&untruncated)? {
        Some(h) => untruncated.truncated_at(h.r),
        None => untruncated,
    })
}

#[derive(Debug)]
struct SampledProfile {
    g11: MonotoneCubic,
    rho: MonotoneCubic,
    ka: MonotoneCubic,
    kb: MonotoneCubic,
}

impl RadialProfile for SampledProfile {
    fn eval(&self, r: f64) -> RadialPoint {
        let g = self.g11.eval(r).expect("domain checked by InitialData");
        let rho = self.rho.eval(r).expect("domain checked by InitialData");
        let ka = self.ka.eval(r).expect("domain checked by InitialData");
        let kb = self.kb.eval(r).expect("domain checked by InitialData");
        RadialPoint {
            ginv: 1.0 / g.f,
            ginv_r: -g.df / (g.f * g.f),
            rho: rho.f,
            rho_r: rho.df,
            rho_rr: rho.ddf,
            ka: ka.f,
            ka_r: ka.df,
            kb: kb.f,
            kb_r: kb.df,
        }
    }

    fn domain(&self) -> (f64, f64) {
        self.rho.domain()
    }
}

/// Sampled data with monotone cubic interpolation; derivatives are those of
/// the interpolant.
pub fn load_sampled(s: &SampleSet) -> Result<InitialData, DataError> {
    let n = s.r.len();
    let lens = [s.g11.len(), s.rho.len(), s.ka.len(), s.kb.len()];
    if lens.iter().any(|&l| l != n) {
        return Err(DataError::LengthMismatch(format!(
            "r={n}, g11={}, rho={}, ka={}, kb={}",
            lens[0], lens[1], lens[2], lens[3]
        )));
    }
    if n < MIN_SAMPLES {
        return Err(DataError::TooFewSamples(n));
    }
    for (field, arr) in [
        ("r", &s.r),
        ("g11", &s.g11),
        ("rho", &s.rho),
        ("ka", &s.ka),
        ("kb", &s.kb),
    ] {
        if let Some(index) = arr.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite { field, index });
        }
    }
    if let Some(i) = s.r.windows(2).position(|w| w[1] <= w[0]) {
        return Err(DataError::NonMonotone(i + 1));
    }
    for (field, arr) in [("g11", &s.g11), ("rho", &s.rho)] {
        if let Some(index) = arr.iter().position(|&v| v <= 0.0) {
            return Err(DataError::NonPositive {
                field,
                index,
                value: arr[index],
            });
        }
    }
    let profile = SampledProfile {
        g11: MonotoneCubic::new(&s.r, &s.g11),
        rho: MonotoneCubic::new(&s.r, &s.rho),
        ka: MonotoneCubic::new(&s.r, &s.ka),
        kb: MonotoneCubic::new(&s.r, &s.kb),
    };
    Ok(InitialData::from_profile(
        Arc::new(profile),
        0.5 * s.rho[0],
        "sampled",
    ))
}

/// Samples any data set at the given radii.
pub fn sample(data: &InitialData, rs: &[f64]) -> Result<SampleSet, DataError> {
    let mut out = SampleSet {
        r: vec![],
        g11: vec![],
        rho: vec![],
        ka: vec![],
        kb: vec![],
    };
    for &r in rs {
        let p = data.eval(r)?;
        out.r.push(r);
        out.g11.push(p.g11());
        out.rho.push(p.rho);
        out.ka.push(p.ka);
        out.kb.push(p.kb);
    }
    Ok(out)
}
