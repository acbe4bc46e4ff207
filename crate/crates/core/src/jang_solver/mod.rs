//! Spherically symmetric generalized Jang equation.
//!
//! The graph function `f(r)` enters only through
//!
//! ```text
//! v = sqrt(g^11) f_r / sqrt(phi^-2 + g^11 f_r^2),     |v| < 1,
//! ```
//!
//! and with the warping factor `phi = rho_s` (arclength `s` of the induced
//! radial metric `g11 / (1 - v^2) dr^2`) the equation becomes a first-order
//! ODE for `v`. Writing `B = g^11`, `h = sqrt(B) rho_r / rho` and
//! `L = rho_rr / rho_r + B_r / (2B)`,
//!
//! ```text
//! F-(r, v) = -2h / (1 + v) - ka + v sqrt(B) L
//! F+(r, v) = +2h / (1 - v) - ka + v sqrt(B) L
//! v_r = -(F- + theta- / (1 - v^2)) / sqrt(B) = -(F+ - theta+ / (1 - v^2)) / sqrt(B)
//! ```
//!
//! The state actually integrated is the gap to the nearest pole (`1 - v` for
//! a past-horizon start, `1 + v` for a future one) so that `1 - v^2` keeps
//! full relative precision next to a blow-up boundary.

pub mod dopri;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::decay_exponent;
use crate::grid::{d_dxi_2, d_dxi_4, d_dxi_6, norms, GridError, RadialGrid};
use crate::initial_data::{
    classify_horizon, DataError, HorizonClassification, HorizonKind, InitialData, RadialPoint,
};
use dopri::{Dopri5, IntegrateError, StepStats};

/// Sup of the cross-residual (in units of `1 / mass_scale`) an accepted
/// solution may carry.
pub const CROSS_RESIDUAL_GATE: f64 = 1e-6;
/// `f_r` is only reconstructed where `|v|` stays this far from 1.
pub const RECONSTRUCTION_MARGIN: f64 = 1e-6;
/// A step-size underflow this close to `|v| = 1` is reported as blow-up.
pub const BLOWUP_MARGIN: f64 = 1e-6;
const DEFAULT_CELLS: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid boundary condition: {0}")]
    InvalidBoundary(String),
    #[error("|v| = {v_abs} reaches the clamp margin at r = {r}")]
    Singular { r: f64, v_abs: f64 },
    #[error("equation evaluated at r = {r}, at or inside the inner boundary {r_min}")]
    NonPositiveRadius { r: f64, r_min: f64 },
    #[error("derivative of the vanishing expansion at the horizon is {derivative} <= 0; perturb the data slightly")]
    PerturbData { derivative: f64 },
    #[error(
        "|v| -> 1 at interior r = {r} (v = {v}): the outermost-horizon hypothesis is violated"
    )]
    APrioriViolation { r: f64, v: f64 },
    #[error("step size underflow at r = {r}")]
    StepUnderflow { r: f64 },
    #[error("too many steps (stalled at r = {r})")]
    TooManySteps { r: f64 },
    #[error("no regular solution starts from v = {alpha} at the inner boundary")]
    NoRegularStart { alpha: f64 },
    #[error("arclength integrand not integrable near r = {r}")]
    NonIntegrable { r: f64 },
    #[error("warping factor phi = {phi} <= 0 at interior node {index} (r = {r})")]
    NonPositivePhi { index: usize, r: f64, phi: f64 },
    #[error("cross-residual sup {sup:e} exceeds the gate {gate:e}")]
    CrossResidual { sup: f64, gate: f64 },
    #[error("tail reaches r = {r_max}, decay fits need r >= {need}")]
    InsufficientTail { r_max: f64, need: f64 },
}

/// Which sign-form of the equation is integrated. Both are algebraically
/// identical; `theta-minus` is well conditioned next to `v = +1`,
/// `theta-plus` next to `v = -1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    #[default]
    ThetaMinus,
    ThetaPlus,
}

/// Inner boundary value of `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Regular start `v(0) = alpha` with `|alpha| < 1`.
    Alpha(f64),
    /// Blow-up at a past horizon, `v(0) = +1`.
    PastHorizon,
    /// Blow-up at a future horizon, `v(0) = -1`.
    FutureHorizon,
}

impl Boundary {
    pub fn v0(&self) -> f64 {
        match *self {
            Boundary::Alpha(a) => a,
            Boundary::PastHorizon => 1.0,
            Boundary::FutureHorizon => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Outer cutoff; `None` means `r_min + 1e4 * mass_scale`.
    pub r_max: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    /// Length of the series segment at the inner boundary. `None` picks the
    /// largest `mass_scale * 1e-3 / 2^k` whose truncation estimate is below `atol`.
    pub series_cutoff: Option<f64>,
    pub clamp_margin: f64,
    pub branch: Branch,
    /// Output grid cells.
    pub cells: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            r_max: None,
            rtol: 1e-10,
            atol: 1e-12,
            series_cutoff: None,
            clamp_margin: 1e-12,
            branch: Branch::ThetaMinus,
            cells: DEFAULT_CELLS,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: String| Err(SolveError::InvalidConfig(m));
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return bad(format!(
                "tolerances must be positive (rtol={}, atol={})",
                self.rtol, self.atol
            ));
        }
        if !(self.clamp_margin > 0.0 && self.clamp_margin < 0.5) {
            return bad(format!(
                "clamp margin {} outside (0, 0.5)",
                self.clamp_margin
            ));
        }
        if let Some(e) = self.series_cutoff {
            if !(e > 0.0) {
                return bad(format!("series cutoff {e} must be positive"));
            }
            if let Some(rm) = self.r_max {
                if !(e < rm) {
                    return bad(format!("series cutoff {e} must be below r_max {rm}"));
                }
            }
        }
        if let Some(rm) = self.r_max {
            if !(rm.is_finite() && rm > 0.0) {
                return bad(format!("r_max {rm} must be positive and finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub steps: StepStats,
    pub series_cutoff: f64,
    pub initial_slope: f64,
    pub cross_residual_sup: f64,
    pub cross_residual_l2: f64,
    /// Tail decay exponent of `|v|`, when the tail is long enough and nonzero.
    pub decay_exponent: Option<f64>,
}

/// Node-sampled solution on a clustered grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JangSolution {
    pub grid: RadialGrid,
    pub boundary: Boundary,
    pub branch: Branch,
    pub v: Vec<f64>,
    pub v_r: Vec<f64>,
    /// `1 - v^2` without cancellation.
    pub gap: Vec<f64>,
    pub s: Vec<f64>,
    pub phi: Vec<f64>,
    /// `None` where `|v|` is within [`RECONSTRUCTION_MARGIN`] of 1.
    pub f_r: Vec<Option<f64>>,
    pub diagnostics: SolveDiagnostics,
}

impl JangSolution {
    pub fn r(&self) -> &[f64] {
        self.grid.nodes()
    }
}

// ---------------------------------------------------------------------------
// right-hand side

/// `v_r` from the point data, with `1 - v` and `1 + v` supplied separately
/// so callers near `|v| = 1` can keep them accurate.
fn rhs_parts(p: &RadialPoint, v: f64, one_minus: f64, one_plus: f64, branch: Branch) -> f64 {
    let ia = p.sqrt_ginv();
    let h = ia * p.rho_r / p.rho;
    let gap = one_minus * one_plus;
    let lv = v * (ia * p.rho_rr / p.rho_r + p.ginv_r / (2.0 * ia));
    let bracket = match branch {
        Branch::ThetaMinus => -2.0 * h / one_plus - p.ka + lv + 2.0 * (h - p.kb) / gap,
        Branch::ThetaPlus => 2.0 * h / one_minus - p.ka + lv - 2.0 * (h + p.kb) / gap,
    };
    -bracket / ia
}

/// `F` at the inner boundary for a horizon start (`v0 = +-1`), from the
/// branch regular at that pole.
fn horizon_f(p: &RadialPoint, v0: f64) -> f64 {
    let ia = p.sqrt_ginv();
    let h = ia * p.rho_r / p.rho;
    let l = ia * p.rho_rr / p.rho_r + p.ginv_r / (2.0 * ia);
    if v0 > 0.0 {
        -h - p.ka + l
    } else {
        h - p.ka - l
    }
}

/// Right-hand side `v_r(r, v)`.
pub fn ode_rhs(data: &InitialData, r: f64, v: f64, branch: Branch) -> Result<f64, SolveError> {
    ode_rhs_with_margin(data, r, v, branch, SolverConfig::default().clamp_margin)
}

pub fn ode_rhs_with_margin(
    data: &InitialData,
    r: f64,
    v: f64,
    branch: Branch,
    clamp_margin: f64,
) -> Result<f64, SolveError> {
    if !(r > data.r_min()) {
        return Err(SolveError::NonPositiveRadius {
            r,
            r_min: data.r_min(),
        });
    }
    if !(v.abs() < 1.0 - clamp_margin) {
        return Err(SolveError::Singular { r, v_abs: v.abs() });
    }
    let p = data.eval(r)?;
    Ok(rhs_parts(&p, v, 1.0 - v, 1.0 + v, branch))
}

/// Root of `c2 x^2 + f x - theta_r / 2 = 0` with the sign matching the
/// pole: negative for `v0 = +1`, positive for `v0 = -1`. With `c2 > 0`
/// and `theta_r > 0` the roots have opposite signs.
pub fn horizon_slope_root(c2: f64, f: f64, theta_r: f64, v0: f64) -> Result<f64, SolveError> {
    if !(theta_r > 0.0) {
        return Err(SolveError::PerturbData {
            derivative: theta_r,
        });
    }
    if !(c2 > 0.0) {
        return Err(SolveError::InvalidBoundary(format!(
            "sqrt(g^11) = {c2} at the horizon"
        )));
    }
    let disc = (f * f + 2.0 * c2 * theta_r).sqrt();
    // stable pair: q / c2 and (-theta_r / 2) / q
    let q = -0.5 * (f + f.signum() * disc);
    let (a, b) = if q == 0.0 {
        (disc / (2.0 * c2), -disc / (2.0 * c2))
    } else {
        (q / c2, -0.5 * theta_r / q)
    };
    let root = if v0 > 0.0 { a.min(b) } else { a.max(b) };
    Ok(root)
}

/// Initial slope `v_r(0)` at a horizon start.
pub fn initial_slope(
    data: &InitialData,
    classification: &HorizonClassification,
) -> Result<f64, SolveError> {
    let (v0, theta_r) = match classification.kind {
        HorizonKind::Past => (1.0, classification.theta_minus_r),
        HorizonKind::Future => (-1.0, classification.theta_plus_r),
        HorizonKind::Both => return Err(SolveError::InvalidBoundary(
            "both expansions vanish at the inner boundary; a |v(0)| = 1 start is not defined there"
                .into(),
        )),
        HorizonKind::Absent => {
            return Err(SolveError::InvalidBoundary(
                "inner boundary is not an apparent horizon".into(),
            ))
        }
    };
    let p = data.eval(data.r_min())?;
    horizon_slope_root(p.sqrt_ginv(), horizon_f(&p, v0), theta_r, v0)
}

// ---------------------------------------------------------------------------
// integration

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Regular,
    /// `y = 1 - v`
    Past,
    /// `y = 1 + v`
    Future,
}

impl Mode {
    fn v(self, y: f64) -> f64 {
        match self {
            Mode::Regular => y,
            Mode::Past => 1.0 - y,
            Mode::Future => y - 1.0,
        }
    }

    /// `(1 - v, 1 + v)`
    fn parts(self, y: f64) -> (f64, f64) {
        match self {
            Mode::Regular => (1.0 - y, 1.0 + y),
            Mode::Past => (y, 2.0 - y),
            Mode::Future => (2.0 - y, y),
        }
    }

    /// `dy/dr = sign * v_r`
    fn sign(self) -> f64 {
        if self == Mode::Past {
            -1.0
        } else {
            1.0
        }
    }
}

struct Rhs<'a> {
    data: &'a InitialData,
    mode: Mode,
    branch: Branch,
    margin: f64,
}

impl Rhs<'_> {
    /// `dy/dr`, or `None` for an inadmissible state.
    fn eval(&self, r: f64, y: f64) -> Option<f64> {
        if !(r > self.data.r_min()) {
            return None;
        }
        let (om, op) = self.mode.parts(y);
        if !(om > self.margin && op > self.margin) {
            return None;
        }
        let p = self.data.eval(r).ok()?;
        let d = self.mode.sign() * rhs_parts(&p, self.mode.v(y), om, op, self.branch);
        d.is_finite().then_some(d)
    }
}

/// Output grid for a configuration: clustered from the inner boundary to
/// `r_max`.
pub fn solver_grid(data: &InitialData, config: &SolverConfig) -> Result<RadialGrid, SolveError> {
    let (lo, hi) = data.domain();
    let scale = data.mass_scale();
    let r_max = config.r_max.unwrap_or(lo + 1e4 * scale);
    if r_max > hi {
        return Err(SolveError::InvalidConfig(format!(
            "r_max {r_max} beyond the data domain end {hi}"
        )));
    }
    Ok(RadialGrid::clustered(lo, r_max, scale, config.cells)?)
}

pub fn solve(
    data: &InitialData,
    boundary: Boundary,
    config: &SolverConfig,
) -> Result<JangSolution, SolveError> {
    config.validate()?;
    let grid = solver_grid(data, config)?;
    solve_on_grid(data, boundary, config, grid)
}

/// Same as [`solve`] on a caller-supplied grid starting at the data's inner
/// boundary (refinement studies pass nested grids).
pub fn solve_on_grid(
    data: &InitialData,
    boundary: Boundary,
    config: &SolverConfig,
    grid: RadialGrid,
) -> Result<JangSolution, SolveError> {
    config.validate()?;
    let r0 = data.r_min();
    if grid.r_min() != r0 {
        return Err(SolveError::InvalidConfig(format!(
            "grid starts at {}, data at {r0}",
            grid.r_min()
        )));
    }
    let scale = data.mass_scale();
    let margin = config.clamp_margin;

    let (mode, y0, horizon_slope) = match boundary {
        Boundary::Alpha(a) => {
            if !(a.abs() < 1.0 - margin) {
                return Err(SolveError::InvalidBoundary(format!(
                    "alpha = {a} must satisfy |alpha| < 1"
                )));
            }
            (Mode::Regular, a, None)
        }
        Boundary::PastHorizon | Boundary::FutureHorizon => {
            let cls = classify_horizon(data);
            let want = if boundary == Boundary::PastHorizon {
                HorizonKind::Past
            } else {
                HorizonKind::Future
            };
            if cls.kind != want {
                let slope = initial_slope(data, &cls);
                return Err(match slope {
                    Err(e) => e,
                    Ok(_) => SolveError::InvalidBoundary(format!(
                        "requested {boundary:?} but the inner boundary is classified {:?}",
                        cls.kind
                    )),
                });
            }
            let x = initial_slope(data, &cls)?;
            let mode = if want == HorizonKind::Past {
                Mode::Past
            } else {
                Mode::Future
            };
            (mode, 0.0, Some(x))
        }
    };
    let rhs = Rhs {
        data,
        mode,
        branch: config.branch,
        margin,
    };

    // series segment y = y0 + slope (r - r0) on [r0, r0 + eps]
    let fixed = config.series_cutoff;
    let mut eps = fixed.unwrap_or(1e-3 * scale).min(0.5 * (grid.r_max() - r0));
    let (eps, slope) = loop {
        let rr = r0 + eps;
        let slope = match horizon_slope {
            Some(x) => Some(mode.sign() * x),
            None => rhs.eval(rr, y0),
        };
        let verdict = slope.and_then(|sl| {
            let d_end = rhs.eval(rr, y0 + sl * eps)?;
            Some((0.5 * (d_end - sl).abs() * eps, sl))
        });
        match verdict {
            Some((rem, sl)) if fixed.is_some() || rem <= config.atol => break (eps, sl),
            Some((_, sl)) if eps < 1e-14 * scale => {
                if horizon_slope.is_some() {
                    break (eps, sl);
                }
                return Err(SolveError::NoRegularStart { alpha: y0 });
            }
            None if fixed.is_some() || eps < 1e-14 * scale => {
                return Err(match boundary {
                    Boundary::Alpha(alpha) => SolveError::NoRegularStart { alpha },
                    _ => SolveError::StepUnderflow { r: rr },
                })
            }
            _ => eps *= 0.5,
        }
    };

    let stepper = Dopri5 {
        rtol: config.rtol,
        atol: config.atol,
        h_floor: 1e-14,
        length_scale: scale,
        max_steps: 50_000_000,
    };
    let nodes = grid.nodes().to_vec();
    let n = nodes.len();
    let mut ys = vec![0.0; n];
    let mut dys = vec![0.0; n];
    ys[0] = y0;
    dys[0] = slope;
    let mut stats = StepStats::default();
    let r_s = r0 + eps;
    let mut cur = (r_s, y0 + slope * eps);
    let mut h = eps;
    for i in 1..n {
        let ri = nodes[i];
        if ri <= r_s {
            ys[i] = y0 + slope * (ri - r0);
            dys[i] = rhs.eval(ri, ys[i]).unwrap_or(slope);
            continue;
        }
        let (y, dy) = stepper
            .advance(|r, y| rhs.eval(r, y), cur.0, cur.1, ri, &mut h, &mut stats)
            .map_err(|e| match e {
                IntegrateError::Underflow {
                    r,
                    y,
                    refused: true,
                } => SolveError::APrioriViolation { r, v: mode.v(y) },
                // steps also collapse under the error test as |v| -> 1
                IntegrateError::Underflow { r, y, .. }
                    if 1.0 - mode.v(y).abs() <= BLOWUP_MARGIN =>
                {
                    SolveError::APrioriViolation { r, v: mode.v(y) }
                }
                IntegrateError::Underflow { r, .. } => SolveError::StepUnderflow { r },
                IntegrateError::TooManySteps { r } => SolveError::TooManySteps { r },
            })?;
        ys[i] = y;
        dys[i] = dy;
        cur = (ri, y);
    }

    let v: Vec<f64> = ys.iter().map(|&y| mode.v(y)).collect();
    let v_r: Vec<f64> = dys.iter().map(|&d| mode.sign() * d).collect();
    let gap: Vec<f64> = ys
        .iter()
        .map(|&y| {
            let (a, b) = mode.parts(y);
            a * b
        })
        .collect();
    let (s, phi) = arclength_and_phi(data, &grid, &v, &v_r, &gap)?;
    let f_r = reconstruct_f_r(data, &grid, &v, &gap, &phi)?;
    let mut sol = JangSolution {
        grid,
        boundary,
        branch: config.branch,
        v,
        v_r,
        gap,
        s,
        phi,
        f_r,
        diagnostics: SolveDiagnostics {
            steps: stats,
            series_cutoff: eps,
            initial_slope: mode.sign() * slope,
            ..Default::default()
        },
    };
    let cr = cross_residual_32(data, &sol)?;
    sol.diagnostics.cross_residual_sup = cr.sup;
    sol.diagnostics.cross_residual_l2 = cr.l2;
    let gate = CROSS_RESIDUAL_GATE / scale;
    if !(cr.sup <= gate) {
        return Err(SolveError::CrossResidual { sup: cr.sup, gate });
    }
    sol.diagnostics.decay_exponent = asymptotic_report(data, &sol)
        .ok()
        .and_then(|a| a.exponent_v);
    Ok(sol)
}

// ---------------------------------------------------------------------------
// arclength and warping factor

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];
const QUAD_RTOL: f64 = 1e-13;
const QUAD_DEPTH: u32 = 40;

/// Cubic Hermite interpolant of `1 - v^2` over one cell in `xi`.
struct GapCell {
    xa: f64,
    hx: f64,
    y0: f64,
    y1: f64,
    m0: f64,
    m1: f64,
}

impl GapCell {
    fn at(&self, xi: f64) -> f64 {
        let t = (xi - self.xa) / self.hx;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.y0
            + (t3 - 2.0 * t2 + t) * self.m0 * self.hx
            + (-2.0 * t3 + 3.0 * t2) * self.y1
            + (t3 - t2) * self.m1 * self.hx
    }
}

fn gl5(f: &impl Fn(f64) -> Option<f64>, a: f64, b: f64) -> Option<f64> {
    let (c, hw) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = 0.0;
    for (x, w) in GL5 {
        acc += w * f(c + hw * x)?;
    }
    Some(acc * hw)
}

fn adaptive(
    f: &impl Fn(f64) -> Option<f64>,
    a: f64,
    b: f64,
    whole: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let (l, r) = (gl5(f, a, m)?, gl5(f, m, b)?);
    let halves = l + r;
    if (halves - whole).abs() <= QUAD_RTOL * halves.abs() || (halves - whole).abs() < 1e-300 {
        return Some(halves);
    }
    if depth == 0 {
        // rounding-limited rather than singular
        return ((halves - whole).abs() <= 1e-8 * halves.abs()).then_some(halves);
    }
    Some(adaptive(f, a, m, l, depth - 1)? + adaptive(f, m, b, r, depth - 1)?)
}

/// Arclength `s(r) = int sqrt(g11) / sqrt(1 - v^2) dr` and warping factor
/// `phi = sqrt(1 - v^2) sqrt(g^11) rho_r` at the nodes.
///
/// Each cell is integrated in `xi` by adaptive Gauss–Legendre quadrature on a
/// Hermite interpolant of `1 - v^2`; the square-root clustering of the grid
/// turns the `1 / sqrt(r)` behaviour at a horizon into a smooth integrand.
pub fn arclength_and_phi(
    data: &InitialData,
    grid: &RadialGrid,
    v: &[f64],
    v_r: &[f64],
    gap: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), SolveError> {
    let n = grid.len();
    let mut s = vec![0.0; n];
    let mut phi = vec![0.0; n];
    let jac = grid.jacobian();
    for i in 0..n {
        let p = data.eval(grid.nodes()[i])?;
        phi[i] = gap[i].max(0.0).sqrt() * p.sqrt_ginv() * p.rho_r;
    }
    for i in 0..n - 1 {
        let cell = GapCell {
            xa: grid.xi(i),
            hx: grid.h(),
            y0: gap[i],
            y1: gap[i + 1],
            m0: -2.0 * v[i] * v_r[i] * jac[i],
            m1: -2.0 * v[i + 1] * v_r[i + 1] * jac[i + 1],
        };
        let integrand = |xi: f64| -> Option<f64> {
            let r = grid.r_of_xi(xi).clamp(grid.r_min(), grid.r_max());
            let p = data.eval(r).ok()?;
            let g = cell.at(xi);
            if !(g > 0.0) {
                return None;
            }
            let val = grid.dr_dxi(xi) / (p.sqrt_ginv() * g.sqrt());
            val.is_finite().then_some(val)
        };
        let (a, b) = (grid.xi(i), grid.xi(i + 1));
        let piece = gl5(&integrand, a, b)
            .and_then(|whole| adaptive(&integrand, a, b, whole, QUAD_DEPTH))
            .ok_or(SolveError::NonIntegrable { r: grid.nodes()[i] })?;
        s[i + 1] = s[i] + piece;
    }
    Ok((s, phi))
}

fn reconstruct_f_r(
    data: &InitialData,
    grid: &RadialGrid,
    v: &[f64],
    gap: &[f64],
    phi: &[f64],
) -> Result<Vec<Option<f64>>, SolveError> {
    let mut out = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        if v[i].abs() >= 1.0 - RECONSTRUCTION_MARGIN || !(phi[i] > 0.0) {
            out.push(None);
            continue;
        }
        let p = data.eval(grid.nodes()[i])?;
        out.push(Some(v[i] / (p.sqrt_ginv() * phi[i] * gap[i].sqrt())));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// diagnostics on a solution

/// `phi_r / phi` at the nodes from a `xi`-stencil of order 2, 4 or 6.
/// Node 0 is left at 0: `dr/dxi` vanishes there.
pub fn log_phi_derivative(grid: &RadialGrid, phi: &[f64], order: usize) -> Vec<f64> {
    let d = match order {
        0..=2 => d_dxi_2(phi, grid.h()),
        3 | 4 => d_dxi_4(phi, grid.h()),
        _ => d_dxi_6(phi, grid.h()),
    };
    let jac = grid.jacobian();
    let mut out = vec![0.0; phi.len()];
    for i in 1..phi.len() {
        out[i] = d[i] / (jac[i] * phi[i]);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossResidual {
    /// Residual at every node; node 0 is excluded from the norms and set to 0.
    pub profile: Vec<f64>,
    pub sup: f64,
    pub l2: f64,
}

/// Residual of the second-order form of the equation,
/// `sqrt(B) v_r + 2 (h v - kb) + (v^2 - 1) ka + sqrt(B) v (phi_r / phi) (1 - v^2)`,
/// with `phi_r / phi` reconstructed from the node values of `phi` by a
/// sixth-order stencil.
pub fn cross_residual_32(
    data: &InitialData,
    sol: &JangSolution,
) -> Result<CrossResidual, SolveError> {
    let n = sol.v.len();
    let nodes = sol.grid.nodes();
    for i in 1..n {
        if !(sol.phi[i] > 0.0) {
            return Err(SolveError::NonPositivePhi {
                index: i,
                r: nodes[i],
                phi: sol.phi[i],
            });
        }
    }
    let dl = log_phi_derivative(&sol.grid, &sol.phi, 6);
    let mut profile = vec![0.0; n];
    for i in 1..n {
        let p = data.eval(nodes[i])?;
        let ia = p.sqrt_ginv();
        let (v, g) = (sol.v[i], sol.gap[i]);
        profile[i] = ia * sol.v_r[i] + 2.0 * (ia * p.rho_r / p.rho * v - p.kb) - g * p.ka
            + ia * v * dl[i] * g;
    }
    let (sup, l2) = norms(&profile, 1..n);
    Ok(CrossResidual { profile, sup, l2 })
}

/// `k44 = phi phi_r sqrt(g^11) v` at the nodes (`None` at node 0).
pub fn k44_profile(data: &InitialData, sol: &JangSolution) -> Result<Vec<Option<f64>>, SolveError> {
    let dl = log_phi_derivative(&sol.grid, &sol.phi, 4);
    let mut out = vec![None; sol.v.len()];
    for i in 1..sol.v.len() {
        let p = data.eval(sol.grid.nodes()[i])?;
        let phi = sol.phi[i];
        out[i] = Some(phi * phi * dl[i] * p.sqrt_ginv() * sol.v[i]);
    }
    Ok(out)
}

/// `k44 = g^11 phi phi_r f_r / sqrt(phi^-2 + g^11 f_r^2)` from the
/// reconstructed graph slope; `None` where `f_r` is unavailable.
pub fn k44_from_graph(
    data: &InitialData,
    sol: &JangSolution,
) -> Result<Vec<Option<f64>>, SolveError> {
    let dl = log_phi_derivative(&sol.grid, &sol.phi, 4);
    let mut out = vec![None; sol.v.len()];
    for i in 1..sol.v.len() {
        let Some(fr) = sol.f_r[i] else { continue };
        let p = data.eval(sol.grid.nodes()[i])?;
        let phi = sol.phi[i];
        let phi_r = phi * dl[i];
        out[i] = Some(p.ginv * phi * phi_r * fr / (phi.powi(-2) + p.ginv * fr * fr).sqrt());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub tail: (f64, f64),
    pub identically_zero: bool,
    pub exponent_v: Option<f64>,
    pub exponent_v_r: Option<f64>,
    /// `sup r^2 |v|` over the tail.
    pub sup_r2_v: f64,
    /// Exponents meet `|v| ~ r^-2`, `|v_r| ~ r^-3` within 0.1.
    pub meets_decay: Option<bool>,
}

/// Log-log fits of `|v|` and `|v_r|` over the outer decade of the grid.
pub fn asymptotic_report(
    data: &InitialData,
    sol: &JangSolution,
) -> Result<AsymptoticReport, SolveError> {
    let (lo, hi) = (sol.grid.r_min(), sol.grid.r_max());
    let need = lo + 1e3 * data.mass_scale();
    if hi < need {
        return Err(SolveError::InsufficientTail { r_max: hi, need });
    }
    let start = sol.grid.first_index_at_or_above(lo + 0.1 * (hi - lo));
    let rs = &sol.grid.nodes()[start..];
    let vs = &sol.v[start..];
    let vrs = &sol.v_r[start..];
    let sup_r2_v = rs
        .iter()
        .zip(vs)
        .fold(0.0f64, |m, (r, v)| m.max(r * r * v.abs()));
    if vs.iter().all(|v| v.abs() <= f64::MIN_POSITIVE) {
        return Ok(AsymptoticReport {
            tail: (rs[0], hi),
            identically_zero: true,
            exponent_v: None,
            exponent_v_r: None,
            sup_r2_v,
            meets_decay: None,
        });
    }
    let exponent_v = decay_exponent(rs, vs);
    let exponent_v_r = decay_exponent(rs, vrs);
    let meets_decay = match (exponent_v, exponent_v_r) {
        (Some(a), Some(b)) => Some(a >= 1.9 && b >= 2.9),
        _ => None,
    };
    Ok(AsymptoticReport {
        tail: (rs[0], hi),
        identically_zero: false,
        exponent_v,
        exponent_v_r,
        sup_r2_v,
        meets_decay,
    })
}
