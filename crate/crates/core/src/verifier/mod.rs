//! Checks of the deformed geometry against the scalar-curvature identity,
//! the boundary-term cancellations, the mass/area inequality and its
//! equality case.
//!
//! On a solution the second fundamental form deficit `h - K` of the graph is
//! diagonal with angular eigenvalue
//!
//! ```text
//! lambda_theta = sqrt(g^11) v rho_r / rho - kb
//! ```
//!
//! and the equation forces the radial eigenvalue to be `-2 lambda_theta`.
//! The 1-form `q` has the single component
//! `q_1 = -2 sqrt(g11) v lambda_theta / (1 - v^2)`, and the flux of `phi q`
//! through the sphere of radius `r` is `-B(r)` with
//! `B(r) = 2 rho^2 rho_r sqrt(g^11) v lambda_theta`.

mod study;

pub use study::*;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{adm_mass, GeometryError, GeometryProfile};
use crate::grid::{cumulative_trapezoid, d_dxi_2, norms, simpson, RadialGrid};
use crate::initial_data::{energy_momentum_at, DataError, InitialData, RadialPoint};
use crate::jang_solver::{log_phi_derivative, JangSolution, SolveError, CROSS_RESIDUAL_GATE};

/// Grid cells (of the coarsest level) excluded next to the inner boundary.
pub const BOUNDARY_LAYER_CELLS: usize = 10;
/// Smallest `phi` allowed inside the evaluation window.
pub const MIN_WINDOW_PHI: f64 = 1e-14;
/// Bulk integrand floor, in units of the mass scale.
pub const BULK_TOLERANCE: f64 = 1e-8;
/// Residuals below this (times the mass scale) count as exact.
pub const RIGIDITY_FLOOR: f64 = 1e-8;
/// Largest finest-level rigidity residual accepted when it converges.
pub const RIGIDITY_TOLERANCE: f64 = 1e-3;
pub const MIN_ORDER: f64 = 1.9;
/// Admissible error ratio per grid halving for the curvature identity.
pub const IDENTITY_RATIO: (f64, f64) = (3.4, 4.6);
/// Residuals of the curvature identity below this count as exact.
pub const IDENTITY_FLOOR: f64 = 1e-9;
/// `|B|` at the inner boundary of a horizon start, in mass-scale units.
pub const INNER_BOUNDARY_TOLERANCE: f64 = 1e-3;
pub const BOUNDARY_DECAY_MIN: f64 = 0.9;
/// Relative floor of the margin uncertainty.
pub const MARGIN_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("1 - v^2 = {gap} at interior r = {r}")]
    Blowup { r: f64, gap: f64 },
    #[error("phi = {phi} < {MIN_WINDOW_PHI} at r = {r} inside the evaluation window")]
    PhiTooSmall { r: f64, phi: f64 },
    #[error("trace of h - K violated: sup |lambda_r + 2 lambda_theta| = {sup} > {gate}")]
    TraceViolation { sup: f64, gate: f64 },
    #[error("mass change {direct} disagrees with the bulk decomposition {decomposed} (tolerance {tolerance})")]
    Decomposition {
        direct: f64,
        decomposed: f64,
        tolerance: f64,
    },
    #[error("refinement levels {0:?} must be at least three, each doubling the previous")]
    Levels(Vec<usize>),
}

// ---------------------------------------------------------------------------
// pointwise terms

/// Angular eigenvalue of `h - K`.
pub fn angular_deficit(p: &RadialPoint, v: f64) -> f64 {
    p.sqrt_ginv() * v * p.rho_r / p.rho - p.kb
}

/// `(radial, angular)` eigenvalues of `h - K` with the radial one fixed by
/// the trace-free equation.
pub fn deficit_components(p: &RadialPoint, v: f64) -> (f64, f64) {
    let a = angular_deficit(p, v);
    (-2.0 * a, a)
}

/// `|h - K|^2` from its eigenvalues.
pub fn deficit_norm2(radial: f64, angular: f64) -> f64 {
    radial * radial + 2.0 * angular * angular
}

/// Radial component of `q`; undefined where `1 - v^2 = 0`.
pub fn q_component(p: &RadialPoint, v: f64, gap: f64, r: f64) -> Result<f64, VerifyError> {
    if !(gap > 0.0) {
        return Err(VerifyError::Blowup { r, gap });
    }
    Ok(-2.0 * p.g11().sqrt() * v * angular_deficit(p, v) / gap)
}

/// `|q|^2` in the induced metric, `4 v^2 lambda_theta^2 / (1 - v^2)`. At a
/// horizon both `lambda_theta` and `1 - v^2` vanish to first order and the
/// value there is the limit 0.
pub fn q_norm2(p: &RadialPoint, v: f64, gap: f64) -> f64 {
    let a = angular_deficit(p, v);
    if gap == 0.0 {
        return 0.0;
    }
    4.0 * v * v * a * a / gap
}

/// `(J(w), |w|_g)` for `w^1 = sqrt(g^11) v`.
pub fn current_pairing(p: &RadialPoint, j1: f64, v: f64) -> (f64, f64) {
    let w1 = p.sqrt_ginv() * v;
    if w1 == 0.0 {
        // also covers g^11 = 0, where g11 is infinite
        return (0.0, 0.0);
    }
    (j1 * w1, (p.g11() * w1 * w1).sqrt())
}

/// `B(r) = 2 rho^2 rho_r sqrt(g^11) v lambda_theta`; the flux of `phi q`
/// through the sphere is `-B`.
pub fn boundary_integrand(p: &RadialPoint, v: f64) -> f64 {
    2.0 * p.rho * p.rho * p.rho_r * p.sqrt_ginv() * v * angular_deficit(p, v)
}

// ---------------------------------------------------------------------------
// profiles

/// Closed-form terms of the curvature identity at every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermProfiles {
    pub mu: Vec<f64>,
    pub j_norm: Vec<f64>,
    pub j_w: Vec<f64>,
    pub w_norm: Vec<f64>,
    pub lambda_theta: Vec<f64>,
    /// `None` where `1 - v^2 = 0` (the inner node of a horizon start).
    pub q1: Vec<Option<f64>>,
    pub q_norm2: Vec<f64>,
    pub deficit_norm2: Vec<f64>,
    pub boundary: Vec<f64>,
    pub rho_r: Vec<f64>,
}

pub fn term_profiles(data: &InitialData, sol: &JangSolution) -> Result<TermProfiles, VerifyError> {
    let n = sol.v.len();
    let mut t = TermProfiles {
        mu: Vec::with_capacity(n),
        j_norm: Vec::with_capacity(n),
        j_w: Vec::with_capacity(n),
        w_norm: Vec::with_capacity(n),
        lambda_theta: Vec::with_capacity(n),
        q1: Vec::with_capacity(n),
        q_norm2: Vec::with_capacity(n),
        deficit_norm2: Vec::with_capacity(n),
        boundary: Vec::with_capacity(n),
        rho_r: Vec::with_capacity(n),
    };
    for (i, &r) in sol.r().iter().enumerate() {
        let p = data.eval(r)?;
        let (v, gap) = (sol.v[i], sol.gap[i]);
        let em = energy_momentum_at(&p);
        let (j_w, w_norm) = current_pairing(&p, em.j1, v);
        let (rad, ang) = deficit_components(&p, v);
        let q1 = match q_component(&p, v, gap, r) {
            Ok(q) => Some(q),
            Err(e) if i > 0 => return Err(e),
            Err(_) => None,
        };
        t.mu.push(em.mu);
        t.j_norm.push(em.j_norm);
        t.j_w.push(j_w);
        t.w_norm.push(w_norm);
        t.lambda_theta.push(ang);
        t.q1.push(q1);
        t.q_norm2.push(q_norm2(&p, v, gap));
        t.deficit_norm2.push(deficit_norm2(rad, ang));
        t.boundary.push(boundary_integrand(&p, v));
        t.rho_r.push(p.rho_r);
    }
    Ok(t)
}

/// `h - K` and `q` assembled from their definitions, with the radial
/// eigenvalue `sqrt(g^11) v_r + sqrt(g^11) v (1 - v^2) phi_r / phi - (1 - v^2) ka`
/// read off the solution instead of the trace-free equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefinitionalTerms {
    /// Stencil order used for `phi_r / phi`.
    pub order: usize,
    pub lambda_r: Vec<f64>,
    /// `lambda_r + 2 lambda_theta`.
    pub trace: Vec<f64>,
    pub q1: Vec<Option<f64>>,
    /// `|q|` in the induced metric.
    pub q_norm: Vec<f64>,
    /// `|h - K|` in the induced metric.
    pub deficit_norm: Vec<f64>,
}

/// Node 0 carries zeros: `phi_r / phi` is not reconstructed there.
pub fn definitional_terms(
    data: &InitialData,
    sol: &JangSolution,
    terms: &TermProfiles,
    order: usize,
) -> Result<DefinitionalTerms, VerifyError> {
    let n = sol.v.len();
    let dl = log_phi_derivative(&sol.grid, &sol.phi, order);
    let mut d = DefinitionalTerms {
        order,
        lambda_r: vec![0.0; n],
        trace: vec![0.0; n],
        q1: vec![None; n],
        q_norm: vec![0.0; n],
        deficit_norm: vec![0.0; n],
    };
    for i in 1..n {
        let p = data.eval(sol.r()[i])?;
        let ia = p.sqrt_ginv();
        let (v, gap) = (sol.v[i], sol.gap[i]);
        let lr = ia * sol.v_r[i] + ia * v * gap * dl[i] - gap * p.ka;
        let la = terms.lambda_theta[i];
        d.lambda_r[i] = lr;
        d.trace[i] = lr + 2.0 * la;
        d.q1[i] = Some(p.g11().sqrt() * v * lr / gap);
        d.q_norm[i] = (v * lr).abs() / gap.sqrt();
        d.deficit_norm[i] = deficit_norm2(lr, la).sqrt();
    }
    let gate = 10.0 * CROSS_RESIDUAL_GATE / data.mass_scale();
    let (sup, _) = norms(&d.trace, 1..n);
    if order >= 6 && sup > gate {
        return Err(VerifyError::TraceViolation { sup, gate });
    }
    Ok(d)
}

// ---------------------------------------------------------------------------
// curvature identity

/// First node of the evaluation window: at or beyond the radius of node
/// [`BOUNDARY_LAYER_CELLS`] of `coarsest`.
pub fn window_start(grid: &RadialGrid, coarsest: &RadialGrid) -> usize {
    let k = BOUNDARY_LAYER_CELLS.min(coarsest.cells());
    grid.first_index_at_or_above(coarsest.nodes()[k]).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualProfile {
    /// Zero outside the window.
    pub profile: Vec<f64>,
    pub window_start: usize,
    pub sup: f64,
    pub l2: f64,
}

/// `Rbar - [16 pi (mu - J(w)) + |h - K|^2 + 2 |q|^2 - 2 phi^-1 div(phi q)]`
/// with `phi^-1 div(phi q) = -B_r / (rho^2 rho_r)`.
pub fn identity_residual(
    sol: &JangSolution,
    geo: &GeometryProfile,
    terms: &TermProfiles,
    start: usize,
) -> Result<ResidualProfile, VerifyError> {
    let n = sol.v.len();
    let db = d_dxi_2(&terms.boundary, sol.grid.h());
    let jac = sol.grid.jacobian();
    let mut profile = vec![0.0; n];
    for i in start..n {
        if !(sol.phi[i] >= MIN_WINDOW_PHI) {
            return Err(VerifyError::PhiTooSmall {
                r: sol.r()[i],
                phi: sol.phi[i],
            });
        }
        let rho = geo.rho[i];
        let div = -db[i] / (jac[i] * rho * rho * terms.rho_r[i]);
        let rhs = 16.0 * PI * (terms.mu[i] - terms.j_w[i])
            + terms.deficit_norm2[i]
            + 2.0 * terms.q_norm2[i]
            - 2.0 * div;
        profile[i] = geo.rbar[i] - rhs;
    }
    let (sup, l2) = norms(&profile, start..n);
    Ok(ResidualProfile {
        profile,
        window_start: start,
        sup,
        l2,
    })
}

/// `phi [16 pi (mu - J(w)) + |h - K|^2 + 2 |q|^2]` at every node.
pub fn bulk_integrand(sol: &JangSolution, terms: &TermProfiles) -> Vec<f64> {
    (0..sol.v.len())
        .map(|i| {
            sol.phi[i]
                * (16.0 * PI * (terms.mu[i] - terms.j_w[i])
                    + terms.deficit_norm2[i]
                    + 2.0 * terms.q_norm2[i])
        })
        .collect()
}

// ---------------------------------------------------------------------------
// mass/area inequality

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// `4 pi int phi (mu - J(w)) rho^2 ds`
    pub energy: f64,
    /// `1/4 int phi |h - K|^2 rho^2 ds`
    pub deficit: f64,
    /// `1/2 int phi |q|^2 rho^2 ds`
    pub q: f64,
    /// `(B(outer) - B(inner)) / 2`
    pub divergence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenroseReport {
    pub m_adm: f64,
    pub m_adm_uncertainty: f64,
    pub area: f64,
    pub margin: f64,
    /// ADM extrapolation spread plus the end-point gap between the integrated
    /// and pointwise mass profiles.
    pub uncertainty: f64,
    pub verdict: Verdict,
    pub boundary_inner: f64,
    pub boundary_outer: f64,
    pub decomposition: Decomposition,
    /// `m(outer) - m(inner)` from the pointwise mass.
    pub mass_change: f64,
    /// Sum of the decomposition.
    pub decomposed_change: f64,
    /// Simpson minus trapezoid, summed over the bulk terms.
    pub quadrature_uncertainty: f64,
    /// `|m(inner) - sqrt(A / 16 pi)|`; zero when the inner sphere is minimal.
    pub inner_mass_defect: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BulkDecomposition {
    pub decomposition: Decomposition,
    pub mass_change: f64,
    pub decomposed_change: f64,
    pub quadrature_uncertainty: f64,
}

/// `m(outer) - m(inner)` from the pointwise mass and from the integrated
/// curvature identity. Bulk integrals are Simpson in `xi` using
/// `phi ds = rho_r dr`.
pub fn bulk_decomposition(
    sol: &JangSolution,
    geo: &GeometryProfile,
    terms: &TermProfiles,
) -> BulkDecomposition {
    let n = sol.v.len();
    let last = n - 1;
    let jac = sol.grid.jacobian();
    let weight: Vec<f64> = (0..n)
        .map(|i| terms.rho_r[i] * jac[i] * geo.rho[i] * geo.rho[i])
        .collect();
    let h = sol.grid.h();
    let integrate = |f: &dyn Fn(usize) -> f64| {
        let g: Vec<f64> = (0..n).map(|i| f(i) * weight[i]).collect();
        let s = simpson(&g, h);
        let t = cumulative_trapezoid(&g, h)[last];
        (s, (s - t).abs())
    };
    let (energy, ue) = integrate(&|i| 4.0 * PI * (terms.mu[i] - terms.j_w[i]));
    let (deficit, ud) = integrate(&|i| 0.25 * terms.deficit_norm2[i]);
    let (q, uq) = integrate(&|i| 0.5 * terms.q_norm2[i]);
    let divergence = 0.5 * (terms.boundary[last] - terms.boundary[0]);
    BulkDecomposition {
        decomposition: Decomposition {
            energy,
            deficit,
            q,
            divergence,
        },
        mass_change: geo.m[last] - geo.m[0],
        decomposed_change: energy + deficit + q + divergence,
        quadrature_uncertainty: ue + ud + uq,
    }
}

/// Mass/area margin and the bulk decomposition of the mass change.
pub fn penrose_report(
    data: &InitialData,
    sol: &JangSolution,
    geo: &GeometryProfile,
    terms: &TermProfiles,
) -> Result<PenroseReport, VerifyError> {
    let scale = data.mass_scale();
    let n = sol.v.len();
    let last = n - 1;
    let adm = adm_mass(geo, scale)?;
    let area = geo.area[0];
    let bound = (area / (16.0 * PI)).sqrt();
    let margin = adm.value - bound;
    let profile_gap = (geo.m_int[last] - geo.m[last]).abs();
    let uncertainty = adm.uncertainty + profile_gap + MARGIN_FLOOR * scale;

    let bulk = bulk_decomposition(sol, geo, terms);
    let tolerance = bulk.quadrature_uncertainty + MARGIN_FLOOR * scale.max(bulk.mass_change.abs());
    if !((bulk.mass_change - bulk.decomposed_change).abs() <= tolerance) {
        return Err(VerifyError::Decomposition {
            direct: bulk.mass_change,
            decomposed: bulk.decomposed_change,
            tolerance,
        });
    }
    Ok(PenroseReport {
        m_adm: adm.value,
        m_adm_uncertainty: adm.uncertainty,
        area,
        margin,
        uncertainty,
        verdict: if margin >= -uncertainty {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        boundary_inner: terms.boundary[0],
        boundary_outer: terms.boundary[last],
        decomposition: bulk.decomposition,
        mass_change: bulk.mass_change,
        decomposed_change: bulk.decomposed_change,
        quadrature_uncertainty: bulk.quadrature_uncertainty,
        inner_mass_defect: (geo.m[0] - bound).abs(),
        cells: sol.grid.cells(),
    })
}

// ---------------------------------------------------------------------------
// equality case

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub sup: f64,
    pub l2: f64,
}

impl Norms {
    pub fn of(values: &[f64], range: std::ops::Range<usize>) -> Self {
        let (sup, l2) = norms(values, range);
        Norms { sup, l2 }
    }
}

/// Residuals of the equality characterization over the evaluation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityResiduals {
    /// `mu - J(w)`
    pub energy: Norms,
    /// `|h - K|`, definitional
    pub deficit: Norms,
    /// `|q|`, definitional
    pub q: Norms,
    /// `phi - sqrt(1 - 2M/rho)`
    pub warping: Norms,
    /// `gbar_rho_rho (1 - 2M/rho) - 1`
    pub metric: Norms,
}

impl RigidityResiduals {
    pub fn named(&self) -> [(&'static str, Norms); 5] {
        [
            ("rigidity_energy", self.energy),
            ("rigidity_deficit", self.deficit),
            ("rigidity_q", self.q),
            ("rigidity_warping", self.warping),
            ("rigidity_metric", self.metric),
        ]
    }
}

/// Whether a margin is close enough to zero for the equality analysis.
pub fn rigidity_applies(report: &PenroseReport, scale: f64) -> bool {
    report.margin.abs() <= (3.0 * report.uncertainty).max(1e-6 * scale)
}

/// Residuals against Schwarzschild of mass `m_adm`, using second-order
/// definitional `h - K` and `q`.
pub fn rigidity_residuals(
    data: &InitialData,
    sol: &JangSolution,
    geo: &GeometryProfile,
    terms: &TermProfiles,
    m_adm: f64,
    start: usize,
) -> Result<RigidityResiduals, VerifyError> {
    let n = sol.v.len();
    let def = definitional_terms(data, sol, terms, 2)?;
    let energy: Vec<f64> = (0..n).map(|i| terms.mu[i] - terms.j_w[i]).collect();
    let lapse2: Vec<f64> = geo
        .rho
        .iter()
        .map(|rho| (1.0 - 2.0 * m_adm / rho).max(0.0))
        .collect();
    let warping: Vec<f64> = (0..n).map(|i| sol.phi[i] - lapse2[i].sqrt()).collect();
    let metric: Vec<f64> = (0..n)
        .map(|i| lapse2[i] / (sol.phi[i] * sol.phi[i]) - 1.0)
        .collect();
    Ok(RigidityResiduals {
        energy: Norms::of(&energy, start..n),
        deficit: Norms::of(&def.deficit_norm, start..n),
        q: Norms::of(&def.q_norm, start..n),
        warping: Norms::of(&warping, start..n),
        metric: Norms::of(&metric, start..n),
    })
}
