//! Grid-refinement study: every check evaluated on nested grid levels, with
//! convergence orders from successive halvings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;
use crate::fit::{decay_exponent, observed_orders};
use crate::geometry::{geometry_profile, mass_derivative_check};
use crate::jang_solver::{solve_on_grid, solver_grid, Boundary, SolverConfig};

/// One grid level with everything the checks read.
#[derive(Debug, Clone)]
pub struct Level {
    pub solution: JangSolution,
    pub geometry: GeometryProfile,
    pub terms: TermProfiles,
    pub identity: ResidualProfile,
    /// `|q - q_def|` in the induced metric over the window, sixth-order route.
    pub q_routes: Norms,
    /// `m_int - m` over all nodes.
    pub mass_integral: Norms,
    pub mass_derivative: Norms,
    pub bulk_min: f64,
    /// Smallest `mu - |J|`.
    pub dec_min: f64,
    /// `sup ||w| - |v||`.
    pub w_identity: f64,
}

impl Level {
    pub fn cells(&self) -> usize {
        self.solution.grid.cells()
    }

    pub fn window_start(&self) -> usize {
        self.identity.window_start
    }
}

pub fn check_levels(levels: &[usize]) -> Result<(), VerifyError> {
    let ok = levels.len() >= 3
        && levels[0] >= 2 * BOUNDARY_LAYER_CELLS
        && levels.windows(2).all(|w| w[1] == 2 * w[0]);
    if ok {
        Ok(())
    } else {
        Err(VerifyError::Levels(levels.to_vec()))
    }
}

/// Solves and evaluates every level; levels run concurrently and come back
/// in input order.
pub fn solve_levels(
    data: &InitialData,
    boundary: Boundary,
    config: &SolverConfig,
    levels: &[usize],
) -> Result<Vec<Level>, VerifyError> {
    check_levels(levels)?;
    let coarsest = solver_grid(
        data,
        &SolverConfig {
            cells: levels[0],
            ..config.clone()
        },
    )?;
    levels
        .par_iter()
        .map(|&cells| build_level(data, boundary, config, cells, &coarsest))
        .collect()
}

pub fn build_level(
    data: &InitialData,
    boundary: Boundary,
    config: &SolverConfig,
    cells: usize,
    coarsest: &RadialGrid,
) -> Result<Level, VerifyError> {
    let config = SolverConfig {
        cells,
        ..config.clone()
    };
    let grid = solver_grid(data, &config)?;
    let solution = solve_on_grid(data, boundary, &config, grid)?;
    evaluate_level(data, solution, coarsest)
}

pub fn evaluate_level(
    data: &InitialData,
    solution: JangSolution,
    coarsest: &RadialGrid,
) -> Result<Level, VerifyError> {
    let n = solution.v.len();
    let geometry = geometry_profile(data, &solution)?;
    let terms = term_profiles(data, &solution)?;
    let start = window_start(&solution.grid, coarsest);
    let identity = identity_residual(&solution, &geometry, &terms, start)?;
    let def = definitional_terms(data, &solution, &terms, 6)?;
    let route_gap: Vec<f64> = (0..n)
        .map(|i| (solution.v[i] * def.trace[i]).abs() / solution.gap[i].sqrt())
        .collect();
    let m_gap: Vec<f64> = geometry
        .m_int
        .iter()
        .zip(&geometry.m)
        .map(|(a, b)| a - b)
        .collect();
    let (sup, l2) = mass_derivative_check(&geometry, solution.grid.h(), start..n);
    let bulk = bulk_integrand(&solution, &terms);
    let w_identity = terms
        .w_norm
        .iter()
        .zip(&solution.v)
        .fold(0.0f64, |m, (w, v)| m.max((w - v.abs()).abs()));
    Ok(Level {
        q_routes: Norms::of(&route_gap, start..n),
        mass_integral: Norms::of(&m_gap, 0..n),
        mass_derivative: Norms { sup, l2 },
        bulk_min: bulk.iter().fold(f64::INFINITY, |m, b| m.min(*b)),
        dec_min: terms
            .mu
            .iter()
            .zip(&terms.j_norm)
            .fold(f64::INFINITY, |m, (mu, j)| m.min(mu - j)),
        w_identity,
        solution,
        geometry,
        terms,
        identity,
    })
}

// ---------------------------------------------------------------------------
// report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Finest level.
    pub norm_sup: f64,
    pub norm_l2: f64,
    /// Smallest observed order over successive halvings; absent when the
    /// check is not a convergence study or every level is at the floor.
    pub order: Option<f64>,
    pub tolerance: Option<f64>,
    pub required_order: Option<f64>,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub cells: usize,
    pub window_start_r: f64,
    pub identity: Norms,
    pub mass_integral: Norms,
    pub cross_residual_sup: f64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTerms {
    pub inner: f64,
    /// At the first node past the inner boundary.
    pub first_interior: f64,
    pub outer: f64,
    pub decay_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub applicable: bool,
    pub margin: f64,
    pub threshold: f64,
    pub reason: Option<String>,
    /// One entry per level, coarsest first.
    pub residuals: Vec<RigidityResiduals>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub levels: Vec<LevelSummary>,
    pub checks: Vec<CheckResult>,
    pub boundary: BoundaryTerms,
    pub rigidity: Option<RigidityReport>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    fn refresh(&mut self) {
        self.pass = self.checks.iter().all(|c| c.pass);
    }
}

/// Error ratios per halving and the smallest observed order, or `None`
/// when every level is at or below `floor`.
pub fn convergence(sups: &[f64], floor: f64) -> (Vec<f64>, Option<f64>) {
    let ratios: Vec<f64> = sups.windows(2).map(|w| w[0] / w[1]).collect();
    if sups.iter().all(|s| *s <= floor) {
        return (ratios, None);
    }
    let order = observed_orders(sups)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    (ratios, Some(order))
}

fn order_check(name: &str, per_level: &[Norms], floor: f64, tolerance: Option<f64>) -> CheckResult {
    let sups: Vec<f64> = per_level.iter().map(|n| n.sup).collect();
    let finest = per_level[per_level.len() - 1];
    let (_, order) = convergence(&sups, floor);
    let within = tolerance.map_or(true, |t| finest.sup <= t);
    let (pass, note) = match order {
        None => (true, Some(format!("at floor {floor:e} on every level"))),
        Some(p) => (p >= MIN_ORDER && within, None),
    };
    CheckResult {
        name: name.into(),
        norm_sup: finest.sup,
        norm_l2: finest.l2,
        order,
        tolerance,
        required_order: Some(MIN_ORDER),
        pass,
        note,
    }
}

fn gate_check(name: &str, per_level: &[Norms], tolerance: f64) -> CheckResult {
    let finest = per_level[per_level.len() - 1];
    CheckResult {
        name: name.into(),
        norm_sup: finest.sup,
        norm_l2: finest.l2,
        order: None,
        tolerance: Some(tolerance),
        required_order: None,
        pass: per_level.iter().all(|n| n.sup <= tolerance),
        note: None,
    }
}

/// Verification checks over the levels (coarsest first). `falloff_compliant`
/// decides whether the boundary-term decay is enforced.
pub fn verification_report(
    data: &InitialData,
    levels: &[Level],
    falloff_compliant: bool,
) -> VerificationReport {
    let scale = data.mass_scale();
    let finest = &levels[levels.len() - 1];
    let sol = &finest.solution;
    let mut checks = Vec::new();

    let t1: Vec<Norms> = levels
        .iter()
        .map(|l| Norms {
            sup: l.identity.sup,
            l2: l.identity.l2,
        })
        .collect();
    let sups: Vec<f64> = t1.iter().map(|n| n.sup).collect();
    let floor = IDENTITY_FLOOR / (scale * scale);
    let (ratios, order) = convergence(&sups, floor);
    let band = ratios
        .iter()
        .all(|q| (IDENTITY_RATIO.0..=IDENTITY_RATIO.1).contains(q));
    checks.push(CheckResult {
        name: "curvature_identity".into(),
        norm_sup: t1[t1.len() - 1].sup,
        norm_l2: t1[t1.len() - 1].l2,
        order,
        tolerance: None,
        required_order: Some(IDENTITY_RATIO.0.log2()),
        pass: order.is_none() || band,
        note: Some(format!(
            "error ratios per halving {:?}, admissible [{}, {}]",
            ratios, IDENTITY_RATIO.0, IDENTITY_RATIO.1
        )),
    });

    let per = |f: &dyn Fn(&Level) -> Norms| levels.iter().map(f).collect::<Vec<_>>();
    checks.push(order_check(
        "hawking_mass_integral",
        &per(&|l| l.mass_integral),
        RIGIDITY_FLOOR * scale,
        None,
    ));
    checks.push(order_check(
        "mass_derivative",
        &per(&|l| l.mass_derivative),
        RIGIDITY_FLOOR * scale,
        None,
    ));

    let cross = per(&|l| Norms {
        sup: l.solution.diagnostics.cross_residual_sup,
        l2: l.solution.diagnostics.cross_residual_l2,
    });
    checks.push(gate_check(
        "cross_residual",
        &cross,
        CROSS_RESIDUAL_GATE / scale,
    ));
    checks.push(gate_check(
        "q_routes",
        &per(&|l| l.q_routes),
        10.0 * CROSS_RESIDUAL_GATE / scale,
    ));
    checks.push(gate_check(
        "w_norm_identity",
        &per(&|l| Norms {
            sup: l.w_identity,
            l2: 0.0,
        }),
        4.0 * f64::EPSILON,
    ));

    let tau = BULK_TOLERANCE * scale;
    let bulk_min = levels.iter().fold(f64::INFINITY, |m, l| m.min(l.bulk_min));
    let dec_min = levels.iter().fold(f64::INFINITY, |m, l| m.min(l.dec_min));
    checks.push(CheckResult {
        name: "bulk_nonnegativity".into(),
        norm_sup: (-bulk_min).max(0.0),
        norm_l2: 0.0,
        order: None,
        tolerance: Some(tau),
        required_order: None,
        pass: bulk_min >= -tau,
        note: Some(format!(
            "min integrand {bulk_min:e}; min mu - |J| {dec_min:e}"
        )),
    });

    // boundary terms
    let b = &finest.terms.boundary;
    let last = b.len() - 1;
    let horizon_start = matches!(
        sol.boundary,
        Boundary::PastHorizon | Boundary::FutureHorizon
    ) || sol.phi[0] == 0.0;
    let inner_tol = INNER_BOUNDARY_TOLERANCE * scale;
    checks.push(CheckResult {
        name: "boundary_inner".into(),
        norm_sup: b[1].abs(),
        norm_l2: b[0].abs(),
        order: None,
        tolerance: horizon_start.then_some(inner_tol),
        required_order: None,
        pass: !horizon_start || b[1].abs() <= inner_tol,
        note: (!horizon_start)
            .then(|| "inner sphere is not a horizon; value recorded only".to_string()),
    });
    let (decay, decay_check) = boundary_decay(data, sol, b, falloff_compliant);
    checks.push(decay_check);

    let summaries = levels
        .iter()
        .map(|l| LevelSummary {
            cells: l.cells(),
            window_start_r: l.solution.r()[l.window_start()],
            identity: Norms {
                sup: l.identity.sup,
                l2: l.identity.l2,
            },
            mass_integral: l.mass_integral,
            cross_residual_sup: l.solution.diagnostics.cross_residual_sup,
            accepted_steps: l.solution.diagnostics.steps.accepted,
            rejected_steps: l.solution.diagnostics.steps.rejected,
        })
        .collect();
    let mut report = VerificationReport {
        levels: summaries,
        checks,
        boundary: BoundaryTerms {
            inner: b[0],
            first_interior: b[1],
            outer: b[last],
            decay_exponent: decay,
        },
        rigidity: None,
        pass: false,
    };
    report.refresh();
    report
}

fn boundary_decay(
    data: &InitialData,
    sol: &JangSolution,
    b: &[f64],
    compliant: bool,
) -> (Option<f64>, CheckResult) {
    let (lo, hi) = (sol.grid.r_min(), sol.grid.r_max());
    let mut check = CheckResult {
        name: "boundary_decay".into(),
        norm_sup: b[b.len() - 1].abs(),
        norm_l2: 0.0,
        order: None,
        tolerance: Some(BOUNDARY_DECAY_MIN),
        required_order: None,
        pass: true,
        note: None,
    };
    if hi < lo + 1e3 * data.mass_scale() {
        check.note = Some(format!("tail to r = {hi} too short for a decay fit"));
        return (None, check);
    }
    let start = sol.grid.first_index_at_or_above(lo + 0.1 * (hi - lo));
    if b[start..].iter().all(|x| *x == 0.0) {
        check.note = Some("identically zero on the tail".into());
        return (None, check);
    }
    let p = decay_exponent(&sol.r()[start..], &b[start..]);
    check.order = p;
    if compliant {
        check.pass = p.is_some_and(|p| p >= BOUNDARY_DECAY_MIN);
    } else {
        check.note = Some("data outside the fall-off class; exponent recorded only".into());
    }
    (p, check)
}

/// Equality-case residuals on every level, appended to `report` as checks
/// when the margin is close enough to zero.
pub fn rigidity_check(
    data: &InitialData,
    levels: &[Level],
    penrose: &PenroseReport,
    report: &mut VerificationReport,
) -> Result<(), VerifyError> {
    let scale = data.mass_scale();
    let threshold = (3.0 * penrose.uncertainty).max(1e-6 * scale);
    if !rigidity_applies(penrose, scale) {
        report.rigidity = Some(RigidityReport {
            applicable: false,
            margin: penrose.margin,
            threshold,
            reason: Some(format!(
                "margin {:e} exceeds {:e}: strict inequality, no equality case to check",
                penrose.margin, threshold
            )),
            residuals: Vec::new(),
        });
        return Ok(());
    }
    let residuals = levels
        .iter()
        .map(|l| {
            rigidity_residuals(
                data,
                &l.solution,
                &l.geometry,
                &l.terms,
                penrose.m_adm,
                l.window_start(),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    for k in 0..5 {
        let name = residuals[0].named()[k].0;
        let per: Vec<Norms> = residuals.iter().map(|r| r.named()[k].1).collect();
        report.checks.push(order_check(
            name,
            &per,
            RIGIDITY_FLOOR * scale,
            Some(RIGIDITY_TOLERANCE * scale),
        ));
    }
    report.rigidity = Some(RigidityReport {
        applicable: true,
        margin: penrose.margin,
        threshold,
        reason: None,
        residuals,
    });
    report.refresh();
    Ok(())
}
