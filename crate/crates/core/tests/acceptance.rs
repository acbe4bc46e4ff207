//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use common::{builtin, reversed_pg, sup, tight, wavy, TwoHorizon};
use jang_penrose_core::fit::observed_orders;
use jang_penrose_core::initial_data::{check_dec, check_falloff, InitialData};
use jang_penrose_core::jang_solver::{
    asymptotic_report, ode_rhs, solve, solver_grid, Boundary, Branch, JangSolution, SolveError,
    SolverConfig,
};
use jang_penrose_core::pipeline::{batch, read_batch, run, RunConfig, RunReport};
use jang_penrose_core::verifier::{
    build_level, convergence, penrose_report, rigidity_residuals, solve_levels,
    verification_report, Level, RIGIDITY_FLOOR,
};

// pinned tolerances
const C1_V: f64 = 1e-10;
const C1_MASS: f64 = 1e-8;
const C1_MARGIN: f64 = 1e-6;
const C1_RIGIDITY: f64 = 1e-8;
const C1_SECONDS: f64 = 1.0;
const C2_LEVELS: [usize; 3] = [2500, 5000, 10000];
const C2_TOL: f64 = 1e-3;
const C2_ORDER: f64 = 1.9;
const C2_SECONDS: f64 = 30.0;
const C3_MARGIN_FACTOR: f64 = 3.0;
const C3_MASS: f64 = 1.02;
const C4_BAND: (f64, f64) = (3.4, 4.6);
const C5_INNER: f64 = 1e-3;
const C5_DECAY: f64 = 0.9;
const C7_CROSS: f64 = 1e-6;
const C7_BRANCH: f64 = 1e-12;
const C8_V: f64 = 1.9;
const C8_V_R: f64 = 2.9;

const LEVELS: [usize; 3] = [1000, 2000, 4000];

/// Every accepted solve, for the global properties.
#[derive(Default)]
struct Seen {
    solves: usize,
    max_abs_v_interior: f64,
    max_cross: f64,
}

impl Seen {
    fn add(&mut self, s: &JangSolution) {
        self.add_parts(
            sup(s.v[1..].iter().copied()),
            s.diagnostics.cross_residual_sup,
        );
    }

    fn add_parts(&mut self, v: f64, cross: f64) {
        self.solves += 1;
        self.max_abs_v_interior = self.max_abs_v_interior.max(v);
        self.max_cross = self.max_cross.max(cross);
    }

    fn add_report(&mut self, r: &RunReport) {
        for l in r.comparable.solve.iter().flat_map(|s| &s.levels) {
            self.add_parts(l.max_abs_v_interior, l.diagnostics.cross_residual_sup);
        }
    }

    fn add_levels(&mut self, levels: &[Level]) {
        for l in levels {
            self.add(&l.solution);
        }
    }
}

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn config(json: serde_json::Value) -> RunConfig {
    serde_json::from_value(json).unwrap()
}

fn c1(seen: &mut Seen) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(serde_json::json!({
        "data": {"family": "schwarzschild-static", "params": {"M": 1.0}},
        "solver": {"rtol": 1e-12, "atol": 1e-14},
        "levels": [500, 1000, 2000],
    }));
    let t = Instant::now();
    let report = run(&cfg, dir.path());
    let seconds = t.elapsed().as_secs_f64();
    seen.add_report(&report);
    let s = &report.comparable;
    ensure!(
        s.exit_code == 0,
        "exit code {}: {:?}",
        s.exit_code,
        s.stages
    );
    let v = sup(s
        .solve
        .as_ref()
        .unwrap()
        .levels
        .iter()
        .map(|l| l.max_abs_v_interior));
    ensure!(v <= C1_V, "max |v| = {v:e}");
    let mut reader = csv::Reader::from_path(dir.path().join("geometry.csv")).unwrap();
    let col = reader
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == "m")
        .unwrap();
    let m = sup(reader
        .records()
        .map(|r| r.unwrap()[col].parse::<f64>().unwrap() - 1.0));
    ensure!(m <= C1_MASS, "sup |m - 1| = {m:e}");
    let margin = s.penrose.as_ref().unwrap().margin;
    ensure!(margin.abs() <= C1_MARGIN, "margin {margin:e}");
    let rigidity = s.verification.as_ref().unwrap().rigidity.as_ref().unwrap();
    ensure!(rigidity.applicable, "rigidity not applied");
    let worst = sup(rigidity
        .residuals
        .iter()
        .flat_map(|r| r.named().map(|(_, n)| n.sup)));
    ensure!(worst <= C1_RIGIDITY, "rigidity residual {worst:e}");
    ensure!(seconds < C1_SECONDS, "runtime {seconds:.3} s");
    Ok(format!(
        "max|v| {v:e}, sup|m-1| {m:e}, margin {margin:e}, rigidity {worst:e}, {seconds:.3} s"
    ))
}

fn min_order(sups: &[f64]) -> f64 {
    observed_orders(sups)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

fn c2(seen: &mut Seen) -> Outcome {
    let d = builtin("painleve-gullstrand", &[("M", 1.0)]);
    let cfg = tight();
    let coarsest = solver_grid(
        &d,
        &SolverConfig {
            cells: C2_LEVELS[0],
            ..cfg.clone()
        },
    )
    .unwrap();
    let mut levels = Vec::new();
    let mut slowest = 0.0f64;
    for cells in C2_LEVELS {
        let t = Instant::now();
        let level = build_level(&d, Boundary::PastHorizon, &cfg, cells, &coarsest)
            .map_err(|e| e.to_string())?;
        slowest = slowest.max(t.elapsed().as_secs_f64());
        levels.push(level);
    }
    seen.add_levels(&levels);
    let mass: Vec<f64> = levels
        .iter()
        .map(|l| sup(l.geometry.m_int.iter().map(|m| m - 1.0)))
        .collect();
    let phi: Vec<f64> = levels
        .iter()
        .map(|l| {
            sup(l
                .geometry
                .rho
                .iter()
                .zip(&l.solution.phi)
                .map(|(rho, phi)| phi - (1.0 - 2.0 / rho).sqrt()))
        })
        .collect();
    let last = levels.last().unwrap();
    let pen = penrose_report(&d, &last.solution, &last.geometry, &last.terms)
        .map_err(|e| e.to_string())?;
    let residuals: Vec<_> = levels
        .iter()
        .map(|l| {
            rigidity_residuals(
                &d,
                &l.solution,
                &l.geometry,
                &l.terms,
                pen.m_adm,
                l.window_start(),
            )
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;

    let (m_fine, m_order) = (mass[2], min_order(&mass));
    ensure!(
        m_fine <= C2_TOL,
        "sup |m - 1| = {m_fine:e} at {} cells",
        C2_LEVELS[2]
    );
    ensure!(m_order >= C2_ORDER, "mass order {m_order:.3} ({mass:?})");
    let mut parts = vec![format!("sup|m-1| {m_fine:.2e} order {m_order:.2}")];
    for name in ["rigidity_q", "rigidity_deficit", "rigidity_energy"] {
        let sups: Vec<f64> = residuals
            .iter()
            .map(|r| {
                r.named()
                    .into_iter()
                    .find(|(n, _)| *n == name)
                    .unwrap()
                    .1
                    .sup
            })
            .collect();
        let (_, order) = convergence(&sups, RIGIDITY_FLOOR);
        ensure!(sups[2] <= C2_TOL, "{name} = {:e}", sups[2]);
        match order {
            Some(o) => {
                ensure!(o >= C2_ORDER, "{name} order {o:.3} ({sups:?})");
                parts.push(format!("{name} {:.2e} order {o:.2}", sups[2]));
            }
            None => parts.push(format!("{name} {:.1e} at floor", sups[2])),
        }
    }
    ensure!(
        phi[2] <= C2_TOL,
        "sup |phi - sqrt(1 - 2/rho)| = {:e}",
        phi[2]
    );
    parts.push(format!("phi {:.2e}", phi[2]));
    ensure!(slowest < C2_SECONDS, "slowest level {slowest:.2} s");
    parts.push(format!("slowest level {slowest:.2} s"));
    Ok(parts.join(", "))
}

fn c3(seen: &mut Seen) -> Outcome {
    let d = builtin("bumped-conformal", &[("M", 1.0), ("eps", 0.01)]);
    let levels =
        solve_levels(&d, Boundary::Alpha(0.0), &tight(), &LEVELS).map_err(|e| e.to_string())?;
    seen.add_levels(&levels);
    let last = levels.last().unwrap();
    let dec = check_dec(&d, &last.solution.grid).unwrap();
    ensure!(dec.pass, "DEC fails: {dec:?}");
    let p = penrose_report(&d, &last.solution, &last.geometry, &last.terms)
        .map_err(|e| e.to_string())?;
    ensure!(
        p.margin > C3_MARGIN_FACTOR * p.uncertainty,
        "margin {:e} vs uncertainty {:e}",
        p.margin,
        p.uncertainty
    );
    let err = (p.m_adm - C3_MASS).abs();
    ensure!(
        err <= p.m_adm_uncertainty,
        "M_ADM = {} (+- {:e})",
        p.m_adm,
        p.m_adm_uncertainty
    );
    Ok(format!(
        "margin {:.6} > 3 x {:.1e}, M_ADM {:.10} +- {:.1e}, min(mu-|J|) {:.1e}",
        p.margin, p.uncertainty, p.m_adm, p.m_adm_uncertainty, dec.min_margin
    ))
}

fn families() -> Vec<(&'static str, InitialData, Boundary)> {
    vec![
        (
            "static",
            builtin("schwarzschild-static", &[]),
            Boundary::Alpha(0.0),
        ),
        (
            "bumped",
            builtin("bumped-conformal", &[("eps", 0.01)]),
            Boundary::Alpha(0.0),
        ),
        (
            "pg",
            builtin("painleve-gullstrand", &[]),
            Boundary::PastHorizon,
        ),
    ]
}

fn c4(seen: &mut Seen) -> Outcome {
    let mut parts = Vec::new();
    for (name, d, b) in families() {
        let levels = solve_levels(&d, b, &tight(), &LEVELS).map_err(|e| format!("{name}: {e}"))?;
        seen.add_levels(&levels);
        let sups: Vec<f64> = levels.iter().map(|l| l.identity.sup).collect();
        let ratios: Vec<f64> = sups.windows(2).map(|w| w[0] / w[1]).collect();
        ensure!(
            ratios.iter().all(|r| (C4_BAND.0..=C4_BAND.1).contains(r)),
            "{name}: ratios {ratios:?} (sups {sups:?})"
        );
        parts.push(format!("{name} {:.3}/{:.3}", ratios[0], ratios[1]));
    }
    Ok(format!("ratios {}", parts.join(", ")))
}

fn c5(seen: &mut Seen) -> Outcome {
    let mut parts = Vec::new();
    let starts = [
        (
            "pg",
            builtin("painleve-gullstrand", &[]),
            Boundary::PastHorizon,
            Branch::ThetaMinus,
        ),
        (
            "reversed-pg",
            reversed_pg(),
            Boundary::FutureHorizon,
            Branch::ThetaPlus,
        ),
    ];
    for (name, d, b, branch) in starts {
        let cfg = SolverConfig { branch, ..tight() };
        let levels = solve_levels(&d, b, &cfg, &LEVELS).map_err(|e| format!("{name}: {e}"))?;
        seen.add_levels(&levels);
        let r = verification_report(&d, &levels, false);
        let first = r.boundary.first_interior.abs();
        ensure!(
            first <= C5_INNER * d.mass_scale(),
            "{name}: |B| at first interior node {first:e}"
        );
        parts.push(format!("{name} |B(r1)| {first:.1e}"));
    }
    let d = wavy(true);
    let falloff = check_falloff(&d).unwrap();
    ensure!(
        falloff.pass,
        "balanced wavy data not fall-off compliant: {falloff:?}"
    );
    let levels =
        solve_levels(&d, Boundary::Alpha(0.5), &tight(), &LEVELS).map_err(|e| e.to_string())?;
    seen.add_levels(&levels);
    let r = verification_report(&d, &levels, true);
    let p = r.boundary.decay_exponent.ok_or("no decay fit for B")?;
    ensure!(p >= C5_DECAY, "B decay exponent {p}");
    parts.push(format!("B decay exponent {p:.3}"));
    Ok(parts.join(", "))
}

fn c6(seen: &Seen) -> Outcome {
    let d = InitialData::from_profile(std::sync::Arc::new(TwoHorizon), 1.0, "two-horizon");
    for alpha in [-0.5, 0.0, 0.5] {
        match solve(
            &d,
            Boundary::Alpha(alpha),
            &SolverConfig {
                cells: 512,
                ..tight()
            },
        ) {
            Err(SolveError::APrioriViolation { .. }) => {}
            Err(e) => return Err(format!("alpha {alpha}: unexpected error {e}")),
            Ok(_) => return Err(format!("alpha {alpha}: returned a solution")),
        }
    }
    ensure!(
        seen.max_abs_v_interior < 1.0,
        "interior |v| = {} over {} solves",
        seen.max_abs_v_interior,
        seen.solves
    );
    Ok(format!(
        "two-horizon data rejected for alpha in {{-0.5, 0, 0.5}}; 1 - max interior |v| = {:.2e} over {} solves",
        1.0 - seen.max_abs_v_interior,
        seen.solves
    ))
}

fn c7(seen: &Seen) -> Outcome {
    ensure!(
        seen.max_cross <= C7_CROSS,
        "cross residual {:e}",
        seen.max_cross
    );
    let data = [
        builtin("painleve-gullstrand", &[]),
        builtin("bumped-conformal", &[("eps", 0.05)]),
        wavy(false),
        reversed_pg(),
    ];
    let mut worst = 0.0f64;
    let mut probes = 0;
    for d in &data {
        for r in [0.05, 0.5, 1.0, 3.0, 10.0, 100.0, 1000.0] {
            for v in [-0.9, -0.5, -0.1, 0.0, 0.3, 0.7, 0.95] {
                let a = ode_rhs(d, r, v, Branch::ThetaMinus).map_err(|e| e.to_string())?;
                let b = ode_rhs(d, r, v, Branch::ThetaPlus).map_err(|e| e.to_string())?;
                let scale = a.abs().max(b.abs());
                let rel = if scale == 0.0 {
                    0.0
                } else {
                    (a - b).abs() / scale
                };
                ensure!(rel <= C7_BRANCH, "{} r={r} v={v}: {a} vs {b}", d.label());
                worst = worst.max(rel);
                probes += 1;
            }
        }
    }
    Ok(format!(
        "cross residual {:.1e} over {} solves, branch mismatch {worst:.1e} over {probes} probes",
        seen.max_cross, seen.solves
    ))
}

fn c8(seen: &mut Seen) -> Outcome {
    let mut parts = Vec::new();
    for (name, d) in [
        ("balanced-wavy", wavy(true)),
        ("flat", builtin("flat", &[])),
    ] {
        let falloff = check_falloff(&d).unwrap();
        ensure!(falloff.pass, "{name} not fall-off compliant");
        for alpha in [-0.5, 0.0, 0.5] {
            let sol = solve(&d, Boundary::Alpha(alpha), &tight())
                .map_err(|e| format!("{name} {alpha}: {e}"))?;
            seen.add(&sol);
            let a = asymptotic_report(&d, &sol).map_err(|e| e.to_string())?;
            if a.identically_zero {
                parts.push(format!("{name} {alpha}: v = 0"));
                continue;
            }
            let (ev, er) = (
                a.exponent_v.unwrap_or(f64::NAN),
                a.exponent_v_r.unwrap_or(f64::NAN),
            );
            ensure!(
                ev >= C8_V && er >= C8_V_R,
                "{name} alpha {alpha}: exponents {ev}, {er}"
            );
            parts.push(format!("{name} {alpha}: {ev:.2}/{er:.2}"));
        }
    }
    Ok(parts.join(", "))
}

fn c9(seen: &mut Seen) -> Outcome {
    let suite = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/suite.json");
    let configs = read_batch(&suite).map_err(|e| e.to_string())?;
    let a = batch(&configs, 1, tempfile::tempdir().unwrap().path());
    let b = batch(&configs, 4, tempfile::tempdir().unwrap().path());
    for r in &a.comparable.runs {
        for l in r.report.solve.iter().flat_map(|s| &s.levels) {
            seen.add_parts(l.max_abs_v_interior, l.diagnostics.cross_residual_sup);
        }
    }
    let (ja, jb) = (
        serde_json::to_string_pretty(&a.comparable).unwrap(),
        serde_json::to_string_pretty(&b.comparable).unwrap(),
    );
    ensure!(ja == jb, "comparable sections differ");
    Ok(format!(
        "{} runs, {} bytes identical, batch exit {}",
        a.comparable.runs.len(),
        ja.len(),
        a.comparable.exit_code
    ))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let mut seen = Seen::default();
    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    results.push((1, "static equality case", guarded(|| c1(&mut seen))));
    results.push((2, "dynamical equality case", guarded(|| c2(&mut seen))));
    results.push((3, "strict inequality", guarded(|| c3(&mut seen))));
    results.push((
        4,
        "curvature identity convergence",
        guarded(|| c4(&mut seen)),
    ));
    results.push((5, "boundary terms", guarded(|| c5(&mut seen))));
    results.push((8, "asymptotic decay", guarded(|| c8(&mut seen))));
    results.push((9, "batch determinism", guarded(|| c9(&mut seen))));
    results.push((6, "a priori bound and failure mode", guarded(|| c6(&seen))));
    results.push((7, "equation-form consistency", guarded(|| c7(&seen))));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (k, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {k} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {k} FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
