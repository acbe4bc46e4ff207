//! Staged runs: validate, solve, geometry, verify, penrose. A failing stage
//! stops the ones after it; the partial report is still written.

mod config;
mod emit;
mod report;


use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::*;
pub use emit::*;
pub use report::*;

use crate::geometry::{geometry_profile, GeometryError, GeometryProfile};
use crate::initial_data::{
    check_dec, check_falloff, classify_horizon, DataDescriptor, DataError, HorizonKind, InitialData,
};
use crate::jang_solver::{
    asymptotic_report, solve_on_grid, solver_grid, JangSolution, SolveError, SolverConfig,
};
use crate::verifier::{
    evaluate_level, penrose_report, rigidity_check, verification_report, Level, Verdict,
    VerifyError,
};

const STAGES: [Stage; 6] = [
    Stage::Validate,
    Stage::Solve,
    Stage::Geometry,
    Stage::Verify,
    Stage::Penrose,
    Stage::Emit,
];

pub fn solve_exit_code(e: &SolveError) -> u8 {
    match e {
        SolveError::Data(_)
        | SolveError::Grid(_)
        | SolveError::InvalidConfig(_)
        | SolveError::InvalidBoundary(_)
        | SolveError::PerturbData { .. }
        | SolveError::InsufficientTail { .. }
        | SolveError::NonPositiveRadius { .. } => EXIT_INVALID_INPUT,
        _ => EXIT_SOLVER_FAILED,
    }
}

pub fn verify_exit_code(e: &VerifyError) -> u8 {
    match e {
        VerifyError::Data(_) | VerifyError::Levels(_) => EXIT_INVALID_INPUT,
        VerifyError::Geometry(GeometryError::Data(_) | GeometryError::InsufficientTail { .. }) => {
            EXIT_INVALID_INPUT
        }
        VerifyError::Solve(s) => solve_exit_code(s),
        VerifyError::TraceViolation { .. } | VerifyError::Decomposition { .. } => EXIT_CHECK_FAILED,
        VerifyError::Geometry(_) | VerifyError::Blowup { .. } | VerifyError::PhiTooSmall { .. } => {
            EXIT_SOLVER_FAILED
        }
    }
}

/// Outcome of validating one data set without solving.
#[derive(Debug, Clone)]
pub struct ValidateOutcome {
    pub report: Option<ValidationReport>,
    pub exit_code: u8,
    pub message: Option<String>,
    pub warnings: Vec<String>,
}

/// Energy condition and fall-off on the grid the solver would use.
pub fn validate_data(data: &InitialData, config: &SolverConfig) -> ValidateOutcome {
    let mut out = ValidateOutcome {
        report: None,
        exit_code: EXIT_PASS,
        message: None,
        warnings: Vec::new(),
    };
    let grid = match config.validate().and_then(|_| solver_grid(data, config)) {
        Ok(g) => g,
        Err(e) => {
            out.exit_code = EXIT_INVALID_INPUT;
            out.message = Some(e.to_string());
            return out;
        }
    };
    let dec = match check_dec(data, &grid) {
        Ok(d) => d,
        Err(e) => {
            out.exit_code = EXIT_INVALID_INPUT;
            out.message = Some(e.to_string());
            return out;
        }
    };
    let falloff = match check_falloff(data) {
        Ok(f) => {
            for c in f.clauses.iter().filter(|c| !c.pass) {
                out.warnings.push(format!(
                    "fall-off `{}` not met: fitted exponent {:?}, required {}",
                    c.name, c.exponent, c.required
                ));
            }
            Some(f)
        }
        Err(e @ DataError::InsufficientTail { .. }) => {
            out.warnings.push(format!("fall-off not assessed: {e}"));
            None
        }
        Err(e) => {
            out.exit_code = EXIT_INVALID_INPUT;
            out.message = Some(e.to_string());
            return out;
        }
    };
    if !dec.pass {
        out.exit_code = EXIT_CHECK_FAILED;
        out.message = Some(format!(
            "dominant energy condition violated: min (mu - |J|) = {:e} at r = {}",
            dec.min_margin, dec.worst_r
        ));
    }
    let horizon = classify_horizon(data);
    if horizon.kind == HorizonKind::Absent {
        out.warnings.push(
            "inner sphere is not an apparent horizon; the mass/area bound is not implied".into(),
        );
    }
    out.report = Some(ValidationReport {
        label: data.label().to_string(),
        r_min: data.r_min(),
        mass_scale: data.mass_scale(),
        horizon,
        dec,
        falloff,
        pass: out.exit_code == EXIT_PASS,
    });
    out
}

struct Halt {
    status: StageStatus,
    code: u8,
    message: String,
}

impl Halt {
    fn new(code: u8, message: impl ToString) -> Self {
        let status = if code == EXIT_CHECK_FAILED {
            StageStatus::Failed
        } else {
            StageStatus::Error
        };
        Halt {
            status,
            code,
            message: message.to_string(),
        }
    }
}

struct State {
    summary: RunSummary,
    timings: Vec<StageTiming>,
    current: (Stage, Instant),
    single: Option<(JangSolution, GeometryProfile)>,
    levels: Vec<Level>,
}

impl State {
    fn begin(&mut self, stage: Stage) {
        self.current = (stage, Instant::now());
    }

    fn finish(&mut self, status: StageStatus, message: Option<String>) {
        let (stage, t) = self.current;
        self.timings.push(StageTiming {
            stage,
            seconds: t.elapsed().as_secs_f64(),
        });
        self.summary.stages.push(StageRecord {
            stage,
            status,
            message,
        });
    }

    fn pass(&mut self) {
        self.finish(StageStatus::Passed, None);
    }
}

/// Runs every stage `config` asks for and writes CSV profiles plus
/// `report.json` under `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path) -> RunReport {
    let started = Instant::now();
    let mut st = State {
        summary: RunSummary {
            version: env!("CARGO_PKG_VERSION").to_string(),
            label: config.label(),
            config: RunConfig {
                out: None,
                ..config.clone()
            },
            exit_code: EXIT_PASS,
            verdict: Verdict::Pass,
            stages: Vec::new(),
            warnings: Vec::new(),
            tolerances: Tolerances::default(),
            validation: None,
            solve: None,
            geometry: None,
            verification: None,
            penrose: None,
            manifest: Vec::new(),
        },
        timings: Vec::new(),
        current: (Stage::Validate, started),
        single: None,
        levels: Vec::new(),
    };
    if let Err(h) = execute(config, &mut st) {
        st.summary.exit_code = h.code;
        st.finish(h.status, Some(h.message));
    }

    st.begin(Stage::Emit);
    let emitted = {
        let (solution, geometry) = match (st.levels.last(), &st.single) {
            (Some(l), _) => (Some(&l.solution), Some(&l.geometry)),
            (None, Some((s, g))) => (Some(s), Some(g)),
            (None, None) => (None, None),
        };
        emit_profiles(
            out_dir,
            &Profiles {
                solution,
                geometry,
                levels: &st.levels,
            },
        )
    };
    match emitted {
        Ok(manifest) => {
            st.summary.manifest = manifest;
            st.pass();
        }
        Err(e) => {
            st.summary.exit_code = st.summary.exit_code.max(EXIT_INVALID_INPUT);
            st.finish(StageStatus::Error, Some(e.to_string()));
        }
    }
    for stage in STAGES {
        if !st.summary.stages.iter().any(|s| s.stage == stage) {
            st.summary.stages.push(StageRecord {
                stage,
                status: StageStatus::Skipped,
                message: None,
            });
        }
    }
    st.summary
        .stages
        .sort_by_key(|s| STAGES.iter().position(|x| *x == s.stage));
    st.summary.verdict = if st.summary.exit_code == EXIT_PASS {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    let mut report = RunReport {
        comparable: st.summary,
        environment: RunEnvironment {
            out_dir: out_dir.display().to_string(),
            timings: st.timings,
            total_seconds: started.elapsed().as_secs_f64(),
        },
    };
    if let Err(e) = write_json(&out_dir.join("report.json"), &report) {
        report.comparable.exit_code = report.comparable.exit_code.max(EXIT_INVALID_INPUT);
        report.comparable.verdict = Verdict::Fail;
        if let Some(s) = report
            .comparable
            .stages
            .iter_mut()
            .find(|s| s.stage == Stage::Emit)
        {
            s.status = StageStatus::Error;
            s.message = Some(e.to_string());
        }
    }
    report
}

fn execute(config: &RunConfig, st: &mut State) -> Result<(), Halt> {
    st.begin(Stage::Validate);
    let depth = config
        .depth()
        .map_err(|e| Halt::new(EXIT_INVALID_INPUT, e))?;
    let levels = if depth >= Check::Verify {
        config
            .levels()
            .map_err(|e| Halt::new(EXIT_INVALID_INPUT, e))?
    } else {
        vec![config.solver.cells]
    };
    let (desc, data) = config
        .load_data()
        .map_err(|e| Halt::new(EXIT_INVALID_INPUT, e))?;
    st.summary.config.data = DataSource::Inline(desc);
    let horizon = classify_horizon(&data);
    let (solver, boundary) = config.solver.resolve(&horizon);
    let finest = SolverConfig {
        cells: *levels.last().unwrap(),
        ..solver.clone()
    };
    let validation = validate_data(&data, &finest);
    st.summary.warnings.extend(validation.warnings);
    let falloff_compliant = validation
        .report
        .as_ref()
        .is_some_and(|r| r.falloff.as_ref().is_some_and(|f| f.pass));
    st.summary.validation = validation.report;
    if validation.exit_code != EXIT_PASS {
        return Err(Halt::new(
            validation.exit_code,
            validation.message.unwrap_or_default(),
        ));
    }
    st.pass();
    if depth == Check::Validate {
        return Ok(());
    }

    st.begin(Stage::Solve);
    let coarsest = solver_grid(
        &data,
        &SolverConfig {
            cells: levels[0],
            ..solver.clone()
        },
    )
    .map_err(|e| Halt::new(solve_exit_code(&e), e))?;
    let solved: Vec<Result<JangSolution, SolveError>> = levels
        .par_iter()
        .map(|&cells| {
            let c = SolverConfig {
                cells,
                ..solver.clone()
            };
            solve_on_grid(&data, boundary, &c, solver_grid(&data, &c)?)
        })
        .collect();
    let solutions = solved
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Halt::new(solve_exit_code(&e), e))?;
    let finest_sol = solutions.last().unwrap();
    let asymptotics = match asymptotic_report(&data, finest_sol) {
        Ok(a) => {
            if a.meets_decay == Some(false) {
                st.summary.warnings.push(format!(
                    "solution decay below |v| ~ r^-2, |v_r| ~ r^-3: exponents {:?}, {:?}",
                    a.exponent_v, a.exponent_v_r
                ));
            }
            Some(a)
        }
        Err(e) => {
            st.summary
                .warnings
                .push(format!("asymptotics not assessed: {e}"));
            None
        }
    };
    st.summary.solve = Some(SolveSummary {
        boundary,
        branch: solver.branch,
        levels: solutions
            .iter()
            .map(|s| SolveLevel {
                cells: s.grid.cells(),
                r_max: s.grid.r_max(),
                max_abs_v_interior: s.v[1..].iter().fold(0.0f64, |m, v| m.max(v.abs())),
                diagnostics: s.diagnostics.clone(),
            })
            .collect(),
        asymptotics,
    });
    st.pass();

    st.begin(Stage::Geometry);
    if depth == Check::Solve {
        let sol = solutions.into_iter().next().unwrap();
        let geo = geometry_profile(&data, &sol).map_err(|e| {
            let e = VerifyError::from(e);
            Halt::new(verify_exit_code(&e), e)
        })?;
        st.summary.geometry = Some(geometry_summary(&geo));
        st.single = Some((sol, geo));
        st.pass();
        return Ok(());
    }
    let evaluated: Vec<Result<Level, VerifyError>> = solutions
        .into_par_iter()
        .map(|s| evaluate_level(&data, s, &coarsest))
        .collect();
    st.levels = evaluated
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Halt::new(verify_exit_code(&e), e))?;
    st.summary.geometry = Some(geometry_summary(&st.levels.last().unwrap().geometry));
    st.pass();

    st.begin(Stage::Verify);
    let mut verification = verification_report(&data, &st.levels, falloff_compliant);
    let failed = verification.failed().join(", ");
    let verified = verification.pass;
    st.summary.verification = Some(verification.clone());
    if !verified {
        return Err(Halt::new(
            EXIT_CHECK_FAILED,
            format!("failed checks: {failed}"),
        ));
    }
    st.pass();
    if depth == Check::Verify {
        return Ok(());
    }

    st.begin(Stage::Penrose);
    let last = st.levels.last().unwrap();
    let penrose = penrose_report(&data, &last.solution, &last.geometry, &last.terms)
        .map_err(|e| Halt::new(verify_exit_code(&e), e))?;
    st.summary.penrose = Some(penrose.clone());
    rigidity_check(&data, &st.levels, &penrose, &mut verification)
        .map_err(|e| Halt::new(verify_exit_code(&e), e))?;
    let failed = verification.failed().join(", ");
    let rigid = verification.pass;
    st.summary.verification = Some(verification);
    if penrose.verdict == Verdict::Fail {
        return Err(Halt::new(
            EXIT_CHECK_FAILED,
            format!(
                "mass below the area bound: margin {:e} +- {:e}",
                penrose.margin, penrose.uncertainty
            ),
        ));
    }
    if !rigid {
        return Err(Halt::new(
            EXIT_CHECK_FAILED,
            format!("failed checks: {failed}"),
        ));
    }
    st.pass();
    Ok(())
}

fn geometry_summary(g: &GeometryProfile) -> GeometrySummary {
    let last = g.r.len() - 1;
    GeometrySummary {
        cells: last,
        rho_inner: g.rho[0],
        area_inner: g.area[0],
        m_inner: g.m[0],
        m_outer: g.m[last],
        mass_integral_sup: g
            .m_int
            .iter()
            .zip(&g.m)
            .fold(0.0f64, |s, (a, b)| s.max((a - b).abs())),
    }
}

/// Runs `configs` on a pool of `workers` threads. Each run writes under its
/// own `out` if set, else under `out_root/run-NNN`.
pub fn batch(configs: &[RunConfig], workers: usize, out_root: &Path) -> AggregateReport {
    let started = Instant::now();
    let workers = workers.max(1);
    let dirs: Vec<_> = configs
        .iter()
        .enumerate()
        .map(|(i, c)| match &c.out {
            Some(o) => c.base_dir.join(o),
            None => out_root.join(format!("run-{i:03}")),
        })
        .collect();
    let go = || {
        configs
            .par_iter()
            .zip(&dirs)
            .map(|(c, d)| run(c, d))
            .collect::<Vec<_>>()
    };
    let reports = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(go),
        Err(_) => go(),
    };
    let codes: Vec<u8> = reports.iter().map(RunReport::exit_code).collect();
    let exit_code = aggregate_exit(&codes);
    let mut environments = Vec::new();
    let runs = reports
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            environments.push(r.environment);
            let s = r.comparable;
            let failures = match &s.verification {
                Some(v) if !v.pass => v.failed().iter().map(|x| x.to_string()).collect(),
                _ => s.stages.iter().filter_map(|x| x.message.clone()).collect(),
            };
            BatchRun {
                index,
                label: s.label.clone(),
                exit_code: s.exit_code,
                verdict: s.verdict,
                failures,
                margin: s.penrose.as_ref().map(|p| p.margin),
                report: s,
            }
        })
        .collect();
    AggregateReport {
        comparable: AggregateSummary {
            version: env!("CARGO_PKG_VERSION").to_string(),
            runs,
            exit_code,
            verdict: if exit_code == EXIT_PASS {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        },
        environment: BatchEnvironment {
            workers,
            runs: environments,
            total_seconds: started.elapsed().as_secs_f64(),
        },
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), EmitError> {
    let err = |message: String| EmitError {
        path: path.to_path_buf(),
        message,
    };
    let mut text = serde_json::to_string_pretty(value).map_err(|e| err(e.to_string()))?;
    text.push('\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| err(e.to_string()))?;
    }
    fs::write(path, text).map_err(|e| err(e.to_string()))
}

/// Validation of a descriptor alone, with solver defaults.
pub fn validate_descriptor(desc: &DataDescriptor, solver: &SolverBlock) -> ValidateOutcome {
    match desc.build() {
        Ok(data) => {
            let (config, _) = solver.resolve(&classify_horizon(&data));
            validate_data(&data, &config)
        }
        Err(e) => ValidateOutcome {
            report: None,
            exit_code: EXIT_INVALID_INPUT,
            message: Some(e.to_string()),
            warnings: Vec::new(),
        },
    }
}
