//! Run and batch reports. Everything under `comparable` is a pure function
//! of the configuration and the build; wall-clock data and output paths sit
//! in `environment`.

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::emit::ManifestEntry;
use crate::initial_data::{DecReport, FalloffReport, HorizonClassification, DEC_TOL, HORIZON_TOL};
use crate::jang_solver::{
    AsymptoticReport, Boundary, Branch, SolveDiagnostics, CROSS_RESIDUAL_GATE,
};
use crate::verifier::{
    PenroseReport, Verdict, VerificationReport, BOUNDARY_LAYER_CELLS, BULK_TOLERANCE,
    IDENTITY_RATIO, INNER_BOUNDARY_TOLERANCE, MIN_ORDER, RIGIDITY_FLOOR, RIGIDITY_TOLERANCE,
};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INVALID_INPUT: u8 = 2;
pub const EXIT_SOLVER_FAILED: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Validate,
    Solve,
    Geometry,
    Verify,
    Penrose,
    Emit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Passed,
    Failed,
    Error,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: StageStatus,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub horizon: f64,
    pub dec: f64,
    pub cross_residual_gate: f64,
    pub boundary_layer_cells: usize,
    pub identity_ratio: (f64, f64),
    pub min_order: f64,
    pub rigidity_floor: f64,
    pub rigidity: f64,
    pub bulk: f64,
    pub inner_boundary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            horizon: HORIZON_TOL,
            dec: DEC_TOL,
            cross_residual_gate: CROSS_RESIDUAL_GATE,
            boundary_layer_cells: BOUNDARY_LAYER_CELLS,
            identity_ratio: IDENTITY_RATIO,
            min_order: MIN_ORDER,
            rigidity_floor: RIGIDITY_FLOOR,
            rigidity: RIGIDITY_TOLERANCE,
            bulk: BULK_TOLERANCE,
            inner_boundary: INNER_BOUNDARY_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub label: String,
    pub r_min: f64,
    pub mass_scale: f64,
    pub horizon: HorizonClassification,
    pub dec: DecReport,
    pub falloff: Option<FalloffReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveLevel {
    pub cells: usize,
    pub r_max: f64,
    /// `max |v|` over the nodes past the inner boundary.
    pub max_abs_v_interior: f64,
    pub diagnostics: SolveDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub boundary: Boundary,
    pub branch: Branch,
    pub levels: Vec<SolveLevel>,
    pub asymptotics: Option<AsymptoticReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub cells: usize,
    pub rho_inner: f64,
    pub area_inner: f64,
    pub m_inner: f64,
    pub m_outer: f64,
    /// `sup |m_int - m|` on the finest level.
    pub mass_integral_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: String,
    pub label: String,
    /// The configuration with its data inlined, so the run can be repeated
    /// from the report alone.
    pub config: RunConfig,
    pub exit_code: u8,
    pub verdict: Verdict,
    pub stages: Vec<StageRecord>,
    pub warnings: Vec<String>,
    pub tolerances: Tolerances,
    pub validation: Option<ValidationReport>,
    pub solve: Option<SolveSummary>,
    pub geometry: Option<GeometrySummary>,
    pub verification: Option<VerificationReport>,
    pub penrose: Option<PenroseReport>,
    pub manifest: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEnvironment {
    pub out_dir: String,
    pub timings: Vec<StageTiming>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub comparable: RunSummary,
    pub environment: RunEnvironment,
}

impl RunReport {
    pub fn exit_code(&self) -> u8 {
        self.comparable.exit_code
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageRecord> {
        self.comparable.stages.iter().find(|s| s.stage == stage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRun {
    pub index: usize,
    pub label: String,
    pub exit_code: u8,
    pub verdict: Verdict,
    /// Names of failed checks, or the message of the stage that stopped.
    pub failures: Vec<String>,
    pub margin: Option<f64>,
    pub report: RunSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub version: String,
    pub runs: Vec<BatchRun>,
    pub exit_code: u8,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEnvironment {
    pub workers: usize,
    pub runs: Vec<RunEnvironment>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub comparable: AggregateSummary,
    pub environment: BatchEnvironment,
}

/// Any run at 2 or above makes the batch 2; otherwise any check failure
/// makes it 1.
pub fn aggregate_exit(codes: &[u8]) -> u8 {
    if codes.iter().any(|&c| c >= EXIT_INVALID_INPUT) {
        EXIT_INVALID_INPUT
    } else if codes.contains(&EXIT_CHECK_FAILED) {
        EXIT_CHECK_FAILED
    } else {
        EXIT_PASS
    }
}
