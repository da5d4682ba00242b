//! Batch front-end: a JSON scenario names a metric and a list of tasks; the
//! run writes `report.json` plus CSV artifacts into an output directory.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a task failed
//! numerically or a reference check did not pass.

use crate::cones::{self, ClusterSummary, IntersectionReport};
use crate::dynamics::{
    detect_gcs, find_idempotents, first_integral_drift, integrate, FirstIntegralDrift, GcsOptions, GcsWitness,
    IntegrateOptions, Trajectory, TrajectoryStatus,
};
use crate::error::Error;
use crate::killing::{
    classify_completeness_with, find_killing, validate_killing_structure, ClassifyOptions, KillingReport,
    KillingValidation, Verdict,
};
use crate::lie::{AlgebraKind, AlgebraVec};
use crate::metric::MetricOp;
use crate::reproduce::{self, ReproduceReport};
use crate::{presets, rng};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const REPORT_VERSION: u32 = 1;
const MAX_RANDOM_COUNT: usize = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(#[from] Error),
}

/// `A^{-1}` as a preset name, a flat row-major array or a list of rows.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AinvSpec {
    Preset(String),
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Analyze,
    Integrate,
    Cones,
    Killing,
    Idempotents,
    ReproducePaper,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrateSpec {
    /// Explicit initial states; when absent, `random_count` Gaussian ones.
    pub u0: Option<Vec<Vec<f64>>>,
    pub random_count: usize,
    pub horizon: f64,
    pub tolerances: IntegrateOptions,
}

impl Default for IntegrateSpec {
    fn default() -> Self {
        IntegrateSpec {
            u0: None,
            random_count: 4,
            horizon: 10.0,
            tolerances: IntegrateOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub algebra: AlgebraKind,
    pub ainv: AinvSpec,
    /// Defaults to `["analyze"]`; an explicit empty list runs nothing.
    pub tasks: Option<Vec<Task>>,
    #[serde(default)]
    pub integrate_opts: IntegrateSpec,
    #[serde(default)]
    pub classify: ClassifyOptions,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Restricts the `reproduce_paper` task to matching criteria.
    pub reproduce_filter: Option<String>,
}

pub const DEFAULT_OUTPUT_DIR: &str = "eulerflow-out";

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn tasks(&self) -> Vec<Task> {
        self.tasks.clone().unwrap_or_else(|| vec![Task::Analyze])
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    pub fn ainv_matrix(&self) -> Result<DMatrix<f64>, Error> {
        let n = self.algebra.dim();
        match &self.ainv {
            AinvSpec::Preset(name) => {
                let p = presets::find(name)?;
                if p.kind != self.algebra {
                    return Err(Error::InvalidArgument(format!(
                        "preset `{name}` is on {:?}, scenario declares {:?}",
                        p.kind, self.algebra
                    )));
                }
                Ok(p.ainv())
            }
            AinvSpec::Flat(v) => {
                if v.len() != n * n {
                    return Err(Error::DimensionMismatch {
                        expected: n * n,
                        found: v.len(),
                    });
                }
                Ok(DMatrix::from_row_slice(n, n, v))
            }
            AinvSpec::Rows(rows) => {
                if rows.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: rows.len(),
                    });
                }
                if let Some(r) = rows.iter().find(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: r.len(),
                    });
                }
                Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            }
        }
    }

    pub fn metric(&self) -> Result<MetricOp, Error> {
        let ainv = self.ainv_matrix()?;
        if ainv.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("A^-1 has non-finite entries".into()));
        }
        MetricOp::new(self.algebra, ainv)
    }

    fn validate(&self) -> Result<(), Error> {
        self.metric()?;
        let io = &self.integrate_opts;
        if !(io.horizon > 0.0 && io.horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {}", io.horizon)));
        }
        if io.random_count > MAX_RANDOM_COUNT {
            return Err(Error::InvalidArgument(format!(
                "random_count {} exceeds {MAX_RANDOM_COUNT}",
                io.random_count
            )));
        }
        let t = &io.tolerances;
        if !(t.rel_tol > 0.0 && t.abs_tol > 0.0 && t.escape_radius > 0.0 && t.min_step > 0.0 && t.max_steps > 0) {
            return Err(Error::InvalidArgument("integration tolerances must be positive".into()));
        }
        if let Some(u0) = &io.u0 {
            let n = self.algebra.dim();
            for u in u0 {
                if u.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: u.len(),
                    });
                }
                if u.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidArgument("initial state is not finite".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricSummary {
    pub lorentzian: bool,
    pub index: usize,
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub gram_g: DMatrix<f64>,
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub gram_gstar: DMatrix<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KillingSection {
    pub report: KillingReport,
    pub validations: Vec<KillingValidation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeSection {
    pub summary: IntersectionReport,
    pub clusters: ClusterSummary,
    /// `[min, max]` of `|x_i|` over the sampled points, per coordinate.
    pub abs_coordinate_range: Vec<[f64; 2]>,
    pub samples_file: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdempotentSection {
    pub seeds: usize,
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub points: Vec<AlgebraVec>,
    /// `|F(x) - x|` per point.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub index: usize,
    pub file: String,
    pub initial_state: Vec<f64>,
    pub status: TrajectoryStatus,
    pub t_end: f64,
    pub samples: usize,
    pub escape_time: Option<f64>,
    pub escape_time_estimate: Option<f64>,
    pub sup_norm: f64,
    pub drift: FirstIntegralDrift,
    pub gcs: Option<GcsWitness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskError {
    pub task: Task,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: u32,
    pub algebra: AlgebraKind,
    pub preset: Option<String>,
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub ainv: DMatrix<f64>,
    pub seed: u64,
    pub tasks: Vec<Task>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub killing: Option<KillingSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cones: Option<ConeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idempotents: Option<IdempotentSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<Vec<TrajectoryRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproduce: Option<ReproduceReport>,
    pub errors: Vec<TaskError>,
}

/// Report plus the CSV files referenced from it.
pub struct RunOutput {
    pub report: Report,
    pub artifacts: Vec<(String, String)>,
    pub exit_code: i32,
}

/// Shortest round-trip representation, with an exponent for tiny and huge values.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn to_csv(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV of UTF-8 fields")
}

fn trajectory_csv(m: &MetricOp, traj: &Trajectory, killing: &[AlgebraVec]) -> String {
    let mut header = vec!["t".to_string()];
    header.extend((0..m.dim()).map(|i| format!("c{i}")));
    header.extend(["drift_gstar", "drift_tr2", "drift_tr3", "drift_Kz"].map(String::from));
    let u0 = traj.initial_state();
    let rows = traj.times.iter().zip(&traj.states).map(|(t, u)| {
        let d = crate::dynamics::sample_drift(m, u0, u, killing);
        let mut row = vec![fmt_f64(*t)];
        row.extend(u.iter().map(|v| fmt_f64(*v)));
        row.extend([d.gstar, d.tr_ad2, d.tr_ad3].map(fmt_f64));
        row.push(d.killing.map_or(String::new(), fmt_f64));
        row
    });
    to_csv(&header, rows)
}

fn cone_csv(m: &MetricOp, samples: &cones::ConeSampleSet) -> String {
    let labels: &[&str] = match m.kind() {
        AlgebraKind::Sl2c => &["x1", "x2", "x3", "y1", "y2", "y3"],
        AlgebraKind::Sl2r => &["x1", "x2", "x3"],
    };
    let mut header: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    header.push("transversal".into());
    let rows = samples.points.iter().zip(&samples.transversal_flags).map(|(p, t)| {
        let mut row: Vec<String> = p.iter().map(|v| fmt_f64(*v)).collect();
        row.push(t.to_string());
        row
    });
    to_csv(&header, rows)
}

fn initial_states(s: &Scenario, m: &MetricOp) -> Vec<AlgebraVec> {
    match &s.integrate_opts.u0 {
        Some(list) => list.iter().map(|u| DVector::from_column_slice(u)).collect(),
        None => (0..s.integrate_opts.random_count)
            .map(|i| {
                let mut r = rng::stream(s.seed ^ 0x1417, i as u64);
                m.alg().random_element(&mut r, 1.0)
            })
            .collect(),
    }
}

fn killing_section(m: &MetricOp) -> KillingSection {
    let report = find_killing(m);
    let validations = report.generators.iter().map(|g| validate_killing_structure(m, &g.z)).collect();
    KillingSection { report, validations }
}

fn cone_section(m: &MetricOp, opts: &ClassifyOptions, artifacts: &mut Vec<(String, String)>) -> ConeSection {
    let samples = cones::sample_intersection(m, opts.cone_seeds, opts.seed);
    let mut range = vec![[f64::INFINITY, 0.0_f64]; m.dim()];
    for p in &samples.points {
        for (r, x) in range.iter_mut().zip(p.iter()) {
            r[0] = r[0].min(x.abs());
            r[1] = r[1].max(x.abs());
        }
    }
    if samples.points.is_empty() {
        range.iter_mut().for_each(|r| r[0] = 0.0);
    }
    let file = "cone_samples.csv".to_string();
    let csv = cone_csv(m, &samples);
    artifacts.retain(|(name, _)| *name != file);
    artifacts.push((file.clone(), csv));
    ConeSection {
        summary: cones::intersection_summary(&samples, 0),
        clusters: samples.cluster_summary,
        abs_coordinate_range: range,
        samples_file: file,
    }
}

fn idempotent_section(m: &MetricOp, opts: &ClassifyOptions) -> IdempotentSection {
    let points = find_idempotents(m, opts.idempotent_seeds, opts.seed);
    let residuals = points
        .iter()
        .map(|x| (crate::dynamics::euler_field(m, x) - x).norm())
        .collect();
    IdempotentSection {
        seeds: opts.idempotent_seeds,
        points,
        residuals,
    }
}

/// Runs every task. Errors inside a task are recorded in the report and
/// turn the exit code into [`EXIT_NUMERIC`]; other tasks still run.
pub fn run(s: &Scenario) -> Result<RunOutput, ScenarioError> {
    let m = s.metric()?;
    let tasks = s.tasks();
    let mut report = Report {
        version: REPORT_VERSION,
        algebra: s.algebra,
        preset: match &s.ainv {
            AinvSpec::Preset(p) => Some(p.clone()),
            _ => None,
        },
        ainv: m.ainv().clone(),
        seed: s.seed,
        tasks: tasks.clone(),
        metric: None,
        verdict: None,
        killing: None,
        cones: None,
        idempotents: None,
        trajectories: None,
        reproduce: None,
        errors: Vec::new(),
    };
    let mut artifacts = Vec::new();
    let mut exit_code = EXIT_OK;
    let classify = ClassifyOptions {
        seed: s.seed,
        ..s.classify.clone()
    };

    for task in tasks {
        match task {
            Task::Analyze => {
                report.metric = Some(MetricSummary {
                    lorentzian: m.is_lorentzian(),
                    index: m.index(),
                    gram_g: m.gram_g().clone(),
                    gram_gstar: m.gram_gstar().clone(),
                });
                report.verdict = Some(classify_completeness_with(&m, &classify));
                report.killing = Some(killing_section(&m));
                report.cones = Some(cone_section(&m, &classify, &mut artifacts));
                report.idempotents = Some(idempotent_section(&m, &classify));
            }
            Task::Killing => report.killing = Some(killing_section(&m)),
            Task::Cones => report.cones = Some(cone_section(&m, &classify, &mut artifacts)),
            Task::Idempotents => report.idempotents = Some(idempotent_section(&m, &classify)),
            Task::Integrate => {
                let z: Vec<AlgebraVec> = find_killing(&m).generators.into_iter().map(|g| g.z).collect();
                let u0s = initial_states(s, &m);
                let io = &s.integrate_opts;
                let runs: Vec<_> = u0s
                    .par_iter()
                    .map(|u0| integrate(&m, u0, io.horizon, &io.tolerances))
                    .collect();
                let mut records = Vec::new();
                for (i, (u0, run)) in u0s.iter().zip(runs).enumerate() {
                    match run {
                        Ok(traj) => {
                            let file = format!("traj_{i:03}.csv");
                            artifacts.push((file.clone(), trajectory_csv(&m, &traj, &z)));
                            let (_, drift) = first_integral_drift(&m, &traj, &z);
                            records.push(TrajectoryRecord {
                                index: i,
                                file,
                                initial_state: u0.iter().copied().collect(),
                                status: traj.status,
                                t_end: traj.t_end(),
                                samples: traj.len(),
                                escape_time: traj.escape_time,
                                escape_time_estimate: traj.escape_time_estimate,
                                sup_norm: traj.sup_norm(),
                                drift,
                                gcs: detect_gcs(&traj, &GcsOptions::default()),
                            });
                            if matches!(traj.status, TrajectoryStatus::StepUnderflow | TrajectoryStatus::StepLimit) {
                                report.errors.push(TaskError {
                                    task,
                                    message: format!("trajectory {i} stopped early: {:?}", traj.status),
                                });
                                exit_code = EXIT_NUMERIC;
                            }
                        }
                        Err(e) => {
                            report.errors.push(TaskError {
                                task,
                                message: format!("trajectory {i}: {e}"),
                            });
                            exit_code = EXIT_NUMERIC;
                        }
                    }
                }
                report.trajectories = Some(records);
            }
            Task::ReproducePaper => {
                let r = reproduce::run(s.seed, s.reproduce_filter.as_deref());
                if !r.all_passed() {
                    report.errors.push(TaskError {
                        task,
                        message: "reference checks failed".into(),
                    });
                    exit_code = EXIT_NUMERIC;
                }
                report.reproduce = Some(r);
            }
        }
    }
    Ok(RunOutput {
        report,
        artifacts,
        exit_code,
    })
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

pub fn report_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report is serializable");
    s.push('\n');
    s
}

/// Writes the artifacts, then `report.json` last so its presence marks a
/// finished run.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    for (name, content) in &out.artifacts {
        write_atomic(&dir.join(name), content.as_bytes())?;
    }
    let path = dir.join("report.json");
    write_atomic(&path, report_json(&out.report).as_bytes())?;
    Ok(path)
}

/// Loads, runs and writes a scenario; returns the process exit code.
/// `out_override` replaces the scenario's `output_dir`.
pub fn execute(path: &Path, out_override: Option<&Path>) -> i32 {
    let scenario = match Scenario::load(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let out = match run(&scenario) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let dir = out_override.map_or_else(|| scenario.output_dir(), Path::to_path_buf);
    match write_outputs(&dir, &out) {
        Ok(p) => {
            eprintln!("{}", summary(&out.report, &p));
            out.exit_code
        }
        Err(e) => {
            eprintln!("error: cannot write outputs to {}: {e}", dir.display());
            EXIT_NUMERIC
        }
    }
}

fn summary(r: &Report, path: &Path) -> String {
    let mut s = format!("wrote {}", path.display());
    if let Some(v) = &r.verdict {
        let _ = write!(s, "\nverdict: {:?} ({})", v.status, v.rule);
    }
    for e in &r.errors {
        let _ = write!(s, "\nerror in {:?}: {}", e.task, e.message);
    }
    if let Some(rep) = &r.reproduce {
        s.push('\n');
        s.push_str(rep.table().trim_end());
    }
    s
}
