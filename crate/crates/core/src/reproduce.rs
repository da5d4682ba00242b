//! Reference checks: the numbered acceptance criteria, each a function of a
//! seed returning measured values against pinned tolerances.

use crate::cones;
use crate::dynamics::{
    construct_um_solution, detect_gcs, find_idempotents, first_integral_drift, integrate, propagate_group,
    reconstruct_geodesic, scan_um_conventions, GcsOptions, HFactorConvention, IntegrateOptions, Trajectory,
    TrajectoryStatus,
};
use crate::killing::{
    classify_completeness_with, euler_on_zero_level, find_gcs_witness, find_killing, normal_form,
    projected_linear_field, zero_level_point, ClassifyOptions, NormalForm, VerdictStatus, Witness,
};
use crate::lie::{AlgebraSpec, AlgebraVec, GroupElement};
use crate::metric::MetricOp;
use crate::presets::{self, FamilyParams};
use crate::{linalg, rng};
use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriterionStatus {
    Pass,
    Fail,
    /// The check cannot be completed from the available information.
    Blocked,
}

#[derive(Debug, Clone, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Measurement {
    pub fn ok(&self) -> bool {
        self.value.is_finite() && self.value <= self.tolerance
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub status: CriterionStatus,
    pub measurements: Vec<Measurement>,
    /// Structural checks that failed.
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl CriterionResult {
    /// One-line summary: status, id, name and the worst measurement relative
    /// to its tolerance.
    pub fn line(&self) -> String {
        let status = match self.status {
            CriterionStatus::Pass => "PASS",
            CriterionStatus::Fail => "FAIL",
            CriterionStatus::Blocked => "BLOCKED",
        };
        let worst = self
            .measurements
            .iter()
            .max_by(|a, b| (a.value / a.tolerance).total_cmp(&(b.value / b.tolerance)));
        let mut s = format!("{status:<7} {:>2} {:<30}", self.id, self.name);
        if let Some(m) = worst {
            let _ = write!(s, " {} = {:.3e} (tol {:.0e})", m.name, m.value, m.tolerance);
        }
        for f in &self.failures {
            let _ = write!(s, "; {f}");
        }
        s
    }
}

/// Collects measurements and structural checks for one criterion.
struct Check {
    id: u8,
    name: &'static str,
    measurements: Vec<Measurement>,
    failures: Vec<String>,
    notes: Vec<String>,
    blocked: bool,
}

impl Check {
    fn new(id: u8, name: &'static str) -> Self {
        Check {
            id,
            name,
            measurements: Vec::new(),
            failures: Vec::new(),
            notes: Vec::new(),
            blocked: false,
        }
    }

    fn measure(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.measurements.push(Measurement {
            name: name.into(),
            value,
            tolerance,
        });
    }

    fn require(&mut self, cond: bool, what: impl Into<String>) {
        if !cond {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(self) -> CriterionResult {
        let ok = self.failures.is_empty() && self.measurements.iter().all(Measurement::ok);
        let status = if ok {
            CriterionStatus::Pass
        } else if self.blocked {
            CriterionStatus::Blocked
        } else {
            CriterionStatus::Fail
        };
        CriterionResult {
            id: self.id,
            name: self.name,
            status,
            measurements: self.measurements,
            failures: self.failures,
            notes: self.notes,
        }
    }
}

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub tags: &'static [&'static str],
    pub run: fn(u64) -> CriterionResult,
}

impl Criterion {
    /// Whether `filter` equals the id, or is a substring of the name or a tag.
    pub fn matches(&self, filter: &str) -> bool {
        let f = filter.trim();
        f == self.id.to_string() || self.name.contains(f) || self.tags.iter().any(|t| t.contains(f))
    }
}

pub const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "idempotent-ray-law",
        tags: &["idempotents", "escape"],
        run: idempotent_ray_law,
    },
    Criterion {
        id: 2,
        name: "gcs-blowup-formula",
        tags: &["gcs", "escape"],
        run: gcs_blowup_formula,
    },
    Criterion {
        id: 3,
        name: "first-integral-conservation",
        tags: &["integrals", "integrate"],
        run: first_integral_conservation,
    },
    Criterion {
        id: 4,
        name: "diagonal-example",
        tags: &["example", "cones", "idempotents", "integrals"],
        run: diagonal_example,
    },
    Criterion {
        id: 5,
        name: "killing-solver",
        tags: &["killing"],
        run: killing_solver,
    },
    Criterion {
        id: 6,
        name: "normal-form-invariance",
        tags: &["normal-form", "killing", "verdict"],
        run: normal_form_invariance,
    },
    Criterion {
        id: 7,
        name: "v-matrix-char-poly",
        tags: &["normal-form", "v-matrix"],
        run: v_matrix_char_poly,
    },
    Criterion {
        id: 8,
        name: "branch-dichotomy",
        tags: &["verdict", "branches", "normal-form"],
        run: branch_dichotomy,
    },
    Criterion {
        id: 9,
        name: "um-family",
        tags: &["um-family", "idempotents"],
        run: um_family,
    },
    Criterion {
        id: 10,
        name: "geodesic-reconstruction",
        tags: &["geodesic", "integrate"],
        run: geodesic_reconstruction,
    },
];

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceReport {
    pub seed: u64,
    pub filter: Option<String>,
    pub criteria: Vec<CriterionResult>,
}

impl ReproduceReport {
    /// True when no criterion failed (blocked criteria do not count as failures).
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.status != CriterionStatus::Fail)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        for c in &self.criteria {
            s.push_str(&c.line());
            s.push('\n');
        }
        let count = |st| self.criteria.iter().filter(|c| c.status == st).count();
        let _ = writeln!(
            s,
            "{} passed, {} failed, {} blocked",
            count(CriterionStatus::Pass),
            count(CriterionStatus::Fail),
            count(CriterionStatus::Blocked)
        );
        s
    }
}

/// Runs every criterion matching `filter` (all when `None`).
pub fn run(seed: u64, filter: Option<&str>) -> ReproduceReport {
    let criteria = CRITERIA
        .iter()
        .filter(|c| filter.is_none_or(|f| c.matches(f)))
        .map(|c| (c.run)(seed))
        .collect();
    ReproduceReport {
        seed,
        filter: filter.map(str::to_string),
        criteria,
    }
}

fn family(p: FamilyParams) -> MetricOp {
    p.metric().expect("reference family is Lorentzian")
}

/// Metric of the example with one entry moved, leaving no Killing field but
/// idempotents.
fn perturbed_d_positive() -> MetricOp {
    let mut ainv = presets::SPACELIKE_D_POSITIVE.ainv();
    ainv[(1, 1)] = 1.1;
    MetricOp::new(crate::AlgebraKind::Sl2c, ainv).expect("perturbation keeps the metric Lorentzian")
}

fn spacelike_normal_form(m: &MetricOp) -> Option<NormalForm> {
    let report = find_killing(m);
    let z = report.preferred_generator()?.z.clone();
    normal_form(m, &z).ok()
}

fn tight() -> IntegrateOptions {
    IntegrateOptions::default()
}

pub fn idempotent_ray_law(seed: u64) -> CriterionResult {
    let mut c = Check::new(1, "idempotent-ray-law");
    let mut worst_ray = 0.0_f64;
    let mut worst_escape = 0.0_f64;
    let mut count = 0;
    for (label, m) in [("spacelike-d-positive", family(presets::SPACELIKE_D_POSITIVE)), ("no-killing", perturbed_d_positive())] {
        let ids = find_idempotents(&m, 64, seed);
        c.require(!ids.is_empty(), format!("no idempotent found for {label}"));
        let runs: Vec<_> = ids
            .par_iter()
            .map(|x| {
                let traj = integrate(&m, x, 2.0, &tight())?;
                let mut ray = 0.0_f64;
                for k in 0..=100 {
                    let t = 0.99 * k as f64 / 100.0;
                    let expected = x / (1.0 - t);
                    let u = traj.state_at(t).expect("t before escape");
                    ray = ray.max((u - &expected).norm() / expected.norm());
                }
                Ok::<_, crate::Error>((ray, traj.status, traj.escape_time))
            })
            .collect();
        for r in runs {
            match r {
                Ok((ray, status, te)) => {
                    count += 1;
                    worst_ray = worst_ray.max(ray);
                    match (status, te) {
                        (TrajectoryStatus::Escaped, Some(te)) => worst_escape = worst_escape.max((te - 1.0).abs()),
                        _ => c.failures.push(format!("idempotent orbit did not escape ({label})")),
                    }
                }
                Err(e) => c.failures.push(format!("integration failed: {e}")),
            }
        }
    }
    c.note(format!("{count} idempotent rays checked"));
    c.measure("ray relative error", worst_ray, 1e-6);
    c.measure("|escape time - 1|", worst_escape, 1e-3);
    c.finish()
}

pub fn gcs_blowup_formula(seed: u64) -> CriterionResult {
    let mut c = Check::new(2, "gcs-blowup-formula");
    let opts = ClassifyOptions {
        seed,
        ..ClassifyOptions::default()
    };
    let mut worst = 0.0_f64;
    for (label, p) in [
        ("spacelike-d-positive", presets::SPACELIKE_D_POSITIVE),
        ("spacelike-d-positive-spiral", presets::SPACELIKE_D_POSITIVE_SPIRAL),
    ] {
        let m = family(p);
        let Some(nf) = spacelike_normal_form(&m) else {
            c.failures.push(format!("normal form failed for {label}"));
            continue;
        };
        match find_gcs_witness(&m, &nf, &opts) {
            Some(ev) => match (ev.escape_time, ev.gcs.predicted_blowup) {
                (Some(te), Some(pred)) => {
                    worst = worst.max((te - pred).abs() / te);
                    c.note(format!("{label}: s = {:.6}, r = {:.6}, escape {te:.6}", ev.gcs.s, ev.gcs.r));
                }
                _ => c.failures.push(format!("GCS witness without escape for {label}")),
            },
            None => c.failures.push(format!("no GCS witness for {label}")),
        }
        // Idempotent rays are GCSs with any s.
        for x in find_idempotents(&m, 32, seed) {
            let traj = match integrate(&m, &x, 2.0, &tight()) {
                Ok(t) => t,
                Err(e) => {
                    c.failures.push(format!("integration failed: {e}"));
                    continue;
                }
            };
            match (detect_gcs(&traj, &GcsOptions::default()), traj.escape_time) {
                (Some(w), Some(te)) if w.r > 1.0 => {
                    let pred = w.predicted_blowup.unwrap_or(f64::INFINITY);
                    worst = worst.max((te - pred).abs() / te);
                }
                _ => c.failures.push(format!("idempotent orbit without GCS witness for {label}")),
            }
        }
    }
    c.measure("relative blow-up mismatch", worst, 1e-2);
    c.finish()
}

fn drift_runs(m: &MetricOp, n: usize, horizon: f64, seed: u64, stream: u64) -> Vec<crate::Result<(Trajectory, f64)>> {
    let killing: Vec<AlgebraVec> = find_killing(m).generators.into_iter().map(|g| g.z).collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed ^ stream, i as u64);
            let u0 = m.alg().random_element(&mut r, 1.0);
            let traj = integrate(m, &u0, horizon, &tight())?;
            let (_, drift) = first_integral_drift(m, &traj, &killing);
            Ok((traj, drift.max()))
        })
        .collect()
}

pub fn first_integral_conservation(seed: u64) -> CriterionResult {
    let mut c = Check::new(3, "first-integral-conservation");
    let mut worst = 0.0_f64;
    let cases = [
        ("diagonal example", presets::paper_example(), 7),
        ("spacelike-d-negative", family(presets::SPACELIKE_D_NEGATIVE), 7),
        ("no-killing", perturbed_d_positive(), 6),
    ];
    for (label, m, n) in cases {
        for r in drift_runs(&m, n, 20.0, seed, 0x3) {
            match r {
                Ok((traj, d)) => {
                    if traj.status == TrajectoryStatus::Escaped {
                        c.note(format!("{label}: orbit escaped at {:.4}", traj.t_end()));
                    }
                    worst = worst.max(d);
                }
                Err(e) => c.failures.push(format!("{label}: {e}")),
            }
        }
    }
    c.measure("max first-integral drift", worst, 1e-7);
    c.finish()
}

pub fn diagonal_example(seed: u64) -> CriterionResult {
    let mut c = Check::new(4, "diagonal-example");
    let m = presets::paper_example();

    let ids = find_idempotents(&m, 1000, seed);
    c.require(ids.is_empty(), format!("{} idempotents found", ids.len()));

    let samples = cones::sample_intersection(&m, 1000, seed);
    c.require(!samples.points.is_empty(), "no intersection points found");
    let x3 = (2.0_f64 / 5.0).sqrt();
    let mut x3_err = 0.0_f64;
    let mut torus = 0.0_f64;
    for p in &samples.points {
        x3_err = x3_err.max((p[2].abs() - x3).abs());
        // On the unit slice the intersection is {x3^2 = 2/5, y1^2 + y2^2 = 1/10,
        // x1^2 + x2^2 + y3^2 = 1/2} cut by the imaginary-trace condition.
        torus = torus
            .max((p[3] * p[3] + p[4] * p[4] - 0.1).abs())
            .max((p[0] * p[0] + p[1] * p[1] + p[5] * p[5] - 0.5).abs());
    }
    let report = cones::intersection_summary(&samples, ids.len());
    c.measure("| |x3| - sqrt(2/5) |", x3_err, 1e-8);
    c.measure("torus equation residual", torus, 1e-7);
    c.require(
        samples.transversal_flags.iter().all(|&t| t),
        "intersection is not transversal everywhere",
    );
    c.require(report.components == 2, format!("{} components, expected 2", report.components));
    c.require(report.torus_consistent == Some(true), "clusters are not torus-consistent");
    c.note(format!(
        "{} points, {} components, max constraint residual {:.1e}",
        report.n_points, report.components, report.max_constraint_residual
    ));

    // alpha3 is the pairing with the Killing generator e3.
    let bounds: Vec<_> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed ^ 0x4, i);
            let u0 = m.alg().random_element(&mut r, 1.0);
            let traj = integrate(&m, &u0, 50.0, &tight())?;
            let a3 = u0[2];
            let drift = traj
                .states
                .iter()
                .map(|u| (u[2] - a3).abs() / u0.norm())
                .fold(0.0, f64::max);
            // |u|^2 <= 3 a3^2 + g*(u,u)/8 on the example.
            let bound = (3.0 * a3 * a3 + m.g_star(&u0, &u0) / 8.0).sqrt();
            Ok::<_, crate::Error>((drift, traj.status, traj.sup_norm() / bound))
        })
        .collect();
    let mut a3_drift = 0.0_f64;
    let mut ratio = 0.0_f64;
    for b in bounds {
        match b {
            Ok((d, status, r)) => {
                a3_drift = a3_drift.max(d);
                ratio = ratio.max(r);
                c.require(status == TrajectoryStatus::CompletedHorizon, "orbit did not reach the horizon");
            }
            Err(e) => c.failures.push(format!("integration failed: {e}")),
        }
    }
    c.measure("alpha3 drift", a3_drift, 1e-8);
    c.measure("sup |u| / a priori bound - 1", (ratio - 1.0).max(0.0), 1e-6);
    c.finish()
}

fn parallel_defect(u: &AlgebraVec, v: &AlgebraVec) -> f64 {
    (1.0 - (u.dot(v).abs() / (u.norm() * v.norm())).min(1.0)).max(0.0)
}

pub fn killing_solver(_seed: u64) -> CriterionResult {
    let mut c = Check::new(5, "killing-solver");
    let cases = [
        ("sl2r-nilpotent-killing", AlgebraSpec::sl2r().basis_vector(0)),
        ("sl2r-semisimple-killing", AlgebraSpec::sl2r().basis_vector(2)),
        ("spacelike-d-negative", AlgebraSpec::sl2c().basis_vector(3)),
    ];
    let mut align = 0.0_f64;
    let mut resid = 0.0_f64;
    for (name, expected) in cases {
        let m = presets::metric(name).expect("built-in preset");
        let r = find_killing(&m);
        if r.generators.len() != 1 {
            c.failures.push(format!("{name}: {} generators, expected 1", r.generators.len()));
            continue;
        }
        let g = &r.generators[0];
        align = align.max(parallel_defect(&g.z, &expected));
        resid = resid.max(g.commutation_residual);
    }
    c.measure("1 - |cos angle to expected generator|", align, 1e-9);
    c.measure("commutation residual", resid, 1e-9);
    c.finish()
}

/// `exp(x)` with `|x|` uniform in `[0, radius]` along a Gaussian direction.
fn random_conjugator(alg: &AlgebraSpec, seed: u64, i: u64, radius: f64) -> GroupElement {
    let mut r = rng::stream(seed ^ 0x6, i);
    let dir = linalg::unit(&alg.random_element(&mut r, 1.0));
    let len: f64 = r.random_range(0.0..radius);
    alg.exp_element(&(dir * len), 1.0)
}

fn invariants(nf: &NormalForm) -> [f64; 6] {
    [nf.a, nf.b, nf.c, nf.d1, nf.d2, nf.d3]
}

pub fn normal_form_invariance(seed: u64) -> CriterionResult {
    let mut c = Check::new(6, "normal-form-invariance");
    let opts = ClassifyOptions {
        seed,
        ..ClassifyOptions::default()
    };
    let bases = [family(presets::SPACELIKE_D_NEGATIVE), family(FamilyParams::new(-1.0, 0.7, -1.0, 1.0, -3.0))];
    let mut worst = 0.0_f64;
    for (k, m) in bases.iter().enumerate() {
        let Some(nf0) = spacelike_normal_form(m) else {
            c.failures.push("normal form of the unconjugated metric failed".into());
            continue;
        };
        let v0 = classify_completeness_with(m, &opts);
        let inv0 = invariants(&nf0);
        let results: Vec<_> = (0..10u64)
            .into_par_iter()
            .map(|i| {
                let g = random_conjugator(m.alg(), seed, 10 * k as u64 + i, 0.5);
                let mc = m.conjugate(&g)?;
                let nf = spacelike_normal_form(&mc)
                    .ok_or_else(|| crate::Error::InvalidArgument("normal form failed".into()))?;
                let v = classify_completeness_with(&mc, &opts);
                Ok::<_, crate::Error>((invariants(&nf), v.status, v.rule))
            })
            .collect();
        for r in results {
            match r {
                Ok((inv, status, rule)) => {
                    for (x, y) in inv.iter().zip(&inv0) {
                        worst = worst.max((x - y).abs());
                    }
                    c.require(
                        status == v0.status && rule == v0.rule,
                        format!("verdict changed under conjugation: {rule}"),
                    );
                }
                Err(e) => c.failures.push(format!("conjugated metric: {e}")),
            }
        }
    }
    c.measure("max invariant difference", worst, 1e-8);
    c.finish()
}

pub fn v_matrix_char_poly(_seed: u64) -> CriterionResult {
    let mut c = Check::new(7, "v-matrix-char-poly");
    let mut grid = Vec::new();
    for a in [0.5, 1.0, 1.5, 2.0, 3.0] {
        for b in [-0.5, -1.0, -1.5, -2.0, -3.0] {
            for d1 in [-4.0, -2.5, -1.25, -0.75, -0.2] {
                grid.push(FamilyParams::new(d1, 0.7, -1.0, a, b));
            }
        }
    }
    let results: Vec<_> = grid
        .par_iter()
        .map(|p| {
            let m = p.metric()?;
            let nf = spacelike_normal_form(&m)
                .ok_or_else(|| crate::Error::InvalidArgument(format!("no normal form for {p:?}")))?;
            Ok::<_, crate::Error>((p.d(), projected_linear_field(&nf)?.max_error()))
        })
        .collect();
    let mut worst = 0.0_f64;
    let (mut pos, mut neg) = (0, 0);
    for r in results {
        match r {
            Ok((d, e)) => {
                worst = worst.max(e);
                if d > 0.0 {
                    pos += 1;
                } else {
                    neg += 1;
                }
            }
            Err(e) => c.failures.push(e.to_string()),
        }
    }
    c.require(pos > 0 && neg > 0, "grid does not cover both signs of d");
    c.note(format!("{} grid points: {pos} with d > 0, {neg} with d < 0", grid.len()));
    c.measure("char poly coefficient error", worst, 1e-9);
    c.finish()
}

pub fn branch_dichotomy(seed: u64) -> CriterionResult {
    let mut c = Check::new(8, "branch-dichotomy");
    let opts = ClassifyOptions {
        seed,
        ..ClassifyOptions::default()
    };
    let mut grid = Vec::new();
    for a in [1.0, 2.0] {
        for b in [-1.0, -3.0] {
            for d1 in [-4.0, -2.0, -0.5] {
                grid.push(FamilyParams::new(d1, 0.0, -1.0, a, b));
            }
        }
    }
    let mut growth = 0.0_f64;
    let mut cone_resid = 0.0_f64;
    let (mut pos, mut neg) = (0, 0);
    for p in &grid {
        let m = family(*p);
        let v = classify_completeness_with(&m, &opts);
        if p.d() > 0.0 {
            pos += 1;
            c.require(
                v.status == VerdictStatus::IncompleteCertified,
                format!("{p:?}: d > 0 but {:?}", v.status),
            );
            c.require(!v.idempotents.is_empty(), format!("{p:?}: no idempotent"));
            match &v.witness {
                Some(Witness::Gcs(ev)) => cone_resid = cone_resid.max(ev.cone_residual),
                _ => c.failures.push(format!("{p:?}: no GCS witness")),
            }
        } else {
            neg += 1;
            c.require(
                v.status == VerdictStatus::CompleteCertified,
                format!("{p:?}: d < 0 but {:?}", v.status),
            );
            c.note(format!("{p:?}: d = {}, rule {}", p.d(), v.rule));
            let Some(nf) = spacelike_normal_form(&m) else {
                c.failures.push(format!("{p:?}: no normal form"));
                continue;
            };
            let nf = &nf;
            let runs: Vec<_> = (0..20u64)
                .into_par_iter()
                .map(|i| {
                    let mut r = rng::stream(seed ^ 0x8, i);
                    let u0 = zero_level_point(&m, nf, &mut r, 1.0);
                    let run = euler_on_zero_level(&m, nf, &u0, 100.0, &tight())?;
                    Ok::<_, crate::Error>((run.trajectory.status, run.trajectory.sup_norm() / u0.norm()))
                })
                .collect();
            for r in runs {
                match r {
                    Ok((status, g)) => {
                        c.require(status == TrajectoryStatus::CompletedHorizon, format!("{p:?}: orbit escaped"));
                        growth = growth.max(g);
                    }
                    Err(e) => c.failures.push(format!("{p:?}: {e}")),
                }
            }
        }
    }
    c.note(format!("{pos} metrics with d > 0, {neg} with d < 0"));
    c.measure("max sup |u| / |u0| on the zero level (d < 0)", growth, 1e3);
    c.measure("GCS initial point cone residual", cone_resid, 1e-8);

    // d = 0: complete, with f'' = ((a - b)^2 / 4) r^2 f on the zero level.
    let p = FamilyParams::new(-2.0, 0.4, -1.0, 1.0, -2.0);
    let m = family(p);
    let v = classify_completeness_with(&m, &opts);
    c.require(v.status == VerdictStatus::CompleteCertified, format!("d = 0: {:?}", v.status));
    match v.normal_form.as_ref() {
        Some(nf) => {
            let mut r = rng::stream(seed ^ 0x80, 0);
            let u0 = zero_level_point(&m, nf, &mut r, 0.5);
            match integrate(&m, &u0, 3.0, &tight()) {
                Ok(traj) => {
                    let coords = |t: f64| nf.frame_coordinates(&traj.state_at(t).expect("inside domain")).expect("sl2c");
                    let c0 = coords(0.0);
                    let r2 = c0[2] * c0[2] + c0[3] * c0[3];
                    let h = 1e-3;
                    let mut worst = 0.0_f64;
                    for t in [0.5, 1.0, 2.0] {
                        let fpp = (coords(t + h)[0] - 2.0 * coords(t)[0] + coords(t - h)[0]) / (h * h);
                        let expected = (p.a - p.b).powi(2) / 4.0 * r2 * coords(t)[0];
                        worst = worst.max((fpp - expected).abs() / expected.abs().max(1.0));
                    }
                    c.measure("d = 0 profile equation residual", worst, 1e-5);
                }
                Err(e) => c.failures.push(format!("d = 0: {e}")),
            }
        }
        None => c.failures.push("d = 0: no normal form".into()),
    }
    c.finish()
}

pub fn um_family(seed: u64) -> CriterionResult {
    let mut c = Check::new(9, "um-family");
    let m = family(presets::SPACELIKE_D_POSITIVE);
    let Some(nf) = spacelike_normal_form(&m) else {
        c.failures.push("normal form failed".into());
        return c.finish();
    };
    let Some(theta) = find_idempotents(&m, 64, seed).into_iter().next() else {
        c.failures.push("no idempotent".into());
        return c.finish();
    };
    let ms = [10, 100, 1000];
    let scan = scan_um_conventions(&m, &nf, &theta, &ms, 1e-8);
    for a in &scan.attempts {
        c.note(format!(
            "{:?}: residual {}",
            a.convention,
            a.max_residual.map_or("undefined".into(), |r| format!("{r:.2e}"))
        ));
    }
    let Some(conv) = scan.accepted else {
        // Unattainable from the closed form itself, not from the code.
        c.blocked = true;
        c.failures.push("no h_m(0) convention solves the Euler equation".into());
        return c.finish();
    };
    if conv != HFactorConvention::Literal {
        c.note(format!("accepted convention {conv:?}; the literal reading fails"));
    }
    let accepted = scan.attempts.iter().find(|a| a.convention == conv).and_then(|a| a.max_residual);
    c.measure("ODE residual", accepted.unwrap_or(f64::INFINITY), 1e-8);
    let dist: Vec<f64> = ms
        .iter()
        .filter_map(|&k| construct_um_solution(&m, &nf, k, &theta, conv).ok())
        .map(|s| s.initial_distance(&theta))
        .collect();
    c.require(
        dist.len() == ms.len() && dist.windows(2).all(|w| w[1] < w[0]),
        "initial distance to theta is not decreasing in m",
    );
    let shown: Vec<String> = dist.iter().map(|d| format!("{d:.3e}")).collect();
    c.note(format!("distances to theta: {}", shown.join(", ")));
    c.finish()
}

fn c64(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `gamma^{-1} gamma'` at `t` from a five-point stencil.
fn numeric_velocity(m: &MetricOp, traj: &Trajectory, gamma: &GroupElement, t: f64, h: f64) -> crate::Result<AlgebraVec> {
    let at = |dt: f64| propagate_group(m, traj, gamma, t, t + dt, 4).map(|g| *g.matrix());
    let d: Matrix2<Complex64> = (at(-2.0 * h)? - at(-h)? * c64(8.0) + at(h)? * c64(8.0) - at(2.0 * h)?) * c64(1.0 / (12.0 * h));
    Ok(m.alg().coords_of(&(gamma.inverse().matrix() * d)))
}

pub fn geodesic_reconstruction(seed: u64) -> CriterionResult {
    let mut c = Check::new(10, "geodesic-reconstruction");
    let cases = [
        (presets::paper_example(), 2.0),
        (family(presets::SPACELIKE_D_NEGATIVE), 2.0),
    ];
    let mut det_drift = 0.0_f64;
    let mut g_drift = 0.0_f64;
    let mut largest = 0.0_f64;
    for (k, (m, horizon)) in cases.iter().enumerate() {
        let results: Vec<_> = (0..5u64)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(seed ^ 0xa, 5 * k as u64 + i);
                let u0 = m.alg().random_element(&mut r, 1.0);
                let traj = integrate(m, &u0, *horizon, &tight())?;
                let end = traj.t_end();
                let path = reconstruct_geodesic(m, &traj, &GroupElement::identity())?;
                let det = path.iter().map(|g| (g.det() - c64(1.0)).norm()).fold(0.0, f64::max);
                let v0 = m.ainv() * &u0;
                let e0 = m.g(&v0, &v0);
                let scale = linalg::spectral_norm(m.gram_g());
                let mut gd = 0.0_f64;
                for j in 1..10 {
                    let t = end * j as f64 / 10.0;
                    let idx = traj.times.partition_point(|&s| s <= t) - 1;
                    let g_t = propagate_group(m, &traj, &path[idx], traj.times[idx], t, 4)?;
                    let v = numeric_velocity(m, &traj, &g_t, t, 1e-3)?;
                    gd = gd.max((m.g(&v, &v) - e0).abs() / (scale * v.norm_squared().max(v0.norm_squared())));
                }
                let size = path.iter().map(|g| g.matrix().norm()).fold(0.0, f64::max);
                Ok::<_, crate::Error>((det, gd, size))
            })
            .collect();
        for r in results {
            match r {
                Ok((d, g, size)) => {
                    det_drift = det_drift.max(d);
                    g_drift = g_drift.max(g);
                    largest = largest.max(size);
                }
                Err(e) => c.failures.push(e.to_string()),
            }
        }
    }
    c.note(format!("largest |gamma| along the geodesics: {largest:.3e}"));
    c.measure("|det gamma - 1|", det_drift, 1e-8);
    c.measure("g(gamma', gamma') drift", g_drift, 1e-7);
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_matches_tags_names_and_ids() {
        let cones: Vec<u8> = CRITERIA.iter().filter(|c| c.matches("cones")).map(|c| c.id).collect();
        assert_eq!(cones, vec![4]);
        assert!(CRITERIA[6].matches("7"));
        assert!(CRITERIA[0].matches("ray"));
        assert!(run(0, Some("no-such-criterion")).criteria.is_empty());
    }

    #[test]
    fn fast_criteria_pass() {
        for r in [killing_solver(0), v_matrix_char_poly(0)] {
            assert_eq!(r.status, CriterionStatus::Pass, "{}", r.line());
        }
    }
}
