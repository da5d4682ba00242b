//! The completeness decision walk.
//!
//! Certified outcomes rest on a theorem whose hypotheses were checked
//! numerically; evidence outcomes rest on integration alone.

use super::{find_killing, normal_form, KillingReport, NormalForm};
use crate::cones::{self, ConeRelation};
use crate::dynamics::{detect_gcs, find_idempotents, integrate, GcsOptions, GcsWitness, IntegrateOptions, TrajectoryStatus};
use crate::lie::{AlgebraKind, AlgebraVec};
use crate::metric::{CausalCharacter, MetricOp};
use crate::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictStatus {
    #[serde(rename = "Complete_certified")]
    CompleteCertified,
    #[serde(rename = "Incomplete_certified")]
    IncompleteCertified,
    #[serde(rename = "Complete_evidence")]
    CompleteEvidence,
    #[serde(rename = "Incomplete_evidence")]
    IncompleteEvidence,
    #[serde(rename = "Undetermined")]
    Undetermined,
}

impl VerdictStatus {
    pub fn is_certified(self) -> bool {
        matches!(self, VerdictStatus::CompleteCertified | VerdictStatus::IncompleteCertified)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GcsEvidence {
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub initial_point: AlgebraVec,
    pub gcs: GcsWitness,
    pub escape_time: Option<f64>,
    pub escape_time_estimate: Option<f64>,
    /// Largest of `|g*(u0,u0)|` and `|tr u0^2|` for the unit initial point.
    pub cone_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitStats {
    pub count: usize,
    pub horizon: f64,
    pub escaped: usize,
    pub max_sup_norm: f64,
    pub max_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    ConeDisjointness {
        margin: f64,
        n_seeds: usize,
    },
    KillingGenerator {
        #[serde(serialize_with = "crate::serde_util::vector")]
        z: AlgebraVec,
        causal: CausalCharacter,
    },
    Idempotent {
        #[serde(serialize_with = "crate::serde_util::vector")]
        point: AlgebraVec,
    },
    Gcs(GcsEvidence),
    BoundedOrbits(OrbitStats),
    Escape {
        #[serde(serialize_with = "crate::serde_util::vector")]
        initial_point: AlgebraVec,
        escape_time: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    /// Identifier of the rule that decided the status.
    pub rule: String,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<NormalForm>,
    pub killing_report: KillingReport,
    pub cone_relation: ConeRelation,
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub idempotents: Vec<AlgebraVec>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyOptions {
    pub seed: u64,
    pub cone_seeds: usize,
    pub idempotent_seeds: usize,
    pub sweep_count: usize,
    pub sweep_horizon: f64,
    pub integrate: IntegrateOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            seed: 0,
            cone_seeds: cones::DISJOINT_MIN_SEEDS,
            idempotent_seeds: 200,
            sweep_count: 20,
            sweep_horizon: 50.0,
            integrate: IntegrateOptions::default(),
        }
    }
}

pub fn classify_completeness(m: &MetricOp) -> Verdict {
    classify_completeness_with(m, &ClassifyOptions::default())
}

/// Searches the zero level `K(u, i xi) = 0` of the cone intersection for an
/// integral curve that escapes through a spiral (GCS) with `r > 1`.
pub fn find_gcs_witness(m: &MetricOp, nf: &NormalForm, opts: &ClassifyOptions) -> Option<GcsEvidence> {
    let kz = m.gram_k() * nf.generator();
    let alg = m.alg();
    (0..32u64).find_map(|i| {
        let mut r = rng::stream(opts.seed ^ 0x6c5, i);
        let dir = crate::linalg::unit(&alg.random_element(&mut r, 1.0));
        let p = cones::project_to_intersection(m, &dir, std::slice::from_ref(&kz))?;
        let cone_residual = m.g_star(&p, &p).abs().max(alg.square_trace(&p).norm());
        [p.clone(), -p].into_iter().find_map(|u0| {
            let traj = integrate(m, &u0, opts.sweep_horizon, &opts.integrate).ok()?;
            if traj.status != TrajectoryStatus::Escaped {
                return None;
            }
            let gcs = detect_gcs(&traj, &GcsOptions::default())?;
            (gcs.r > 1.0).then_some(GcsEvidence {
                initial_point: u0,
                gcs,
                escape_time: traj.escape_time,
                escape_time_estimate: traj.escape_time_estimate,
                cone_residual,
            })
        })
    })
}

fn sweep(m: &MetricOp, opts: &ClassifyOptions) -> (OrbitStats, Option<(AlgebraVec, f64)>) {
    let runs: Vec<_> = (0..opts.sweep_count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(opts.seed ^ 0x5eeb, i as u64);
            let u0 = m.alg().random_element(&mut r, 1.0);
            let traj = integrate(m, &u0, opts.sweep_horizon, &opts.integrate);
            (u0, traj)
        })
        .collect();
    let mut stats = OrbitStats {
        count: runs.len(),
        horizon: opts.sweep_horizon,
        escaped: 0,
        max_sup_norm: 0.0,
        max_drift: 0.0,
    };
    let mut escape = None;
    for (u0, traj) in runs {
        let Ok(traj) = traj else { continue };
        stats.max_sup_norm = stats.max_sup_norm.max(traj.sup_norm());
        stats.max_drift = stats.max_drift.max(traj.drift.max());
        if traj.status == TrajectoryStatus::Escaped {
            stats.escaped += 1;
            if escape.is_none() {
                escape = Some((u0, traj.escape_time.unwrap_or(traj.t_end())));
            }
        }
    }
    (stats, escape)
}

/// Decision walk: disjoint cones; Killing generators (sl2r, causal, then the
/// spacelike normal form and the sign of `d`); idempotents; and finally an
/// integration sweep that can only produce evidence.
pub fn classify_completeness_with(m: &MetricOp, opts: &ClassifyOptions) -> Verdict {
    let samples = cones::sample_intersection(m, opts.cone_seeds, opts.seed);
    let cone_report = cones::intersection_summary(&samples, 0);
    let killing_report = find_killing(m);
    let mut verdict = Verdict {
        status: VerdictStatus::Undetermined,
        rule: String::new(),
        witness: None,
        normal_form: None,
        killing_report,
        cone_relation: cone_report.relation,
        idempotents: Vec::new(),
        notes: Vec::new(),
    };

    if cone_report.relation == ConeRelation::Disjoint {
        verdict.status = VerdictStatus::CompleteCertified;
        verdict.rule = "disjoint-cones".into();
        verdict.witness = Some(Witness::ConeDisjointness {
            margin: samples.disjointness_margin.unwrap_or(0.0),
            n_seeds: samples.n_seeds,
        });
        return verdict;
    }

    if let Some(gen) = verdict.killing_report.preferred_generator().cloned() {
        let z_witness = Witness::KillingGenerator {
            z: gen.z.clone(),
            causal: gen.causal,
        };
        if m.kind() == AlgebraKind::Sl2r {
            verdict.status = VerdictStatus::CompleteCertified;
            verdict.rule = "sl2r-killing-field".into();
            verdict.witness = Some(z_witness);
            return verdict;
        }
        match gen.causal {
            CausalCharacter::Timelike | CausalCharacter::Lightlike => {
                verdict.status = VerdictStatus::CompleteCertified;
                verdict.rule = if gen.causal == CausalCharacter::Timelike {
                    "timelike-killing-field".into()
                } else {
                    "lightlike-killing-field".into()
                };
                verdict.notes.push(
                    "the pairing K(u, z) with the Killing generator z is a linear first integral; \
                     A z is an equilibrium of the Euler field"
                        .into(),
                );
                verdict.witness = Some(z_witness);
                return verdict;
            }
            CausalCharacter::Spacelike => match normal_form(m, &gen.z) {
                Ok(nf) => {
                    let scale = (nf.d1.abs() + nf.a.abs() + nf.b.abs()).powi(2).max(1.0);
                    if nf.d <= 1e-9 * scale {
                        verdict.status = VerdictStatus::CompleteCertified;
                        verdict.rule = "spacelike-killing-d-nonpositive".into();
                        verdict.witness = Some(z_witness);
                    } else {
                        verdict.status = VerdictStatus::IncompleteCertified;
                        verdict.rule = "spacelike-killing-d-positive".into();
                        verdict.idempotents = find_idempotents(m, opts.idempotent_seeds, opts.seed);
                        verdict.witness = match find_gcs_witness(m, &nf, opts) {
                            Some(ev) => Some(Witness::Gcs(ev)),
                            None => {
                                verdict.notes.push("no GCS witness found by integration".into());
                                verdict
                                    .idempotents
                                    .first()
                                    .map(|x| Witness::Idempotent { point: x.clone() })
                            }
                        };
                    }
                    verdict.normal_form = Some(nf);
                    return verdict;
                }
                Err(e) => verdict.notes.push(format!("normal form failed: {e}")),
            },
            CausalCharacter::Zero => {}
        }
    }

    verdict.idempotents = find_idempotents(m, opts.idempotent_seeds, opts.seed);
    if let Some(x) = verdict.idempotents.first() {
        verdict.status = VerdictStatus::IncompleteCertified;
        verdict.rule = "idempotent".into();
        verdict.witness = Some(Witness::Idempotent { point: x.clone() });
        return verdict;
    }

    let (stats, escape) = sweep(m, opts);
    if let Some((u0, t)) = escape {
        verdict.status = VerdictStatus::IncompleteEvidence;
        verdict.rule = "escape-in-sweep".into();
        verdict.witness = Some(Witness::Escape {
            initial_point: u0,
            escape_time: t,
        });
    } else {
        verdict.status = VerdictStatus::Undetermined;
        verdict.rule = "no-rule-applies".into();
        verdict.notes.push("no idempotent found; all sampled orbits stayed bounded".into());
        verdict.witness = Some(Witness::BoundedOrbits(stats));
    }
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn quick() -> ClassifyOptions {
        ClassifyOptions {
            cone_seeds: 100,
            idempotent_seeds: 64,
            sweep_count: 4,
            sweep_horizon: 10.0,
            ..ClassifyOptions::default()
        }
    }

    #[test]
    fn family_branches() {
        let v = classify_completeness_with(&presets::SPACELIKE_D_NEGATIVE.metric().unwrap(), &quick());
        assert_eq!(v.status, VerdictStatus::CompleteCertified);
        assert_eq!(v.rule, "spacelike-killing-d-nonpositive");
        let v = classify_completeness_with(&presets::SPACELIKE_D_ZERO.metric().unwrap(), &quick());
        assert_eq!(v.status, VerdictStatus::CompleteCertified);

        let v = classify_completeness_with(&presets::SPACELIKE_D_POSITIVE.metric().unwrap(), &quick());
        assert_eq!(v.status, VerdictStatus::IncompleteCertified);
        assert!(!v.idempotents.is_empty());
        match v.witness {
            Some(Witness::Gcs(ev)) => assert!(ev.gcs.r > 1.0),
            other => panic!("{other:?}"),
        }
        let v = classify_completeness_with(&presets::SPACELIKE_D_POSITIVE_SPIRAL.metric().unwrap(), &quick());
        assert_eq!(v.status, VerdictStatus::IncompleteCertified);
        assert!(matches!(v.witness, Some(Witness::Gcs(_))));
    }

    #[test]
    fn causal_and_sl2r_branches() {
        let v = classify_completeness_with(&presets::TIMELIKE_KILLING.metric().unwrap(), &quick());
        assert_eq!(v.rule, "timelike-killing-field");
        let v = classify_completeness_with(&presets::LIGHTLIKE_KILLING.metric().unwrap(), &quick());
        assert_eq!(v.rule, "lightlike-killing-field");
        for name in ["sl2r-nilpotent-killing", "sl2r-semisimple-killing"] {
            let v = classify_completeness_with(&presets::metric(name).unwrap(), &quick());
            assert_eq!(v.status, VerdictStatus::CompleteCertified);
            assert_eq!(v.rule, "sl2r-killing-field");
        }
        let v = classify_completeness_with(&presets::paper_example(), &quick());
        assert_eq!(v.status, VerdictStatus::CompleteCertified);
        assert_eq!(v.rule, "timelike-killing-field");
        assert!(v.idempotents.is_empty());
    }

    #[test]
    fn idempotent_branch_without_killing_field() {
        // Perturb the d > 0 family so the Killing field disappears; the
        // idempotents persist under small perturbations.
        let mut ainv = presets::SPACELIKE_D_POSITIVE.ainv();
        ainv[(1, 1)] = 1.1;
        let m = MetricOp::new(AlgebraKind::Sl2c, ainv).unwrap();
        assert!(find_killing(&m).generators.is_empty());
        let v = classify_completeness_with(&m, &quick());
        assert_eq!(v.status, VerdictStatus::IncompleteCertified);
        assert_eq!(v.rule, "idempotent");
    }

    #[test]
    fn serialized_shape() {
        let v = classify_completeness_with(&presets::SPACELIKE_D_NEGATIVE.metric().unwrap(), &quick());
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["status"], "Complete_certified");
        assert!(json["normal_form"]["d"].as_f64().unwrap() < 0.0);
        assert!(json["killing_report"]["generators"].is_array());
    }
}
