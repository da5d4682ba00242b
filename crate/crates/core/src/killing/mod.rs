//! Left-invariant Killing fields and the completeness verdict.
//!
//! A left-invariant field with value `z` at the identity is Killing iff
//! `A ad_z = ad_z A`, so the generators form the nullspace of the linear map
//! `z -> A ad_z - ad_z A`.

mod normal_form;
mod verdict;

pub use normal_form::{
    euler_on_zero_level, normal_form, projected_linear_field, zero_level_point, NormalForm, ProjectedField,
    ZeroLevelRun,
};
pub use verdict::{
    classify_completeness, classify_completeness_with, find_gcs_witness, ClassifyOptions, GcsEvidence, OrbitStats,
    Verdict, VerdictStatus, Witness,
};

use crate::lie::{AlgebraKind, AlgebraVec, ElementClass};
use crate::linalg;
use crate::metric::{CausalCharacter, MetricOp};
use nalgebra::DMatrix;
use serde::Serialize;

/// Singular values below this fraction of the largest count as zero.
pub const NULLSPACE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct KillingGenerator {
    /// Unit-norm generator, sign fixed so the largest-magnitude entry is positive.
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub z: AlgebraVec,
    pub causal: CausalCharacter,
    pub class: ElementClass,
    pub compact: bool,
    /// `|A ad_z - ad_z A| / (|A| |ad_z|)`.
    pub commutation_residual: f64,
    /// `|(ad_z)* + ad_z| / |ad_z|` with `(ad_z)*` the metric adjoint.
    pub skew_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KillingReport {
    pub generators: Vec<KillingGenerator>,
    /// Singular values of the commutation map, descending.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    /// Ratio of the smallest singular value kept as nonzero to the largest
    /// one counted as zero (infinite when the nullspace is empty or exact).
    pub spectral_gap: f64,
    /// Index of the generator used for classification: the most favorable
    /// causal character in the order timelike, lightlike, spacelike.
    pub preferred: Option<usize>,
}

impl KillingReport {
    pub fn preferred_generator(&self) -> Option<&KillingGenerator> {
        self.preferred.map(|i| &self.generators[i])
    }
}

fn commutation_map(m: &MetricOp) -> DMatrix<f64> {
    let n = m.dim();
    let a = m.a();
    let mut map = DMatrix::zeros(n * n, n);
    for j in 0..n {
        let ad = m.alg().ad_matrix(&m.alg().basis_vector(j));
        let c = a * &ad - &ad * a;
        map.set_column(j, &nalgebra::DVector::from_column_slice(c.as_slice()));
    }
    map
}

fn sign_normalized(v: AlgebraVec) -> AlgebraVec {
    let v = linalg::unit(&v);
    let (imax, _) = v.iter().enumerate().fold((0, 0.0_f64), |(bi, bv), (i, x)| {
        if x.abs() > bv + 1e-12 {
            (i, x.abs())
        } else {
            (bi, bv)
        }
    });
    if v[imax] < 0.0 {
        -v
    } else {
        v
    }
}

fn rank(c: CausalCharacter) -> u8 {
    match c {
        CausalCharacter::Timelike => 0,
        CausalCharacter::Lightlike => 1,
        CausalCharacter::Spacelike => 2,
        CausalCharacter::Zero => 3,
    }
}

/// Basis of the Killing generators. Within a multi-dimensional nullspace the
/// basis diagonalizes `g`, so the most timelike direction comes first.
pub fn find_killing(m: &MetricOp) -> KillingReport {
    let map = commutation_map(m);
    let ns = linalg::nullspace(&map, NULLSPACE_REL_TOL);
    let k = ns.basis.ncols();
    let sv = &ns.singular_values;
    let spectral_gap = if k == 0 || k == sv.len() {
        f64::INFINITY
    } else {
        let zero = sv[sv.len() - k];
        if zero == 0.0 {
            f64::INFINITY
        } else {
            sv[sv.len() - k - 1] / zero
        }
    };

    let mut vectors: Vec<AlgebraVec> = Vec::new();
    if k > 0 {
        let w = &ns.basis;
        let gram = w.transpose() * m.gram_g() * w;
        let (_, q) = linalg::sym_eigen(&linalg::symmetrize(&gram));
        for j in 0..k {
            vectors.push(sign_normalized(w * q.column(j)));
        }
    }
    let a_norm = linalg::spectral_norm(m.a());
    let generators: Vec<KillingGenerator> = vectors
        .into_iter()
        .map(|z| {
            let ad = m.alg().ad_matrix(&z);
            let ad_norm = linalg::spectral_norm(&ad).max(f64::MIN_POSITIVE);
            let comm = m.a() * &ad - &ad * m.a();
            let skew = m.ad_star(&z) + &ad;
            let class = m.alg().classify_element(&z);
            KillingGenerator {
                causal: m.causal_character(&z),
                compact: class.compact,
                class,
                commutation_residual: linalg::spectral_norm(&comm) / (a_norm * ad_norm),
                skew_residual: linalg::spectral_norm(&skew) / ad_norm,
                z,
            }
        })
        .collect();
    let preferred = (0..generators.len()).min_by_key(|&i| rank(generators[i].causal));
    KillingReport {
        generators,
        singular_values: ns.singular_values,
        threshold: ns.threshold,
        spectral_gap,
        preferred,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KillingValidation {
    pub class: ElementClass,
    pub causal: CausalCharacter,
    pub compact: bool,
    pub nilpotent: bool,
    /// Whether `A z` is nilpotent (forced when a lightlike Killing generator
    /// coexists with incompleteness).
    pub a_z_nilpotent: bool,
    /// Structural claims contradicted by the numbers, for human review.
    pub warnings: Vec<String>,
}

/// Structural checks on a Killing generator `z`.
pub fn validate_killing_structure(m: &MetricOp, z: &AlgebraVec) -> KillingValidation {
    let alg = m.alg();
    let class = alg.classify_element(z);
    let causal = m.causal_character(z);
    let az = m.a() * z;
    let a_z_nilpotent = alg.classify_element(&az).nilpotent;
    let mut warnings = Vec::new();
    let comm = m.a() * alg.ad_matrix(z) - alg.ad_matrix(z) * m.a();
    if linalg::spectral_norm(&comm) > 1e-9 * linalg::spectral_norm(m.a()) * linalg::spectral_norm(&alg.ad_matrix(z)) {
        warnings.push("z does not commute with A: not a Killing generator".into());
    }
    if alg.kind() == AlgebraKind::Sl2c {
        if class.nilpotent {
            warnings.push("nilpotent Killing generator in dimension > 3".into());
        }
        if class.real_diagonalizable {
            warnings.push("Killing generator with real-diagonalizable ad in dimension > 3".into());
        }
    }
    if causal == CausalCharacter::Timelike && !class.compact {
        warnings.push("timelike Killing generator that is not a compact element".into());
    }
    KillingValidation {
        compact: class.compact,
        nilpotent: class.nilpotent,
        class,
        causal,
        a_z_nilpotent,
        warnings,
    }
}
