//! The null cone `{g*(x,x) = 0}`, the nilpotent cone `{tr(x^2) = 0}` and
//! their intersection.

use crate::dynamics::euler_field;
use crate::error::{Error, Result};
use crate::lie::{AlgebraKind, AlgebraSpec, AlgebraVec};
use crate::linalg;
use crate::metric::MetricOp;
use crate::rng;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

pub const TRANSVERSALITY_TOL: f64 = 1e-6;

pub fn on_null_cone(m: &MetricOp, x: &AlgebraVec, tol: f64) -> Result<bool> {
    m.alg().check_dim(x)?;
    let n2 = x.norm_squared();
    if n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(m.g_star(x, x).abs() < tol * n2)
}

pub fn on_nilpotent_cone(alg: &AlgebraSpec, x: &AlgebraVec, tol: f64) -> Result<bool> {
    alg.check_dim(x)?;
    let n2 = x.norm_squared();
    if n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let t = alg.square_trace(x);
    Ok(match alg.kind() {
        AlgebraKind::Sl2c => t.re.abs() < tol * n2 && t.im.abs() < tol * n2,
        AlgebraKind::Sl2r => t.re.abs() < tol * n2,
    })
}

/// The cones meet transversally at `x` iff `F(x) = [x, A^{-1}x] != 0`.
/// Nonvanishing is tested against `1e-6 |x|^2 |A^{-1}|`: near a tangency the
/// projection converges only to the square root of its residual, so `F` can
/// be of order 1e-8 at a numerically converged tangent point.
pub fn transversality(m: &MetricOp, x: &AlgebraVec) -> Result<bool> {
    m.alg().check_dim(x)?;
    let n2 = x.norm_squared();
    if n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let gstar = m.g_star(x, x).abs() / n2;
    let trace = m.alg().square_trace(x).norm() / n2;
    let gscale = linalg::spectral_norm(m.gram_gstar());
    if gstar > 1e-8 * gscale || trace > 1e-8 {
        return Err(Error::NotOnIntersection { gstar, trace });
    }
    Ok(euler_field(m, x).norm() > TRANSVERSALITY_TOL * n2 * linalg::spectral_norm(m.ainv()))
}

/// Quadratic constraint forms whose common unit zeros are the intersection.
fn constraint_forms(m: &MetricOp) -> Vec<DMatrix<f64>> {
    let (re, im) = m.alg().trace_grams();
    let mut forms = vec![m.gram_gstar().clone(), re.clone()];
    if m.kind() == AlgebraKind::Sl2c {
        forms.push(im.clone());
    }
    forms
}

fn constraint_residual(forms: &[DMatrix<f64>], x: &AlgebraVec) -> f64 {
    forms
        .iter()
        .map(|q| (x.transpose() * q * x)[(0, 0)].abs())
        .fold(0.0, f64::max)
}

/// Projects `x0` onto the unit slice of the intersection, optionally with
/// extra linear constraints `l . x = 0`, by Gauss-Newton with minimum-norm
/// steps on the exact (quadratic) constraint Jacobian. Returns `None` if the
/// constraint residual does not fall below 1e-10.
pub fn project_to_intersection(m: &MetricOp, x0: &AlgebraVec, extra_linear: &[AlgebraVec]) -> Option<AlgebraVec> {
    let forms = constraint_forms(m);
    let n = m.dim();
    let rows = forms.len() + 1 + extra_linear.len();
    let mut x = x0.clone();
    for _ in 0..200 {
        let mut c = DVector::zeros(rows);
        let mut jac = DMatrix::zeros(rows, n);
        for (i, q) in forms.iter().enumerate() {
            let qx = q * &x;
            c[i] = x.dot(&qx);
            jac.set_row(i, &(qx * 2.0).transpose());
        }
        let s = forms.len();
        c[s] = x.norm_squared() - 1.0;
        jac.set_row(s, &(&x * 2.0).transpose());
        for (j, l) in extra_linear.iter().enumerate() {
            c[s + 1 + j] = l.dot(&x);
            jac.set_row(s + 1 + j, &l.transpose());
        }
        if c.amax() < 1e-15 {
            break;
        }
        let dx = linalg::lstsq(&jac, &(-c), 1e-12);
        x += &dx;
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
        if dx.amax() < 1e-17 {
            break;
        }
    }
    let x = linalg::unit(&x);
    let lin_ok = extra_linear.iter().all(|l| l.dot(&x).abs() < 1e-10 * l.norm().max(1.0));
    (constraint_residual(&forms, &x) < 1e-10 && lin_ok).then_some(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterInfo {
    pub size: usize,
    pub diameter: f64,
    /// Median nullity of the constraint Jacobian (2 on a transversal sl2c
    /// intersection).
    pub intrinsic_dim: usize,
    /// Smallest `|P F(x)| / |F(x)|` over the cluster, with `P` the projection
    /// onto the tangent plane of the unit slice. A nonvanishing tangent field
    /// on a closed surface forces Euler characteristic 0.
    pub min_tangential_field: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterSummary {
    pub components: usize,
    pub adjacency_radius: f64,
    pub clusters: Vec<ClusterInfo>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeSampleSet {
    pub n_seeds: usize,
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub points: Vec<AlgebraVec>,
    pub transversal_flags: Vec<bool>,
    /// Largest of `|g*(x,x)|` and `|tr x^2|` per point.
    pub residuals: Vec<f64>,
    pub cluster_summary: ClusterSummary,
    /// Smallest `|g*(x,x)| + |tr x^2|` found on the unit sphere, computed only
    /// when no seed converged.
    pub disjointness_margin: Option<f64>,
}

/// Samples the unit slice of the intersection from `n_seeds` random seeds;
/// converged points are deduplicated at radius 1e-6 in seed order.
pub fn sample_intersection(m: &MetricOp, n_seeds: usize, seed: u64) -> ConeSampleSet {
    let alg = m.alg();
    let found: Vec<Option<AlgebraVec>> = (0..n_seeds)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i as u64);
            let x0 = linalg::unit(&alg.random_element(&mut rng, 1.0));
            project_to_intersection(m, &x0, &[])
        })
        .collect();
    let mut points: Vec<AlgebraVec> = Vec::new();
    for p in found.into_iter().flatten() {
        if points.iter().all(|q| (q - &p).norm() > 1e-6) {
            points.push(p);
        }
    }
    let forms = constraint_forms(m);
    let transversal_flags = points.iter().map(|p| transversality(m, p).unwrap_or(false)).collect();
    let residuals = points.iter().map(|p| constraint_residual(&forms, p)).collect();
    let disjointness_margin = points.is_empty().then(|| min_cone_defect(m, 64, seed));
    let cluster_summary = summarize_clusters(m, &points);
    ConeSampleSet {
        n_seeds,
        points,
        transversal_flags,
        residuals,
        cluster_summary,
        disjointness_margin,
    }
}

/// Minimizes `g*(x,x)^2 + |tr x^2|^2` over the unit sphere by projected
/// gradient descent from `starts` random points and returns the smallest
/// `|g*(x,x)| + |tr x^2|` reached.
pub fn min_cone_defect(m: &MetricOp, starts: usize, seed: u64) -> f64 {
    let forms = constraint_forms(m);
    let phi = |x: &AlgebraVec| -> f64 {
        forms
            .iter()
            .map(|q| (x.transpose() * q * x)[(0, 0)].powi(2))
            .sum()
    };
    let grad = |x: &AlgebraVec| -> AlgebraVec {
        let mut g = DVector::zeros(x.len());
        for q in &forms {
            let qx = q * x;
            g += &qx * (4.0 * x.dot(&qx));
        }
        g
    };
    let defect = |x: &AlgebraVec| -> f64 {
        let mut it = forms.iter().map(|q| (x.transpose() * q * x)[(0, 0)]);
        let gstar = it.next().unwrap_or(0.0).abs();
        let tr: f64 = it.map(|v| v * v).sum::<f64>().sqrt();
        gstar + tr
    };
    (0..starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed ^ 0x5eed, i as u64);
            let mut x = linalg::unit(&m.alg().random_element(&mut rng, 1.0));
            let mut step = 0.1;
            let mut f = phi(&x);
            for _ in 0..500 {
                let g = grad(&x);
                let tangent = &g - &x * x.dot(&g);
                if tangent.norm() < 1e-14 {
                    break;
                }
                loop {
                    let trial = linalg::unit(&(&x - &tangent * step));
                    let ft = phi(&trial);
                    if ft < f {
                        x = trial;
                        f = ft;
                        step *= 1.5;
                        break;
                    }
                    step *= 0.5;
                    if step < 1e-14 {
                        break;
                    }
                }
                if step < 1e-14 {
                    break;
                }
            }
            defect(&x)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

fn constraint_jacobian(forms: &[DMatrix<f64>], x: &AlgebraVec) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(forms.len() + 1, x.len());
    for (i, q) in forms.iter().enumerate() {
        jac.set_row(i, &(q * x).transpose());
    }
    jac.set_row(forms.len(), &x.transpose());
    jac
}

fn tangential_fraction(m: &MetricOp, forms: &[DMatrix<f64>], x: &AlgebraVec) -> f64 {
    let f = euler_field(m, x);
    let fnorm = f.norm();
    if fnorm == 0.0 {
        return 0.0;
    }
    // Orthonormal basis of the tangent plane = nullspace of the constraint Jacobian.
    let ns = linalg::nullspace(&constraint_jacobian(forms, x), 1e-9);
    let coeffs = ns.basis.transpose() * &f;
    coeffs.norm() / fnorm
}

fn summarize_clusters(m: &MetricOp, points: &[AlgebraVec]) -> ClusterSummary {
    let n = points.len();
    if n == 0 {
        return ClusterSummary {
            components: 0,
            adjacency_radius: 0.0,
            clusters: Vec::new(),
        };
    }
    let dist = |i: usize, j: usize| (&points[i] - &points[j]).norm();
    let nn: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| dist(i, j)).fold(f64::INFINITY, f64::min))
        .collect();
    let max_nn = nn.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let radius = 2.0 * max_nn;

    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist(i, j) <= radius {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        match groups.iter_mut().find(|(k, _)| *k == r) {
            Some((_, v)) => v.push(i),
            None => groups.push((r, vec![i])),
        }
    }

    let forms = constraint_forms(m);
    let clusters = groups
        .iter()
        .map(|(_, idx)| {
            let mut diameter = 0.0_f64;
            for (a, &i) in idx.iter().enumerate() {
                for &j in &idx[a + 1..] {
                    diameter = diameter.max(dist(i, j));
                }
            }
            ClusterInfo {
                size: idx.len(),
                diameter,
                intrinsic_dim: local_dimension(&forms, points, idx),
                min_tangential_field: idx
                    .iter()
                    .map(|&i| tangential_fraction(m, &forms, &points[i]))
                    .fold(f64::INFINITY, f64::min),
            }
        })
        .collect();
    ClusterSummary {
        components: groups.len(),
        adjacency_radius: radius,
        clusters,
    }
}

/// Median over points of the nullity of the constraint Jacobian (the
/// dimension of the unit slice near the point when it is a manifold there).
fn local_dimension(forms: &[DMatrix<f64>], points: &[AlgebraVec], idx: &[usize]) -> usize {
    let mut dims: Vec<usize> = idx
        .iter()
        .map(|&i| linalg::nullspace(&constraint_jacobian(forms, &points[i]), 1e-6).basis.ncols())
        .collect();
    dims.sort_unstable();
    dims[dims.len() / 2]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeRelation {
    /// No intersection, certified by a positive defect minimum.
    Disjoint,
    /// Some sampled intersection point has `F(x) = 0`.
    TangentSomewhere,
    TransversalEverywhere,
    /// No point found but too few seeds or no positive margin.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectionReport {
    pub relation: ConeRelation,
    pub n_points: usize,
    pub components: usize,
    pub idempotents_found: usize,
    /// When the intersection is transversal and no idempotent exists: whether
    /// every cluster looks like a closed surface carrying a nonvanishing
    /// tangent field (hence a torus).
    pub torus_consistent: Option<bool>,
    pub max_constraint_residual: f64,
    pub disjointness_margin: Option<f64>,
}

pub const DISJOINT_MIN_SEEDS: usize = 500;
pub const DISJOINT_MIN_MARGIN: f64 = 1e-4;

pub fn intersection_summary(samples: &ConeSampleSet, idempotents_found: usize) -> IntersectionReport {
    let n_points = samples.points.len();
    let relation = if n_points == 0 {
        match samples.disjointness_margin {
            Some(margin) if samples.n_seeds >= DISJOINT_MIN_SEEDS && margin > DISJOINT_MIN_MARGIN => {
                ConeRelation::Disjoint
            }
            _ => ConeRelation::Inconclusive,
        }
    } else if samples.transversal_flags.iter().all(|&t| t) {
        ConeRelation::TransversalEverywhere
    } else {
        ConeRelation::TangentSomewhere
    };
    let torus_consistent = (relation == ConeRelation::TransversalEverywhere && idempotents_found == 0).then(|| {
        samples
            .cluster_summary
            .clusters
            .iter()
            .all(|c| c.intrinsic_dim == 2 && c.min_tangential_field > 1e-3)
    });
    IntersectionReport {
        relation,
        n_points,
        components: samples.cluster_summary.components,
        idempotents_found,
        torus_consistent,
        max_constraint_residual: samples.residuals.iter().copied().fold(0.0, f64::max),
        disjointness_margin: samples.disjointness_margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use nalgebra::{DVector, Matrix2};
    use num_complex::Complex64;

    #[test]
    fn membership_examples() {
        let m = presets::paper_example();
        let alg = m.alg();
        // x1 = 1, x3 = 1/sqrt2 satisfies x1^2 + ... - 2 x3^2 = 0.
        let x = DVector::from_vec(vec![1.0, 0.0, 0.5f64.sqrt(), 0.0, 0.0, 0.0]);
        assert!(on_null_cone(&m, &x, 1e-12).unwrap());
        assert!(on_null_cone(&m, &(&x * -3.0), 1e-12).unwrap());
        assert!(!on_null_cone(&m, &alg.basis_vector(2), 1e-9).unwrap());
        assert_eq!(on_null_cone(&m, &alg.zero(), 1e-9), Err(Error::ZeroVector));

        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let nil = alg.coords_of(&Matrix2::new(z, o, z, z));
        assert!(on_nilpotent_cone(alg, &nil, 1e-12).unwrap());
        let r = AlgebraSpec::sl2r();
        assert!(!on_nilpotent_cone(r, &r.basis_vector(2), 1e-9).unwrap());
        assert!(on_nilpotent_cone(r, &r.basis_vector(0), 1e-12).unwrap());

        // Unit point of the torus family: x1^2+x2^2+y3^2 = 1/2 = x3^2+y1^2+y2^2.
        // With y2 = 0 and y3 = 0.1, x1 y1 = x3 y3 gives x1 = 0.2.
        let x3 = (0.4f64).sqrt();
        let y1 = (0.1f64).sqrt();
        let (x1, y3) = (0.2_f64, 0.1_f64);
        let x2 = (0.5 - x1 * x1 - y3 * y3).sqrt();
        let p = DVector::from_vec(vec![x1, x2, x3, y1, 0.0, y3]);
        assert!((p.norm() - 1.0).abs() < 1e-15);
        assert!(on_nilpotent_cone(alg, &p, 1e-12).unwrap());
        assert!(on_null_cone(&m, &p, 1e-12).unwrap());
        assert!(transversality(&m, &p).unwrap());
    }

    #[test]
    fn transversality_requires_intersection_point() {
        let m = presets::paper_example();
        assert!(matches!(
            transversality(&m, &m.alg().basis_vector(0)),
            Err(Error::NotOnIntersection { .. })
        ));
    }

    #[test]
    fn example_intersection_samples() {
        let m = presets::paper_example();
        let s = sample_intersection(&m, 300, 1);
        assert!(s.points.len() > 200);
        for (p, t) in s.points.iter().zip(&s.transversal_flags) {
            assert!((p[2].abs() - 0.4f64.sqrt()).abs() < 1e-8);
            assert!((p.norm() - 1.0).abs() < 1e-12);
            assert!(*t);
        }
        let report = intersection_summary(&s, 0);
        assert_eq!(report.relation, ConeRelation::TransversalEverywhere);
        assert_eq!(report.components, 2);
        assert_eq!(report.torus_consistent, Some(true));
    }

    #[test]
    fn definite_dual_form_gives_disjoint_cones() {
        let ainv = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0, -1.0, 1.0]));
        let m = MetricOp::semi_riemannian(AlgebraSpec::sl2c(), ainv).unwrap();
        let s = sample_intersection(&m, 500, 2);
        assert!(s.points.is_empty());
        let report = intersection_summary(&s, 0);
        assert_eq!(report.relation, ConeRelation::Disjoint);
        assert!(report.disjointness_margin.unwrap() > 1.0);
    }

    #[test]
    fn tangent_intersection_on_sl2r_killing_metric() {
        // For A^-1 = diag(1,1,2) on sl2r the intersection is the x and y
        // axes, where F vanishes.
        let m = presets::metric("sl2r-semisimple-killing").unwrap();
        let s = sample_intersection(&m, 50, 3);
        assert!(!s.points.is_empty());
        assert!(s.transversal_flags.iter().all(|t| !t));
        assert_eq!(intersection_summary(&s, 0).relation, ConeRelation::TangentSomewhere);
    }
}
