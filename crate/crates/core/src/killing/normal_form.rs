//! Normal form of an sl2c metric with a non-nilpotent Killing generator.
//!
//! After conjugating the generator to `i xi` with `xi = diag(1,-1)`, `A^{-1}`
//! preserves the centralizer `c(xi) = span{xi, i xi}` and its complement
//! `[xi, g]`. On the centralizer `A^{-1} xi = d1 xi - d2 i xi` and
//! `A^{-1}(i xi) = d2 xi + d3 i xi`; on `[xi, g]` it is `diag(a, a, b, b)` in
//! a g-orthonormal frame `(e_a1, e_a2, e_b1, e_b2)` where `ad_{i xi}` rotates
//! each plane at rate `c`.

use crate::dynamics::{euler_field, integrate, IntegrateOptions, Trajectory};
use crate::error::{Error, Result};
use crate::lie::{AlgebraKind, AlgebraVec, GroupElement};
use crate::linalg;
use crate::metric::MetricOp;
use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

/// Coordinates of `[xi, g]` and of `c(xi)` in the sl2c basis.
const BRACKET_IDX: [usize; 4] = [1, 2, 4, 5];
const CENTRALIZER_IDX: [usize; 2] = [0, 3];
const STRUCTURE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Serialize)]
pub struct NormalForm {
    /// `g` with `Ad_g z = lambda xi`.
    #[serde(serialize_with = "crate::serde_util::group")]
    pub conjugator: GroupElement,
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// Rotation rate of `ad_{i xi}` on `[xi, g]`.
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    /// `(d1 - a)(d1 - b)`.
    pub d: f64,
    /// Columns `xi, i xi, e_a1, e_a2, e_b1, e_b2` in the input coordinates.
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub frame: DMatrix<f64>,
    #[serde(skip)]
    frame_inv: DMatrix<f64>,
    /// `(1/c) V` in the frame `(e_a1, e_a2, e_b1, e_b2)`, where
    /// `V(y) = [xi, (A^{-1} - d1) y] + d2 [i xi, y]`.
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub v_matrix: DMatrix<f64>,
    /// Largest entry of the off-diagonal blocks of the conjugated `A^{-1}`.
    pub block_residual: f64,
    /// `|A^{-1} F - F B| / (|A^{-1}| |F|)` for the frame `F` and block matrix `B`.
    pub reconstruction_residual: f64,
    /// Largest entry of `F_w^T G F_w - I` on `[xi, g]`.
    pub orthonormality_residual: f64,
    /// Mismatch between the rotation rates of the two planes and of the pairs
    /// in each eigenvalue block.
    pub rotation_residual: f64,
}

impl NormalForm {
    /// The conjugated generator `i xi` in input coordinates.
    pub fn generator(&self) -> AlgebraVec {
        self.frame.column(1).into_owned()
    }

    pub fn xi(&self) -> AlgebraVec {
        self.frame.column(0).into_owned()
    }

    /// Coordinates of `x` in the frame.
    pub fn frame_coordinates(&self, x: &AlgebraVec) -> Result<DVector<f64>> {
        if x.len() != 6 {
            return Err(Error::DimensionMismatch {
                expected: 6,
                found: x.len(),
            });
        }
        Ok(&self.frame_inv * x)
    }

    /// `V(y) = [xi, (A^{-1} - d1) y] + d2 [i xi, y]` in input coordinates.
    pub fn apply_v(&self, m: &MetricOp, y: &AlgebraVec) -> AlgebraVec {
        let alg = m.alg();
        let shifted = m.ainv() * y - y * self.d1;
        alg.br(&self.xi(), &shifted) + alg.br(&self.generator(), y) * self.d2
    }
}

fn eigenvector(z: &Matrix2<Complex64>, lambda: Complex64) -> [Complex64; 2] {
    let v1 = [z[(0, 1)], lambda - z[(0, 0)]];
    let v2 = [lambda - z[(1, 1)], z[(1, 0)]];
    let n = |v: &[Complex64; 2]| v[0].norm_sqr() + v[1].norm_sqr();
    if n(&v1) >= n(&v2) {
        v1
    } else {
        v2
    }
}

fn failure(residual: f64, detail: impl Into<String>) -> Error {
    Error::BlockStructureFailure {
        residual,
        detail: detail.into(),
    }
}

/// Reduces `m` with Killing generator `z` to the normal form.
pub fn normal_form(m: &MetricOp, z: &AlgebraVec) -> Result<NormalForm> {
    let alg = m.alg();
    if alg.kind() != AlgebraKind::Sl2c {
        return Err(Error::WrongAlgebra {
            op: "normal_form",
            found: alg.kind(),
        });
    }
    alg.check_dim(z)?;
    if z.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }

    // (1) Conjugate z to mu diag(1,-1) with Im mu > 0.
    let zm = alg.realize(z);
    let mut mu = (-zm.determinant()).sqrt();
    if mu.norm() < 1e-10 * z.norm() {
        return Err(Error::InvalidArgument("nilpotent generator has no normal form".into()));
    }
    if mu.im < 0.0 || (mu.im == 0.0 && mu.re < 0.0) {
        mu = -mu;
    }
    if mu.re.abs() > 1e-8 * mu.norm() {
        return Err(Error::NonImaginaryEigenvalueRatio { ratio: mu.re / mu.im });
    }
    let vp = eigenvector(&zm, mu);
    let vm = eigenvector(&zm, -mu);
    let p = Matrix2::new(vp[0], vm[0], vp[1], vm[1]);
    let p = p / p.determinant().sqrt();
    // g = P^{-1}, computed by the adjugate since det P = 1.
    let g = GroupElement::new(Matrix2::new(p[(1, 1)], -p[(0, 1)], -p[(1, 0)], p[(0, 0)]))?;
    let ad_g = alg.ad_group_matrix(&g)?;
    let ad_g_inv = alg.ad_group_matrix(&g.inverse())?;
    let ainv_c = &ad_g * m.ainv() * &ad_g_inv;
    let a_c = &ad_g * m.a() * &ad_g_inv;
    let ainv_norm = linalg::spectral_norm(&ainv_c);

    // (2) Block structure c(xi) + [xi, g].
    let mut block_residual = 0.0_f64;
    for &i in &CENTRALIZER_IDX {
        for &j in &BRACKET_IDX {
            block_residual = block_residual.max(ainv_c[(i, j)].abs()).max(ainv_c[(j, i)].abs());
        }
    }
    block_residual /= ainv_norm;
    if block_residual > STRUCTURE_TOL {
        return Err(failure(block_residual, "A^-1 does not preserve c(xi) and [xi, g]"));
    }
    let d1 = ainv_c[(0, 0)];
    let d2 = ainv_c[(0, 3)];
    let d3 = ainv_c[(3, 3)];

    // (3) g-orthonormal eigenframe of A^{-1} on [xi, g].
    let gram = linalg::symmetrize(&(alg.killing_gram() * &a_c));
    let sel = |mat: &DMatrix<f64>| DMatrix::from_fn(4, 4, |i, j| mat[(BRACKET_IDX[i], BRACKET_IDX[j])]);
    let g_w = sel(&gram);
    let b_w = sel(&ainv_c);
    let chol = g_w
        .clone()
        .cholesky()
        .ok_or_else(|| failure(f64::NAN, "g is not positive definite on [xi, g]"))?;
    let l = chol.l();
    let t = l
        .clone()
        .try_inverse()
        .ok_or_else(|| failure(f64::NAN, "singular Cholesky factor"))?
        .transpose();
    let bt = linalg::symmetrize(&(l.transpose() * &b_w * &t));
    let (vals, q) = linalg::sym_eigen(&bt);
    let pair_gap = ((vals[1] - vals[0]).abs()).max((vals[3] - vals[2]).abs()) / ainv_norm;
    if pair_gap > STRUCTURE_TOL {
        return Err(failure(pair_gap, "A^-1 on [xi, g] is not of the form diag(a, a, b, b)"));
    }
    let b = 0.5 * (vals[0] + vals[1]);
    let a = 0.5 * (vals[2] + vals[3]);
    if !(a > 0.0 && b < 0.0) {
        return Err(failure(a * b, format!("expected a > 0 > b, found a = {a}, b = {b}")));
    }
    let e = &t * &q;
    let embed = |col: usize| {
        let mut v = DVector::zeros(6);
        for (k, &idx) in BRACKET_IDX.iter().enumerate() {
            v[idx] = e[(k, col)];
        }
        v
    };
    let gnorm = |v: &DVector<f64>| (v.transpose() * &gram * v)[(0, 0)].max(0.0).sqrt();

    let sqrt2 = std::f64::consts::SQRT_2;
    let xi = alg.basis_vector(0) * sqrt2;
    let ixi = alg.basis_vector(3) * sqrt2;
    let ad_z = alg.ad_matrix(&ixi);
    let ea1 = embed(2);
    let wa = &ad_z * &ea1;
    let c = gnorm(&wa);
    let eb1 = embed(0);
    let wb = &ad_z * &eb1;
    let cb = gnorm(&wb);
    if c < 1e-12 {
        return Err(Error::DegenerateRotation(c));
    }
    let ea2 = wa / c;
    let eb2 = wb / cb;
    let rotation_residual = ((c - cb).abs() / c).max(pair_gap);

    let mut frame_c = DMatrix::zeros(6, 6);
    for (j, v) in [&xi, &ixi, &ea1, &ea2, &eb1, &eb2].into_iter().enumerate() {
        frame_c.set_column(j, v);
    }
    let fw = frame_c.columns(2, 4).into_owned();
    let ortho = fw.transpose() * &gram * &fw - DMatrix::<f64>::identity(4, 4);
    let orthonormality_residual = ortho.amax();

    let mut blocks = DMatrix::zeros(6, 6);
    blocks[(0, 0)] = d1;
    blocks[(1, 0)] = -d2;
    blocks[(0, 1)] = d2;
    blocks[(1, 1)] = d3;
    blocks[(2, 2)] = a;
    blocks[(3, 3)] = a;
    blocks[(4, 4)] = b;
    blocks[(5, 5)] = b;
    let recon = &ainv_c * &frame_c - &frame_c * &blocks;
    let reconstruction_residual = linalg::spectral_norm(&recon) / (ainv_norm * linalg::spectral_norm(&frame_c));

    let mut v_matrix = DMatrix::zeros(4, 4);
    for k in 0..4 {
        let y = fw.column(k).into_owned();
        let shifted = &ainv_c * &y - &y * d1;
        let vy = alg.br(&xi, &shifted) + alg.br(&ixi, &y) * d2;
        let coords = fw.transpose() * &gram * vy;
        v_matrix.set_column(k, &(coords / c));
    }

    let worst = reconstruction_residual.max(orthonormality_residual).max(rotation_residual);
    if worst > STRUCTURE_TOL {
        return Err(failure(worst, "normal-form frame residual too large"));
    }

    let frame = &ad_g_inv * &frame_c;
    let frame_inv = frame
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("normal-form frame".into()))?;
    Ok(NormalForm {
        conjugator: g,
        lambda_re: mu.re,
        lambda_im: mu.im,
        c,
        a,
        b,
        d1,
        d2,
        d3,
        d: (d1 - a) * (d1 - b),
        frame,
        frame_inv,
        v_matrix,
        block_residual,
        reconstruction_residual,
        orthonormality_residual,
        rotation_residual,
    })
}

/// The matrix of `(1/c) V` in the basis `{e1, e2, ie1, ie2}` in its
/// textbook layout.
pub fn printed_v_matrix(d1: f64, d2: f64, a: f64, b: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0,
            -d2,
            0.0,
            -(b - d1),
            d2,
            0.0,
            b - d1,
            0.0,
            0.0,
            a - d1,
            0.0,
            -d2,
            -(a - d1),
            0.0,
            d2,
            0.0,
        ],
    )
}

/// `(x^2 + d2^2 - d)^2 + 4 d2^2 d`, highest degree first.
pub fn closed_form_char_poly(d2: f64, d: f64) -> Vec<f64> {
    let s = d2 * d2 - d;
    vec![1.0, 0.0, 2.0 * s, 0.0, s * s + 4.0 * d2 * d2 * d]
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectedField {
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub printed: DMatrix<f64>,
    pub printed_char_poly: Vec<f64>,
    /// `(1/c) V` computed from brackets in the normal-form frame.
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub computed: DMatrix<f64>,
    pub computed_char_poly: Vec<f64>,
    pub closed_form: Vec<f64>,
    pub printed_error: f64,
    pub computed_error: f64,
    /// Eigenvalues of the computed `(1/c) V` as (re, im).
    pub eigenvalues: Vec<(f64, f64)>,
}

impl ProjectedField {
    pub fn max_error(&self) -> f64 {
        self.printed_error.max(self.computed_error)
    }
}

fn coefficient_error(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn projected_linear_field(nf: &NormalForm) -> Result<ProjectedField> {
    if nf.c.abs() < 1e-12 {
        return Err(Error::DegenerateRotation(nf.c));
    }
    let printed = printed_v_matrix(nf.d1, nf.d2, nf.a, nf.b);
    let printed_char_poly = linalg::char_poly(&printed);
    let computed_char_poly = linalg::char_poly(&nf.v_matrix);
    let closed_form = closed_form_char_poly(nf.d2, nf.d);
    let mut eigenvalues: Vec<(f64, f64)> = linalg::complex_eigenvalues(&nf.v_matrix)
        .into_iter()
        .map(|z| (z.re, z.im))
        .collect();
    eigenvalues.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    Ok(ProjectedField {
        printed_error: coefficient_error(&printed_char_poly, &closed_form),
        computed_error: coefficient_error(&computed_char_poly, &closed_form),
        printed,
        printed_char_poly,
        computed: nf.v_matrix.clone(),
        computed_char_poly,
        closed_form,
        eigenvalues,
    })
}

/// Random point of the level set `K(u, i xi) = 0`.
pub fn zero_level_point<R: Rng + ?Sized>(m: &MetricOp, nf: &NormalForm, rng: &mut R, scale: f64) -> AlgebraVec {
    let z = nf.generator();
    let u = m.alg().random_element(rng, scale);
    let kz = m.gram_k() * &z;
    let t = u.dot(&kz) / z.dot(&kz);
    u - z * t
}

#[derive(Debug, Clone)]
pub struct ZeroLevelRun {
    pub trajectory: Trajectory,
    /// `xi`-coefficient of `u` at each sample.
    pub f: Vec<f64>,
    /// `xi`-coefficient of `[v, A^{-1} v]` at each sample.
    pub phi: Vec<f64>,
    /// Largest `|[u, A^{-1}u] - (phi xi + f V(v))| / max(1, |u|^2)`.
    pub max_decomposition_residual: f64,
    /// Largest `|K(u, i xi)| / (|K i xi| max(|u0|, |u|))`.
    pub max_level_drift: f64,
}

/// Integrates the Euler field from a point of the level set `K(u, i xi) = 0`,
/// recording the split `u = f xi + v` with `v` in `[xi, g]` and checking
/// `[u, A^{-1}u] = phi(v) xi + f V(v)` at every sample.
pub fn euler_on_zero_level(
    m: &MetricOp,
    nf: &NormalForm,
    u0: &AlgebraVec,
    horizon: f64,
    opts: &IntegrateOptions,
) -> Result<ZeroLevelRun> {
    m.alg().check_dim(u0)?;
    let z = nf.generator();
    let kz = m.gram_k() * &z;
    let level = |u: &AlgebraVec| u.dot(&kz).abs() / kz.norm();
    if level(u0) > 1e-10 * u0.norm() {
        return Err(Error::InvalidArgument(format!(
            "initial point is off the level set K(u, i xi) = 0 (|K| = {:e})",
            level(u0)
        )));
    }
    let trajectory = integrate(m, u0, horizon, opts)?;
    let xi = nf.xi();
    let mut f = Vec::with_capacity(trajectory.len());
    let mut phi = Vec::with_capacity(trajectory.len());
    let mut max_decomposition_residual = 0.0_f64;
    let mut max_level_drift = 0.0_f64;
    let n0 = u0.norm();
    for u in &trajectory.states {
        let coords = nf.frame_coordinates(u)?;
        let fu = coords[0];
        let v = u - &xi * fu - &z * coords[1];
        let bv = m.alg().br(&v, &(m.ainv() * &v));
        let phi_v = nf.frame_coordinates(&bv)?[0];
        let predicted = &xi * phi_v + nf.apply_v(m, &v) * fu;
        let resid = (euler_field(m, u) - predicted).norm() / u.norm_squared().max(1.0);
        max_decomposition_residual = max_decomposition_residual.max(resid);
        max_level_drift = max_level_drift.max(level(u) / n0.max(u.norm()).max(f64::MIN_POSITIVE));
        f.push(fu);
        phi.push(phi_v);
    }
    Ok(ZeroLevelRun {
        trajectory,
        f,
        phi,
        max_decomposition_residual,
        max_level_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::killing::find_killing;
    use crate::presets::{self, FamilyParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn nf_of(p: FamilyParams) -> (MetricOp, NormalForm) {
        let m = p.metric().unwrap();
        let z = find_killing(&m).generators[0].z.clone();
        let nf = normal_form(&m, &z).unwrap();
        (m, nf)
    }

    #[test]
    fn already_normal_metric_is_a_fixed_point() {
        let p = presets::SPACELIKE_D_NEGATIVE;
        let (_, nf) = nf_of(p);
        for (x, y) in [(nf.a, p.a), (nf.b, p.b), (nf.d1, p.d1), (nf.d2, p.d2), (nf.d3, p.d3), (nf.d, p.d())] {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        assert!((nf.c - 2.0).abs() < 1e-12);
        assert!(nf.lambda_re.abs() < 1e-14 && nf.lambda_im > 0.0);
        assert!(nf.orthonormality_residual < 1e-10);
        assert!(nf.reconstruction_residual < 1e-12);
    }

    #[test]
    fn conjugated_metric_gives_same_invariants() {
        let p = FamilyParams::new(-2.0, 0.7, -1.5, 1.5, -0.5);
        let (m, nf) = nf_of(p);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let g = m.alg().random_group_element(&mut rng, 0.4);
            let mc = m.conjugate(&g).unwrap();
            let z = find_killing(&mc).generators[0].z.clone();
            let nfc = normal_form(&mc, &z).unwrap();
            for (x, y) in [(nf.a, nfc.a), (nf.b, nfc.b), (nf.c, nfc.c), (nf.d1, nfc.d1), (nf.d2, nfc.d2), (nf.d3, nfc.d3)] {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn printed_and_computed_v_share_the_characteristic_polynomial() {
        for p in [
            FamilyParams::new(-3.0, 0.7, -1.0, 1.0, -1.0),
            FamilyParams::new(-0.5, 0.7, -1.0, 2.0, -1.5),
            presets::SPACELIKE_D_NEGATIVE,
        ] {
            let (_, nf) = nf_of(p);
            let pf = projected_linear_field(&nf).unwrap();
            assert!(pf.max_error() < 1e-9, "{:?}", pf);
        }
        // d2 = 0, d = -4: P_V = (x^2 + 4)^2.
        assert_eq!(closed_form_char_poly(0.0, -4.0), vec![1.0, 0.0, 8.0, 0.0, 16.0]);
        let (_, nf) = nf_of(presets::SPACELIKE_D_POSITIVE);
        let pf = projected_linear_field(&nf).unwrap();
        let sd = 8f64.sqrt();
        assert!(pf.eigenvalues.iter().any(|&(re, im)| (re - sd).abs() < 1e-6 && im.abs() < 1e-6));
    }

    #[test]
    fn timelike_variant_still_has_a_normal_form() {
        let (_, nf) = nf_of(presets::TIMELIKE_KILLING);
        assert!((nf.d1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_inputs() {
        let m = presets::metric("sl2r-semisimple-killing").unwrap();
        assert!(matches!(
            normal_form(&m, &m.alg().basis_vector(2)),
            Err(Error::WrongAlgebra { .. })
        ));
        let m = presets::SPACELIKE_D_NEGATIVE.metric().unwrap();
        // xi itself has real eigenvalues.
        assert!(matches!(
            normal_form(&m, &m.alg().basis_vector(0)),
            Err(Error::NonImaginaryEigenvalueRatio { .. })
        ));
        assert_eq!(normal_form(&m, &m.alg().zero()).unwrap_err(), Error::ZeroVector);
    }

    #[test]
    fn zero_level_decomposition_holds() {
        let (m, nf) = nf_of(FamilyParams::new(-2.0, 0.4, -1.0, 1.0, -2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u0 = zero_level_point(&m, &nf, &mut rng, 0.5);
        let run = euler_on_zero_level(&m, &nf, &u0, 5.0, &IntegrateOptions::default()).unwrap();
        assert!(run.max_decomposition_residual < 1e-8);
        assert!(run.max_level_drift < 1e-9);
        let off = u0 + nf.generator();
        assert!(euler_on_zero_level(&m, &nf, &off, 1.0, &IntegrateOptions::default()).is_err());
    }

    #[test]
    fn d_zero_profile_equation() {
        // f'' = ((a - b)^2 / 4) r^2 f with r^2 the conserved squared radius
        // in the a-plane.
        let p = FamilyParams::new(-2.0, 0.4, -1.0, 1.0, -2.0);
        assert_eq!(p.d(), 0.0);
        let (m, nf) = nf_of(p);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u0 = zero_level_point(&m, &nf, &mut rng, 0.5);
        let traj = integrate(&m, &u0, 3.0, &IntegrateOptions::default()).unwrap();
        let coords = |t: f64| nf.frame_coordinates(&traj.state_at(t).unwrap()).unwrap();
        let c0 = coords(0.0);
        let r2 = c0[2] * c0[2] + c0[3] * c0[3];
        let h = 1e-3;
        for t in [0.5, 1.0, 2.0] {
            let fpp = (coords(t + h)[0] - 2.0 * coords(t)[0] + coords(t - h)[0]) / (h * h);
            let ct = coords(t);
            assert!((ct[2] * ct[2] + ct[3] * ct[3] - r2).abs() < 1e-8);
            let expected = (p.a - p.b).powi(2) / 4.0 * r2 * ct[0];
            assert!((fpp - expected).abs() < 1e-5 * expected.abs().max(1.0), "{fpp} vs {expected}");
        }
    }
}
