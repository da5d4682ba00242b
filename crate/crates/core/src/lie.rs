//! Real Lie-algebra arithmetic for sl2(R) and sl2(C) viewed as a real algebra.
//!
//! Both algebras are given by a 2x2 complex matrix realization; structure
//! constants, the Killing form and the trace forms are derived from it once
//! and cached in a process-wide [`AlgebraSpec`].

use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Mul;
use std::sync::OnceLock;

/// Coordinates of an algebra element in the basis of its [`AlgebraSpec`].
pub type AlgebraVec = DVector<f64>;

type C2 = Matrix2<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraKind {
    Sl2r,
    Sl2c,
}

impl AlgebraKind {
    pub fn dim(self) -> usize {
        match self {
            AlgebraKind::Sl2r => 3,
            AlgebraKind::Sl2c => 6,
        }
    }

    pub fn spec(self) -> &'static AlgebraSpec {
        match self {
            AlgebraKind::Sl2r => AlgebraSpec::sl2r(),
            AlgebraKind::Sl2c => AlgebraSpec::sl2c(),
        }
    }
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraKind::Sl2r => write!(f, "sl2r"),
            AlgebraKind::Sl2c => write!(f, "sl2c"),
        }
    }
}

/// A real Lie algebra with structure constants `[e_i, e_j] = sum_k c[i][j][k] e_k`.
#[derive(Debug)]
pub struct AlgebraSpec {
    kind: AlgebraKind,
    dim: usize,
    labels: Vec<&'static str>,
    realization: Vec<C2>,
    structure: Vec<f64>,
    nonzero: Vec<(usize, usize, usize, f64)>,
    coord_map: DMatrix<f64>,
    killing_gram: DMatrix<f64>,
    trace_gram_re: DMatrix<f64>,
    trace_gram_im: DMatrix<f64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn realify(m: &C2) -> DVector<f64> {
    DVector::from_vec(vec![
        m[(0, 0)].re,
        m[(0, 1)].re,
        m[(1, 0)].re,
        m[(1, 1)].re,
        m[(0, 0)].im,
        m[(0, 1)].im,
        m[(1, 0)].im,
        m[(1, 1)].im,
    ])
}

fn commutator(a: &C2, b: &C2) -> C2 {
    a * b - b * a
}

impl AlgebraSpec {
    /// sl2(R) in the sl2-triple basis {x, y, xi} with
    /// x = [[0,1],[0,0]], y = [[0,0],[1,0]], xi = diag(1,-1).
    pub fn sl2r() -> &'static AlgebraSpec {
        static SPEC: OnceLock<AlgebraSpec> = OnceLock::new();
        SPEC.get_or_init(|| {
            let z = c(0.0, 0.0);
            let one = c(1.0, 0.0);
            let x = C2::new(z, one, z, z);
            let y = C2::new(z, z, one, z);
            let xi = C2::new(one, z, z, -one);
            AlgebraSpec::from_realization(AlgebraKind::Sl2r, vec!["x", "y", "xi"], vec![x, y, xi])
        })
    }

    /// sl2(C) as a six-dimensional real algebra in the basis
    /// {e1, e2, e3, ie1, ie2, ie3} with e1 = diag(1,-1)/sqrt2,
    /// e2 = [[0,1],[1,0]]/sqrt2, e3 = [[0,1],[-1,0]]/sqrt2.
    pub fn sl2c() -> &'static AlgebraSpec {
        static SPEC: OnceLock<AlgebraSpec> = OnceLock::new();
        SPEC.get_or_init(|| {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let z = c(0.0, 0.0);
            let e1 = C2::new(c(s, 0.0), z, z, c(-s, 0.0));
            let e2 = C2::new(z, c(s, 0.0), c(s, 0.0), z);
            let e3 = C2::new(z, c(s, 0.0), c(-s, 0.0), z);
            let i = c(0.0, 1.0);
            let basis = vec![e1, e2, e3, e1 * i, e2 * i, e3 * i];
            AlgebraSpec::from_realization(
                AlgebraKind::Sl2c,
                vec!["e1", "e2", "e3", "ie1", "ie2", "ie3"],
                basis,
            )
        })
    }

    fn from_realization(kind: AlgebraKind, labels: Vec<&'static str>, realization: Vec<C2>) -> Self {
        let dim = realization.len();
        let mut r = DMatrix::zeros(8, dim);
        for (j, m) in realization.iter().enumerate() {
            r.set_column(j, &realify(m));
        }
        let gram = r.transpose() * &r;
        let coord_map = gram
            .try_inverse()
            .expect("realization basis is linearly independent")
            * r.transpose();

        let mut structure = vec![0.0; dim * dim * dim];
        let mut nonzero = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                let br = commutator(&realization[i], &realization[j]);
                let coords = &coord_map * realify(&br);
                for k in 0..dim {
                    let mut v = coords[k];
                    if v.abs() < 1e-14 {
                        v = 0.0;
                    }
                    structure[(i * dim + j) * dim + k] = v;
                    if v != 0.0 {
                        nonzero.push((i, j, k, v));
                    }
                }
            }
        }

        let mut spec = AlgebraSpec {
            kind,
            dim,
            labels,
            realization,
            structure,
            nonzero,
            coord_map,
            killing_gram: DMatrix::zeros(dim, dim),
            trace_gram_re: DMatrix::zeros(dim, dim),
            trace_gram_im: DMatrix::zeros(dim, dim),
        };

        let ads: Vec<DMatrix<f64>> = (0..dim).map(|i| spec.ad_matrix(&spec.basis_vector(i))).collect();
        for i in 0..dim {
            for j in 0..dim {
                spec.killing_gram[(i, j)] = (&ads[i] * &ads[j]).trace();
                let t = (spec.realization[i] * spec.realization[j]).trace();
                spec.trace_gram_re[(i, j)] = t.re;
                spec.trace_gram_im[(i, j)] = t.im;
            }
        }
        spec
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_labels(&self) -> &[&'static str] {
        &self.labels
    }

    /// `c[i][j][k]`, the `e_k` coefficient of `[e_i, e_j]`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    pub fn basis_vector(&self, i: usize) -> AlgebraVec {
        let mut v = DVector::zeros(self.dim);
        v[i] = 1.0;
        v
    }

    pub fn zero(&self) -> AlgebraVec {
        DVector::zeros(self.dim)
    }

    pub fn check_dim(&self, x: &AlgebraVec) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Largest Jacobi-identity residual over all basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    let (a, b, cc) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(k));
                    let r = self.br(&a, &self.br(&b, &cc))
                        + self.br(&b, &self.br(&cc, &a))
                        + self.br(&cc, &self.br(&a, &b));
                    worst = worst.max(r.amax());
                }
            }
        }
        worst
    }

    pub fn bracket(&self, x: &AlgebraVec, y: &AlgebraVec) -> Result<AlgebraVec> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.br(x, y))
    }

    /// Unchecked bracket used on hot paths where dimensions are known to agree.
    pub(crate) fn br(&self, x: &AlgebraVec, y: &AlgebraVec) -> AlgebraVec {
        let mut out = DVector::zeros(self.dim);
        for &(i, j, k, v) in &self.nonzero {
            out[k] += x[i] * y[j] * v;
        }
        out
    }

    /// Matrix of `ad_x`; column `j` holds the coordinates of `[x, e_j]`.
    pub fn ad_matrix(&self, x: &AlgebraVec) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, k, v) in &self.nonzero {
            m[(k, j)] += x[i] * v;
        }
        m
    }

    /// Gram matrix of the Killing form, `K_ij = tr(ad_{e_i} ad_{e_j})`.
    pub fn killing_gram(&self) -> &DMatrix<f64> {
        &self.killing_gram
    }

    pub fn killing_form(&self, x: &AlgebraVec, y: &AlgebraVec) -> f64 {
        (x.transpose() * &self.killing_gram * y)[(0, 0)]
    }

    /// Gram matrices of `(x, y) -> Re tr(m_x m_y)` and `Im tr(m_x m_y)`.
    pub fn trace_grams(&self) -> (&DMatrix<f64>, &DMatrix<f64>) {
        (&self.trace_gram_re, &self.trace_gram_im)
    }

    /// 2x2 complex matrix realizing `x`.
    pub fn realize(&self, x: &AlgebraVec) -> C2 {
        let mut m = C2::zeros();
        for (i, b) in self.realization.iter().enumerate() {
            m += b * c(x[i], 0.0);
        }
        m
    }

    /// Coordinates of a traceless matrix lying in the realized algebra.
    pub fn coords_of(&self, m: &C2) -> AlgebraVec {
        &self.coord_map * realify(m)
    }

    /// `tr(m_x^2)` as a complex number (imaginary part is zero on sl2r).
    pub fn square_trace(&self, x: &AlgebraVec) -> Complex64 {
        let m = self.realize(x);
        (m * m).trace()
    }

    /// `(Re tr_C(m^2), Im tr_C(m^2))` for `m` realizing `x`; sl2c only.
    pub fn complex_trace_invariants(&self, x: &AlgebraVec) -> Result<(f64, f64)> {
        if self.kind != AlgebraKind::Sl2c {
            return Err(Error::WrongAlgebra {
                op: "complex_trace_invariants",
                found: self.kind,
            });
        }
        self.check_dim(x)?;
        let t = self.square_trace(x);
        Ok((t.re, t.im))
    }

    fn check_group_element(&self, g: &GroupElement) -> Result<()> {
        if self.kind == AlgebraKind::Sl2r {
            let im = g.0.iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));
            let scale = g.0.iter().fold(1.0_f64, |a, z| a.max(z.norm()));
            if im > 1e-12 * scale {
                return Err(Error::InvalidArgument(
                    "complex group element acting on sl2r".into(),
                ));
            }
        }
        Ok(())
    }

    /// `Ad_g x = g x g^{-1}` pulled back to coordinates.
    pub fn adjoint_action(&self, g: &GroupElement, x: &AlgebraVec) -> Result<AlgebraVec> {
        self.check_dim(x)?;
        g.check_unimodular()?;
        self.check_group_element(g)?;
        let m = g.0 * self.realize(x) * g.inverse().0;
        Ok(self.coords_of(&m))
    }

    /// Matrix of `Ad_g` in algebra coordinates.
    pub fn ad_group_matrix(&self, g: &GroupElement) -> Result<DMatrix<f64>> {
        g.check_unimodular()?;
        self.check_group_element(g)?;
        let gi = g.inverse();
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let m = g.0 * self.realization[j] * gi.0;
            out.set_column(j, &self.coords_of(&m));
        }
        Ok(out)
    }

    /// `exp(t m_x)` in closed form: for traceless `M`, `M^2 = -det(M) I`, so
    /// `exp(M) = cosh(s) I + sinh(s)/s M` with `s^2 = -det M`.
    pub fn exp_element(&self, x: &AlgebraVec, t: f64) -> GroupElement {
        let m = self.realize(x) * c(t, 0.0);
        GroupElement(exp_traceless(&m))
    }

    /// Gaussian random element with coordinates of standard deviation `scale`.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraVec {
        DVector::from_fn(self.dim, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
    }

    /// Random group element `exp(x)` with `x` drawn by [`Self::random_element`].
    pub fn random_group_element<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> GroupElement {
        let x = self.random_element(rng, scale);
        self.exp_element(&x, 1.0)
    }

    pub fn classify_element(&self, x: &AlgebraVec) -> ElementClass {
        classify(self, x)
    }
}

pub(crate) fn exp_traceless(m: &C2) -> C2 {
    let s2 = -m.determinant();
    let s = s2.sqrt();
    let (ch, shc) = if s.norm() < 1e-4 {
        (
            c(1.0, 0.0) + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0,
            c(1.0, 0.0) + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0,
        )
    } else {
        (s.cosh(), s.sinh() / s)
    };
    C2::identity() * ch + m * shc
}

/// An element of SL2(R) or SL2(C) in its defining 2x2 representation.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement(C2);

impl GroupElement {
    pub fn new(m: Matrix2<Complex64>) -> Result<Self> {
        let g = GroupElement(m);
        g.check_unimodular()?;
        Ok(g)
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(C2::new(
            c(m[0][0], 0.0),
            c(m[0][1], 0.0),
            c(m[1][0], 0.0),
            c(m[1][1], 0.0),
        ))
    }

    pub(crate) fn new_unchecked(m: C2) -> Self {
        GroupElement(m)
    }

    pub fn identity() -> Self {
        GroupElement(C2::identity())
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    pub fn det(&self) -> Complex64 {
        self.0.determinant()
    }

    fn check_unimodular(&self) -> Result<()> {
        let deviation = (self.det() - c(1.0, 0.0)).norm();
        let scale = self.0.iter().fold(1.0_f64, |a, z| a.max(z.norm_sqr()));
        if deviation.is_finite() && deviation < 1e-10 * scale {
            Ok(())
        } else {
            Err(Error::NonUnimodular { deviation })
        }
    }

    /// Inverse via the adjugate (valid because det = 1).
    pub fn inverse(&self) -> Self {
        let m = &self.0;
        GroupElement(C2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]))
    }

    /// Entrywise maximum distance to another element.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (self.0 - other.0).iter().fold(0.0_f64, |a, z| a.max(z.norm()))
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Zero,
    Nilpotent,
    Compact,
    Semisimple,
    Mixed,
}

/// Spectral classification of an element by its adjoint operator.
#[derive(Debug, Clone, Serialize)]
pub struct ElementClass {
    pub kind: ElementKind,
    pub nilpotent: bool,
    pub compact: bool,
    /// Diagonalizable over C.
    pub complex_semisimple: bool,
    /// Diagonalizable over R (all eigenvalues real).
    pub real_diagonalizable: bool,
    /// Eigenvalues of `ad_x` as (re, im) pairs, sorted.
    pub spectrum: Vec<(f64, f64)>,
}

fn classify(alg: &AlgebraSpec, x: &AlgebraVec) -> ElementClass {
    let ad = alg.ad_matrix(x);
    let n = alg.dim;
    let norm = linalg::spectral_norm(&ad);
    let mut eig = linalg::complex_eigenvalues(&ad);
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let spectrum = eig.iter().map(|z| (z.re, z.im)).collect();
    if norm < 1e-12 {
        return ElementClass {
            kind: ElementKind::Zero,
            nilpotent: true,
            compact: false,
            complex_semisimple: true,
            real_diagonalizable: true,
            spectrum,
        };
    }
    let tol = (1e-9 * norm).max(1e-12);

    // Eigenvalues of a nilpotent operator are only accurate to eps^(1/k), so
    // nilpotency is decided on the power ad^n instead.
    let mut power = DMatrix::identity(n, n);
    for _ in 0..n {
        power = &ad * power;
    }
    let nilpotent = linalg::spectral_norm(&power) <= 1e-9 * norm.powi(n as i32);

    let complex_semisimple = if nilpotent { false } else { is_semisimple(&ad, &eig, norm) };
    let compact = !nilpotent && eig.iter().all(|z| z.re.abs() < tol);
    let real_diagonalizable = complex_semisimple && eig.iter().all(|z| z.im.abs() < tol);
    let kind = if nilpotent {
        ElementKind::Nilpotent
    } else if compact {
        ElementKind::Compact
    } else if complex_semisimple {
        ElementKind::Semisimple
    } else {
        ElementKind::Mixed
    };
    ElementClass {
        kind,
        nilpotent,
        compact,
        complex_semisimple,
        real_diagonalizable,
        spectrum,
    }
}

/// Diagonalizable iff the product of `(ad - lambda)` over distinct
/// eigenvalues (the candidate minimal polynomial) vanishes.
fn is_semisimple(ad: &DMatrix<f64>, eig: &[Complex64], norm: f64) -> bool {
    let radius = 1e-6 * norm;
    let mut centers: Vec<(Complex64, usize)> = Vec::new();
    for &z in eig {
        match centers.iter_mut().find(|(c, _)| (c - z).norm() < radius) {
            Some((c, count)) => {
                *c = (*c * (*count as f64) + z) / (*count as f64 + 1.0);
                *count += 1;
            }
            None => centers.push((z, 1)),
        }
    }
    let n = ad.nrows();
    let adc = linalg::to_complex(ad);
    let mut p = DMatrix::<Complex64>::identity(n, n);
    for (lambda, _) in &centers {
        let shifted = &adc - DMatrix::<Complex64>::identity(n, n) * *lambda;
        p = shifted * p;
    }
    let pnorm = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    pnorm <= 1e-8 * (2.0 * norm).powi(centers.len() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn structure_constants_are_antisymmetric_and_jacobi() {
        for alg in [AlgebraSpec::sl2r(), AlgebraSpec::sl2c()] {
            let n = alg.dim();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        assert_eq!(alg.structure_constant(i, j, k), -alg.structure_constant(j, i, k));
                    }
                }
            }
            assert!(alg.jacobi_residual() < 1e-12);
        }
    }

    #[test]
    fn bracket_matches_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for alg in [AlgebraSpec::sl2r(), AlgebraSpec::sl2c()] {
            for _ in 0..50 {
                let x = alg.random_element(&mut rng, 1.0);
                let y = alg.random_element(&mut rng, 1.0);
                let lhs = alg.realize(&alg.bracket(&x, &y).unwrap());
                let (mx, my) = (alg.realize(&x), alg.realize(&y));
                let rhs = mx * my - my * mx;
                let diff = (lhs - rhs).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
                assert!(diff < 1e-12);
            }
        }
    }

    #[test]
    fn sl2c_bracket_e1_e2() {
        let alg = AlgebraSpec::sl2c();
        let b = alg.bracket(&alg.basis_vector(0), &alg.basis_vector(1)).unwrap();
        let mut expected = alg.zero();
        expected[2] = 2f64.sqrt();
        assert!((b - expected).amax() < 1e-14);
    }

    #[test]
    fn sl2r_triple_relations() {
        let alg = AlgebraSpec::sl2r();
        let (x, xi) = (alg.basis_vector(0), alg.basis_vector(2));
        let b = alg.bracket(&xi, &x).unwrap();
        assert!((b - &x * 2.0).amax() < 1e-14);
    }

    #[test]
    fn bracket_rejects_wrong_dimension() {
        let alg = AlgebraSpec::sl2r();
        let err = alg.bracket(&DVector::zeros(6), &alg.zero()).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, found: 6 });
    }

    #[test]
    fn ad_xi_spectra() {
        let alg = AlgebraSpec::sl2r();
        let mut ev: Vec<f64> = linalg::complex_eigenvalues(&alg.ad_matrix(&alg.basis_vector(2)))
            .iter()
            .map(|z| z.re)
            .collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([-2.0, 0.0, 2.0]) {
            assert!(close(*a, b, 1e-12));
        }

        let alg = AlgebraSpec::sl2c();
        let ixi = alg.basis_vector(3) * 2f64.sqrt();
        let class = alg.classify_element(&ixi);
        let mut ims: Vec<f64> = class.spectrum.iter().map(|z| z.1).collect();
        ims.sort_by(f64::total_cmp);
        for (a, b) in ims.iter().zip([-2.0, -2.0, 0.0, 0.0, 2.0, 2.0]) {
            assert!(close(*a, b, 1e-10));
        }
        assert!(class.spectrum.iter().all(|z| z.0.abs() < 1e-10));
        assert_eq!(class.kind, ElementKind::Compact);
        assert!(class.complex_semisimple && !class.real_diagonalizable);
    }

    #[test]
    fn killing_form_values() {
        let alg = AlgebraSpec::sl2r();
        let xi = alg.basis_vector(2);
        assert!(close(alg.killing_form(&xi, &xi), 8.0, 1e-12));
        assert_eq!(alg.killing_form(&xi, &alg.zero()), 0.0);
        assert_eq!(linalg::signature(alg.killing_gram(), 1e-10), (1, 0, 2));
        assert_eq!(linalg::signature(AlgebraSpec::sl2c().killing_gram(), 1e-10), (3, 0, 3));
    }

    #[test]
    fn killing_form_matches_trace_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alg = AlgebraSpec::sl2c();
        for _ in 0..100 {
            let x = alg.random_element(&mut rng, 1.0);
            let y = alg.random_element(&mut rng, 1.0);
            let k = alg.killing_form(&x, &y);
            let t = (alg.realize(&x) * alg.realize(&y)).trace().re * 8.0;
            assert!((k - t).abs() <= 1e-9 * k.abs().max(1.0));
        }
        let alg = AlgebraSpec::sl2r();
        for _ in 0..100 {
            let x = alg.random_element(&mut rng, 1.0);
            let y = alg.random_element(&mut rng, 1.0);
            let k = alg.killing_form(&x, &y);
            let t = (alg.realize(&x) * alg.realize(&y)).trace().re * 4.0;
            assert!((k - t).abs() <= 1e-9 * k.abs().max(1.0));
        }
    }

    #[test]
    fn killing_form_is_ad_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for alg in [AlgebraSpec::sl2r(), AlgebraSpec::sl2c()] {
            for _ in 0..50 {
                let x = alg.random_element(&mut rng, 1.0);
                let y = alg.random_element(&mut rng, 1.0);
                let z = alg.random_element(&mut rng, 1.0);
                let r = alg.killing_form(&alg.br(&z, &x), &y) + alg.killing_form(&x, &alg.br(&z, &y));
                assert!(r.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn adjoint_action_preserves_killing_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for alg in [AlgebraSpec::sl2r(), AlgebraSpec::sl2c()] {
            for _ in 0..100 {
                let g = alg.random_group_element(&mut rng, 0.5);
                let x = alg.random_element(&mut rng, 1.0);
                let y = alg.random_element(&mut rng, 1.0);
                let gx = alg.adjoint_action(&g, &x).unwrap();
                let gy = alg.adjoint_action(&g, &y).unwrap();
                assert!((alg.killing_form(&gx, &gy) - alg.killing_form(&x, &y)).abs() < 1e-9);
                let t0 = alg.square_trace(&x);
                let t1 = alg.square_trace(&gx);
                assert!((t0 - t1).norm() < 1e-9);
            }
            let x = alg.random_element(&mut rng, 1.0);
            let same = alg.adjoint_action(&GroupElement::identity(), &x).unwrap();
            assert!((same - &x).amax() < 1e-15);
        }
    }

    #[test]
    fn adjoint_action_rejects_bad_elements() {
        let alg = AlgebraSpec::sl2c();
        let g = GroupElement::new_unchecked(C2::identity() * c(2.0, 0.0));
        assert!(matches!(
            alg.adjoint_action(&g, &alg.zero()),
            Err(Error::NonUnimodular { .. })
        ));
        assert!(GroupElement::from_real([[2.0, 0.0], [0.0, 1.0]]).is_err());
    }

    #[test]
    fn exponential_closed_forms() {
        let alg = AlgebraSpec::sl2r();
        let xi = alg.basis_vector(2);
        assert!(alg.exp_element(&xi, 0.0).distance(&GroupElement::identity()) < 1e-15);
        let t = 0.7;
        let g = alg.exp_element(&xi, t);
        let m = g.matrix();
        assert!((m[(0, 0)].re - t.exp()).abs() < 1e-12);
        assert!((m[(1, 1)].re - (-t).exp()).abs() < 1e-12);
        assert!(m[(0, 1)].norm() < 1e-15 && m[(1, 0)].norm() < 1e-15);

        let alg = AlgebraSpec::sl2c();
        let ixi = alg.basis_vector(3) * 2f64.sqrt();
        let g = alg.exp_element(&ixi, std::f64::consts::PI);
        let minus_id = GroupElement::new_unchecked(-C2::identity());
        assert!(g.distance(&minus_id) < 1e-12);

        let nil = alg.coords_of(&C2::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        let g = alg.exp_element(&nil, 3.0);
        assert!((g.matrix()[(0, 1)].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for alg in [AlgebraSpec::sl2r(), AlgebraSpec::sl2c()] {
            for _ in 0..50 {
                let x = alg.random_element(&mut rng, 1.0);
                let (s, t) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let lhs = alg.exp_element(&x, s + t);
                let rhs = &alg.exp_element(&x, s) * &alg.exp_element(&x, t);
                assert!(lhs.distance(&rhs) < 1e-9);
                assert!((lhs.det() - c(1.0, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn complex_trace_invariants_examples() {
        let alg = AlgebraSpec::sl2c();
        let (re, im) = alg.complex_trace_invariants(&alg.basis_vector(0)).unwrap();
        assert!(close(re, 1.0, 1e-14) && close(im, 0.0, 1e-14));
        assert_eq!(alg.complex_trace_invariants(&alg.zero()).unwrap(), (0.0, 0.0));
        let nil = alg.coords_of(&C2::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        let (re, im) = alg.complex_trace_invariants(&nil).unwrap();
        assert!(re.abs() < 1e-14 && im.abs() < 1e-14);
        assert!(AlgebraSpec::sl2r()
            .complex_trace_invariants(&AlgebraSpec::sl2r().zero())
            .is_err());
    }

    #[test]
    fn classification_examples() {
        let alg = AlgebraSpec::sl2r();
        assert_eq!(alg.classify_element(&alg.basis_vector(0)).kind, ElementKind::Nilpotent);
        let xi = alg.classify_element(&alg.basis_vector(2));
        assert_eq!(xi.kind, ElementKind::Semisimple);
        assert!(!xi.compact && xi.real_diagonalizable);
        assert_eq!(alg.classify_element(&alg.zero()).kind, ElementKind::Zero);
        let rot = alg.basis_vector(0) - alg.basis_vector(1);
        assert_eq!(alg.classify_element(&rot).kind, ElementKind::Compact);
    }

    #[test]
    fn classification_is_ad_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for alg in [AlgebraSpec::sl2r(), AlgebraSpec::sl2c()] {
            let samples = [
                alg.random_element(&mut rng, 1.0),
                alg.basis_vector(0),
                alg.basis_vector(alg.dim() - 1),
            ];
            for x in samples {
                let k = alg.classify_element(&x).kind;
                for _ in 0..100 {
                    let g = alg.random_group_element(&mut rng, 0.4);
                    let gx = alg.adjoint_action(&g, &x).unwrap();
                    assert_eq!(alg.classify_element(&gx).kind, k);
                }
            }
        }
    }
}
