//! Left-invariant metrics `g(x, y) = K(x, A y)` encoded by the K-symmetric
//! operator `A`. Callers supply `A^{-1}`, which is what the Euler field and
//! the dual form `g*(x, y) = K(x, A^{-1} y)` use directly.

use crate::error::{Error, Result};
use crate::lie::{AlgebraKind, AlgebraSpec, AlgebraVec, GroupElement};
use crate::linalg;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalCharacter {
    Timelike,
    Lightlike,
    Spacelike,
    Zero,
}

#[derive(Debug, Clone)]
pub struct MetricOp {
    alg: &'static AlgebraSpec,
    ainv: DMatrix<f64>,
    a: DMatrix<f64>,
    gram_g: DMatrix<f64>,
    gram_gstar: DMatrix<f64>,
    index: usize,
}

/// Builds a Lorentzian metric from `A^{-1}` given in the algebra basis
/// (column `j` holds the coordinates of `A^{-1} e_j`).
pub fn build_metric(alg: &'static AlgebraSpec, ainv: DMatrix<f64>) -> Result<MetricOp> {
    MetricOp::construct(alg, ainv, true)
}

impl MetricOp {
    pub fn new(kind: AlgebraKind, ainv: DMatrix<f64>) -> Result<Self> {
        build_metric(kind.spec(), ainv)
    }

    /// Lorentzian metric from a row-major `dim x dim` array.
    pub fn from_row_major(kind: AlgebraKind, ainv: &[f64]) -> Result<Self> {
        let n = kind.dim();
        if ainv.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: ainv.len(),
            });
        }
        build_metric(kind.spec(), DMatrix::from_row_slice(n, n, ainv))
    }

    /// Nondegenerate metric of any index. Used for Riemannian-like controls
    /// where g* is definite; everything except the Lorentzian check applies.
    pub fn semi_riemannian(alg: &'static AlgebraSpec, ainv: DMatrix<f64>) -> Result<Self> {
        MetricOp::construct(alg, ainv, false)
    }

    fn construct(alg: &'static AlgebraSpec, ainv: DMatrix<f64>, lorentzian: bool) -> Result<Self> {
        let n = alg.dim();
        if ainv.nrows() != n || ainv.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: ainv.nrows() * ainv.ncols(),
            });
        }
        if ainv.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry in A^-1".into()));
        }
        let sv = ainv.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if smax == 0.0 || smin <= smax * 1e-12 {
            return Err(Error::Singular(format!(
                "condition number of A^-1 is {:e}",
                if smin == 0.0 { f64::INFINITY } else { smax / smin }
            )));
        }
        let a = ainv
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("A^-1 is not invertible".into()))?;

        let k = alg.killing_gram();
        let ka = k * &a;
        let kainv = k * &ainv;
        let asymmetry = (linalg::asymmetry(&ka) / ka.amax().max(1.0))
            .max(linalg::asymmetry(&kainv) / kainv.amax().max(1.0));
        if asymmetry > 1e-10 {
            return Err(Error::NotKSymmetric { asymmetry });
        }
        let gram_g = linalg::symmetrize(&ka);
        let gram_gstar = linalg::symmetrize(&kainv);

        let (neg, zero, pos) = linalg::signature(&gram_g, 1e-10);
        if zero > 0 {
            return Err(Error::Singular(format!("g has {zero} vanishing eigenvalues")));
        }
        let (neg_star, zero_star, pos_star) = linalg::signature(&gram_gstar, 1e-10);
        if zero_star > 0 {
            return Err(Error::Singular(format!("g* has {zero_star} vanishing eigenvalues")));
        }
        if lorentzian {
            if neg != 1 {
                return Err(Error::NotLorentzian {
                    negative: neg,
                    positive: pos,
                });
            }
            if neg_star != 1 {
                return Err(Error::NotLorentzian {
                    negative: neg_star,
                    positive: pos_star,
                });
            }
        }
        Ok(MetricOp {
            alg,
            ainv,
            a,
            gram_g,
            gram_gstar,
            index: neg,
        })
    }

    pub fn alg(&self) -> &'static AlgebraSpec {
        self.alg
    }

    pub fn kind(&self) -> AlgebraKind {
        self.alg.kind()
    }

    pub fn dim(&self) -> usize {
        self.alg.dim()
    }

    /// Number of negative eigenvalues of the Gram matrix of `g`.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn is_lorentzian(&self) -> bool {
        self.index == 1
    }

    pub fn ainv(&self) -> &DMatrix<f64> {
        &self.ainv
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn gram_k(&self) -> &DMatrix<f64> {
        self.alg.killing_gram()
    }

    pub fn gram_g(&self) -> &DMatrix<f64> {
        &self.gram_g
    }

    pub fn gram_gstar(&self) -> &DMatrix<f64> {
        &self.gram_gstar
    }

    pub fn g(&self, x: &AlgebraVec, y: &AlgebraVec) -> f64 {
        (x.transpose() * &self.gram_g * y)[(0, 0)]
    }

    pub fn g_star(&self, x: &AlgebraVec, y: &AlgebraVec) -> f64 {
        (x.transpose() * &self.gram_gstar * y)[(0, 0)]
    }

    pub fn causal_character(&self, x: &AlgebraVec) -> CausalCharacter {
        let n2 = x.norm_squared();
        if n2 == 0.0 {
            return CausalCharacter::Zero;
        }
        let q = self.g(x, x);
        if q.abs() < 1e-10 * n2 {
            CausalCharacter::Lightlike
        } else if q < 0.0 {
            CausalCharacter::Timelike
        } else {
            CausalCharacter::Spacelike
        }
    }

    /// The metric `K(x, Ad_g A Ad_g^{-1} y)`, i.e. `A^{-1}` replaced by
    /// `Ad_g A^{-1} Ad_g^{-1}`.
    pub fn conjugate(&self, g: &GroupElement) -> Result<MetricOp> {
        let ad = self.alg.ad_group_matrix(g)?;
        let ad_inv = self.alg.ad_group_matrix(&g.inverse())?;
        let ainv = &ad * &self.ainv * ad_inv;
        MetricOp::construct(self.alg, ainv, self.is_lorentzian())
    }

    /// Metric adjoint of `ad_x`: `(ad_x)* = -A^{-1} ad_x A`.
    pub fn ad_star(&self, x: &AlgebraVec) -> DMatrix<f64> {
        -(&self.ainv * self.alg.ad_matrix(x) * &self.a)
    }

    /// Levi-Civita connection on left-invariant fields:
    /// `nabla_x y = ([x,y] - (ad_x)* y - (ad_y)* x) / 2`.
    pub fn connection(&self, x: &AlgebraVec, y: &AlgebraVec) -> AlgebraVec {
        (self.alg.br(x, y) - self.ad_star(x) * y - self.ad_star(y) * x) * 0.5
    }
}

/// Convenience alias matching [`MetricOp::conjugate`].
pub fn conjugate_metric(m: &MetricOp, g: &GroupElement) -> Result<MetricOp> {
    m.conjugate(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example() -> MetricOp {
        presets::paper_example()
    }

    #[test]
    fn example_metric_is_lorentzian() {
        let m = example();
        assert!(m.is_lorentzian());
        assert!((m.gram_k() * m.a() - m.gram_g()).amax() < 1e-12);
        assert!((m.gram_k() * m.ainv() - m.gram_gstar()).amax() < 1e-12);
    }

    #[test]
    fn identity_is_not_lorentzian() {
        let err = MetricOp::new(AlgebraKind::Sl2c, DMatrix::identity(6, 6)).unwrap_err();
        assert_eq!(err, Error::NotLorentzian { negative: 3, positive: 3 });
    }

    #[test]
    fn sl2r_diagonal_signature_depends_on_xi_entry() {
        // g* = diag-block(4a [[0,1],[1,0]], 8b): Lorentzian iff b > 0.
        let ok = MetricOp::from_row_major(AlgebraKind::Sl2r, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        assert!(ok.is_ok());
        let err = MetricOp::from_row_major(AlgebraKind::Sl2r, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -2.0]);
        assert!(matches!(err, Err(Error::NotLorentzian { negative: 2, .. })));
    }

    #[test]
    fn rejects_non_k_symmetric_and_singular() {
        let mut ainv = DMatrix::identity(3, 3);
        ainv[(0, 2)] = 1.0;
        assert!(matches!(
            MetricOp::new(AlgebraKind::Sl2r, ainv),
            Err(Error::NotKSymmetric { .. })
        ));
        let mut ainv = DMatrix::identity(3, 3);
        ainv[(2, 2)] = 0.0;
        assert!(matches!(MetricOp::new(AlgebraKind::Sl2r, ainv), Err(Error::Singular(_))));
        assert!(matches!(
            MetricOp::from_row_major(AlgebraKind::Sl2r, &[1.0; 4]),
            Err(Error::DimensionMismatch { expected: 9, found: 4 })
        ));
    }

    #[test]
    fn example_dual_form_matches_quadratic() {
        // g*(x,x) = 8 (x1^2 + x2^2 - 2 x3^2 + 3 y1^2 + 3 y2^2 + y3^2).
        let m = example();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let weights = [1.0, 1.0, -2.0, 3.0, 3.0, 1.0];
        for _ in 0..20 {
            let x = m.alg().random_element(&mut rng, 1.0);
            let q: f64 = (0..6).map(|i| weights[i] * x[i] * x[i]).sum();
            assert!((m.g_star(&x, &x) - 8.0 * q).abs() < 1e-12);
        }
        let e3 = m.alg().basis_vector(2);
        assert!((m.g_star(&e3, &e3) + 16.0).abs() < 1e-12);
        assert_eq!(m.causal_character(&e3), CausalCharacter::Timelike);
        assert_eq!(m.causal_character(&(e3 * 3.5)), CausalCharacter::Timelike);
        assert_eq!(m.causal_character(&m.alg().zero()), CausalCharacter::Zero);
        assert_eq!(m.g(&m.alg().basis_vector(1), &m.alg().zero()), 0.0);
    }

    #[test]
    fn dual_of_dual_is_g() {
        let m = example();
        let dual = MetricOp::new(AlgebraKind::Sl2c, m.a().clone()).unwrap();
        assert!((dual.gram_gstar() - m.gram_g()).amax() < 1e-12);
    }

    #[test]
    fn conjugation_round_trip() {
        let m = example();
        let same = m.conjugate(&GroupElement::identity()).unwrap();
        assert!((same.ainv() - m.ainv()).amax() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let g = m.alg().random_group_element(&mut rng, 0.5);
            let back = m.conjugate(&g).unwrap().conjugate(&g.inverse()).unwrap();
            assert!((back.ainv() - m.ainv()).amax() < 1e-9);
        }
    }

    #[test]
    fn connection_identities() {
        let m = example();
        let alg = m.alg();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(m.connection(&alg.zero(), &alg.basis_vector(1)).amax() == 0.0);
        for _ in 0..100 {
            let x = alg.random_element(&mut rng, 1.0);
            let y = alg.random_element(&mut rng, 1.0);
            let w = alg.random_element(&mut rng, 1.0);
            let torsion = m.connection(&x, &y) - m.connection(&y, &x) - alg.br(&x, &y);
            assert!(torsion.amax() < 1e-10);
            let compat = m.g(&m.connection(&x, &y), &w) + m.g(&y, &m.connection(&x, &w));
            assert!(compat.abs() < 1e-10);
            // A (-nabla_v v) = F(A v): geodesic equation in Euler variables.
            let lhs = m.a() * (-m.connection(&x, &x));
            let ax = m.a() * &x;
            let rhs = alg.br(&ax, &(m.ainv() * &ax));
            assert!((lhs - rhs).amax() < 1e-10);
        }
    }

    #[test]
    fn killing_generator_is_skew() {
        let m = example();
        let e3 = m.alg().basis_vector(2);
        let skew = m.ad_star(&e3) + m.alg().ad_matrix(&e3);
        assert!(skew.amax() < 1e-10);
    }

    #[test]
    fn semi_riemannian_constructor_accepts_other_indices() {
        let ainv = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0, -1.0, 1.0]));
        let m = MetricOp::semi_riemannian(AlgebraSpec::sl2c(), ainv).unwrap();
        assert_eq!(m.index(), 0);
    }
}
