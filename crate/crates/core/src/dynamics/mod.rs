//! The Euler field `F(x) = [x, A^{-1} x]` and everything built on its flow.

mod gcs;
mod geodesic;
mod idempotents;
mod integrals;
mod integrate;
mod um_family;

pub use gcs::{detect_gcs, gcs_blowup_time, GcsOptions, GcsWitness};
pub use geodesic::{propagate_group, reconstruct_geodesic, verify_killing_conservation};
pub use idempotents::{find_idempotents, refine_idempotent};
pub use integrals::{
    first_integral_drift, first_integrals, sample_drift, FirstIntegralDrift, FirstIntegralSet,
};
pub use integrate::{integrate, IntegrateOptions, Trajectory, TrajectoryStatus};
pub use um_family::{construct_um_solution, scan_um_conventions, HFactorConvention, UmSolution};

use crate::lie::AlgebraVec;
use crate::metric::MetricOp;
use nalgebra::DMatrix;

/// `F(x) = [x, A^{-1} x]`.
pub fn euler_field(m: &MetricOp, x: &AlgebraVec) -> AlgebraVec {
    m.alg().br(x, &(m.ainv() * x))
}

/// Jacobian of the Euler field: `dF_x(h) = [h, A^{-1}x] + [x, A^{-1}h]`.
pub fn euler_jacobian(m: &MetricOp, x: &AlgebraVec) -> DMatrix<f64> {
    let alg = m.alg();
    alg.ad_matrix(x) * m.ainv() - alg.ad_matrix(&(m.ainv() * x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn euler_field_basic_properties() {
        let m = presets::paper_example();
        let alg = m.alg();
        assert_eq!(euler_field(&m, &alg.zero()).amax(), 0.0);
        assert!(euler_field(&m, &alg.basis_vector(2)).amax() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x = alg.random_element(&mut rng, 1.0);
            let lam = 1.7;
            let lhs = euler_field(&m, &(&x * lam));
            let rhs = euler_field(&m, &x) * (lam * lam);
            assert!((lhs - rhs).amax() < 1e-10);
            let h = alg.random_element(&mut rng, 1e-6);
            // Central differences are exact for a quadratic field.
            let fd = (euler_field(&m, &(&x + &h)) - euler_field(&m, &(&x - &h))) * 0.5;
            let lin = euler_jacobian(&m, &x) * &h;
            assert!((fd - lin).amax() < 1e-14);
        }
    }

    #[test]
    fn example_ode_right_hand_side() {
        // Independent expansion of F for A^-1 = diag(1,1,2,-3,-3,1) in
        // coordinates (a1,a2,a3,b1,b2,b3).
        let m = presets::paper_example();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r2 = 2f64.sqrt();
        for _ in 0..20 {
            let u = m.alg().random_element(&mut rng, 1.0);
            let (a1, a2, a3, b1, b2, b3) = (u[0], u[1], u[2], u[3], u[4], u[5]);
            let expected = [
                r2 * (-a2 * a3 + 4.0 * b2 * b3),
                r2 * (a1 * a3 - 4.0 * b1 * b3),
                0.0,
                -5.0 * r2 * a3 * b2,
                5.0 * r2 * a3 * b1,
                4.0 * r2 * (-a1 * b2 + a2 * b1),
            ];
            let f = euler_field(&m, &u);
            for i in 0..6 {
                assert!((f[i] - expected[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn causal_killing_gives_equilibrium() {
        for p in [presets::TIMELIKE_KILLING, presets::LIGHTLIKE_KILLING] {
            let m = p.metric().unwrap();
            let z = m.alg().basis_vector(3);
            assert!(euler_field(&m, &(m.a() * &z)).amax() < 1e-12);
        }
    }
}
