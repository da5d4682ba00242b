use eulerflow::dynamics::{euler_field, first_integrals};
use eulerflow::killing::{find_killing, normal_form};
use eulerflow::presets::{self, FamilyParams};
use eulerflow::{AlgebraKind, AlgebraVec, MetricOp};
use nalgebra::DVector;
use proptest::prelude::*;

fn vec_of(n: usize) -> impl Strategy<Value = AlgebraVec> {
    prop::collection::vec(-2.0..2.0_f64, n).prop_map(DVector::from_vec)
}

fn kind() -> impl Strategy<Value = AlgebraKind> {
    prop_oneof![Just(AlgebraKind::Sl2r), Just(AlgebraKind::Sl2c)]
}

fn kind_and_vecs(k: usize) -> impl Strategy<Value = (AlgebraKind, Vec<AlgebraVec>)> {
    kind().prop_flat_map(move |kd| (Just(kd), prop::collection::vec(vec_of(kd.dim()), k)))
}

fn metric_of(kd: AlgebraKind) -> MetricOp {
    match kd {
        AlgebraKind::Sl2r => presets::metric("sl2r-nilpotent-killing").unwrap(),
        AlgebraKind::Sl2c => presets::paper_example(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi((kd, v) in kind_and_vecs(3)) {
        let alg = kd.spec();
        let br = |a: &AlgebraVec, b: &AlgebraVec| alg.bracket(a, b).unwrap();
        prop_assert!((br(&v[0], &v[1]) + br(&v[1], &v[0])).norm() < 1e-12);
        let j = br(&v[0], &br(&v[1], &v[2])) + br(&v[1], &br(&v[2], &v[0])) + br(&v[2], &br(&v[0], &v[1]));
        prop_assert!(j.norm() < 1e-10);
    }

    #[test]
    fn killing_form_is_ad_invariant((kd, v) in kind_and_vecs(3)) {
        let alg = kd.spec();
        let lhs = alg.killing_form(&alg.bracket(&v[0], &v[1]).unwrap(), &v[2]);
        let rhs = alg.killing_form(&v[0], &alg.bracket(&v[1], &v[2]).unwrap());
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn euler_field_is_tangent_to_the_integrals((kd, v) in kind_and_vecs(1)) {
        // d/dt g*(u,u) = 2 g*(u, F(u)) = 0 and d/dt tr ad_u^2 = 0.
        let m = metric_of(kd);
        let u = &v[0];
        let f = euler_field(&m, u);
        prop_assert!(m.g_star(u, &f).abs() < 1e-9 * (1.0 + u.norm().powi(3)));
        prop_assert!(m.alg().killing_form(u, &f).abs() < 1e-9 * (1.0 + u.norm().powi(3)));
    }

    #[test]
    fn adjoint_action_preserves_the_killing_form(
        (kd, v) in kind_and_vecs(3),
    ) {
        let alg = kd.spec();
        let g = alg.exp_element(&(&v[2] * 0.3), 1.0);
        let (a, b) = (alg.adjoint_action(&g, &v[0]).unwrap(), alg.adjoint_action(&g, &v[1]).unwrap());
        let scale = 1.0 + v[0].norm() * v[1].norm() * 10.0 * (v[2].norm()).exp();
        prop_assert!((alg.killing_form(&a, &b) - alg.killing_form(&v[0], &v[1])).abs() < 1e-10 * scale);
    }

    #[test]
    fn integrals_are_invariant_under_the_killing_flow(v in vec_of(6), s in -1.0..1.0_f64) {
        // On the example e3 generates isometries; the conjugated point keeps g*.
        let m = presets::paper_example();
        let e3 = m.alg().basis_vector(2);
        let g = m.alg().exp_element(&e3, s);
        let w = m.alg().adjoint_action(&g, &v).unwrap();
        let (i0, i1) = (first_integrals(&m, &v, &[]), first_integrals(&m, &w, &[]));
        prop_assert!((i0.gstar - i1.gstar).abs() < 1e-9 * (1.0 + v.norm_squared()));
    }

    #[test]
    fn family_normal_form_recovers_parameters(
        d1 in -4.0..-0.1_f64,
        d2 in -1.0..1.0_f64,
        a in 0.3..3.0_f64,
        b in -3.0..-0.3_f64,
    ) {
        let p = FamilyParams::new(d1, d2, -1.0, a, b);
        prop_assume!(d1 * p.d3 + d2 * d2 > 0.1);
        let m = p.metric().unwrap();
        let r = find_killing(&m);
        prop_assume!(r.generators.len() == 1);
        let nf = normal_form(&m, &r.generators[0].z).unwrap();
        for (x, y) in [(nf.a, a), (nf.b, b), (nf.d1, d1), (nf.d3, -1.0)] {
            prop_assert!((x - y).abs() < 1e-8, "{} vs {}", x, y);
        }
        prop_assert!((nf.d2.abs() - d2.abs()).abs() < 1e-8);
        prop_assert!((nf.d - p.d()).abs() < 1e-7 * (1.0 + p.d().abs()));
    }
}
