use nalgebra::{DMatrix, Matrix3, Matrix4, Matrix6, Vector3, Vector6};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pkstiff::chain::jacobians;
use pkstiff::compliance::{beam_compliance, serial_aggregate, BeamSection, ComplianceMatrix6};
use pkstiff::config::Config;
use pkstiff::data;
use pkstiff::kinetostatics::{cartesian_spring_compliance, chain_stiffness_svd, solve_chain};
use pkstiff::linalg;
use pkstiff::orthoglide::{
    build_chain, chain_blocks, chain_config, evaluate_stiffness, inverse_kinematics,
    permute_cyclic, LinkCompliances, OrthoglideGeometry, OrthoglideModel, Variant, WORKSPACE_CUBE,
};
use pkstiff::parallelogram::{
    parallelogram_stiffness_analytic, parallelogram_stiffness_numeric, ParallelogramSpec,
    ParallelogramState,
};
use pkstiff::procrustes::{
    build_compliance, fit_rigid_motion, synthetic_dataset, DisplacementDataset, LoadCase, Node,
};
use pkstiff::se3::{twist_from_derivative, Axis, ElemMotion, HomTransform, Twist6, SPRING6_ORDER};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_pose(r: &mut ChaCha8Rng) -> HomTransform {
    let mut t = HomTransform::identity();
    for axis in Axis::ALL {
        t = t * ElemMotion::rot(axis)
            .transform(r.random_range(-3.0..3.0))
            .unwrap();
        t = t * ElemMotion::tran(axis)
            .transform(r.random_range(-200.0..200.0))
            .unwrap();
    }
    t
}

fn random_compliance(r: &mut ChaCha8Rng) -> ComplianceMatrix6 {
    let a = Matrix6::from_fn(|_, _| r.random_range(-1.0..1.0));
    let s = Matrix6::from_diagonal(&Vector6::new(1e-2, 1e-2, 1e-2, 1e-4, 1e-4, 1e-4));
    ComplianceMatrix6::new(s * (a * a.transpose() + Matrix6::identity() * 0.1) * s).unwrap()
}

fn prototype(variant: Variant) -> OrthoglideModel {
    OrthoglideModel::new(
        OrthoglideGeometry::new(310.88, 30.23, 82.0, variant, Default::default()).unwrap(),
        LinkCompliances::prototype(),
    )
}

fn reachable_point(r: &mut ChaCha8Rng) -> Vector3<f64> {
    Vector3::from_fn(|_, _| r.random_range(WORKSPACE_CUBE.0..WORKSPACE_CUBE.1))
}

#[test]
fn orthonormality_survives_long_compositions() {
    let mut r = rng(11);
    let mut t = HomTransform::identity();
    for _ in 0..10_000 {
        let axis = Axis::ALL[r.random_range(0..3)];
        t = (t * ElemMotion::rot(axis)
            .transform(r.random_range(-3.0..3.0))
            .unwrap())
        .reorthonormalize();
    }
    assert!(
        t.orthonormality_error() < 1e-9,
        "{}",
        t.orthonormality_error()
    );
}

#[test]
fn shipped_config_is_the_prototype() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/orthoglide.json");
    assert_eq!(Config::load(path).unwrap(), Config::prototype());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn twist_extraction_is_linear(a in -5.0..5.0f64, b in -5.0..5.0f64, i in 0usize..6, j in 0usize..6) {
        let gi = *SPRING6_ORDER[i].generator().matrix();
        let gj = *SPRING6_ORDER[j].generator().matrix();
        let mix: Matrix4<f64> = gi * a + gj * b;
        let lhs = twist_from_derivative(&mix).unwrap();
        let rhs = twist_from_derivative(&gi).unwrap().0 * a + twist_from_derivative(&gj).unwrap().0 * b;
        prop_assert!((lhs.0 - rhs).amax() < 1e-12);
    }

    #[test]
    fn aggregation_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (pa, pb, pc) = (random_pose(&mut r), random_pose(&mut r), random_pose(&mut r));
        let (ka, kb, kc) = (random_compliance(&mut r), random_compliance(&mut r), random_compliance(&mut r));
        let flat = serial_aggregate(&[(pa, ka), (pb, kb), (pc, kc)]).unwrap();
        let bc = serial_aggregate(&[(HomTransform::identity(), kb), (pc, kc)]).unwrap();
        let right = serial_aggregate(&[(pa, ka), (pb * pc, bc)]).unwrap();
        let ab = serial_aggregate(&[(pa, ka), (pb, kb)]).unwrap();
        let left = serial_aggregate(&[(pa * pb, ab), (pc, kc)]).unwrap();
        prop_assert!(linalg::rel_frobenius6(right.matrix(), flat.matrix()) < 1e-10);
        prop_assert!(linalg::rel_frobenius6(left.matrix(), flat.matrix()) < 1e-10);
    }

    #[test]
    fn beam_sections_are_spd(l in 10.0..1000.0f64, b in 1.0..100.0f64, h in 1.0..100.0f64,
                             e in 1e4..3e5f64, g in 1e4..1e5f64) {
        let k = beam_compliance(&BeamSection::rectangular(l, b, h, e, g)).unwrap();
        let stiff = k.stiffness().unwrap();
        prop_assert!((k.matrix() - k.matrix().transpose()).amax() == 0.0);
        prop_assert!((k.matrix() * stiff - Matrix6::identity()).norm() < 1e-8);
    }

    #[test]
    fn chain_solution_balances_energy(seed in any::<u64>()) {
        let mut r = rng(seed);
        let variant = if seed % 2 == 0 { Variant::Puu } else { Variant::Prpar };
        let m = prototype(variant);
        let p = reachable_point(&mut r);
        let post = inverse_kinematics(&m.geometry, &p).unwrap();
        for cp in &post {
            let spec = build_chain(&m, cp.chain).unwrap();
            let jac = jacobians(&spec, &chain_config(&spec, cp)).unwrap();
            let blocks = chain_blocks(&m, cp).unwrap();
            let s = cartesian_spring_compliance(&jac, &blocks).unwrap();
            let stiff = chain_stiffness_svd(&s, &jac.j_q, linalg::DEFAULT_SIGMA_TOL).unwrap();
            let knorm = stiff.k.norm();
            // passive motions carry no force
            let ku = linalg::to_dmatrix6(&stiff.k) * &stiff.nullspace_basis;
            prop_assert!(ku.amax() < 1e-9 * knorm);
            let dt = Twist6::new(
                Vector3::from_fn(|_, _| r.random_range(-0.1..0.1)),
                Vector3::from_fn(|_, _| r.random_range(-1e-3..1e-3)),
            );
            let sol = solve_chain(&jac, &blocks, &dt, linalg::DEFAULT_SIGMA_TOL).unwrap();
            let outer = dt.as_vector().dot(&(stiff.k * dt.as_vector()));
            let inner = sol.tau_theta.dot(&sol.dtheta);
            prop_assert!((outer - inner).abs() <= 1e-8 * outer.abs().max(f64::MIN_POSITIVE));
            let jqf = jac.j_q.transpose() * DMatrix::from_column_slice(6, 1, sol.f.as_slice());
            prop_assert!(jqf.amax() <= 1e-8 * sol.f.norm() * jac.j_q.amax().max(1.0));
        }
    }

    #[test]
    fn manipulator_eigenvalues_dominate_chains(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = prototype(Variant::Prpar);
        let rep = evaluate_stiffness(&m, &reachable_point(&mut r)).unwrap();
        let lmin = |k: &Matrix6<f64>| linalg::sym_eigenvalues(&linalg::to_dmatrix6(k))
            .into_iter().fold(f64::INFINITY, f64::min);
        let scale = rep.k_m.norm();
        let km_min = lmin(&rep.k_m);
        for c in &rep.chains {
            prop_assert!(km_min >= lmin(&c.stiffness.k) - 1e-9 * scale);
            prop_assert!(lmin(&c.stiffness.k) >= -1e-9 * scale);
        }
    }

    #[test]
    fn parallelogram_assemblies_agree(seed in any::<u64>(), q in -1.2..1.2f64) {
        let mut r = rng(seed);
        let bar = random_compliance(&mut r);
        let spec = ParallelogramSpec::new(r.random_range(50.0..500.0), r.random_range(20.0..200.0), bar).unwrap();
        let st = ParallelogramState::new(q).unwrap();
        let a = parallelogram_stiffness_analytic(&st, &spec).unwrap();
        let n = parallelogram_stiffness_numeric(&st, &spec, None).unwrap();
        prop_assert!(linalg::rel_frobenius6(&a.k, &n.k) < 1e-8);
        prop_assert_eq!(a.rank(), 5);
    }

    #[test]
    fn parallelogram_rotation_scales_with_axial_stiffness(l in 100.0..500.0f64, d in 20.0..200.0f64) {
        let sec = BeamSection::rectangular(l, 20.0, 8.0, 7.0e4, 2.7e4);
        let stiff = BeamSection { area: 2.0 * sec.area, ..sec };
        let st = ParallelogramState::new(0.0).unwrap();
        let k = |s: &BeamSection| {
            let spec = ParallelogramSpec::new(l, d, beam_compliance(s).unwrap()).unwrap();
            parallelogram_stiffness_analytic(&st, &spec).unwrap().k
        };
        let (k1, k2) = (k(&sec), k(&stiff));
        prop_assert!((k2[(4, 4)] / k1[(4, 4)] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fit_is_a_least_squares_minimum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p0 = Vector3::from_fn(|_, _| r.random_range(-10.0..10.0));
        let true_rot = nalgebra::Rotation3::new(Vector3::from_fn(|_, _| r.random_range(-0.01..0.01)));
        let t = Vector3::from_fn(|_, _| r.random_range(-0.1..0.1));
        let nodes: Vec<Node> = (0..8).map(|i| {
            let p = Vector3::from_fn(|_, _| r.random_range(-50.0..50.0));
            let g = p - p0;
            let noise = Vector3::from_fn(|_, _| r.random_range(-1e-3..1e-3));
            Node { id: i, p, d: true_rot * g + t - g + noise }
        }).collect();
        let ds = DisplacementDataset::new(p0, nodes.clone(), LoadCase::canonical(0, 1.0).unwrap()).unwrap();
        let fit = fit_rigid_motion(&ds).unwrap();
        let cost = |rm: &Matrix3<f64>, tv: &Vector3<f64>| -> f64 {
            nodes.iter().map(|k| {
                let g = k.p - p0;
                (g + k.d - rm * g - tv).norm_squared()
            }).sum()
        };
        let best = cost(&fit.r, &fit.t);
        for _ in 0..20 {
            let dr = nalgebra::Rotation3::new(Vector3::from_fn(|_, _| r.random_range(-1e-4..1e-4)));
            let dtv = Vector3::from_fn(|_, _| r.random_range(-1e-4..1e-4));
            prop_assert!(cost(&(dr.matrix() * fit.r), &(fit.t + dtv)) >= best);
        }
    }

    #[test]
    fn compliance_fit_is_cloud_independent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = *ComplianceMatrix6::from_rows(&data::FOOT).unwrap().matrix();
        let mut cloud = || -> Vec<Vector3<f64>> {
            (0..6).map(|_| Vector3::from_fn(|_, _| r.random_range(-60.0..60.0))).collect()
        };
        let (c1, c2) = (cloud(), cloud());
        let p0 = Vector3::new(1.0, 2.0, 3.0);
        let fit = |c: &[Vector3<f64>]| {
            let ds: Vec<_> = (0..6)
                .map(|j| synthetic_dataset(&k, LoadCase::canonical(j, 1.0).unwrap(), p0, c).unwrap())
                .collect();
            build_compliance(&ds).unwrap()
        };
        let (e1, e2) = (fit(&c1), fit(&c2));
        prop_assert!(linalg::rel_frobenius6(e1.compliance.matrix(), e2.compliance.matrix()) < 1e-9);
        for i in 0..6 {
            prop_assert_eq!(e1.compliance.matrix()[(i, i)], e1.raw[(i, i)]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn diagonal_points_are_cyclically_symmetric(s in WORKSPACE_CUBE.0..WORKSPACE_CUBE.1, prpar in any::<bool>()) {
        let m = prototype(if prpar { Variant::Prpar } else { Variant::Puu });
        let k = evaluate_stiffness(&m, &Vector3::new(s, s, s)).unwrap().k_m;
        prop_assert!(linalg::rel_frobenius6(&permute_cyclic(&k), &k) < 1e-9);
    }

    #[test]
    fn generic_points_have_the_expected_ranks(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = reachable_point(&mut r);
        for (variant, chain_rank) in [(Variant::Puu, 2), (Variant::Prpar, 3)] {
            let rep = evaluate_stiffness(&prototype(variant), &p).unwrap();
            prop_assert_eq!(rep.rank_km, 6);
            prop_assert!(rep.chain_ranks().iter().all(|&k| k == chain_rank));
        }
    }

    #[test]
    fn parallelogram_never_softens_rotation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = reachable_point(&mut r);
        let puu = evaluate_stiffness(&prototype(Variant::Puu), &p).unwrap().k_rot.unwrap();
        let prpar = evaluate_stiffness(&prototype(Variant::Prpar), &p).unwrap().k_rot.unwrap();
        prop_assert!(prpar <= puu);
    }
}
