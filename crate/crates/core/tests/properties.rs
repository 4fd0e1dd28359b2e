use proptest::prelude::*;
use weylcomp_core::busemann::random_probes;
use weylcomp_core::chamber::{default_grid, random_ideal_point};
use weylcomp_core::sample::{
    random_face, random_on_face, random_rotation, random_sl, random_spd, random_stab_element, rng_for,
};
use weylcomp_core::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::F), Just(Family::M), Just(Family::K)]
}

fn ideal_model() -> impl Strategy<Value = Model> {
    prop_oneof![Just(Model::Visual), Just(Model::DualCell), Just(Model::Martin)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cartan_roundtrip(seed in any::<u64>(), n in 2usize..=6) {
        let p = random_spd(n, 2.0, &mut rng_for(seed, 0));
        let (k, h) = cartan_decompose(&p);
        let back = SpdPoint::from_cartan(&k, &h);
        prop_assert!((back.matrix() - p.matrix()).norm() < 1e-9 * (1.0 + p.matrix().norm()));
        prop_assert!(root_values(h.as_slice()).iter().all(|a| *a >= -1e-12));
    }

    #[test]
    fn stabilizer_fixes_the_face(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = rng_for(seed, 0);
        let face = random_face(n - 1, &mut rng);
        let h = random_on_face(face, n, 1.0, &mut rng);
        let k = random_rotation(n, &mut rng);
        let s = random_stab_element(face, n, &mut rng);
        let a = SpdPoint::from_cartan(&k, &h);
        let b = SpdPoint::from_cartan(&k.compose(&s), &h);
        prop_assert!((a.matrix() - b.matrix()).norm() < 1e-9);
        prop_assert!(minimal_face(&s, 1e-9).is_subset_of(face));
    }

    #[test]
    fn kernel_nonnegative_and_invariant(seed in any::<u64>(), fam in family(), n in 2usize..=4) {
        let mut rng = rng_for(seed, 0);
        let spec = KernelSpec::family(fam, n).unwrap();
        let x = random_spd(n, 1.5, &mut rng);
        let y = random_spd(n, 1.5, &mut rng);
        let g = random_sl(n, 0.5, &mut rng);
        let a = kernel_eval(&spec, &x, &y).unwrap();
        let b = kernel_eval(&spec, &x.transform(&g).unwrap(), &y.transform(&g).unwrap()).unwrap();
        prop_assert!(a.0.iter().all(|v| *v >= 0.0));
        prop_assert!(a.0.iter().zip(&b.0).all(|(u, v)| (u - v).abs() < 1e-8));
    }

    #[test]
    fn busemann_vanishes_at_base(seed in any::<u64>(), fam in family(), n in 2usize..=4) {
        let spec = KernelSpec::family(fam, n).unwrap();
        let probes = random_probes(n, 4, 1.0, seed);
        let x = random_spd(n, 2.0, &mut rng_for(seed, 1));
        let b = busemann_function(&spec, &x, &probes[0], &probes).unwrap();
        prop_assert!(b.values[0].iter().all(|v| *v == 0.0));
    }

    /// Witness limits reproduce the point, and the limit of any witness inside `C_J`
    /// has maximal face containing `J`.
    #[test]
    fn witnesses_respect_face_closure(seed in any::<u64>(), model in ideal_model()) {
        let mut rng = rng_for(seed, 0);
        let cfg = ClassifyConfig::default();
        let p = random_ideal_point(model, 3, &mut rng);
        let top = maxface(&p, cfg.tol);
        for face in FaceIndex::all_subsets(2).filter(|f| f.is_subset_of(top)) {
            let seq = witness_sequence(&p, face, &default_grid(), cfg.tol).unwrap();
            let v = classify(model, &seq, &cfg).unwrap();
            let q = v.point().expect("witness converges");
            prop_assert!(points_equal(q, &p, cfg.limit_tol).unwrap());
            prop_assert!(face.is_subset_of(maxface(q, cfg.tol)));
        }
    }

    /// Martin limits project onto the visual and dual-cell limits of the same sequence.
    #[test]
    fn classifiers_are_consistent(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 0);
        let cfg = ClassifyConfig::default();
        let p = random_ideal_point(Model::Martin, 4, &mut rng);
        let seq = witness_sequence(&p, FaceIndex::empty(), &default_grid(), cfg.tol).unwrap();
        let m = classify(Model::Martin, &seq, &cfg).unwrap();
        let m = m.point().unwrap();
        for model in [Model::Visual, Model::DualCell] {
            let v = classify(model, &seq, &cfg).unwrap();
            let projected = m.project(model).unwrap();
            prop_assert!(points_equal(v.point().unwrap(), &projected, cfg.limit_tol).unwrap());
        }
    }

    #[test]
    fn serde_roundtrip_of_points(seed in any::<u64>(), model in ideal_model()) {
        let p = random_ideal_point(model, 4, &mut rng_for(seed, 0));
        let text = serde_json::to_string(&p).unwrap();
        let back: ChamberPoint = serde_json::from_str(&text).unwrap();
        prop_assert!(points_equal(&p, &back, 1e-12).unwrap());
    }
}
