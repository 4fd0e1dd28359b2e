//! The compactification `X̃ = (K × W̃)/∼` built from a chamber model.
//!
//! `(k, x) ∼ (r, y)` iff `x = y` and `kᵀr ∈ Stab(maxface(x))`. Boundary classes have no
//! matrix model; they are compared through their chamber data only.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chamber::{
    classify, default_grid, maxface_with, points_equal, random_ideal_point, witness_sequence, ChamberPoint, Model,
};
use crate::config::{ClassifyConfig, MaxfaceRule};
use crate::error::{Error, Result};
use crate::lie::{cartan_decompose, check_dim, in_stab, minimal_face, ChamberVector, FaceIndex, Rotation, SpdPoint};
use crate::sample::{random_face, random_on_face, random_rotation, random_stab_element, rng_for};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientPoint {
    pub k: Rotation,
    pub x: ChamberPoint,
    pub model: Model,
}

impl QuotientPoint {
    pub fn new(k: Rotation, x: ChamberPoint, model: Model) -> Result<Self> {
        check_dim(k.n(), x.n())?;
        if let Some(m) = x.model() {
            if m != model {
                return Err(Error::ModelMismatch(m.to_string(), model.to_string()));
            }
        }
        Ok(QuotientPoint { k, x, model })
    }

    pub fn n(&self) -> usize {
        self.k.n()
    }
}

/// The equivalence test with the refined maxface rule.
pub fn equivalent(p: &QuotientPoint, q: &QuotientPoint, tol: f64) -> Result<bool> {
    equivalent_with(p, q, tol, MaxfaceRule::Refined)
}

pub fn equivalent_with(p: &QuotientPoint, q: &QuotientPoint, tol: f64, rule: MaxfaceRule) -> Result<bool> {
    if p.model != q.model {
        return Err(Error::ModelMismatch(p.model.to_string(), q.model.to_string()));
    }
    check_dim(p.n(), q.n())?;
    if !points_equal(&p.x, &q.x, tol)? {
        return Ok(false);
    }
    let face = maxface_with(&p.x, tol, rule);
    Ok(in_stab(&p.k.transpose().compose(&q.k), face, tol))
}

/// `P ↦ (k, Interior(H))` from the Cartan decomposition.
pub fn canonicalize(p: &SpdPoint, model: Model) -> QuotientPoint {
    let (k, h) = cartan_decompose(p);
    QuotientPoint {
        k,
        x: ChamberPoint::interior(&h),
        model,
    }
}

/// `k · exp(2H) · kᵀ` for an interior class.
pub fn realize(p: &QuotientPoint) -> Result<SpdPoint> {
    match &p.x {
        ChamberPoint::Interior { h } => Ok(SpdPoint::from_cartan(&p.k, &ChamberVector::new_unchecked(h.clone()))),
        _ => Err(Error::IdealPoint),
    }
}

/// `r.(k, x) = (rk, x)`.
pub fn k_act(r: &Rotation, p: &QuotientPoint) -> Result<QuotientPoint> {
    check_dim(p.n(), r.n())?;
    Ok(QuotientPoint {
        k: r.compose(&p.k),
        x: p.x.clone(),
        model: p.model,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionCounterexample {
    pub x: ChamberPoint,
    pub maxface: FaceIndex,
    pub expected_shared: bool,
    pub reason: String,
}

/// Result of checking `kW̃ ∩ rW̃ = closure(kW ∩ rW)` on sampled chamber points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub n: usize,
    pub model: Model,
    pub i_min: FaceIndex,
    /// Points with `maxface ⊇ I_min`: shared classes, each with a witness sequence.
    pub shared_tested: usize,
    pub shared_passed: usize,
    /// Points with `maxface ⊉ I_min`: the two classes must differ.
    pub unshared_tested: usize,
    pub unshared_passed: usize,
    pub counterexamples: Vec<IntersectionCounterexample>,
}

impl IntersectionReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Largest deviation of `q · diag(H) · qᵀ` from `diag(H)` for `H` scaled to unit size.
fn commutator_defect(q: &Rotation, h: &[f64]) -> f64 {
    let scale = 1.0 + crate::lie::norm(h);
    let d: Vec<f64> = h.iter().map(|x| x / scale).collect();
    let lhs = q.conjugate_diagonal(&d);
    let rhs = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
    (lhs - rhs).amax()
}

fn check_point(
    k: &Rotation,
    r: &Rotation,
    i_min: FaceIndex,
    x: &ChamberPoint,
    model: Model,
    cfg: &ClassifyConfig,
) -> std::result::Result<bool, IntersectionCounterexample> {
    let face = maxface_with(x, cfg.tol, cfg.maxface_rule);
    let expected_shared = i_min.is_subset_of(face);
    let fail = |reason: String| IntersectionCounterexample {
        x: x.clone(),
        maxface: face,
        expected_shared,
        reason,
    };
    let p = QuotientPoint {
        k: k.clone(),
        x: x.clone(),
        model,
    };
    let q = QuotientPoint {
        k: r.clone(),
        x: x.clone(),
        model,
    };
    let eq = equivalent_with(&p, &q, cfg.tol, cfg.maxface_rule).map_err(|e| fail(e.to_string()))?;
    if eq != expected_shared {
        return Err(fail(format!("equivalence returned {eq}")));
    }
    if !expected_shared {
        return Ok(false);
    }
    let seq = witness_sequence(x, face, &default_grid(), cfg.tol).map_err(|e| fail(e.to_string()))?;
    let qk = k.transpose().compose(r);
    for h in &seq {
        let defect = commutator_defect(&qk, h.as_slice());
        if defect > 1e-9 {
            return Err(fail(format!("witness term leaves kW ∩ rW (defect {defect:e})")));
        }
    }
    let verdict = classify(model, &seq, cfg).map_err(|e| fail(e.to_string()))?;
    match verdict.point() {
        Some(limit) if points_equal(limit, x, cfg.limit_tol).unwrap_or(false) => Ok(true),
        other => Err(fail(format!("witness sequence classified to {other:?}"))),
    }
}

/// Samples chamber points (half interior, half ideal) and checks both inclusions of
/// the intersection property for the pair `(k, r)`. Sample `j` draws from stream `j`
/// of `seed`.
pub fn intersection_check(
    k: &Rotation,
    r: &Rotation,
    model: Model,
    samples: usize,
    cfg: &ClassifyConfig,
    seed: u64,
) -> Result<IntersectionReport> {
    let n = k.n();
    check_dim(n, r.n())?;
    let i_min = minimal_face(&k.transpose().compose(r), cfg.tol);
    let results: Vec<_> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng_for(seed, j as u64);
            let x = if j % 2 == 0 {
                // bias towards faces containing I_min so both inclusions are exercised
                let face = if j % 4 == 0 {
                    random_face(n - 1, &mut rng).union(i_min)
                } else {
                    random_face(n - 1, &mut rng)
                };
                ChamberPoint::interior(&random_on_face(face, n, 2.0, &mut rng))
            } else {
                random_ideal_point(model, n, &mut rng)
            };
            check_point(k, r, i_min, &x, model, cfg)
        })
        .collect();
    let mut report = IntersectionReport {
        n,
        model,
        i_min,
        shared_tested: 0,
        shared_passed: 0,
        unshared_tested: 0,
        unshared_passed: 0,
        counterexamples: Vec::new(),
    };
    for result in results {
        match result {
            Ok(true) => {
                report.shared_tested += 1;
                report.shared_passed += 1;
            }
            Ok(false) => {
                report.unshared_tested += 1;
                report.unshared_passed += 1;
            }
            Err(c) => {
                if c.expected_shared {
                    report.shared_tested += 1;
                } else {
                    report.unshared_tested += 1;
                }
                report.counterexamples.push(c);
            }
        }
    }
    Ok(report)
}

/// The rank-one case: the visual boundary of `X = H²` inside this construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneReport {
    pub direction: Vec<f64>,
    /// `maxface` of the unique ideal chamber point; its stabilizer is `{±I}`.
    pub maxface: FaceIndex,
    pub sampled_angles: Vec<f64>,
    /// Number of pairwise inequivalent classes among the sampled `(R_θ, L)`.
    pub distinct_classes: usize,
    /// Whether `(R_θ, L) ∼ (R_{θ+π}, L)` held for every sample.
    pub antipodes_identified: bool,
    /// Whether `(R_θ, L) ∼ (R_{θ+π/2}, L)` held for any sample.
    pub quarter_turns_identified: bool,
    pub one_point_expressible: bool,
    pub explanation: String,
}

/// Shows that for `n = 2` the quotient of the visual chamber model has boundary
/// `SO(2)/{±I}`, a circle, so the one-point compactification cannot arise this way.
pub fn rank_one_demonstration(samples: usize, seed: u64) -> RankOneReport {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = ChamberPoint::VisualIdeal { direction: vec![s, -s] };
    let tol = crate::lie::DEFAULT_TOL;
    let face = maxface_with(&x, tol, MaxfaceRule::Refined);
    let mut rng = rng_for(seed, 0);
    let angles: Vec<f64> = (0..samples)
        .map(|_| rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::PI))
        .collect();
    let class = |theta: f64| QuotientPoint {
        k: Rotation::plane(2, 0, 1, theta),
        x: x.clone(),
        model: Model::Visual,
    };
    let eq = |a: &QuotientPoint, b: &QuotientPoint| equivalent(a, b, tol).expect("same model");
    let mut reps: Vec<QuotientPoint> = Vec::new();
    for &t in &angles {
        let c = class(t);
        if !reps.iter().any(|r| eq(r, &c)) {
            reps.push(c);
        }
    }
    let antipodes_identified = angles.iter().all(|&t| eq(&class(t), &class(t + std::f64::consts::PI)));
    let quarter_turns_identified = angles
        .iter()
        .any(|&t| eq(&class(t), &class(t + std::f64::consts::FRAC_PI_2)));
    RankOneReport {
        direction: vec![s, -s],
        maxface: face,
        sampled_angles: angles,
        distinct_classes: reps.len(),
        antipodes_identified,
        quarter_turns_identified,
        one_point_expressible: false,
        explanation: "The chamber of SL(2) is a ray with one ideal point L. Its maximal face is ∅ and \
Stab(∅) = {±I}, so the ideal classes (k, L) form SO(2)/{±I}, a circle. Collapsing them to one point \
would need maxface(L) = Δ, but the only point of the closure of C_Δ is the origin."
            .into(),
    }
}

/// Outcome of probing the class `{(k·s, x) : s ∈ Stab(maxface(x))}` of a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStructureReport {
    pub maxface: FaceIndex,
    pub members_tested: usize,
    pub members_accepted: usize,
    pub nonmembers_tested: usize,
    pub nonmembers_rejected: usize,
}

impl ClassStructureReport {
    pub fn passed(&self) -> bool {
        self.members_accepted == self.members_tested && self.nonmembers_rejected == self.nonmembers_tested
    }
}

/// Samples `s ∈ Stab(maxface(x))` (must be equivalent) and rotations outside it (must not be).
pub fn class_structure_check<R: rand::Rng + ?Sized>(
    p: &QuotientPoint,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> ClassStructureReport {
    let n = p.n();
    let face = maxface_with(&p.x, tol, MaxfaceRule::Refined);
    let mut report = ClassStructureReport {
        maxface: face,
        members_tested: 0,
        members_accepted: 0,
        nonmembers_tested: 0,
        nonmembers_rejected: 0,
    };
    for _ in 0..samples {
        let s = random_stab_element(face, n, rng);
        let q = QuotientPoint {
            k: p.k.compose(&s),
            ..p.clone()
        };
        report.members_tested += 1;
        if equivalent(p, &q, tol).unwrap_or(false) {
            report.members_accepted += 1;
        }
    }
    if face != FaceIndex::full(n - 1) {
        let mut drawn = 0;
        while drawn < samples {
            let g = random_rotation(n, rng);
            if in_stab(&g, face, 1e-3) {
                continue;
            }
            drawn += 1;
            let q = QuotientPoint {
                k: p.k.compose(&g),
                ..p.clone()
            };
            report.nonmembers_tested += 1;
            if !equivalent(p, &q, tol).unwrap_or(true) {
                report.nonmembers_rejected += 1;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::from_root_values;
    use crate::sample::random_spd;
    use proptest::prelude::*;

    fn s6() -> f64 {
        6f64.sqrt()
    }

    fn l1() -> Vec<f64> {
        vec![2.0 / s6(), -1.0 / s6(), -1.0 / s6()]
    }

    #[test]
    fn equivalence_examples() {
        let m = ChamberPoint::MartinIdeal {
            face: FaceIndex::from_roots([2]),
            offset: vec![0.0; 3],
            direction: l1(),
        };
        let flip = Rotation::signs(&[1.0, -1.0, -1.0]).unwrap();
        let p = QuotientPoint::new(flip, m.clone(), Model::Martin).unwrap();
        let q = QuotientPoint::new(Rotation::identity(3), m, Model::Martin).unwrap();
        assert!(equivalent(&p, &p, 1e-8).unwrap());
        assert!(equivalent(&p, &q, 1e-8).unwrap());

        let v = ChamberPoint::VisualIdeal { direction: l1() };
        let turn = Rotation::plane(3, 0, 1, std::f64::consts::FRAC_PI_2);
        // oracle: the rotation does not fix diag(2,-1,-1)
        let d = turn.conjugate_diagonal(&[2.0, -1.0, -1.0]);
        assert!((d[(0, 0)] - 2.0).abs() > 1.0);
        let p = QuotientPoint::new(turn, v.clone(), Model::Visual).unwrap();
        let q = QuotientPoint::new(Rotation::identity(3), v, Model::Visual).unwrap();
        assert!(!equivalent(&p, &q, 1e-8).unwrap());
    }

    #[test]
    fn equivalence_errors() {
        let v = QuotientPoint::new(
            Rotation::identity(3),
            ChamberPoint::VisualIdeal { direction: l1() },
            Model::Visual,
        )
        .unwrap();
        let d = QuotientPoint::new(
            Rotation::identity(3),
            ChamberPoint::DualCellIdeal {
                face: FaceIndex::empty(),
                offset: vec![0.0; 3],
            },
            Model::DualCell,
        )
        .unwrap();
        assert!(matches!(equivalent(&v, &d, 1e-8), Err(Error::ModelMismatch(..))));
        let small = QuotientPoint::new(
            Rotation::identity(2),
            ChamberPoint::Interior { h: vec![0.0; 2] },
            Model::Visual,
        )
        .unwrap();
        let big = QuotientPoint::new(
            Rotation::identity(3),
            ChamberPoint::Interior { h: vec![0.0; 3] },
            Model::Visual,
        )
        .unwrap();
        assert!(matches!(
            equivalent(&small, &big, 1e-8),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(QuotientPoint::new(
            Rotation::identity(3),
            ChamberPoint::VisualIdeal { direction: l1() },
            Model::Martin
        )
        .is_err());
    }

    #[test]
    fn canonicalize_and_realize() {
        let id = canonicalize(&SpdPoint::identity(3), Model::Visual);
        assert_eq!(id.x, ChamberPoint::Interior { h: vec![0.0; 3] });
        assert_eq!(realize(&id).unwrap().matrix(), SpdPoint::identity(3).matrix());

        let e = std::f64::consts::E;
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![e * e, 1.0, 1.0 / (e * e)]));
        let p = SpdPoint::new(diag.clone(), 1e-8).unwrap();
        let c = canonicalize(&p, Model::Visual);
        match &c.x {
            ChamberPoint::Interior { h } => {
                assert!(h.iter().zip([1.0, 0.0, -1.0]).all(|(a, b)| (a - b).abs() < 1e-12))
            }
            _ => unreachable!(),
        }
        let back = realize(
            &QuotientPoint::new(
                Rotation::identity(3),
                ChamberPoint::Interior {
                    h: vec![1.0, 0.0, -1.0],
                },
                Model::Visual,
            )
            .unwrap(),
        )
        .unwrap();
        assert!((back.matrix() - diag).amax() < 1e-12);
        let ideal = QuotientPoint::new(
            Rotation::identity(3),
            ChamberPoint::VisualIdeal { direction: l1() },
            Model::Visual,
        )
        .unwrap();
        assert_eq!(realize(&ideal), Err(Error::IdealPoint));

        let mut rng = rng_for(11, 0);
        for _ in 0..50 {
            let k0 = random_rotation(3, &mut rng);
            let h0 = random_on_face(FaceIndex::empty(), 3, 1.0, &mut rng);
            let c = canonicalize(&SpdPoint::from_cartan(&k0, &h0), Model::Martin);
            let reference = QuotientPoint::new(k0, ChamberPoint::interior(&h0), Model::Martin).unwrap();
            assert!(equivalent(&c, &reference, 1e-8).unwrap());
        }
    }

    #[test]
    fn interior_faithfulness() {
        let mut rng = rng_for(5, 0);
        let mut agreements = 0;
        let total = 300;
        for j in 0..total {
            let face = random_face(2, &mut rng);
            let h = random_on_face(face, 3, 1.5, &mut rng);
            let k = random_rotation(3, &mut rng);
            let r = if j % 2 == 0 {
                k.compose(&random_stab_element(face, 3, &mut rng))
            } else {
                random_rotation(3, &mut rng)
            };
            let p = QuotientPoint::new(k, ChamberPoint::interior(&h), Model::Visual).unwrap();
            let q = QuotientPoint::new(r, ChamberPoint::interior(&h), Model::Visual).unwrap();
            let same = (realize(&p).unwrap().matrix() - realize(&q).unwrap().matrix()).amax() < 1e-8;
            if same == equivalent(&p, &q, 1e-8).unwrap() {
                agreements += 1;
            }
        }
        assert_eq!(agreements, total);
    }

    #[test]
    fn k_action() {
        let mut rng = rng_for(9, 0);
        let p = canonicalize(&random_spd(3, 1.0, &mut rng), Model::Visual);
        assert_eq!(k_act(&Rotation::identity(3), &p).unwrap(), p);
        let r = random_rotation(3, &mut rng);
        let lhs = realize(&k_act(&r, &p).unwrap()).unwrap();
        let rhs = r.matrix() * realize(&p).unwrap().matrix() * r.matrix().transpose();
        assert!((lhs.matrix() - rhs).amax() < 1e-10);
        assert!(k_act(&Rotation::identity(2), &p).is_err());
    }

    #[test]
    fn intersection_examples() {
        let cfg = ClassifyConfig::default();
        let id = Rotation::identity(3);
        let same = intersection_check(&id, &id, Model::Martin, 40, &cfg, 1).unwrap();
        assert_eq!(same.i_min, FaceIndex::empty());
        assert_eq!(same.shared_tested, 40);
        assert!(same.passed(), "{:?}", same.counterexamples);

        // diag(1,-1,-1) is diagonal, so it lies in Stab(∅) and shares every class.
        let flip = Rotation::signs(&[1.0, -1.0, -1.0]).unwrap();
        let rep = intersection_check(&id, &flip, Model::Visual, 40, &cfg, 2).unwrap();
        assert_eq!(rep.i_min, FaceIndex::empty());
        assert!(rep.passed());

        // A rotation inside the (2,3) block has I_min = {2}.
        let block = Rotation::plane(3, 1, 2, 0.7);
        for model in Model::ALL {
            let rep = intersection_check(&id, &block, model, 60, &cfg, 3).unwrap();
            assert_eq!(rep.i_min, FaceIndex::from_roots([2]));
            assert!(rep.shared_tested > 0 && rep.unshared_tested > 0, "{model}: {rep:?}");
            assert!(rep.passed(), "{model}: {:?}", rep.counterexamples);
        }

        let quarter = Rotation::plane(2, 0, 1, std::f64::consts::FRAC_PI_2);
        let rep = intersection_check(&Rotation::identity(2), &quarter, Model::Visual, 40, &cfg, 4).unwrap();
        assert_eq!(rep.i_min, FaceIndex::full(1));
        assert!(rep.passed(), "{:?}", rep.counterexamples);
        assert!(rep.shared_tested > 0);
    }

    #[test]
    fn rank_one() {
        let rep = rank_one_demonstration(25, 3);
        assert_eq!(rep.maxface, FaceIndex::empty());
        assert_eq!(rep.distinct_classes, 25);
        assert!(rep.antipodes_identified);
        assert!(!rep.quarter_turns_identified);
        assert!(!rep.one_point_expressible);
    }

    #[test]
    fn class_structure() {
        let mut rng = rng_for(21, 0);
        for model in Model::ALL {
            for _ in 0..5 {
                let x = random_ideal_point(model, 4, &mut rng);
                let p = QuotientPoint::new(random_rotation(4, &mut rng), x, model).unwrap();
                let rep = class_structure_check(&p, 20, 1e-8, &mut rng);
                assert!(rep.passed(), "{rep:?}");
            }
        }
        let origin = QuotientPoint::new(
            Rotation::identity(3),
            ChamberPoint::Interior { h: vec![0.0; 3] },
            Model::Visual,
        )
        .unwrap();
        let rep = class_structure_check(&origin, 10, 1e-8, &mut rng);
        assert_eq!(rep.nonmembers_tested, 0);
        assert!(rep.passed());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn equivalence_laws(seed in any::<u64>(), model_ix in 0usize..4) {
            let model = Model::ALL[model_ix];
            let mut rng = rng_for(seed, 0);
            let x = random_ideal_point(model, 4, &mut rng);
            let face = crate::chamber::maxface(&x, 1e-8);
            let k = random_rotation(4, &mut rng);
            let a = QuotientPoint::new(k.clone(), x.clone(), model).unwrap();
            let b = QuotientPoint::new(k.compose(&random_stab_element(face, 4, &mut rng)), x.clone(), model).unwrap();
            let c = QuotientPoint::new(b.k.compose(&random_stab_element(face, 4, &mut rng)), x.clone(), model).unwrap();
            let d = QuotientPoint::new(random_rotation(4, &mut rng), x, model).unwrap();
            let eq = |p: &QuotientPoint, q: &QuotientPoint| equivalent(p, q, 1e-8).unwrap();
            prop_assert!(eq(&a, &a));
            prop_assert!(eq(&a, &b) && eq(&b, &a));
            prop_assert!(eq(&b, &c) && eq(&a, &c));
            prop_assert_eq!(eq(&a, &d), eq(&d, &a));
            let r = random_rotation(4, &mut rng);
            prop_assert!(eq(&k_act(&r, &a).unwrap(), &k_act(&r, &b).unwrap()));
        }

        #[test]
        fn interior_roundtrip(seed in any::<u64>(), n in 2usize..6) {
            let mut rng = rng_for(seed, 1);
            let p = random_spd(n, 2.0, &mut rng);
            let back = realize(&canonicalize(&p, Model::Visual)).unwrap();
            prop_assert!((back.matrix() - p.matrix()).amax() < 1e-9 * (1.0 + p.matrix().amax()));
        }

        #[test]
        fn k_action_law(seed in any::<u64>()) {
            let mut rng = rng_for(seed, 2);
            let h = from_root_values(&[0.4, 0.0, 1.1]);
            let p = QuotientPoint::new(random_rotation(4, &mut rng), ChamberPoint::Interior { h }, Model::Martin).unwrap();
            let r1 = random_rotation(4, &mut rng);
            let r2 = random_rotation(4, &mut rng);
            let lhs = k_act(&r1, &k_act(&r2, &p).unwrap()).unwrap();
            let rhs = k_act(&r1.compose(&r2), &p).unwrap();
            prop_assert!(equivalent(&lhs, &rhs, 1e-8).unwrap());
        }
    }
}
