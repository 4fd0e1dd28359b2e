//! Fundamental sequences `k_m · x_m` (with `k_m` and `x_m` both convergent), limits in
//! the quotient compactification and cross-model refinement experiments.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chamber::{classify, ChamberPoint, ClassifierVerdict, Model};
use crate::config::ClassifyConfig;
use crate::error::{Error, Result};
use crate::lie::{cartan_decompose, check_dim, ChamberVector, Rotation, SpdPoint};
use crate::linalg::procrustes;
use crate::profile::SequenceProfile;
use crate::quotient::{equivalent_with, QuotientPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointSequenceRepr", into = "PointSequenceRepr")]
pub struct PointSequence {
    points: Vec<SpdPoint>,
}

#[derive(Serialize, Deserialize)]
struct PointSequenceRepr {
    n: usize,
    points: Vec<SpdPoint>,
}

impl TryFrom<PointSequenceRepr> for PointSequence {
    type Error = Error;
    fn try_from(r: PointSequenceRepr) -> Result<Self> {
        let s = PointSequence::new(r.points)?;
        check_dim(r.n, s.n())?;
        Ok(s)
    }
}

impl From<PointSequence> for PointSequenceRepr {
    fn from(s: PointSequence) -> Self {
        PointSequenceRepr {
            n: s.n(),
            points: s.points,
        }
    }
}

impl PointSequence {
    pub fn new(points: Vec<SpdPoint>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::Invalid("empty point sequence".into()))?;
        let n = first.n();
        for p in &points {
            check_dim(n, p.n())?;
        }
        Ok(PointSequence { points })
    }

    pub fn n(&self) -> usize {
        self.points[0].n()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SpdPoint] {
        &self.points
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalDecomposition {
    pub k_seq: Vec<Rotation>,
    pub h_seq: Vec<ChamberVector>,
}

impl FundamentalDecomposition {
    pub fn len(&self) -> usize {
        self.h_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_seq.is_empty()
    }

    /// Terms at the given indices.
    pub fn select(&self, indices: &[usize]) -> Self {
        FundamentalDecomposition {
            k_seq: indices.iter().map(|&i| self.k_seq[i].clone()).collect(),
            h_seq: indices.iter().map(|&i| self.h_seq[i].clone()).collect(),
        }
    }

    pub fn realize(&self) -> Result<PointSequence> {
        PointSequence::new(
            self.k_seq
                .iter()
                .zip(&self.h_seq)
                .map(|(k, h)| SpdPoint::from_cartan(k, h))
                .collect(),
        )
    }
}

/// Blocks of (numerically) equal entries of a decreasing vector.
fn tie_blocks(h: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let scale = tol * (1.0 + crate::lie::norm(h));
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..h.len() {
        if h[i - 1] - h[i] > scale {
            blocks.push(start..i);
            start = i;
        }
    }
    blocks.push(start..h.len());
    blocks
}

/// Chooses, among the decompositions of the same point, the `k` closest to `prev`:
/// column signs for simple eigenvalues, orthogonal alignment inside tie blocks.
fn align(k: &Rotation, h: &[f64], prev: &Rotation, tol: f64) -> Rotation {
    let n = k.n();
    let mut m = k.matrix().clone();
    let p = prev.matrix();
    for block in tie_blocks(h, tol) {
        let cols = block.len();
        let kb = m.columns(block.start, cols).clone_owned();
        let pb = p.columns(block.start, cols).clone_owned();
        let aligned = if cols == 1 {
            if kb.dot(&pb) < 0.0 {
                -kb
            } else {
                kb
            }
        } else {
            &kb * procrustes(&kb, &pb)
        };
        m.columns_mut(block.start, cols).copy_from(&aligned);
    }
    if m.determinant() < 0.0 {
        let worst = (0..n)
            .min_by(|&a, &b| {
                let da = m.column(a).dot(&p.column(a)).abs();
                let db = m.column(b).dot(&p.column(b)).abs();
                da.total_cmp(&db)
            })
            .expect("n >= 1");
        m.column_mut(worst).neg_mut();
    }
    Rotation::new_unchecked(m)
}

/// Termwise Cartan decomposition with `k_m` chosen continuously from `k_{m-1}`.
pub fn polar_sequence(s: &PointSequence, tol: f64) -> Result<FundamentalDecomposition> {
    let mut k_seq: Vec<Rotation> = Vec::with_capacity(s.len());
    let mut h_seq = Vec::with_capacity(s.len());
    for (index, p) in s.points().iter().enumerate() {
        let (k, h) = cartan_decompose(p);
        let k = match k_seq.last() {
            Some(prev) => align(&k, h.as_slice(), prev, tol),
            None => k,
        };
        let rebuilt = SpdPoint::from_cartan(&k, &h);
        let err = (rebuilt.matrix() - p.matrix()).amax();
        let scale = 1.0 + p.matrix().amax();
        if !(err <= tol.max(1e-12) * 1e3 * scale) {
            return Err(Error::Term {
                index,
                source: Box::new(Error::Invalid(format!("reconstruction error {err:e}"))),
            });
        }
        k_seq.push(k);
        h_seq.push(h);
    }
    Ok(FundamentalDecomposition { k_seq, h_seq })
}

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// Whether `k_m` has settled over the trailing window.
pub fn k_is_cauchy(k_seq: &[Rotation], cfg: &ClassifyConfig) -> Result<bool> {
    if k_seq.len() < cfg.window {
        return Err(Error::TooShort {
            len: k_seq.len(),
            window: cfg.window,
        });
    }
    let last = k_seq.last().expect("non-empty");
    let bound = cfg.cauchy_tol * (1.0 + frobenius(last.matrix()));
    Ok(k_seq[k_seq.len() - cfg.window..]
        .iter()
        .all(|k| k.distance(last) < bound))
}

/// `k_m` Cauchy and the chamber part converges in `model`.
pub fn is_fundamental(d: &FundamentalDecomposition, model: Model, cfg: &ClassifyConfig) -> Result<bool> {
    Ok(k_is_cauchy(&d.k_seq, cfg)? && classify(model, &d.h_seq, cfg)?.is_converged())
}

/// The quotient limit `(lim k_m, lim x_m)` of a fundamental decomposition, if it is one.
pub fn limit_of_decomposition(
    d: &FundamentalDecomposition,
    model: Model,
    cfg: &ClassifyConfig,
) -> Result<Option<QuotientPoint>> {
    if !k_is_cauchy(&d.k_seq, cfg)? {
        return Ok(None);
    }
    let verdict: ClassifierVerdict = classify(model, &d.h_seq, cfg)?;
    Ok(verdict.point().map(|x| QuotientPoint {
        k: d.k_seq.last().expect("non-empty").clone(),
        x: x.clone(),
        model,
    }))
}

/// A subsequence selection used when searching for fundamental subsequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "filter", rename_all = "snake_case")]
pub enum IndexFilter {
    Stride { stride: usize, offset: usize },
    Cluster { cluster: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsequenceLimit {
    pub filter: IndexFilter,
    pub limit: QuotientPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum QuotientLimit {
    Converged {
        limit: QuotientPoint,
        subsequences: Vec<SubsequenceLimit>,
    },
    /// Pairwise inequivalent classes reached by fundamental subsequences.
    NoLimit { classes: Vec<SubsequenceLimit> },
}

const MAX_CLUSTERS: usize = 4;
const CLUSTER_RADIUS: f64 = 0.5;

/// Groups indices by the nearest of at most four `k` sublimits read off the tail.
fn cluster_filters(k_seq: &[Rotation], window: usize) -> Vec<Vec<usize>> {
    let tail_start = k_seq.len().saturating_sub(2 * window);
    let mut reps: Vec<&Rotation> = Vec::new();
    for k in &k_seq[tail_start..] {
        if !reps.iter().any(|r| r.distance(k) < CLUSTER_RADIUS) {
            if reps.len() == MAX_CLUSTERS {
                return Vec::new();
            }
            reps.push(k);
        }
    }
    if reps.len() < 2 {
        return Vec::new();
    }
    let mut groups = vec![Vec::new(); reps.len()];
    for (i, k) in k_seq.iter().enumerate() {
        let nearest = (0..reps.len())
            .min_by(|&a, &b| reps[a].distance(k).total_cmp(&reps[b].distance(k)))
            .expect("non-empty");
        groups[nearest].push(i);
    }
    groups
}

/// Limit in the quotient of an already decomposed sequence, through the filter family
/// (strides 1 to 4 with every offset, plus `k`-clustering).
pub fn limit_of_decomposed(d: &FundamentalDecomposition, model: Model, cfg: &ClassifyConfig) -> Result<QuotientLimit> {
    let mut candidates: Vec<(IndexFilter, Vec<usize>)> = Vec::new();
    for stride in 1..=4 {
        for offset in 0..stride {
            candidates.push((
                IndexFilter::Stride { stride, offset },
                (offset..d.len()).step_by(stride).collect(),
            ));
        }
    }
    for (cluster, indices) in cluster_filters(&d.k_seq, cfg.window).into_iter().enumerate() {
        candidates.push((IndexFilter::Cluster { cluster }, indices));
    }
    let mut found: Vec<SubsequenceLimit> = Vec::new();
    for (filter, indices) in candidates {
        if indices.len() < cfg.window {
            continue;
        }
        if let Some(limit) = limit_of_decomposition(&d.select(&indices), model, cfg)? {
            found.push(SubsequenceLimit { filter, limit });
        }
    }
    if found.is_empty() {
        return Err(Error::Inconclusive);
    }
    let eq =
        |a: &QuotientPoint, b: &QuotientPoint| equivalent_with(a, b, cfg.limit_tol, cfg.maxface_rule).unwrap_or(false);
    let mut classes: Vec<SubsequenceLimit> = Vec::new();
    for s in &found {
        if !classes.iter().any(|c| eq(&c.limit, &s.limit)) {
            classes.push(s.clone());
        }
    }
    Ok(if classes.len() == 1 {
        QuotientLimit::Converged {
            limit: classes.remove(0).limit,
            subsequences: found,
        }
    } else {
        QuotientLimit::NoLimit { classes }
    })
}

/// Limit in the quotient compactification of a sequence of points of `X`.
pub fn limit_in_quotient(s: &PointSequence, model: Model, cfg: &ClassifyConfig) -> Result<QuotientLimit> {
    let d = polar_sequence(s, cfg.tol)?;
    limit_of_decomposed(&d, model, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementCounterexample {
    pub first: SequenceProfile,
    pub second: SequenceProfile,
    pub limits_a: [QuotientPoint; 2],
    pub limits_b: [QuotientPoint; 2],
}

/// Tabulation of "equal limits in A" against "equal limits in B" over sequence pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub model_a: Model,
    pub model_b: Model,
    pub pairs: usize,
    pub evaluated: usize,
    /// Pairs where some sequence had no detectable limit in one of the models.
    pub skipped: usize,
    /// `[[equal in both, equal in A only], [equal in B only, equal in neither]]`.
    pub table: [[usize; 2]; 2],
    /// Pairs where the numeric equality disagreed with the exact profile labels.
    pub label_mismatches: usize,
    pub implication_holds: bool,
    pub empty: bool,
    pub counterexamples: Vec<RefinementCounterexample>,
}

enum PairOutcome {
    Skipped,
    Evaluated {
        equal_a: bool,
        equal_b: bool,
        mismatch: bool,
        limits: Box<([QuotientPoint; 2], [QuotientPoint; 2])>,
    },
}

fn evaluate_pair(
    a: &SequenceProfile,
    b: &SequenceProfile,
    models: [Model; 2],
    grid: &[f64],
    cfg: &ClassifyConfig,
) -> PairOutcome {
    let eq =
        |p: &QuotientPoint, q: &QuotientPoint| equivalent_with(p, q, cfg.limit_tol, cfg.maxface_rule).unwrap_or(false);
    let mut equal = [false; 2];
    let mut mismatch = false;
    let mut limits: Vec<[QuotientPoint; 2]> = Vec::new();
    for (slot, model) in models.into_iter().enumerate() {
        let la = limit_of_decomposition(&a.decomposition(grid), model, cfg);
        let lb = limit_of_decomposition(&b.decomposition(grid), model, cfg);
        let (Ok(Some(la)), Ok(Some(lb))) = (la, lb) else {
            return PairOutcome::Skipped;
        };
        equal[slot] = eq(&la, &lb);
        if let (Some(ea), Some(eb)) = (a.exact_quotient_limit(model), b.exact_quotient_limit(model)) {
            mismatch |= eq(&ea, &eb) != equal[slot];
        }
        limits.push([la, lb]);
    }
    let lb = limits.pop().expect("two models");
    let la = limits.pop().expect("two models");
    PairOutcome::Evaluated {
        equal_a: equal[0],
        equal_b: equal[1],
        mismatch,
        limits: Box::new((la, lb)),
    }
}

/// Checks "equal limits in `model_a` ⟹ equal limits in `model_b`" on the given pairs,
/// each term sampled on `grid`. Pairs are evaluated in parallel; the report is ordered
/// by pair index.
pub fn refinement_report(
    model_a: Model,
    model_b: Model,
    pairs: &[(SequenceProfile, SequenceProfile)],
    grid: &[f64],
    cfg: &ClassifyConfig,
) -> RefinementReport {
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .map(|(a, b)| evaluate_pair(a, b, [model_a, model_b], grid, cfg))
        .collect();
    let mut report = RefinementReport {
        model_a,
        model_b,
        pairs: pairs.len(),
        evaluated: 0,
        skipped: 0,
        table: [[0; 2]; 2],
        label_mismatches: 0,
        implication_holds: false,
        empty: false,
        counterexamples: Vec::new(),
    };
    for ((a, b), outcome) in pairs.iter().zip(outcomes) {
        match outcome {
            PairOutcome::Skipped => report.skipped += 1,
            PairOutcome::Evaluated {
                equal_a,
                equal_b,
                mismatch,
                limits,
            } => {
                report.evaluated += 1;
                report.table[usize::from(!equal_a)][usize::from(!equal_b)] += 1;
                if mismatch {
                    report.label_mismatches += 1;
                }
                if equal_a && !equal_b {
                    report.counterexamples.push(RefinementCounterexample {
                        first: a.clone(),
                        second: b.clone(),
                        limits_a: limits.0,
                        limits_b: limits.1,
                    });
                }
            }
        }
    }
    report.empty = report.evaluated == 0;
    report.implication_holds = !report.empty && report.counterexamples.is_empty();
    report
}

/// `k_m · exp(H_m)` realized with `H_m = (2m, -m, -m)` and `k_m = diag(1, (-1)^m, (-1)^m)`,
/// scaled by `step` (the matrix form overflows beyond `m·step ≈ 170`).
pub fn alternating_remark_decomposition(len: usize, step: f64) -> FundamentalDecomposition {
    let flip = Rotation::signs(&[1.0, -1.0, -1.0]).expect("diagonal signs");
    FundamentalDecomposition {
        k_seq: (1..=len)
            .map(|m| {
                if m % 2 == 0 {
                    Rotation::identity(3)
                } else {
                    flip.clone()
                }
            })
            .collect(),
        h_seq: (1..=len)
            .map(|m| {
                let t = m as f64 * step;
                ChamberVector::new_unchecked(vec![2.0 * t, -t, -t])
            })
            .collect(),
    }
}

/// Chamber limit of the first subsequence, for reporting.
pub fn limit_point(l: &QuotientLimit) -> Option<&ChamberPoint> {
    match l {
        QuotientLimit::Converged { limit, .. } => Some(&limit.x),
        QuotientLimit::NoLimit { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chamber::default_grid;
    use crate::lie::FaceIndex;
    use crate::profile::{generate_pairs, Growth, KPath, RootProfile};
    use crate::sample::{random_rotation, random_spd, rng_for};
    use proptest::prelude::*;

    fn low(threshold: f64) -> ClassifyConfig {
        ClassifyConfig {
            divergence_threshold: threshold,
            ..Default::default()
        }
    }

    fn l1() -> Vec<f64> {
        let s = 6f64.sqrt();
        vec![2.0 / s, -1.0 / s, -1.0 / s]
    }

    #[test]
    fn constant_sequence() {
        let mut rng = rng_for(2, 0);
        let p = random_spd(3, 1.0, &mut rng);
        let s = PointSequence::new(vec![p; 12]).unwrap();
        let d = polar_sequence(&s, 1e-8).unwrap();
        assert!(d.k_seq.windows(2).all(|w| w[0] == w[1]));
        assert!(d.h_seq.windows(2).all(|w| w[0] == w[1]));
        assert!(is_fundamental(&d, Model::Visual, &ClassifyConfig::default()).unwrap());
    }

    #[test]
    fn converging_rotation_is_recovered_cauchy() {
        let h = ChamberVector::new(vec![1.0, 0.0, -1.0], 1e-8).unwrap();
        let pts = (1..=400)
            .map(|m| SpdPoint::from_cartan(&Rotation::plane(3, 0, 1, 1.0 / m as f64), &h))
            .collect();
        let d = polar_sequence(&PointSequence::new(pts).unwrap(), 1e-8).unwrap();
        assert!(k_is_cauchy(&d.k_seq, &ClassifyConfig::default()).unwrap());
        // the first frame fixes a sign pattern s; later frames follow R(1/m)·s
        let s = Rotation::plane(3, 0, 1, 1.0).transpose().compose(&d.k_seq[0]);
        for (m, k) in d.k_seq.iter().enumerate() {
            let want = Rotation::plane(3, 0, 1, 1.0 / (m + 1) as f64).compose(&s);
            assert!(k.distance(&want) < 1e-9);
        }
        assert!(d.h_seq.iter().all(|x| (x.as_slice()[0] - 1.0).abs() < 1e-12));
    }

    #[test]
    fn alternating_remark_sequence() {
        // Decomposition given directly: k_m alternates between two sublimits.
        let d = alternating_remark_decomposition(600, 1.0);
        let cfg = ClassifyConfig::default();
        assert!(!is_fundamental(&d, Model::Visual, &cfg).unwrap());
        let even: Vec<usize> = (1..600).step_by(2).collect();
        assert!(is_fundamental(&d.select(&even), Model::Visual, &cfg).unwrap());
        match limit_of_decomposed(&d, Model::Visual, &cfg).unwrap() {
            QuotientLimit::Converged { limit, subsequences } => {
                assert!(subsequences.len() >= 2);
                let ChamberPoint::VisualIdeal { direction } = &limit.x else {
                    panic!()
                };
                assert!(direction.iter().zip(l1()).all(|(a, b)| (a - b).abs() < 1e-6));
            }
            other => panic!("{other:?}"),
        }

        // Realized as matrices the sign pattern disappears: both signs give the same point.
        let small = alternating_remark_decomposition(80, 0.5);
        let s = small.realize().unwrap();
        let flip = Rotation::signs(&[1.0, -1.0, -1.0]).unwrap();
        let p1 = SpdPoint::from_cartan(&flip, &small.h_seq[0]);
        assert_eq!(p1, s.points()[0]);
        let rec = polar_sequence(&s, 1e-8).unwrap();
        for (h, want) in rec.h_seq.iter().zip(&small.h_seq) {
            assert!(h
                .as_slice()
                .iter()
                .zip(want.as_slice())
                .all(|(a, b)| (a - b).abs() < 1e-9 * (1.0 + b.abs())));
        }
        assert!(k_is_cauchy(&rec.k_seq, &low(20.0)).unwrap());
        let lim = limit_in_quotient(&s, Model::Visual, &low(20.0)).unwrap();
        let ChamberPoint::VisualIdeal { direction } = limit_point(&lim).unwrap() else {
            panic!()
        };
        assert!(direction.iter().zip(l1()).all(|(a, b)| (a - b).abs() < 1e-6));
    }

    #[test]
    fn two_rays_have_no_limit() {
        let dirs = [vec![2.0, -1.0, -1.0], vec![1.0, 0.0, -1.0]];
        let pts = (1..=80)
            .map(|m| {
                let t = m as f64 * 0.5;
                let h: Vec<f64> = dirs[m % 2].iter().map(|x| x * t).collect();
                SpdPoint::from_cartan(&Rotation::identity(3), &ChamberVector::new_unchecked(h))
            })
            .collect();
        let s = PointSequence::new(pts).unwrap();
        match limit_in_quotient(&s, Model::Visual, &low(20.0)).unwrap() {
            QuotientLimit::NoLimit { classes } => assert_eq!(classes.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconclusive_without_fundamental_subsequence() {
        let mut rng = rng_for(4, 0);
        let pts = (0..40).map(|_| random_spd(3, 1.0, &mut rng)).collect();
        let s = PointSequence::new(pts).unwrap();
        assert_eq!(
            limit_in_quotient(&s, Model::Visual, &ClassifyConfig::default()),
            Err(Error::Inconclusive)
        );
    }

    #[test]
    fn limit_of_visual_ray() {
        let pts = (1..=80)
            .map(|m| {
                let t = m as f64;
                SpdPoint::from_cartan(
                    &Rotation::identity(3),
                    &ChamberVector::new_unchecked(vec![t, -t / 2.0, -t / 2.0]),
                )
            })
            .collect();
        let lim = limit_in_quotient(&PointSequence::new(pts).unwrap(), Model::Visual, &low(50.0)).unwrap();
        match lim {
            QuotientLimit::Converged { limit, .. } => {
                assert!(limit.k.distance(&Rotation::identity(3)) < 1e-9);
                let ChamberPoint::VisualIdeal { direction } = &limit.x else {
                    panic!()
                };
                assert!(direction.iter().zip(l1()).all(|(a, b)| (a - b).abs() < 1e-9));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn refinement_examples() {
        let cfg = ClassifyConfig::default();
        let grid = default_grid();
        let pairs = generate_pairs(3, 300, 8);
        let check = |a, b| refinement_report(a, b, &pairs, &grid, &cfg);
        for (a, b) in [
            (Model::Martin, Model::Visual),
            (Model::Martin, Model::DualCell),
            (Model::Iterated, Model::Martin),
        ] {
            let r = check(a, b);
            assert!(r.implication_holds, "{a}→{b}: {r:?}");
            assert_eq!(r.label_mismatches, 0);
            assert_eq!(r.skipped, 0);
        }
        assert!(!check(Model::Visual, Model::DualCell).implication_holds);
        assert!(!check(Model::DualCell, Model::Visual).implication_holds);
        let empty = refinement_report(Model::Martin, Model::Visual, &[], &grid, &cfg);
        assert!(empty.empty && !empty.implication_holds);
    }

    #[test]
    fn explicit_incomparability_pairs() {
        let cfg = ClassifyConfig::default();
        let grid = default_grid();
        let lin = |c| RootProfile::new(Growth::Linear, c);
        let konst = |c| RootProfile::new(Growth::Const, c);
        let p = |roots| SequenceProfile::new(roots, KPath::Identity).unwrap();
        // same direction, different finite part: visual ⇏ dual-cell
        let vd = [(p(vec![lin(1.0), konst(1.0)]), p(vec![lin(1.0), konst(2.0)]))];
        let r = refinement_report(Model::Visual, Model::DualCell, &vd, &grid, &cfg);
        assert_eq!(r.counterexamples.len(), 1);
        // both regular, different directions: dual-cell ⇏ visual
        let dv = [(p(vec![lin(1.0), lin(1.0)]), p(vec![lin(1.0), lin(2.0)]))];
        let r = refinement_report(Model::DualCell, Model::Visual, &dv, &grid, &cfg);
        assert_eq!(r.counterexamples.len(), 1);
        assert_eq!(
            r.counterexamples[0].limits_a[0].x,
            ChamberPoint::DualCellIdeal {
                face: FaceIndex::empty(),
                offset: vec![0.0; 3]
            }
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn continuity_for_distinct_eigenvalues(seed in any::<u64>()) {
            let mut rng = rng_for(seed, 0);
            let k0 = random_rotation(4, &mut rng);
            let h = crate::sample::random_on_face(FaceIndex::empty(), 4, 1.0, &mut rng);
            let pts = (1..=60)
                .map(|m| SpdPoint::from_cartan(&k0.compose(&Rotation::plane(4, 0, 2, 1.0 / (m * m) as f64)), &h))
                .collect();
            let d = polar_sequence(&PointSequence::new(pts).unwrap(), 1e-8).unwrap();
            prop_assert!(k_is_cauchy(&d.k_seq, &ClassifyConfig::default()).unwrap());
        }
    }
}
