//! Generalized Busemann kernels `δ(x, y) = (c_I · ‖α_I(r(x, y))‖)_I` with values in
//! the nonnegative orthant, the normalized functions `b_x = δ(x, ·) - δ(x, o)`, and
//! sampling harnesses for the kernel conditions.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chamber::{geometric_grid, Model};
use crate::error::{Error, Result};
use crate::lie::{
    check_dim, distance, from_root_values, generalized_radius, norm, radius_from_frame, root_values, FaceIndex,
    SpdPoint,
};
use crate::profile::SequenceProfile;
use crate::quotient::equivalent;
use crate::sample::{random_face, random_rotation, random_spd, random_unit_direction, rng_for};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    F,
    M,
    K,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::F => "F",
            Family::M => "M",
            Family::K => "K",
            Family::Custom => "custom",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "F" => Ok(Family::F),
            "M" => Ok(Family::M),
            "K" => Ok(Family::K),
            "CUSTOM" => Ok(Family::Custom),
            _ => Err(Error::Invalid(format!(
                "unknown kernel family '{s}' (expected F, M, K or custom)"
            ))),
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub roots: FaceIndex,
    #[serde(default = "one")]
    pub scale: f64,
}

/// The cone coordinates of a kernel: one component per root subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: Family,
    pub n: usize,
    pub components: Vec<Component>,
}

/// Size first, then lexicographic on the sorted root lists.
fn subset_order(a: &FaceIndex, b: &FaceIndex) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter()))
}

impl KernelSpec {
    /// `F`: single roots; `M`: subsets of size 1 or 2; `K`: all nonempty subsets.
    pub fn family(family: Family, n: usize) -> Result<Self> {
        if !(2..=crate::lie::MAX_DIM).contains(&n) {
            return Err(Error::Invalid(format!("dimension {n} out of range")));
        }
        let rank = n - 1;
        if family == Family::K && rank > 16 {
            return Err(Error::Invalid("family K is limited to n <= 17".into()));
        }
        let mut faces: Vec<FaceIndex> = match family {
            Family::F => (1..=rank).map(|i| FaceIndex::from_roots([i])).collect(),
            Family::M => {
                let mut v: Vec<FaceIndex> = (1..=rank).map(|i| FaceIndex::from_roots([i])).collect();
                for i in 1..=rank {
                    for j in i + 1..=rank {
                        v.push(FaceIndex::from_roots([i, j]));
                    }
                }
                v
            }
            Family::K => FaceIndex::all_subsets(rank).filter(|f| !f.is_empty()).collect(),
            Family::Custom => return Err(Error::Invalid("custom kernels need explicit components".into())),
        };
        faces.sort_by(subset_order);
        Ok(KernelSpec {
            family,
            n,
            components: faces.into_iter().map(|roots| Component { roots, scale: 1.0 }).collect(),
        })
    }

    pub fn custom(n: usize, mut components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("kernel needs at least one component".into()));
        }
        for c in &components {
            c.roots.check_rank(n - 1)?;
            if c.roots.is_empty() {
                return Err(Error::Invalid("kernel components must be nonempty root sets".into()));
            }
            if !(c.scale > 0.0 && c.scale.is_finite()) {
                return Err(Error::Invalid(format!(
                    "component scale must be positive, got {}",
                    c.scale
                )));
            }
        }
        components.sort_by(|a, b| subset_order(&a.roots, &b.roots));
        if components.windows(2).any(|w| w[0].roots == w[1].roots) {
            return Err(Error::Invalid("duplicate kernel component".into()));
        }
        Ok(KernelSpec {
            family: Family::Custom,
            n,
            components,
        })
    }

    /// The same components, each multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        KernelSpec::custom(
            self.n,
            self.components
                .iter()
                .map(|x| Component {
                    roots: x.roots,
                    scale: x.scale * c,
                })
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let rebuilt = match self.family {
            Family::Custom => KernelSpec::custom(self.n, self.components.clone())?,
            f => KernelSpec::family(f, self.n)?,
        };
        if rebuilt != *self {
            return Err(Error::Invalid("kernel components do not match the family".into()));
        }
        Ok(())
    }

    /// Kernel value for a given generalized radius.
    pub fn from_radius(&self, r: &[f64]) -> ConeVector {
        let alphas = root_values(r);
        ConeVector(
            self.components
                .iter()
                .map(|c| {
                    c.scale
                        * c.roots
                            .iter()
                            .map(|i| alphas[i - 1].max(0.0).powi(2))
                            .sum::<f64>()
                            .sqrt()
                })
                .collect(),
        )
    }
}

/// A point of the nonnegative orthant indexed by kernel components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConeVector(pub Vec<f64>);

impl ConeVector {
    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn kernel_eval(spec: &KernelSpec, x: &SpdPoint, y: &SpdPoint) -> Result<ConeVector> {
    check_dim(spec.n, x.n())?;
    Ok(spec.from_radius(generalized_radius(x, y)?.as_slice()))
}

/// Values of a function `X → ℝ^N` on a finite probe set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub probes: Vec<SpdPoint>,
    pub values: Vec<Vec<f64>>,
}

impl SampledFunction {
    pub fn sup_distance(&self, other: &SampledFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| diff_norm(a, b))
            .fold(0.0, f64::max)
    }
}

/// `b_x(y) = δ(x, y) - δ(x, o)` on each probe.
pub fn busemann_function(
    spec: &KernelSpec,
    x: &SpdPoint,
    o: &SpdPoint,
    probes: &[SpdPoint],
) -> Result<SampledFunction> {
    let base = kernel_eval(spec, x, o)?;
    let values = probes
        .iter()
        .map(|p| {
            let v = kernel_eval(spec, x, p)?;
            Ok(v.0.iter().zip(&base.0).map(|(a, b)| a - b).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(SampledFunction {
        probes: probes.to_vec(),
        values,
    })
}

/// Root-value scale of sampled centres. Larger centres only add conditioning error,
/// since every kernel is invariant under the `SL(n)` action.
const CENTRE_SCALE: f64 = 1.0;

/// Sampling parameters shared by the kernel harnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    /// Radius of the ball around the centre in which points are drawn.
    pub radius: f64,
    /// Pairs closer than this are excluded from ratio estimates.
    pub min_dist: f64,
    /// Slack on distances in the monotonicity check.
    pub margin: f64,
    /// Size of the perturbations used for the second-argument Lipschitz estimate.
    pub perturbation: f64,
    pub histogram_bins: usize,
    /// Number of violating pairs kept verbatim in reports.
    pub max_listed: usize,
    /// Sup-distance below which two limit functions count as equal.
    pub func_tol: f64,
    /// Relative spread over the trailing window below which `b`-values count as settled.
    pub stab_tol: f64,
    pub window: usize,
    /// Largest `|h_i|` reached by the sequences of the conjecture experiment.
    pub max_radius: f64,
    pub grid_len: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            radius: 3.0,
            min_dist: 1e-6,
            margin: 1e-6,
            perturbation: 1e-2,
            histogram_bins: 10,
            max_listed: 20,
            func_tol: 0.1,
            stab_tol: 0.05,
            window: 10,
            max_radius: 300.0,
            grid_len: 60,
        }
    }
}

fn sqrt_spd(x: &SpdPoint) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(x.matrix().clone());
    let d = DVector::from_iterator(x.n(), eig.eigenvalues.iter().map(|l| l.sqrt()));
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// `x^{1/2} · k · exp(2H) · kᵀ · x^{1/2}`, the point at radius `H` from `x` in frame `k`.
fn point_at(sqrt_x: &DMatrix<f64>, k: &crate::lie::Rotation, h: &[f64]) -> SpdPoint {
    SpdPoint::from_frame(k.matrix(), h)
        .transform(sqrt_x)
        .expect("same dimension")
}

/// A random chamber direction; wall directions occur with positive probability.
fn random_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let rank = n - 1;
    let zero = loop {
        let f = FaceIndex::from_roots((1..=rank).filter(|_| rng.random_range(0..3) == 0));
        if f.len() < rank {
            break f;
        }
    };
    random_unit_direction(zero, n, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition1Sampling {
    /// Random directions and frames.
    Random,
    /// One geodesic ray from the centre.
    Ray,
    /// Two rays: the regular one and the first wall direction.
    TwoDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition1Violation {
    pub near_distance: f64,
    pub far_distance: f64,
    pub near_norm: f64,
    pub far_norm: f64,
    pub near_radius: Vec<f64>,
    pub far_radius: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition1Report {
    pub family: Family,
    pub n: usize,
    pub sampling: Condition1Sampling,
    pub samples: usize,
    pub pairs_checked: usize,
    pub violation_count: usize,
    pub violations: Vec<Condition1Violation>,
}

/// Strict growth of `‖δ(·, x)‖` with `d(·, x)`: lists pairs `(y, z)` with
/// `d(z, x) > d(y, x) + margin` but `‖δ(z, x)‖ ≤ ‖δ(y, x)‖`.
pub fn check_condition1(
    spec: &KernelSpec,
    x: &SpdPoint,
    samples: usize,
    sampling: Condition1Sampling,
    cfg: &HarnessConfig,
    seed: u64,
) -> Result<Condition1Report> {
    let n = spec.n;
    check_dim(n, x.n())?;
    let sx = sqrt_spd(x);
    let mut rng = rng_for(seed, 0);
    let ray_k = random_rotation(n, &mut rng);
    let ray_dir = random_direction(n, &mut rng);
    let regular = {
        let v = from_root_values(&vec![1.0; n - 1]);
        let l = norm(&v);
        v.into_iter().map(|a| a / l).collect::<Vec<_>>()
    };
    let wall = {
        let mut a = vec![0.0; n - 1];
        a[0] = 1.0;
        let v = from_root_values(&a);
        let l = norm(&v);
        v.into_iter().map(|a| a / l).collect::<Vec<_>>()
    };
    let points: Vec<(f64, f64, Vec<f64>)> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng_for(seed, 1 + j as u64);
            let t = cfg.radius * rng.random_range(0.0..1.0);
            let (k, dir) = match sampling {
                Condition1Sampling::Random => (random_rotation(n, &mut rng), random_direction(n, &mut rng)),
                Condition1Sampling::Ray => (ray_k.clone(), ray_dir.clone()),
                Condition1Sampling::TwoDirection => {
                    (ray_k.clone(), if j % 2 == 0 { regular.clone() } else { wall.clone() })
                }
            };
            let h: Vec<f64> = dir.iter().map(|v| v * t).collect();
            let y = point_at(&sx, &k, &h);
            let r = generalized_radius(&y, x).expect("same dimension");
            (
                distance(&y, x).expect("same dimension"),
                spec.from_radius(r.as_slice()).norm(),
                r.into_vec(),
            )
        })
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].0.total_cmp(&points[b].0).then(a.cmp(&b)));
    let mut report = Condition1Report {
        family: spec.family,
        n,
        sampling,
        samples,
        pairs_checked: samples * samples.saturating_sub(1) / 2,
        violation_count: 0,
        violations: Vec::new(),
    };
    for (pos, &z) in order.iter().enumerate() {
        for &y in &order[..pos] {
            let (dy, ny, ref ry) = points[y];
            let (dz, nz, ref rz) = points[z];
            if dz > dy + cfg.margin && nz <= ny {
                report.violation_count += 1;
                if report.violations.len() < cfg.max_listed {
                    report.violations.push(Condition1Violation {
                        near_distance: dy,
                        far_distance: dz,
                        near_norm: ny,
                        far_norm: nz,
                        near_radius: ry.clone(),
                        far_radius: rz.clone(),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    /// Generalized radii involved (one for a pair, two for a triple).
    pub radii: Vec<Vec<f64>>,
    pub distance: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub family: Family,
    pub n: usize,
    pub samples: usize,
    pub excluded: usize,
    pub estimate: f64,
    pub argmax: Option<RatioRecord>,
    /// Counts of `ratio / estimate` in equal bins over `[0, 1]`.
    pub histogram: Vec<usize>,
}

fn summarize(spec: &KernelSpec, samples: usize, records: Vec<Option<RatioRecord>>, bins: usize) -> RatioReport {
    let excluded = records.iter().filter(|r| r.is_none()).count();
    let mut argmax: Option<RatioRecord> = None;
    for r in records.iter().flatten() {
        if argmax.as_ref().is_none_or(|m| r.ratio > m.ratio) {
            argmax = Some(r.clone());
        }
    }
    let estimate = argmax.as_ref().map_or(0.0, |m| m.ratio);
    let mut histogram = vec![0; bins.max(1)];
    if estimate > 0.0 {
        for r in records.iter().flatten() {
            let b = ((r.ratio / estimate) * bins as f64) as usize;
            histogram[b.min(bins - 1)] += 1;
        }
    }
    RatioReport {
        family: spec.family,
        n: spec.n,
        samples,
        excluded,
        estimate,
        argmax,
        histogram,
    }
}

/// Estimates `ŝ = sup ‖δ(x, y)‖ / d(x, y)`. Sample `j` uses stream `j` of `seed`, so a
/// larger budget extends a smaller one and the estimate is non-decreasing in it.
pub fn check_lipschitz(spec: &KernelSpec, samples: usize, cfg: &HarnessConfig, seed: u64) -> RatioReport {
    let n = spec.n;
    let records: Vec<Option<RatioRecord>> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng_for(seed, j as u64);
            let x = random_spd(n, CENTRE_SCALE, &mut rng);
            let k = random_rotation(n, &mut rng);
            let t = cfg.radius * rng.random_range(0.0..1.0);
            let h: Vec<f64> = random_direction(n, &mut rng).iter().map(|v| v * t).collect();
            let y = point_at(&sqrt_spd(&x), &k, &h);
            let r = generalized_radius(&x, &y).expect("same dimension");
            let d = r.norm();
            (d >= cfg.min_dist).then(|| RatioRecord {
                ratio: spec.from_radius(r.as_slice()).norm() / d,
                distance: d,
                radii: vec![r.into_vec()],
            })
        })
        .collect();
    summarize(spec, samples, records, cfg.histogram_bins)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition3Form {
    /// `‖δ(x, z) - δ(x, z')‖ ≤ k · d(z, z')`.
    #[default]
    SecondArgument,
    /// `‖δ(x, y) - δ(x, z)‖ ≤ k · d(x, z)`, as printed.
    Literal,
}

/// Estimates the constant of condition 3. In the second-argument form, `z'` is either a
/// perturbation of `z` inside a common flat through `x` or a small random move.
pub fn check_condition3(
    spec: &KernelSpec,
    samples: usize,
    form: Condition3Form,
    cfg: &HarnessConfig,
    seed: u64,
) -> RatioReport {
    let n = spec.n;
    let records: Vec<Option<RatioRecord>> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng_for(seed, j as u64);
            let x = random_spd(n, CENTRE_SCALE, &mut rng);
            let sx = sqrt_spd(&x);
            let k = random_rotation(n, &mut rng);
            let t = cfg.radius * rng.random_range(0.0..1.0);
            let h: Vec<f64> = random_direction(n, &mut rng).iter().map(|v| v * t).collect();
            let z = point_at(&sx, &k, &h);
            let (a, b, d) = match form {
                Condition3Form::SecondArgument => {
                    let z2 = if j % 2 == 0 {
                        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                        let mean = v.iter().sum::<f64>() / n as f64;
                        v.iter_mut().for_each(|c| *c -= mean);
                        let scale = cfg.perturbation * rng.random_range(0.0..1.0) / norm(&v).max(1e-300);
                        let h2: Vec<f64> = h.iter().zip(&v).map(|(a, b)| a + scale * b).collect();
                        point_at(&sx, &k, &h2)
                    } else {
                        let i = rng.random_range(0..n);
                        let j = (i + rng.random_range(1..n)) % n;
                        let angle = cfg.perturbation * rng.random_range(-1.0..1.0);
                        point_at(&sx, &k.compose(&crate::lie::Rotation::plane(n, i, j, angle)), &h)
                    };
                    let d = distance(&z, &z2).expect("same dimension");
                    (z, z2, d)
                }
                Condition3Form::Literal => {
                    let k2 = random_rotation(n, &mut rng);
                    let t2 = cfg.radius * rng.random_range(0.0..1.0);
                    let h2: Vec<f64> = random_direction(n, &mut rng).iter().map(|v| v * t2).collect();
                    let y = point_at(&sx, &k2, &h2);
                    (y, z.clone(), distance(&x, &z).expect("same dimension"))
                }
            };
            if d < cfg.min_dist {
                return None;
            }
            let ra = generalized_radius(&x, &a).expect("same dimension");
            let rb = generalized_radius(&x, &b).expect("same dimension");
            let diff = diff_norm(
                spec.from_radius(ra.as_slice()).as_slice(),
                spec.from_radius(rb.as_slice()).as_slice(),
            );
            Some(RatioRecord {
                ratio: diff / d,
                distance: d,
                radii: vec![ra.into_vec(), rb.into_vec()],
            })
        })
        .collect();
    summarize(spec, samples, records, cfg.histogram_bins)
}

/// Largest `T` with `max |h_i(T)| ≤ limit`, by bisection on the profile.
fn horizon(p: &SequenceProfile, limit: f64) -> f64 {
    let size = |t: f64| {
        from_root_values(&p.root_values(t))
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    };
    let (mut lo, mut hi) = (1.0, 2.0);
    while size(hi) <= limit && hi < 1e12 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if size(mid) <= limit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Tail-averaged `lim b_{x_m}` on the probes, or `None` if it has not settled.
fn limit_function(
    spec: &KernelSpec,
    p: &SequenceProfile,
    probes: &[SpdPoint],
    cfg: &HarnessConfig,
) -> Result<Option<Vec<Vec<f64>>>> {
    let t_max = horizon(p, cfg.max_radius);
    let len = cfg.grid_len.max(cfg.window);
    let grid: Vec<f64> = geometric_grid(t_max / 1.08f64.powi(len as i32 - 1), 1.08, len);
    let d = p.decomposition(&grid[len - cfg.window..]);
    let o = SpdPoint::identity(spec.n);
    // per term, per probe, per component
    let mut terms: Vec<Vec<Vec<f64>>> = Vec::with_capacity(cfg.window);
    for (k, h) in d.k_seq.iter().zip(&d.h_seq) {
        let base = spec.from_radius(radius_from_frame(k, h.as_slice(), &o)?.as_slice());
        let mut row = Vec::with_capacity(probes.len());
        for y in probes {
            let v = spec.from_radius(radius_from_frame(k, h.as_slice(), y)?.as_slice());
            row.push(v.0.iter().zip(&base.0).map(|(a, b)| a - b).collect());
        }
        terms.push(row);
    }
    let comps = spec.components.len();
    let mut mean = vec![vec![0.0; comps]; probes.len()];
    for (j, m) in mean.iter_mut().enumerate() {
        for (c, slot) in m.iter_mut().enumerate() {
            let series: Vec<f64> = terms.iter().map(|row| row[j][c]).collect();
            let (lo, hi) = series
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
            let avg = series.iter().sum::<f64>() / series.len() as f64;
            if hi - lo > cfg.stab_tol * (1.0 + avg.abs()) {
                return Ok(None);
            }
            *slot = avg;
        }
    }
    Ok(Some(mean))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjecturePair {
    pub index: usize,
    pub same_model_limit: bool,
    pub sup_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub family: Family,
    pub model: Model,
    pub n: usize,
    pub probes: usize,
    pub pairs: usize,
    /// Pairs whose `b`-values had not settled over the trailing window.
    pub non_converged_tail: usize,
    /// `[[same limit & same function, same limit & different function],
    ///   [different limit & same function, different limit & different function]]`.
    pub confusion: [[usize; 2]; 2],
    pub details: Vec<ConjecturePair>,
}

/// Compares equality of exact model limits with equality of tail-averaged Busemann
/// limit functions over the probes. The outcome is an observation, not a verdict.
pub fn conjecture_experiment(
    spec: &KernelSpec,
    model: Model,
    pairs: &[(SequenceProfile, SequenceProfile)],
    probes: &[SpdPoint],
    cfg: &HarnessConfig,
) -> Result<ConjectureReport> {
    for p in probes {
        check_dim(spec.n, p.n())?;
    }
    let results: Vec<Result<Option<ConjecturePair>>> = pairs
        .par_iter()
        .enumerate()
        .map(|(index, (a, b))| {
            check_dim(spec.n, a.n())?;
            check_dim(spec.n, b.n())?;
            let (Some(ea), Some(eb)) = (a.exact_quotient_limit(model), b.exact_quotient_limit(model)) else {
                return Ok(None);
            };
            let same = equivalent(&ea, &eb, 1e-9)?;
            let (Some(fa), Some(fb)) = (
                limit_function(spec, a, probes, cfg)?,
                limit_function(spec, b, probes, cfg)?,
            ) else {
                return Ok(None);
            };
            let sup = fa.iter().zip(&fb).map(|(u, v)| diff_norm(u, v)).fold(0.0, f64::max);
            Ok(Some(ConjecturePair {
                index,
                same_model_limit: same,
                sup_distance: sup,
            }))
        })
        .collect();
    let mut report = ConjectureReport {
        family: spec.family,
        model,
        n: spec.n,
        probes: probes.len(),
        pairs: pairs.len(),
        non_converged_tail: 0,
        confusion: [[0; 2]; 2],
        details: Vec::new(),
    };
    for r in results {
        match r? {
            None => report.non_converged_tail += 1,
            Some(pair) => {
                let same_fn = pair.sup_distance < cfg.func_tol;
                report.confusion[usize::from(!pair.same_model_limit)][usize::from(!same_fn)] += 1;
                report.details.push(pair);
            }
        }
    }
    Ok(report)
}

/// Probe set: the base point plus `count - 1` random points of the given radius scale.
pub fn random_probes(n: usize, count: usize, radius: f64, seed: u64) -> Vec<SpdPoint> {
    let mut rng = rng_for(seed, 0);
    std::iter::once(SpdPoint::identity(n))
        .chain((1..count).map(|_| random_spd(n, radius, &mut rng)))
        .collect()
}

/// A random face, exposed for harness callers that stratify by face.
pub fn random_kernel_face<R: Rng + ?Sized>(n: usize, rng: &mut R) -> FaceIndex {
    random_face(n - 1, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{Growth, KPath, RootProfile};
    use crate::sample::random_sl;

    fn diag3(a: f64, b: f64, c: f64) -> SpdPoint {
        SpdPoint::new(DMatrix::from_diagonal(&DVector::from_vec(vec![a, b, c])), 1e-8).unwrap()
    }

    #[test]
    fn family_components() {
        let f = KernelSpec::family(Family::F, 4).unwrap();
        assert_eq!(f.components.len(), 3);
        let m = KernelSpec::family(Family::M, 4).unwrap();
        let roots: Vec<Vec<usize>> = m.components.iter().map(|c| c.roots.iter().collect()).collect();
        assert_eq!(
            roots,
            vec![vec![1], vec![2], vec![3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        let k = KernelSpec::family(Family::K, 4).unwrap();
        assert_eq!(k.components.len(), 7);
        assert_eq!(k.components.last().unwrap().roots, FaceIndex::full(3));
        assert!(KernelSpec::custom(3, vec![]).is_err());
        let dup = vec![
            Component {
                roots: FaceIndex::from_roots([1]),
                scale: 1.0
            };
            2
        ];
        assert!(KernelSpec::custom(3, dup).is_err());
        assert!(k.validate().is_ok());
    }

    #[test]
    fn kernel_examples() {
        // radius (2, 0, -2) under the half-log convention
        let e4 = std::f64::consts::E.powi(4);
        let o = SpdPoint::identity(3);
        let y = diag3(e4, 1.0, 1.0 / e4);
        let f = kernel_eval(&KernelSpec::family(Family::F, 3).unwrap(), &o, &y).unwrap();
        assert!(f.0.iter().zip([2.0, 2.0]).all(|(a, b)| (a - b).abs() < 1e-12), "{f:?}");
        let m = kernel_eval(&KernelSpec::family(Family::M, 3).unwrap(), &o, &y).unwrap();
        assert!(m
            .0
            .iter()
            .zip([2.0, 2.0, 2.0 * 2f64.sqrt()])
            .all(|(a, b)| (a - b).abs() < 1e-12));
        for fam in [Family::F, Family::M, Family::K] {
            let spec = KernelSpec::family(fam, 3).unwrap();
            assert!(kernel_eval(&spec, &y, &y).unwrap().0.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn busemann_normalization() {
        let spec = KernelSpec::family(Family::K, 3).unwrap();
        let o = SpdPoint::identity(3);
        let mut rng = rng_for(1, 0);
        let probes: Vec<SpdPoint> = (0..5)
            .map(|_| random_spd(3, 1.0, &mut rng))
            .chain([o.clone()])
            .collect();
        let b_o = busemann_function(&spec, &o, &o, &probes).unwrap();
        for (p, v) in probes.iter().zip(&b_o.values) {
            assert_eq!(v, &kernel_eval(&spec, &o, p).unwrap().0);
        }
        let x = random_spd(3, 2.0, &mut rng);
        let b = busemann_function(&spec, &x, &o, &probes).unwrap();
        assert!(b.values.last().unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn condition1_rank_one_and_rays() {
        let cfg = HarnessConfig::default();
        let f2 = KernelSpec::family(Family::F, 2).unwrap();
        let mut rng = rng_for(3, 0);
        let x = random_spd(2, 1.0, &mut rng);
        let rep = check_condition1(&f2, &x, 300, Condition1Sampling::Random, &cfg, 5).unwrap();
        assert_eq!(rep.violation_count, 0);
        let f3 = KernelSpec::family(Family::F, 3).unwrap();
        let x = random_spd(3, 1.0, &mut rng);
        let rep = check_condition1(&f3, &x, 300, Condition1Sampling::Ray, &cfg, 6).unwrap();
        assert_eq!(rep.violation_count, 0);
        let rep = check_condition1(&f3, &x, 300, Condition1Sampling::TwoDirection, &cfg, 7).unwrap();
        assert!(rep.violation_count > 0);
        let v = &rep.violations[0];
        assert!(v.far_distance > v.near_distance && v.far_norm <= v.near_norm);
    }

    /// Sup of `‖α(H)‖ / ‖H‖` over the closed chamber of `SL(3)`, by a fine angle scan.
    fn f3_chamber_sup() -> f64 {
        (0..=20000)
            .map(|i| {
                let s = i as f64 / 20000.0;
                let h = from_root_values(&[s, 1.0 - s]);
                norm(&root_values(&h)) / norm(&h)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn lipschitz_estimates() {
        let cfg = HarnessConfig::default();
        let r1 = check_lipschitz(&KernelSpec::family(Family::F, 2).unwrap(), 200, &cfg, 1);
        assert!((r1.estimate - 2f64.sqrt()).abs() < 1e-9, "{}", r1.estimate);
        let f3 = KernelSpec::family(Family::F, 3).unwrap();
        let small = check_lipschitz(&f3, 300, &cfg, 2);
        let big = check_lipschitz(&f3, 3000, &cfg, 2);
        assert!(big.estimate >= small.estimate);
        assert!(big.estimate < 1.05 * small.estimate);
        let sup = f3_chamber_sup();
        assert!((sup - 3.0 / 6f64.sqrt()).abs() < 1e-6);
        assert!((big.estimate - sup).abs() < 1e-6, "{} vs {sup}", big.estimate);
        let scaled = check_lipschitz(&f3.scaled(2.5).unwrap(), 300, &cfg, 2);
        assert!((scaled.estimate - 2.5 * small.estimate).abs() < 1e-9 * scaled.estimate);
        assert_eq!(big.histogram.iter().sum::<usize>() + big.excluded, 3000);
    }

    #[test]
    fn condition3_estimates() {
        let cfg = HarnessConfig::default();
        let f2 = KernelSpec::family(Family::F, 2).unwrap();
        let k = check_condition3(&f2, 400, Condition3Form::SecondArgument, &cfg, 4);
        assert!((k.estimate - 2f64.sqrt()).abs() < 1e-3, "{}", k.estimate);
        for fam in [Family::F, Family::M, Family::K] {
            let spec = KernelSpec::family(fam, 3).unwrap();
            let small = check_condition3(&spec, 400, Condition3Form::SecondArgument, &cfg, 5);
            let big = check_condition3(&spec, 4000, Condition3Form::SecondArgument, &cfg, 5);
            assert!(big.estimate.is_finite() && big.estimate >= small.estimate);
            assert!(
                big.estimate < 1.05 * small.estimate,
                "{fam}: {} vs {}",
                small.estimate,
                big.estimate
            );
        }
        // the largest singular value of the root map on trace-zero vectors bounds F
        let f3 = check_condition3(
            &KernelSpec::family(Family::F, 3).unwrap(),
            4000,
            Condition3Form::SecondArgument,
            &cfg,
            5,
        );
        assert!(f3.estimate <= 3f64.sqrt() * 1.01);
    }

    #[test]
    fn g_invariance() {
        let mut rng = rng_for(8, 0);
        let spec = KernelSpec::family(Family::K, 4).unwrap();
        for _ in 0..100 {
            let x = random_spd(4, 1.0, &mut rng);
            let y = random_spd(4, 1.0, &mut rng);
            let g = random_sl(4, 0.5, &mut rng);
            let a = kernel_eval(&spec, &x, &y).unwrap();
            let b = kernel_eval(&spec, &x.transform(&g).unwrap(), &y.transform(&g).unwrap()).unwrap();
            assert!(diff_norm(&a.0, &b.0) < 1e-8);
            assert!(a.0.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn homogeneity_on_rays() {
        let spec = KernelSpec::family(Family::F, 4).unwrap();
        let o = SpdPoint::identity(4);
        let k = random_rotation(4, &mut rng_for(2, 0));
        let h = from_root_values(&[0.3, 0.0, 0.5]);
        let at = |t: f64| {
            SpdPoint::from_cartan(
                &k,
                &crate::lie::ChamberVector::new_unchecked(h.iter().map(|v| v * t).collect()),
            )
        };
        let base = kernel_eval(&spec, &o, &at(1.0)).unwrap();
        for t in [0.5, 2.0, 7.0] {
            let v = kernel_eval(&spec, &o, &at(t)).unwrap();
            assert!(v
                .0
                .iter()
                .zip(&base.0)
                .all(|(a, b)| (a - t * b).abs() < 1e-9 * (1.0 + t)));
        }
    }

    #[test]
    fn conjecture_identical_pairs() {
        let p = SequenceProfile::new(
            vec![
                RootProfile::new(Growth::Linear, 1.0),
                RootProfile::new(Growth::Const, 1.0),
            ],
            KPath::Identity,
        )
        .unwrap();
        let probes = random_probes(3, 6, 1.0, 3);
        let spec = KernelSpec::family(Family::F, 3).unwrap();
        let rep = conjecture_experiment(
            &spec,
            Model::DualCell,
            &[(p.clone(), p)],
            &probes,
            &HarnessConfig::default(),
        )
        .unwrap();
        assert_eq!(rep.details.len(), 1);
        assert_eq!(rep.details[0].sup_distance, 0.0);
        assert_eq!(rep.confusion[0][0], 1);
    }
}
