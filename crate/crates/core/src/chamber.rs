//! Facially stratified compactifications of the closed Weyl chamber.
//!
//! Four boundary models are provided, each with a finite-sample limit classifier:
//! visual (unit directions), dual-cell (maximal Satake/Furstenberg, face plus finite
//! part), Martin (face, finite part and direction) and an iterated-directional model
//! that keeps refining the direction inside the walls the previous direction lies on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{ClassifyConfig, MaxfaceRule};
use crate::error::{Error, Result};
use crate::lie::{coroot_span_vector, face_of, norm, project_to_coroots, root_values, ChamberVector, FaceIndex};
use crate::trend::{analyze, Behavior, Trend};

/// Which compactification of the chamber a point or computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Visual,
    #[serde(rename = "dualcell")]
    DualCell,
    Martin,
    Iterated,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Visual, Model::DualCell, Model::Martin, Model::Iterated];

    pub fn name(self) -> &'static str {
        match self {
            Model::Visual => "visual",
            Model::DualCell => "dualcell",
            Model::Martin => "martin",
            Model::Iterated => "iterated",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "visual" => Ok(Model::Visual),
            "dualcell" => Ok(Model::DualCell),
            "martin" => Ok(Model::Martin),
            "iterated" => Ok(Model::Iterated),
            _ => Err(Error::Invalid(format!(
                "unknown model '{s}' (expected visual, dualcell, martin or iterated)"
            ))),
        }
    }
}

/// One refinement level of an iterated ideal point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteratedLevel {
    /// Roots, among those active at this level, whose values stay bounded.
    pub bounded: FaceIndex,
    /// Unit direction in the span of the active coroots.
    pub direction: Vec<f64>,
}

/// A point of a chamber compactification `W̃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChamberPoint {
    Interior {
        h: Vec<f64>,
    },
    VisualIdeal {
        direction: Vec<f64>,
    },
    DualCellIdeal {
        face: FaceIndex,
        offset: Vec<f64>,
    },
    MartinIdeal {
        face: FaceIndex,
        offset: Vec<f64>,
        direction: Vec<f64>,
    },
    IteratedIdeal {
        levels: Vec<IteratedLevel>,
        tail: Vec<f64>,
    },
}

impl ChamberPoint {
    pub fn interior(h: &ChamberVector) -> Self {
        ChamberPoint::Interior {
            h: h.as_slice().to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ChamberPoint::Interior { h } => h.len(),
            ChamberPoint::VisualIdeal { direction } => direction.len(),
            ChamberPoint::DualCellIdeal { offset, .. } | ChamberPoint::MartinIdeal { offset, .. } => offset.len(),
            ChamberPoint::IteratedIdeal { tail, .. } => tail.len(),
        }
    }

    pub fn is_interior(&self) -> bool {
        matches!(self, ChamberPoint::Interior { .. })
    }

    /// Boundary model of an ideal point; `None` for interior points, which belong to all.
    pub fn model(&self) -> Option<Model> {
        match self {
            ChamberPoint::Interior { .. } => None,
            ChamberPoint::VisualIdeal { .. } => Some(Model::Visual),
            ChamberPoint::DualCellIdeal { .. } => Some(Model::DualCell),
            ChamberPoint::MartinIdeal { .. } => Some(Model::Martin),
            ChamberPoint::IteratedIdeal { .. } => Some(Model::Iterated),
        }
    }

    pub fn belongs_to(&self, model: Model) -> bool {
        self.model().is_none_or(|m| m == model)
    }

    /// Checks the structural invariants of the variant.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.n();
        if n < 2 {
            return Err(Error::Invalid("chamber point needs dimension at least 2".into()));
        }
        let check_len = |v: &[f64]| crate::lie::check_dim(n, v.len());
        let check_trace = |v: &[f64]| {
            let s: f64 = v.iter().sum();
            if s.abs() > tol * (1.0 + norm(v)) {
                Err(Error::Invalid(format!("vector does not sum to zero ({s:e})")))
            } else {
                Ok(())
            }
        };
        let check_unit_chamber = |v: &[f64]| -> Result<()> {
            check_len(v)?;
            ChamberVector::new(v.to_vec(), tol)?;
            if (norm(v) - 1.0).abs() > tol.max(1e-9) * 10.0 {
                return Err(Error::Invalid("direction is not a unit vector".into()));
            }
            Ok(())
        };
        let check_offset = |face: FaceIndex, a: &[f64]| -> Result<()> {
            check_len(a)?;
            check_trace(a)?;
            face.check_rank(n - 1)?;
            if face == FaceIndex::full(n - 1) {
                return Err(Error::Invalid("ideal point cannot have face Δ".into()));
            }
            let proj = project_to_coroots(face, a);
            let off = a.iter().zip(&proj).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            if off > tol * (1.0 + norm(a)) {
                return Err(Error::Invalid("finite part leaves the span of the face coroots".into()));
            }
            let alphas = root_values(a);
            if face.iter().any(|i| alphas[i - 1] < -tol) {
                return Err(Error::Invalid(
                    "finite part has negative root values on its face".into(),
                ));
            }
            Ok(())
        };
        match self {
            ChamberPoint::Interior { h } => ChamberVector::new(h.clone(), tol).map(|_| ()),
            ChamberPoint::VisualIdeal { direction } => check_unit_chamber(direction),
            ChamberPoint::DualCellIdeal { face, offset } => check_offset(*face, offset),
            ChamberPoint::MartinIdeal {
                face,
                offset,
                direction,
            } => {
                check_offset(*face, offset)?;
                check_unit_chamber(direction)?;
                let alphas = root_values(direction);
                if face.iter().any(|i| alphas[i - 1].abs() > tol) {
                    return Err(Error::Invalid("Martin direction must vanish on the face roots".into()));
                }
                Ok(())
            }
            ChamberPoint::IteratedIdeal { levels, tail } => {
                check_len(tail)?;
                check_trace(tail)?;
                if levels.is_empty() {
                    return Err(Error::Invalid("iterated point needs at least one level".into()));
                }
                for level in levels {
                    check_len(&level.direction)?;
                    level.bounded.check_rank(n - 1)?;
                    if (norm(&level.direction) - 1.0).abs() > 1e-6 {
                        return Err(Error::Invalid("level direction is not a unit vector".into()));
                    }
                }
                Ok(())
            }
        }
    }

    /// Visual projection of a Martin or iterated point.
    pub fn to_visual(&self) -> Option<ChamberPoint> {
        match self {
            ChamberPoint::Interior { .. } | ChamberPoint::VisualIdeal { .. } => Some(self.clone()),
            ChamberPoint::MartinIdeal { direction, .. } => Some(ChamberPoint::VisualIdeal {
                direction: direction.clone(),
            }),
            ChamberPoint::IteratedIdeal { .. } => self.to_martin()?.to_visual(),
            ChamberPoint::DualCellIdeal { .. } => None,
        }
    }

    /// Dual-cell projection of a Martin or iterated point.
    pub fn to_dualcell(&self) -> Option<ChamberPoint> {
        match self {
            ChamberPoint::Interior { .. } | ChamberPoint::DualCellIdeal { .. } => Some(self.clone()),
            ChamberPoint::MartinIdeal { face, offset, .. } => Some(ChamberPoint::DualCellIdeal {
                face: *face,
                offset: offset.clone(),
            }),
            ChamberPoint::IteratedIdeal { .. } => self.to_martin()?.to_dualcell(),
            ChamberPoint::VisualIdeal { .. } => None,
        }
    }

    /// Martin projection (first level plus the finite part) of an iterated point.
    pub fn to_martin(&self) -> Option<ChamberPoint> {
        match self {
            ChamberPoint::Interior { .. } | ChamberPoint::MartinIdeal { .. } => Some(self.clone()),
            ChamberPoint::IteratedIdeal { levels, tail } => {
                let first = levels.first()?;
                let alphas = root_values(tail);
                let values: Vec<f64> = first.bounded.iter().map(|i| alphas[i - 1]).collect();
                Some(ChamberPoint::MartinIdeal {
                    face: first.bounded,
                    offset: coroot_span_vector(first.bounded, tail.len(), &values),
                    direction: first.direction.clone(),
                })
            }
            _ => None,
        }
    }

    /// Projection into another model, when this point refines it.
    pub fn project(&self, model: Model) -> Option<ChamberPoint> {
        match model {
            Model::Visual => self.to_visual(),
            Model::DualCell => self.to_dualcell(),
            Model::Martin => self.to_martin(),
            Model::Iterated => self.belongs_to(Model::Iterated).then(|| self.clone()),
        }
    }
}

fn face_values(face: FaceIndex, v: &[f64]) -> Vec<f64> {
    let alphas = root_values(v);
    face.iter().map(|i| alphas[i - 1]).collect()
}

fn zero_roots(face: FaceIndex, v: &[f64], tol: f64) -> FaceIndex {
    let threshold = tol * (1.0 + norm(v));
    let alphas = root_values(v);
    FaceIndex::from_roots(face.iter().filter(|&i| alphas[i - 1].abs() <= threshold))
}

/// The maximal face `J` with `p ∈ C̃_J` (the underlined-membership map), refined rule.
pub fn maxface(p: &ChamberPoint, tol: f64) -> FaceIndex {
    maxface_with(p, tol, MaxfaceRule::Refined)
}

pub fn maxface_with(p: &ChamberPoint, tol: f64, rule: MaxfaceRule) -> FaceIndex {
    let finite_part = |face: FaceIndex, a: &[f64]| match rule {
        MaxfaceRule::Refined => zero_roots(face, a, tol),
        MaxfaceRule::Literal => {
            if norm(a) <= tol {
                face
            } else {
                FaceIndex::empty()
            }
        }
    };
    match p {
        ChamberPoint::Interior { h } => face_of(h, tol),
        ChamberPoint::VisualIdeal { direction } => face_of(direction, tol),
        ChamberPoint::DualCellIdeal { face, offset } | ChamberPoint::MartinIdeal { face, offset, .. } => {
            finite_part(*face, offset)
        }
        ChamberPoint::IteratedIdeal { .. } => match p.to_martin() {
            Some(ChamberPoint::MartinIdeal { face, offset, .. }) => finite_part(face, &offset),
            _ => FaceIndex::empty(),
        },
    }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Equality of model data within `tol`. Ideal points of different models cannot be compared.
pub fn points_equal(p: &ChamberPoint, q: &ChamberPoint, tol: f64) -> Result<bool> {
    if let (Some(a), Some(b)) = (p.model(), q.model()) {
        if a != b {
            return Err(Error::ModelMismatch(a.to_string(), b.to_string()));
        }
    }
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            found: q.n(),
        });
    }
    use ChamberPoint::*;
    Ok(match (p, q) {
        (Interior { h: a }, Interior { h: b }) => close(a, b, tol),
        (VisualIdeal { direction: a }, VisualIdeal { direction: b }) => close(a, b, tol),
        (DualCellIdeal { face: f, offset: a }, DualCellIdeal { face: g, offset: b }) => f == g && close(a, b, tol),
        (
            MartinIdeal {
                face: f,
                offset: a,
                direction: l,
            },
            MartinIdeal {
                face: g,
                offset: b,
                direction: m,
            },
        ) => f == g && close(a, b, tol) && close(l, m, tol),
        (IteratedIdeal { levels: a, tail: s }, IteratedIdeal { levels: b, tail: t }) => {
            a.len() == b.len()
                && a.iter()
                    .zip(b)
                    .all(|(x, y)| x.bounded == y.bounded && close(&x.direction, &y.direction, tol))
                && close(s, t, tol)
        }
        _ => false,
    })
}

/// Outcome of classifying a finite sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Converged { point: ChamberPoint },
    Diverged { reason: String },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierVerdict {
    pub model: Model,
    pub outcome: Outcome,
    /// Trend of each simple root `α_i(H_m)` over the trailing window.
    pub diagnostics: Vec<Trend>,
}

impl ClassifierVerdict {
    pub fn point(&self) -> Option<&ChamberPoint> {
        match &self.outcome {
            Outcome::Converged { point } => Some(point),
            _ => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        self.point().is_some()
    }
}

fn inconclusive(reason: impl Into<String>) -> Outcome {
    Outcome::Inconclusive { reason: reason.into() }
}

fn diverged(reason: impl Into<String>) -> Outcome {
    Outcome::Diverged { reason: reason.into() }
}

/// Per-coordinate series of a vector sequence.
fn columns<F: Fn(&[f64]) -> Vec<f64>>(seq: &[Vec<f64>], f: F) -> Vec<Vec<f64>> {
    let rows: Vec<Vec<f64>> = seq.iter().map(|v| f(v)).collect();
    let width = rows.first().map_or(0, Vec::len);
    (0..width).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
}

fn analyze_all(series: &[Vec<f64>], cfg: &ClassifyConfig) -> Vec<Behavior> {
    series.iter().map(|s| analyze(s, cfg)).collect()
}

/// Snaps near-zero root values (below `limit_tol`) of a limit estimate onto the wall,
/// keeping the vector in the span of the `active` coroots.
fn snap(active: FaceIndex, v: &[f64], cfg: &ClassifyConfig) -> Vec<f64> {
    let values: Vec<f64> = face_values(active, v)
        .into_iter()
        .map(|a| if a < cfg.limit_tol { 0.0 } else { a })
        .collect();
    coroot_span_vector(active, v.len(), &values)
}

fn snap_unit(active: FaceIndex, v: &[f64], cfg: &ClassifyConfig) -> Vec<f64> {
    let s = snap(active, v, cfg);
    let len = norm(&s);
    s.into_iter().map(|x| x / len).collect()
}

struct Prepared {
    seq: Vec<Vec<f64>>,
    n: usize,
    roots: Vec<Behavior>,
}

fn prepare(seq: &[ChamberVector], cfg: &ClassifyConfig) -> Result<Prepared> {
    if seq.len() < cfg.window {
        return Err(Error::TooShort {
            len: seq.len(),
            window: cfg.window,
        });
    }
    let n = seq[0].n();
    for v in seq {
        crate::lie::check_dim(n, v.n())?;
    }
    let seq: Vec<Vec<f64>> = seq.iter().map(|v| v.as_slice().to_vec()).collect();
    let roots = analyze_all(&columns(&seq, root_values), cfg);
    Ok(Prepared { seq, n, roots })
}

fn diagnostics(p: &Prepared) -> Vec<Trend> {
    p.roots.iter().map(|b| b.trend).collect()
}

/// Visual-model limit of a direction-converging sequence restricted to `active` roots.
/// `Ok(None)` means the norm stays bounded.
fn directional_limit(
    seq: &[Vec<f64>],
    active: FaceIndex,
    cfg: &ClassifyConfig,
) -> std::result::Result<Vec<f64>, Outcome> {
    let norms: Vec<f64> = seq.iter().map(|v| norm(v)).collect();
    let norm_behavior = analyze(&norms, cfg);
    if norm_behavior.trend != Trend::DivergesToInfinity {
        let comps = analyze_all(&columns(seq, |v| v.to_vec()), cfg);
        return Err(if comps.iter().any(|b| b.persistent) {
            diverged("bounded part keeps oscillating")
        } else {
            inconclusive("norm neither settled nor certifiably divergent")
        });
    }
    let dirs: Vec<Vec<f64>> = seq
        .iter()
        .zip(&norms)
        .map(|(v, r)| v.iter().map(|x| x / r).collect())
        .collect();
    let behaviors = analyze_all(&columns(&dirs, |v| v.to_vec()), cfg);
    if behaviors.iter().all(|b| b.trend.is_cauchy()) {
        Ok(snap_unit(active, dirs.last().expect("non-empty"), cfg))
    } else if behaviors.iter().any(|b| b.persistent) {
        Err(diverged("direction keeps oscillating"))
    } else {
        Err(inconclusive("direction not settled"))
    }
}

fn interior_limit(p: &Prepared, cfg: &ClassifyConfig) -> ChamberPoint {
    let h = snap(FaceIndex::full(p.n - 1), p.seq.last().expect("non-empty"), cfg);
    ChamberPoint::Interior { h }
}

/// Visual model: bounded Cauchy sequences converge inside, escaping ones to their
/// limiting unit direction.
pub fn classify_visual(seq: &[ChamberVector], cfg: &ClassifyConfig) -> Result<ClassifierVerdict> {
    let p = prepare(seq, cfg)?;
    let outcome = if p.roots.iter().all(|b| b.trend.is_cauchy()) {
        Outcome::Converged {
            point: interior_limit(&p, cfg),
        }
    } else {
        match directional_limit(&p.seq, FaceIndex::full(p.n - 1), cfg) {
            Ok(direction) => Outcome::Converged {
                point: ChamberPoint::VisualIdeal { direction },
            },
            Err(outcome) => outcome,
        }
    };
    Ok(ClassifierVerdict {
        model: Model::Visual,
        outcome,
        diagnostics: diagnostics(&p),
    })
}

fn dualcell_outcome(p: &Prepared, cfg: &ClassifyConfig) -> Outcome {
    if let Some(b) = p.roots.iter().find(|b| b.trend == Trend::Oscillates) {
        return if b.persistent || p.roots.iter().any(|b| b.persistent) {
            diverged("a simple root keeps oscillating")
        } else {
            inconclusive("a simple root neither settled nor certifiably divergent")
        };
    }
    let rank = p.n - 1;
    let face = FaceIndex::from_roots((1..=rank).filter(|&i| p.roots[i - 1].trend.is_cauchy()));
    if face == FaceIndex::full(rank) {
        return Outcome::Converged {
            point: interior_limit(p, cfg),
        };
    }
    let values: Vec<f64> = face
        .iter()
        .map(|i| {
            let c = p.roots[i - 1].trend.limit().expect("cauchy root");
            if c < cfg.limit_tol {
                0.0
            } else {
                c
            }
        })
        .collect();
    let offset = coroot_span_vector(face, p.n, &values);
    Outcome::Converged {
        point: ChamberPoint::DualCellIdeal { face, offset },
    }
}

/// Dual-cell model: roots that settle form the face `I` and fix the finite part; all
/// other roots must escape to infinity.
pub fn classify_dualcell(seq: &[ChamberVector], cfg: &ClassifyConfig) -> Result<ClassifierVerdict> {
    let p = prepare(seq, cfg)?;
    let outcome = dualcell_outcome(&p, cfg);
    Ok(ClassifierVerdict {
        model: Model::DualCell,
        outcome,
        diagnostics: diagnostics(&p),
    })
}

fn martin_outcome(p: &Prepared, cfg: &ClassifyConfig) -> Outcome {
    let (face, offset) = match dualcell_outcome(p, cfg) {
        Outcome::Converged {
            point: ChamberPoint::DualCellIdeal { face, offset },
        } => (face, offset),
        other => return other,
    };
    let direction = match directional_limit(&p.seq, FaceIndex::full(p.n - 1), cfg) {
        Ok(d) => d,
        Err(_) => return inconclusive("internal inconsistency: dual-cell part converged but the direction did not"),
    };
    let alphas = root_values(&direction);
    if face.iter().any(|i| alphas[i - 1].abs() > cfg.tol) {
        return inconclusive("internal inconsistency: direction does not vanish on the bounded roots");
    }
    Outcome::Converged {
        point: ChamberPoint::MartinIdeal {
            face,
            offset,
            direction,
        },
    }
}

/// Martin model: the dual-cell data together with the limiting direction.
pub fn classify_martin(seq: &[ChamberVector], cfg: &ClassifyConfig) -> Result<ClassifierVerdict> {
    let p = prepare(seq, cfg)?;
    let outcome = martin_outcome(&p, cfg);
    Ok(ClassifierVerdict {
        model: Model::Martin,
        outcome,
        diagnostics: diagnostics(&p),
    })
}

/// Iterated-directional model: after the Martin level, the sequence is projected onto
/// the coroots of the walls containing the current direction and classified again,
/// until what remains settles.
pub fn classify_iterated(seq: &[ChamberVector], cfg: &ClassifyConfig) -> Result<ClassifierVerdict> {
    let p = prepare(seq, cfg)?;
    let diag = diagnostics(&p);
    let verdict = |outcome| ClassifierVerdict {
        model: Model::Iterated,
        outcome,
        diagnostics: diag.clone(),
    };
    match martin_outcome(&p, cfg) {
        Outcome::Converged {
            point: ChamberPoint::MartinIdeal { .. },
        } => {}
        other => return Ok(verdict(other)),
    }
    let max_depth = cfg.max_depth.unwrap_or(p.n);
    let mut active = FaceIndex::full(p.n - 1);
    let mut residual = p.seq.clone();
    let mut levels = Vec::new();
    loop {
        let roots = analyze_all(&columns(&residual, |v| face_values(active, v)), cfg);
        if roots.iter().all(|b| b.trend.is_cauchy()) {
            let tail = snap(active, residual.last().expect("non-empty"), cfg);
            return Ok(verdict(Outcome::Converged {
                point: ChamberPoint::IteratedIdeal { levels, tail },
            }));
        }
        if levels.len() >= max_depth {
            return Err(Error::MaxDepthExceeded(max_depth));
        }
        if roots.iter().any(|b| b.trend == Trend::Oscillates) {
            return Ok(verdict(inconclusive(format!(
                "level {} has roots that neither settle nor escape",
                levels.len() + 1
            ))));
        }
        let direction = match directional_limit(&residual, active, cfg) {
            Ok(d) => d,
            Err(outcome) => return Ok(verdict(outcome)),
        };
        let bounded = FaceIndex::from_roots(
            active
                .iter()
                .zip(&roots)
                .filter(|(_, b)| b.trend.is_cauchy())
                .map(|(i, _)| i),
        );
        let next = zero_roots(active, &direction, cfg.tol);
        residual = residual
            .iter()
            .map(|v| {
                let along: f64 = v.iter().zip(&direction).map(|(a, b)| a * b).sum();
                let rest: Vec<f64> = v.iter().zip(&direction).map(|(a, b)| a - along * b).collect();
                project_to_coroots(next, &rest)
            })
            .collect();
        levels.push(IteratedLevel { bounded, direction });
        active = next;
    }
}

/// Dispatches to the classifier of `model`.
pub fn classify(model: Model, seq: &[ChamberVector], cfg: &ClassifyConfig) -> Result<ClassifierVerdict> {
    match model {
        Model::Visual => classify_visual(seq, cfg),
        Model::DualCell => classify_dualcell(seq, cfg),
        Model::Martin => classify_martin(seq, cfg),
        Model::Iterated => classify_iterated(seq, cfg),
    }
}

/// Geometric time grid `start · ratio^j`, `j = 0..len`.
pub fn geometric_grid(start: f64, ratio: f64, len: usize) -> Vec<f64> {
    (0..len).map(|j| start * ratio.powi(j as i32)).collect()
}

/// The grid used by witness sequences and generators: `1.25^j` for `j < 100`
/// (reaching about `4·10⁹`).
pub fn default_grid() -> Vec<f64> {
    geometric_grid(1.0, 1.25, 100)
}

/// A sequence inside the face `C_face` converging to `p` in its model, built from
/// prescribed root values. Requires `face ⊆ maxface(p)`.
///
/// Iterated points use growth `t^(2^-ℓ)` at level `ℓ`, so chains deeper than two
/// levels need grids (or divergence thresholds) beyond the defaults.
pub fn witness_sequence(p: &ChamberPoint, face: FaceIndex, grid: &[f64], tol: f64) -> Result<Vec<ChamberVector>> {
    let n = p.n();
    let rank = n - 1;
    face.check_rank(rank)?;
    let top = maxface(p, tol);
    if !face.is_subset_of(top) {
        return Err(Error::Invalid(format!("face {face} is not contained in maxface {top}")));
    }
    let zero = |v: f64| v.abs() <= tol;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        let alphas: Vec<f64> = match p {
            ChamberPoint::Interior { h } => root_values(h)
                .into_iter()
                .enumerate()
                .map(|(j, a)| {
                    if zero(a) && !face.contains(j + 1) {
                        t.sqrt().recip()
                    } else {
                        a.max(0.0)
                    }
                })
                .collect(),
            ChamberPoint::VisualIdeal { direction } => root_values(direction)
                .into_iter()
                .enumerate()
                .map(|(j, a)| t * a.max(0.0) + if face.contains(j + 1) { 0.0 } else { 1.0 })
                .collect(),
            ChamberPoint::DualCellIdeal { face: bounded, offset } => {
                let a = root_values(offset);
                (1..=rank)
                    .map(|i| {
                        if !bounded.contains(i) {
                            t
                        } else if zero(a[i - 1]) && !face.contains(i) {
                            t.sqrt().recip()
                        } else {
                            a[i - 1].max(0.0)
                        }
                    })
                    .collect()
            }
            ChamberPoint::MartinIdeal {
                face: bounded,
                offset,
                direction,
            } => {
                let a = root_values(offset);
                let l = root_values(direction);
                (1..=rank)
                    .map(|i| {
                        if !bounded.contains(i) {
                            t * l[i - 1].max(0.0) + t.sqrt()
                        } else if zero(a[i - 1]) && !face.contains(i) {
                            t.sqrt().recip()
                        } else {
                            a[i - 1].max(0.0)
                        }
                    })
                    .collect()
            }
            ChamberPoint::IteratedIdeal { levels, tail } => {
                let mut v = tail.clone();
                for (depth, level) in levels.iter().enumerate() {
                    let scale = t.powf(0.5f64.powi(depth as i32));
                    v.iter_mut().zip(&level.direction).for_each(|(x, d)| *x += scale * d);
                }
                let bounded = levels[0].bounded;
                let ta = root_values(tail);
                let eps: Vec<f64> = bounded
                    .iter()
                    .map(|i| {
                        if zero(ta[i - 1]) && !face.contains(i) {
                            t.sqrt().recip()
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let bump = coroot_span_vector(bounded, n, &eps);
                v.iter_mut().zip(&bump).for_each(|(x, b)| *x += b);
                let mut a = root_values(&v);
                for i in face.iter() {
                    a[i - 1] = 0.0;
                }
                if a.iter().any(|x| *x < 0.0) {
                    continue;
                }
                a
            }
        };
        out.push(ChamberVector::from_root_values(&alphas)?);
    }
    Ok(out)
}

/// Random face strictly smaller than `Δ`.
fn random_proper_face<R: rand::Rng + ?Sized>(rank: usize, rng: &mut R) -> FaceIndex {
    loop {
        let f = crate::sample::random_face(rank, rng);
        if f.len() < rank {
            return f;
        }
    }
}

/// Values on `face`, each zero with probability 1/3, otherwise in `[0.2, 2)`.
fn random_finite_part<R: rand::Rng + ?Sized>(face: FaceIndex, n: usize, rng: &mut R) -> Vec<f64> {
    let values: Vec<f64> = face
        .iter()
        .map(|_| {
            if rng.random_range(0..3) == 0 {
                0.0
            } else {
                rng.random_range(0.2..2.0)
            }
        })
        .collect();
    coroot_span_vector(face, n, &values)
}

/// A random ideal point of `model` (iterated points have one or two levels).
pub fn random_ideal_point<R: rand::Rng + ?Sized>(model: Model, n: usize, rng: &mut R) -> ChamberPoint {
    use crate::sample::random_unit_direction;
    let rank = n - 1;
    match model {
        Model::Visual => ChamberPoint::VisualIdeal {
            direction: random_unit_direction(random_proper_face(rank, rng), n, rng),
        },
        Model::DualCell => {
            let face = random_proper_face(rank, rng);
            ChamberPoint::DualCellIdeal {
                face,
                offset: random_finite_part(face, n, rng),
            }
        }
        Model::Martin => {
            let face = random_proper_face(rank, rng);
            let zero = loop {
                let z = face.union(crate::sample::random_face(rank, rng));
                if z.len() < rank {
                    break z;
                }
            };
            ChamberPoint::MartinIdeal {
                face,
                offset: random_finite_part(face, n, rng),
                direction: random_unit_direction(zero, n, rng),
            }
        }
        Model::Iterated => {
            let ChamberPoint::MartinIdeal {
                face,
                offset,
                direction,
            } = random_ideal_point(Model::Martin, n, rng)
            else {
                unreachable!()
            };
            let zero = zero_roots(FaceIndex::full(rank), &direction, 1e-12);
            let mut levels = vec![IteratedLevel {
                bounded: face,
                direction,
            }];
            let extra = zero.difference(face);
            if !extra.is_empty() && rng.random_bool(0.5) {
                let values: Vec<f64> = zero
                    .iter()
                    .map(|i| {
                        if extra.contains(i) {
                            rng.random_range(0.2..1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let v = coroot_span_vector(zero, n, &values);
                let len = norm(&v);
                levels.push(IteratedLevel {
                    bounded: face,
                    direction: v.into_iter().map(|x| x / len).collect(),
                });
            }
            ChamberPoint::IteratedIdeal { levels, tail: offset }
        }
    }
}

/// A face/point combination on which the stratification test failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratificationFailure {
    pub point: ChamberPoint,
    pub face: FaceIndex,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratificationReport {
    pub model: Model,
    pub n: usize,
    pub points: usize,
    /// Faces `J ⊆ maxface(p)`: a sequence in `C_J` was built and converged to `p`.
    pub reachable_tested: usize,
    pub reachable_passed: usize,
    /// Faces `J ⊄ maxface(p)`: no witness exists, and the nearest sequence in `C_J` has a different limit.
    pub unreachable_tested: usize,
    pub unreachable_passed: usize,
    /// Every classified limit of a sequence in `C_J` has maximal face containing `J`.
    pub closure_tested: usize,
    pub closure_passed: usize,
    pub failures: Vec<StratificationFailure>,
}

impl StratificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
            && self.reachable_passed == self.reachable_tested
            && self.unreachable_passed == self.unreachable_tested
            && self.closure_passed == self.closure_tested
    }
}

/// Exact face membership by root values: zero on `face`, positive elsewhere.
fn lies_in_face(h: &ChamberVector, face: FaceIndex) -> bool {
    root_values(h.as_slice())
        .iter()
        .enumerate()
        .all(|(j, a)| if face.contains(j + 1) { *a == 0.0 } else { *a > 0.0 })
}

/// Checks "a sequence in `C_J` converges to `p` iff `J ⊆ maxface(p)`" on random ideal
/// points, together with the closure identity `c̄_J = ∪_{I ⊇ J} c_I` on classified limits.
/// Point `j` is drawn from stream `j` of `seed`.
pub fn stratification_check(
    model: Model,
    n: usize,
    points: usize,
    cfg: &ClassifyConfig,
    seed: u64,
) -> Result<StratificationReport> {
    use rayon::prelude::*;
    let rank = n
        .checked_sub(1)
        .filter(|r| *r >= 1)
        .ok_or_else(|| Error::Invalid(format!("dimension {n} too small")))?;
    let grid = default_grid();
    let per_point: Vec<Result<(StratificationReport, Vec<StratificationFailure>)>> = (0..points)
        .into_par_iter()
        .map(|j| {
            let mut rng = crate::sample::rng_for(seed, j as u64);
            let p = random_ideal_point(model, n, &mut rng);
            let top = maxface_with(&p, cfg.tol, cfg.maxface_rule);
            let mut r = StratificationReport {
                model,
                n,
                points: 1,
                reachable_tested: 0,
                reachable_passed: 0,
                unreachable_tested: 0,
                unreachable_passed: 0,
                closure_tested: 0,
                closure_passed: 0,
                failures: Vec::new(),
            };
            let mut failures = Vec::new();
            let mut fail = |face: FaceIndex, reason: String| {
                failures.push(StratificationFailure {
                    point: p.clone(),
                    face,
                    reason,
                })
            };
            for face in FaceIndex::all_subsets(rank) {
                let (seq, reachable) = if face.is_subset_of(top) {
                    r.reachable_tested += 1;
                    (witness_sequence(&p, face, &grid, cfg.tol)?, true)
                } else {
                    r.unreachable_tested += 1;
                    if witness_sequence(&p, face, &grid, cfg.tol).is_ok() {
                        fail(face, "witness built outside maxface".into());
                        continue;
                    }
                    // push the closest witness onto C_J
                    let near = witness_sequence(&p, face.intersection(top), &grid, cfg.tol)?;
                    let seq = near
                        .iter()
                        .map(|h| {
                            let mut a = h.root_values();
                            face.iter().for_each(|i| a[i - 1] = 0.0);
                            ChamberVector::from_root_values(&a)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    (seq, false)
                };
                if let Some(bad) = seq.iter().position(|h| !lies_in_face(h, face)) {
                    fail(face, format!("term {bad} leaves the face"));
                    continue;
                }
                let verdict = classify(model, &seq, cfg)?;
                let Some(q) = verdict.point() else {
                    fail(face, format!("sequence did not converge: {:?}", verdict.outcome));
                    continue;
                };
                let same = points_equal(q, &p, cfg.limit_tol)?;
                if reachable == same {
                    if reachable {
                        r.reachable_passed += 1;
                    } else {
                        r.unreachable_passed += 1;
                    }
                } else {
                    fail(face, format!("limit agreement {same} but reachable {reachable}"));
                }
                r.closure_tested += 1;
                let q_top = maxface_with(q, cfg.tol, cfg.maxface_rule);
                if face.is_subset_of(q_top) {
                    r.closure_passed += 1;
                } else {
                    fail(face, format!("limit has maxface {q_top}"));
                }
            }
            Ok((r, failures))
        })
        .collect();
    let mut total = StratificationReport {
        model,
        n,
        points,
        reachable_tested: 0,
        reachable_passed: 0,
        unreachable_tested: 0,
        unreachable_passed: 0,
        closure_tested: 0,
        closure_passed: 0,
        failures: Vec::new(),
    };
    for item in per_point {
        let (r, failures) = item?;
        total.reachable_tested += r.reachable_tested;
        total.reachable_passed += r.reachable_passed;
        total.unreachable_tested += r.unreachable_tested;
        total.unreachable_passed += r.unreachable_passed;
        total.closure_tested += r.closure_tested;
        total.closure_passed += r.closure_passed;
        total.failures.extend(failures);
    }
    Ok(total)
}
