//! Sequences built from prescribed root-value profiles, with exact limits in every
//! chamber model known by construction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chamber::{ChamberPoint, IteratedLevel, Model};
use crate::error::{Error, Result};
use crate::fundamental::FundamentalDecomposition;
use crate::lie::{coroot_span_vector, from_root_values, norm, ChamberVector, FaceIndex, Rotation};
use crate::quotient::QuotientPoint;
use crate::sample::{random_face, random_rotation, random_stab_element, rng_for};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Linear,
    Sqrt,
    Log,
    Const,
    Inverse,
}

impl Growth {
    /// Order of growth; bounded profiles have order 0.
    pub fn order(self) -> u8 {
        match self {
            Growth::Linear => 3,
            Growth::Sqrt => 2,
            Growth::Log => 1,
            Growth::Const | Growth::Inverse => 0,
        }
    }
}

/// `α(t) = coeff · f(t) + offset` with `f ∈ {t, √t, ln(1+t), 1, 1/t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootProfile {
    pub growth: Growth,
    pub coeff: f64,
    #[serde(default)]
    pub offset: f64,
}

impl RootProfile {
    pub fn new(growth: Growth, coeff: f64) -> Self {
        RootProfile {
            growth,
            coeff,
            offset: 0.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let f = match self.growth {
            Growth::Linear => t,
            Growth::Sqrt => t.sqrt(),
            Growth::Log => t.ln_1p(),
            Growth::Const => 1.0,
            Growth::Inverse => 1.0 / t,
        };
        self.coeff * f + self.offset
    }

    pub fn is_bounded(&self) -> bool {
        self.growth.order() == 0
    }

    /// Limit of a bounded profile.
    pub fn limit(&self) -> Option<f64> {
        match self.growth {
            Growth::Const => Some(self.coeff + self.offset),
            Growth::Inverse => Some(self.offset),
            _ => None,
        }
    }
}

/// How the rotation part evolves.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KPath {
    #[default]
    Identity,
    Constant {
        k: Rotation,
    },
    /// `k(t) = limit · R_plane(speed / t)`; `plane` holds 1-based coordinate indices.
    Converging {
        limit: Rotation,
        plane: [usize; 2],
        speed: f64,
    },
    /// `even` on even term indices, `odd` on odd ones.
    Alternating {
        even: Rotation,
        odd: Rotation,
    },
}

impl KPath {
    fn at(&self, n: usize, index: usize, t: f64) -> Rotation {
        match self {
            KPath::Identity => Rotation::identity(n),
            KPath::Constant { k } => k.clone(),
            KPath::Converging { limit, plane, speed } => {
                limit.compose(&Rotation::plane(n, plane[0] - 1, plane[1] - 1, speed / t))
            }
            KPath::Alternating { even, odd } => {
                if index.is_multiple_of(2) {
                    even.clone()
                } else {
                    odd.clone()
                }
            }
        }
    }

    /// Limit of the path; `None` when it alternates between distinct rotations.
    pub fn limit(&self, n: usize) -> Option<Rotation> {
        match self {
            KPath::Identity => Some(Rotation::identity(n)),
            KPath::Constant { k } => Some(k.clone()),
            KPath::Converging { limit, .. } => Some(limit.clone()),
            KPath::Alternating { even, odd } => (even.distance(odd) == 0.0).then(|| even.clone()),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        let dims: Vec<usize> = match self {
            KPath::Identity => vec![],
            KPath::Constant { k } => vec![k.n()],
            KPath::Converging { limit, plane, .. } => {
                if plane[0] == plane[1] || plane.iter().any(|&i| i == 0 || i > n) {
                    return Err(Error::Invalid(format!("bad rotation plane {plane:?} for n = {n}")));
                }
                vec![limit.n()]
            }
            KPath::Alternating { even, odd } => vec![even.n(), odd.n()],
        };
        dims.into_iter().try_for_each(|d| crate::lie::check_dim(n, d))
    }
}

/// A full sequence description: one profile per simple root plus a rotation path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceProfile {
    pub roots: Vec<RootProfile>,
    #[serde(default)]
    pub k_path: KPath,
}

impl SequenceProfile {
    pub fn new(roots: Vec<RootProfile>, k_path: KPath) -> Result<Self> {
        let p = SequenceProfile { roots, k_path };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.roots.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.roots.is_empty() || self.n() > crate::lie::MAX_DIM {
            return Err(Error::Invalid("profile needs between 1 and 63 roots".into()));
        }
        for (i, r) in self.roots.iter().enumerate() {
            let ok = r.coeff.is_finite()
                && r.offset.is_finite()
                && r.offset >= 0.0
                && match r.growth {
                    Growth::Const => r.coeff + r.offset >= 0.0,
                    _ => r.coeff > 0.0,
                };
            if !ok {
                return Err(Error::Invalid(format!(
                    "root {} profile must stay nonnegative: {r:?}",
                    i + 1
                )));
            }
        }
        self.k_path.check(self.n())
    }

    pub fn root_values(&self, t: f64) -> Vec<f64> {
        self.roots.iter().map(|r| r.value(t)).collect()
    }

    pub fn chamber_sequence(&self, grid: &[f64]) -> Vec<ChamberVector> {
        grid.iter()
            .map(|&t| ChamberVector::new_unchecked(from_root_values(&self.root_values(t))))
            .collect()
    }

    pub fn decomposition(&self, grid: &[f64]) -> FundamentalDecomposition {
        let n = self.n();
        FundamentalDecomposition {
            k_seq: grid.iter().enumerate().map(|(j, &t)| self.k_path.at(n, j, t)).collect(),
            h_seq: self.chamber_sequence(grid),
        }
    }

    fn bounded(&self) -> FaceIndex {
        FaceIndex::from_roots((1..=self.roots.len()).filter(|&i| self.roots[i - 1].is_bounded()))
    }

    fn limits_on(&self, face: FaceIndex) -> Vec<f64> {
        face.iter()
            .map(|i| self.roots[i - 1].limit().expect("bounded root"))
            .collect()
    }

    /// Unit vector in the coroot span of `active` whose root values are the leading
    /// coefficients of the fastest-growing roots among `active`.
    fn leading_direction(&self, active: FaceIndex) -> Option<(u8, Vec<f64>)> {
        let top = active.iter().map(|i| self.roots[i - 1].growth.order()).max()?;
        if top == 0 {
            return None;
        }
        let values: Vec<f64> = active
            .iter()
            .map(|i| {
                let r = &self.roots[i - 1];
                if r.growth.order() == top {
                    r.coeff
                } else {
                    0.0
                }
            })
            .collect();
        let v = coroot_span_vector(active, self.n(), &values);
        let len = norm(&v);
        Some((top, v.into_iter().map(|x| x / len).collect()))
    }

    /// The limit of the chamber part in `model`, by construction.
    pub fn exact_limit(&self, model: Model) -> ChamberPoint {
        let n = self.n();
        let rank = n - 1;
        let full = FaceIndex::full(rank);
        let bounded = self.bounded();
        if bounded == full {
            return ChamberPoint::Interior {
                h: coroot_span_vector(full, n, &self.limits_on(full)),
            };
        }
        let offset = coroot_span_vector(bounded, n, &self.limits_on(bounded));
        let (_, direction) = self.leading_direction(full).expect("unbounded root");
        match model {
            Model::Visual => ChamberPoint::VisualIdeal { direction },
            Model::DualCell => ChamberPoint::DualCellIdeal { face: bounded, offset },
            Model::Martin => ChamberPoint::MartinIdeal {
                face: bounded,
                offset,
                direction,
            },
            Model::Iterated => {
                let mut active = full;
                let mut levels = Vec::new();
                while let Some((top, direction)) = self.leading_direction(active) {
                    active = FaceIndex::from_roots(active.iter().filter(|&i| self.roots[i - 1].growth.order() < top));
                    levels.push(IteratedLevel { bounded, direction });
                }
                ChamberPoint::IteratedIdeal { levels, tail: offset }
            }
        }
    }

    pub fn exact_quotient_limit(&self, model: Model) -> Option<QuotientPoint> {
        let k = self.k_path.limit(self.n())?;
        Some(QuotientPoint {
            k,
            x: self.exact_limit(model),
            model,
        })
    }
}

const GROWTHS: [Growth; 6] = [
    Growth::Linear,
    Growth::Linear,
    Growth::Linear,
    Growth::Sqrt,
    Growth::Const,
    Growth::Inverse,
];

fn random_root<R: Rng + ?Sized>(rng: &mut R) -> RootProfile {
    let growth = GROWTHS[rng.random_range(0..GROWTHS.len())];
    let coeff = rng.random_range(1..=3) as f64;
    let offset = if growth == Growth::Inverse {
        rng.random_range(0..=2) as f64
    } else {
        0.0
    };
    RootProfile { growth, coeff, offset }
}

fn random_profile<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SequenceProfile {
    let mut roots: Vec<RootProfile> = (0..n - 1).map(|_| random_root(rng)).collect();
    if roots.iter().all(RootProfile::is_bounded) && rng.random_bool(0.8) {
        let i = rng.random_range(0..roots.len());
        roots[i] = RootProfile::new(Growth::Linear, rng.random_range(1..=3) as f64);
    }
    let limit = random_rotation(n, rng);
    let i = rng.random_range(1..n);
    let k_path = KPath::Converging {
        limit,
        plane: [i, i + 1],
        speed: 1.0,
    };
    SequenceProfile { roots, k_path }
}

fn mutate_roots<R: Rng + ?Sized>(base: &SequenceProfile, rng: &mut R) -> Vec<RootProfile> {
    let mut roots = base.roots.clone();
    let i = rng.random_range(0..roots.len());
    match rng.random_range(0..5) {
        0 => {}
        1 => roots[i].coeff = (roots[i].coeff as i64 % 3 + 1) as f64,
        2 => roots[i] = random_root(rng),
        3 => {
            // moves a bounded limit, or only the transient of an unbounded root
            roots[i].offset += 1.0;
        }
        _ => roots
            .iter_mut()
            .filter(|r| r.growth == Growth::Linear)
            .for_each(|r| r.coeff *= 2.0),
    }
    roots
}

/// Pairs of fundamental sequence profiles for refinement experiments. Pair `j` uses
/// stream `j` of `seed`; the second member perturbs the first's roots and rotation so
/// that both equal and distinct limits occur in every model.
pub fn generate_pairs(n: usize, count: usize, seed: u64) -> Vec<(SequenceProfile, SequenceProfile)> {
    (0..count)
        .map(|j| {
            let mut rng = rng_for(seed, j as u64);
            let a = random_profile(n, &mut rng);
            let roots = mutate_roots(&a, &mut rng);
            let KPath::Converging { limit, .. } = &a.k_path else {
                unreachable!()
            };
            let k_limit = match rng.random_range(0..4) {
                0 | 1 => limit.clone(),
                2 => limit.compose(&random_stab_element(random_face(n - 1, &mut rng), n, &mut rng)),
                _ => random_rotation(n, &mut rng),
            };
            let i = rng.random_range(1..n);
            let b = SequenceProfile {
                roots,
                k_path: KPath::Converging {
                    limit: k_limit,
                    plane: [i, i + 1],
                    speed: 2.0,
                },
            };
            (a, b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chamber::{classify, default_grid, points_equal};
    use crate::config::ClassifyConfig;

    fn s6() -> f64 {
        6f64.sqrt()
    }

    #[test]
    fn exact_limits_of_two_scale_profile() {
        let p = SequenceProfile::new(
            vec![
                RootProfile::new(Growth::Linear, 1.0),
                RootProfile::new(Growth::Sqrt, 1.0),
            ],
            KPath::Identity,
        )
        .unwrap();
        let l1 = vec![2.0 / s6(), -1.0 / s6(), -1.0 / s6()];
        assert!(points_equal(
            &p.exact_limit(Model::Visual),
            &ChamberPoint::VisualIdeal { direction: l1.clone() },
            1e-12
        )
        .unwrap());
        assert!(points_equal(
            &p.exact_limit(Model::DualCell),
            &ChamberPoint::DualCellIdeal {
                face: FaceIndex::empty(),
                offset: vec![0.0; 3]
            },
            1e-12
        )
        .unwrap());
        match p.exact_limit(Model::Iterated) {
            ChamberPoint::IteratedIdeal { levels, .. } => {
                assert_eq!(levels.len(), 2);
                let r = 2f64.sqrt();
                assert!(levels[1]
                    .direction
                    .iter()
                    .zip([0.0, 1.0 / r, -1.0 / r])
                    .all(|(a, b)| (a - b).abs() < 1e-12));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation() {
        assert!(SequenceProfile::new(vec![RootProfile::new(Growth::Linear, -1.0)], KPath::Identity).is_err());
        let bad_plane = KPath::Converging {
            limit: Rotation::identity(3),
            plane: [1, 4],
            speed: 1.0,
        };
        assert!(SequenceProfile::new(vec![RootProfile::new(Growth::Const, 1.0); 2], bad_plane).is_err());
        let json = r#"{"roots":[{"growth":"linear","coeff":1},{"growth":"const","coeff":2}]}"#;
        let p: SequenceProfile = serde_json::from_str(json).unwrap();
        assert_eq!(p.k_path, KPath::Identity);
        assert_eq!(p.n(), 3);
    }

    #[test]
    fn classifiers_recover_exact_labels() {
        let cfg = ClassifyConfig::default();
        let grid = default_grid();
        for (a, b) in generate_pairs(4, 60, 17) {
            for p in [a, b] {
                let seq = p.chamber_sequence(&grid);
                for model in crate::chamber::Model::ALL {
                    let got = classify(model, &seq, &cfg).unwrap();
                    let want = p.exact_limit(model);
                    let point = got.point().unwrap_or_else(|| panic!("{p:?} {model}: {got:?}"));
                    assert!(
                        points_equal(point, &want, 1e-3).unwrap(),
                        "{p:?} {model}: {point:?} vs {want:?}"
                    );
                }
            }
        }
    }
}
