//! Seeded random generators for group elements, chamber vectors and points.
//!
//! All harnesses derive their generators from one top-level seed: task `i` uses the
//! ChaCha8 stream `i` of that seed (see [`rng_for`]), so results do not depend on the
//! order in which tasks are scheduled.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::lie::{face_partition, from_root_values, ChamberVector, FaceIndex, Rotation, SpdPoint};

pub type SeededRng = ChaCha8Rng;

/// Generator for task number `stream` under the top-level `seed`.
pub fn rng_for(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Haar-distributed element of `O(n)` (QR of a Gaussian matrix with sign correction).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Haar-distributed element of `SO(n)`.
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Rotation {
    let mut q = random_orthogonal(n, rng);
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Rotation::new_unchecked(q)
}

/// Random element of `Stab(face)`: independent orthogonal blocks, determinant fixed to +1.
pub fn random_stab_element<R: Rng + ?Sized>(face: FaceIndex, n: usize, rng: &mut R) -> Rotation {
    let mut m = DMatrix::zeros(n, n);
    for block in face_partition(face, n).blocks {
        let q = random_orthogonal(block.len(), rng);
        m.view_mut((block.start, block.start), (block.len(), block.len()))
            .copy_from(&q);
    }
    if m.determinant() < 0.0 {
        m.column_mut(0).neg_mut();
    }
    Rotation::new_unchecked(m)
}

/// Root values vanishing exactly on `face`, the others uniform in `[scale/10, scale]`.
pub fn random_root_values<R: Rng + ?Sized>(face: FaceIndex, rank: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    (1..=rank)
        .map(|i| {
            if face.contains(i) {
                0.0
            } else {
                scale * rng.random_range(0.1..1.0)
            }
        })
        .collect()
}

/// Random point of the face `c_face`.
pub fn random_on_face<R: Rng + ?Sized>(face: FaceIndex, n: usize, scale: f64, rng: &mut R) -> ChamberVector {
    ChamberVector::new_unchecked(from_root_values(&random_root_values(face, n - 1, scale, rng)))
}

/// A face chosen uniformly among all subsets of the simple roots.
pub fn random_face<R: Rng + ?Sized>(rank: usize, rng: &mut R) -> FaceIndex {
    FaceIndex::from_bits(rng.random_range(0..1u64 << rank))
}

/// Random regular chamber vector with root values uniform in `[0, scale]`.
pub fn random_chamber_vector<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> ChamberVector {
    let alphas: Vec<f64> = (0..n - 1).map(|_| scale * rng.random::<f64>()).collect();
    ChamberVector::new_unchecked(from_root_values(&alphas))
}

/// `k · exp(2H) · kᵀ` with Haar `k` and `H` from [`random_chamber_vector`].
pub fn random_spd<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> SpdPoint {
    let k = random_rotation(n, rng);
    let h = random_chamber_vector(n, scale, rng);
    SpdPoint::from_cartan(&k, &h)
}

/// Random `g ∈ SL(n,R)` as `k₁ · exp(D) · k₂` with trace-zero `D`, entries in `[-scale, scale]`.
pub fn random_sl<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let mut d: Vec<f64> = (0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    d.iter_mut().for_each(|v| *v -= mean);
    let k1 = random_rotation(n, rng);
    let k2 = random_rotation(n, rng);
    let e = DMatrix::from_diagonal(&DVector::from_iterator(n, d.iter().map(|v| v.exp())));
    k1.matrix() * e * k2.matrix()
}

/// Random unit vector in `span{e_i - e_{i+1} : i ∈ face}` ∩ closed chamber of those roots,
/// with the roots in `zero` forced to vanish.
pub fn random_unit_direction<R: Rng + ?Sized>(zero: FaceIndex, n: usize, rng: &mut R) -> Vec<f64> {
    assert!(zero.len() < n - 1, "direction needs at least one nonzero root");
    let v = random_on_face(zero, n, 1.0, rng).into_vec();
    let norm = crate::lie::norm(&v);
    v.into_iter().map(|x| x / norm).collect()
}
