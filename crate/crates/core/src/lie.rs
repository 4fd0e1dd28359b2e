//! The Lie-theoretic setting for `G = SL(n,R)`, `K = SO(n)`.
//!
//! A point of `X = G/K` is stored as the symmetric positive-definite matrix
//! `P = g gᵀ`, so the coset ambiguity in `g` disappears. The Cartan subalgebra
//! `a` is the space of trace-zero diagonal matrices, identified with trace-zero
//! vectors. The closed Weyl chamber is the cone of weakly *decreasing*
//! trace-zero vectors, on which every simple root `α_i(H) = h_i - h_{i+1}` is
//! non-negative.

use std::fmt;
use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Default relative tolerance for invariant checks and face detection.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Largest supported matrix dimension; face sets are stored as a bitmask.
pub const MAX_DIM: usize = 64;

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    matrix: Vec<Vec<f64>>,
}

pub(crate) fn matrix_from_rows(n: usize, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rows.len(),
        });
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// A point of `SL(n,R)/SO(n)`: a symmetric positive-definite matrix of determinant one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct SpdPoint {
    mat: DMatrix<f64>,
}

impl TryFrom<MatrixRepr> for SpdPoint {
    type Error = Error;
    fn try_from(repr: MatrixRepr) -> Result<Self> {
        SpdPoint::new(matrix_from_rows(repr.n, &repr.matrix)?, DEFAULT_TOL)
    }
}

impl From<SpdPoint> for MatrixRepr {
    fn from(p: SpdPoint) -> Self {
        MatrixRepr {
            n: p.n(),
            matrix: matrix_rows(&p.mat),
        }
    }
}

impl SpdPoint {
    /// Validates symmetry, positivity and unit determinant (relative to `tol`).
    ///
    /// The stored matrix is the symmetrized input.
    pub fn new(mat: DMatrix<f64>, tol: f64) -> Result<Self> {
        let (rows, cols) = mat.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if !(2..=MAX_DIM).contains(&rows) {
            return Err(Error::Invalid(format!("dimension {rows} outside 2..={MAX_DIM}")));
        }
        let scale = 1.0 + max_abs(&mat);
        let asym = max_abs(&(&mat - mat.transpose()));
        if asym > tol * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let min = eig.eigenvalues.min();
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite(min));
        }
        let logs: Vec<f64> = eig.eigenvalues.iter().map(|l| l.ln()).collect();
        let logdet: f64 = logs.iter().sum();
        let spread: f64 = logs.iter().map(|l| l.abs()).sum();
        if logdet.abs() > tol * (1.0 + spread) {
            return Err(Error::DetNotOne(logdet));
        }
        Ok(SpdPoint { mat: sym })
    }

    /// The base point `o`.
    pub fn identity(n: usize) -> Self {
        SpdPoint {
            mat: DMatrix::identity(n, n),
        }
    }

    /// `k · exp(2H) · kᵀ`, the point with Cartan data `(k, H)`.
    pub fn from_cartan(k: &Rotation, h: &ChamberVector) -> Self {
        Self::from_frame(k.matrix(), h.as_slice())
    }

    /// `k · exp(2h) · kᵀ` for an arbitrary diagonal exponent `h` (not necessarily ordered).
    pub(crate) fn from_frame(k: &DMatrix<f64>, h: &[f64]) -> Self {
        let d = DVector::from_iterator(h.len(), h.iter().map(|v| (2.0 * v).exp()));
        let m = k * DMatrix::from_diagonal(&d) * k.transpose();
        SpdPoint {
            mat: (&m + m.transpose()) * 0.5,
        }
    }

    /// The action `P ↦ g P gᵀ` of `g ∈ SL(n,R)`. `g` is not checked for unit determinant.
    pub fn transform(&self, g: &DMatrix<f64>) -> Result<Self> {
        check_dim(self.n(), g.nrows())?;
        let m = g * &self.mat * g.transpose();
        Ok(SpdPoint {
            mat: (&m + m.transpose()) * 0.5,
        })
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

/// An element of the closed Weyl chamber: weakly decreasing, summing to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorRepr", into = "VectorRepr")]
pub struct ChamberVector {
    h: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    n: usize,
    h: Vec<f64>,
}

impl TryFrom<VectorRepr> for ChamberVector {
    type Error = Error;
    fn try_from(repr: VectorRepr) -> Result<Self> {
        check_dim(repr.n, repr.h.len())?;
        ChamberVector::new(repr.h, DEFAULT_TOL)
    }
}

impl From<ChamberVector> for VectorRepr {
    fn from(v: ChamberVector) -> Self {
        VectorRepr { n: v.n(), h: v.h }
    }
}

impl ChamberVector {
    pub fn new(h: Vec<f64>, tol: f64) -> Result<Self> {
        if h.len() < 2 || h.len() > MAX_DIM {
            return Err(Error::NotInChamber(format!("length {} outside 2..={MAX_DIM}", h.len())));
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotInChamber("non-finite entry".into()));
        }
        let scale = 1.0 + norm(&h);
        let sum: f64 = h.iter().sum();
        if sum.abs() > tol * scale {
            return Err(Error::NotInChamber(format!("entries sum to {sum:e}")));
        }
        if let Some(i) = (0..h.len() - 1).find(|&i| h[i] - h[i + 1] < -tol * scale) {
            return Err(Error::NotInChamber(format!(
                "entries {} and {} are increasing",
                i + 1,
                i + 2
            )));
        }
        Ok(ChamberVector { h })
    }

    pub(crate) fn new_unchecked(h: Vec<f64>) -> Self {
        ChamberVector { h }
    }

    pub fn zero(n: usize) -> Self {
        ChamberVector { h: vec![0.0; n] }
    }

    /// The chamber vector with prescribed simple-root values (all must be non-negative).
    pub fn from_root_values(alphas: &[f64]) -> Result<Self> {
        if let Some(a) = alphas.iter().find(|a| !(**a >= 0.0)) {
            return Err(Error::NotInChamber(format!("negative root value {a}")));
        }
        Ok(ChamberVector {
            h: from_root_values(alphas),
        })
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.h
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.h
    }

    pub fn norm(&self) -> f64 {
        norm(&self.h)
    }

    pub fn root_values(&self) -> Vec<f64> {
        root_values(&self.h)
    }
}

/// A subset of the simple roots, indexed `1..=n-1` (root `i` is `L_i - L_{i+1}`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FaceIndex(u64);

impl TryFrom<Vec<usize>> for FaceIndex {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        let mut face = FaceIndex::empty();
        for i in v {
            if i == 0 || i >= MAX_DIM {
                return Err(Error::FaceOutOfRange {
                    index: i,
                    rank: MAX_DIM - 1,
                });
            }
            face.insert(i);
        }
        Ok(face)
    }
}

impl From<FaceIndex> for Vec<usize> {
    fn from(f: FaceIndex) -> Self {
        f.iter().collect()
    }
}

impl FaceIndex {
    pub const fn empty() -> Self {
        FaceIndex(0)
    }

    /// All simple roots `Δ` of a rank-`rank` root system.
    pub fn full(rank: usize) -> Self {
        assert!(rank < MAX_DIM);
        FaceIndex(if rank == 0 { 0 } else { u64::MAX >> (64 - rank) })
    }

    pub fn from_roots<I: IntoIterator<Item = usize>>(roots: I) -> Self {
        let mut face = FaceIndex::empty();
        for i in roots {
            face.insert(i);
        }
        face
    }

    pub fn from_bits(bits: u64) -> Self {
        FaceIndex(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn insert(&mut self, i: usize) {
        assert!((1..MAX_DIM).contains(&i), "root index {i} out of range");
        self.0 |= 1 << (i - 1);
    }

    pub fn contains(self, i: usize) -> bool {
        (1..MAX_DIM).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    pub fn is_subset_of(self, other: FaceIndex) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: FaceIndex) -> Self {
        FaceIndex(self.0 | other.0)
    }

    pub fn intersection(self, other: FaceIndex) -> Self {
        FaceIndex(self.0 & other.0)
    }

    pub fn difference(self, other: FaceIndex) -> Self {
        FaceIndex(self.0 & !other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Root indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (1..MAX_DIM).filter(move |&i| self.contains(i))
    }

    /// Largest root index, if any.
    pub fn max_root(self) -> Option<usize> {
        (self.0 != 0).then(|| 64 - self.0.leading_zeros() as usize)
    }

    pub fn check_rank(self, rank: usize) -> Result<()> {
        match self.max_root() {
            Some(i) if i > rank => Err(Error::FaceOutOfRange { index: i, rank }),
            _ => Ok(()),
        }
    }

    /// Every subset of `Δ` for the given rank, in bitmask order.
    pub fn all_subsets(rank: usize) -> impl Iterator<Item = FaceIndex> {
        assert!(rank < 32, "subset enumeration limited to rank < 32");
        (0..1u64 << rank).map(FaceIndex)
    }
}

impl fmt::Debug for FaceIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FaceIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        write!(f, "{{")?;
        for (pos, i) in self.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// An element of `SO(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct Rotation {
    mat: DMatrix<f64>,
}

impl TryFrom<MatrixRepr> for Rotation {
    type Error = Error;
    fn try_from(repr: MatrixRepr) -> Result<Self> {
        Rotation::new(matrix_from_rows(repr.n, &repr.matrix)?, 1e-6)
    }
}

impl From<Rotation> for MatrixRepr {
    fn from(r: Rotation) -> Self {
        MatrixRepr {
            n: r.n(),
            matrix: matrix_rows(&r.mat),
        }
    }
}

impl Rotation {
    pub fn new(mat: DMatrix<f64>, tol: f64) -> Result<Self> {
        let (rows, cols) = mat.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let defect = max_abs(&(mat.transpose() * &mat - DMatrix::identity(rows, rows)));
        let det = mat.determinant();
        if defect > tol || det <= 0.0 {
            return Err(Error::NotRotation { defect, det });
        }
        Ok(Rotation { mat })
    }

    pub(crate) fn new_unchecked(mat: DMatrix<f64>) -> Self {
        Rotation { mat }
    }

    pub fn identity(n: usize) -> Self {
        Rotation {
            mat: DMatrix::identity(n, n),
        }
    }

    /// A diagonal sign matrix; the number of `-1` entries must be even.
    pub fn signs(signs: &[f64]) -> Result<Self> {
        let mat = DMatrix::from_diagonal(&DVector::from_column_slice(signs));
        Rotation::new(mat, DEFAULT_TOL)
    }

    /// Rotation by `angle` in the coordinate plane `(i, j)` (0-based).
    pub fn plane(n: usize, i: usize, j: usize, angle: f64) -> Self {
        assert!(i < n && j < n && i != j);
        let mut mat = DMatrix::identity(n, n);
        let (s, c) = angle.sin_cos();
        mat[(i, i)] = c;
        mat[(j, j)] = c;
        mat[(i, j)] = -s;
        mat[(j, i)] = s;
        Rotation { mat }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn transpose(&self) -> Rotation {
        Rotation {
            mat: self.mat.transpose(),
        }
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation {
            mat: &self.mat * &other.mat,
        }
    }

    /// Frobenius distance between the matrices.
    pub fn distance(&self, other: &Rotation) -> f64 {
        (&self.mat - &other.mat).norm()
    }

    /// `Ad_k(diag(h)) = k · diag(h) · kᵀ`.
    pub fn conjugate_diagonal(&self, h: &[f64]) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(h));
        &self.mat * d * self.mat.transpose()
    }
}

/// Consecutive index blocks covering `0..n` (0-based matrix indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<Range<usize>>,
}

impl Partition {
    pub fn n(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }

    pub fn block_of(&self, index: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&index))
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Simple-root values `α_i(v) = v_i - v_{i+1}` of any vector in `a`.
pub fn root_values(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[0] - w[1]).collect()
}

/// The trace-zero vector whose simple-root values are `alphas`.
pub fn from_root_values(alphas: &[f64]) -> Vec<f64> {
    let n = alphas.len() + 1;
    let mut partial = Vec::with_capacity(n);
    let mut acc = 0.0;
    partial.push(0.0);
    for a in alphas {
        acc += a;
        partial.push(acc);
    }
    let first = partial.iter().sum::<f64>() / n as f64;
    partial.iter().map(|s| first - s).collect()
}

/// The unique vector in `span{e_i - e_{i+1} : i ∈ face}` (the orthogonal complement of
/// `a_face = ∩ ker α_i`) whose root values on `face` are `values` (listed in root order).
pub fn coroot_span_vector(face: FaceIndex, n: usize, values: &[f64]) -> Vec<f64> {
    let roots: Vec<usize> = face.iter().collect();
    assert_eq!(roots.len(), values.len());
    let mut out = vec![0.0; n];
    if roots.is_empty() {
        return out;
    }
    // Gram matrix of the coroots is the Cartan matrix of type A restricted to `face`.
    let m = roots.len();
    let cartan = DMatrix::from_fn(m, m, |a, b| match roots[a].abs_diff(roots[b]) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    });
    let rhs = DVector::from_column_slice(values);
    let coeffs = cartan.lu().solve(&rhs).expect("type A Cartan matrix is invertible");
    for (c, &i) in coeffs.iter().zip(&roots) {
        out[i - 1] += c;
        out[i] -= c;
    }
    out
}

/// Orthogonal projection of `v` onto `span{e_i - e_{i+1} : i ∈ face}`.
pub fn project_to_coroots(face: FaceIndex, v: &[f64]) -> Vec<f64> {
    let alphas = root_values(v);
    let values: Vec<f64> = face.iter().map(|i| alphas[i - 1]).collect();
    coroot_span_vector(face, v.len(), &values)
}

/// Cartan (polar) decomposition `P = k · exp(2H) · kᵀ`.
///
/// Eigenvectors are ordered by decreasing eigenvalue; each column is signed so its
/// largest-magnitude entry is positive, then the last column is negated if needed to
/// land in `SO(n)`. Under eigenvalue ties `k` is only defined modulo `Stab(face_of(H))`.
pub fn cartan_decompose(p: &SpdPoint) -> (Rotation, ChamberVector) {
    let n = p.n();
    let eig = SymmetricEigen::new(p.mat.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut k = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).clone_owned();
        let pivot = v
            .iter()
            .copied()
            .fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            v.neg_mut();
        }
        k.set_column(col, &v);
    }
    if k.determinant() < 0.0 {
        let mut last = k.column_mut(n - 1);
        last.neg_mut();
    }
    let h = order
        .iter()
        .map(|&i| 0.5 * eig.eigenvalues[i].max(f64::MIN_POSITIVE).ln())
        .collect();
    (Rotation::new_unchecked(k), ChamberVector::new_unchecked(h))
}

/// The generalized radius `r(x, y)`: half the log-eigenvalues of `S⁻¹ y S⁻¹`
/// in decreasing order, where `S = x^{1/2}`.
pub fn generalized_radius(x: &SpdPoint, y: &SpdPoint) -> Result<ChamberVector> {
    check_dim(x.n(), y.n())?;
    if x.mat == y.mat {
        return Ok(ChamberVector::zero(x.n()));
    }
    let eig = SymmetricEigen::new(x.mat.clone());
    let inv_sqrt = DVector::from_iterator(x.n(), eig.eigenvalues.iter().map(|l| l.powf(-0.5)));
    let s_inv = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    let m = &s_inv * &y.mat * &s_inv;
    let m = (&m + m.transpose()) * 0.5;
    let mut lambdas: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    if let Some(&min) = lambdas.last() {
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite(min));
        }
    }
    Ok(ChamberVector::new_unchecked(
        lambdas.iter().map(|l| 0.5 * l.ln()).collect(),
    ))
}

/// Generalized radius `r(x, y)` for `x = k · exp(2h) · kᵀ` given by its Cartan data.
///
/// Works with the graded factor `exp(-h) · kᵀ · chol(y)` through one-sided Jacobi, which
/// keeps full relative accuracy in the small singular values even when `h` is far
/// outside the range where `x` itself can be formed as a matrix.
pub fn radius_from_frame(k: &Rotation, h: &[f64], y: &SpdPoint) -> Result<ChamberVector> {
    check_dim(k.n(), y.n())?;
    check_dim(k.n(), h.len())?;
    let b = k.mat.transpose() * &y.mat * &k.mat;
    let b = (&b + b.transpose()) * 0.5;
    let chol = b.cholesky().ok_or(Error::NotPositiveDefinite(0.0))?;
    // (e^{-h} L)(e^{-h} L)ᵀ = e^{-h} kᵀ y k e^{-h}; singular values of the transpose.
    let mut g = chol.l().transpose();
    for (j, hj) in h.iter().enumerate() {
        let s = (-hj).exp();
        g.column_mut(j).scale_mut(s);
    }
    let mut logs = linalg::log_singular_values(g);
    logs.sort_by(|a, b| b.total_cmp(a));
    Ok(ChamberVector::new_unchecked(logs))
}

/// Simple-root values of a chamber vector.
pub fn chamber_root_values(h: &ChamberVector) -> Vec<f64> {
    h.root_values()
}

/// `{ i : |α_i(H)| <= tol · (1 + ‖H‖) }`.
pub fn face_of(h: &[f64], tol: f64) -> FaceIndex {
    let threshold = tol * (1.0 + norm(h));
    FaceIndex::from_roots(
        root_values(h)
            .iter()
            .enumerate()
            .filter(|(_, a)| a.abs() <= threshold)
            .map(|(i, _)| i + 1),
    )
}

/// Maximal runs of indices glued by the roots in `face` (root `i` glues `i` to `i+1`).
pub fn face_partition(face: FaceIndex, n: usize) -> Partition {
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..n {
        if !face.contains(i) {
            blocks.push(start..i);
            start = i;
        }
    }
    blocks.push(start..n);
    Partition { blocks }
}

/// Largest entry coupling indices `0..=cut` with `cut+1..n`.
fn cut_coupling(m: &DMatrix<f64>, cut: usize) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..=cut {
        for j in cut + 1..n {
            worst = worst.max(m[(i, j)].abs()).max(m[(j, i)].abs());
        }
    }
    worst
}

/// Whether `k ∈ Stab(face)`, i.e. `k` is block diagonal for `face_partition(face)`.
///
/// Equivalent to `Ad_k` fixing every `H ∈ c_face`.
pub fn in_stab(k: &Rotation, face: FaceIndex, tol: f64) -> bool {
    let n = k.n();
    (1..n)
        .filter(|&i| !face.contains(i))
        .all(|i| cut_coupling(&k.mat, i - 1) <= tol)
}

/// The smallest face `I` with `q ∈ Stab(I)`; `in_stab(q, J)` holds exactly when `J ⊇ I`.
pub fn minimal_face(q: &Rotation, tol: f64) -> FaceIndex {
    let n = q.n();
    FaceIndex::from_roots((1..n).filter(|&i| cut_coupling(&q.mat, i - 1) > tol))
}

/// `d(x, y) = ‖r(x, y)‖₂`. The Killing-form metric is `killing_scale(n)` times this.
pub fn distance(x: &SpdPoint, y: &SpdPoint) -> Result<f64> {
    Ok(generalized_radius(x, y)?.norm())
}

/// Ratio between the Killing-form distance `B(M,N) = 2n·Tr(MNᵀ)` and [`distance`].
pub fn killing_scale(n: usize) -> f64 {
    (2.0 * n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn diag_point(h: &[f64]) -> SpdPoint {
        SpdPoint::from_frame(&DMatrix::identity(h.len(), h.len()), h)
    }

    #[test]
    fn decompose_identity() {
        let (k, h) = cartan_decompose(&SpdPoint::identity(3));
        assert!(h.as_slice().iter().all(|v| v.abs() < 1e-15));
        assert!(in_stab(&k, FaceIndex::full(2), 1e-12));
    }

    #[test]
    fn decompose_diagonal() {
        let p = SpdPoint::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![2f64.exp(), 1.0, (-2f64).exp()])),
            DEFAULT_TOL,
        )
        .unwrap();
        let (k, h) = cartan_decompose(&p);
        for (a, b) in h.as_slice().iter().zip([1.0, 0.0, -1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((k.matrix() - DMatrix::identity(3, 3)).abs().max() < 1e-14);
    }

    #[test]
    fn invalid_matrices_rejected() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(SpdPoint::new(asym, DEFAULT_TOL), Err(Error::NotSymmetric(_))));
        let indef = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            SpdPoint::new(indef, DEFAULT_TOL),
            Err(Error::NotPositiveDefinite(_))
        ));
        let big = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!(matches!(SpdPoint::new(big, DEFAULT_TOL), Err(Error::DetNotOne(_))));
        let rect = DMatrix::zeros(2, 3);
        assert!(matches!(SpdPoint::new(rect, DEFAULT_TOL), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn radius_examples() {
        let x = diag_point(&[0.3, -0.1, -0.2]);
        assert_eq!(generalized_radius(&x, &x).unwrap(), ChamberVector::zero(3));
        let o = SpdPoint::identity(3);
        let y = diag_point(&[1.0, 0.0, -1.0]);
        let r = generalized_radius(&o, &y).unwrap();
        for (a, b) in r.as_slice().iter().zip([1.0, 0.0, -1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        // P = diag(e², 1, e⁻²) has radius (1, 0, -1) in these units.
        assert!((distance(&o, &y).unwrap() - SQRT_2).abs() < 1e-12);
        assert!(matches!(
            generalized_radius(&o, &SpdPoint::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn frame_radius_matches_matrix_radius() {
        let k = Rotation::plane(3, 0, 2, 0.7);
        let h = [0.9, -0.2, -0.7];
        let x = SpdPoint::from_frame(k.matrix(), &h);
        let y = diag_point(&[0.4, 0.1, -0.5]);
        let a = generalized_radius(&x, &y).unwrap();
        let b = radius_from_frame(&k, &h, &y).unwrap();
        for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((u - v).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn frame_radius_far_out() {
        // x = exp(2·(200, -100, -100)) cannot be formed accurately, but its radius can.
        let h = [200.0, -100.0, -100.0];
        let r = radius_from_frame(&Rotation::identity(3), &h, &SpdPoint::identity(3)).unwrap();
        for (a, b) in r.as_slice().iter().zip([100.0, 100.0, -200.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn root_value_examples() {
        assert_eq!(root_values(&[1.0, 0.0, -1.0]), vec![1.0, 1.0]);
        assert_eq!(root_values(&[0.0, 0.0, 0.0]), vec![0.0, 0.0]);
        let s6 = 6f64.sqrt();
        let r = root_values(&[2.0 / s6, -1.0 / s6, -1.0 / s6]);
        assert!((r[0] - 3.0 / s6).abs() < 1e-15 && r[1].abs() < 1e-15);
    }

    #[test]
    fn from_root_values_inverts_root_values() {
        let h = from_root_values(&[3.0, 0.5, 2.0]);
        assert!(h.iter().sum::<f64>().abs() < 1e-14);
        let back = root_values(&h);
        for (a, b) in back.iter().zip([3.0, 0.5, 2.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn coroot_span_vector_has_prescribed_roots_and_is_orthogonal() {
        let n = 5;
        let face = FaceIndex::from_roots([1, 2, 4]);
        let a = coroot_span_vector(face, n, &[1.0, 0.0, 2.5]);
        let alphas = root_values(&a);
        assert!((alphas[0] - 1.0).abs() < 1e-14);
        assert!(alphas[1].abs() < 1e-14);
        assert!((alphas[3] - 2.5).abs() < 1e-14);
        // Orthogonal to a_face = {v : α_1 = α_2 = α_4 = 0}, spanned by (1,1,1,-1.5,-1.5)-type vectors.
        let w = [2.0, 2.0, 2.0, -3.0, -3.0];
        let dot: f64 = a.iter().zip(w).map(|(x, y)| x * y).sum();
        assert!(dot.abs() < 1e-13);
    }

    #[test]
    fn face_examples() {
        assert_eq!(face_of(&[1.0, 0.0, -1.0], DEFAULT_TOL), FaceIndex::empty());
        assert_eq!(face_of(&[0.0, 0.0, 0.0], DEFAULT_TOL), FaceIndex::full(2));
        let s6 = 6f64.sqrt();
        assert_eq!(
            face_of(&[2.0 / s6, -1.0 / s6, -1.0 / s6], DEFAULT_TOL),
            FaceIndex::from_roots([2])
        );
    }

    #[test]
    fn partition_examples() {
        assert_eq!(face_partition(FaceIndex::empty(), 3).blocks, vec![0..1, 1..2, 2..3]);
        assert_eq!(face_partition(FaceIndex::from_roots([2]), 3).blocks, vec![0..1, 1..3]);
        assert_eq!(face_partition(FaceIndex::full(2), 3).blocks, vec![0..3]);
    }

    #[test]
    fn stab_examples() {
        let s = Rotation::signs(&[1.0, -1.0, -1.0]).unwrap();
        assert!(in_stab(&Rotation::identity(3), FaceIndex::empty(), 1e-12));
        assert!(in_stab(&s, FaceIndex::from_roots([2]), 1e-12));
        let r90 = Rotation::plane(3, 0, 1, FRAC_PI_2);
        assert!(!in_stab(&r90, FaceIndex::from_roots([2]), 1e-12));
        // Oracle: Ad_k moves diag(2,-1,-1).
        let moved = r90.conjugate_diagonal(&[2.0, -1.0, -1.0]);
        let fixed = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -1.0, -1.0]));
        assert!((moved - fixed).abs().max() > 1.0);
    }

    #[test]
    fn minimal_face_examples() {
        assert_eq!(minimal_face(&Rotation::identity(3), 1e-12), FaceIndex::empty());
        let s = Rotation::signs(&[1.0, -1.0, -1.0]).unwrap();
        assert_eq!(minimal_face(&s, 1e-12), FaceIndex::empty());
        let r = Rotation::plane(3, 1, 2, 0.3);
        assert_eq!(minimal_face(&r, 1e-12), FaceIndex::from_roots([2]));
        for j in FaceIndex::all_subsets(2) {
            assert_eq!(in_stab(&r, j, 1e-12), FaceIndex::from_roots([2]).is_subset_of(j));
        }
    }

    #[test]
    fn face_index_serde_and_display() {
        let f = FaceIndex::from_roots([1, 3]);
        assert_eq!(f.to_string(), "{1,3}");
        assert_eq!(FaceIndex::empty().to_string(), "∅");
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, "[1,3]");
        assert_eq!(serde_json::from_str::<FaceIndex>(&json).unwrap(), f);
        assert!(serde_json::from_str::<FaceIndex>("[0]").is_err());
        assert_eq!(FaceIndex::full(3).max_root(), Some(3));
        assert!(FaceIndex::from_roots([3]).check_rank(2).is_err());
    }

    #[test]
    fn chamber_vector_validation() {
        assert!(ChamberVector::new(vec![1.0, 0.0, -1.0], DEFAULT_TOL).is_ok());
        assert!(ChamberVector::new(vec![-1.0, 0.0, 1.0], DEFAULT_TOL).is_err());
        assert!(ChamberVector::new(vec![1.0, 1.0, 1.0], DEFAULT_TOL).is_err());
        assert!(ChamberVector::from_root_values(&[1.0, -0.5]).is_err());
    }
}
