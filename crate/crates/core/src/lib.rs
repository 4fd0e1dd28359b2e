//! Compactifications of the Weyl chamber of `SL(n,ℝ)/SO(n)` and the quotient
//! construction `K × W̃ / ~` that turns them into compactifications of the
//! symmetric space, together with numerical tools for fundamental sequences and
//! Busemann-type kernels.
//!
//! Points of `X` are symmetric positive definite matrices of determinant one.
//! The closed chamber is the cone of weakly decreasing trace-zero vectors.

// `!(x > 0.0)` style tests are deliberate: they reject NaN along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod busemann;
pub mod chamber;
pub mod config;
pub mod error;
pub mod fundamental;
pub mod lie;
pub mod linalg;
pub mod profile;
pub mod quotient;
pub mod sample;
pub mod trend;

pub use busemann::{
    busemann_function, check_condition1, check_condition3, check_lipschitz, conjecture_experiment, kernel_eval,
    Condition1Sampling, Condition3Form, ConeVector, Family, HarnessConfig, KernelSpec,
};
pub use chamber::{
    classify, classify_dualcell, classify_iterated, classify_martin, classify_visual, maxface, maxface_with,
    points_equal, stratification_check, witness_sequence, ChamberPoint, ClassifierVerdict, IteratedLevel, Model,
    Outcome,
};
pub use config::{ClassifyConfig, MaxfaceRule};
pub use error::{Error, Result};
pub use fundamental::{
    limit_in_quotient, polar_sequence, refinement_report, FundamentalDecomposition, PointSequence, QuotientLimit,
};
pub use lie::{
    cartan_decompose, coroot_span_vector, distance, face_of, face_partition, generalized_radius, in_stab,
    killing_scale, minimal_face, root_values, ChamberVector, FaceIndex, Partition, Rotation, SpdPoint, DEFAULT_TOL,
};
pub use profile::{generate_pairs, SequenceProfile};
pub use quotient::{
    canonicalize, equivalent, intersection_check, k_act, rank_one_demonstration, realize, QuotientPoint,
};
pub use trend::{scalar_trend, Trend};
