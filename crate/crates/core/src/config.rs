use serde::{Deserialize, Serialize};

use crate::lie::DEFAULT_TOL;

/// How the maximal face of a dual-cell or Martin point is read off its finite part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxfaceRule {
    /// `{ i ∈ I : α_i(a) = 0 }`.
    #[default]
    Refined,
    /// `I` when `a = 0`, otherwise `∅`.
    Literal,
}

/// Tolerances shared by the limit classifiers and everything built on them.
///
/// The chain is: `cauchy_tol` decides whether a trailing window has settled,
/// `divergence_threshold` whether it has escaped, `limit_tol` snaps near-wall
/// limit estimates onto the wall and compares limits, and `tol` is the exact-data
/// tolerance used for face detection on snapped values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyConfig {
    pub window: usize,
    pub cauchy_tol: f64,
    pub divergence_threshold: f64,
    pub limit_tol: f64,
    pub tol: f64,
    /// Depth cap for the iterated model; `None` means the matrix dimension.
    pub max_depth: Option<usize>,
    pub maxface_rule: MaxfaceRule,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            window: 10,
            cauchy_tol: 1e-4,
            divergence_threshold: 1e3,
            limit_tol: 1e-3,
            tol: DEFAULT_TOL,
            max_depth: None,
            maxface_rule: MaxfaceRule::Refined,
        }
    }
}

impl ClassifyConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.window < 3 {
            return Err(format!("window must be at least 3, got {}", self.window));
        }
        for (name, v) in [
            ("cauchy_tol", self.cauchy_tol),
            ("divergence_threshold", self.divergence_threshold),
            ("limit_tol", self.limit_tol),
            ("tol", self.tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(())
    }
}
