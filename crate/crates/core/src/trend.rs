//! Finite-window limit detection for real sequences.

use serde::{Deserialize, Serialize};

use crate::config::ClassifyConfig;

/// Behaviour of one scalar sequence over its trailing window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "trend", content = "limit", rename_all = "snake_case")]
pub enum Trend {
    CauchyTo(f64),
    DivergesToInfinity,
    Oscillates,
}

impl Trend {
    pub fn is_cauchy(&self) -> bool {
        matches!(self, Trend::CauchyTo(_))
    }

    pub fn limit(&self) -> Option<f64> {
        match self {
            Trend::CauchyTo(c) => Some(*c),
            _ => None,
        }
    }
}

/// A trend plus whether a non-settling sequence looks persistently oscillating
/// (non-contracting and non-monotone), as opposed to merely slow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Behavior {
    pub trend: Trend,
    pub persistent: bool,
}

fn spread(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(*v), hi.max(*v))
    })
}

pub(crate) fn analyze(values: &[f64], cfg: &ClassifyConfig) -> Behavior {
    let w = cfg.window.min(values.len());
    let tail = &values[values.len() - w..];
    let prev = &values[values.len().saturating_sub(2 * w)..values.len() - w];
    let last = *tail.last().expect("non-empty window");
    let (lo, hi) = spread(tail);
    let noise = cfg.cauchy_tol * (1.0 + last.abs());
    if hi - lo < noise {
        return Behavior {
            trend: Trend::CauchyTo(last),
            persistent: false,
        };
    }
    if !prev.is_empty() {
        let (prev_lo, prev_hi) = spread(prev);
        if lo > cfg.divergence_threshold && lo > prev_lo {
            return Behavior {
                trend: Trend::DivergesToInfinity,
                persistent: false,
            };
        }
        let contracting = hi - lo < 0.5 * (prev_hi - prev_lo);
        let mut ups = false;
        let mut downs = false;
        for pair in tail.windows(2) {
            let d = pair[1] - pair[0];
            if d > noise {
                ups = true;
            } else if d < -noise {
                downs = true;
            }
        }
        return Behavior {
            trend: Trend::Oscillates,
            persistent: !contracting && ups && downs,
        };
    }
    Behavior {
        trend: Trend::Oscillates,
        persistent: false,
    }
}

/// Classifies the trailing window of `values`: Cauchy if its oscillation is below
/// `cauchy_tol·(1+|last|)`, divergent if it lies above `divergence_threshold` and its
/// minimum rose over the previous window, oscillating otherwise.
pub fn scalar_trend(values: &[f64], cfg: &ClassifyConfig) -> Trend {
    analyze(values, cfg).trend
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_cauchy() {
        let cfg = ClassifyConfig::default();
        assert_eq!(scalar_trend(&[2.5; 30], &cfg), Trend::CauchyTo(2.5));
    }

    #[test]
    fn linear_diverges_only_past_threshold() {
        let cfg = ClassifyConfig::default();
        let low: Vec<f64> = (1..=500).map(|m| m as f64).collect();
        assert_eq!(scalar_trend(&low, &cfg), Trend::Oscillates);
        let high: Vec<f64> = (1..=1100).map(|m| m as f64).collect();
        assert_eq!(scalar_trend(&high, &cfg), Trend::DivergesToInfinity);
    }

    #[test]
    fn alternating_is_persistent() {
        let cfg = ClassifyConfig::default();
        let v: Vec<f64> = (0..40).map(|m| if m % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let b = analyze(&v, &cfg);
        assert_eq!(b.trend, Trend::Oscillates);
        assert!(b.persistent);
        // slow monotone growth is not persistent oscillation
        let slow: Vec<f64> = (1..60).map(|m| (m as f64).ln()).collect();
        assert!(!analyze(&slow, &cfg).persistent);
    }

    #[test]
    fn decaying_perturbation_settles() {
        let cfg = ClassifyConfig::default();
        let v: Vec<f64> = (0..100).map(|j| 2.0 + 1.25f64.powi(-j)).collect();
        assert!(scalar_trend(&v, &cfg).is_cauchy());
    }
}
