use serde::{Deserialize, Serialize};
use weylcomp_core::busemann::HarnessConfig;
use weylcomp_core::{ClassifyConfig, Family, MaxfaceRule, Model};

/// Sample budgets of the stochastic commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Chamber points per `(k, r)` pair in the intersection check.
    pub intersections: usize,
    /// Random `(k, r)` pairs in `verify --property intersections` besides the given one.
    pub intersection_pairs: usize,
    /// Boundary points per model in the stratification check.
    pub stratified: usize,
    pub refinement_pairs: usize,
    pub class_structure: usize,
    pub kernel_samples: usize,
    pub condition1_samples: usize,
    pub probes: usize,
    pub conjecture_pairs: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            intersections: 40,
            intersection_pairs: 8,
            stratified: 50,
            refinement_pairs: 300,
            class_structure: 100,
            kernel_samples: 2000,
            condition1_samples: 300,
            probes: 8,
            conjecture_pairs: 60,
        }
    }
}

/// Everything a run depends on. Loaded from `--config`, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub tol: f64,
    pub cauchy_tol: f64,
    pub divergence_threshold: f64,
    pub limit_tol: f64,
    pub window: usize,
    pub maxface_rule: MaxfaceRule,
    pub seed: u64,
    pub model: Model,
    pub kernel: Family,
    pub budgets: Budgets,
    pub harness: HarnessConfig,
}

impl Default for Config {
    fn default() -> Self {
        let c = ClassifyConfig::default();
        Config {
            tol: c.tol,
            cauchy_tol: c.cauchy_tol,
            divergence_threshold: c.divergence_threshold,
            limit_tol: c.limit_tol,
            window: c.window,
            maxface_rule: c.maxface_rule,
            seed: 0,
            model: Model::Visual,
            kernel: Family::F,
            budgets: Budgets::default(),
            harness: HarnessConfig::default(),
        }
    }
}

impl Config {
    pub fn classify(&self) -> ClassifyConfig {
        ClassifyConfig {
            window: self.window,
            cauchy_tol: self.cauchy_tol,
            divergence_threshold: self.divergence_threshold,
            limit_tol: self.limit_tol,
            tol: self.tol,
            max_depth: None,
            maxface_rule: self.maxface_rule,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.classify().validate()?;
        let h = &self.harness;
        for (name, v) in [
            ("harness.radius", h.radius),
            ("harness.perturbation", h.perturbation),
            ("harness.func_tol", h.func_tol),
            ("harness.stab_tol", h.stab_tol),
            ("harness.max_radius", h.max_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if h.window < 3 || h.grid_len < h.window {
            return Err("harness.window must be at least 3 and at most harness.grid_len".into());
        }
        if h.histogram_bins == 0 {
            return Err("harness.histogram_bins must be positive".into());
        }
        Ok(())
    }

    /// Seed of task `index` within one command: `seed + index`, wrapping.
    pub fn task_seed(&self, index: u64) -> u64 {
        self.seed.wrapping_add(index)
    }
}
