//! Experiment configuration: JSON with a schema version, unknown keys rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Used when `--out` is not given.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative eigen-residual bound.
    #[serde(default = "default_eigen_tol")]
    pub eigen: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_eigen_tol() -> f64 {
    1e-9
}

fn default_max_iter() -> usize {
    500
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eigen: default_eigen_tol(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Dirichlet ground state of the unit disk with Richardson extrapolation
    /// over the last two resolutions.
    DiskBaseline {
        #[serde(default = "default_disk_cells")]
        cells: Vec<usize>,
    },
    /// Point flux α at the origin on an annulus, α = j/alpha_steps for j = 0..=alpha_steps.
    AbAnnulusSweep {
        #[serde(default = "half")]
        r_in: f64,
        #[serde(default = "one")]
        r_out: f64,
        #[serde(default = "default_annulus_cells")]
        cells: usize,
        #[serde(default = "default_alpha_steps")]
        alpha_steps: u32,
    },
    /// λ^e, λ^m and the trial bound over couplings n for the scheduled thick-set potential.
    CounterexampleProfile {
        #[serde(default = "default_bands")]
        bands: u32,
        #[serde(default = "default_generations")]
        generations: usize,
        /// Explicit couplings; when absent, every scheduled n below `n_max`.
        #[serde(default)]
        n_list: Option<Vec<u64>>,
        #[serde(default = "default_n_max")]
        n_max: u64,
        #[serde(default = "default_profile_cells")]
        cells: usize,
    },
    /// Random flux vectors against the pigeonhole search and an exact scan.
    PigeonholeStudy {
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_dimension")]
        dimension: usize,
        #[serde(default = "default_pigeon_n")]
        n_max: u64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default = "default_steps")]
        steps: Vec<u64>,
    },
    /// Kato, periodic, Poincaré and twistor checks.
    InequalitySuite {
        #[serde(default = "default_kato_trials")]
        kato_trials: usize,
        #[serde(default = "default_kato_cells")]
        kato_cells: usize,
        #[serde(default = "default_kato_trials")]
        periodic_trials: usize,
        #[serde(default = "yes")]
        poincare: bool,
        #[serde(default = "default_twistor_cells")]
        twistor_cells: Vec<usize>,
    },
    /// Single smooth charge; integer versus non-integer total flux n·mu.
    SmoothExceptional {
        /// Charge flux as [numerator, denominator].
        #[serde(default = "default_mu")]
        mu: [i64; 2],
        #[serde(default = "default_rho")]
        rho: f64,
        #[serde(default = "default_smooth_n")]
        n_list: Vec<u64>,
        #[serde(default = "default_smooth_cells")]
        cells: usize,
    },
}

fn default_disk_cells() -> Vec<usize> {
    vec![128, 256]
}
fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_annulus_cells() -> usize {
    128
}
fn default_alpha_steps() -> u32 {
    32
}
fn default_bands() -> u32 {
    8
}
fn default_generations() -> usize {
    2
}
fn default_n_max() -> u64 {
    64
}
fn default_profile_cells() -> usize {
    129
}
fn default_trials() -> usize {
    20
}
fn default_dimension() -> usize {
    5
}
fn default_pigeon_n() -> u64 {
    1 << 14
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_steps() -> Vec<u64> {
    vec![1, 4]
}
fn default_kato_trials() -> usize {
    100
}
fn default_kato_cells() -> usize {
    64
}
fn default_twistor_cells() -> Vec<usize> {
    vec![64, 128, 256]
}
fn default_mu() -> [i64; 2] {
    [1, 4]
}
fn default_rho() -> f64 {
    0.1
}
fn default_smooth_n() -> Vec<u64> {
    vec![2, 4]
}
fn default_smooth_cells() -> usize {
    130
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::DiskBaseline { .. } => "disk-baseline",
            Experiment::AbAnnulusSweep { .. } => "ab-annulus-sweep",
            Experiment::CounterexampleProfile { .. } => "counterexample-profile",
            Experiment::PigeonholeStudy { .. } => "pigeonhole-study",
            Experiment::InequalitySuite { .. } => "inequality-suite",
            Experiment::SmoothExceptional { .. } => "smooth-exceptional",
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates; every problem found is reported.
    pub fn from_json(text: &str) -> Result<Self, Vec<String>> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| vec![e.to_string()])?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                errs.push(msg.to_string());
            }
        };
        check(
            self.version == SCHEMA_VERSION,
            &format!("version must be {SCHEMA_VERSION}, got {}", self.version),
        );
        check(
            self.tolerances.eigen > 0.0 && self.tolerances.eigen < 1.0,
            "tolerances.eigen must lie in (0, 1)",
        );
        check(
            self.tolerances.max_iter > 0,
            "tolerances.max_iter must be positive",
        );
        match &self.experiment {
            Experiment::DiskBaseline { cells } => {
                check(!cells.is_empty(), "cells must not be empty");
                check(
                    cells.iter().all(|&c| c >= 4),
                    "every cells entry must be at least 4",
                );
                check(
                    cells.windows(2).all(|w| w[1] == 2 * w[0]),
                    "cells must double from one entry to the next",
                );
            }
            Experiment::AbAnnulusSweep {
                r_in,
                r_out,
                cells,
                alpha_steps,
            } => {
                check(*r_in > 0.0 && r_out > r_in, "need 0 < r_in < r_out");
                check(*cells >= 4, "cells must be at least 4");
                check(*alpha_steps >= 1, "alpha_steps must be positive");
            }
            Experiment::CounterexampleProfile {
                bands,
                generations,
                n_list,
                cells,
                ..
            } => {
                check(*bands >= 2, "bands must be at least 2");
                check(
                    (1..=3).contains(generations),
                    "generations must lie in 1..=3",
                );
                check(*cells >= 4, "cells must be at least 4");
                if let Some(ns) = n_list {
                    check(
                        ns.windows(2).all(|w| w[0] < w[1]),
                        "n_list must be strictly increasing",
                    );
                }
            }
            Experiment::PigeonholeStudy {
                dimension,
                n_max,
                epsilon,
                steps,
                ..
            } => {
                check(*dimension >= 1, "dimension must be positive");
                check(*n_max >= 1, "n_max must be positive");
                check(
                    *epsilon > 0.0 && *epsilon < 0.5,
                    "epsilon must lie in (0, 1/2)",
                );
                check(
                    !steps.is_empty() && steps.iter().all(|&s| s >= 1),
                    "steps must be nonempty and positive",
                );
            }
            Experiment::InequalitySuite {
                kato_cells,
                twistor_cells,
                ..
            } => {
                check(*kato_cells >= 4, "kato_cells must be at least 4");
                check(
                    twistor_cells.iter().all(|&c| c >= 8),
                    "every twistor_cells entry must be at least 8",
                );
            }
            Experiment::SmoothExceptional {
                mu,
                rho,
                n_list,
                cells,
            } => {
                check(mu[1] > 0 && mu[0] > 0, "mu must be a positive fraction");
                check(*rho > 0.0 && *rho < 1.0, "rho must lie in (0, 1)");
                check(
                    n_list.windows(2).all(|w| w[0] < w[1]),
                    "n_list must be strictly increasing",
                );
                check(*cells >= 4, "cells must be at least 4");
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json(
            r#"{"version":1,"seed":3,"experiment":{"kind":"disk-baseline"}}"#,
        )
        .unwrap();
        assert_eq!(
            cfg.experiment,
            Experiment::DiskBaseline {
                cells: vec![128, 256]
            }
        );
        assert_eq!(cfg.tolerances, Tolerances::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            r#"{"version":1,"seed":3,"colour":1,"experiment":{"kind":"disk-baseline"}}"#,
            r#"{"version":1,"seed":3,"experiment":{"kind":"disk-baseline","cell":[8]}}"#,
            r#"{"version":1,"seed":3,"tolerances":{"eig":1e-9},"experiment":{"kind":"disk-baseline"}}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn seed_is_mandatory() {
        let e =
            ExperimentConfig::from_json(r#"{"version":1,"experiment":{"kind":"disk-baseline"}}"#)
                .unwrap_err();
        assert!(e[0].contains("seed"));
    }

    #[test]
    fn semantic_errors_collected() {
        let e = ExperimentConfig::from_json(
            r#"{"version":2,"seed":0,"experiment":{"kind":"ab-annulus-sweep","r_in":1.0,"r_out":0.5}}"#,
        )
        .unwrap_err();
        assert_eq!(e.len(), 2);
    }
}
