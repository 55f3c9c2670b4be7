//! Experiment configuration, echoed verbatim into every report.

use std::path::PathBuf;

use arbor::samplers::OffspringDistribution;
use arbor::simply_generated::WeightSequence;
use arbor::DegreeStatistics;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Equivalence,
    TailSweep,
    Convergence,
    Concentration,
}

/// What an experiment is run on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Every degree statistics up to the first size (oracle batteries).
    AllSmall,
    Statistics(DegreeStatistics),
    Offspring(OffspringDistribution),
    /// A weight sequence in its JSON form.
    Weights(serde_json::Value),
    /// `μ(1) = 1 - ε`, `μ(0) = μ(2) = ε/2`, one member per grid value `ε`.
    LazyBinaryFamily,
}

impl Target {
    pub fn weights(&self) -> Result<WeightSequence> {
        match self {
            Target::Weights(v) => Ok(WeightSequence::from_json(&v.to_string())?),
            _ => Err(HarnessError::Config("expected a weight sequence target".into())),
        }
    }
}

/// The degree-statistics inequality checked by a concentration run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConcentrationClass {
    /// `|μ|_1 <= 1`, `|μ|_2 = ∞`: `|n|_2² >= C |n|_1`.
    #[serde(rename = "prop2.3")]
    Prop23,
    /// `|μ|_1 < 1`, no exponential moment: `|n|_2² >= C |n|_1`.
    #[serde(rename = "prop2.4")]
    Prop24,
    /// `μ(0) + μ(1) < 1`: `|n|_2² - n(1) >= |n|_1 · 4(1 - μ(0) - μ(1) - ε)`.
    #[serde(rename = "prop2.5")]
    Prop25,
    /// Simply generated trees: `|n(k)/n - π(k)| < ε` for `k <= 3`.
    #[serde(rename = "thm5.2")]
    Thm52,
}

impl std::str::FromStr for ConcentrationClass {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prop2.3" => Ok(Self::Prop23),
            "prop2.4" => Ok(Self::Prop24),
            "prop2.5" => Ok(Self::Prop25),
            "thm5.2" => Ok(Self::Thm52),
            other => Err(HarnessError::Config(format!("unknown class {other}"))),
        }
    }
}

fn default_c() -> f64 {
    10.0
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_threshold() -> f64 {
    0.99
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub target: Target,
    pub sizes: Vec<u64>,
    pub replications: u64,
    pub seed: u64,
    /// β values for tail sweeps, ε values for the lazy-binary family.
    #[serde(default)]
    pub grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ConcentrationClass>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Convergence runs: a finite-variance control, expected not to grow.
    #[serde(default)]
    pub control: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, target: Target, sizes: Vec<u64>, replications: u64, seed: u64) -> Self {
        Self {
            kind,
            target,
            sizes,
            replications,
            seed,
            grid: Vec::new(),
            class: None,
            c: default_c(),
            epsilon: default_epsilon(),
            threshold: default_threshold(),
            control: false,
            output: None,
        }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(HarnessError::Config("replications must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(HarnessError::Config("sizes must be non-empty".into()));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(s)?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(
            r#"{"kind":"concentration","target":{"offspring":{"masses":[0.4,0.2,0.4]}},"sizes":[2000],"replications":200,"seed":1,"class":"prop2.5"}"#,
        )
        .unwrap();
        assert_eq!(c.class, Some(ConcentrationClass::Prop25));
        assert_eq!((c.c, c.epsilon, c.threshold), (10.0, 0.1, 0.99));
        assert!(c.grid.is_empty() && !c.control && c.output.is_none());
    }

    #[test]
    fn invalid_configs() {
        let base = ExperimentConfig::new(ExperimentKind::Equivalence, Target::AllSmall, vec![3], 1, 0);
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.replications = 0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.sizes.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn class_names() {
        for (s, c) in [("prop2.3", ConcentrationClass::Prop23), ("thm5.2", ConcentrationClass::Thm52)] {
            assert_eq!(s.parse::<ConcentrationClass>().unwrap(), c);
            assert_eq!(serde_json::to_value(c).unwrap(), serde_json::json!(s));
        }
        assert!("prop9".parse::<ConcentrationClass>().is_err());
    }

    #[test]
    fn weight_targets() {
        let t = Target::Weights(serde_json::json!({"weights":[1.0,0.0,1.0],"rho":"infinity"}));
        assert_eq!(t.weights().unwrap().max_degree(), 2);
        assert!(Target::AllSmall.weights().is_err());
    }
}
