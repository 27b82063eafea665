//! Experiment description, read from a single TOML file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use eigrom_core::fem::{ProblemDef, ProblemId};
use eigrom_core::mesh::{Diagonal, TriMesh};
use eigrom_core::pod::SnapshotStrategy;
use eigrom_core::sampling::{self, SampleSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

fn default_k() -> usize {
    6
}

fn default_diagonal() -> String {
    "alternating".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// `problem_1d` or `problem_2d`.
    pub problem: String,
    /// High-fidelity eigenpairs per parameter.
    #[serde(default = "default_k")]
    pub k: usize,
    pub mesh: MeshConfig,
    /// One run per (training set, strategy) pair.
    pub training: Vec<TrainingConfig>,
    pub strategies: Vec<StrategyConfig>,
    pub rom: RomConfig,
    /// Defaults to the standard test points of the chosen problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweeps: Vec<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Cells per side; exclusive with `h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Target axis spacing, rounded to whole cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// `right` or `alternating`.
    #[serde(default = "default_diagonal")]
    pub diagonal: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrainingConfig {
    #[serde(rename = "uniform_1d")]
    Uniform1d { a: f64, b: f64, step: f64 },
    /// Tensor grid over the problem's parameter box.
    #[serde(rename = "grid_2d")]
    Grid2d { counts: [usize; 2] },
    Explicit { points: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategyConfig {
    Modes {
        modes: Vec<usize>,
    },
    /// Coefficients default to all ones.
    Combination {
        modes: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeffs: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RomConfig {
    /// Energy criterion tolerance; exclusive with `n` and `full_rank`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub full_rank: bool,
    /// Reduced eigenpairs reported per test point.
    pub modes: usize,
}

/// Dimension rule after validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DimRule {
    Tolerance(f64),
    Fixed(usize),
    Rank,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Free parameter index.
    #[serde(default)]
    pub axis: usize,
    /// Values of the other parameters; ignored on `axis`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub base: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub step: f64,
    /// Also evaluate every ROM along the sweep.
    #[serde(default)]
    pub rom: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub mu: Vec<f64>,
    /// Ascending ROM sizes; sizes above the rank of a run are skipped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Defaults to `rom.modes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
}

impl StrategyConfig {
    pub fn to_strategy(&self) -> Result<SnapshotStrategy> {
        let s = match self {
            StrategyConfig::Modes { modes } => SnapshotStrategy::Modes(modes.clone()),
            StrategyConfig::Combination { modes, coeffs } => SnapshotStrategy::Combination {
                modes: modes.clone(),
                coeffs: coeffs.clone().unwrap_or_else(|| vec![1.0; modes.len()]),
            },
        };
        s.validate()?;
        Ok(s)
    }
}

impl TrainingConfig {
    pub fn to_samples(&self, problem: &ProblemDef) -> Result<SampleSet> {
        let set = match self {
            TrainingConfig::Uniform1d { a, b, step } => sampling::uniform_1d(*a, *b, *step)?,
            TrainingConfig::Grid2d { counts } => sampling::uniform_grid_2d(&problem.domain, (counts[0], counts[1]))?,
            TrainingConfig::Explicit { points } => SampleSet::explicit(points.clone())?,
        };
        if set.dim() != problem.param_dim() {
            bail!("training points have dimension {}, problem needs {}", set.dim(), problem.param_dim());
        }
        set.check_admissible(problem)?;
        Ok(set)
    }

    /// Short label used in output rows.
    pub fn label(&self) -> String {
        match self {
            TrainingConfig::Uniform1d { a, b, step } => format!("{a}:{step}:{b}"),
            TrainingConfig::Grid2d { counts } => format!("grid{}x{}", counts[0], counts[1]),
            TrainingConfig::Explicit { points } => format!("explicit{}", points.len()),
        }
    }
}

impl SweepConfig {
    pub fn to_samples(&self, problem: &ProblemDef) -> Result<SampleSet> {
        let dim = problem.param_dim();
        let base = if self.base.is_empty() { vec![0.0; dim] } else { self.base.clone() };
        if base.len() != dim {
            bail!("sweep base has {} entries, problem needs {dim}", base.len());
        }
        let set = sampling::uniform_line(&base, self.axis, self.a, self.b, self.step)?;
        set.check_admissible(problem)?;
        Ok(set)
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn problem_id(&self) -> Result<ProblemId> {
        ProblemId::from_name(&self.problem).with_context(|| format!("unknown problem '{}'", self.problem))
    }

    pub fn problem_def(&self) -> Result<ProblemDef> {
        Ok(self.problem_id()?.definition())
    }

    pub fn diagonal(&self) -> Result<Diagonal> {
        Diagonal::from_name(&self.mesh.diagonal).with_context(|| format!("unknown mesh diagonal '{}'", self.mesh.diagonal))
    }

    pub fn build_mesh(&self) -> Result<TriMesh> {
        let rect = self.problem_def()?.rect;
        let (nx, ny) = match (self.mesh.n, self.mesh.h) {
            (Some(n), None) => (n, n),
            (None, Some(h)) => rect.cells_for_spacing(h)?,
            _ => bail!("mesh needs exactly one of `n` and `h`"),
        };
        Ok(TriMesh::structured_with(rect, nx, ny, self.diagonal()?)?)
    }

    pub fn dim_rule(&self) -> Result<DimRule> {
        match (self.rom.eps_tol, self.rom.n, self.rom.full_rank) {
            (Some(t), None, false) if t > 0.0 && t < 1.0 => Ok(DimRule::Tolerance(t)),
            (Some(_), None, false) => bail!("rom.eps_tol must lie in (0, 1)"),
            (None, Some(n), false) if n > 0 => Ok(DimRule::Fixed(n)),
            (None, None, true) => Ok(DimRule::Rank),
            _ => bail!("rom needs exactly one of eps_tol, n and full_rank"),
        }
    }

    pub fn test_samples(&self) -> Result<SampleSet> {
        let problem = self.problem_def()?;
        let set = match &self.test_points {
            Some(points) => SampleSet::explicit(points.clone())?,
            None => match problem.id {
                ProblemId::OneParameter => sampling::test_points_1d(),
                ProblemId::TwoParameter => sampling::test_points_2d(),
            },
        };
        if set.dim() != problem.param_dim() {
            bail!("test points have dimension {}, problem needs {}", set.dim(), problem.param_dim());
        }
        set.check_admissible(&problem)?;
        Ok(set)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            bail!("name must be non-empty and contain no path separators");
        }
        let problem = self.problem_def()?;
        self.diagonal()?;
        if self.mesh.n.is_some() == self.mesh.h.is_some() {
            bail!("mesh needs exactly one of `n` and `h`");
        }
        if self.k == 0 {
            bail!("k must be positive");
        }
        if self.training.is_empty() || self.strategies.is_empty() {
            bail!("at least one training set and one strategy are required");
        }
        for s in &self.strategies {
            let s = s.to_strategy()?;
            if s.max_mode() > self.k {
                bail!("strategy {} uses mode {} but k = {}", s.label(), s.max_mode(), self.k);
            }
        }
        for t in &self.training {
            t.to_samples(&problem)?;
        }
        self.dim_rule()?;
        if self.rom.modes == 0 || self.rom.modes > self.k {
            bail!("rom.modes must lie in 1..=k");
        }
        self.test_samples()?;
        for s in &self.sweeps {
            s.to_samples(&problem)?;
        }
        if let Some(c) = &self.convergence {
            problem.check_admissible(&c.mu)?;
            if let Some(list) = &c.n_list {
                if list.is_empty() || list[0] == 0 || list.windows(2).any(|w| w[0] >= w[1]) {
                    bail!("convergence.n_list must be positive and strictly ascending");
                }
            }
            if c.modes.is_some_and(|m| m == 0 || m > self.k) {
                bail!("convergence.modes must lie in 1..=k");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "demo"
problem = "problem_1d"

[mesh]
h = 0.05

[[training]]
kind = "uniform_1d"
a = -1.4
b = 1.4
step = 0.1

[[strategies]]
kind = "combination"
modes = [1, 2]

[rom]
eps_tol = 1e-8
modes = 2
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.k, 6);
        assert_eq!(cfg.mesh.diagonal, "alternating");
        assert_eq!(cfg.build_mesh().unwrap().cells, (40, 40));
        assert_eq!(cfg.dim_rule().unwrap(), DimRule::Tolerance(1e-8));
        assert_eq!(cfg.strategies[0].to_strategy().unwrap(), SnapshotStrategy::sum_of_first(2));
        assert_eq!(cfg.test_samples().unwrap().len(), 6);
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn rejects_conflicts() {
        let both = SAMPLE.replace("eps_tol = 1e-8", "eps_tol = 1e-8\nn = 4");
        assert!(ExperimentConfig::from_toml_str(&both).is_err());
        let big_mode = SAMPLE.replace("modes = [1, 2]", "modes = [1, 7]");
        assert!(ExperimentConfig::from_toml_str(&big_mode).is_err());
        let mesh = SAMPLE.replace("h = 0.05", "h = 0.05\nn = 40");
        assert!(ExperimentConfig::from_toml_str(&mesh).is_err());
        let unknown = SAMPLE.replace("problem = \"problem_1d\"", "problem = \"heat\"");
        assert!(ExperimentConfig::from_toml_str(&unknown).is_err());
        let typo = SAMPLE.replace("[rom]", "[rom]\nepstol = 1");
        assert!(ExperimentConfig::from_toml_str(&typo).is_err());
    }
}
