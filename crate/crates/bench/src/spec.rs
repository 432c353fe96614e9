use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use quanco::biogas::{MvnGenConfig, Variant};
use quanco::ising::SolverParams;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

pub const EXPERIMENT_SCHEMA: &str = "quanco-experiment/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Trn,
    Quanco,
}

/// One optimiser configuration in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgoSpec {
    pub algo: Algorithm,
    /// QUBO back-end for `quanco`; ignored for `trn`.
    #[serde(default = "default_solver")]
    pub solver: String,
    /// Bits per dimension for `quanco`.
    #[serde(default = "default_bits")]
    pub bits: usize,
    #[serde(default)]
    pub params: SolverParams,
}

fn default_solver() -> String {
    "exact".into()
}

fn default_bits() -> usize {
    1
}

impl AlgoSpec {
    pub fn trn() -> Self {
        Self { algo: Algorithm::Trn, solver: default_solver(), bits: default_bits(), params: SolverParams::default() }
    }

    pub fn quanco(solver: &str, bits: usize) -> Self {
        Self { algo: Algorithm::Quanco, solver: solver.into(), bits, params: SolverParams::default() }
    }

    /// `trn`, or `quanco-<solver>-<bits>`.
    pub fn label(&self) -> String {
        match self.algo {
            Algorithm::Trn => "trn".into(),
            Algorithm::Quanco => format!("quanco-{}-{}", self.solver, self.bits),
        }
    }

    /// Solver column value; `eigen` for the spherical baseline.
    pub fn solver_name(&self) -> &str {
        match self.algo {
            Algorithm::Trn => "eigen",
            Algorithm::Quanco => &self.solver,
        }
    }

    /// Bits column value; 0 for the spherical baseline.
    pub fn bits_column(&self) -> usize {
        match self.algo {
            Algorithm::Trn => 0,
            Algorithm::Quanco => self.bits,
        }
    }
}

impl fmt::Display for AlgoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Initial trust-region sizes in the log-feed coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadiusRule {
    /// Box half-widths start at `factor * |y0|`.
    pub factor: f64,
    /// Caps are `growth` times the initial sizes.
    pub growth: f64,
}

impl Default for RadiusRule {
    fn default() -> Self {
        Self { factor: 0.5, growth: 10.0 }
    }
}

/// Cross-product of problems, optimisers and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub variants: Vec<Variant>,
    pub ks: Vec<usize>,
    pub algorithms: Vec<AlgoSpec>,
    pub iterations: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub radius: RadiusRule,
    /// Worker threads for the run pool; all cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Generator settings replacing the synthetic defaults, per variant.
    #[serde(default)]
    pub generators: Vec<MvnGenConfig>,
}

fn default_schema() -> String {
    EXPERIMENT_SCHEMA.into()
}

impl ExperimentSpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let spec: Self = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != EXPERIMENT_SCHEMA {
            return Err(BenchError::Usage(format!("expected schema {EXPERIMENT_SCHEMA:?}, found {:?}", self.schema)));
        }
        let empty = [
            ("variants", self.variants.is_empty()),
            ("ks", self.ks.is_empty()),
            ("algorithms", self.algorithms.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(BenchError::Usage(format!("`{name}` must not be empty")));
        }
        if self.ks.contains(&0) {
            return Err(BenchError::Usage("problem sizes must be at least 1".into()));
        }
        if self.iterations == 0 {
            return Err(BenchError::Usage("`iterations` must be at least 1".into()));
        }
        let distinct: HashSet<_> = self.seeds.iter().collect();
        if distinct.len() != self.seeds.len() {
            return Err(BenchError::Usage("seeds must be distinct".into()));
        }
        if !(self.radius.factor > 0.0 && self.radius.growth >= 1.0) {
            return Err(BenchError::Usage("radius factor must be positive and growth at least 1".into()));
        }
        for g in &self.generators {
            g.validate()?;
        }
        Ok(())
    }

    /// Generator for `variant` seeded with `seed`.
    pub fn generator(&self, variant: Variant, seed: u64) -> MvnGenConfig {
        self.generators
            .iter()
            .find(|g| g.variant == variant)
            .cloned()
            .unwrap_or_else(|| MvnGenConfig::synthetic(variant))
            .with_seed(seed)
    }
}
