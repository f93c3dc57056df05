//! TOML or JSON run configuration. Every section is optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::AcuityClass;
use crate::error::{Error, Result};
use crate::experiment::GeneratorParams;
use crate::pha::PhaConfig;
use crate::scenario::{load_pools, synthesize_pools, urology_moments};
use crate::solver::SolveOptions;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyConfig {
    pub literal_reciprocal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub backend: String,
    pub time_limit: Option<f64>,
    pub gap: f64,
    pub threads: usize,
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveOptions::default();
        SolverConfig { backend: "highs".into(), time_limit: d.time_limit, gap: d.gap, threads: d.threads, dump_dir: None }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions { time_limit: self.time_limit, gap: self.gap, threads: self.threads, dump_dir: self.dump_dir.clone(), cutoff: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub pha: PhaConfig,
    pub penalty: PenaltyConfig,
    pub solver: SolverConfig,
    pub generator: GeneratorParams,
    /// Instance seeds; a set of ten by default.
    pub seeds: Vec<u64>,
    /// Duration pool CSV; synthetic pools from the bundled moments when absent.
    pub pools: Option<PathBuf>,
    pub pool_size: usize,
    pub pool_seed: u64,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            pha: PhaConfig::default(),
            penalty: PenaltyConfig::default(),
            solver: SolverConfig::default(),
            generator: GeneratorParams::default(),
            seeds: (1..=10).collect(),
            pools: None,
            pool_size: 1000,
            pool_seed: 2020,
        }
    }
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: AppConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
            _ => toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.pha_config().validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Validation("at least one seed is required".into()));
        }
        if self.solver.gap.is_nan() || self.solver.gap < 0.0 {
            return Err(Error::Validation("solver gap must be nonnegative".into()));
        }
        Ok(())
    }

    /// PHA settings with the penalty switch folded in.
    pub fn pha_config(&self) -> PhaConfig {
        PhaConfig { literal_reciprocal: self.pha.literal_reciprocal || self.penalty.literal_reciprocal, ..self.pha.clone() }
    }

    pub fn classes(&self) -> Result<Vec<AcuityClass>> {
        match &self.pools {
            Some(p) => load_pools(p),
            None => synthesize_pools(&urology_moments(), self.pool_size, self.pool_seed),
        }
    }
}
