//! MIP backends and an exhaustive reference solver for tiny instances.

mod brute;
mod highs_backend;
mod orders;
#[cfg(feature = "microlp")]
mod microlp_backend;

pub use brute::{brute_force_exact, BruteForceResult};
pub use highs_backend::HighsBackend;
pub use orders::{solve_by_orders, OrderSearch};
#[cfg(feature = "microlp")]
pub use microlp_backend::MicrolpBackend;

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{write_lp, MipDescription};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
    /// No point beats `SolveOptions::cutoff`.
    Cutoff,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Objective including the model constant.
    pub objective: f64,
    pub values: Vec<f64>,
    pub bound: Option<f64>,
    pub wall_time_s: f64,
}

impl SolveResult {
    pub fn has_solution(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Feasible | SolveStatus::TimeLimit)
            && !self.values.is_empty()
    }

    pub fn value(&self, model: &MipDescription, name: &str) -> Option<f64> {
        model.var(name).and_then(|v| self.values.get(v).copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Seconds; `None` means unlimited.
    pub time_limit: Option<f64>,
    pub gap: f64,
    pub threads: usize,
    /// When set, every model is written there in LP format before solving.
    pub dump_dir: Option<PathBuf>,
    /// Prune everything whose objective (constant included) is not below this value.
    #[serde(default)]
    pub cutoff: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { time_limit: None, gap: 1e-6, threads: 1, dump_dir: None, cutoff: None }
    }
}

pub trait MipBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &MipDescription, opts: &SolveOptions) -> Result<SolveResult>;
}

pub fn backend_by_name(name: &str) -> Result<Box<dyn MipBackend>> {
    match name {
        "highs" => Ok(Box::new(HighsBackend)),
        #[cfg(feature = "microlp")]
        "microlp" => Ok(Box::new(MicrolpBackend)),
        other => Err(Error::Validation(format!("unknown solver backend `{other}`"))),
    }
}

static DUMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

pub(crate) fn dump_if_requested(model: &MipDescription, opts: &SolveOptions) -> Result<()> {
    if let Some(dir) = &opts.dump_dir {
        std::fs::create_dir_all(dir)?;
        let idx = DUMP_COUNTER.fetch_add(1, Ordering::Relaxed);
        std::fs::write(dir.join(format!("model-{idx:05}.lp")), write_lp(model))?;
    }
    Ok(())
}

/// Solves and insists on a usable point.
pub fn solve_required(backend: &dyn MipBackend, model: &MipDescription, opts: &SolveOptions) -> Result<SolveResult> {
    let res = backend.solve(model, opts)?;
    match res.status {
        SolveStatus::Infeasible => Err(Error::Solver(format!("{} reported the model infeasible", backend.name()))),
        _ if !res.has_solution() => Err(Error::Solver(format!("{} returned no solution", backend.name()))),
        _ => Ok(res),
    }
}
