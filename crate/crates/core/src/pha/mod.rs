//! Extended progressive hedging over per-scenario subproblems.

mod config;
mod cycle;
mod fixing;
mod rules;

pub use config::PhaConfig;
pub use cycle::CycleDetector;
pub use fixing::FixingLedger;
pub use rules::{dual_residual, penalty_update, primal_drift, round_half_up, threshold, update_consensus, upper_limit};

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{FirstStageSchedule, Instance, Metrics};
use crate::error::{Error, Result};
use crate::model::{add_linearization_cut, build_ssp, SspContext};
use crate::scenario::ScenarioSet;
use crate::simulate::evaluate_expected;
use crate::solver::{solve_required, MipBackend, SolveOptions};

/// One line of the JSON-lines trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub z: usize,
    /// Penalty used in this iteration's subproblems.
    pub rho: f64,
    /// Penalty after the update, used next iteration.
    pub rho_next: f64,
    pub rho_cap: f64,
    pub threshold: f64,
    pub delta_d: f64,
    pub delta_p: f64,
    pub consensus: Vec<f64>,
    pub fixed_u: usize,
    pub fixed_a: usize,
    pub rejected_u: usize,
    pub cycle_fixes: usize,
    pub stall_fired: bool,
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaOutcome {
    pub schedule: FirstStageSchedule,
    pub metrics: Metrics,
    pub iterations: usize,
    /// False when stopped by the iteration or time limit.
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
    pub wall_time_s: f64,
}

/// Mutable algorithm state between barriers.
#[derive(Debug, Clone)]
pub struct PhaState {
    pub z: usize,
    pub rho: f64,
    /// `mu[w][i]`.
    pub mu: Vec<Vec<f64>>,
    pub consensus: Vec<f64>,
    pub delta_d: f64,
    pub delta_p: f64,
    pub contexts: Vec<SspContext>,
    pub ledger: FixingLedger,
    pub cycles: CycleDetector,
    /// Unfixed appointment count after each iteration's fixing, index z - 1.
    pub unfixed_history: Vec<usize>,
}

impl PhaState {
    pub fn new(instance: &Instance, set: &ScenarioSet, cfg: &PhaConfig) -> Self {
        let n = instance.len();
        let mut contexts: Vec<SspContext> = (0..set.len()).map(|w| SspContext::new(w, n)).collect();
        if cfg.seed_cut_step > 0 {
            let h = instance.appointment_horizon;
            let anchors: Vec<u32> = (0..h).step_by(cfg.seed_cut_step as usize).chain([h]).collect();
            for ctx in &mut contexts {
                for i in 0..n {
                    for &anc in &anchors {
                        add_linearization_cut(ctx, i, f64::from(anc));
                    }
                }
            }
        }
        PhaState {
            z: 0,
            rho: cfg.rho0,
            mu: vec![vec![0.0; n]; set.len()],
            consensus: vec![0.0; n],
            delta_d: 0.0,
            delta_p: 0.0,
            contexts,
            ledger: FixingLedger::new(n),
            cycles: CycleDetector::new(n),
            unfixed_history: Vec::new(),
        }
    }
}

struct SspSolution {
    a: Vec<u32>,
    u: Vec<Vec<bool>>,
    objective: f64,
}

fn solve_scenario(
    instance: &Instance,
    set: &ScenarioSet,
    ctx: &SspContext,
    first: bool,
    backend: &dyn MipBackend,
    opts: &SolveOptions,
) -> Result<SspSolution> {
    let n = instance.len();
    let desc = build_ssp(instance, &set.scenarios[ctx.scenario], ctx, first)?;
    let res = solve_required(backend, &desc, opts)
        .map_err(|e| Error::Solver(format!("subproblem for scenario {}: {e}", ctx.scenario)))?;
    let val = |name: &str| res.value(&desc, name).unwrap_or(0.0);
    let a = (0..n).map(|i| val(&format!("a_{i}")).round().max(0.0) as u32).collect();
    let u = (0..n).map(|i| (0..n).map(|j| i != j && val(&format!("u_{i}_{j}")) > 0.5).collect()).collect();
    Ok(SspSolution { a, u, objective: res.objective })
}

/// Schedule from consensus appointments; ties ordered by average number of predecessors.
fn final_schedule(appointments: Vec<u32>, u: &[Vec<Vec<bool>>], probabilities: &[f64]) -> FirstStageSchedule {
    let n = appointments.len();
    let mut rank = vec![0.0; n];
    for (uw, &p) in u.iter().zip(probabilities) {
        for row in uw {
            for (j, &pre) in row.iter().enumerate() {
                if pre {
                    rank[j] += p;
                }
            }
        }
    }
    FirstStageSchedule::from_appointments(appointments, &rank)
}

/// Runs EPHA. Subproblems of one iteration are solved in parallel; all state updates happen
/// after they return. When `trace_path` is given each iteration is appended as one JSON line.
pub fn run_epha(
    instance: &Instance,
    set: &ScenarioSet,
    cfg: &PhaConfig,
    backend: &dyn MipBackend,
    opts: &SolveOptions,
    trace_path: Option<&Path>,
) -> Result<PhaOutcome> {
    cfg.validate()?;
    crate::domain::ensure_valid(instance)?;
    set.validate(instance.len())?;
    let start = Instant::now();
    let n = instance.len();
    let horizon = instance.appointment_horizon;
    let probs: Vec<f64> = set.scenarios.iter().map(|s| s.probability).collect();
    let mut trace_file = match trace_path {
        Some(p) => Some(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => None,
    };
    let mut state = PhaState::new(instance, set, cfg);
    let mut trace = Vec::new();
    let mut last_u: Vec<Vec<Vec<bool>>> = Vec::new();
    let mut converged = false;

    while state.z < cfg.max_iterations {
        state.z += 1;
        let z = state.z;
        let first = z == 1;
        for (w, ctx) in state.contexts.iter_mut().enumerate() {
            ctx.mu.clone_from(&state.mu[w]);
            ctx.rho = state.rho;
            ctx.consensus.clone_from(&state.consensus);
            ctx.fixed_orders.clone_from(&state.ledger.orders);
            ctx.fixed_appointments.clone_from(&state.ledger.appointments);
        }
        let sols: Vec<SspSolution> = state
            .contexts
            .par_iter()
            .map(|ctx| solve_scenario(instance, set, ctx, first, backend, opts))
            .collect::<Result<_>>()?;

        let a: Vec<Vec<f64>> = sols.iter().map(|s| s.a.iter().map(|&v| v as f64).collect()).collect();
        let a_int: Vec<Vec<u32>> = sols.iter().map(|s| s.a.clone()).collect();
        last_u = sols.iter().map(|s| s.u.clone()).collect();
        let previous = std::mem::replace(&mut state.consensus, update_consensus(&a, &probs));
        let (prev_d, prev_p) = (state.delta_d, state.delta_p);
        state.delta_d = dual_residual(&a, &state.consensus);
        state.delta_p = if first { 0.0 } else { primal_drift(&state.consensus, &previous) };
        let agreed = a_int.iter().all(|row| row == &a_int[0]);

        let mut record = IterationRecord {
            z,
            rho: state.rho,
            rho_next: state.rho,
            rho_cap: upper_limit(z, cfg),
            threshold: threshold(z, cfg),
            delta_d: state.delta_d,
            delta_p: state.delta_p,
            consensus: state.consensus.clone(),
            fixed_u: state.ledger.orders.len(),
            fixed_a: state.ledger.appointments.len(),
            rejected_u: 0,
            cycle_fixes: 0,
            stall_fired: false,
            objectives: sols.iter().map(|s| s.objective).collect(),
        };

        if agreed {
            converged = true;
        } else {
            let (_, rejected) = state.ledger.fix_orders(&last_u, &probs, cfg.fix_share);
            record.rejected_u = rejected;
            state.ledger.fix_appointments(&a_int, &probs, record.threshold);

            for i in 0..n {
                let mu_i: Vec<f64> = state.mu.iter().map(|m| m[i]).collect();
                let repeat = state.cycles.observe(i, &mu_i);
                if repeat && z > cfg.limit_2 && !state.ledger.appointments.contains_key(&i) {
                    state.ledger.force_fix_appointment(i, round_half_up(state.consensus[i]), horizon);
                    record.cycle_fixes += 1;
                }
            }

            let unfixed = state.ledger.unfixed();
            if z > cfg.limit_5 && (z - cfg.limit_5).is_multiple_of(cfg.controliter) && unfixed > 0 {
                let earlier = state.unfixed_history.get(z - cfg.controliter - 1).copied();
                if earlier == Some(unfixed) {
                    for i in 0..n {
                        state.ledger.force_fix_appointment(i, round_half_up(state.consensus[i]), horizon);
                    }
                    record.stall_fired = true;
                }
            }

            for (w, mu) in state.mu.iter_mut().enumerate() {
                for i in 0..n {
                    mu[i] += state.rho * (a[w][i] - state.consensus[i]);
                }
            }
            if z > 1 {
                state.rho = penalty_update(state.rho, z, (prev_d, state.delta_d), (prev_p, state.delta_p), cfg);
            }
            for (w, ctx) in state.contexts.iter_mut().enumerate() {
                for i in 0..n {
                    if !ctx.cuts[i].contains(&a[w][i]) {
                        add_linearization_cut(ctx, i, a[w][i]);
                    }
                }
            }
        }
        state.unfixed_history.push(state.ledger.unfixed());
        record.rho_next = state.rho;
        record.fixed_u = state.ledger.orders.len();
        record.fixed_a = state.ledger.appointments.len();
        if let Some(f) = trace_file.as_mut() {
            serde_json::to_writer(&mut *f, &record)?;
            f.write_all(b"\n")?;
        }
        trace.push(record);
        if converged {
            break;
        }
        if cfg.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() >= t) {
            break;
        }
    }
    if let Some(f) = trace_file.as_mut() {
        f.flush()?;
    }

    let appointments: Vec<u32> = if converged {
        state.consensus.iter().map(|&c| c.round() as u32).collect()
    } else {
        let mut ledger = state.ledger.clone();
        (0..n).map(|i| ledger.force_fix_appointment(i, round_half_up(state.consensus[i]), horizon)).collect()
    };
    if converged {
        debug_assert!(state.consensus.iter().all(|c| (c - c.round()).abs() < 1e-9));
    }
    let schedule = final_schedule(appointments, &last_u, &probs);
    let metrics = evaluate_expected(instance, &schedule, set)?;
    Ok(PhaOutcome {
        schedule,
        metrics,
        iterations: state.z,
        converged,
        trace,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
