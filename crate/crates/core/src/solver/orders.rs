use std::time::Instant;

use itertools::Itertools;

use super::{MipBackend, SolveOptions, SolveStatus};
use crate::domain::{FirstStageSchedule, Instance};
use crate::error::{Error, Result};
use crate::model::{build_extensive_form, schedule_from_solution};
use crate::scenario::ScenarioSet;
use crate::simulate::{evaluate, evaluate_expected};

const MAX_PATIENTS: usize = 7;

#[derive(Debug, Clone)]
pub struct OrderSearch {
    pub schedule: FirstStageSchedule,
    pub objective: f64,
    /// `Optimal`, or `TimeLimit` when some orders were never examined.
    pub status: SolveStatus,
    pub solves: usize,
    pub pruned: usize,
    pub wall_time_s: f64,
}

/// Appointment vector for a fixed order: zero, or each patient's expected induction start under zero appointments.
fn seed_schedules(instance: &Instance, set: &ScenarioSet, order: &[usize]) -> Result<Vec<FirstStageSchedule>> {
    let n = instance.len();
    let zero = FirstStageSchedule { appointments: vec![0; n], order: order.to_vec() };
    let mut start = vec![0.0; n];
    for s in &set.scenarios {
        let out = evaluate(instance, &zero, s)?;
        for (acc, b) in start.iter_mut().zip(&out.induction_start) {
            *acc += s.probability * b;
        }
    }
    let mut appts: Vec<u32> =
        start.iter().map(|b| (b.floor().max(0.0) as u32).min(instance.appointment_horizon)).collect();
    let mut floor = 0;
    for &p in order {
        appts[p] = appts[p].max(floor);
        floor = appts[p];
    }
    Ok(vec![zero, FirstStageSchedule { appointments: appts, order: order.to_vec() }])
}

/// Exact extensive-form optimum by solving one MIP per patient order.
///
/// Orders are visited from the cheapest seed schedule upward and each MIP is cut off at the incumbent.
pub fn solve_by_orders(
    instance: &Instance,
    set: &ScenarioSet,
    backend: &dyn MipBackend,
    opts: &SolveOptions,
    valid_inequalities: bool,
) -> Result<OrderSearch> {
    let n = instance.len();
    if n > MAX_PATIENTS {
        return Err(Error::SizeGuard(format!("order search limited to {MAX_PATIENTS} patients, got {n}")));
    }
    let start = Instant::now();
    let base = build_extensive_form(instance, set, valid_inequalities)?;
    let u_index = |i: usize, j: usize| base.var(&format!("u_{i}_{j}"));

    let mut candidates = Vec::new();
    let mut best: Option<(f64, FirstStageSchedule)> = None;
    for order in (0..n).permutations(n) {
        let mut seed_cost = f64::INFINITY;
        for sched in seed_schedules(instance, set, &order)? {
            let cost = evaluate_expected(instance, &sched, set)?.cost;
            seed_cost = seed_cost.min(cost);
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, sched));
            }
        }
        candidates.push((seed_cost, order));
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let (mut best_cost, mut best_sched) = best.expect("at least one order");

    let (mut solves, mut pruned) = (0, 0);
    let mut status = SolveStatus::Optimal;
    for (_, order) in &candidates {
        let elapsed = start.elapsed().as_secs_f64();
        if opts.time_limit.is_some_and(|t| elapsed >= t) {
            status = SolveStatus::TimeLimit;
            break;
        }
        let mut desc = base.clone();
        let pos = FirstStageSchedule { appointments: vec![0; n], order: order.clone() }.positions();
        for i in 0..n {
            for j in 0..n {
                if let Some(u) = (i != j).then(|| u_index(i, j)).flatten() {
                    desc.fix(u, if pos[i] < pos[j] { 1.0 } else { 0.0 });
                }
            }
        }
        let sub = SolveOptions {
            time_limit: opts.time_limit.map(|t| t - elapsed),
            cutoff: Some(best_cost),
            ..opts.clone()
        };
        let res = backend.solve(&desc, &sub)?;
        solves += 1;
        match res.status {
            SolveStatus::Cutoff => pruned += 1,
            SolveStatus::Infeasible => return Err(Error::Solver("order-restricted model is infeasible".into())),
            SolveStatus::TimeLimit => status = SolveStatus::TimeLimit,
            _ => {}
        }
        if res.has_solution() && res.objective < best_cost {
            best_cost = res.objective;
            best_sched = schedule_from_solution(instance, &desc, &res.values)?;
        }
    }
    Ok(OrderSearch {
        schedule: best_sched,
        objective: best_cost,
        status,
        solves,
        pruned,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
