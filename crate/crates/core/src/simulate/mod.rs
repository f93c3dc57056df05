//! Second-stage evaluation of a fixed first stage under one scenario.
//!
//! For a fixed IR assignment the earliest timeline is computed by one forward pass over the
//! first-stage order; every cost component is nondecreasing in the start times, so that timeline
//! is optimal for the assignment. [`evaluate`] minimizes over assignments exactly; the
//! first-available rule is kept as [`evaluate_first_available`].

mod gantt;

pub use gantt::{export_gantt, gantt_svg, gantt_text, GanttBar};

use serde::{Deserialize, Serialize};

use crate::domain::{FirstStageSchedule, Instance, Metrics};
use crate::error::{Error, Result};
use crate::scenario::{Scenario, ScenarioSet};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondStageOutcome {
    /// IR index per patient; empty for serial outcomes.
    pub ir_assignment: Vec<usize>,
    /// `B_i = a_i + Y_i`.
    pub induction_start: Vec<f64>,
    /// `A_i`.
    pub surgery_start: Vec<f64>,
    pub wait_ir: Vec<f64>,
    pub wait_or: Vec<f64>,
    pub or_closure: Vec<f64>,
    pub ir_closure: Vec<f64>,
    pub or_idle: Vec<f64>,
    pub ir_idle_total: f64,
    pub metrics: Metrics,
}

fn check_inputs(instance: &Instance, schedule: &FirstStageSchedule, scenario: &Scenario) -> Result<()> {
    schedule.validate(instance)?;
    if scenario.induction.len() != instance.len()
        || scenario.surgery.len() != instance.len()
        || scenario.turnover.len() != instance.len()
    {
        return Err(Error::Validation(format!(
            "scenario covers {} patients, instance has {}",
            scenario.induction.len(),
            instance.len()
        )));
    }
    Ok(())
}

/// Earliest timeline for a fixed IR assignment.
fn timeline(instance: &Instance, schedule: &FirstStageSchedule, s: &Scenario, assignment: &[usize]) -> SecondStageOutcome {
    let n = instance.len();
    let (k_count, r_count) = (instance.num_irs, instance.num_ors);
    let mut b = vec![0.0; n];
    let mut a_start = vec![0.0; n];
    let mut ir_free = vec![0.0_f64; k_count];
    let mut or_free = vec![0.0_f64; r_count];
    let mut anesth = vec![0.0_f64; r_count];
    let mut last_b = 0.0_f64;
    for &j in &schedule.order {
        let r = instance.patients[j].or_id;
        let k = assignment[j];
        let ready = (schedule.appointments[j] as f64).max(last_b).max(anesth[r]);
        let bj = ready.max(ir_free[k]);
        let aj = (bj + s.induction[j]).max(or_free[r]);
        b[j] = bj;
        a_start[j] = aj;
        last_b = bj;
        anesth[r] = anesth[r].max(bj + s.induction[j]);
        ir_free[k] = ir_free[k].max(aj);
        or_free[r] = or_free[r].max(aj + s.or_time(j));
    }
    assemble(instance, schedule, s, assignment.to_vec(), b, a_start)
}

fn assemble(
    instance: &Instance,
    schedule: &FirstStageSchedule,
    s: &Scenario,
    ir_assignment: Vec<usize>,
    b: Vec<f64>,
    a_start: Vec<f64>,
) -> SecondStageOutcome {
    let n = instance.len();
    let mut or_closure = vec![0.0_f64; instance.num_ors];
    let mut ir_closure = vec![0.0_f64; instance.num_irs];
    let mut busy = vec![0.0; instance.num_ors];
    for i in 0..n {
        let r = instance.patients[i].or_id;
        or_closure[r] = or_closure[r].max(a_start[i] + s.or_time(i));
        busy[r] += s.or_time(i);
        ir_closure[ir_assignment[i]] = ir_closure[ir_assignment[i]].max(a_start[i]);
    }
    let or_idle: Vec<f64> = or_closure.iter().zip(&busy).map(|(f, u)| f - u).collect();
    let wait_ir: Vec<f64> = (0..n).map(|i| b[i] - schedule.appointments[i] as f64).collect();
    let wait_or: Vec<f64> = (0..n).map(|i| a_start[i] - b[i] - s.induction[i]).collect();
    let ir_idle_total = ir_closure.iter().sum::<f64>() - s.induction.iter().sum::<f64>();
    let mut metrics = Metrics {
        or_idle_total: or_idle.iter().sum(),
        ir_idle_total,
        wait_ir_total: wait_ir.iter().sum(),
        wait_or_total: wait_or.iter().sum(),
        or_closures: or_closure.clone(),
        ir_closures: ir_closure.clone(),
        cost: 0.0,
    };
    metrics.cost = metrics.recompute_cost(&instance.weights);
    SecondStageOutcome {
        ir_assignment,
        induction_start: b,
        surgery_start: a_start,
        wait_ir,
        wait_or,
        or_closure,
        ir_closure,
        or_idle,
        ir_idle_total,
        metrics,
    }
}

/// Timeline for a caller-chosen IR assignment.
pub fn evaluate_with_assignment(
    instance: &Instance,
    schedule: &FirstStageSchedule,
    scenario: &Scenario,
    assignment: &[usize],
) -> Result<SecondStageOutcome> {
    check_inputs(instance, schedule, scenario)?;
    if assignment.len() != instance.len() || assignment.iter().any(|&k| k >= instance.num_irs) {
        return Err(Error::Validation(format!("invalid IR assignment {assignment:?}")));
    }
    Ok(timeline(instance, schedule, scenario, assignment))
}

/// Assignment produced by sending each patient, in order, to the IR where induction can start
/// earliest. Ties prefer the used IR that freed up last, then an unused IR, then the lowest index.
pub fn first_available_assignment(instance: &Instance, schedule: &FirstStageSchedule, s: &Scenario) -> Vec<usize> {
    let n = instance.len();
    let mut assignment = vec![0; n];
    let mut ir_free = vec![0.0_f64; instance.num_irs];
    let mut used = vec![false; instance.num_irs];
    let mut or_free = vec![0.0_f64; instance.num_ors];
    let mut anesth = vec![0.0_f64; instance.num_ors];
    let mut last_b = 0.0_f64;
    for &j in &schedule.order {
        let r = instance.patients[j].or_id;
        let ready = (schedule.appointments[j] as f64).max(last_b).max(anesth[r]);
        let mut best = 0;
        for k in 1..instance.num_irs {
            let bk = ready.max(ir_free[k]);
            let bb = ready.max(ir_free[best]);
            let better = if bk < bb - EPS {
                true
            } else if bk > bb + EPS {
                false
            } else if used[k] != used[best] {
                used[k]
            } else {
                used[k] && ir_free[k] > ir_free[best] + EPS
            };
            if better {
                best = k;
            }
        }
        let bj = ready.max(ir_free[best]);
        let aj = (bj + s.induction[j]).max(or_free[r]);
        assignment[j] = best;
        used[best] = true;
        last_b = bj;
        anesth[r] = anesth[r].max(bj + s.induction[j]);
        ir_free[best] = ir_free[best].max(aj);
        or_free[r] = or_free[r].max(aj + s.or_time(j));
    }
    assignment
}

pub fn evaluate_first_available(
    instance: &Instance,
    schedule: &FirstStageSchedule,
    scenario: &Scenario,
) -> Result<SecondStageOutcome> {
    check_inputs(instance, schedule, scenario)?;
    let assignment = first_available_assignment(instance, schedule, scenario);
    Ok(timeline(instance, schedule, scenario, &assignment))
}

struct Search<'a> {
    instance: &'a Instance,
    schedule: &'a FirstStageSchedule,
    s: &'a Scenario,
    assign: Vec<usize>,
    best: Vec<usize>,
    best_cost: f64,
    ir_free: Vec<f64>,
    used: Vec<bool>,
    or_free: Vec<f64>,
    anesth: Vec<f64>,
}

impl Search<'_> {
    fn improves(&self, cost: f64) -> bool {
        cost < self.best_cost - EPS * self.best_cost.abs().max(1.0)
    }

    fn dfs(&mut self, pos: usize, last_b: f64, cost: f64) {
        let order = &self.schedule.order;
        if pos == order.len() {
            if self.improves(cost) {
                self.best_cost = cost;
                self.best.clone_from(&self.assign);
            }
            return;
        }
        let w = self.instance.weights;
        let j = order[pos];
        let r = self.instance.patients[j].or_id;
        let a = self.schedule.appointments[j] as f64;
        let e = self.s.induction[j];
        let ready = a.max(last_b).max(self.anesth[r]);
        let mut tried_unused = false;
        let mut tried_free: Vec<f64> = Vec::new();
        for k in 0..self.instance.num_irs {
            if !self.used[k] {
                if tried_unused {
                    continue;
                }
                tried_unused = true;
            } else {
                if tried_free.iter().any(|f| (f - self.ir_free[k]).abs() <= EPS) {
                    continue;
                }
                tried_free.push(self.ir_free[k]);
            }
            let bj = ready.max(self.ir_free[k]);
            let aj = (bj + e).max(self.or_free[r]);
            // Each increment is nonnegative, so the running cost bounds every completion.
            let inc = w.c_w * (aj - a - e) + w.c_j * (aj - self.ir_free[k] - e) + w.c_i * (aj - self.or_free[r]);
            if !self.improves(cost + inc) {
                continue;
            }
            let saved = (self.ir_free[k], self.used[k], self.or_free[r], self.anesth[r]);
            self.assign[j] = k;
            self.ir_free[k] = aj;
            self.used[k] = true;
            self.or_free[r] = aj + self.s.or_time(j);
            self.anesth[r] = self.anesth[r].max(bj + e);
            self.dfs(pos + 1, bj, cost + inc);
            (self.ir_free[k], self.used[k], self.or_free[r], self.anesth[r]) = saved;
        }
    }
}

/// Minimum-cost second stage for the given first stage and scenario.
///
/// Among optimal assignments the first-available one is returned whenever it is optimal.
pub fn evaluate(instance: &Instance, schedule: &FirstStageSchedule, scenario: &Scenario) -> Result<SecondStageOutcome> {
    check_inputs(instance, schedule, scenario)?;
    let incumbent = first_available_assignment(instance, schedule, scenario);
    let start = timeline(instance, schedule, scenario, &incumbent);
    let mut search = Search {
        instance,
        schedule,
        s: scenario,
        assign: vec![0; instance.len()],
        best: incumbent,
        best_cost: start.metrics.cost,
        ir_free: vec![0.0; instance.num_irs],
        used: vec![false; instance.num_irs],
        or_free: vec![0.0; instance.num_ors],
        anesth: vec![0.0; instance.num_ors],
    };
    search.dfs(0, 0.0, 0.0);
    Ok(timeline(instance, schedule, scenario, &search.best))
}

fn expected(
    instance: &Instance,
    set: &ScenarioSet,
    num_irs: usize,
    mut f: impl FnMut(&Scenario) -> Result<SecondStageOutcome>,
) -> Result<Metrics> {
    if set.scenarios.is_empty() {
        return Err(Error::Validation("scenario set is empty".into()));
    }
    let mut acc = Metrics::zero(instance.num_ors, num_irs);
    for s in &set.scenarios {
        let out = f(s)?;
        acc.accumulate(&out.metrics, s.probability);
    }
    Ok(acc)
}

/// Probability-weighted metrics of [`evaluate`] over a scenario set.
pub fn evaluate_expected(instance: &Instance, schedule: &FirstStageSchedule, set: &ScenarioSet) -> Result<Metrics> {
    expected(instance, set, instance.num_irs, |s| evaluate(instance, schedule, s))
}

pub fn evaluate_expected_first_available(
    instance: &Instance,
    schedule: &FirstStageSchedule,
    set: &ScenarioSet,
) -> Result<Metrics> {
    expected(instance, set, instance.num_irs, |s| evaluate_first_available(instance, schedule, s))
}

/// Serial processing: induction, surgery and turnover all occupy the OR back to back.
///
/// `induction_start` equals the appointment (no IR wait) and the OR wait precedes induction.
pub fn evaluate_serial(instance: &Instance, schedule: &FirstStageSchedule, s: &Scenario) -> Result<SecondStageOutcome> {
    check_inputs(instance, schedule, s)?;
    let n = instance.len();
    let mut or_free = vec![0.0_f64; instance.num_ors];
    let mut busy = vec![0.0; instance.num_ors];
    let mut b = vec![0.0; n];
    let mut a_start = vec![0.0; n];
    let mut wait_or = vec![0.0; n];
    for &j in &schedule.order {
        let r = instance.patients[j].or_id;
        let a = schedule.appointments[j] as f64;
        let begin = a.max(or_free[r]);
        b[j] = a;
        wait_or[j] = begin - a;
        a_start[j] = begin + s.induction[j];
        or_free[r] = begin + s.occupancy(j);
        busy[r] += s.occupancy(j);
    }
    let or_idle: Vec<f64> = or_free.iter().zip(&busy).map(|(f, u)| f - u).collect();
    let w = instance.weights;
    let mut metrics = Metrics {
        or_idle_total: or_idle.iter().sum(),
        ir_idle_total: 0.0,
        wait_ir_total: 0.0,
        wait_or_total: wait_or.iter().sum(),
        or_closures: or_free.clone(),
        ir_closures: Vec::new(),
        cost: 0.0,
    };
    metrics.cost = w.c_i * metrics.or_idle_total + w.c_w * metrics.wait_or_total;
    Ok(SecondStageOutcome {
        ir_assignment: Vec::new(),
        induction_start: b,
        surgery_start: a_start,
        wait_ir: vec![0.0; n],
        wait_or,
        or_closure: or_free,
        ir_closure: Vec::new(),
        or_idle,
        ir_idle_total: 0.0,
        metrics,
    })
}

pub fn evaluate_expected_serial(instance: &Instance, schedule: &FirstStageSchedule, set: &ScenarioSet) -> Result<Metrics> {
    expected(instance, set, 0, |s| evaluate_serial(instance, schedule, s))
}

/// Exhaustively checks that no IR assignment beats `outcome` on this scenario.
pub fn check_assignment_optimality(
    instance: &Instance,
    schedule: &FirstStageSchedule,
    scenario: &Scenario,
    outcome: &SecondStageOutcome,
) -> Result<bool> {
    let combos = (instance.num_irs as f64).powi(instance.len() as i32);
    if combos > 1e6 {
        return Err(Error::SizeGuard(format!(
            "assignment enumeration limited to 1e6 assignments, got {} IRs^{} patients",
            instance.num_irs,
            instance.len()
        )));
    }
    check_inputs(instance, schedule, scenario)?;
    let n = instance.len();
    let k = instance.num_irs;
    let total = k.pow(n as u32);
    let mut assignment = vec![0; n];
    let tol = 1e-9 * outcome.metrics.cost.abs().max(1.0);
    for code in 0..total {
        let mut c = code;
        for slot in assignment.iter_mut() {
            *slot = c % k;
            c /= k;
        }
        let alt = timeline(instance, schedule, scenario, &assignment);
        if alt.metrics.cost < outcome.metrics.cost - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{CostWeights, Patient};
    use proptest::prelude::*;

    fn inst(or_ids: &[usize], irs: usize, ors: usize, w: CostWeights) -> Instance {
        Instance {
            patients: or_ids.iter().enumerate().map(|(i, &r)| Patient { id: i, acuity: 1, or_id: r }).collect(),
            num_irs: irs,
            num_ors: ors,
            weights: w,
            big_m: 1000.0,
            appointment_horizon: 100,
        }
    }

    #[test]
    fn single_patient_timeline() {
        let i = inst(&[0], 1, 1, CostWeights::baseline());
        let sched = FirstStageSchedule { appointments: vec![0], order: vec![0] };
        let s = Scenario::new(vec![10.0], vec![20.0], vec![15.0], 1.0);
        let out = evaluate(&i, &sched, &s).unwrap();
        assert_eq!(out.ir_closure, vec![10.0]);
        assert_eq!(out.or_closure, vec![45.0]);
        assert_eq!(out.or_idle, vec![10.0]);
        assert_eq!(out.ir_idle_total, 0.0);
        assert_eq!(out.metrics.wait_total(), 0.0);
    }

    #[test]
    fn serial_examples() {
        let i = inst(&[0], 1, 1, CostWeights::baseline());
        let sched = FirstStageSchedule { appointments: vec![0], order: vec![0] };
        let s = Scenario::new(vec![10.0], vec![20.0], vec![15.0], 1.0);
        let out = evaluate_serial(&i, &sched, &s).unwrap();
        assert_eq!(out.or_closure, vec![45.0]);
        assert_eq!(out.metrics.wait_total(), 0.0);

        let i2 = inst(&[0, 0], 1, 1, CostWeights::baseline());
        let sched2 = FirstStageSchedule { appointments: vec![0, 10], order: vec![0, 1] };
        let s2 = Scenario::new(vec![10.0; 2], vec![10.0; 2], vec![10.0; 2], 1.0);
        let out2 = evaluate_serial(&i2, &sched2, &s2).unwrap();
        assert_eq!(out2.wait_or[1], 20.0);
    }

    #[test]
    fn mismatched_scenario_is_rejected() {
        let i = inst(&[0, 0], 1, 1, CostWeights::baseline());
        let sched = FirstStageSchedule { appointments: vec![0, 0], order: vec![0, 1] };
        let s = Scenario::new(vec![10.0], vec![20.0], vec![15.0], 1.0);
        assert!(evaluate(&i, &sched, &s).is_err());
    }

    #[test]
    fn one_ir_is_trivially_optimal() {
        let i = inst(&[0, 1, 0], 1, 2, CostWeights::baseline());
        let sched = FirstStageSchedule { appointments: vec![0, 5, 9], order: vec![0, 1, 2] };
        let s = Scenario::new(vec![10.0, 12.0, 8.0], vec![30.0, 20.0, 25.0], vec![15.0, 20.0, 18.0], 1.0);
        let out = evaluate(&i, &sched, &s).unwrap();
        assert!(check_assignment_optimality(&i, &sched, &s, &out).unwrap());
    }

    #[test]
    fn size_guard_on_enumeration() {
        let i = inst(&[0; 21], 2, 1, CostWeights::baseline());
        let sched = FirstStageSchedule { appointments: vec![0; 21], order: (0..21).collect() };
        let s = Scenario::new(vec![1.0; 21], vec![1.0; 21], vec![1.0; 21], 1.0);
        let out = evaluate(&i, &sched, &s).unwrap();
        assert!(matches!(check_assignment_optimality(&i, &sched, &s, &out), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn first_available_can_be_suboptimal() {
        // IR idle time is counted from time zero, so opening the second IR early for patient 7
        // costs more than it saves.
        let i = crate::worked_example::instance();
        let sched = crate::worked_example::schedule();
        let s = crate::worked_example::scenario();
        let fa = evaluate_first_available(&i, &sched, &s).unwrap();
        let ex = evaluate(&i, &sched, &s).unwrap();
        assert!((fa.metrics.cost - 74.75).abs() < 1e-9, "{}", fa.metrics.cost);
        assert!((ex.metrics.cost - 70.5).abs() < 1e-9, "{}", ex.metrics.cost);
        assert!(check_assignment_optimality(&i, &sched, &s, &ex).unwrap());
        assert!(!check_assignment_optimality(&i, &sched, &s, &fa).unwrap());
    }

    fn arb_case() -> impl Strategy<Value = (Instance, FirstStageSchedule, Scenario)> {
        (1usize..=5, 1usize..=2, 1usize..=3).prop_flat_map(|(n, k, r)| {
            (
                proptest::collection::vec(0..r, n),
                proptest::collection::vec(0u32..90, n),
                proptest::collection::vec(1u32..40, n),
                proptest::collection::vec(1u32..80, n),
                proptest::collection::vec(15u32..=30, n),
                (1u32..10, 1u32..10, 1u32..10),
                Just(k),
                Just(r),
            )
                .prop_map(|(ors, appts, e, d, q, (ci, cj, cw), k, r)| {
                    let w = crate::domain::normalize_weights([ci as f64, cj as f64, cw as f64]).unwrap();
                    let mut i = inst(&ors, k, r, w);
                    i.appointment_horizon = 100;
                    let f = |v: Vec<u32>| v.into_iter().map(f64::from).collect::<Vec<_>>();
                    let n = ors.len();
                    let sched = FirstStageSchedule::from_appointments(appts, &vec![0.0; n]);
                    (i, sched, Scenario::new(f(e), f(d), f(q), 1.0))
                })
        })
    }

    proptest! {
        #[test]
        fn exact_matches_enumeration((i, sched, s) in arb_case()) {
            let ex = evaluate(&i, &sched, &s).unwrap();
            let fa = evaluate_first_available(&i, &sched, &s).unwrap();
            prop_assert!(ex.metrics.cost <= fa.metrics.cost + 1e-9);
            prop_assert!(check_assignment_optimality(&i, &sched, &s, &ex).unwrap());
        }

        #[test]
        fn timeline_respects_order_and_resources((i, sched, s) in arb_case()) {
            let out = evaluate(&i, &sched, &s).unwrap();
            for w in sched.order.windows(2) {
                prop_assert!(out.induction_start[w[1]] >= out.induction_start[w[0]] - 1e-9);
            }
            for p in 0..i.len() {
                prop_assert!(out.wait_ir[p] >= -1e-9 && out.wait_or[p] >= -1e-9);
                prop_assert!(out.induction_start[p] >= sched.appointments[p] as f64 - 1e-9);
            }
            for r in 0..i.num_ors {
                prop_assert!(out.or_idle[r] >= -1e-9);
            }
            prop_assert!(out.ir_idle_total >= -1e-9);
            prop_assert!((out.metrics.recompute_cost(&i.weights) - out.metrics.cost).abs() < 1e-9);
        }

        #[test]
        fn spread_appointments_never_wait((i, _sched, s) in arb_case()) {
            // Each patient arrives after everything before it has finished.
            let n = i.len();
            let mut t = 0.0;
            let mut appts = Vec::new();
            for p in 0..n {
                appts.push(t as u32);
                t += (s.induction[p] + s.surgery[p] + s.turnover[p]).ceil();
            }
            let sched = FirstStageSchedule { appointments: appts, order: (0..n).collect() };
            let out = evaluate(&i, &sched, &s).unwrap();
            prop_assert!(out.metrics.wait_total().abs() < 1e-9);
        }

        #[test]
        fn duplicated_scenarios_change_nothing((i, sched, s) in arb_case()) {
            let one = evaluate_expected(&i, &sched, &ScenarioSet::single(s.clone())).unwrap();
            let two = evaluate_expected(&i, &sched, &ScenarioSet::uniform(vec![s.clone(), s], 0)).unwrap();
            prop_assert!((one.cost - two.cost).abs() < 1e-9);
        }

        #[test]
        fn serial_wait_never_exceeds_parallel_with_one_ir_per_or((i, sched, s) in arb_case()) {
            // With a single OR, parallel induction can only move surgery earlier than serial.
            let mut single = i.clone();
            for p in &mut single.patients {
                p.or_id = 0;
            }
            single.num_ors = 1;
            let par = evaluate(&single, &sched, &s).unwrap();
            let ser = evaluate_serial(&single, &sched, &s).unwrap();
            prop_assert!(par.or_closure[0] <= ser.or_closure[0] + 1e-9);
        }
    }

    #[test]
    fn gantt_svg_parses_back() {
        let i = crate::worked_example::instance();
        let sched = crate::worked_example::schedule();
        let s = crate::worked_example::scenario();
        let out = evaluate(&i, &sched, &s).unwrap();
        let svg = gantt_svg(&i, &out, &s);
        let attr = |line: &str, name: &str| -> String {
            let key = format!("{name}=\"");
            let start = line.find(&key).unwrap() + key.len();
            line[start..].split('"').next().unwrap().to_string()
        };
        let mut seen = 0;
        for line in svg.lines().filter(|l| l.starts_with("<rect")) {
            let p: usize = attr(line, "data-patient").parse::<usize>().unwrap() - 1;
            let start: f64 = attr(line, "data-start").parse().unwrap();
            let end: f64 = attr(line, "data-end").parse().unwrap();
            match attr(line, "class").as_str() {
                "induction" => {
                    assert_eq!(attr(line, "data-row"), format!("IR{}", out.ir_assignment[p] + 1));
                    assert_eq!(start, out.induction_start[p]);
                    assert_eq!(end, out.induction_start[p] + s.induction[p]);
                }
                "surgery" => {
                    assert_eq!(attr(line, "data-row"), format!("OR{}", i.patients[p].or_id + 1));
                    assert_eq!(start, out.surgery_start[p]);
                }
                "turnover" => assert_eq!(end, out.surgery_start[p] + s.or_time(p)),
                other => panic!("unexpected bar {other}"),
            }
            seen += 1;
        }
        assert_eq!(seen, 3 * i.len());
        assert!(gantt_text(&i, &out, &s).lines().count() == 3 * i.len() + 1);
    }
}
