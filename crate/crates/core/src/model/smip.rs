use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ConstraintSense as S, MipDescription, VarKind};
use crate::domain::{compute_big_m, FirstStageSchedule, Instance};
use crate::error::{Error, Result};
use crate::scenario::{Scenario, ScenarioSet};

const INF: f64 = f64::INFINITY;

/// Big-M for a block: derived from the scenarios it describes.
pub fn model_big_m(instance: &Instance, set: &ScenarioSet) -> Result<f64> {
    compute_big_m(instance, set)
}

struct FirstStage {
    a: Vec<usize>,
    /// `u[i][j]`, `None` on the diagonal.
    u: Vec<Vec<Option<usize>>>,
}

impl FirstStage {
    fn u(&self, i: usize, j: usize) -> usize {
        self.u[i][j].expect("precedence variable declared")
    }
}

fn add_first_stage(desc: &mut MipDescription, instance: &Instance) -> FirstStage {
    let n = instance.len();
    let horizon = instance.appointment_horizon as f64;
    let a: Vec<usize> = (0..n).map(|i| desc.add_var(format!("a_{i}"), VarKind::Integer, 0.0, horizon)).collect();
    let mut u = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                u[i][j] = Some(desc.add_var(format!("u_{i}_{j}"), VarKind::Binary, 0.0, 1.0));
            }
        }
    }
    let fs = FirstStage { a, u };
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // a_j >= a_i - H (1 - u_ij)
            desc.add_constraint(vec![(fs.a[j], 1.0), (fs.a[i], -1.0), (fs.u(i, j), -horizon)], S::Ge, -horizon);
            if i < j {
                desc.add_constraint(vec![(fs.u(i, j), 1.0), (fs.u(j, i), 1.0)], S::Eq, 1.0);
            }
        }
    }
    fs
}

/// Adds one scenario's second-stage block and returns its unweighted cost terms.
fn add_block(
    desc: &mut MipDescription,
    instance: &Instance,
    s: &Scenario,
    w: usize,
    fs: &FirstStage,
    m: f64,
    valid_inequalities: bool,
) -> Vec<(usize, f64)> {
    let n = instance.len();
    let kk = instance.num_irs;
    let rr = instance.num_ors;
    let y: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..kk).map(|k| desc.add_var(format!("y_{w}_{i}_{k}"), VarKind::Binary, 0.0, 1.0)).collect())
        .collect();
    let yw: Vec<usize> = (0..n).map(|i| desc.add_var(format!("Y_{w}_{i}"), VarKind::Continuous, 0.0, INF)).collect();
    let ww: Vec<usize> = (0..n).map(|i| desc.add_var(format!("W_{w}_{i}"), VarKind::Continuous, 0.0, INF)).collect();
    let st: Vec<usize> = (0..n).map(|i| desc.add_var(format!("A_{w}_{i}"), VarKind::Continuous, 0.0, INF)).collect();
    let f: Vec<usize> = (0..rr).map(|r| desc.add_var(format!("F_{w}_{r}"), VarKind::Continuous, 0.0, INF)).collect();
    let idle: Vec<usize> = (0..rr).map(|r| desc.add_var(format!("I_{w}_{r}"), VarKind::Continuous, 0.0, INF)).collect();
    let g: Vec<usize> = (0..kk).map(|k| desc.add_var(format!("G_{w}_{k}"), VarKind::Continuous, 0.0, INF)).collect();
    let jv = desc.add_var(format!("J_{w}"), VarKind::Continuous, 0.0, INF);

    for i in 0..n {
        desc.add_constraint(y[i].iter().map(|&v| (v, 1.0)).collect(), S::Eq, 1.0);
        // A_i = a_i + Y_i + e_i + W_i
        desc.add_constraint(vec![(st[i], 1.0), (fs.a[i], -1.0), (yw[i], -1.0), (ww[i], -1.0)], S::Eq, s.induction[i]);
        let r = instance.patients[i].or_id;
        desc.add_constraint(vec![(f[r], 1.0), (st[i], -1.0)], S::Ge, s.or_time(i));
        for k in 0..kk {
            desc.add_constraint(vec![(g[k], 1.0), (st[i], -1.0), (y[i][k], -m)], S::Ge, -m);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let u = fs.u(i, j);
            // Induction starts follow the order.
            desc.add_constraint(vec![(fs.a[j], 1.0), (yw[j], 1.0), (fs.a[i], -1.0), (yw[i], -1.0), (u, -m)], S::Ge, -m);
            // A later patient in the same IR starts induction after the earlier one enters its OR.
            for k in 0..kk {
                desc.add_constraint(
                    vec![(fs.a[j], 1.0), (yw[j], 1.0), (st[i], -1.0), (u, -m), (y[i][k], -m), (y[j][k], -m)],
                    S::Ge,
                    -3.0 * m,
                );
            }
            if instance.same_or(i, j) {
                desc.add_constraint(
                    vec![(fs.a[j], 1.0), (yw[j], 1.0), (fs.a[i], -1.0), (yw[i], -1.0), (u, -m)],
                    S::Ge,
                    s.induction[i] - m,
                );
                desc.add_constraint(vec![(st[j], 1.0), (st[i], -1.0), (u, -m)], S::Ge, s.or_time(i) - m);
            }
        }
    }
    for r in 0..rr {
        let busy: f64 = instance.or_members(r).iter().map(|&i| s.or_time(i)).sum();
        desc.add_constraint(vec![(idle[r], 1.0), (f[r], -1.0)], S::Eq, -busy);
    }
    let mut jrow: Vec<(usize, f64)> = vec![(jv, 1.0)];
    jrow.extend(g.iter().map(|&v| (v, -1.0)));
    desc.add_constraint(jrow, S::Eq, -s.induction.iter().sum::<f64>());

    // Implied by the rows above; they only tighten the relaxation.
    for i in 0..n {
        let r = instance.patients[i].or_id;
        let mut row = vec![(f[r], 1.0), (st[i], -1.0)];
        for &j in &instance.or_members(r) {
            if j != i {
                row.push((fs.u(i, j), -s.or_time(j)));
            }
        }
        desc.add_constraint(row, S::Ge, s.or_time(i));
    }
    let mut occupancy = vec![(jv, 1.0)];
    occupancy.extend(ww.iter().map(|&v| (v, -1.0)));
    desc.add_constraint(occupancy, S::Ge, 0.0);

    if valid_inequalities {
        for j in 0..n {
            let mut row = vec![(ww[j], 1.0)];
            for &i in &instance.or_members(instance.patients[j].or_id) {
                if i != j {
                    row.push((fs.u(i, j), -s.or_time(i)));
                }
            }
            desc.add_constraint(row, S::Le, 0.0);
        }
        for k in 1..kk {
            desc.add_constraint(vec![(g[k - 1], 1.0), (g[k], -1.0)], S::Ge, 0.0);
        }
    }

    let wt = instance.weights;
    let mut cost = vec![(jv, wt.c_j)];
    cost.extend(idle.iter().map(|&v| (v, wt.c_i)));
    cost.extend(yw.iter().chain(&ww).map(|&v| (v, wt.c_w)));
    cost
}

fn check_set(instance: &Instance, set: &ScenarioSet) -> Result<()> {
    set.validate(instance.len())
}

/// Deterministic equivalent over all scenarios with shared first-stage variables.
pub fn build_extensive_form(instance: &Instance, set: &ScenarioSet, valid_inequalities: bool) -> Result<MipDescription> {
    check_set(instance, set)?;
    let mut desc = MipDescription::new();
    let fs = add_first_stage(&mut desc, instance);
    for (w, s) in set.scenarios.iter().enumerate() {
        let m = model_big_m(instance, &ScenarioSet::single(s.clone()))?;
        for (v, c) in add_block(&mut desc, instance, s, w, &fs, m, valid_inequalities) {
            desc.add_objective_term(v, s.probability * c);
        }
    }
    Ok(desc)
}

/// Extensive form of the single mean scenario.
pub fn build_mean_value(instance: &Instance, mean: &Scenario, valid_inequalities: bool) -> Result<MipDescription> {
    let mut mean = mean.clone();
    mean.probability = 1.0;
    build_extensive_form(instance, &ScenarioSet::single(mean), valid_inequalities)
}

/// Tangent of `a^2` at `anchor`, evaluated at `a`.
pub fn tangent(anchor: f64, a: f64) -> f64 {
    2.0 * anchor * a - anchor * anchor
}

/// Per-scenario state carried into a subproblem build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SspContext {
    pub scenario: usize,
    pub mu: Vec<f64>,
    pub rho: f64,
    pub consensus: Vec<f64>,
    /// Tangent anchors per patient.
    pub cuts: Vec<Vec<f64>>,
    pub fixed_orders: BTreeSet<(usize, usize)>,
    pub fixed_appointments: BTreeMap<usize, u32>,
}

impl SspContext {
    pub fn new(scenario: usize, num_patients: usize) -> Self {
        SspContext {
            scenario,
            mu: vec![0.0; num_patients],
            rho: 0.0,
            consensus: vec![0.0; num_patients],
            cuts: vec![Vec::new(); num_patients],
            fixed_orders: BTreeSet::new(),
            fixed_appointments: BTreeMap::new(),
        }
    }

    /// Piecewise-linear underestimate of `a^2` for patient `i`.
    pub fn cut_value(&self, i: usize, a: f64) -> f64 {
        self.cuts[i].iter().map(|&anc| tangent(anc, a)).fold(0.0, f64::max)
    }
}

pub fn add_linearization_cut(ctx: &mut SspContext, patient: usize, anchor: f64) {
    ctx.cuts[patient].push(anchor.max(0.0));
}

pub(crate) fn has_cycle(n: usize, arcs: &BTreeSet<(usize, usize)>) -> bool {
    let mut indeg = vec![0usize; n];
    for &(_, j) in arcs {
        indeg[j] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &(i, j) in arcs.range((v, 0)..(v + 1, 0)) {
            debug_assert_eq!(i, v);
            indeg[j] -= 1;
            if indeg[j] == 0 {
                stack.push(j);
            }
        }
    }
    seen < n
}

/// Single-scenario subproblem with the augmented-Lagrangian objective.
///
/// The quadratic proximal term is replaced by `h_i >= tangent(anchor, a_i)` cuts. The constant
/// `-sum mu_i a_hat_i + rho/2 sum a_hat_i^2` is kept so the objective equals the linearized
/// Lagrangian value.
pub fn build_ssp(instance: &Instance, scenario: &Scenario, ctx: &SspContext, iteration_one: bool) -> Result<MipDescription> {
    let n = instance.len();
    if ctx.mu.len() != n || ctx.consensus.len() != n || ctx.cuts.len() != n {
        return Err(Error::Validation("subproblem context does not match the instance".into()));
    }
    if ctx.rho < 0.0 {
        return Err(Error::Validation(format!("penalty {} is negative", ctx.rho)));
    }
    if ctx.fixed_orders.iter().any(|&(i, j)| i >= n || j >= n || i == j) || has_cycle(n, &ctx.fixed_orders) {
        return Err(Error::Validation("fixed precedences are inconsistent".into()));
    }
    let mut s = scenario.clone();
    s.probability = 1.0;
    let set = ScenarioSet::single(s);
    check_set(instance, &set)?;
    let s = &set.scenarios[0];
    let m = model_big_m(instance, &set)?;
    let mut desc = MipDescription::new();
    let fs = add_first_stage(&mut desc, instance);
    for (v, c) in add_block(&mut desc, instance, s, 0, &fs, m, true) {
        desc.add_objective_term(v, c);
    }
    if !iteration_one {
        let rho = ctx.rho;
        let mut constant = 0.0;
        for i in 0..n {
            let ahat = ctx.consensus[i];
            desc.add_objective_term(fs.a[i], ctx.mu[i] - rho * ahat);
            constant += -ctx.mu[i] * ahat + 0.5 * rho * ahat * ahat;
            if rho > 0.0 {
                let h = desc.add_var(format!("h_{i}"), VarKind::Continuous, 0.0, INF);
                desc.add_objective_term(h, 0.5 * rho);
                for &anc in &ctx.cuts[i] {
                    desc.add_constraint(vec![(h, 1.0), (fs.a[i], -2.0 * anc)], S::Ge, -anc * anc);
                }
            }
        }
        desc.objective.constant = constant;
    }
    for &(i, j) in &ctx.fixed_orders {
        desc.add_constraint(vec![(fs.u(i, j), 1.0)], S::Eq, 1.0);
        desc.add_constraint(vec![(fs.u(j, i), 1.0)], S::Eq, 0.0);
    }
    for (&i, &v) in &ctx.fixed_appointments {
        if i >= n {
            return Err(Error::Validation(format!("fixed appointment for unknown patient {i}")));
        }
        desc.add_constraint(vec![(fs.a[i], 1.0)], S::Eq, v as f64);
    }
    Ok(desc)
}

/// Pins `a` and `u` to a given first stage, leaving the second stage free.
pub fn restrict_first_stage(desc: &mut MipDescription, schedule: &FirstStageSchedule) -> Result<()> {
    let n = schedule.order.len();
    let pos = schedule.positions();
    for i in 0..n {
        let a = desc.var(&format!("a_{i}")).ok_or_else(|| Error::Validation(format!("model has no a_{i}")))?;
        desc.fix(a, schedule.appointments[i] as f64);
        for j in 0..n {
            if i == j {
                continue;
            }
            if let Some(u) = desc.var(&format!("u_{i}_{j}")) {
                desc.fix(u, if pos[i] < pos[j] { 1.0 } else { 0.0 });
            }
        }
    }
    Ok(())
}

/// Second-stage program of one scenario for a fixed first stage.
pub fn build_second_stage(instance: &Instance, scenario: &Scenario, schedule: &FirstStageSchedule) -> Result<MipDescription> {
    schedule.validate(instance)?;
    let ctx = SspContext::new(0, instance.len());
    let mut desc = build_ssp(instance, scenario, &ctx, true)?;
    restrict_first_stage(&mut desc, schedule)?;
    Ok(desc)
}

/// Reads `a_i` and `u_ij` from a solution vector.
pub fn schedule_from_solution(instance: &Instance, desc: &MipDescription, values: &[f64]) -> Result<FirstStageSchedule> {
    let n = instance.len();
    let get = |name: String| -> Result<f64> {
        desc.var(&name).map(|v| values[v]).ok_or_else(|| Error::Validation(format!("model has no {name}")))
    };
    let mut appointments = Vec::with_capacity(n);
    for i in 0..n {
        appointments.push(get(format!("a_{i}"))?.round().max(0.0) as u32);
    }
    let mut preds = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && desc.var(&format!("u_{i}_{j}")).is_some() && get(format!("u_{i}_{j}"))? > 0.5 {
                preds[j] += 1.0;
            }
        }
    }
    Ok(FirstStageSchedule::from_appointments(appointments, &preds))
}

/// Serial-processing program: per OR, patients run induction, surgery and turnover back to back.
///
/// Only same-OR precedences are modelled; the cost is `c_I * OR idle + c_W * wait`.
pub fn build_serial(instance: &Instance, set: &ScenarioSet) -> Result<MipDescription> {
    check_set(instance, set)?;
    let n = instance.len();
    let horizon = instance.appointment_horizon as f64;
    let m = model_big_m(instance, set)?;
    let mut desc = MipDescription::new();
    let a: Vec<usize> = (0..n).map(|i| desc.add_var(format!("a_{i}"), VarKind::Integer, 0.0, horizon)).collect();
    let mut u = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && instance.same_or(i, j) {
                u[i][j] = Some(desc.add_var(format!("u_{i}_{j}"), VarKind::Binary, 0.0, 1.0));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if let Some(uij) = u[i][j] {
                desc.add_constraint(vec![(a[j], 1.0), (a[i], -1.0), (uij, -horizon)], S::Ge, -horizon);
                if i < j {
                    desc.add_constraint(vec![(uij, 1.0), (u[j][i].expect("symmetric"), 1.0)], S::Eq, 1.0);
                }
            }
        }
    }
    let wt = instance.weights;
    for (w, s) in set.scenarios.iter().enumerate() {
        let st: Vec<usize> = (0..n).map(|i| desc.add_var(format!("S_{w}_{i}"), VarKind::Continuous, 0.0, INF)).collect();
        let wait: Vec<usize> = (0..n).map(|i| desc.add_var(format!("W_{w}_{i}"), VarKind::Continuous, 0.0, INF)).collect();
        for i in 0..n {
            desc.add_constraint(vec![(wait[i], 1.0), (st[i], -1.0), (a[i], 1.0)], S::Eq, 0.0);
            desc.add_objective_term(wait[i], s.probability * wt.c_w);
            for j in 0..n {
                if let Some(uij) = u[i][j] {
                    desc.add_constraint(vec![(st[j], 1.0), (st[i], -1.0), (uij, -m)], S::Ge, s.occupancy(i) - m);
                }
            }
        }
        for r in 0..instance.num_ors {
            let f = desc.add_var(format!("F_{w}_{r}"), VarKind::Continuous, 0.0, INF);
            let idle = desc.add_var(format!("I_{w}_{r}"), VarKind::Continuous, 0.0, INF);
            let members = instance.or_members(r);
            for &i in &members {
                desc.add_constraint(vec![(f, 1.0), (st[i], -1.0)], S::Ge, s.occupancy(i));
            }
            let busy: f64 = members.iter().map(|&i| s.occupancy(i)).sum();
            desc.add_constraint(vec![(idle, 1.0), (f, -1.0)], S::Eq, -busy);
            desc.add_objective_term(idle, s.probability * wt.c_i);
        }
    }
    Ok(desc)
}

/// First stage of a serial solution; patients in different ORs are ordered by appointment.
pub fn serial_schedule_from_solution(
    instance: &Instance,
    desc: &MipDescription,
    values: &[f64],
) -> Result<FirstStageSchedule> {
    schedule_from_solution(instance, desc, values)
}
