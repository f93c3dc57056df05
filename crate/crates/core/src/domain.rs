//! Shared domain types: patients, instances, first-stage schedules and cost metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::ScenarioSet;

/// Mean and standard deviation of a duration distribution, in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
}

impl Moments {
    pub fn of(sample: &[f64]) -> Moments {
        if sample.is_empty() {
            return Moments { mean: 0.0, sd: 0.0 };
        }
        let n = sample.len() as f64;
        let mean = sample.iter().sum::<f64>() / n;
        let var = if sample.len() > 1 {
            sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Moments { mean, sd: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcuityClass {
    pub id: u32,
    pub label: String,
    /// Relative sampling frequency when drawing patients.
    pub count_weight: f64,
    pub induction_pool: Vec<f64>,
    pub surgery_pool: Vec<f64>,
    pub induction_moments: Moments,
    pub surgery_moments: Moments,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patient {
    pub id: usize,
    pub acuity: u32,
    pub or_id: usize,
}

/// Unit costs of OR idle time, IR idle time and patient waiting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    #[serde(rename = "c_I")]
    pub c_i: f64,
    #[serde(rename = "c_J")]
    pub c_j: f64,
    #[serde(rename = "c_W")]
    pub c_w: f64,
}

impl CostWeights {
    pub fn new(c_i: f64, c_j: f64, c_w: f64) -> Self {
        CostWeights { c_i, c_j, c_w }
    }

    pub fn baseline() -> Self {
        CostWeights::new(0.5, 0.25, 0.25)
    }
}

/// Scales three nonnegative unit costs `(c_I, c_J, c_W)` so they add up to one.
pub fn normalize_weights(raw: [f64; 3]) -> Result<CostWeights> {
    if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Validation(format!("weights must be finite and nonnegative: {raw:?}")));
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::Validation("at least one weight must be positive".into()));
    }
    Ok(CostWeights::new(raw[0] / total, raw[1] / total, raw[2] / total))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub patients: Vec<Patient>,
    pub num_irs: usize,
    pub num_ors: usize,
    pub weights: CostWeights,
    pub big_m: f64,
    /// Upper bound on any appointment time, in minutes.
    pub appointment_horizon: u32,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.patients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patients.is_empty()
    }

    /// Patients pre-assigned to OR `r`, in id order.
    pub fn or_members(&self, r: usize) -> Vec<usize> {
        self.patients.iter().filter(|p| p.or_id == r).map(|p| p.id).collect()
    }

    pub fn same_or(&self, i: usize, j: usize) -> bool {
        self.patients[i].or_id == self.patients[j].or_id
    }

    pub fn with_irs(&self, num_irs: usize) -> Instance {
        Instance { num_irs, ..self.clone() }
    }

    pub fn with_weights(&self, weights: CostWeights) -> Instance {
        Instance { weights, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation { field: field.into(), rule: rule.into() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

pub fn validate_instance(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if instance.num_irs == 0 {
        out.push(Violation::new("num_irs", "must be at least 1"));
    }
    if instance.num_ors == 0 {
        out.push(Violation::new("num_ors", "must be at least 1"));
    }
    for (idx, p) in instance.patients.iter().enumerate() {
        if p.id != idx {
            out.push(Violation::new(format!("patients[{idx}].id"), format!("expected {idx}, found {}", p.id)));
        }
        if p.or_id >= instance.num_ors {
            out.push(Violation::new(
                format!("patients[{idx}].or_id"),
                format!("{} out of range for {} ORs", p.or_id, instance.num_ors),
            ));
        }
    }
    let w = instance.weights;
    for (name, v) in [("c_I", w.c_i), ("c_J", w.c_j), ("c_W", w.c_w)] {
        if !v.is_finite() || v < 0.0 {
            out.push(Violation::new(format!("weights.{name}"), "must be nonnegative"));
        }
    }
    if !instance.big_m.is_finite() || instance.big_m < 0.0 {
        out.push(Violation::new("big_m", "must be finite and nonnegative"));
    }
    out
}

pub fn ensure_valid(instance: &Instance) -> Result<()> {
    let v = validate_instance(instance);
    if v.is_empty() {
        Ok(())
    } else {
        let msgs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        Err(Error::Validation(msgs.join("; ")))
    }
}

/// Sum over patients of the longest per-scenario occupancy `e + d + q`, plus the appointment horizon.
pub fn compute_big_m(instance: &Instance, scenarios: &ScenarioSet) -> Result<f64> {
    if scenarios.scenarios.is_empty() {
        return Err(Error::Validation("scenario set is empty".into()));
    }
    let mut total = instance.appointment_horizon as f64;
    for i in 0..instance.len() {
        let worst = scenarios
            .scenarios
            .iter()
            .map(|s| s.occupancy(i))
            .fold(0.0_f64, f64::max);
        total += worst;
    }
    Ok(total)
}

/// Appointment times and a total order over patients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstStageSchedule {
    pub appointments: Vec<u32>,
    /// Patient ids from first to last.
    pub order: Vec<usize>,
}

impl FirstStageSchedule {
    /// Orders patients by appointment time, breaking ties by `rank` and then by id.
    pub fn from_appointments(appointments: Vec<u32>, rank: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..appointments.len()).collect();
        order.sort_by(|&i, &j| {
            appointments[i]
                .cmp(&appointments[j])
                .then(rank[i].total_cmp(&rank[j]))
                .then(i.cmp(&j))
        });
        FirstStageSchedule { appointments, order }
    }

    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &i) in self.order.iter().enumerate() {
            pos[i] = p;
        }
        pos
    }

    /// `u_ij`: whether `i` precedes `j`.
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        let pos = self.positions();
        pos[i] < pos[j]
    }

    pub fn validate(&self, instance: &Instance) -> Result<()> {
        let n = instance.len();
        if self.appointments.len() != n || self.order.len() != n {
            return Err(Error::Validation(format!(
                "schedule covers {} appointments and {} order entries for {n} patients",
                self.appointments.len(),
                self.order.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in &self.order {
            if i >= n || seen[i] {
                return Err(Error::Validation(format!("order is not a permutation: {:?}", self.order)));
            }
            seen[i] = true;
        }
        for w in self.order.windows(2) {
            if self.appointments[w[0]] > self.appointments[w[1]] {
                return Err(Error::Validation(format!(
                    "patient {} precedes {} but has a later appointment",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub or_idle_total: f64,
    pub ir_idle_total: f64,
    pub wait_ir_total: f64,
    pub wait_or_total: f64,
    pub or_closures: Vec<f64>,
    pub ir_closures: Vec<f64>,
    pub cost: f64,
}

impl Metrics {
    pub fn zero(num_ors: usize, num_irs: usize) -> Self {
        Metrics {
            or_idle_total: 0.0,
            ir_idle_total: 0.0,
            wait_ir_total: 0.0,
            wait_or_total: 0.0,
            or_closures: vec![0.0; num_ors],
            ir_closures: vec![0.0; num_irs],
            cost: 0.0,
        }
    }

    pub fn wait_total(&self) -> f64 {
        self.wait_ir_total + self.wait_or_total
    }

    pub fn recompute_cost(&self, w: &CostWeights) -> f64 {
        w.c_j * self.ir_idle_total + w.c_i * self.or_idle_total + w.c_w * self.wait_total()
    }

    /// Adds `p * other` component-wise.
    pub fn accumulate(&mut self, other: &Metrics, p: f64) {
        self.or_idle_total += p * other.or_idle_total;
        self.ir_idle_total += p * other.ir_idle_total;
        self.wait_ir_total += p * other.wait_ir_total;
        self.wait_or_total += p * other.wait_or_total;
        for (a, b) in self.or_closures.iter_mut().zip(&other.or_closures) {
            *a += p * b;
        }
        for (a, b) in self.ir_closures.iter_mut().zip(&other.ir_closures) {
            *a += p * b;
        }
        self.cost += p * other.cost;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Scenario, ScenarioSet};
    use proptest::prelude::*;

    fn instance(n: usize, irs: usize, ors: usize) -> Instance {
        Instance {
            patients: (0..n).map(|i| Patient { id: i, acuity: 1, or_id: i % ors }).collect(),
            num_irs: irs,
            num_ors: ors,
            weights: CostWeights::baseline(),
            big_m: 1000.0,
            appointment_horizon: 60,
        }
    }

    #[test]
    fn baseline_instance_is_valid() {
        assert!(validate_instance(&instance(7, 2, 3)).is_empty());
    }

    #[test]
    fn out_of_range_or_is_reported() {
        let mut inst = instance(7, 2, 3);
        inst.patients[2].or_id = 5;
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert!(v[0].field.contains("or_id"));
    }

    #[test]
    fn negative_weight_is_reported() {
        let mut inst = instance(3, 1, 1);
        inst.weights = CostWeights::new(-0.1, 0.6, 0.5);
        assert_eq!(validate_instance(&inst).len(), 1);
    }

    #[test]
    fn normalize_examples() {
        let w = normalize_weights([1.0, 1.0, 1.0]).unwrap();
        assert!((w.c_i - 1.0 / 3.0).abs() < 1e-12);
        let w = normalize_weights([10.0, 1.0, 1.0]).unwrap();
        assert!((w.c_i - 0.833).abs() < 5e-4 && (w.c_j - 0.083).abs() < 5e-4 && (w.c_w - 0.083).abs() < 5e-4);
        let w = normalize_weights([2.0, 1.0, 1.0]).unwrap();
        assert_eq!((w.c_i, w.c_j, w.c_w), (0.5, 0.25, 0.25));
        assert!(normalize_weights([0.0, 0.0, 0.0]).is_err());
    }

    fn one_scenario(e: Vec<f64>, d: Vec<f64>, q: Vec<f64>) -> ScenarioSet {
        ScenarioSet::uniform(vec![Scenario::new(e, d, q, 1.0)], 0)
    }

    #[test]
    fn big_m_single_term() {
        let mut inst = instance(1, 1, 1);
        inst.appointment_horizon = 0;
        let set = one_scenario(vec![10.0], vec![20.0], vec![15.0]);
        assert_eq!(compute_big_m(&inst, &set).unwrap(), 45.0);
    }

    #[test]
    fn big_m_additive() {
        let inst = instance(2, 1, 1);
        let set = one_scenario(vec![10.0, 10.0], vec![20.0, 20.0], vec![15.0, 15.0]);
        assert_eq!(compute_big_m(&inst, &set).unwrap(), 150.0);
    }

    #[test]
    fn big_m_rejects_empty_set() {
        let inst = instance(2, 1, 1);
        assert!(compute_big_m(&inst, &ScenarioSet::uniform(vec![], 0)).is_err());
    }

    #[test]
    fn schedule_from_appointments_breaks_ties_by_rank() {
        let s = FirstStageSchedule::from_appointments(vec![5, 0, 5], &[2.0, 0.0, 1.0]);
        assert_eq!(s.order, vec![1, 2, 0]);
        assert!(s.precedes(2, 0));
    }

    proptest! {
        #[test]
        fn normalize_is_scale_invariant_and_idempotent(
            a in 0.0f64..10.0, b in 0.0f64..10.0, c in 0.01f64..10.0, k in 0.01f64..100.0
        ) {
            let w = normalize_weights([a, b, c]).unwrap();
            let wk = normalize_weights([k * a, k * b, k * c]).unwrap();
            prop_assert!((w.c_i - wk.c_i).abs() < 1e-12 && (w.c_j - wk.c_j).abs() < 1e-12);
            let ww = normalize_weights([w.c_i, w.c_j, w.c_w]).unwrap();
            prop_assert!((ww.c_w - w.c_w).abs() < 1e-12);
            prop_assert!((w.c_i + w.c_j + w.c_w - 1.0).abs() < 1e-9);
        }

        #[test]
        fn sorted_schedule_has_nondecreasing_appointments(appts in prop::collection::vec(0u32..50, 1..8)) {
            let rank = vec![0.0; appts.len()];
            let s = FirstStageSchedule::from_appointments(appts.clone(), &rank);
            let seq: Vec<u32> = s.order.iter().map(|&i| s.appointments[i]).collect();
            prop_assert!(seq.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn big_m_is_monotone(base in prop::collection::vec(1.0f64..50.0, 6), bump in 0.0f64..20.0, idx in 0usize..6) {
            let inst = instance(2, 1, 1);
            let set = one_scenario(base[0..2].to_vec(), base[2..4].to_vec(), base[4..6].to_vec());
            let m0 = compute_big_m(&inst, &set).unwrap();
            let mut v = base.clone();
            v[idx] += bump;
            let set2 = one_scenario(v[0..2].to_vec(), v[2..4].to_vec(), v[4..6].to_vec());
            prop_assert!(compute_big_m(&inst, &set2).unwrap() >= m0);
        }
    }
}
