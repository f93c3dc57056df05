//! Instance generation, method dispatch and the report-producing experiment drivers.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{normalize_weights, AcuityClass, CostWeights, FirstStageSchedule, Instance, Metrics, Patient};
use crate::error::{Error, Result};
use crate::heuristics::{hedged_schedule, percentile_estimates, sequence, SequencingRule};
use crate::model::{build_extensive_form, build_mean_value, build_serial, schedule_from_solution, serial_schedule_from_solution};
use crate::pha::{run_epha, PhaConfig};
use crate::scenario::{mean_scenario, sample_scenarios, scale_turnover, ScenarioSet, TURNOVER_MAX, TURNOVER_MIN};
use crate::simulate::{evaluate_expected, evaluate_expected_serial};
use crate::solver::{brute_force_exact, solve_by_orders, solve_required, HighsBackend, MipBackend, SolveOptions, SolveStatus};

/// Raw unit-cost ratios (c_I, c_J, c_W) of the published weight study, before normalization.
pub const WEIGHT_STUDY_RATIOS: [[f64; 3]; 12] = [
    [10.0, 1.0, 1.0],
    [2.0, 1.0, 1.0],
    [10.0, 10.0, 1.0],
    [10.0, 1.0, 10.0],
    [2.0, 2.0, 1.0],
    [2.0, 1.0, 2.0],
    [1.0, 2.0, 1.0],
    [1.0, 1.0, 2.0],
    [1.0, 2.0, 2.0],
    [1.0, 10.0, 1.0],
    [1.0, 1.0, 10.0],
    [1.0, 10.0, 10.0],
];

pub fn weight_study_triplets() -> Vec<CostWeights> {
    WEIGHT_STUDY_RATIOS.iter().map(|r| normalize_weights(*r).expect("positive ratios")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    pub num_patients: usize,
    pub num_irs: usize,
    pub num_ors: usize,
    pub num_scenarios: usize,
    pub weights: CostWeights,
    /// Overrides the load-based appointment horizon.
    pub horizon: Option<u32>,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            num_patients: 7,
            num_irs: 2,
            num_ors: 3,
            num_scenarios: 50,
            weights: CostWeights::baseline(),
            horizon: None,
        }
    }
}

/// An instance with its scenario sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub id: String,
    pub seed: u64,
    pub instance: Instance,
    pub scenarios: ScenarioSet,
}

/// Acuities drawn proportionally to class weights; OR pre-assignment by shuffled round robin.
pub fn generate_instance(params: &GeneratorParams, classes: &[AcuityClass], seed: u64) -> Result<Instance> {
    if params.num_patients == 0 || params.num_irs == 0 || params.num_ors == 0 {
        return Err(Error::Validation("patients, IRs and ORs must all be at least 1".into()));
    }
    if classes.is_empty() {
        return Err(Error::Validation("no acuity classes".into()));
    }
    let weights: Vec<f64> = classes.iter().map(|c| c.count_weight).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::Validation(format!("class weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let acuities: Vec<u32> = (0..params.num_patients).map(|_| classes[dist.sample(&mut rng)].id).collect();
    let mut slots: Vec<usize> = (0..params.num_patients).collect();
    slots.shuffle(&mut rng);
    let mut or_of = vec![0; params.num_patients];
    for (k, &i) in slots.iter().enumerate() {
        or_of[i] = k % params.num_ors;
    }
    let patients: Vec<Patient> =
        (0..params.num_patients).map(|id| Patient { id, acuity: acuities[id], or_id: or_of[id] }).collect();
    let mean_turnover = 0.5 * (TURNOVER_MIN + TURNOVER_MAX);
    let load: f64 = patients
        .iter()
        .map(|p| {
            let c = classes.iter().find(|c| c.id == p.acuity).expect("sampled from classes");
            c.induction_moments.mean + c.surgery_moments.mean + mean_turnover
        })
        .sum();
    let horizon = params.horizon.unwrap_or(load.ceil() as u32);
    let worst: f64 = patients
        .iter()
        .map(|p| {
            let c = classes.iter().find(|c| c.id == p.acuity).expect("sampled from classes");
            let max = |v: &[f64]| v.iter().copied().fold(0.0_f64, f64::max);
            max(&c.induction_pool) + max(&c.surgery_pool) + TURNOVER_MAX
        })
        .sum();
    Ok(Instance {
        patients,
        num_irs: params.num_irs,
        num_ors: params.num_ors,
        weights: params.weights,
        big_m: horizon as f64 + worst,
        appointment_horizon: horizon,
    })
}

/// Scenario seed derived from the instance seed so both streams stay independent.
pub fn scenario_seed(seed: u64) -> u64 {
    seed ^ 0x5CE7_A210_0000_0000
}

pub fn generate_case(params: &GeneratorParams, classes: &[AcuityClass], seed: u64) -> Result<Case> {
    let instance = generate_instance(params, classes, seed)?;
    let scenarios = sample_scenarios(&instance, classes, params.num_scenarios, scenario_seed(seed))?;
    Ok(Case { id: format!("inst-{seed:03}"), seed, instance, scenarios })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    Epha,
    Exact,
    Brute { grid_step: u32 },
    Heuristic { rule: SequencingRule, percentile: u32 },
    MeanValue,
    Serial,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Epha => f.write_str("epha"),
            Method::Exact => f.write_str("exact"),
            Method::Brute { grid_step } => write!(f, "brute-{grid_step}"),
            Method::Heuristic { rule, percentile } => write!(f, "{rule}-{percentile}"),
            Method::MeanValue => f.write_str("mean-value"),
            Method::Serial => f.write_str("serial"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts `epha`, `exact`, `brute[:STEP]`, `heuristic:RULE:PCT` (or `RULE-PCT`),
    /// `mean-value` and `serial`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let parts: Vec<&str> = lower.split([':', '-']).collect();
        let bad = || Error::Validation(format!("unknown method `{s}`"));
        match parts.as_slice() {
            ["epha"] => Ok(Method::Epha),
            ["exact"] => Ok(Method::Exact),
            ["brute"] => Ok(Method::Brute { grid_step: 1 }),
            ["brute", step] => Ok(Method::Brute { grid_step: step.parse().map_err(|_| bad())? }),
            ["mean", "value"] | ["meanvalue"] | ["mv"] => Ok(Method::MeanValue),
            ["serial"] => Ok(Method::Serial),
            ["heuristic", rule, pct] | [rule, pct] => {
                let rule: SequencingRule = rule.parse()?;
                let percentile: u32 = pct.parse().map_err(|_| bad())?;
                if percentile == 0 || percentile > 100 {
                    return Err(bad());
                }
                Ok(Method::Heuristic { rule, percentile })
            }
            _ => Err(bad()),
        }
    }
}

/// Everything a method needs besides the case itself.
pub struct Runner {
    pub backend: Box<dyn MipBackend>,
    pub solve: SolveOptions,
    pub pha: PhaConfig,
    pub classes: Vec<AcuityClass>,
    /// Directory for EPHA traces.
    pub trace_dir: Option<PathBuf>,
}

impl Runner {
    pub fn new(classes: Vec<AcuityClass>) -> Self {
        Runner {
            backend: Box::new(HighsBackend),
            solve: SolveOptions::default(),
            pha: PhaConfig::default(),
            classes,
            trace_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub schedule: FirstStageSchedule,
    /// Evaluated by the simulator, never taken from a solver objective.
    pub metrics: Metrics,
    pub serial: bool,
    pub iterations: Option<usize>,
    /// Solver objective and bound when a MIP was solved.
    pub solver_objective: Option<f64>,
    pub solver_bound: Option<f64>,
    pub proven_optimal: bool,
    pub wall_time_s: f64,
}

pub fn run_method(runner: &Runner, case: &Case, method: Method) -> Result<MethodResult> {
    let start = Instant::now();
    let inst = &case.instance;
    let set = &case.scenarios;
    let mut out = MethodResult {
        method,
        schedule: FirstStageSchedule { appointments: Vec::new(), order: Vec::new() },
        metrics: Metrics::zero(inst.num_ors, inst.num_irs),
        serial: false,
        iterations: None,
        solver_objective: None,
        solver_bound: None,
        proven_optimal: false,
        wall_time_s: 0.0,
    };
    match method {
        Method::Epha => {
            let trace = runner.trace_dir.as_ref().map(|d| d.join(format!("{}.jsonl", case.id)));
            if let Some(d) = &runner.trace_dir {
                std::fs::create_dir_all(d)?;
            }
            let res = run_epha(inst, set, &runner.pha, runner.backend.as_ref(), &runner.solve, trace.as_deref())?;
            out.schedule = res.schedule;
            out.iterations = Some(res.iterations);
        }
        Method::Exact if inst.len() <= ORDER_SEARCH_MAX => {
            let res = solve_by_orders(inst, set, runner.backend.as_ref(), &runner.solve, true)?;
            out.schedule = res.schedule;
            out.solver_objective = Some(res.objective);
            out.proven_optimal = res.status == SolveStatus::Optimal;
            out.solver_bound = out.proven_optimal.then_some(res.objective);
        }
        Method::Exact | Method::MeanValue | Method::Serial => {
            let desc = match method {
                Method::Exact => build_extensive_form(inst, set, true)?,
                Method::MeanValue => build_mean_value(inst, &mean_scenario(set)?, true)?,
                _ => build_serial(inst, set)?,
            };
            let res = solve_required(runner.backend.as_ref(), &desc, &runner.solve)?;
            out.schedule = if method == Method::Serial {
                serial_schedule_from_solution(inst, &desc, &res.values)?
            } else {
                schedule_from_solution(inst, &desc, &res.values)?
            };
            out.serial = method == Method::Serial;
            out.solver_objective = Some(res.objective);
            out.solver_bound = res.bound;
            out.proven_optimal = res.status == SolveStatus::Optimal;
        }
        Method::Brute { grid_step } => {
            let res = brute_force_exact(inst, set, grid_step, inst.appointment_horizon)?;
            out.schedule = res.schedule;
            out.proven_optimal = true;
        }
        Method::Heuristic { rule, percentile } => {
            let order = sequence(inst, &runner.classes, rule)?;
            let table = percentile_estimates(&runner.classes, percentile)?;
            out.schedule = hedged_schedule(inst, &order, &table)?;
        }
    }
    out.metrics = if out.serial {
        evaluate_expected_serial(inst, &out.schedule, set)?
    } else {
        evaluate_expected(inst, &out.schedule, set)?
    };
    out.wall_time_s = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Largest instance for which `exact` enumerates patient orders instead of solving one monolithic MIP.
pub const ORDER_SEARCH_MAX: usize = 6;

/// Best hedged heuristic over every rule and percentile.
pub fn best_heuristic(runner: &Runner, case: &Case, rules: &[SequencingRule]) -> Result<MethodResult> {
    let mut best: Option<MethodResult> = None;
    for &rule in rules {
        for percentile in crate::heuristics::PERCENTILES {
            let r = run_method(runner, case, Method::Heuristic { rule, percentile })?;
            if best.as_ref().is_none_or(|b| r.metrics.cost < b.metrics.cost) {
                best = Some(r);
            }
        }
    }
    best.ok_or_else(|| Error::Validation("no heuristic rules given".into()))
}

/// One line of `report.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: String,
    pub method: String,
    pub num_irs: usize,
    pub objective: f64,
    pub or_idle: f64,
    pub ir_idle: f64,
    pub wait_ir: f64,
    pub wait_or: f64,
    pub wait_total: f64,
    pub or_closures: String,
    pub ir_closures: String,
    pub iterations: Option<usize>,
    /// Schedule file relative to the run directory.
    pub schedule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub instance: String,
    pub method: String,
    pub wall_time_s: f64,
}

/// Stored next to each report row so its objective can be recomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub method: String,
    pub serial: bool,
    pub instance: Instance,
    /// Scenario file relative to the run directory.
    pub scenarios: String,
    pub schedule: FirstStageSchedule,
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// A run directory holding inputs, schedules and CSV reports.
pub struct Workspace {
    pub root: PathBuf,
    rows: Vec<ReportRow>,
    timings: Vec<TimingRow>,
}

impl Workspace {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        for sub in ["instances", "scenarios", "schedules"] {
            std::fs::create_dir_all(root.join(sub))?;
        }
        Ok(Workspace { root, rows: Vec::new(), timings: Vec::new() })
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    /// Writes `value` as `dir/stem.json`, or `dir/stem-2.json` and so on when the name holds different content.
    fn store<T: Serialize>(&self, dir: &str, stem: &str, value: &T) -> Result<String> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        for k in 1.. {
            let rel = if k == 1 { format!("{dir}/{stem}.json") } else { format!("{dir}/{stem}-{k}.json") };
            let path = self.root.join(&rel);
            match std::fs::read_to_string(&path) {
                Ok(existing) if existing == text => return Ok(rel),
                Ok(_) => continue,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    std::fs::write(&path, text)?;
                    return Ok(rel);
                }
                Err(e) => return Err(e.into()),
            }
        }
        unreachable!()
    }

    /// Writes the scenario set under `tag` and returns its relative path.
    pub fn save_scenarios(&self, tag: &str, set: &ScenarioSet) -> Result<String> {
        self.store("scenarios", tag, set)
    }

    pub fn save_case(&self, case: &Case) -> Result<String> {
        self.store("instances", &case.id, &case.instance)?;
        self.save_scenarios(&case.id, &case.scenarios)
    }

    /// Stores the schedule and appends a report row built from `result`.
    pub fn record(&mut self, tag: &str, instance: &Instance, scenarios_rel: &str, result: &MethodResult) -> Result<ReportRow> {
        let method = result.method.to_string();
        let file = ScheduleFile {
            method: method.clone(),
            serial: result.serial,
            instance: instance.clone(),
            scenarios: scenarios_rel.to_string(),
            schedule: result.schedule.clone(),
        };
        let rel = self.store("schedules", &format!("{tag}-{method}"), &file)?;
        let m = &result.metrics;
        let row = ReportRow {
            instance: tag.to_string(),
            method: method.clone(),
            num_irs: instance.num_irs,
            objective: m.cost,
            or_idle: m.or_idle_total,
            ir_idle: m.ir_idle_total,
            wait_ir: m.wait_ir_total,
            wait_or: m.wait_or_total,
            wait_total: m.wait_total(),
            or_closures: join(&m.or_closures),
            ir_closures: join(&m.ir_closures),
            iterations: result.iterations,
            schedule: rel,
        };
        self.rows.push(row.clone());
        self.timings.push(TimingRow { instance: tag.to_string(), method, wall_time_s: result.wall_time_s });
        Ok(row)
    }

    /// Writes `report.csv` and `timings.csv`.
    pub fn finish(&self) -> Result<()> {
        write_csv(&self.root.join("report.csv"), &self.rows)?;
        write_csv(&self.root.join("timings.csv"), &self.timings)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Recomputes every objective in `report.csv` from the stored schedule and scenario files.
/// Returns the number of rows checked.
pub fn verify_report(root: &Path, tolerance: f64) -> Result<usize> {
    let rows: Vec<ReportRow> = read_csv(&root.join("report.csv"))?;
    for row in &rows {
        let file: ScheduleFile = read_json(&root.join(&row.schedule))?;
        let set: ScenarioSet = read_json(&root.join(&file.scenarios))?;
        let m = if file.serial {
            evaluate_expected_serial(&file.instance, &file.schedule, &set)?
        } else {
            evaluate_expected(&file.instance, &file.schedule, &set)?
        };
        if (m.cost - row.objective).abs() > tolerance {
            return Err(Error::Validation(format!(
                "{} / {}: stored objective {} but re-evaluation gives {}",
                row.instance, row.method, row.objective, m.cost
            )));
        }
    }
    Ok(rows.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VssRow {
    pub instance: String,
    pub method: String,
    pub mv_cost: f64,
    pub sp_cost: f64,
    pub relative_vss: f64,
}

/// Value of the stochastic solution: mean-value schedule against the stochastic one.
pub fn cmd_vss(runner: &Runner, ws: &mut Workspace, case: &Case, stochastic: Method) -> Result<VssRow> {
    let rel = ws.save_case(case)?;
    let mv = run_method(runner, case, Method::MeanValue)?;
    let sp = run_method(runner, case, stochastic)?;
    ws.record(&case.id, &case.instance, &rel, &mv)?;
    ws.record(&case.id, &case.instance, &rel, &sp)?;
    Ok(VssRow {
        instance: case.id.clone(),
        method: stochastic.to_string(),
        mv_cost: mv.metrics.cost,
        sp_cost: sp.metrics.cost,
        relative_vss: (mv.metrics.cost - sp.metrics.cost) / sp.metrics.cost,
    })
}

/// Mean wait and OR closures of one system at one turnover ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialRow {
    pub ratio: f64,
    pub system: String,
    pub mean_wait: f64,
    pub mean_objective: f64,
    pub or_closures: String,
}

/// Serial processing against parallel processing with each IR count in `parallel_irs`, per turnover/induction ratio.
pub fn cmd_compare_serial(
    runner: &Runner,
    ws: &mut Workspace,
    cases: &[Case],
    ratios: &[f64],
    parallel_irs: &[usize],
    parallel: Method,
) -> Result<Vec<SerialRow>> {
    let mut out = Vec::new();
    for &ratio in ratios {
        let systems: Vec<(String, Option<usize>)> = std::iter::once(("serial".to_string(), None))
            .chain(parallel_irs.iter().map(|&k| (format!("parallel-{k}"), Some(k))))
            .collect();
        for (name, irs) in systems {
            let mut wait = 0.0;
            let mut obj = 0.0;
            let mut closures: Vec<f64> = Vec::new();
            for case in cases {
                let scaled = scale_turnover(&case.scenarios, ratio)?;
                let instance = irs.map_or_else(|| case.instance.clone(), |k| case.instance.with_irs(k));
                let c = Case { id: case.id.clone(), seed: case.seed, instance, scenarios: scaled };
                let tag = format!("{}-r{ratio}", case.id);
                let rel = ws.save_scenarios(&tag, &c.scenarios)?;
                let r = run_method(runner, &c, if irs.is_none() { Method::Serial } else { parallel })?;
                ws.record(&format!("{tag}-{name}"), &c.instance, &rel, &r)?;
                wait += r.metrics.wait_total();
                obj += r.metrics.cost;
                closures.resize(r.metrics.or_closures.len().max(closures.len()), 0.0);
                for (acc, v) in closures.iter_mut().zip(&r.metrics.or_closures) {
                    *acc += v;
                }
            }
            let n = cases.len().max(1) as f64;
            closures.iter_mut().for_each(|c| *c /= n);
            out.push(SerialRow {
                ratio,
                system: name,
                mean_wait: wait / n,
                mean_objective: obj / n,
                or_closures: join(&closures),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    #[serde(rename = "c_I")]
    pub c_i: f64,
    #[serde(rename = "c_J")]
    pub c_j: f64,
    #[serde(rename = "c_W")]
    pub c_w: f64,
    pub mean_objective: f64,
    pub mean_or_idle: f64,
    pub mean_ir_idle: f64,
    pub mean_wait: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub pair: String,
    pub pearson: f64,
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub fn cmd_sweep_weights(
    runner: &Runner,
    ws: &mut Workspace,
    cases: &[Case],
    triplets: &[CostWeights],
    method: Method,
) -> Result<(Vec<WeightRow>, Vec<CorrelationRow>)> {
    let mut rows = Vec::new();
    for (t, w) in triplets.iter().enumerate() {
        let mut acc = [0.0; 4];
        for case in cases {
            let rel = ws.save_case(case)?;
            let c = Case { instance: case.instance.with_weights(*w), ..case.clone() };
            let r = run_method(runner, &c, method)?;
            ws.record(&format!("{}-w{t:02}", case.id), &c.instance, &rel, &r)?;
            let m = &r.metrics;
            for (a, v) in acc.iter_mut().zip([m.cost, m.or_idle_total, m.ir_idle_total, m.wait_total()]) {
                *a += v;
            }
        }
        let n = cases.len().max(1) as f64;
        rows.push(WeightRow {
            c_i: w.c_i,
            c_j: w.c_j,
            c_w: w.c_w,
            mean_objective: acc[0] / n,
            mean_or_idle: acc[1] / n,
            mean_ir_idle: acc[2] / n,
            mean_wait: acc[3] / n,
        });
    }
    let col = |f: fn(&WeightRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let (or, ir, wait) = (col(|r| r.mean_or_idle), col(|r| r.mean_ir_idle), col(|r| r.mean_wait));
    let corr = vec![
        CorrelationRow { pair: "or_idle~ir_idle".into(), pearson: pearson(&or, &ir) },
        CorrelationRow { pair: "or_idle~wait".into(), pearson: pearson(&or, &wait) },
        CorrelationRow { pair: "ir_idle~wait".into(), pearson: pearson(&ir, &wait) },
    ];
    Ok((rows, corr))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrRow {
    pub instance: String,
    pub num_irs: usize,
    pub objective: f64,
    pub or_idle: f64,
    pub ir_idle: f64,
    pub wait: f64,
}

pub fn cmd_sweep_irs(
    runner: &Runner,
    ws: &mut Workspace,
    cases: &[Case],
    irs: &[usize],
    method: Method,
) -> Result<Vec<IrRow>> {
    let mut out = Vec::new();
    for case in cases {
        let rel = ws.save_case(case)?;
        for &k in irs {
            let c = Case { instance: case.instance.with_irs(k), ..case.clone() };
            let r = run_method(runner, &c, method)?;
            ws.record(&format!("{}-k{k}", case.id), &c.instance, &rel, &r)?;
            out.push(IrRow {
                instance: case.id.clone(),
                num_irs: k,
                objective: r.metrics.cost,
                or_idle: r.metrics.or_idle_total,
                ir_idle: r.metrics.ir_idle_total,
                wait: r.metrics.wait_total(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::compute_big_m;
    use crate::scenario::{synthesize_pools, urology_moments};

    fn classes() -> Vec<AcuityClass> {
        synthesize_pools(&urology_moments(), 200, 7).unwrap()
    }

    #[test]
    fn baseline_generation_is_deterministic() {
        let c = classes();
        let p = GeneratorParams::default();
        let a = generate_case(&p, &c, 1).unwrap();
        let b = generate_case(&p, &c, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.instance.len(), 7);
        assert_eq!(a.scenarios.len(), 50);
        crate::domain::ensure_valid(&a.instance).unwrap();
        // round robin keeps OR loads within one patient
        let sizes: Vec<usize> = (0..3).map(|r| a.instance.or_members(r).len()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert!(a.instance.big_m >= compute_big_m(&a.instance, &a.scenarios).unwrap());
    }

    #[test]
    fn reused_case_ids_keep_every_row_verifiable() {
        let c = classes();
        let dir = tempfile::tempdir().unwrap();
        let mut ws = Workspace::create(dir.path()).unwrap();
        let runner = Runner::new(c.clone());
        let method: Method = "heuristic:spt:50".parse().unwrap();
        for n in [3, 4, 3] {
            let p = GeneratorParams { num_patients: n, num_scenarios: 2, ..GeneratorParams::default() };
            let case = generate_case(&p, &c, 1).unwrap();
            let rel = ws.save_case(&case).unwrap();
            let res = run_method(&runner, &case, method).unwrap();
            ws.record(&case.id, &case.instance, &rel, &res).unwrap();
        }
        ws.finish().unwrap();
        let schedules: Vec<&str> = ws.rows().iter().map(|r| r.schedule.as_str()).collect();
        assert_eq!(schedules[0], schedules[2]);
        assert_ne!(schedules[0], schedules[1]);
        assert_eq!(verify_report(dir.path(), 1e-6).unwrap(), 3);
    }

    #[test]
    fn acuity_mix_follows_counts() {
        let c = classes();
        let p = GeneratorParams { num_patients: 4000, num_scenarios: 1, ..GeneratorParams::default() };
        let inst = generate_instance(&p, &c, 3).unwrap();
        let share2 = inst.patients.iter().filter(|p| p.acuity == 2).count() as f64 / 4000.0;
        // 640 of 1963 records
        assert!((share2 - 640.0 / 1963.0).abs() < 0.03, "{share2}");
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            Method::Epha,
            Method::Exact,
            Method::Brute { grid_step: 2 },
            Method::Heuristic { rule: SequencingRule::Var, percentile: 70 },
            Method::MeanValue,
            Method::Serial,
        ] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert_eq!(
            "heuristic:spt:90".parse::<Method>().unwrap(),
            Method::Heuristic { rule: SequencingRule::Spt, percentile: 90 }
        );
        assert!("heuristic:spt:0".parse::<Method>().is_err());
        assert!("cplex".parse::<Method>().is_err());
    }

    #[test]
    fn weight_study_has_twelve_normalized_rows() {
        let t = weight_study_triplets();
        assert_eq!(t.len(), 12);
        assert!((t[0].c_i - 0.833).abs() < 1e-3 && (t[0].c_j - 0.083).abs() < 1e-3);
        assert!((t[2].c_w - 0.048).abs() < 1e-3);
        for w in &t {
            assert!((w.c_i + w.c_j + w.c_w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    }
}
