use std::time::Instant;

use highs::{Col, HighsModelStatus, HighsSolutionStatus, RowProblem, Sense};

use super::{dump_if_requested, MipBackend, SolveOptions, SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::model::{ConstraintSense, MipDescription, ObjectiveSense, VarKind};

pub struct HighsBackend;

fn build(model: &MipDescription, fix_integers: Option<&[f64]>) -> (RowProblem, Vec<Col>) {
    let mut obj = vec![0.0; model.variables.len()];
    for &(v, c) in &model.objective.coefficients {
        obj[v] += c;
    }
    if model.objective.sense == ObjectiveSense::Maximize {
        obj.iter_mut().for_each(|c| *c = -*c);
    }
    let mut pb = RowProblem::new();
    let cols: Vec<Col> = model
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let integral = v.kind != VarKind::Continuous;
            match (fix_integers, integral) {
                (Some(x), true) => {
                    let r = x[i].round().clamp(v.lower, v.upper);
                    pb.add_column(obj[i], r..=r)
                }
                (None, true) => pb.add_integer_column(obj[i], v.lower..=v.upper),
                _ => pb.add_column(obj[i], v.lower..=v.upper),
            }
        })
        .collect();
    for c in &model.constraints {
        let row: Vec<(Col, f64)> = c.coefficients.iter().map(|&(v, a)| (cols[v], a)).collect();
        match c.sense {
            ConstraintSense::Le => pb.add_row(..=c.rhs, &row),
            ConstraintSense::Ge => pb.add_row(c.rhs.., &row),
            ConstraintSense::Eq => pb.add_row(c.rhs..=c.rhs, &row),
        }
    }
    (pb, cols)
}

fn configure(pb: RowProblem, opts: &SolveOptions, elapsed: f64, cutoff: Option<f64>) -> highs::Model {
    let mut m = pb.optimise(Sense::Minimise);
    m.make_quiet();
    m.set_option("threads", opts.threads.max(1) as i32);
    m.set_option("mip_rel_gap", opts.gap);
    m.set_option("mip_abs_gap", 1e-7);
    m.set_option("primal_feasibility_tolerance", 1e-9);
    m.set_option("mip_feasibility_tolerance", 1e-9);
    if let Some(t) = opts.time_limit {
        m.set_option("time_limit", (t - elapsed).max(0.01));
    }
    if let Some(c) = cutoff {
        m.set_option("objective_bound", c);
    }
    m
}

/// Re-solves with integers pinned so continuous values are exact for the chosen point.
fn polish(model: &MipDescription, x: &[f64], opts: &SolveOptions, elapsed: f64) -> Option<Vec<f64>> {
    let (pb, _) = build(model, Some(x));
    let solved = configure(pb, opts, elapsed, None).try_solve().ok()?;
    (solved.status() == HighsModelStatus::Optimal).then(|| solved.get_solution().columns().to_vec())
}

impl MipBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, model: &MipDescription, opts: &SolveOptions) -> Result<SolveResult> {
        model.validate()?;
        dump_if_requested(model, opts)?;
        let start = Instant::now();
        let sign = if model.objective.sense == ObjectiveSense::Maximize { -1.0 } else { 1.0 };
        if model.variables.is_empty() {
            return Ok(SolveResult {
                status: SolveStatus::Optimal,
                objective: model.objective.constant,
                values: Vec::new(),
                bound: Some(model.objective.constant),
                wall_time_s: 0.0,
            });
        }
        let (pb, _) = build(model, None);
        let cutoff = opts.cutoff.map(|c| sign * (c - model.objective.constant));
        let solved = configure(pb, opts, 0.0, cutoff)
            .try_solve()
            .map_err(|e| Error::Solver(format!("HiGHS failed: {e:?}")))?;
        let has_point = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let status = match solved.status() {
            HighsModelStatus::Optimal => SolveStatus::Optimal,
            HighsModelStatus::Infeasible if opts.cutoff.is_some() && !has_point => SolveStatus::Cutoff,
            HighsModelStatus::Infeasible => SolveStatus::Infeasible,
            HighsModelStatus::ObjectiveBound if !has_point => SolveStatus::Cutoff,
            HighsModelStatus::ReachedTimeLimit => SolveStatus::TimeLimit,
            HighsModelStatus::ModelEmpty => SolveStatus::Optimal,
            _ if has_point => SolveStatus::Feasible,
            other => return Err(Error::Solver(format!("HiGHS ended with status {other:?}"))),
        };
        let mut values = if has_point { solved.get_solution().columns().to_vec() } else { Vec::new() };
        let is_mip = model.variables.iter().any(|v| v.kind != VarKind::Continuous);
        let bound = if is_mip {
            solved.double_info_value(c"mip_dual_bound").ok().filter(|b| b.is_finite())
        } else {
            (status == SolveStatus::Optimal).then(|| solved.objective_value())
        };
        if is_mip && !values.is_empty() {
            if let Some(p) = polish(model, &values, opts, start.elapsed().as_secs_f64()) {
                values = p;
            }
        }
        let objective =
            if values.is_empty() { f64::INFINITY } else { model.objective_value(&values) };
        Ok(SolveResult {
            status,
            objective,
            values,
            bound: bound.map(|b| sign * b + model.objective.constant),
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knapsack_like() {
        // min -x - 2y  s.t. x + y <= 1.5, x,y binary -> y = 1
        let mut m = MipDescription::new();
        let x = m.add_var("x", VarKind::Binary, 0.0, 1.0);
        let y = m.add_var("y", VarKind::Binary, 0.0, 1.0);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], ConstraintSense::Le, 1.5);
        m.add_objective_term(x, -1.0);
        m.add_objective_term(y, -2.0);
        m.objective.constant = 5.0;
        let r = HighsBackend.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 3.0).abs() < 1e-9);
        assert!((r.values[y] - 1.0).abs() < 1e-9);
        assert!((r.bound.unwrap() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_is_reported() {
        let mut m = MipDescription::new();
        let x = m.add_var("x", VarKind::Integer, 0.0, 3.0);
        m.add_constraint(vec![(x, 1.0)], ConstraintSense::Ge, 4.0);
        let r = HighsBackend.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(!r.has_solution());
    }

    #[test]
    fn dump_writes_lp() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = MipDescription::new();
        let x = m.add_var("x", VarKind::Continuous, 1.0, 2.0);
        m.add_objective_term(x, 1.0);
        let opts = SolveOptions { dump_dir: Some(dir.path().to_path_buf()), ..SolveOptions::default() };
        let r = HighsBackend.solve(&m, &opts).unwrap();
        assert!((r.objective - 1.0).abs() < 1e-12);
        let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
    }
}
