use std::time::{Duration, Instant};

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{dump_if_requested, MipBackend, SolveOptions, SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::model::{ConstraintSense, MipDescription, ObjectiveSense, VarKind};

/// Pure-Rust fallback; slow beyond a handful of binaries.
pub struct MicrolpBackend;

impl MipBackend for MicrolpBackend {
    fn name(&self) -> &'static str {
        "microlp"
    }

    fn solve(&self, model: &MipDescription, opts: &SolveOptions) -> Result<SolveResult> {
        model.validate()?;
        dump_if_requested(model, opts)?;
        let start = Instant::now();
        let dir = match model.objective.sense {
            ObjectiveSense::Minimize => OptimizationDirection::Minimize,
            ObjectiveSense::Maximize => OptimizationDirection::Maximize,
        };
        let mut obj = vec![0.0; model.variables.len()];
        for &(v, c) in &model.objective.coefficients {
            obj[v] += c;
        }
        let mut pb = Problem::new(dir);
        if let Some(t) = opts.time_limit {
            pb.set_time_limit(Duration::from_secs_f64(t.max(0.01)));
        }
        let vars: Vec<_> = model
            .variables
            .iter()
            .zip(&obj)
            .map(|(v, &c)| match v.kind {
                VarKind::Continuous => pb.add_var(c, (v.lower, v.upper)),
                _ => pb.add_integer_var(c, (v.lower.ceil() as i32, v.upper.floor().min(i32::MAX as f64) as i32)),
            })
            .collect();
        for c in &model.constraints {
            let expr: Vec<_> = c.coefficients.iter().map(|&(v, a)| (vars[v], a)).collect();
            let op = match c.sense {
                ConstraintSense::Le => ComparisonOp::Le,
                ConstraintSense::Ge => ComparisonOp::Ge,
                ConstraintSense::Eq => ComparisonOp::Eq,
            };
            pb.add_constraint(expr, op, c.rhs);
        }
        let outcome = match pb.solve() {
            Ok(o) => o,
            Err(microlp::Error::Infeasible) => {
                return Ok(SolveResult {
                    status: SolveStatus::Infeasible,
                    objective: f64::INFINITY,
                    values: Vec::new(),
                    bound: None,
                    wall_time_s: start.elapsed().as_secs_f64(),
                })
            }
            Err(e) => return Err(Error::Solver(format!("microlp failed: {e:?}"))),
        };
        let optimal = outcome.is_optimal();
        let Some(sol) = outcome.solution() else {
            return Err(Error::Solver("microlp stopped without a solution".into()));
        };
        let values: Vec<f64> = vars.iter().map(|&v| sol.var_value_raw(v)).collect();
        let objective = model.objective_value(&values);
        Ok(SolveResult {
            status: if optimal { SolveStatus::Optimal } else { SolveStatus::TimeLimit },
            objective,
            values,
            bound: optimal.then_some(objective),
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }
}
