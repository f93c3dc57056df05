//! Solver-agnostic MIP descriptions and the builders for the scheduling programs.

mod lp;
mod smip;

pub use lp::write_lp;
pub use smip::{
    add_linearization_cut, build_extensive_form, build_mean_value, build_second_stage, build_serial, build_ssp,
    model_big_m, restrict_first_stage, schedule_from_solution, serial_schedule_from_solution, tangent, SspContext,
};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coefficients: Vec<(usize, f64)>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coefficients.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            ConstraintSense::Le => (lhs - self.rhs).max(0.0),
            ConstraintSense::Ge => (self.rhs - lhs).max(0.0),
            ConstraintSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: ObjectiveSense,
    pub coefficients: Vec<(usize, f64)>,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipDescription {
    pub variables: Vec<Variable>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Objective,
    #[serde(skip)]
    names: HashMap<String, usize>,
}

impl Default for MipDescription {
    fn default() -> Self {
        MipDescription {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective { sense: ObjectiveSense::Minimize, coefficients: Vec::new(), constant: 0.0 },
            names: HashMap::new(),
        }
    }
}

impl MipDescription {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable; binaries get bounds [0, 1].
    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> usize {
        let name = name.into();
        let (lower, upper) = if kind == VarKind::Binary { (lower.max(0.0), upper.min(1.0)) } else { (lower, upper) };
        let idx = self.variables.len();
        assert!(self.names.insert(name.clone(), idx).is_none(), "duplicate variable {name}");
        self.variables.push(Variable { name, kind, lower, upper });
        idx
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        if self.names.len() != self.variables.len() {
            return self.variables.iter().position(|v| v.name == name);
        }
        self.names.get(name).copied()
    }

    pub fn add_constraint(&mut self, coefficients: Vec<(usize, f64)>, sense: ConstraintSense, rhs: f64) {
        let coefficients = coefficients.into_iter().filter(|&(_, c)| c != 0.0).collect();
        self.constraints.push(LinearConstraint { coefficients, sense, rhs });
    }

    pub fn add_objective_term(&mut self, var: usize, coef: f64) {
        if coef != 0.0 {
            self.objective.coefficients.push((var, coef));
        }
    }

    /// Pins a variable by tightening both bounds.
    pub fn fix(&mut self, var: usize, value: f64) {
        self.variables[var].lower = value;
        self.variables[var].upper = value;
    }

    pub fn count(&self, kind: VarKind) -> usize {
        self.variables.iter().filter(|v| v.kind == kind).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.constant + self.objective.coefficients.iter().map(|&(v, c)| c * values[v]).sum::<f64>()
    }

    /// Largest bound, integrality or row violation of a candidate point.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for (v, x) in self.variables.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
            if v.kind != VarKind::Continuous {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for c in &self.constraints {
            worst = worst.max(c.violation(values));
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for v in &self.variables {
            if v.lower > v.upper || v.lower.is_nan() || v.upper.is_nan() {
                return Err(Error::Validation(format!("variable {} has bounds [{}, {}]", v.name, v.lower, v.upper)));
            }
        }
        let refs = self.constraints.iter().flat_map(|c| c.coefficients.iter()).chain(&self.objective.coefficients);
        for &(v, c) in refs {
            if v >= n || !c.is_finite() {
                return Err(Error::Validation(format!("term ({v}, {c}) references an undeclared variable")));
            }
        }
        Ok(())
    }

    /// Rebuilds the name index, e.g. after deserialization.
    pub fn reindex(&mut self) {
        self.names = self.variables.iter().enumerate().map(|(i, v)| (v.name.clone(), i)).collect();
    }
}
