use std::fmt::Write as _;

use super::{ConstraintSense, MipDescription, ObjectiveSense, VarKind};

fn term(out: &mut String, coef: f64, name: &str, first: bool) {
    if coef < 0.0 {
        let _ = write!(out, " - {} {name}", -coef);
    } else if first {
        let _ = write!(out, " {coef} {name}");
    } else {
        let _ = write!(out, " + {coef} {name}");
    }
}

/// Renders the model in CPLEX LP text format.
pub fn write_lp(model: &MipDescription) -> String {
    let names: Vec<&str> = model.variables.iter().map(|v| v.name.as_str()).collect();
    let mut out = String::new();
    out.push_str(match model.objective.sense {
        ObjectiveSense::Minimize => "Minimize\n obj:",
        ObjectiveSense::Maximize => "Maximize\n obj:",
    });
    let mut first = true;
    for &(v, c) in &model.objective.coefficients {
        term(&mut out, c, names[v], first);
        first = false;
    }
    if model.objective.constant != 0.0 || first {
        // LP format has no constant term; a fixed helper column carries it.
        term(&mut out, model.objective.constant, "obj_constant", first);
    }
    out.push_str("\nSubject To\n");
    for (idx, c) in model.constraints.iter().enumerate() {
        let _ = write!(out, " c{idx}:");
        if c.coefficients.is_empty() {
            out.push_str(" 0 obj_constant");
        }
        let mut first = true;
        for &(v, coef) in &c.coefficients {
            term(&mut out, coef, names[v], first);
            first = false;
        }
        let op = match c.sense {
            ConstraintSense::Le => "<=",
            ConstraintSense::Ge => ">=",
            ConstraintSense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs);
    }
    out.push_str("Bounds\n obj_constant = 1\n");
    for v in &model.variables {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) => {
                let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
            }
            (true, false) => {
                let _ = writeln!(out, " {} >= {}", v.name, v.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {} <= {}", v.name, v.upper);
            }
            (false, false) => {
                let _ = writeln!(out, " {} free", v.name);
            }
        }
    }
    let ints: Vec<&str> =
        model.variables.iter().filter(|v| v.kind != VarKind::Continuous).map(|v| v.name.as_str()).collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for chunk in ints.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_sections() {
        let mut m = MipDescription::new();
        let a = m.add_var("a_0", VarKind::Integer, 0.0, 10.0);
        let h = m.add_var("h_0", VarKind::Continuous, 0.0, f64::INFINITY);
        m.add_constraint(vec![(h, 1.0), (a, -20.0)], ConstraintSense::Ge, -100.0);
        m.add_objective_term(h, 0.5);
        let text = write_lp(&m);
        assert!(text.starts_with("Minimize\n obj: 0.5 h_0"));
        assert!(text.contains(" c0: 1 h_0 - 20 a_0 >= -100"));
        assert!(text.contains(" 0 <= a_0 <= 10"));
        assert!(text.contains("General\n a_0\n"));
        assert!(text.ends_with("End\n"));
    }
}
