//! CPLEX LP text output.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use super::{MilpModel, VarId, VarKind};

const WRAP: usize = 100;

fn push_terms(out: &mut String, line: &mut String, model: &MilpModel, terms: &[(VarId, f64)]) {
    for (k, &(v, c)) in terms.iter().enumerate() {
        let sign = if c < 0.0 { "-" } else { "+" };
        let mag = c.abs();
        let term = if mag == 1.0 {
            format!("{sign} {}", model.vars[v].name)
        } else {
            format!("{sign} {mag} {}", model.vars[v].name)
        };
        let term = if k == 0 && c >= 0.0 { term[2..].to_string() } else { term };
        if line.len() + term.len() + 1 > WRAP {
            out.push_str(line.trim_end());
            out.push('\n');
            line.clear();
            line.push_str("   ");
        }
        line.push(' ');
        line.push_str(&term);
    }
}

/// Renders the model. Output depends only on the model, so it is stable
/// across runs.
pub fn to_lp_string(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ EV trip model\n");
    for (i, label) in model.node_labels.iter().enumerate() {
        let _ = writeln!(out, "\\ node {i} = {label}");
    }
    out.push_str("Minimize\n");
    let mut line = String::from(" obj:");
    let objective: Vec<_> = model.objective.iter().copied().filter(|&(_, c)| c != 0.0).collect();
    if objective.is_empty() {
        // An objective needs at least one term.
        if !model.vars.is_empty() {
            let _ = write!(line, " 0 {}", model.vars[0].name);
        }
    } else {
        push_terms(&mut out, &mut line, model, &objective);
    }
    out.push_str(line.trim_end());
    out.push('\n');

    out.push_str("Subject To\n");
    for row in &model.rows {
        let terms: Vec<_> = row.terms.iter().copied().filter(|&(_, c)| c != 0.0).collect();
        if terms.is_empty() {
            let _ = writeln!(out, "\\ {}: empty, {} {}", row.name, row.sense, row.rhs);
            continue;
        }
        let mut line = format!(" {}:", row.name);
        push_terms(&mut out, &mut line, model, &terms);
        let rhs = format!(" {} {}", row.sense, row.rhs);
        if line.len() + rhs.len() > WRAP {
            out.push_str(line.trim_end());
            out.push('\n');
            line = String::from("   ");
        }
        out.push_str(&line);
        out.push_str(&rhs);
        out.push('\n');
    }

    out.push_str("Bounds\n");
    for v in model.vars.iter().filter(|v| v.kind == VarKind::Continuous) {
        if v.upper.is_finite() {
            let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
        } else {
            let _ = writeln!(out, " {} >= {}", v.name, v.lower);
        }
    }
    out.push_str("Binaries\n");
    let mut line = String::new();
    for v in model.vars.iter().filter(|v| v.kind == VarKind::Binary) {
        if line.len() + v.name.len() + 1 > WRAP {
            out.push_str(&line);
            out.push('\n');
            line.clear();
        }
        line.push(' ');
        line.push_str(&v.name);
    }
    if !line.is_empty() {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

pub fn write_lp(model: &MilpModel, path: impl AsRef<Path>) -> io::Result<()> {
    fs::write(path, to_lp_string(model))
}
