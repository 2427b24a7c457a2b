//! Checking variable assignments against the model.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{MilpModel, VarKind};
use crate::instance::{ExpandedInstance, NodeIx};
use crate::solution::Solution;

pub const CHECK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `name value`")]
    Malformed { line: usize },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("constraint {name} violated by {slack}")]
    ConstraintViolated { name: String, slack: f64 },
}

/// An assignment that satisfies every row, bound and integrality condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Certified {
    pub objective: f64,
    pub values: Vec<f64>,
}

/// Parses `name value` lines; `#` starts a comment. Unlisted variables are 0.
pub fn parse_assignment(model: &MilpModel, text: &str) -> Result<Vec<f64>, CheckError> {
    let mut values = vec![0.0; model.vars.len()];
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(CheckError::Malformed { line: k + 1 });
        };
        let value: f64 = value.parse().map_err(|_| CheckError::Malformed { line: k + 1 })?;
        let id = model.var(name).ok_or_else(|| CheckError::UnknownVariable(name.to_string()))?;
        values[id] = value;
    }
    Ok(values)
}

pub fn check_assignment(model: &MilpModel, values: &[f64], tol: f64) -> Result<Certified, CheckError> {
    for (v, var) in model.vars.iter().enumerate() {
        let x = values[v];
        let slack = (var.lower - x).max(x - var.upper).max(0.0);
        if slack > tol || !x.is_finite() {
            return Err(CheckError::ConstraintViolated { name: format!("bound:{}", var.name), slack });
        }
        if var.kind == VarKind::Binary {
            let off = (x - x.round()).abs();
            if off > tol {
                return Err(CheckError::ConstraintViolated { name: format!("integrality:{}", var.name), slack: off });
            }
        }
    }
    for row in &model.rows {
        let slack = row.violation(values);
        if slack > tol {
            return Err(CheckError::ConstraintViolated { name: row.name.clone(), slack });
        }
    }
    Ok(Certified { objective: model.objective_value(values), values: values.to_vec() })
}

/// Reads an external solution file and certifies it against every row.
pub fn import_solution(model: &MilpModel, path: impl AsRef<Path>) -> Result<Certified, CheckError> {
    let text = fs::read_to_string(path)?;
    let values = parse_assignment(model, &text)?;
    check_assignment(model, &values, CHECK_TOLERANCE)
}

/// Writes an assignment in the import format, listing nonzero values only.
pub fn format_assignment(model: &MilpModel, values: &[f64]) -> String {
    let mut out = String::new();
    for (v, &x) in values.iter().enumerate() {
        if x != 0.0 {
            out.push_str(&format!("{} {}\n", model.vars[v].name, x));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("node {node} is visited more often than the expansion provides")]
    NotEnoughCopies { node: NodeIx },
    #[error("no expanded arc from {from} to {to}")]
    MissingArc { from: NodeIx, to: NodeIx },
    #[error("MED attached at stop {stop} carries the vehicle over no arc")]
    EmptyMedInterval { stop: usize },
    #[error("variable {0} missing from the model")]
    MissingVariable(String),
}

/// Values of every model variable that encode `sol`: the k-th visit of a
/// base node uses its k-th instance in the expansion.
pub fn assignment_from_solution(
    ex: &ExpandedInstance,
    model: &MilpModel,
    sol: &Solution,
) -> Result<Vec<f64>, TranslateError> {
    let base_n = ex.base().node_count();
    let mut seen = vec![0usize; base_n];
    let mut at = Vec::with_capacity(sol.stops.len());
    for stop in &sol.stops {
        let v = stop.node;
        let u = ex.instance_of(v, seen[v]).ok_or(TranslateError::NotEnoughCopies { node: v })?;
        seen[v] += 1;
        at.push(u);
    }

    let mut values = vec![0.0; model.vars.len()];
    let mut set = |name: String, value: f64| -> Result<(), TranslateError> {
        let id = model.var(&name).ok_or(TranslateError::MissingVariable(name))?;
        values[id] = value;
        Ok(())
    };
    let g = ex.graph();
    for (k, leg) in sol.legs.iter().enumerate() {
        let (i, j) = (at[k], at[k + 1]);
        if g.find_arc(i, j).is_none() {
            return Err(TranslateError::MissingArc { from: i, to: j });
        }
        set(format!("x_{i}_{j}"), 1.0)?;
        if let Some(e) = leg.med {
            let m = at[sol.med_events[e].attach_stop];
            set(format!("y_{i}_{j}_{m}"), 1.0)?;
            set(format!("gam_{i}_{j}_{m}"), leg.induced)?;
        }
    }
    for event in &sol.med_events {
        if event.detach_stop == event.attach_stop {
            return Err(TranslateError::EmptyMedInterval { stop: event.attach_stop });
        }
        let m = at[event.attach_stop];
        set(format!("q_{m}"), 1.0)?;
        set(format!("a_{}_{m}", at[event.detach_stop]), 1.0)?;
    }
    for (k, stop) in sol.stops.iter().enumerate() {
        let u = at[k];
        set(format!("eps_{u}"), stop.departure_energy)?;
        if stop.recharged > 0.0 {
            set(format!("z_{u}"), 1.0)?;
            set(format!("beta_{u}"), stop.recharged)?;
        }
    }
    Ok(values)
}
