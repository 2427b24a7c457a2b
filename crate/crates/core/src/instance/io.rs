//! JSON instance files.
//!
//! ```json
//! {
//!   "nodes": [{"id": 1, "role": "transit"}, {"id": 2, "role": "scs", "wait": 5, "charge_time": 60}],
//!   "arcs": [{"from": 1, "to": 2, "time": 10, "energy": 40}],
//!   "params": {"Q": 500, "rho": 2, "delta": 0.2, "W": 250, "P": 3, "origin": 1, "destination": 2}
//! }
//! ```
//!
//! Unknown keys are accepted and reported through `log::warn!`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{validate_instance, Instance, NodeKey, NodeRole, ValidationError};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing required field {0}")]
    MissingField(&'static str),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

impl From<serde_json::Error> for LoadError {
    fn from(err: serde_json::Error) -> Self {
        LoadError::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

/// An instance candidate, in the shape of the instance file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawInstance {
    pub nodes: Vec<RawNode>,
    pub arcs: Vec<RawArc>,
    pub params: RawParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Value>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawNode {
    pub id: NodeKey,
    pub role: NodeRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wait: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge_time: Option<f64>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawArc {
    pub from: NodeKey,
    pub to: NodeKey,
    pub time: f64,
    pub energy: f64,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl RawArc {
    pub fn new(from: impl Into<NodeKey>, to: impl Into<NodeKey>, time: f64, energy: f64) -> Self {
        RawArc {
            from: from.into(),
            to: to.into(),
            time,
            energy,
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub battery_capacity: Option<f64>,
    #[serde(rename = "rho", default, skip_serializing_if = "Option::is_none")]
    pub induction_rate: Option<f64>,
    #[serde(rename = "delta", default, skip_serializing_if = "Option::is_none")]
    pub slowdown: Option<f64>,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub med_energy_cap: Option<f64>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none", serialize_with = "count_as_integer")]
    pub med_count_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<NodeKey>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub destination: Option<NodeKey>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

// P is a count; keep `3` from coming back as `3.0`.
fn count_as_integer<S: serde::Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.fract() == 0.0 && x.abs() < 9e15 => s.serialize_i64(*x as i64),
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_none(),
    }
}

impl RawInstance {
    /// Starts an in-code instance description with the scalar parameters set.
    pub fn builder(q: f64, rho: f64, delta: f64, w: f64, p: usize) -> RawInstance {
        RawInstance {
            params: RawParams {
                battery_capacity: Some(q),
                induction_rate: Some(rho),
                slowdown: Some(delta),
                med_energy_cap: Some(w),
                med_count_cap: Some(p as f64),
                ..RawParams::default()
            },
            ..RawInstance::default()
        }
    }

    pub fn node(mut self, id: impl Into<NodeKey>, role: NodeRole) -> Self {
        self.nodes.push(RawNode {
            id: id.into(),
            role,
            wait: None,
            charge_time: None,
            extra: BTreeMap::new(),
        });
        self
    }

    /// Adds an SCS node with its wait and full-charge time.
    pub fn scs(mut self, id: impl Into<NodeKey>, wait: f64, charge_time: f64) -> Self {
        self = self.node(id, NodeRole::Scs);
        let node = self.nodes.last_mut().expect("just pushed");
        node.wait = Some(wait);
        node.charge_time = Some(charge_time);
        self
    }

    /// Adds a MED attachment point with its wait time.
    pub fn med(mut self, id: impl Into<NodeKey>, wait: f64) -> Self {
        self = self.node(id, NodeRole::MedPoint);
        self.nodes.last_mut().expect("just pushed").wait = Some(wait);
        self
    }

    pub fn arc(mut self, from: impl Into<NodeKey>, to: impl Into<NodeKey>, time: f64, energy: f64) -> Self {
        self.arcs.push(RawArc::new(from, to, time, energy));
        self
    }

    pub fn trip(mut self, origin: impl Into<NodeKey>, destination: impl Into<NodeKey>) -> Self {
        self.params.origin = Some(origin.into());
        self.params.destination = Some(destination.into());
        self
    }

    pub fn validate(&self) -> Result<Instance, ValidationError> {
        validate_instance(self)
    }

    fn unknown_fields(&self) -> Vec<String> {
        let mut out: Vec<String> = self.extra.keys().cloned().collect();
        out.extend(self.params.extra.keys().map(|k| format!("params.{k}")));
        for node in &self.nodes {
            out.extend(node.extra.keys().map(|k| format!("nodes[{}].{k}", node.id)));
        }
        for arc in &self.arcs {
            out.extend(
                arc.extra
                    .keys()
                    .map(|k| format!("arcs[{}->{}].{k}", arc.from, arc.to)),
            );
        }
        out
    }

    fn check_required(&self) -> Result<(), LoadError> {
        let p = &self.params;
        let required = [
            (p.battery_capacity.is_some(), "battery_capacity (params.Q)"),
            (p.induction_rate.is_some(), "induction_rate (params.rho)"),
            (p.slowdown.is_some(), "slowdown (params.delta)"),
            (p.med_energy_cap.is_some(), "med_energy_cap (params.W)"),
            (p.med_count_cap.is_some(), "med_count_cap (params.P)"),
            (p.origin.is_some(), "origin (params.origin)"),
            (p.destination.is_some(), "destination (params.destination)"),
        ];
        match required.iter().find(|(present, _)| !present) {
            Some((_, name)) => Err(LoadError::MissingField(name)),
            None => Ok(()),
        }
    }
}

impl From<&Instance> for RawInstance {
    fn from(inst: &Instance) -> Self {
        let key = |v: usize| inst.node(v).key.clone();
        let params = inst.params();
        RawInstance {
            nodes: inst
                .nodes()
                .iter()
                .map(|n| RawNode {
                    id: n.key.clone(),
                    role: n.role,
                    wait: (n.wait != 0.0).then_some(n.wait),
                    charge_time: n.charge_time,
                    extra: BTreeMap::new(),
                })
                .collect(),
            arcs: inst
                .arcs()
                .iter()
                .map(|a| RawArc::new(key(a.from), key(a.to), a.time, a.energy))
                .collect(),
            params: RawParams {
                battery_capacity: Some(params.battery_capacity),
                induction_rate: Some(params.induction_rate),
                slowdown: Some(params.slowdown),
                med_energy_cap: Some(params.med_energy_cap),
                med_count_cap: Some(params.med_count_cap as f64),
                origin: Some(key(inst.origin())),
                destination: Some(key(inst.destination())),
                extra: BTreeMap::new(),
            },
            metadata: inst.metadata().cloned(),
            extra: BTreeMap::new(),
        }
    }
}

/// Parses and validates an instance document, returning unknown-field warnings.
pub fn from_json_str(text: &str) -> Result<(Instance, Vec<String>), LoadError> {
    let raw: RawInstance = serde_json::from_str(text)?;
    raw.check_required()?;
    let warnings = raw.unknown_fields();
    for w in &warnings {
        log::warn!("ignoring unknown field {w}");
    }
    Ok((validate_instance(&raw)?, warnings))
}

pub fn to_json_string(inst: &Instance) -> String {
    let mut text = serde_json::to_string_pretty(&RawInstance::from(inst))
        .expect("instance documents always serialize");
    text.push('\n');
    text
}

pub fn load_with_warnings(path: impl AsRef<Path>) -> Result<(Instance, Vec<String>), LoadError> {
    from_json_str(&fs::read_to_string(path)?)
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance, LoadError> {
    load_with_warnings(path).map(|(inst, _)| inst)
}

pub fn save(inst: &Instance, path: impl AsRef<Path>) -> Result<(), LoadError> {
    fs::write(path, to_json_string(inst))?;
    Ok(())
}
