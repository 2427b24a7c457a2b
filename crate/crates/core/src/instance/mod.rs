//! Problem instances: graph, node roles, arc weights and scalar parameters.
//!
//! An [`Instance`] can only be obtained through [`validate_instance`] (or the
//! loaders in [`io`], which call it), so every instance in circulation is
//! structurally valid and immutable.

mod expand;
pub mod io;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use expand::{default_copies, expand, ExpandedInstance};
pub use io::{load, load_with_warnings, save, LoadError, RawArc, RawInstance, RawNode, RawParams};

/// Node index inside an [`Instance`] (dense, `0..node_count`).
pub type NodeIx = usize;
/// Arc index inside an [`Instance`] (dense, `0..arc_count`).
pub type ArcIx = usize;

/// External node identifier, kept verbatim from the instance file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeKey {
    Int(i64),
    Text(String),
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKey::Int(v) => write!(f, "{v}"),
            NodeKey::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for NodeKey {
    fn from(v: i64) -> Self {
        NodeKey::Int(v)
    }
}

impl From<&str> for NodeKey {
    fn from(v: &str) -> Self {
        NodeKey::Text(v.to_owned())
    }
}

/// What a node offers to the vehicle. SCS and MED point are exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    Transit,
    Scs,
    #[serde(rename = "med")]
    MedPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub key: NodeKey,
    pub role: NodeRole,
    /// Expected wait before using the SCS or MED at this node. Ignored for transit nodes.
    pub wait: f64,
    /// Time to charge an empty battery to full. Required for SCS nodes.
    pub charge_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: NodeIx,
    pub to: NodeIx,
    /// Driving time, strictly positive.
    pub time: f64,
    /// Energy consumed, non-negative.
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Battery capacity `Q` (kWh).
    pub battery_capacity: f64,
    /// Induction rate `rho` (kWh per time unit while attached).
    pub induction_rate: f64,
    /// Speed reduction factor `delta` in `[0, 1)`.
    pub slowdown: f64,
    /// Energy budget `W` of a single MED (kWh).
    pub med_energy_cap: f64,
    /// Maximum number of MED attachments `P` per trip.
    pub med_count_cap: usize,
}

impl Params {
    /// Energy a MED can induce per unit of driving time (`rho / (1 - delta)`).
    pub fn induction_per_drive_time(&self) -> f64 {
        self.induction_rate / (1.0 - self.slowdown)
    }

    /// Extra time per unit of driving time while attached (`delta / (1 - delta)`).
    pub fn slowdown_factor(&self) -> f64 {
        self.slowdown / (1.0 - self.slowdown)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("parameter {name} = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("slowdown delta = {0} must lie in [0, 1)")]
    DeltaOutOfRange(f64),
    #[error("node {0} is declared more than once")]
    DuplicateNode(NodeKey),
    #[error("negative {what} ({value})")]
    NegativeWeight { what: String, value: f64 },
    #[error("arc {from}->{to} has non-positive driving time {value}")]
    NonPositiveDriveTime { from: NodeKey, to: NodeKey, value: f64 },
    #[error("non-finite value for {0}")]
    NonFinite(String),
    #[error("SCS node {0} has no positive charge_time")]
    MissingChargeTime(NodeKey),
    #[error("arc {from}->{to} references unknown node {missing}")]
    DanglingEndpoint {
        from: NodeKey,
        to: NodeKey,
        missing: NodeKey,
    },
    #[error("arc {from}->{to} appears more than once")]
    DuplicateArc { from: NodeKey, to: NodeKey },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeKey),
    #[error("{which} node {key} does not exist")]
    UnknownTerminal { which: &'static str, key: NodeKey },
    #[error("instance is already copy-expanded")]
    AlreadyExpanded,
}

/// A structurally valid problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    params: Params,
    origin: NodeIx,
    destination: NodeIx,
    out_arcs: Vec<Vec<ArcIx>>,
    in_arcs: Vec<Vec<ArcIx>>,
    metadata: Option<serde_json::Value>,
    expanded: bool,
}

impl Instance {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, v: NodeIx) -> &Node {
        &self.nodes[v]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, a: ArcIx) -> &Arc {
        &self.arcs[a]
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn origin(&self) -> NodeIx {
        self.origin
    }

    pub fn destination(&self) -> NodeIx {
        self.destination
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn out_arcs(&self, v: NodeIx) -> &[ArcIx] {
        &self.out_arcs[v]
    }

    pub fn in_arcs(&self, v: NodeIx) -> &[ArcIx] {
        &self.in_arcs[v]
    }

    pub fn role(&self, v: NodeIx) -> NodeRole {
        self.nodes[v].role
    }

    pub fn is_scs(&self, v: NodeIx) -> bool {
        self.nodes[v].role == NodeRole::Scs
    }

    pub fn is_med_point(&self, v: NodeIx) -> bool {
        self.nodes[v].role == NodeRole::MedPoint
    }

    /// Wait time at an SCS or MED point; zero for transit nodes.
    pub fn wait(&self, v: NodeIx) -> f64 {
        match self.nodes[v].role {
            NodeRole::Transit => 0.0,
            _ => self.nodes[v].wait,
        }
    }

    /// Full charge time `t_i`; zero for nodes that are not SCS.
    pub fn charge_time(&self, v: NodeIx) -> f64 {
        match self.nodes[v].role {
            NodeRole::Scs => self.nodes[v].charge_time.unwrap_or(0.0),
            _ => 0.0,
        }
    }

    pub fn metadata(&self) -> Option<&serde_json::Value> {
        self.metadata.as_ref()
    }

    pub fn is_expanded(&self) -> bool {
        self.expanded
    }

    pub fn count_role(&self, role: NodeRole) -> usize {
        self.nodes.iter().filter(|n| n.role == role).count()
    }

    pub fn find_arc(&self, from: NodeIx, to: NodeIx) -> Option<ArcIx> {
        self.out_arcs[from]
            .iter()
            .copied()
            .find(|&a| self.arcs[a].to == to)
    }

    pub fn index_of(&self, key: &NodeKey) -> Option<NodeIx> {
        self.nodes.iter().position(|n| &n.key == key)
    }

    /// Looks a node up by the textual form of its key (as typed on a command line).
    pub fn index_of_str(&self, key: &str) -> Option<NodeIx> {
        self.nodes.iter().position(|n| n.key.to_string() == key)
    }

    /// Same graph and parameters with a different origin/destination pair.
    pub fn with_trip(&self, origin: NodeIx, destination: NodeIx) -> Instance {
        assert!(origin < self.nodes.len() && destination < self.nodes.len());
        Instance {
            origin,
            destination,
            ..self.clone()
        }
    }

    /// Multiplies every time quantity (driving times, waits, charge times) by `factor`.
    pub fn scale_time(&self, factor: f64) -> Instance {
        assert!(factor > 0.0 && factor.is_finite());
        let mut scaled = self.clone();
        for node in &mut scaled.nodes {
            node.wait *= factor;
            node.charge_time = node.charge_time.map(|t| t * factor);
        }
        for arc in &mut scaled.arcs {
            arc.time *= factor;
        }
        // Induction is a rate per unit time: keep energy per arc unchanged.
        scaled.params.induction_rate /= factor;
        scaled
    }

    pub(crate) fn from_parts(
        nodes: Vec<Node>,
        arcs: Vec<Arc>,
        params: Params,
        origin: NodeIx,
        destination: NodeIx,
        metadata: Option<serde_json::Value>,
        expanded: bool,
    ) -> Instance {
        let mut out_arcs = vec![Vec::new(); nodes.len()];
        let mut in_arcs = vec![Vec::new(); nodes.len()];
        for (a, arc) in arcs.iter().enumerate() {
            out_arcs[arc.from].push(a);
            in_arcs[arc.to].push(a);
        }
        Instance {
            nodes,
            arcs,
            params,
            origin,
            destination,
            out_arcs,
            in_arcs,
            metadata,
            expanded,
        }
    }
}

fn check_finite(what: impl FnOnce() -> String, value: f64) -> Result<(), ValidationError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ValidationError::NonFinite(what()))
    }
}

fn check_params(raw: &RawParams) -> Result<Params, ValidationError> {
    // Presence is checked by the loader; a raw candidate built in code must be complete too.
    let q = raw.battery_capacity.unwrap_or(f64::NAN);
    let rho = raw.induction_rate.unwrap_or(f64::NAN);
    let delta = raw.slowdown.unwrap_or(f64::NAN);
    let w = raw.med_energy_cap.unwrap_or(f64::NAN);
    let p = raw.med_count_cap.unwrap_or(f64::NAN);

    check_finite(|| "battery_capacity (Q)".into(), q)?;
    check_finite(|| "induction_rate (rho)".into(), rho)?;
    check_finite(|| "slowdown (delta)".into(), delta)?;
    check_finite(|| "med_energy_cap (W)".into(), w)?;
    check_finite(|| "med_count_cap (P)".into(), p)?;

    if q <= 0.0 {
        return Err(ValidationError::InvalidParameter {
            name: "battery_capacity",
            value: q,
            reason: "must be positive",
        });
    }
    if rho <= 0.0 {
        return Err(ValidationError::InvalidParameter {
            name: "induction_rate",
            value: rho,
            reason: "must be positive",
        });
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(ValidationError::DeltaOutOfRange(delta));
    }
    if w < 0.0 {
        return Err(ValidationError::NegativeWeight {
            what: "med_energy_cap (W)".into(),
            value: w,
        });
    }
    if p < 0.0 || p.fract() != 0.0 {
        return Err(ValidationError::InvalidParameter {
            name: "med_count_cap",
            value: p,
            reason: "must be a non-negative integer",
        });
    }
    Ok(Params {
        battery_capacity: q,
        induction_rate: rho,
        slowdown: delta,
        med_energy_cap: w,
        med_count_cap: p as usize,
    })
}

/// Validates a raw instance candidate. Returns the first violated rule.
pub fn validate_instance(raw: &RawInstance) -> Result<Instance, ValidationError> {
    let params = check_params(&raw.params)?;

    let mut index: HashMap<&NodeKey, NodeIx> = HashMap::with_capacity(raw.nodes.len());
    let mut nodes = Vec::with_capacity(raw.nodes.len());
    for node in &raw.nodes {
        if index.insert(&node.id, nodes.len()).is_some() {
            return Err(ValidationError::DuplicateNode(node.id.clone()));
        }
        let wait = node.wait.unwrap_or(0.0);
        check_finite(|| format!("wait of node {}", node.id), wait)?;
        if wait < 0.0 {
            return Err(ValidationError::NegativeWeight {
                what: format!("wait of node {}", node.id),
                value: wait,
            });
        }
        if let Some(t) = node.charge_time {
            check_finite(|| format!("charge_time of node {}", node.id), t)?;
            if t < 0.0 {
                return Err(ValidationError::NegativeWeight {
                    what: format!("charge_time of node {}", node.id),
                    value: t,
                });
            }
        }
        if node.role == NodeRole::Scs && !node.charge_time.is_some_and(|t| t > 0.0) {
            return Err(ValidationError::MissingChargeTime(node.id.clone()));
        }
        nodes.push(Node {
            key: node.id.clone(),
            role: node.role,
            wait,
            charge_time: node.charge_time,
        });
    }

    let mut seen: HashSet<(NodeIx, NodeIx)> = HashSet::with_capacity(raw.arcs.len());
    let mut arcs = Vec::with_capacity(raw.arcs.len());
    for arc in &raw.arcs {
        let lookup = |key: &NodeKey| {
            index
                .get(key)
                .copied()
                .ok_or_else(|| ValidationError::DanglingEndpoint {
                    from: arc.from.clone(),
                    to: arc.to.clone(),
                    missing: key.clone(),
                })
        };
        let from = lookup(&arc.from)?;
        let to = lookup(&arc.to)?;
        if from == to {
            return Err(ValidationError::SelfLoop(arc.from.clone()));
        }
        check_finite(|| format!("time of arc {}->{}", arc.from, arc.to), arc.time)?;
        check_finite(|| format!("energy of arc {}->{}", arc.from, arc.to), arc.energy)?;
        if arc.time < 0.0 {
            return Err(ValidationError::NegativeWeight {
                what: format!("time of arc {}->{}", arc.from, arc.to),
                value: arc.time,
            });
        }
        if arc.time == 0.0 {
            return Err(ValidationError::NonPositiveDriveTime {
                from: arc.from.clone(),
                to: arc.to.clone(),
                value: arc.time,
            });
        }
        if arc.energy < 0.0 {
            return Err(ValidationError::NegativeWeight {
                what: format!("energy of arc {}->{}", arc.from, arc.to),
                value: arc.energy,
            });
        }
        if !seen.insert((from, to)) {
            return Err(ValidationError::DuplicateArc {
                from: arc.from.clone(),
                to: arc.to.clone(),
            });
        }
        arcs.push(Arc {
            from,
            to,
            time: arc.time,
            energy: arc.energy,
        });
    }

    let terminal = |which: &'static str, key: &Option<NodeKey>| match key {
        Some(k) => index
            .get(k)
            .copied()
            .ok_or_else(|| ValidationError::UnknownTerminal {
                which,
                key: k.clone(),
            }),
        None => Err(ValidationError::UnknownTerminal {
            which,
            key: NodeKey::Text(String::new()),
        }),
    };
    let origin = terminal("origin", &raw.params.origin)?;
    let destination = terminal("destination", &raw.params.destination)?;

    Ok(Instance::from_parts(
        nodes,
        arcs,
        params,
        origin,
        destination,
        raw.metadata.clone(),
        false,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node(delta: f64) -> RawInstance {
        RawInstance::builder(10.0, 1.0, delta, 5.0, 1)
            .node(1, NodeRole::Transit)
            .node(2, NodeRole::Transit)
            .arc(1, 2, 5.0, 3.0)
            .trip(1, 2)
    }

    #[test]
    fn minimal_instance_is_valid() {
        let inst = validate_instance(&two_node(0.2)).unwrap();
        assert_eq!(inst.node_count(), 2);
        assert_eq!(inst.arc_count(), 1);
        assert_eq!(inst.out_arcs(0), &[0]);
        assert_eq!(inst.in_arcs(1), &[0]);
    }

    #[test]
    fn delta_one_is_rejected() {
        assert_eq!(
            validate_instance(&two_node(1.0)),
            Err(ValidationError::DeltaOutOfRange(1.0))
        );
        assert_eq!(
            validate_instance(&two_node(-0.1)),
            Err(ValidationError::DeltaOutOfRange(-0.1))
        );
    }

    #[test]
    fn self_loop_is_rejected() {
        let mut raw = two_node(0.2);
        raw.arcs.push(RawArc::new(1, 1, 1.0, 1.0));
        assert_eq!(
            validate_instance(&raw),
            Err(ValidationError::SelfLoop(NodeKey::Int(1)))
        );
    }

    #[test]
    fn duplicate_arc_is_rejected() {
        let mut raw = two_node(0.2);
        raw.arcs.push(RawArc::new(1, 2, 7.0, 1.0));
        assert!(matches!(
            validate_instance(&raw),
            Err(ValidationError::DuplicateArc { .. })
        ));
    }

    #[test]
    fn dangling_endpoint_is_rejected() {
        let mut raw = two_node(0.2);
        raw.arcs.push(RawArc::new(2, 9, 1.0, 1.0));
        assert_eq!(
            validate_instance(&raw),
            Err(ValidationError::DanglingEndpoint {
                from: NodeKey::Int(2),
                to: NodeKey::Int(9),
                missing: NodeKey::Int(9),
            })
        );
    }

    #[test]
    fn negative_energy_and_zero_time_are_rejected() {
        let mut raw = two_node(0.2);
        raw.arcs[0].energy = -1.0;
        assert!(matches!(
            validate_instance(&raw),
            Err(ValidationError::NegativeWeight { .. })
        ));
        let mut raw = two_node(0.2);
        raw.arcs[0].time = 0.0;
        assert!(matches!(
            validate_instance(&raw),
            Err(ValidationError::NonPositiveDriveTime { .. })
        ));
        let mut raw = two_node(0.2);
        raw.arcs[0].energy = 0.0;
        assert!(validate_instance(&raw).is_ok(), "free arcs are allowed");
    }

    #[test]
    fn scs_without_charge_time_is_rejected() {
        let raw = RawInstance::builder(10.0, 1.0, 0.0, 5.0, 1)
            .node(1, NodeRole::Transit)
            .node(2, NodeRole::Scs)
            .arc(1, 2, 5.0, 3.0)
            .trip(1, 2);
        assert_eq!(
            validate_instance(&raw),
            Err(ValidationError::MissingChargeTime(NodeKey::Int(2)))
        );
    }

    #[test]
    fn unknown_origin_is_rejected() {
        let raw = two_node(0.2).trip(7, 2);
        assert!(matches!(
            validate_instance(&raw),
            Err(ValidationError::UnknownTerminal { which: "origin", .. })
        ));
    }

    #[test]
    fn transit_wait_is_ignored() {
        let mut raw = two_node(0.2);
        raw.nodes[0].wait = Some(4.0);
        let inst = validate_instance(&raw).unwrap();
        assert_eq!(inst.node(0).wait, 4.0);
        assert_eq!(inst.wait(0), 0.0);
    }

    #[test]
    fn origin_may_equal_destination() {
        let raw = two_node(0.2).trip(1, 1);
        let inst = validate_instance(&raw).unwrap();
        assert_eq!(inst.origin(), inst.destination());
    }
}
