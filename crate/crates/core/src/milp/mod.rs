//! The arc-flow mixed-integer model over the node-copy expansion.
//!
//! Variables (indices are expanded-graph node indices):
//!
//! | name        | meaning                                           |
//! |-------------|---------------------------------------------------|
//! | `x_i_j`     | arc driven                                        |
//! | `y_i_j_m`   | arc driven with the MED attached at `m`           |
//! | `z_i`       | recharge at SCS `i`                               |
//! | `q_i`       | MED attached at MED point `i`                     |
//! | `a_i_m`     | MED `m` detached at `i`                           |
//! | `eps_i`     | battery level leaving `i`                         |
//! | `beta_i`    | energy recharged at `i`                           |
//! | `gam_i_j_m` | energy induced by MED `m` on arc `(i, j)`         |
//!
//! Build with [`build`], write with [`lp::write_lp`], and check an external
//! assignment with [`check::import_solution`].

pub mod check;
pub mod lp;

use std::collections::HashMap;
use std::fmt;

use crate::instance::{ExpandedInstance, NodeIx, NodeRole};

pub use check::{assignment_from_solution, check_assignment, import_solution, parse_assignment, CheckError, Certified, TranslateError};
pub use lp::{to_lp_string, write_lp};

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// Constraint families, named as in the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Flujo2,
    MedFlujo,
    MedFlujo2,
    MedFlujo3,
    MedFlujo4,
    Prestriccion,
    MedFlujo5,
    Ecargada,
    Beta0,
    Energia1,
    Energia2,
    Energia3,
    Energia4,
    Energia5,
    Opcional1,
    Opcional2,
    /// `y_ij^m <= x_ij`: a MED only rides arcs the vehicle drives.
    Enganche,
    /// At most one arc enters each expanded node and none enters the origin;
    /// revisits go through copies.
    Visita,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Flujo2 => "flujo2",
            Family::MedFlujo => "MEDflujo",
            Family::MedFlujo2 => "MEDflujo2",
            Family::MedFlujo3 => "MEDflujo3",
            Family::MedFlujo4 => "MEDflujo4",
            Family::Prestriccion => "Prestriccion",
            Family::MedFlujo5 => "MEDflujo5",
            Family::Ecargada => "Ecargada",
            Family::Beta0 => "Beta0",
            Family::Energia1 => "energia1",
            Family::Energia2 => "energia2",
            Family::Energia3 => "energia3",
            Family::Energia4 => "energia4",
            Family::Energia5 => "energia5",
            Family::Opcional1 => "opcional1",
            Family::Opcional2 => "opcional2",
            Family::Enganche => "enganche",
            Family::Visita => "visita",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub family: Family,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildWarning {
    /// No copies while SCSs exist: optimal walks that revisit a node are cut off.
    ExpansionTooSmall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    /// Emit the full-battery MED rule and the recharge lower bound with the
    /// raw unit-mixing coefficients instead of the `theta` forms.
    pub literal_units: bool,
    /// Emit the redundant SCS in/out rows.
    pub optional_rows: bool,
    /// Emit `y <= x`.
    pub link_med_to_vehicle: bool,
    /// Emit `sum_i x_ij <= 1` for every node `j` (`= 0` at the origin).
    pub single_visit: bool,
    /// Smallest meaningful amount of energy in the strict rows. Keep it well
    /// above the feasibility tolerance of whatever solver reads the model.
    pub theta: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            literal_units: false,
            optional_rows: true,
            link_med_to_vehicle: true,
            single_visit: true,
            theta: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    pub objective: Vec<(VarId, f64)>,
    /// Node id of every expanded node, by index.
    pub node_labels: Vec<String>,
    pub warnings: Vec<BuildWarning>,
    index: HashMap<String, VarId>,
}

impl MilpModel {
    pub fn var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    pub fn rows_of(&self, family: Family) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.family == family)
    }

    pub fn count_family(&self, family: Family) -> usize {
        self.rows_of(family).count()
    }
}

struct Builder {
    vars: Vec<Variable>,
    index: HashMap<String, VarId>,
    rows: Vec<Row>,
}

impl Builder {
    fn add(&mut self, name: String, kind: VarKind) -> VarId {
        let id = self.vars.len();
        let upper = if kind == VarKind::Binary { 1.0 } else { f64::INFINITY };
        self.index.insert(name.clone(), id);
        self.vars.push(Variable { name, kind, lower: 0.0, upper });
        id
    }

    fn row(&mut self, name: String, family: Family, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Row { name, family, terms, sense, rhs });
    }
}

#[allow(clippy::needless_range_loop)]
pub fn build(ex: &ExpandedInstance, opts: &BuildOptions) -> MilpModel {
    let g = ex.graph();
    let p = g.params();
    let q = p.battery_capacity;
    let n = g.node_count();
    let scs = ex.scs_nodes();
    let meds = ex.med_nodes();
    let (s, t) = (g.origin(), g.destination());
    let theta = opts.theta;

    let mut b = Builder { vars: Vec::new(), index: HashMap::new(), rows: Vec::new() };
    let arcs: Vec<(NodeIx, NodeIx)> = g.arcs().iter().map(|a| (a.from, a.to)).collect();

    let x: Vec<VarId> = arcs.iter().map(|&(i, j)| b.add(format!("x_{i}_{j}"), VarKind::Binary)).collect();
    let y: Vec<Vec<VarId>> = arcs
        .iter()
        .map(|&(i, j)| meds.iter().map(|m| b.add(format!("y_{i}_{j}_{m}"), VarKind::Binary)).collect())
        .collect();
    let mut z = vec![None; n];
    for &i in &scs {
        z[i] = Some(b.add(format!("z_{i}"), VarKind::Binary));
    }
    let mut qv = vec![None; n];
    for &i in &meds {
        qv[i] = Some(b.add(format!("q_{i}"), VarKind::Binary));
    }
    let av: Vec<Vec<VarId>> = (0..n)
        .map(|i| meds.iter().map(|m| b.add(format!("a_{i}_{m}"), VarKind::Binary)).collect())
        .collect();
    let eps: Vec<VarId> = (0..n).map(|i| b.add(format!("eps_{i}"), VarKind::Continuous)).collect();
    let beta: Vec<VarId> = (0..n).map(|i| b.add(format!("beta_{i}"), VarKind::Continuous)).collect();
    let gam: Vec<Vec<VarId>> = arcs
        .iter()
        .map(|&(i, j)| meds.iter().map(|m| b.add(format!("gam_{i}_{j}_{m}"), VarKind::Continuous)).collect())
        .collect();

    let mut objective = Vec::new();
    for (k, arc) in g.arcs().iter().enumerate() {
        objective.push((x[k], arc.time));
        for &yv in &y[k] {
            objective.push((yv, p.slowdown_factor() * arc.time));
        }
    }
    for &i in &scs {
        objective.push((beta[i], g.charge_time(i) / q));
        objective.push((z[i].unwrap(), g.wait(i)));
    }
    for &i in &meds {
        objective.push((qv[i].unwrap(), g.wait(i)));
    }

    // flujo2
    for i in 0..n {
        let mut terms: Vec<(VarId, f64)> = g.out_arcs(i).iter().map(|&a| (x[a], 1.0)).collect();
        terms.extend(g.in_arcs(i).iter().map(|&a| (x[a], -1.0)));
        let rhs = if i == s && i != t {
            1.0
        } else if i == t && i != s {
            -1.0
        } else {
            0.0
        };
        b.row(format!("flujo2_{i}"), Family::Flujo2, terms, Sense::Eq, rhs);
    }
    // MEDflujo
    for (mk, &m) in meds.iter().enumerate() {
        for i in 0..n {
            let mut terms: Vec<(VarId, f64)> = g.out_arcs(i).iter().map(|&a| (y[a][mk], 1.0)).collect();
            terms.extend(g.in_arcs(i).iter().map(|&a| (y[a][mk], -1.0)));
            if i == m {
                terms.push((qv[m].unwrap(), -1.0));
                b.row(format!("MEDflujo_{i}_{m}"), Family::MedFlujo, terms, Sense::Le, 0.0);
            } else {
                terms.push((av[i][mk], 1.0));
                b.row(format!("MEDflujo_{i}_{m}"), Family::MedFlujo, terms, Sense::Eq, 0.0);
            }
        }
    }
    // MEDflujo2
    for (mk, &m) in meds.iter().enumerate() {
        let mut terms: Vec<(VarId, f64)> = (0..n).filter(|&i| i != m).map(|i| (av[i][mk], 1.0)).collect();
        terms.push((qv[m].unwrap(), -1.0));
        b.row(format!("MEDflujo2_{m}"), Family::MedFlujo2, terms, Sense::Eq, 0.0);
    }
    // MEDflujo3
    for (k, &(i, j)) in arcs.iter().enumerate() {
        let cap = p.induction_per_drive_time() * g.arc(k).time;
        for (mk, &m) in meds.iter().enumerate() {
            b.row(
                format!("MEDflujo3_{i}_{j}_{m}"),
                Family::MedFlujo3,
                vec![(gam[k][mk], 1.0), (y[k][mk], -cap)],
                Sense::Le,
                0.0,
            );
        }
    }
    // MEDflujo4
    for (mk, &m) in meds.iter().enumerate() {
        let terms = (0..arcs.len()).map(|k| (gam[k][mk], 1.0)).collect();
        b.row(format!("MEDflujo4_{m}"), Family::MedFlujo4, terms, Sense::Le, p.med_energy_cap);
    }
    // Prestriccion
    let terms = meds.iter().map(|&i| (qv[i].unwrap(), 1.0)).collect();
    b.row("Prestriccion".to_string(), Family::Prestriccion, terms, Sense::Le, p.med_count_cap as f64);
    // MEDflujo5
    if opts.literal_units {
        for i in 0..n {
            let mut terms: Vec<(VarId, f64)> = g
                .out_arcs(i)
                .iter()
                .flat_map(|&a| y[a].iter().map(|&v| (v, 1.0)))
                .collect();
            terms.push((eps[i], 1.0));
            b.row(format!("MEDflujo5_{i}"), Family::MedFlujo5, terms, Sense::Le, q);
        }
    } else {
        // Attaching needs eps_i < Q unless another MED is dropped here.
        for &i in &meds {
            let mut terms = vec![(eps[i], 1.0), (qv[i].unwrap(), theta)];
            terms.extend(meds.iter().enumerate().filter(|&(_, &m)| m != i).map(|(mk, _)| (av[i][mk], -theta)));
            b.row(format!("MEDflujo5_{i}"), Family::MedFlujo5, terms, Sense::Le, q);
        }
    }
    // Ecargada
    let floor = if opts.literal_units { 1.0 } else { theta };
    for &i in &scs {
        let zi = z[i].unwrap();
        b.row(format!("Ecargada_lo_{i}"), Family::Ecargada, vec![(zi, floor), (beta[i], -1.0)], Sense::Le, 0.0);
        b.row(format!("Ecargada_up_{i}"), Family::Ecargada, vec![(beta[i], 1.0), (zi, -q)], Sense::Le, 0.0);
    }
    // Beta0
    for i in (0..n).filter(|&i| g.role(i) != NodeRole::Scs) {
        b.row(format!("Beta0_{i}"), Family::Beta0, vec![(beta[i], 1.0)], Sense::Eq, 0.0);
    }
    // energia1, energia2
    for (k, &(i, j)) in arcs.iter().enumerate() {
        let c = g.arc(k).energy;
        let mut terms = vec![(eps[j], 1.0), (eps[i], -1.0), (x[k], c + q)];
        terms.extend(gam[k].iter().map(|&v| (v, -1.0)));
        terms.push((beta[j], -1.0));
        b.row(format!("energia1_{i}_{j}"), Family::Energia1, terms, Sense::Le, q);
    }
    for (k, &(i, j)) in arcs.iter().enumerate() {
        let c = g.arc(k).energy;
        let mut terms = vec![(eps[i], 1.0), (x[k], -(c + q))];
        terms.extend(gam[k].iter().map(|&v| (v, 1.0)));
        b.row(format!("energia2_{i}_{j}"), Family::Energia2, terms, Sense::Ge, -q);
    }
    // energia3
    for i in 0..n {
        b.row(format!("energia3_{i}"), Family::Energia3, vec![(eps[i], 1.0)], Sense::Le, q);
    }
    // energia4
    for &i in &scs {
        b.row(format!("energia4_{i}"), Family::Energia4, vec![(eps[i], 1.0), (z[i].unwrap(), -q)], Sense::Ge, 0.0);
    }
    // energia5
    b.row("energia5".to_string(), Family::Energia5, vec![(eps[s], 1.0)], Sense::Eq, q);
    if opts.optional_rows {
        for &i in &scs {
            let mut terms = vec![(z[i].unwrap(), 1.0)];
            terms.extend(g.in_arcs(i).iter().map(|&a| (x[a], -1.0)));
            b.row(format!("opcional1_{i}"), Family::Opcional1, terms, Sense::Le, 0.0);
        }
        for &i in &scs {
            let mut terms = vec![(z[i].unwrap(), 1.0)];
            terms.extend(g.out_arcs(i).iter().map(|&a| (x[a], -1.0)));
            b.row(format!("opcional2_{i}"), Family::Opcional2, terms, Sense::Le, 0.0);
        }
    }
    if opts.link_med_to_vehicle {
        for (k, &(i, j)) in arcs.iter().enumerate() {
            for (mk, &m) in meds.iter().enumerate() {
                b.row(
                    format!("enganche_{i}_{j}_{m}"),
                    Family::Enganche,
                    vec![(y[k][mk], 1.0), (x[k], -1.0)],
                    Sense::Le,
                    0.0,
                );
            }
        }
    }
    if opts.single_visit {
        // Returns to the origin go through its copies.
        for j in 0..n {
            let terms = g.in_arcs(j).iter().map(|&a| (x[a], 1.0)).collect();
            let rhs = if j == s { 0.0 } else { 1.0 };
            b.row(format!("visita_{j}"), Family::Visita, terms, Sense::Le, rhs);
        }
    }

    let mut warnings = Vec::new();
    if ex.copies_per_node() == 0 && !scs.is_empty() {
        log::warn!("no node copies with {} SCS nodes: optimal walks revisiting a node are excluded", scs.len());
        warnings.push(BuildWarning::ExpansionTooSmall);
    }
    MilpModel {
        vars: b.vars,
        rows: b.rows,
        objective,
        node_labels: g.nodes().iter().map(|v| v.key.to_string()).collect(),
        warnings,
        index: b.index,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{expand, Instance, RawInstance};

    fn two_nodes() -> Instance {
        RawInstance::builder(10.0, 1.0, 0.2, 5.0, 0)
            .node(1, NodeRole::Transit)
            .node(2, NodeRole::Transit)
            .arc(1, 2, 3.0, 4.0)
            .trip(1, 2)
            .validate()
            .unwrap()
    }

    fn revisit_loop() -> Instance {
        RawInstance::builder(500.0, 2.0, 0.2, 250.0, 0)
            .node(1, NodeRole::Transit)
            .node(2, NodeRole::Transit)
            .node(3, NodeRole::Transit)
            .scs(4, 5.0, 100.0)
            .arc(1, 2, 10.0, 300.0)
            .arc(2, 3, 10.0, 300.0)
            .arc(2, 4, 5.0, 100.0)
            .arc(4, 2, 5.0, 100.0)
            .trip(1, 3)
            .validate()
            .unwrap()
    }

    fn with_meds() -> Instance {
        RawInstance::builder(100.0, 2.0, 0.5, 30.0, 2)
            .node(1, NodeRole::Transit)
            .med(2, 1.0)
            .scs(3, 2.0, 50.0)
            .med(4, 1.0)
            .arc(1, 2, 10.0, 60.0)
            .arc(2, 3, 10.0, 50.0)
            .arc(3, 4, 4.0, 20.0)
            .arc(2, 4, 4.0, 90.0)
            .arc(4, 2, 4.0, 10.0)
            .trip(1, 4)
            .validate()
            .unwrap()
    }

    #[test]
    fn two_node_model() {
        let m = build(&expand(&two_nodes(), 0).unwrap(), &BuildOptions::default());
        let names: Vec<_> = m.vars.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, vec!["x_0_1", "eps_0", "eps_1", "beta_0", "beta_1"]);
        let flow_s = m.rows.iter().find(|r| r.name == "flujo2_0").unwrap();
        assert_eq!(flow_s.rhs, 1.0);
        assert_eq!(m.rows.iter().find(|r| r.name == "flujo2_1").unwrap().rhs, -1.0);
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn variable_count_closed_form() {
        for (inst, k) in [(revisit_loop(), 1), (with_meds(), 0), (with_meds(), 2)] {
            let ex = expand(&inst, k).unwrap();
            let model = build(&ex, &BuildOptions::default());
            let n = ex.graph().node_count();
            let a = ex.graph().arc_count();
            let m = ex.med_nodes().len();
            let s = ex.scs_nodes().len();
            assert_eq!(model.vars.len(), a + a * m + s + m + n * m + n + n + a * m);
        }
    }

    #[test]
    fn family_row_counts() {
        let ex = expand(&with_meds(), 1).unwrap();
        let model = build(&ex, &BuildOptions::default());
        let n = ex.graph().node_count();
        let a = ex.graph().arc_count();
        let m = ex.med_nodes().len();
        let s = ex.scs_nodes().len();
        let expected = [
            (Family::Flujo2, n),
            (Family::MedFlujo, n * m),
            (Family::MedFlujo2, m),
            (Family::MedFlujo3, a * m),
            (Family::MedFlujo4, m),
            (Family::Prestriccion, 1),
            (Family::MedFlujo5, m),
            (Family::Ecargada, 2 * s),
            (Family::Beta0, n - s),
            (Family::Energia1, a),
            (Family::Energia2, a),
            (Family::Energia3, n),
            (Family::Energia4, s),
            (Family::Energia5, 1),
            (Family::Opcional1, s),
            (Family::Opcional2, s),
            (Family::Enganche, a * m),
            (Family::Visita, n),
        ];
        for (family, count) in expected {
            assert_eq!(model.count_family(family), count, "{}", family.name());
        }
        let literal = build(&ex, &BuildOptions { literal_units: true, optional_rows: false, ..BuildOptions::default() });
        assert_eq!(literal.count_family(Family::MedFlujo5), n);
        assert_eq!(literal.count_family(Family::Opcional1), 0);
    }

    #[test]
    fn objective_coefficients() {
        let ex = expand(&with_meds(), 0).unwrap();
        let model = build(&ex, &BuildOptions::default());
        let coef = |name: &str| {
            let v = model.var(name).unwrap();
            model.objective.iter().find(|&&(o, _)| o == v).map(|&(_, c)| c).unwrap_or(0.0)
        };
        assert_eq!(coef("x_0_1"), 10.0);
        assert_eq!(coef("y_0_1_1"), 10.0);
        assert_eq!(coef("beta_2"), 0.5);
        assert_eq!(coef("z_2"), 2.0);
        assert_eq!(coef("q_3"), 1.0);
        assert_eq!(coef("eps_0"), 0.0);
    }

    #[test]
    fn nothing_enters_the_origin() {
        let ex = expand(&with_meds(), 1).unwrap();
        let model = build(&ex, &BuildOptions::default());
        let s = ex.graph().origin();
        let rhs: Vec<f64> = model.rows_of(Family::Visita).map(|r| r.rhs).collect();
        assert_eq!(rhs[s], 0.0);
        assert!(rhs.iter().enumerate().all(|(j, &r)| j == s || r == 1.0));
        let off = build(&ex, &BuildOptions { single_visit: false, ..BuildOptions::default() });
        assert_eq!(off.count_family(Family::Visita), 0);
    }

    #[test]
    fn expansion_too_small_warning() {
        let model = build(&expand(&revisit_loop(), 0).unwrap(), &BuildOptions::default());
        assert_eq!(model.warnings, vec![BuildWarning::ExpansionTooSmall]);
        let model = build(&expand(&revisit_loop(), 1).unwrap(), &BuildOptions::default());
        assert!(model.warnings.is_empty());
    }
}
