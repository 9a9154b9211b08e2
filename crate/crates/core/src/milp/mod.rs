//! Path-based MILP formulations, cut separation and solution checking.
//!
//! Variable names: `z_k` (hub), `y_k_m` (hub edge, `k < m`), `yp_k_m` (hub
//! arc), `f_k_m` (flow on an arc), `l_k` (order label), `v_c_i` (candidate
//! `i` of commodity `c`).

mod lp;
mod mps;
mod sec;
mod solution;

use std::fmt;
use std::str::FromStr;

use crate::error::MilpError;
use crate::model::Problem;
use crate::paths::{Enumeration, PathType};
use crate::solver::HubLine;

pub use lp::{fmt_num, natural_cmp, CanonicalLp, LinearProgram, Row, Sense, VarKind, Variable};
pub use mps::{read_mps, read_mps_file, write_file, write_lp, write_mps, MPS_INFINITY};
pub use sec::{separate_sec, SecCut};
pub use solution::{import_solution, parse_solution, verify_solution, VerifyReport, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Edge variables with single-commodity flow connectivity.
    F1lFlow,
    /// Edge variables; subtours are cut off lazily.
    F1lSec,
    /// Arc variables with in/out degree limits and order labels.
    F2l,
    /// Arc variables with an aggregated degree limit and order labels.
    F2lPrime,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::F1lFlow, Variant::F1lSec, Variant::F2l, Variant::F2lPrime];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::F1lFlow => "f1l_flow",
            Variant::F1lSec => "f1l_sec",
            Variant::F2l => "f2l",
            Variant::F2lPrime => "f2l_prime",
        }
    }

    pub fn uses_arcs(self) -> bool {
        matches!(self, Variant::F2l | Variant::F2lPrime)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown variant `{s}` (expected f1l_flow, f1l_sec, f2l or f2l_prime)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CutFlags {
    /// Endpoint-is-a-hub rows for paths that start or end at a hub.
    pub desthub_orhub: bool,
    /// Every hub but the largest has an outgoing hub arc.
    pub ineq_new: bool,
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub lp: LinearProgram,
    pub variant: Variant,
    pub cuts: CutFlags,
    /// Subtour cuts added so far, in insertion order.
    pub sec_cuts: Vec<SecCut>,
    z: Vec<usize>,
    /// Per instance edge: `y` variable (edge variants) or the two arc
    /// variables `(k -> m, m -> k)` with `k < m` (arc variants).
    y: Vec<usize>,
    yp: Vec<(usize, usize)>,
    f: Vec<(usize, usize)>,
    l: Vec<usize>,
    /// Per commodity, variable index of each candidate.
    v: Vec<Vec<usize>>,
}

impl MilpModel {
    pub fn z_var(&self, k: usize) -> usize {
        self.z[k]
    }

    /// `y` variable of edge `e`; edge variants only.
    pub fn y_var(&self, e: usize) -> Option<usize> {
        self.y.get(e).copied()
    }

    /// Arc variables of edge `e` as `(k -> m, m -> k)` with `k < m`.
    pub fn yp_vars(&self, e: usize) -> Option<(usize, usize)> {
        self.yp.get(e).copied()
    }

    pub fn v_vars(&self, c: usize) -> &[usize] {
        &self.v[c]
    }

    /// Value of the hub-edge indicator of `e` under `values`.
    pub fn edge_value(&self, e: usize, values: &[f64]) -> f64 {
        if self.variant.uses_arcs() {
            let (a, b) = self.yp[e];
            values[a] + values[b]
        } else {
            values[self.y[e]]
        }
    }

    /// Linear expression for the hub-edge indicator of `e`.
    fn edge_terms(&self, e: usize, coef: f64) -> Vec<(usize, f64)> {
        if self.variant.uses_arcs() {
            let (a, b) = self.yp[e];
            vec![(a, coef), (b, coef)]
        } else {
            vec![(self.y[e], coef)]
        }
    }
}

pub fn build_milp(
    problem: &Problem,
    candidates: &Enumeration,
    variant: Variant,
    cuts: CutFlags,
) -> Result<MilpModel, MilpError> {
    if cuts.ineq_new && variant != Variant::F2lPrime {
        return Err(MilpError::InvalidCombination(variant.to_string()));
    }
    let inst = &problem.instance;
    let n = inst.n();
    let p = inst.params().p as f64;
    let edges = inst.edges();
    let mut lp = LinearProgram::new(format!("hubline_{variant}"));

    let z: Vec<usize> = (0..n)
        .map(|k| lp.add_var(format!("z_{k}"), VarKind::Binary, 0.0, 1.0))
        .collect();
    let mut y = Vec::new();
    let mut yp = Vec::new();
    let mut f = Vec::new();
    let mut l = Vec::new();
    if variant.uses_arcs() {
        for &(a, b) in edges {
            let fwd = lp.add_var(format!("yp_{a}_{b}"), VarKind::Binary, 0.0, 1.0);
            let bwd = lp.add_var(format!("yp_{b}_{a}"), VarKind::Binary, 0.0, 1.0);
            yp.push((fwd, bwd));
        }
        for k in 0..n {
            l.push(lp.add_var(format!("l_{k}"), VarKind::Continuous, 0.0, (n - 1) as f64));
        }
    } else {
        for &(a, b) in edges {
            y.push(lp.add_var(format!("y_{a}_{b}"), VarKind::Binary, 0.0, 1.0));
        }
        if variant == Variant::F1lFlow {
            for &(a, b) in edges {
                let fwd = lp.add_var(format!("f_{a}_{b}"), VarKind::Continuous, 0.0, f64::INFINITY);
                let bwd = lp.add_var(format!("f_{b}_{a}"), VarKind::Continuous, 0.0, f64::INFINITY);
                f.push((fwd, bwd));
            }
        }
    }
    let mut v = Vec::with_capacity(candidates.per_commodity.len());
    for (c, paths) in candidates.per_commodity.iter().enumerate() {
        let vars: Vec<usize> = (0..paths.len())
            .map(|i| lp.add_var(format!("v_{c}_{i}"), VarKind::Binary, 0.0, 1.0))
            .collect();
        for (&j, path) in vars.iter().zip(paths) {
            lp.objective.push((j, path.profit));
        }
        v.push(vars);
    }

    let mut model = MilpModel {
        lp,
        variant,
        cuts,
        sec_cuts: Vec::new(),
        z,
        y,
        yp,
        f,
        l,
        v,
    };
    let all_z: Vec<(usize, f64)> = model.z.iter().map(|&j| (j, 1.0)).collect();
    model.lp.add_row("hubs".into(), all_z, Sense::Eq, p);

    // Incident arcs/edges per node.
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        incident[a].push(e);
        incident[b].push(e);
    }

    if variant.uses_arcs() {
        let all: Vec<(usize, f64)> = model.yp.iter().flat_map(|&(a, b)| [(a, 1.0), (b, 1.0)]).collect();
        model.lp.add_row("arc_count".into(), all, Sense::Eq, p - 1.0);
        for k in 0..n {
            let mut out = Vec::new();
            let mut inn = Vec::new();
            for &e in &incident[k] {
                let (a, _) = edges[e];
                let (fwd, bwd) = model.yp[e];
                let (from_k, to_k) = if a == k { (fwd, bwd) } else { (bwd, fwd) };
                out.push((from_k, 1.0));
                inn.push((to_k, 1.0));
            }
            let zk = (model.z[k], -1.0);
            if variant == Variant::F2l {
                let mut r = out.clone();
                r.push(zk);
                model.lp.add_row(format!("arc_out_{k}"), r, Sense::Le, 0.0);
                let mut r = inn.clone();
                r.push(zk);
                model.lp.add_row(format!("arc_in_{k}"), r, Sense::Le, 0.0);
            } else {
                let mut r: Vec<(usize, f64)> = out.iter().chain(&inn).copied().collect();
                r.push((model.z[k], -2.0));
                model.lp.add_row(format!("deg_{k}"), r, Sense::Le, 0.0);
            }
        }
        let nf = n as f64;
        for (e, &(a, b)) in edges.iter().enumerate() {
            let (fwd, bwd) = model.yp[e];
            for (from, to, arc) in [(a, b, fwd), (b, a, bwd)] {
                model.lp.add_row(
                    format!("mtz_{from}_{to}"),
                    vec![(model.l[from], 1.0), (model.l[to], -1.0), (arc, nf)],
                    Sense::Le,
                    nf - 1.0,
                );
            }
        }
        if cuts.ineq_new {
            for k in 0..n {
                for m in (k + 1)..n {
                    let mut r: Vec<(usize, f64)> = incident[k]
                        .iter()
                        .map(|&e| {
                            let (a, _) = edges[e];
                            let (fwd, bwd) = model.yp[e];
                            (if a == k { fwd } else { bwd }, 1.0)
                        })
                        .collect();
                    r.push((model.z[k], -1.0));
                    r.push((model.z[m], -1.0));
                    model.lp.add_row(format!("outgoing_{k}_{m}"), r, Sense::Ge, -1.0);
                }
            }
        }
    } else {
        let all: Vec<(usize, f64)> = model.y.iter().map(|&j| (j, 1.0)).collect();
        model.lp.add_row("edge_count".into(), all, Sense::Eq, p - 1.0);
        for k in 0..n {
            let mut r: Vec<(usize, f64)> = incident[k].iter().map(|&e| (model.y[e], 1.0)).collect();
            r.push((model.z[k], -2.0));
            model.lp.add_row(format!("deg_{k}"), r, Sense::Le, 0.0);
        }
        if variant == Variant::F1lFlow {
            let out_of = |model: &MilpModel, k: usize| -> Vec<usize> {
                incident[k]
                    .iter()
                    .map(|&e| {
                        let (fwd, bwd) = model.f[e];
                        if edges[e].0 == k { fwd } else { bwd }
                    })
                    .collect()
            };
            let into = |model: &MilpModel, k: usize| -> Vec<usize> {
                incident[k]
                    .iter()
                    .map(|&e| {
                        let (fwd, bwd) = model.f[e];
                        if edges[e].0 == k { bwd } else { fwd }
                    })
                    .collect()
            };
            for k in 0..n {
                let mut r: Vec<(usize, f64)> = out_of(&model, k).into_iter().map(|j| (j, 1.0)).collect();
                r.push((model.z[k], -(p - 1.0)));
                model.lp.add_row(format!("flow_out_{k}"), r, Sense::Le, 0.0);
            }
            for m in 0..n {
                for k in (m + 1)..n {
                    let mut r: Vec<(usize, f64)> = into(&model, m).into_iter().map(|j| (j, 1.0)).collect();
                    r.extend(out_of(&model, m).into_iter().map(|j| (j, -1.0)));
                    r.push((model.z[m], -1.0));
                    r.push((model.z[k], -p));
                    model.lp.add_row(format!("flow_bal_{m}_{k}"), r, Sense::Ge, -p);
                }
            }
            for (e, &(a, b)) in edges.iter().enumerate() {
                let (fwd, bwd) = model.f[e];
                model.lp.add_row(
                    format!("flow_cap_{a}_{b}"),
                    vec![(fwd, 1.0), (bwd, 1.0), (model.y[e], -(p - 1.0))],
                    Sense::Le,
                    0.0,
                );
            }
        }
    }

    for c in 0..model.v.len() {
        let r: Vec<(usize, f64)> = model.v[c].iter().map(|&j| (j, 1.0)).collect();
        model.lp.add_row(format!("one_{c}"), r, Sense::Le, 1.0);
    }
    // Per edge and commodity, the candidates of that commodity using the edge.
    let mut users: Vec<Vec<(usize, usize)>> = vec![Vec::new(); edges.len()];
    for (c, paths) in candidates.per_commodity.iter().enumerate() {
        for (i, path) in paths.iter().enumerate() {
            for &e in &path.edge_ids {
                users[e].push((c, model.v[c][i]));
            }
        }
    }
    for (e, &(a, b)) in edges.iter().enumerate() {
        let list = &users[e];
        let mut start = 0;
        for c in 0..model.v.len() {
            let mut r: Vec<(usize, f64)> = Vec::new();
            while start < list.len() && list[start].0 == c {
                r.push((list[start].1, 1.0));
                start += 1;
            }
            r.extend(model.edge_terms(e, -1.0));
            model.lp.add_row(format!("link_{a}_{b}_{c}"), r, Sense::Le, 0.0);
        }
    }
    if cuts.desthub_orhub {
        let inst_c = inst.commodities();
        for (c, paths) in candidates.per_commodity.iter().enumerate() {
            let mut dest: Vec<(usize, f64)> = Vec::new();
            let mut orig: Vec<(usize, f64)> = Vec::new();
            for (i, path) in paths.iter().enumerate() {
                let j = model.v[c][i];
                if matches!(path.ptype, PathType::Odh | PathType::Dh) {
                    dest.push((j, 1.0));
                }
                if matches!(path.ptype, PathType::Odh | PathType::Oh) {
                    orig.push((j, 1.0));
                }
            }
            dest.push((model.z[inst_c[c].destination], -1.0));
            orig.push((model.z[inst_c[c].origin], -1.0));
            model.lp.add_row(format!("desthub_{c}"), dest, Sense::Le, 0.0);
            model.lp.add_row(format!("orhub_{c}"), orig, Sense::Le, 0.0);
        }
    }
    Ok(model)
}

/// Append subtour cuts not already present; returns how many were new.
pub fn add_cuts(model: &mut MilpModel, problem: &Problem, cuts: &[SecCut]) -> usize {
    let inst = &problem.instance;
    let mut added = 0;
    for cut in cuts {
        if model.sec_cuts.contains(cut) {
            continue;
        }
        let mut in_set = vec![false; inst.n()];
        for &k in &cut.set {
            in_set[k] = true;
        }
        let mut r: Vec<(usize, f64)> = Vec::new();
        for (e, &(a, b)) in inst.edges().iter().enumerate() {
            if in_set[a] && in_set[b] {
                r.extend(model.edge_terms(e, 1.0));
            }
        }
        for &k in &cut.set {
            if k != cut.anchor {
                r.push((model.z[k], -1.0));
            }
        }
        let name = format!("sec_{}", model.sec_cuts.len());
        model.lp.add_row(name, r, Sense::Le, 0.0);
        model.sec_cuts.push(cut.clone());
        added += 1;
    }
    added
}

/// Variable values describing `line` in the model's variables, with every
/// `v` at zero.
pub fn structure_values(model: &MilpModel, problem: &Problem, line: &HubLine) -> Vec<f64> {
    let inst = &problem.instance;
    let mut values = vec![0.0; model.lp.variables.len()];
    let nodes = line.nodes();
    let p = nodes.len();
    for &k in nodes {
        values[model.z[k]] = 1.0;
    }
    match model.variant {
        Variant::F1lFlow | Variant::F1lSec => {
            for &e in line.edges() {
                values[model.y[e]] = 1.0;
            }
            if model.variant == Variant::F1lFlow {
                // Flow leaves the largest-index hub; each edge carries the
                // number of hubs beyond it.
                let root = (0..p).max_by_key(|&i| nodes[i]).unwrap();
                for i in 0..p - 1 {
                    let (a, b) = (nodes[i], nodes[i + 1]);
                    let e = inst.edge_index(a, b).unwrap();
                    let (fwd, bwd) = model.f[e];
                    let (from, amount) = if i < root { (b, (i + 1) as f64) } else { (a, (p - 1 - i) as f64) };
                    let j = if from == inst.edges()[e].0 { fwd } else { bwd };
                    values[j] = amount;
                }
            }
        }
        Variant::F2l => {
            for i in 0..p - 1 {
                set_arc(model, problem, &mut values, nodes[i], nodes[i + 1]);
                values[model.l[nodes[i]]] = i as f64;
            }
            values[model.l[nodes[p - 1]]] = (p - 1) as f64;
        }
        Variant::F2lPrime => {
            // Arcs point toward the largest-index hub.
            let root = (0..p).max_by_key(|&i| nodes[i]).unwrap();
            for i in 0..p {
                let depth = i.abs_diff(root);
                values[model.l[nodes[i]]] = (p - 1 - depth) as f64;
                if i < root {
                    set_arc(model, problem, &mut values, nodes[i], nodes[i + 1]);
                } else if i > root {
                    set_arc(model, problem, &mut values, nodes[i], nodes[i - 1]);
                }
            }
        }
    }
    values
}

fn set_arc(model: &MilpModel, problem: &Problem, values: &mut [f64], from: usize, to: usize) {
    let inst = &problem.instance;
    let e = inst.edge_index(from, to).unwrap();
    let (fwd, bwd) = model.yp[e];
    values[if from == inst.edges()[e].0 { fwd } else { bwd }] = 1.0;
}

/// With every non-`v` variable fixed, choose `v` to maximise the objective.
/// Rows containing `v` variables involve a single commodity each, so the
/// choice decomposes: per commodity, the most profitable candidate whose
/// rows all stay satisfied.
pub fn optimize_v(model: &MilpModel, values: &mut [f64]) {
    let lp = &model.lp;
    let mut owner = vec![usize::MAX; lp.variables.len()];
    for (c, vars) in model.v.iter().enumerate() {
        for &j in vars {
            owner[j] = c;
            values[j] = 0.0;
        }
    }
    let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); lp.variables.len()];
    for (i, row) in lp.rows.iter().enumerate() {
        let mut commodity = None;
        for &(j, _) in &row.coeffs {
            if owner[j] != usize::MAX {
                assert!(
                    commodity.is_none_or(|c| c == owner[j]),
                    "row {} mixes commodities",
                    row.name
                );
                commodity = Some(owner[j]);
                rows_of[j].push(i);
            }
        }
    }
    let mut obj = vec![0.0; lp.variables.len()];
    for &(j, c) in &lp.objective {
        obj[j] += c;
    }
    for vars in &model.v {
        let mut order: Vec<usize> = vars.iter().copied().filter(|&j| obj[j] > 0.0).collect();
        order.sort_by(|&a, &b| obj[b].total_cmp(&obj[a]).then(a.cmp(&b)));
        for j in order {
            values[j] = 1.0;
            let ok = rows_of[j]
                .iter()
                .all(|&i| lp.rows[i].sense.holds(lp.rows[i].activity(values), lp.rows[i].rhs, 1e-9));
            if ok {
                break;
            }
            values[j] = 0.0;
        }
    }
}

/// Full variable assignment for `line`: structure plus the best `v`.
pub fn line_assignment(model: &MilpModel, problem: &Problem, line: &HubLine) -> Vec<f64> {
    let mut values = structure_values(model, problem, line);
    optimize_v(model, &mut values);
    values
}
