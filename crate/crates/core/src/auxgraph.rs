//! Per-commodity auxiliary digraph.
//!
//! Node ids `0..n` are the original nodes; `n` is the copy of the origin and
//! `n + 1` the copy of the destination. A route through the origin copy
//! means the origin itself is the first hub, and symmetrically for the
//! destination copy. Arcs are of three kinds:
//!
//! * access `(o, i)` with time `t_oi + ta_i`,
//! * hub `(i, j)` with time `alpha * t_ij`, only on candidate hub edges,
//! * exit `(j, d)` with time `t_jd + te_j`.
//!
//! The origin has no incoming arcs and the destination no outgoing ones.

use std::fmt::Write as _;

use crate::error::PathError;
use crate::model::{Commodity, Problem, TIME_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArcKind {
    Access,
    Hub,
    Exit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxArc {
    pub from: usize,
    pub to: usize,
    pub time: f64,
    pub kind: ArcKind,
}

/// Which reductions to apply while building the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuxOptions {
    /// Per-arc admission tests against the direct time.
    pub admission: bool,
    /// Drop interior nodes lacking an incoming or an outgoing arc, to a fixpoint.
    pub degree_pruning: bool,
    /// Drop arcs that no route of time `<= t_od` can use, using shortest
    /// times from the origin and to the destination.
    pub time_pruning: bool,
}

impl Default for AuxOptions {
    fn default() -> Self {
        AuxOptions {
            admission: true,
            degree_pruning: true,
            time_pruning: true,
        }
    }
}

impl AuxOptions {
    /// Structural arcs only; used as the reference for pruning soundness.
    pub fn unpruned() -> Self {
        AuxOptions {
            admission: false,
            degree_pruning: false,
            time_pruning: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxGraph {
    commodity: Commodity,
    n: usize,
    t_direct: f64,
    present: Vec<bool>,
    arcs: Vec<AuxArc>,
    out_offsets: Vec<usize>,
}

impl AuxGraph {
    pub fn commodity(&self) -> Commodity {
        self.commodity
    }

    pub fn origin(&self) -> usize {
        self.commodity.origin
    }

    pub fn destination(&self) -> usize {
        self.commodity.destination
    }

    pub fn origin_copy(&self) -> usize {
        self.n
    }

    pub fn destination_copy(&self) -> usize {
        self.n + 1
    }

    pub fn t_direct(&self) -> f64 {
        self.t_direct
    }

    /// Size of the id space (`n + 2`).
    pub fn id_bound(&self) -> usize {
        self.n + 2
    }

    /// Map a copy node back to the original node it stands for.
    #[inline]
    pub fn resolve(&self, v: usize) -> usize {
        if v == self.n {
            self.commodity.origin
        } else if v == self.n + 1 {
            self.commodity.destination
        } else {
            v
        }
    }

    /// Surviving node ids, sorted.
    pub fn nodes(&self) -> Vec<usize> {
        (0..self.id_bound()).filter(|&v| self.present[v]).collect()
    }

    pub fn contains_node(&self, v: usize) -> bool {
        v < self.present.len() && self.present[v]
    }

    /// Arcs sorted by `(from, to)`.
    pub fn arcs(&self) -> &[AuxArc] {
        &self.arcs
    }

    pub fn out_arcs(&self, v: usize) -> &[AuxArc] {
        &self.arcs[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Shortest arc-time from every node to the destination
    /// (`INFINITY` when unreachable).
    pub fn dist_to_destination(&self) -> Vec<f64> {
        let size = self.id_bound();
        let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); size];
        for a in &self.arcs {
            incoming[a.to].push((a.from, a.time));
        }
        dijkstra(size, self.destination(), |v| incoming[v].iter().copied())
    }

    /// Shortest arc-time from the origin to every node.
    pub fn dist_from_origin(&self) -> Vec<f64> {
        dijkstra(self.id_bound(), self.origin(), |v| {
            self.out_arcs(v).iter().map(|a| (a.to, a.time))
        })
    }

    /// Graphviz rendering for debugging.
    pub fn to_dot(&self) -> String {
        let name = |v: usize| -> String {
            if v >= self.n {
                format!("{}'", self.resolve(v))
            } else {
                v.to_string()
            }
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "digraph aux_{}_{} {{",
            self.commodity.origin, self.commodity.destination
        );
        let _ = writeln!(out, "  // t_direct = {}", self.t_direct);
        for v in self.nodes() {
            let _ = writeln!(out, "  \"{}\";", name(v));
        }
        for a in &self.arcs {
            let kind = match a.kind {
                ArcKind::Access => "access",
                ArcKind::Hub => "hub",
                ArcKind::Exit => "exit",
            };
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{:.6}\", kind={}];",
                name(a.from),
                name(a.to),
                a.time,
                kind
            );
        }
        out.push_str("}\n");
        out
    }
}

fn dijkstra<I, F>(size: usize, source: usize, neighbours: F) -> Vec<f64>
where
    I: Iterator<Item = (usize, f64)>,
    F: Fn(usize) -> I,
{
    let mut dist = vec![f64::INFINITY; size];
    let mut done = vec![false; size];
    dist[source] = 0.0;
    loop {
        let mut best = None;
        for v in 0..size {
            if !done[v] && dist[v].is_finite() && best.is_none_or(|b: usize| dist[v] < dist[b]) {
                best = Some(v);
            }
        }
        let Some(u) = best else { break };
        done[u] = true;
        for (v, w) in neighbours(u) {
            let cand = dist[u] + w;
            if cand < dist[v] {
                dist[v] = cand;
            }
        }
    }
    dist
}

/// Build the auxiliary graph with every reduction enabled.
pub fn build_aux_graph(problem: &Problem, commodity: Commodity) -> Result<AuxGraph, PathError> {
    build_aux_graph_with(problem, commodity, &AuxOptions::default())
}

pub fn build_aux_graph_with(
    problem: &Problem,
    commodity: Commodity,
    options: &AuxOptions,
) -> Result<AuxGraph, PathError> {
    let inst = &problem.instance;
    if inst.commodity_index(commodity).is_none() {
        return Err(PathError::UnknownCommodity(
            commodity.origin,
            commodity.destination,
        ));
    }
    let n = inst.n();
    let (o, d) = (commodity.origin, commodity.destination);
    let (oc, dc) = (n, n + 1);
    let size = n + 2;
    let resolve = |v: usize| match v {
        _ if v == oc => o,
        _ if v == dc => d,
        _ => v,
    };
    let t_direct = inst.t(o, d);
    let limit = t_direct + TIME_EPS;
    let alpha = inst.params().alpha;
    let access = &problem.derived.access;
    let exit = &problem.derived.exit;

    // Candidate hub nodes: everything but the terminals, plus both copies.
    let hub_nodes: Vec<usize> = (0..size).filter(|&v| v != o && v != d).collect();
    let hub_arc_ok = |i: usize, j: usize| -> bool {
        i != j && j != oc && i != dc && inst.edge_index(resolve(i), resolve(j)).is_some()
    };

    let mut arcs: Vec<AuxArc> = Vec::new();
    for &i in &hub_nodes {
        for &j in &hub_nodes {
            if !hub_arc_ok(i, j) {
                continue;
            }
            let time = alpha * inst.t(resolve(i), resolve(j));
            if !options.admission || time <= limit {
                arcs.push(AuxArc {
                    from: i,
                    to: j,
                    time,
                    kind: ArcKind::Hub,
                });
            }
        }
    }
    for &i in &hub_nodes {
        if i == dc {
            continue;
        }
        let ri = resolve(i);
        let time = inst.t(o, ri) + access[ri];
        let admitted = !options.admission
            || hub_nodes
                .iter()
                .any(|&j| hub_arc_ok(i, j) && time + alpha * inst.t(ri, resolve(j)) <= limit);
        if admitted {
            arcs.push(AuxArc {
                from: o,
                to: i,
                time,
                kind: ArcKind::Access,
            });
        }
    }
    for &j in &hub_nodes {
        if j == oc {
            continue;
        }
        let rj = resolve(j);
        let time = inst.t(rj, d) + exit[rj];
        let admitted = !options.admission
            || hub_nodes
                .iter()
                .any(|&i| hub_arc_ok(i, j) && alpha * inst.t(resolve(i), rj) + time <= limit);
        if admitted {
            arcs.push(AuxArc {
                from: j,
                to: d,
                time,
                kind: ArcKind::Exit,
            });
        }
    }

    let mut present = vec![true; size];
    if options.degree_pruning {
        loop {
            let mut indeg = vec![0usize; size];
            let mut outdeg = vec![0usize; size];
            for a in &arcs {
                outdeg[a.from] += 1;
                indeg[a.to] += 1;
            }
            let mut changed = false;
            for v in 0..size {
                if present[v] && v != o && v != d && (indeg[v] == 0 || outdeg[v] == 0) {
                    present[v] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            arcs.retain(|a| present[a.from] && present[a.to]);
        }
    }

    let mut graph = AuxGraph {
        commodity,
        n,
        t_direct,
        present,
        arcs,
        out_offsets: Vec::new(),
    };
    graph.reindex();

    if options.time_pruning {
        let from_o = graph.dist_from_origin();
        let to_d = graph.dist_to_destination();
        graph
            .arcs
            .retain(|a| from_o[a.from] + a.time + to_d[a.to] <= limit);
        for v in 0..size {
            if v != o && v != d && !(from_o[v] + to_d[v] <= limit) {
                graph.present[v] = false;
            }
        }
        let present = graph.present.clone();
        graph.arcs.retain(|a| present[a.from] && present[a.to]);
        if graph.arcs.is_empty() {
            for v in 0..size {
                graph.present[v] = v == o || v == d;
            }
        }
        graph.reindex();
    }
    Ok(graph)
}

impl AuxGraph {
    /// Assemble a graph from explicit arcs over the id space `0..n + 2`.
    /// Nodes touched by an arc, plus the two terminals, are present.
    pub fn from_arcs(commodity: Commodity, n: usize, t_direct: f64, arcs: Vec<AuxArc>) -> AuxGraph {
        let mut present = vec![false; n + 2];
        present[commodity.origin] = true;
        present[commodity.destination] = true;
        for a in &arcs {
            present[a.from] = true;
            present[a.to] = true;
        }
        let mut graph = AuxGraph {
            commodity,
            n,
            t_direct,
            present,
            arcs,
            out_offsets: Vec::new(),
        };
        graph.reindex();
        graph
    }

    fn reindex(&mut self) {
        self.arcs
            .sort_by(|a, b| (a.from, a.to).cmp(&(b.from, b.to)));
        let size = self.id_bound();
        let mut offsets = vec![0usize; size + 1];
        for a in &self.arcs {
            offsets[a.from + 1] += 1;
        }
        for v in 0..size {
            offsets[v + 1] += offsets[v];
        }
        self.out_offsets = offsets;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{complete_edges, unordered_pairs, Instance, Node, Params, TimeMatrix};

    /// Nodes on a line at the given coordinates, complete edge set.
    fn on_line(xs: &[f64], params: Params) -> Problem {
        let n = xs.len();
        let nodes = (0..n).map(|i| Node::new(i, format!("{i}"), 1.0)).collect();
        let mut time = TimeMatrix::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                time.set_symmetric(i, j, (xs[i] - xs[j]).abs());
            }
        }
        let inst = Instance::new(nodes, complete_edges(n), time, unordered_pairs(n), params).unwrap();
        Problem::prepare(inst).unwrap()
    }

    #[test]
    fn six_node_complete_graph_structure() {
        // o = 0 and d = 3 are the two far ends; every arc passes admission.
        let params = Params { p: 3, alpha: 0.2, vartheta: 0.0, ..Params::default() };
        let prob = on_line(&[0.0, 4.0, 5.0, 10.0, 6.0, 5.5], params);
        let opts = AuxOptions { time_pruning: false, ..AuxOptions::default() };
        let g = build_aux_graph_with(&prob, Commodity::new(0, 3), &opts).unwrap();
        assert_eq!(g.nodes().len(), 8);
        let count = |k: ArcKind| g.arcs().iter().filter(|a| a.kind == k).count();
        // Access targets: 4 interior nodes + origin copy; exits mirror that.
        assert_eq!(count(ArcKind::Access), 5);
        assert_eq!(count(ArcKind::Exit), 5);
        // 6 hub-capable nodes: 30 ordered pairs, minus 5 into the origin copy,
        // minus 5 out of the destination copy, plus the pair counted twice.
        assert_eq!(count(ArcKind::Hub), 21);
        assert!(g.arcs().iter().all(|a| a.to != 0 && a.from != 3));
        assert!(g.arcs().iter().all(|a| a.to != g.origin_copy() || a.from == 0));
        assert!(g.arcs().iter().all(|a| a.from != g.destination_copy() || a.to == 3));
    }

    #[test]
    fn huge_access_time_empties_graph() {
        let params = Params { p: 3, alpha: 0.2, vartheta: 0.0, ..Params::default() };
        let prob = on_line(&[0.0, 4.0, 5.0, 10.0], params);
        let derived = crate::model::DerivedTimes::uniform(4, 100.0);
        let prob = Problem::with_derived(prob.instance, derived).unwrap();
        let g = build_aux_graph(&prob, Commodity::new(0, 3)).unwrap();
        assert!(g.is_empty());
        assert!(g.arcs().iter().all(|a| a.kind != ArcKind::Access));
        assert_eq!(g.nodes(), vec![0, 3]);
    }

    #[test]
    fn single_surviving_hub_arc_gives_a_chain() {
        // o=(0,0), a=(3,1), b=(7,1), d=(10,0); only [a, b] may carry a hub edge.
        let pts = [(0.0, 0.0), (3.0, 1.0), (7.0, 1.0), (10.0, 0.0)];
        let n = pts.len();
        let nodes = (0..n).map(|i| Node::new(i, "", 1.0)).collect();
        let mut time = TimeMatrix::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let (dx, dy): (f64, f64) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
                time.set_symmetric(i, j, dx.hypot(dy));
            }
        }
        let params = Params { p: 2, alpha: 0.5, vartheta: 0.0, ..Params::default() };
        let inst = Instance::new(nodes, vec![(1, 2)], time, unordered_pairs(n), params).unwrap();
        let prob = Problem::prepare(inst).unwrap();
        let g = build_aux_graph(&prob, Commodity::new(0, 3)).unwrap();
        let pairs: Vec<(usize, usize)> = g.arcs().iter().map(|a| (a.from, a.to)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn unknown_commodity_is_rejected() {
        let prob = on_line(&[0.0, 1.0, 2.0], Params { p: 2, ..Params::default() });
        assert!(matches!(
            build_aux_graph(&prob, Commodity::new(2, 0)),
            Err(PathError::UnknownCommodity(2, 0))
        ));
    }

    #[test]
    fn repeated_builds_are_identical() {
        let inst = crate::model::synthetic_instance(9, 4, Params { p: 4, alpha: 0.3, ..Params::default() }).unwrap();
        let prob = Problem::prepare(inst).unwrap();
        for &c in prob.instance.commodities().iter().take(10) {
            let a = build_aux_graph(&prob, c).unwrap();
            let b = build_aux_graph(&prob, c).unwrap();
            assert_eq!(a.to_dot(), b.to_dot());
        }
    }

    #[test]
    fn surviving_arcs_respect_fixing_rules() {
        let inst = crate::model::synthetic_instance(10, 12, Params { p: 4, alpha: 0.5, ..Params::default() }).unwrap();
        let prob = Problem::prepare(inst).unwrap();
        let ta = prob.derived.access[0];
        let te = prob.derived.exit[0];
        for &c in prob.instance.commodities() {
            let g = build_aux_graph(&prob, c).unwrap();
            let t_od = g.t_direct();
            for a in g.arcs() {
                match a.kind {
                    ArcKind::Access => assert!(prob.instance.t(c.origin, g.resolve(a.to)) + ta <= t_od + TIME_EPS),
                    ArcKind::Exit => assert!(prob.instance.t(c.destination, g.resolve(a.from)) + te <= t_od + TIME_EPS),
                    ArcKind::Hub => assert!(a.time <= t_od + TIME_EPS),
                }
            }
            for v in g.nodes() {
                if v == c.origin || v == c.destination {
                    continue;
                }
                assert!(g.arcs().iter().any(|a| a.to == v));
                assert!(!g.out_arcs(v).is_empty());
            }
        }
    }
}
