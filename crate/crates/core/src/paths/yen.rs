//! Yen's k-shortest simple paths over an [`AuxGraph`].

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::auxgraph::AuxGraph;
use crate::error::PathError;

pub const DEFAULT_K_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct AuxPath {
    /// Node ids from origin to destination, copies unresolved.
    pub nodes: Vec<usize>,
    pub time: f64,
}

#[derive(Debug, Clone)]
struct Key(AuxPath);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .time
            .total_cmp(&other.0.time)
            .then_with(|| self.0.nodes.cmp(&other.0.nodes))
    }
}

/// Lazy stream of simple origin-destination paths in non-decreasing time,
/// ties broken by the node sequence. After `k_cap` paths the next item is
/// [`PathError::Capped`].
pub struct KShortestPaths<'a> {
    graph: &'a AuxGraph,
    k_cap: usize,
    found: Vec<Vec<usize>>,
    candidates: BTreeSet<Key>,
    seen: BTreeSet<Vec<usize>>,
    started: bool,
    finished: bool,
}

pub fn k_shortest_simple_paths(graph: &AuxGraph, k_cap: usize) -> KShortestPaths<'_> {
    KShortestPaths {
        graph,
        k_cap,
        found: Vec::new(),
        candidates: BTreeSet::new(),
        seen: BTreeSet::new(),
        started: false,
        finished: false,
    }
}

fn arc_time(graph: &AuxGraph, from: usize, to: usize) -> f64 {
    graph
        .out_arcs(from)
        .iter()
        .find(|a| a.to == to)
        .map(|a| a.time)
        .unwrap_or(f64::INFINITY)
}

fn path_time(graph: &AuxGraph, nodes: &[usize]) -> f64 {
    nodes.windows(2).map(|w| arc_time(graph, w[0], w[1])).sum()
}

/// Lexicographically smallest shortest path `source -> destination` avoiding
/// `blocked_nodes` and `blocked_arcs`.
fn spur_path(
    graph: &AuxGraph,
    source: usize,
    blocked_nodes: &[bool],
    blocked_arcs: &[(usize, usize)],
) -> Option<Vec<usize>> {
    let size = graph.id_bound();
    let target = graph.destination();
    let allowed = |from: usize, to: usize| {
        !blocked_nodes[from] && !blocked_nodes[to] && !blocked_arcs.contains(&(from, to))
    };
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); size];
    for a in graph.arcs() {
        if allowed(a.from, a.to) {
            incoming[a.to].push((a.from, a.time));
        }
    }
    let mut dist = vec![f64::INFINITY; size];
    let mut done = vec![false; size];
    dist[target] = 0.0;
    loop {
        let mut best: Option<usize> = None;
        for v in 0..size {
            if !done[v] && dist[v].is_finite() && best.is_none_or(|b| dist[v] < dist[b]) {
                best = Some(v);
            }
        }
        let Some(u) = best else { break };
        done[u] = true;
        for &(v, w) in &incoming[u] {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
            }
        }
    }
    if !dist[source].is_finite() {
        return None;
    }
    let mut path = vec![source];
    let mut on_path = vec![false; size];
    on_path[source] = true;
    let mut u = source;
    while u != target {
        let tol = 1e-12 * (1.0 + dist[u].abs());
        // Arcs are sorted by head, so the first tight arc is the smallest id.
        let next = graph.out_arcs(u).iter().find(|a| {
            allowed(a.from, a.to) && !on_path[a.to] && (a.time + dist[a.to] - dist[u]).abs() <= tol
        })?;
        u = next.to;
        on_path[u] = true;
        path.push(u);
    }
    Some(path)
}

impl KShortestPaths<'_> {
    fn push_candidate(&mut self, nodes: Vec<usize>) {
        if self.seen.insert(nodes.clone()) {
            let time = path_time(self.graph, &nodes);
            self.candidates.insert(Key(AuxPath { nodes, time }));
        }
    }

    fn spur_from_last(&mut self) {
        let last = self.found.last().cloned().unwrap_or_default();
        let size = self.graph.id_bound();
        for i in 0..last.len().saturating_sub(1) {
            let root = &last[..=i];
            let mut blocked_arcs = Vec::new();
            for p in &self.found {
                if p.len() > i + 1 && p[..=i] == *root {
                    blocked_arcs.push((p[i], p[i + 1]));
                }
            }
            let mut blocked_nodes = vec![false; size];
            for &v in &root[..i] {
                blocked_nodes[v] = true;
            }
            if let Some(spur) = spur_path(self.graph, last[i], &blocked_nodes, &blocked_arcs) {
                let mut total = root[..i].to_vec();
                total.extend(spur);
                self.push_candidate(total);
            }
        }
    }
}

impl Iterator for KShortestPaths<'_> {
    type Item = Result<AuxPath, PathError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        if !self.started {
            self.started = true;
            let blocked = vec![false; self.graph.id_bound()];
            if let Some(p) = spur_path(self.graph, self.graph.origin(), &blocked, &[]) {
                self.push_candidate(p);
            }
        } else {
            self.spur_from_last();
        }
        let Some(Key(best)) = self.candidates.pop_first() else {
            self.finished = true;
            return None;
        };
        if self.found.len() >= self.k_cap {
            self.finished = true;
            return Some(Err(PathError::Capped(self.k_cap)));
        }
        self.found.push(best.nodes.clone());
        Some(Ok(best))
    }
}
