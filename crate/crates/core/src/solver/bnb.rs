//! Best-first branch and bound over partial hub lines.
//!
//! A node fixes a simple path of hubs (grown at either end) and a set of
//! excluded edges. Its bound sums, over commodities, the best candidate that
//! could still be served by some completion: none of its edges excluded and,
//! together with the fixed path, a set of vertex-disjoint paths spanning at
//! most `p` nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::SolverError;
use crate::model::Problem;
use crate::paths::{CandidatePath, CommodityBound, Enumeration};

use super::enumerate::{adjacency, walk_lines};
use super::index::{CandidateIndex, Scratch};
use super::{evaluate_line, HubLine, MetricsMode, Solution};

const PRUNE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnbConfig {
    pub node_cap: u64,
    pub metrics: MetricsMode,
    /// Keep a record of every expanded node.
    pub trace: bool,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            node_cap: 10_000_000,
            metrics: MetricsMode::default(),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub path: Vec<usize>,
    pub excluded: Vec<usize>,
    pub bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BnbStats {
    pub root_bound: f64,
    pub expanded: u64,
    pub pushed: u64,
    pub trace: Vec<Expansion>,
}

struct Node {
    bound: f64,
    depth: usize,
    order: u64,
    path: Vec<usize>,
    excluded: Vec<usize>,
    /// Per commodity: index of the first candidate not yet ruled out.
    start: Vec<u32>,
    /// Per commodity: index of its best surviving candidate, if any.
    best: Vec<Option<u32>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.order.cmp(&self.order))
    }
}

struct Ctx<'a> {
    problem: &'a Problem,
    cands: &'a [Vec<CandidatePath>],
    caps: Vec<f64>,
    p: usize,
    n_edges: usize,
}

/// Path and exclusion state unpacked for fast compatibility tests.
struct View {
    on_path: Vec<bool>,
    degree: Vec<u8>,
    path_edge: Vec<bool>,
    excluded: Vec<bool>,
    path_nodes: usize,
}

impl View {
    fn new(ctx: &Ctx, path: &[usize], excluded: &[usize]) -> View {
        let inst = &ctx.problem.instance;
        let mut v = View {
            on_path: vec![false; inst.n()],
            degree: vec![0; inst.n()],
            path_edge: vec![false; ctx.n_edges],
            excluded: vec![false; ctx.n_edges],
            path_nodes: path.len(),
        };
        for &x in path {
            v.on_path[x] = true;
        }
        for w in path.windows(2) {
            v.degree[w[0]] += 1;
            v.degree[w[1]] += 1;
            v.path_edge[inst.edge_index(w[0], w[1]).unwrap()] = true;
        }
        for &e in excluded {
            v.excluded[e] = true;
        }
        v
    }

    fn admits(&self, cand: &CandidatePath, p: usize) -> bool {
        if cand.edge_ids.iter().any(|&e| self.excluded[e]) {
            return false;
        }
        let fresh = cand.hubs.iter().filter(|&&h| !self.on_path[h]).count();
        if self.path_nodes + fresh > p {
            return false;
        }
        // Union-find over the candidate's hubs; every path node shares label 0.
        let k = cand.hubs.len();
        let mut parent: Vec<usize> = (0..=k).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let label = |i: usize| if self.on_path[cand.hubs[i]] { 0 } else { i + 1 };
        for i in 0..k - 1 {
            if self.path_edge[cand.edge_ids[i]] {
                continue;
            }
            let (ra, rb) = (find(&mut parent, label(i)), find(&mut parent, label(i + 1)));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        for i in 0..k {
            let mut deg = self.degree[cand.hubs[i]] as usize;
            if i > 0 && !self.path_edge[cand.edge_ids[i - 1]] {
                deg += 1;
            }
            if i + 1 < k && !self.path_edge[cand.edge_ids[i]] {
                deg += 1;
            }
            if deg > 2 {
                return false;
            }
        }
        true
    }
}
impl Ctx<'_> {
    /// Advance each commodity's cursor past ruled-out candidates; returns the
    /// bound and fills `best`.
    fn bound(&self, view: &View, start: &mut [u32], best: &mut [Option<u32>]) -> f64 {
        let mut total = 0.0;
        for (c, paths) in self.cands.iter().enumerate() {
            let mut i = start[c] as usize;
            while i < paths.len() && !(paths[i].profit > 0.0 && view.admits(&paths[i], self.p)) {
                i += 1;
            }
            start[c] = i as u32;
            if i < paths.len() {
                best[c] = Some(i as u32);
                total += paths[i].profit.min(self.caps[c]);
            } else {
                best[c] = None;
            }
        }
        total
    }
}

fn line_key(path: &[usize]) -> Vec<usize> {
    let mut v = path.to_vec();
    if v.first() > v.last() {
        v.reverse();
    }
    v
}

/// Branch and bound; returns the optimum together with search statistics.
pub fn solve_bnb(
    problem: &Problem,
    candidates: &Enumeration,
    bounds: &[CommodityBound],
    config: &BnbConfig,
) -> Result<(Solution, BnbStats), SolverError> {
    let inst = &problem.instance;
    let p = inst.params().p;
    let n_c = candidates.per_commodity.len();
    let caps: Vec<f64> = (0..n_c)
        .map(|c| bounds.get(c).map_or(f64::INFINITY, |b| b.ub.max(0.0)))
        .collect();
    let ctx = Ctx {
        problem,
        cands: &candidates.per_commodity,
        caps,
        p,
        n_edges: inst.edges().len(),
    };
    let adj = adjacency(inst);
    let index = CandidateIndex::new(candidates);
    let mut scratch = Scratch::default();
    let mut stats = BnbStats::default();

    let mut start = vec![0u32; n_c];
    let mut best = vec![None; n_c];
    let root_bound = ctx.bound(&View::new(&ctx, &[], &[]), &mut start, &mut best);
    stats.root_bound = root_bound;

    if !(root_bound > 0.0) {
        let mut first: Option<Vec<usize>> = None;
        for s in 0..inst.n() {
            walk_lines(&adj, p, s, |nodes, _| {
                first = Some(nodes.to_vec());
                false
            });
            if first.is_some() {
                break;
            }
        }
        let nodes = first.ok_or(SolverError::NoFeasibleLine(p))?;
        let line = HubLine::new(inst, nodes)?;
        return Ok((evaluate_line(problem, candidates, &line, config.metrics), stats));
    }

    let mut heap = BinaryHeap::new();
    let mut order = 0u64;
    heap.push(Node {
        bound: root_bound,
        depth: 0,
        order,
        path: Vec::new(),
        excluded: Vec::new(),
        start,
        best,
    });
    let mut incumbent: Option<(f64, Vec<usize>)> = None;

    while let Some(node) = heap.pop() {
        if let Some((obj, _)) = &incumbent {
            if node.bound <= obj + PRUNE_EPS {
                break;
            }
        }
        stats.expanded += 1;
        if stats.expanded > config.node_cap {
            return Err(SolverError::NodeCap(config.node_cap));
        }
        if config.trace {
            stats.trace.push(Expansion {
                path: node.path.clone(),
                excluded: node.excluded.clone(),
                bound: node.bound,
            });
        }
        if node.path.len() == p {
            let obj = index.line_objective(&path_edges(problem, &node.path), &mut scratch);
            let key = line_key(&node.path);
            let improves = match &incumbent {
                None => true,
                Some((b, k)) => obj > *b || (obj == *b && key < *k),
            };
            if improves {
                incumbent = Some((obj, key));
            }
            continue;
        }
        let Some(edge) = branch_edge(&ctx, &adj, &node) else {
            continue;
        };
        let (a, b) = inst.edges()[edge];
        // Include: extend the path at whichever end the edge touches.
        let included = extend(&node.path, a, b);
        let mut excluded = node.excluded.clone();
        excluded.push(edge);
        excluded.sort_unstable();
        let children = [
            included.map(|path| (path, node.excluded.clone())),
            Some((node.path.clone(), excluded)),
        ];
        for (path, excluded) in children.into_iter().flatten() {
            let view = View::new(&ctx, &path, &excluded);
            let mut start = node.start.clone();
            let mut best = node.best.clone();
            let bound = ctx.bound(&view, &mut start, &mut best);
            if let Some((obj, _)) = &incumbent {
                if bound <= obj + PRUNE_EPS {
                    continue;
                }
            }
            if !can_complete(&adj, &path, &view.excluded, p) {
                continue;
            }
            order += 1;
            stats.pushed += 1;
            heap.push(Node {
                bound,
                depth: path.len(),
                order,
                path,
                excluded,
                start,
                best,
            });
        }
    }
    let (_, nodes) = incumbent.ok_or(SolverError::NoFeasibleLine(p))?;
    let line = HubLine::new(inst, nodes)?;
    Ok((evaluate_line(problem, candidates, &line, config.metrics), stats))
}

fn path_edges(problem: &Problem, path: &[usize]) -> Vec<usize> {
    path.windows(2)
        .map(|w| problem.instance.edge_index(w[0], w[1]).unwrap())
        .collect()
}

fn extend(path: &[usize], a: usize, b: usize) -> Option<Vec<usize>> {
    if path.is_empty() {
        return Some(vec![a, b]);
    }
    let (first, last) = (path[0], path[path.len() - 1]);
    let grow_end = |from: usize, to: usize| -> Option<Vec<usize>> {
        if path.contains(&to) {
            return None;
        }
        let mut v = path.to_vec();
        if from == last {
            v.push(to);
        } else {
            v.insert(0, to);
        }
        Some(v)
    };
    if a == last || a == first {
        grow_end(a, b)
    } else if b == last || b == first {
        grow_end(b, a)
    } else {
        None
    }
}

/// Whether `edge` can be appended at an end of `path` without revisiting a node.
fn attachable(path: &[usize], a: usize, b: usize) -> bool {
    if path.is_empty() {
        return true;
    }
    let (first, last) = (path[0], path[path.len() - 1]);
    ((a == first || a == last) && !path.contains(&b)) || ((b == first || b == last) && !path.contains(&a))
}

/// Edge to branch on: the first attachable edge of the best candidate of the
/// most valuable commodity, else the smallest attachable edge id.
fn branch_edge(ctx: &Ctx, adj: &[Vec<(usize, usize)>], node: &Node) -> Option<usize> {
    let inst = &ctx.problem.instance;
    let mut order: Vec<(f64, usize, u32)> = node
        .best
        .iter()
        .enumerate()
        .filter_map(|(c, b)| b.map(|i| (ctx.cands[c][i as usize].profit, c, i)))
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let on_path_edge = |e: usize| {
        let (a, b) = inst.edges()[e];
        node.path
            .windows(2)
            .any(|w| (w[0] == a && w[1] == b) || (w[0] == b && w[1] == a))
    };
    for (_, c, i) in order {
        let cand = &ctx.cands[c][i as usize];
        for (&(a, b), &e) in cand.hub_edges.iter().zip(&cand.edge_ids) {
            if on_path_edge(e) || node.excluded.binary_search(&e).is_ok() {
                continue;
            }
            if attachable(&node.path, a, b) {
                return Some(e);
            }
        }
    }
    let mut ends: Vec<usize> = match node.path.as_slice() {
        [] => (0..inst.n()).collect(),
        p => vec![p[0], p[p.len() - 1]],
    };
    ends.dedup();
    ends.iter()
        .flat_map(|&u| adj[u].iter().map(|&(_, e)| e))
        .filter(|&e| node.excluded.binary_search(&e).is_err() && !on_path_edge(e))
        .filter(|&e| {
            let (a, b) = inst.edges()[e];
            attachable(&node.path, a, b)
        })
        .min()
}

/// Necessary condition: the path can still grow to `p` nodes using
/// non-excluded edges, checked by a bounded search from its ends.
fn can_complete(adj: &[Vec<(usize, usize)>], path: &[usize], excluded: &[bool], p: usize) -> bool {
    if path.len() >= p {
        return path.len() == p;
    }
    if path.is_empty() {
        return true;
    }
    // Nodes reachable from either end without touching the path interior.
    let mut seen = vec![false; adj.len()];
    for &v in path {
        seen[v] = true;
    }
    let mut stack = vec![path[0], path[path.len() - 1]];
    let mut count = path.len();
    while let Some(u) = stack.pop() {
        for &(v, e) in &adj[u] {
            if !seen[v] && !excluded[e] {
                seen[v] = true;
                count += 1;
                if count >= p {
                    return true;
                }
                stack.push(v);
            }
        }
    }
    false
}
