//! Exhaustive search over all canonical hub lines.

use rayon::prelude::*;

use crate::error::SolverError;
use crate::model::{Instance, Problem};
use crate::paths::Enumeration;

use super::index::{CandidateIndex, Scratch};
use super::{evaluate_line, HubLine, MetricsMode, Solution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerateConfig {
    /// Refuse instances with more canonical lines than this.
    pub line_cap: u64,
    pub workers: usize,
    pub metrics: MetricsMode,
}

impl Default for EnumerateConfig {
    fn default() -> Self {
        EnumerateConfig {
            line_cap: 10_000_000,
            workers: 1,
            metrics: MetricsMode::default(),
        }
    }
}

pub(crate) fn adjacency(instance: &Instance) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); instance.n()];
    for (e, &(a, b)) in instance.edges().iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// Walks simple paths of `p` nodes starting at `start` in lexicographic
/// order, calling `visit` on each canonical one. `visit` returns `false` to
/// stop the walk.
pub(crate) fn walk_lines<F>(adj: &[Vec<(usize, usize)>], p: usize, start: usize, mut visit: F)
where
    F: FnMut(&[usize], &[usize]) -> bool,
{
    fn rec<F: FnMut(&[usize], &[usize]) -> bool>(
        adj: &[Vec<(usize, usize)>],
        p: usize,
        nodes: &mut Vec<usize>,
        edges: &mut Vec<usize>,
        on: &mut [bool],
        visit: &mut F,
    ) -> bool {
        if nodes.len() == p {
            if nodes[0] < nodes[p - 1] {
                return visit(nodes, edges);
            }
            return true;
        }
        let u = *nodes.last().unwrap();
        for &(v, e) in &adj[u] {
            if on[v] || (nodes.len() + 1 == p && v < nodes[0]) {
                continue;
            }
            on[v] = true;
            nodes.push(v);
            edges.push(e);
            let go_on = rec(adj, p, nodes, edges, on, visit);
            edges.pop();
            nodes.pop();
            on[v] = false;
            if !go_on {
                return false;
            }
        }
        true
    }
    let mut on = vec![false; adj.len()];
    on[start] = true;
    let mut nodes = vec![start];
    let mut edges = Vec::new();
    rec(adj, p, &mut nodes, &mut edges, &mut on, &mut visit);
}

/// Number of canonical lines, counting at most `limit + 1`.
pub fn count_lines(instance: &Instance, limit: u64) -> u64 {
    let adj = adjacency(instance);
    let p = instance.params().p;
    let mut count = 0u64;
    for s in 0..instance.n() {
        walk_lines(&adj, p, s, |_, _| {
            count += 1;
            count <= limit
        });
        if count > limit {
            break;
        }
    }
    count
}

fn falling_factorial_half(n: usize, p: usize) -> f64 {
    (0..p).map(|i| (n - i) as f64).product::<f64>() / 2.0
}

type Best = Option<(f64, Vec<usize>)>;

fn better(a: Best, b: Best) -> Best {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// Score every canonical line and return the best; equal objectives go to
/// the lexicographically smallest node list.
pub fn solve_enumerate(
    problem: &Problem,
    candidates: &Enumeration,
    config: &EnumerateConfig,
) -> Result<Solution, SolverError> {
    let inst = &problem.instance;
    let p = inst.params().p;
    let estimate = falling_factorial_half(inst.n(), p);
    if estimate > config.line_cap as f64 {
        let exact = count_lines(inst, config.line_cap);
        if exact > config.line_cap {
            return Err(SolverError::TooManyLines {
                estimate,
                cap: config.line_cap,
            });
        }
    }
    let index = CandidateIndex::new(candidates);
    let adj = adjacency(inst);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .expect("thread pool");
    let best = pool.install(|| {
        (0..inst.n())
            .into_par_iter()
            .map(|s| {
                let mut scratch = Scratch::default();
                let mut best: Best = None;
                walk_lines(&adj, p, s, |nodes, edges| {
                    let obj = index.line_objective(edges, &mut scratch);
                    if best.as_ref().is_none_or(|(b, _)| obj > *b) {
                        best = Some((obj, nodes.to_vec()));
                    }
                    true
                });
                best
            })
            .reduce(|| None, better)
    });
    let (_, nodes) = best.ok_or(SolverError::NoFeasibleLine(p))?;
    let line = HubLine::new(inst, nodes)?;
    Ok(evaluate_line(problem, candidates, &line, config.metrics))
}
