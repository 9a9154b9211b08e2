//! Choosing the hub line.

mod bnb;
mod enumerate;
mod index;

use std::io::Write;

use crate::error::SolverError;
use crate::gravity::demand;
use crate::model::{Instance, Problem};
use crate::paths::{CandidatePath, Enumeration};

pub use bnb::{solve_bnb, BnbConfig, BnbStats, Expansion};
pub use enumerate::{count_lines, solve_enumerate, EnumerateConfig};
pub use index::CandidateIndex;

/// An ordered simple path of hubs, stored with first id < last id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HubLine {
    nodes: Vec<usize>,
    edges: Vec<usize>,
}

impl HubLine {
    /// Validate `nodes` against the instance and orient it canonically.
    pub fn new(instance: &Instance, nodes: Vec<usize>) -> Result<HubLine, SolverError> {
        let p = instance.params().p;
        if nodes.len() != p {
            return Err(SolverError::InvalidLine(format!(
                "expected {p} hubs, got {}",
                nodes.len()
            )));
        }
        let mut seen = vec![false; instance.n()];
        for &v in &nodes {
            if v >= instance.n() {
                return Err(SolverError::InvalidLine(format!("node {v} out of range")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(SolverError::InvalidLine(format!("node {v} repeated")));
            }
        }
        let mut nodes = nodes;
        if nodes.first() > nodes.last() {
            nodes.reverse();
        }
        let mut edges = Vec::with_capacity(nodes.len().saturating_sub(1));
        for w in nodes.windows(2) {
            let e = instance.edge_index(w[0], w[1]).ok_or_else(|| {
                SolverError::InvalidLine(format!("[{}, {}] is not a candidate hub edge", w[0], w[1]))
            })?;
            edges.push(e);
        }
        Ok(HubLine { nodes, edges })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Instance edge ids in line order.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn contains_edge(&self, e: usize) -> bool {
        self.edges.contains(&e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricsMode {
    #[default]
    DemandWeighted,
    Unweighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub pct_od_served: f64,
    pub pct_demand_served: f64,
    pub pct_time_saved: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub line: HubLine,
    /// Chosen path per commodity; `None` means direct travel.
    pub assignment: Vec<Option<CandidatePath>>,
    pub objective: f64,
    pub t_prime: Vec<f64>,
    pub demand: Vec<f64>,
    pub metrics: Metrics,
}

/// Best compatible candidate of one commodity: highest profit, then the
/// smallest hub list.
fn best_compatible<'a>(paths: &'a [CandidatePath], line: &HubLine) -> Option<&'a CandidatePath> {
    let mut best: Option<&CandidatePath> = None;
    for cand in paths {
        if !cand.edge_ids.iter().all(|&e| line.contains_edge(e)) {
            continue;
        }
        best = match best {
            None => Some(cand),
            Some(b) if cand.profit > b.profit || (cand.profit == b.profit && cand.hubs < b.hubs) => Some(cand),
            keep => keep,
        };
    }
    best
}

pub fn evaluate_line(problem: &Problem, candidates: &Enumeration, line: &HubLine, mode: MetricsMode) -> Solution {
    let inst = &problem.instance;
    let r = problem.params().r;
    let mut assignment = Vec::with_capacity(candidates.per_commodity.len());
    let mut objective = 0.0;
    let mut t_prime = Vec::new();
    let mut demands = Vec::new();
    for (c, paths) in candidates.per_commodity.iter().enumerate() {
        let com = inst.commodities()[c];
        let chosen = best_compatible(paths, line).cloned();
        let t = chosen.as_ref().map_or(problem.direct_time(c), |p| p.tau);
        if let Some(p) = &chosen {
            objective += p.profit.max(0.0);
        }
        let w = demand(
            inst.nodes()[com.origin].population,
            inst.nodes()[com.destination].population,
            t,
            r,
        )
        .unwrap_or(0.0);
        t_prime.push(t);
        demands.push(w);
        assignment.push(chosen);
    }
    let mut sol = Solution {
        line: line.clone(),
        assignment,
        objective,
        t_prime,
        demand: demands,
        metrics: Metrics::default(),
    };
    sol.metrics = compute_metrics(problem, &sol, mode);
    sol
}

pub fn compute_metrics(problem: &Problem, solution: &Solution, mode: MetricsMode) -> Metrics {
    let m = solution.assignment.len();
    if m == 0 {
        return Metrics::default();
    }
    let served = solution.assignment.iter().filter(|a| a.is_some()).count();
    let (mut w_served, mut w_all, mut before, mut after) = (0.0, 0.0, 0.0, 0.0);
    for c in 0..m {
        let w = solution.demand[c];
        let t_final = solution.t_prime[c];
        let t_direct = problem.direct_time(c);
        if solution.assignment[c].is_some() {
            w_served += w;
        }
        w_all += w;
        let weight = match mode {
            MetricsMode::DemandWeighted => w,
            MetricsMode::Unweighted => 1.0,
        };
        before += weight * t_direct;
        after += weight * t_final;
    }
    let ratio = |num: f64, den: f64| if den > 0.0 { 100.0 * num / den } else { 0.0 };
    Metrics {
        pct_od_served: 100.0 * served as f64 / m as f64,
        pct_demand_served: ratio(w_served, w_all),
        pct_time_saved: ratio(before - after, before),
    }
}

/// Per-commodity rows followed by a `key,value` summary block.
pub fn write_solution_csv<W: Write>(out: &mut W, problem: &Problem, solution: &Solution) -> std::io::Result<()> {
    writeln!(out, "o,d,served,t_direct,t_prime,demand,profit,hubs")?;
    for (c, com) in problem.instance.commodities().iter().enumerate() {
        let a = &solution.assignment[c];
        let hubs = a
            .as_ref()
            .map(|p| p.hubs.iter().map(usize::to_string).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{:?},{:?},{:?},{:?},{}",
            com.origin,
            com.destination,
            u8::from(a.is_some()),
            problem.direct_time(c),
            solution.t_prime[c],
            solution.demand[c],
            a.as_ref().map_or(0.0, |p| p.profit.max(0.0)),
            hubs
        )?;
    }
    writeln!(out)?;
    let line: Vec<String> = solution.line.nodes().iter().map(usize::to_string).collect();
    writeln!(out, "objective,{:?}", solution.objective)?;
    writeln!(out, "line,{}", line.join(";"))?;
    writeln!(out, "pct_od_served,{:?}", solution.metrics.pct_od_served)?;
    writeln!(out, "pct_demand_served,{:?}", solution.metrics.pct_demand_served)?;
    writeln!(out, "pct_time_saved,{:?}", solution.metrics.pct_time_saved)?;
    Ok(())
}
