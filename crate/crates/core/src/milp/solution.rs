//! Reading external solver output and checking it against the model.

use std::path::Path;

use super::{separate_sec, MilpModel, SecCut, VarKind};
use crate::error::MilpError;
use crate::gravity::demand;
use crate::model::Problem;
use crate::paths::{candidate_from_hubs, Enumeration};
use crate::solver::{compute_metrics, HubLine, Metrics, MetricsMode, Solution};

const TOL: f64 = 1e-6;

/// Parse `name value` or `name=value` lines. Blank lines and `#` comments
/// are skipped; variables not mentioned are zero.
pub fn parse_solution(model: &MilpModel, text: &str, path: &Path) -> Result<Vec<f64>, MilpError> {
    let mut values = vec![0.0; model.lp.variables.len()];
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, value) = match line.split_once('=') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => {
                let mut it = line.split_whitespace();
                let name = it.next().unwrap_or("");
                let value = it
                    .next()
                    .ok_or_else(|| MilpError::parse(path, no + 1, format!("missing value for `{name}`")))?;
                if it.next().is_some() {
                    return Err(MilpError::parse(path, no + 1, "expected `name value`"));
                }
                (name, value)
            }
        };
        let j = model
            .lp
            .var(name)
            .ok_or_else(|| MilpError::UnknownVariable(name.to_string()))?;
        values[j] = value
            .parse::<f64>()
            .map_err(|e| MilpError::parse(path, no + 1, format!("bad value `{value}`: {e}")))?;
    }
    Ok(values)
}

pub fn import_solution(model: &MilpModel, path: &Path) -> Result<Vec<f64>, MilpError> {
    let text = std::fs::read_to_string(path).map_err(|e| MilpError::io(path, e))?;
    parse_solution(model, &text, path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub row: String,
    pub activity: f64,
    pub rhs: f64,
    /// Signed slack; negative means violated.
    pub slack: f64,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
    /// Variables outside their bounds or, for binaries, not integral.
    pub bad_values: Vec<String>,
    pub line: Option<HubLine>,
    /// Subtour cuts violated by the assignment.
    pub cuts: Vec<SecCut>,
    pub model_objective: f64,
    pub recomputed_objective: f64,
    pub solution: Option<Solution>,
}

impl VerifyReport {
    pub fn has_subtour(&self) -> bool {
        !self.cuts.is_empty()
    }

    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty() && self.bad_values.is_empty() && self.cuts.is_empty() && self.line.is_some()
    }
}

pub fn verify_solution(
    model: &MilpModel,
    problem: &Problem,
    candidates: &Enumeration,
    values: &[f64],
) -> VerifyReport {
    let inst = &problem.instance;
    let lp = &model.lp;
    let mut violations = Vec::new();
    for row in &lp.rows {
        let activity = row.activity(values);
        if !row.sense.holds(activity, row.rhs, TOL) {
            let slack = match row.sense {
                super::Sense::Le => row.rhs - activity,
                super::Sense::Ge => activity - row.rhs,
                super::Sense::Eq => -(activity - row.rhs).abs(),
            };
            violations.push(Violation {
                row: row.name.clone(),
                activity,
                rhs: row.rhs,
                slack,
            });
        }
    }
    let mut bad_values = Vec::new();
    for (var, &x) in lp.variables.iter().zip(values) {
        let out_of_bounds = x < var.lower - TOL || x > var.upper + TOL;
        let fractional = var.kind == VarKind::Binary && (x - x.round()).abs() > TOL;
        if out_of_bounds || fractional {
            bad_values.push(var.name.clone());
        }
    }

    let z: Vec<f64> = (0..inst.n()).map(|k| values[model.z_var(k)]).collect();
    let y: Vec<f64> = (0..inst.edges().len()).map(|e| model.edge_value(e, values)).collect();
    let cuts = separate_sec(inst, &z, &y);
    let line = reconstruct_line(problem, &z, &y);

    let mut assignment = Vec::with_capacity(candidates.per_commodity.len());
    let mut recomputed = 0.0;
    for (c, paths) in candidates.per_commodity.iter().enumerate() {
        let chosen = model
            .v_vars(c)
            .iter()
            .position(|&j| values[j] > 0.5)
            .map(|i| candidate_from_hubs(problem, c, paths[i].hubs.clone()));
        if let Some(p) = &chosen {
            recomputed += p.profit.max(0.0);
        }
        assignment.push(chosen);
    }
    let solution = line.clone().map(|line| {
        let r = problem.params().r;
        let mut t_prime = Vec::with_capacity(assignment.len());
        let mut demands = Vec::with_capacity(assignment.len());
        for (c, a) in assignment.iter().enumerate() {
            let com = inst.commodities()[c];
            let t = a.as_ref().map_or(problem.direct_time(c), |p| p.tau);
            let w = demand(
                inst.nodes()[com.origin].population,
                inst.nodes()[com.destination].population,
                t,
                r,
            )
            .unwrap_or(0.0);
            t_prime.push(t);
            demands.push(w);
        }
        let mut sol = Solution {
            line,
            assignment: assignment.clone(),
            objective: recomputed,
            t_prime,
            demand: demands,
            metrics: Metrics::default(),
        };
        sol.metrics = compute_metrics(problem, &sol, MetricsMode::default());
        sol
    });
    VerifyReport {
        violations,
        bad_values,
        line,
        cuts,
        model_objective: lp.objective_value(values),
        recomputed_objective: recomputed,
        solution,
    }
}

/// The hub line spelled out by `z` and `y`, if they form one simple path
/// through exactly the open hubs.
fn reconstruct_line(problem: &Problem, z: &[f64], y: &[f64]) -> Option<HubLine> {
    let inst = &problem.instance;
    let p = problem.params().p;
    let hubs: Vec<usize> = (0..inst.n()).filter(|&k| z[k] > 0.5).collect();
    if hubs.len() != p || p < 2 {
        return None;
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); inst.n()];
    let mut count = 0;
    for (e, &(a, b)) in inst.edges().iter().enumerate() {
        if y[e] > 0.5 {
            if z[a] <= 0.5 || z[b] <= 0.5 {
                return None;
            }
            adj[a].push(b);
            adj[b].push(a);
            count += 1;
        }
    }
    if count != p - 1 {
        return None;
    }
    let start = *hubs.iter().find(|&&k| adj[k].len() == 1)?;
    let mut nodes = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while let Some(&next) = adj[cur].iter().find(|&&m| m != prev) {
        if nodes.contains(&next) {
            return None;
        }
        nodes.push(next);
        prev = cur;
        cur = next;
    }
    HubLine::new(inst, nodes).ok()
}
