//! Candidate hub paths per commodity.

mod bound;
mod yen;

use std::fmt;
use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::auxgraph::{build_aux_graph, AuxGraph};
use crate::error::PathError;
use crate::gravity::{path_time, profit};
use crate::model::{Commodity, Problem, TIME_EPS};

pub use bound::{commodity_upper_bound, CommodityBound};
pub use yen::{k_shortest_simple_paths, AuxPath, KShortestPaths, DEFAULT_K_CAP};

/// Which endpoints of the commodity are themselves hubs of the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathType {
    /// Origin and destination are both hubs.
    Odh,
    /// Only the origin is a hub.
    Oh,
    /// Only the destination is a hub.
    Dh,
    /// Neither endpoint is a hub.
    Odnh,
}

impl PathType {
    pub fn classify(origin: usize, destination: usize, hubs: &[usize]) -> PathType {
        let first = hubs.first() == Some(&origin);
        let last = hubs.last() == Some(&destination);
        match (first, last) {
            (true, true) => PathType::Odh,
            (true, false) => PathType::Oh,
            (false, true) => PathType::Dh,
            (false, false) => PathType::Odnh,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PathType::Odh => "ODH",
            PathType::Oh => "OH",
            PathType::Dh => "DH",
            PathType::Odnh => "ODNH",
        }
    }
}

impl fmt::Display for PathType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePath {
    pub commodity: Commodity,
    /// Original node ids, copies resolved.
    pub hubs: Vec<usize>,
    pub tau: f64,
    pub profit: f64,
    pub ptype: PathType,
    /// Consecutive hub pairs as `(min, max)`, in path order.
    pub hub_edges: Vec<(usize, usize)>,
    /// Instance edge indices of `hub_edges`, in path order.
    pub edge_ids: Vec<usize>,
}

pub(crate) fn candidate_from_aux(
    problem: &Problem,
    aux: &AuxGraph,
    c: usize,
    nodes: &[usize],
) -> CandidatePath {
    let hubs: Vec<usize> = nodes[1..nodes.len() - 1].iter().map(|&v| aux.resolve(v)).collect();
    candidate_from_hubs(problem, c, hubs)
}

/// Build a candidate from a resolved hub sequence; `tau` and `profit` are
/// computed from scratch.
pub fn candidate_from_hubs(problem: &Problem, c: usize, hubs: Vec<usize>) -> CandidatePath {
    let inst = &problem.instance;
    let commodity = inst.commodities()[c];
    let tau = path_time(
        commodity.origin,
        &hubs,
        commodity.destination,
        inst.time(),
        &problem.derived,
        problem.params().alpha,
    )
    .expect("candidate has at least two hubs");
    let term = problem.profit_term(c);
    let value = if tau <= term.t_direct {
        profit(&term, tau).unwrap_or(0.0)
    } else {
        0.0
    };
    let hub_edges: Vec<(usize, usize)> = hubs
        .windows(2)
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
        .collect();
    let edge_ids: Vec<usize> = hub_edges
        .iter()
        .map(|&(a, b)| inst.edge_index(a, b).expect("hub edge is a candidate edge"))
        .collect();
    CandidatePath {
        commodity,
        ptype: PathType::classify(commodity.origin, commodity.destination, &hubs),
        hubs,
        tau,
        profit: value,
        hub_edges,
        edge_ids,
    }
}

/// Time of the direct two-hub route `o -> i -> j -> d` (original ids).
pub fn shortcut_time(problem: &Problem, commodity: Commodity, i: usize, j: usize) -> f64 {
    let inst = &problem.instance;
    let (o, d) = (commodity.origin, commodity.destination);
    (inst.t(o, i) + problem.derived.access[i])
        + problem.params().alpha * inst.t(i, j)
        + (inst.t(j, d) + problem.derived.exit[j])
}

/// Whether a path time passes the final filter.
pub fn passes_filter(tau: f64, t_direct: f64, strict: bool) -> bool {
    if strict {
        tau < t_direct - TIME_EPS
    } else {
        tau <= t_direct + TIME_EPS
    }
}

/// Whether some hub arc of a path of `hub_count` hubs offers a two-hub
/// shortcut at least as fast as `tau`.
pub fn is_dominated(min_shortcut: f64, tau: f64, hub_count: usize, exempt_two_hub: bool) -> bool {
    (hub_count >= 3 || !exempt_two_hub) && min_shortcut <= tau + TIME_EPS
}

struct Dfs<'a> {
    problem: &'a Problem,
    aux: &'a AuxGraph,
    c: usize,
    p: usize,
    strict: bool,
    exempt: bool,
    lb: Vec<f64>,
    on_path: Vec<bool>,
    path: Vec<usize>,
    out: Vec<CandidatePath>,
}

impl Dfs<'_> {
    /// `time` covers the arcs of `path`; `min_sc` is the smallest shortcut
    /// over the hub arcs taken so far.
    fn visit(&mut self, time: f64, min_sc: f64) {
        let u = *self.path.last().unwrap();
        let hubs = self.path.len() - 1;
        let t_direct = self.aux.t_direct();
        let d = self.aux.destination();
        let aux = self.aux;
        for arc in aux.out_arcs(u) {
            let v = arc.to;
            if self.on_path[v] {
                continue;
            }
            let t = time + arc.time;
            if v == d {
                if hubs < 2 {
                    continue;
                }
                if !passes_filter(t, t_direct, self.strict)
                    || is_dominated(min_sc, t, hubs, self.exempt)
                {
                    continue;
                }
                self.path.push(v);
                let cand = candidate_from_aux(self.problem, aux, self.c, &self.path);
                self.path.pop();
                self.out.push(cand);
                continue;
            }
            // Entering another hub.
            if hubs >= self.p {
                continue;
            }
            let bound = t + self.lb[v];
            if bound > t_direct + TIME_EPS {
                continue;
            }
            let sc = if u == self.aux.origin() {
                min_sc
            } else {
                let ru = aux.resolve(u);
                let rv = aux.resolve(v);
                min_sc.min(shortcut_time(self.problem, aux.commodity(), ru, rv))
            };
            if is_dominated(sc, bound, hubs + 1, self.exempt) {
                continue;
            }
            self.on_path[v] = true;
            self.path.push(v);
            self.visit(t, sc);
            self.path.pop();
            self.on_path[v] = false;
        }
    }
}

/// Every simple path of the auxiliary graph with at most `p` hubs and at
/// least one hub arc that beats the direct time and is not dominated by a
/// two-hub shortcut over one of its own hub arcs. Sorted by `(tau, hubs)`.
pub fn enumerate_candidates(
    problem: &Problem,
    aux: &AuxGraph,
) -> Result<Vec<CandidatePath>, PathError> {
    let commodity = aux.commodity();
    let c = problem
        .instance
        .commodity_index(commodity)
        .ok_or(PathError::UnknownCommodity(commodity.origin, commodity.destination))?;
    let params = problem.params();
    let mut dfs = Dfs {
        problem,
        aux,
        c,
        p: params.p,
        strict: params.strict_filter,
        exempt: params.selfloop_dominance_exempt,
        lb: aux.dist_to_destination(),
        on_path: vec![false; aux.id_bound()],
        path: vec![aux.origin()],
        out: Vec::new(),
    };
    dfs.on_path[aux.origin()] = true;
    dfs.visit(0.0, f64::INFINITY);
    let mut out = dfs.out;
    sort_candidates(&mut out);
    Ok(out)
}

pub fn sort_candidates(paths: &mut [CandidatePath]) {
    paths.sort_by(|a, b| a.tau.total_cmp(&b.tau).then_with(|| a.hubs.cmp(&b.hubs)));
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    /// Candidates per commodity, aligned with the instance commodity order.
    pub per_commodity: Vec<Vec<CandidatePath>>,
    pub errors: Vec<(Commodity, PathError)>,
    pub n_path: usize,
    pub t_path: Duration,
}

impl Enumeration {
    pub fn iter(&self) -> impl Iterator<Item = &CandidatePath> {
        self.per_commodity.iter().flatten()
    }
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
}

/// Build auxiliary graphs and enumerate candidates for every commodity on
/// `workers` threads. The result does not depend on `workers`.
pub fn enumerate_all(problem: &Problem, workers: usize) -> Enumeration {
    let start = Instant::now();
    let commodities = problem.instance.commodities();
    let results: Vec<Result<Vec<CandidatePath>, PathError>> = pool(workers).install(|| {
        commodities
            .par_iter()
            .map(|&c| {
                let aux = build_aux_graph(problem, c)?;
                enumerate_candidates(problem, &aux)
            })
            .collect()
    });
    let mut per_commodity = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for (c, r) in commodities.iter().zip(results) {
        match r {
            Ok(paths) => per_commodity.push(paths),
            Err(e) => {
                errors.push((*c, e));
                per_commodity.push(Vec::new());
            }
        }
    }
    let n_path = per_commodity.iter().map(Vec::len).sum();
    Enumeration {
        per_commodity,
        errors,
        n_path,
        t_path: start.elapsed(),
    }
}

/// Upper bounds for every commodity, computed on `workers` threads.
pub fn compute_bounds(problem: &Problem, workers: usize, k_cap: usize) -> Result<Vec<CommodityBound>, PathError> {
    pool(workers).install(|| {
        problem
            .instance
            .commodities()
            .par_iter()
            .map(|&c| {
                let aux = build_aux_graph(problem, c)?;
                commodity_upper_bound(problem, &aux, k_cap)
            })
            .collect()
    })
}

/// Candidate dump: `commodity_o,commodity_d,ptype,tau,profit,hubs`, in
/// commodity order then `(tau, hubs)`.
pub fn write_candidates_csv<W: Write>(out: &mut W, enumeration: &Enumeration) -> std::io::Result<()> {
    writeln!(out, "commodity_o,commodity_d,ptype,tau,profit,hubs")?;
    for path in enumeration.iter() {
        let hubs: Vec<String> = path.hubs.iter().map(usize::to_string).collect();
        writeln!(
            out,
            "{},{},{},{:?},{:?},{}",
            path.commodity.origin,
            path.commodity.destination,
            path.ptype,
            path.tau,
            path.profit,
            hubs.join(";")
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxgraph::{ArcKind, AuxArc};
    use crate::model::{unordered_pairs, Instance, Node, Params, TimeMatrix};

    fn arc(from: usize, to: usize, time: f64) -> AuxArc {
        AuxArc { from, to, time, kind: ArcKind::Hub }
    }

    #[test]
    fn yen_triangle() {
        // o = 0, a = 1, d = 2; ids 3 and 4 are unused copies.
        let g = AuxGraph::from_arcs(
            Commodity::new(0, 2),
            3,
            10.0,
            vec![arc(0, 1, 1.0), arc(1, 2, 1.0), arc(0, 2, 3.0)],
        );
        let got: Vec<AuxPath> = k_shortest_simple_paths(&g, 10).map(Result::unwrap).collect();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].nodes, vec![0, 1, 2]);
        assert_eq!(got[0].time, 2.0);
        assert_eq!(got[1].nodes, vec![0, 2]);
    }

    #[test]
    fn yen_single_path_and_cap() {
        let g = AuxGraph::from_arcs(Commodity::new(0, 2), 3, 10.0, vec![arc(0, 1, 1.0), arc(1, 2, 1.0)]);
        assert_eq!(k_shortest_simple_paths(&g, 10).count(), 1);
        let g = AuxGraph::from_arcs(
            Commodity::new(0, 2),
            3,
            10.0,
            vec![arc(0, 1, 1.0), arc(1, 2, 1.0), arc(0, 2, 3.0)],
        );
        let items: Vec<_> = k_shortest_simple_paths(&g, 1).collect();
        assert_eq!(items.len(), 2);
        assert_eq!(items[1], Err(PathError::Capped(1)));
    }

    #[test]
    fn yen_ties_follow_node_order() {
        let g = AuxGraph::from_arcs(
            Commodity::new(0, 3),
            4,
            10.0,
            vec![arc(0, 2, 1.0), arc(2, 3, 1.0), arc(0, 1, 1.0), arc(1, 3, 1.0)],
        );
        let got: Vec<Vec<usize>> = k_shortest_simple_paths(&g, 10).map(|p| p.unwrap().nodes).collect();
        assert_eq!(got, vec![vec![0, 1, 3], vec![0, 2, 3]]);
    }

    fn line_problem(xs: &[f64], edges: Vec<(usize, usize)>, params: Params) -> Problem {
        let n = xs.len();
        let nodes = (0..n).map(|i| Node::new(i, "", 1.0)).collect();
        let mut time = TimeMatrix::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                time.set_symmetric(i, j, (xs[i] - xs[j]).abs());
            }
        }
        Problem::prepare(Instance::new(nodes, edges, time, unordered_pairs(n), params).unwrap()).unwrap()
    }

    #[test]
    fn single_chain_gives_one_odnh_candidate() {
        let params = Params { p: 2, alpha: 0.5, vartheta: 0.0, ..Params::default() };
        let prob = line_problem(&[0.0, 4.0, 6.0, 10.0], vec![(1, 2)], params);
        let aux = build_aux_graph(&prob, Commodity::new(0, 3)).unwrap();
        let got = enumerate_candidates(&prob, &aux).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].hubs, vec![1, 2]);
        assert_eq!(got[0].ptype, PathType::Odnh);
        assert_eq!(got[0].tau, 9.0);
        assert!(got[0].profit > 0.0);
    }

    #[test]
    fn classification() {
        assert_eq!(PathType::classify(0, 3, &[0, 3]), PathType::Odh);
        assert_eq!(PathType::classify(0, 3, &[0, 1]), PathType::Oh);
        assert_eq!(PathType::classify(0, 3, &[1, 3]), PathType::Dh);
        assert_eq!(PathType::classify(0, 3, &[1, 2]), PathType::Odnh);
    }

    #[test]
    fn bound_of_empty_graph_is_zero() {
        let params = Params { p: 2, alpha: 0.5, vartheta: 0.0, ..Params::default() };
        let prob = line_problem(&[0.0, 4.0, 6.0, 10.0], vec![(0, 3)], params);
        // Commodity (1, 2): the only hub edge is [0, 3], which takes a detour.
        let aux = build_aux_graph(&prob, Commodity::new(1, 2)).unwrap();
        assert!(aux.is_empty());
        let b = commodity_upper_bound(&prob, &aux, DEFAULT_K_CAP).unwrap();
        assert_eq!(b.ub, 0.0);
        assert!(b.witness.is_none());
    }

    #[test]
    fn bound_of_single_candidate_is_its_profit() {
        let params = Params { p: 2, alpha: 0.5, vartheta: 0.0, ..Params::default() };
        let prob = line_problem(&[0.0, 4.0, 6.0, 10.0], vec![(1, 2)], params);
        let aux = build_aux_graph(&prob, Commodity::new(0, 3)).unwrap();
        let b = commodity_upper_bound(&prob, &aux, DEFAULT_K_CAP).unwrap();
        let c = prob.instance.commodity_index(Commodity::new(0, 3)).unwrap();
        let expected = profit(&prob.profit_term(c), 9.0).unwrap();
        assert_eq!(b.ub, expected);
        assert_eq!(b.witness.unwrap().hubs, vec![1, 2]);
    }

    #[test]
    fn enumeration_is_worker_independent() {
        let params = Params { p: 3, alpha: 0.4, ..Params::default() };
        let inst = crate::model::synthetic_instance(8, 21, params).unwrap();
        let prob = Problem::prepare(inst).unwrap();
        let a = enumerate_all(&prob, 1);
        let b = enumerate_all(&prob, 4);
        assert_eq!(a.per_commodity, b.per_commodity);
        assert!(a.n_path > 0);
        let mut x = Vec::new();
        let mut y = Vec::new();
        write_candidates_csv(&mut x, &a).unwrap();
        write_candidates_csv(&mut y, &b).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn empty_commodity_list() {
        let params = Params { p: 2, ..Params::default() };
        let inst = crate::model::synthetic_instance(5, 2, params).unwrap();
        let inst = inst.with_commodities(Vec::new()).unwrap();
        let prob = Problem::prepare(inst).unwrap();
        let e = enumerate_all(&prob, 2);
        assert_eq!(e.n_path, 0);
        assert!(e.per_commodity.is_empty());
    }
}
