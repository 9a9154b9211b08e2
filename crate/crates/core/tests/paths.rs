mod common;

use std::collections::BTreeSet;

use common::{all_lines, problem, rel_close, serves};
use hubline::auxgraph::{build_aux_graph, build_aux_graph_with, AuxGraph, AuxOptions};
use hubline::gravity::profit;
use hubline::model::{sparsify, SparsifyConfig};
use hubline::paths::{
    compute_bounds, enumerate_all, enumerate_candidates, k_shortest_simple_paths, write_candidates_csv,
    CandidatePath, Enumeration, PathType, DEFAULT_K_CAP,
};
use hubline::{Params, Problem};

/// Time of `o -> hubs -> d`, written out leg by leg.
fn oracle_time(prob: &Problem, o: usize, hubs: &[usize], d: usize) -> f64 {
    let inst = &prob.instance;
    let a = prob.params().alpha;
    let first = hubs[0];
    let last = *hubs.last().unwrap();
    let mut t = inst.t(o, first) + prob.derived.access[first];
    for w in hubs.windows(2) {
        t += a * inst.t(w[0], w[1]);
    }
    t + inst.t(last, d) + prob.derived.exit[last]
}

/// Hub sequences found by trying every ordered tuple of nodes.
fn oracle_candidates(prob: &Problem, c: usize) -> BTreeSet<Vec<usize>> {
    let inst = &prob.instance;
    let com = inst.commodities()[c];
    let (o, d) = (com.origin, com.destination);
    let t_od = inst.t(o, d);
    let mut found = BTreeSet::new();
    let mut seq = Vec::new();
    fn rec(
        prob: &Problem,
        o: usize,
        d: usize,
        t_od: f64,
        seq: &mut Vec<usize>,
        found: &mut BTreeSet<Vec<usize>>,
    ) {
        let inst = &prob.instance;
        let params = prob.params();
        let k = seq.len();
        if k >= 2 && *seq.last().unwrap() != o {
            let tau = oracle_time(prob, o, seq, d);
            let fast = if params.strict_filter {
                tau < t_od - 1e-9
            } else {
                tau <= t_od + 1e-9
            };
            let dominated = (k >= 3 || !params.selfloop_dominance_exempt)
                && seq
                    .windows(2)
                    .any(|w| oracle_time(prob, o, &[w[0], w[1]], d) <= tau + 1e-9);
            if fast && !dominated {
                found.insert(seq.clone());
            }
        }
        if k == params.p || seq.last() == Some(&d) {
            return;
        }
        for h in 0..inst.n() {
            if seq.contains(&h) {
                continue;
            }
            // Only the first hub may be the origin.
            if h == o && k > 0 {
                continue;
            }
            if let Some(&last) = seq.last() {
                if inst.edge_index(last, h).is_none() {
                    continue;
                }
            } else if h == d {
                continue;
            }
            seq.push(h);
            rec(prob, o, d, t_od, seq, found);
            seq.pop();
        }
    }
    rec(prob, o, d, t_od, &mut seq, &mut found);
    found
}

fn hub_set(paths: &[CandidatePath]) -> BTreeSet<Vec<usize>> {
    paths.iter().map(|p| p.hubs.clone()).collect()
}

fn dump(e: &Enumeration) -> String {
    let mut out = Vec::new();
    write_candidates_csv(&mut out, e).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn enumeration_matches_brute_force() {
    let mut total = 0;
    for (seed, p, alpha, strict) in [
        (1, 2, 0.2, true),
        (2, 3, 0.5, true),
        (3, 4, 0.8, true),
        (4, 3, 0.2, false),
        (5, 5, 0.5, true),
        (6, 4, 1.0, true),
    ] {
        let mut prob = problem(7, seed, p, alpha);
        prob.instance = prob
            .instance
            .with_params(Params {
                strict_filter: strict,
                ..prob.params().clone()
            })
            .unwrap();
        let cands = enumerate_all(&prob, 2);
        for c in 0..prob.instance.commodities().len() {
            let got = hub_set(&cands.per_commodity[c]);
            assert_eq!(got, oracle_candidates(&prob, c), "seed {seed} commodity {c}");
            total += got.len();
        }
    }
    assert!(total > 100, "corpus too thin: {total}");
}

#[test]
fn candidates_are_profitable_and_consistent() {
    for seed in 10..14 {
        let prob = problem(8, seed, 4, 0.5);
        let cands = enumerate_all(&prob, 1);
        for (c, paths) in cands.per_commodity.iter().enumerate() {
            let com = prob.instance.commodities()[c];
            let (o, d) = (com.origin, com.destination);
            let t_od = prob.direct_time(c);
            for w in paths.windows(2) {
                assert!((w[0].tau, &w[0].hubs) <= (w[1].tau, &w[1].hubs));
            }
            for path in paths {
                assert!(path.profit > 0.0);
                let tau = oracle_time(&prob, o, &path.hubs, d);
                assert!(rel_close(path.tau, tau, 1e-12));
                let again = profit(&prob.profit_term(c), tau).unwrap();
                assert!(rel_close(path.profit, again, 1e-12));
                // Access to the first hub plus exit from the last never exceeds the direct time.
                let h1 = path.hubs[0];
                let hk = *path.hubs.last().unwrap();
                let ends = prob.instance.t(o, h1)
                    + prob.derived.access[h1]
                    + prob.derived.exit[hk]
                    + prob.instance.t(hk, d);
                assert!(ends <= t_od + 1e-9);
                assert_eq!(path.ptype, PathType::classify(o, d, &path.hubs));
                assert_eq!(path.edge_ids.len(), path.hubs.len() - 1);
            }
        }
    }
}

#[test]
fn pruning_keeps_every_candidate() {
    for seed in 100..120 {
        let prob = problem(8, seed, 3 + (seed as usize % 3), [0.2, 0.5, 0.8][seed as usize % 3]);
        let mut pruned = Vec::new();
        let mut unpruned = Vec::new();
        for &com in prob.instance.commodities() {
            let a = build_aux_graph(&prob, com).unwrap();
            let b = build_aux_graph_with(&prob, com, &AuxOptions::unpruned()).unwrap();
            assert!(a.arcs().len() <= b.arcs().len());
            pruned.push(enumerate_candidates(&prob, &a).unwrap());
            unpruned.push(enumerate_candidates(&prob, &b).unwrap());
        }
        let wrap = |per_commodity| Enumeration {
            per_commodity,
            errors: Vec::new(),
            n_path: 0,
            t_path: Default::default(),
        };
        assert_eq!(dump(&wrap(pruned)), dump(&wrap(unpruned)), "seed {seed}");
    }
}

fn all_simple_paths(aux: &AuxGraph) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut path = vec![aux.origin()];
    fn rec(aux: &AuxGraph, path: &mut Vec<usize>, t: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        let u = *path.last().unwrap();
        if u == aux.destination() {
            out.push((path.clone(), t));
            return;
        }
        for arc in aux.out_arcs(u) {
            if !path.contains(&arc.to) {
                path.push(arc.to);
                rec(aux, path, t + arc.time, out);
                path.pop();
            }
        }
    }
    rec(aux, &mut path, 0.0, &mut out);
    out
}

#[test]
fn yen_lists_every_simple_path_in_time_order() {
    let prob = problem(5, 7, 3, 0.5);
    let mut checked = 0;
    for &com in prob.instance.commodities() {
        let aux = build_aux_graph_with(&prob, com, &AuxOptions::unpruned()).unwrap();
        let mut expected = all_simple_paths(&aux);
        expected.sort_by(|a, b| a.1.total_cmp(&b.1));
        let got: Vec<_> = k_shortest_simple_paths(&aux, DEFAULT_K_CAP)
            .map(Result::unwrap)
            .collect();
        assert_eq!(got.len(), expected.len());
        for w in got.windows(2) {
            assert!(w[0].time <= w[1].time + 1e-12);
        }
        for (g, e) in got.iter().zip(&expected) {
            assert!((g.time - e.1).abs() < 1e-9);
        }
        let a: BTreeSet<_> = got.iter().map(|p| p.nodes.clone()).collect();
        let b: BTreeSet<_> = expected.iter().map(|p| p.0.clone()).collect();
        assert_eq!(a, b);
        checked += got.len();
    }
    assert!(checked > 500, "{checked}");
}

#[test]
fn bounds_dominate_every_line() {
    for (seed, n, p, alpha) in [(40, 6, 2, 0.2), (41, 6, 3, 0.5), (42, 7, 4, 0.8), (43, 8, 3, 0.2)] {
        let prob = problem(n, seed, p, alpha);
        let cands = enumerate_all(&prob, 1);
        let bounds = compute_bounds(&prob, 2, DEFAULT_K_CAP).unwrap();
        for (c, b) in bounds.iter().enumerate() {
            assert!(!b.capped);
            let best = cands.per_commodity[c].iter().map(|x| x.profit).fold(0.0, f64::max);
            assert!(best <= b.ub + 1e-9, "seed {seed} commodity {c}");
        }
        for line in all_lines(&prob.instance) {
            for (c, paths) in cands.per_commodity.iter().enumerate() {
                let realized = paths
                    .iter()
                    .filter(|x| serves(&line, x))
                    .map(|x| x.profit)
                    .fold(0.0, f64::max);
                assert!(realized <= bounds[c].ub + 1e-9);
            }
        }
    }
}

#[test]
fn more_hubs_or_edges_never_lose_candidates() {
    for seed in 50..55 {
        let base = problem(8, seed, 2, 0.5);
        let mut prev = enumerate_all(&base, 1);
        for p in 3..=5 {
            let inst = base
                .instance
                .with_params(Params {
                    p,
                    ..base.params().clone()
                })
                .unwrap();
            let prob = Problem::prepare(inst).unwrap();
            let next = enumerate_all(&prob, 1);
            for (a, b) in prev.per_commodity.iter().zip(&next.per_commodity) {
                assert!(hub_set(a).is_subset(&hub_set(b)));
            }
            prev = next;
        }
        let full = enumerate_all(&base, 1);
        let sparse = sparsify(&base.instance, &SparsifyConfig::new(0.5), seed).unwrap();
        let sparse = Problem::prepare(sparse).unwrap();
        let fewer = enumerate_all(&sparse, 1);
        for (a, b) in fewer.per_commodity.iter().zip(&full.per_commodity) {
            assert!(hub_set(a).is_subset(&hub_set(b)));
        }
    }
}

#[test]
fn worker_count_does_not_change_the_dump() {
    let prob = problem(9, 77, 4, 0.5);
    let one = dump(&enumerate_all(&prob, 1));
    let many = dump(&enumerate_all(&prob, 8));
    assert_eq!(one, many);
}
