mod common;

use common::{all_lines, line_value, problem, rel_close};
use hubline::model::{complete_edges, unordered_pairs, Node, RevenueSpec, TimeMatrix};
use hubline::paths::{compute_bounds, enumerate_all, DEFAULT_K_CAP};
use hubline::solver::{
    count_lines, evaluate_line, solve_bnb, solve_enumerate, write_solution_csv, BnbConfig, EnumerateConfig, HubLine,
    MetricsMode,
};
use hubline::{Instance, Params, Problem, SolverError};

#[test]
fn enumerate_matches_brute_force_lines() {
    for (seed, n, p, alpha) in [(1, 6, 2, 0.2), (2, 6, 3, 0.5), (3, 7, 3, 0.8), (4, 7, 4, 0.5)] {
        let prob = problem(n, seed, p, alpha);
        let cands = enumerate_all(&prob, 1);
        let best = all_lines(&prob.instance)
            .iter()
            .map(|l| line_value(l, &cands))
            .fold(0.0, f64::max);
        let sol = solve_enumerate(&prob, &cands, &EnumerateConfig::default()).unwrap();
        assert!(rel_close(sol.objective, best, 1e-9), "seed {seed}");
        assert!(rel_close(sol.objective, line_value(sol.line.nodes(), &cands), 1e-9));
    }
}

#[test]
fn bnb_agrees_with_enumeration() {
    let mut seed = 500;
    for n in [6, 8] {
        for p in [2, 3, 4] {
            for alpha in [0.2, 0.5, 0.8] {
                seed += 1;
                let prob = problem(n, seed, p, alpha);
                let cands = enumerate_all(&prob, 2);
                let bounds = compute_bounds(&prob, 2, DEFAULT_K_CAP).unwrap();
                let a = solve_enumerate(&prob, &cands, &EnumerateConfig::default()).unwrap();
                let (b, stats) = solve_bnb(&prob, &cands, &bounds, &BnbConfig::default()).unwrap();
                assert!(rel_close(a.objective, b.objective, 1e-9), "n {n} p {p} alpha {alpha}");
                assert!(stats.root_bound + 1e-9 >= a.objective);
                assert_eq!(b.line.nodes().len(), p);
            }
        }
    }
}

#[test]
fn bnb_trace_is_best_first() {
    let prob = problem(8, 77, 4, 0.5);
    let cands = enumerate_all(&prob, 1);
    let bounds = compute_bounds(&prob, 1, DEFAULT_K_CAP).unwrap();
    let config = BnbConfig {
        trace: true,
        ..BnbConfig::default()
    };
    let (sol, stats) = solve_bnb(&prob, &cands, &bounds, &config).unwrap();
    assert_eq!(stats.trace.len() as u64, stats.expanded);
    assert!(stats.expanded >= 1);
    assert_eq!(stats.trace[0].bound, stats.root_bound);
    assert!(stats.trace[0].path.is_empty());
    for w in stats.trace.windows(2) {
        assert!(w[1].bound <= w[0].bound + 1e-9);
    }
    assert!(stats.trace.iter().all(|e| e.bound + 1e-9 >= sol.objective));
}

#[test]
fn node_cap_is_reported() {
    let prob = problem(8, 78, 4, 0.5);
    let cands = enumerate_all(&prob, 1);
    let bounds = compute_bounds(&prob, 1, DEFAULT_K_CAP).unwrap();
    let config = BnbConfig {
        node_cap: 1,
        ..BnbConfig::default()
    };
    assert_eq!(
        solve_bnb(&prob, &cands, &bounds, &config).unwrap_err(),
        SolverError::NodeCap(1)
    );
}

#[test]
fn line_guard_refuses_large_enumerations() {
    let prob = problem(8, 79, 4, 0.5);
    let cands = enumerate_all(&prob, 1);
    let config = EnumerateConfig {
        line_cap: 100,
        ..EnumerateConfig::default()
    };
    let err = solve_enumerate(&prob, &cands, &config).unwrap_err();
    assert!(matches!(err, SolverError::TooManyLines { cap: 100, .. }));
    assert_eq!(count_lines(&prob.instance, u64::MAX), 8 * 7 * 6 * 5 / 2);
}

#[test]
fn line_counts_on_complete_graphs() {
    let prob = problem(6, 80, 3, 0.5);
    assert_eq!(count_lines(&prob.instance, u64::MAX), 60);
    assert_eq!(all_lines(&prob.instance).len(), 60);
}

#[test]
fn two_hub_line_is_one_edge() {
    let prob = problem(7, 81, 2, 0.3);
    let cands = enumerate_all(&prob, 1);
    let sol = solve_enumerate(&prob, &cands, &EnumerateConfig::default()).unwrap();
    assert_eq!(sol.line.nodes().len(), 2);
    assert_eq!(sol.line.edges().len(), 1);
}

#[test]
fn optimum_grows_with_p_on_complete_graphs() {
    for seed in 90..94 {
        let base = problem(7, seed, 2, 0.4);
        let mut last = 0.0;
        for p in 2..=5 {
            let inst = base
                .instance
                .with_params(Params {
                    p,
                    ..base.params().clone()
                })
                .unwrap();
            let prob = Problem::prepare(inst).unwrap();
            let cands = enumerate_all(&prob, 1);
            let obj = solve_enumerate(&prob, &cands, &EnumerateConfig::default())
                .unwrap()
                .objective;
            assert!(obj + 1e-9 >= last, "seed {seed} p {p}");
            last = obj;
        }
    }
}

#[test]
fn reversed_lines_evaluate_equally() {
    let prob = problem(7, 95, 4, 0.5);
    let cands = enumerate_all(&prob, 1);
    for nodes in all_lines(&prob.instance).into_iter().take(200) {
        let fwd = HubLine::new(&prob.instance, nodes.clone()).unwrap();
        let rev = HubLine::new(&prob.instance, nodes.iter().rev().copied().collect()).unwrap();
        let a = evaluate_line(&prob, &cands, &fwd, MetricsMode::default());
        let b = evaluate_line(&prob, &cands, &rev, MetricsMode::default());
        assert_eq!(a.objective, b.objective);
        let mut rev_nodes = nodes.clone();
        rev_nodes.reverse();
        assert!(rel_close(line_value(&rev_nodes, &cands), a.objective, 1e-12));
    }
}

#[test]
fn invalid_lines_are_rejected() {
    let prob = problem(6, 96, 3, 0.5);
    assert!(HubLine::new(&prob.instance, vec![0, 1]).is_err());
    assert!(HubLine::new(&prob.instance, vec![0, 1, 0]).is_err());
    assert!(HubLine::new(&prob.instance, vec![0, 1, 9]).is_err());
    let sparse = prob.instance.with_edges(vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
    assert!(HubLine::new(&sparse, vec![0, 2, 1]).is_err());
    let line = HubLine::new(&sparse, vec![3, 2, 1]).unwrap();
    assert_eq!(line.nodes(), &[1, 2, 3]);
}

/// Four towns on a line at 0, 1, 2, 3 with unit populations, revenue equal
/// to the direct time, r = 1, no access time, alpha = 0.5, p = 2.
fn four_towns() -> Problem {
    let nodes = (0..4).map(|i| Node::new(i, format!("t{i}"), 1.0)).collect();
    let mut time = TimeMatrix::empty(4);
    for i in 0..4 {
        for j in (i + 1)..4 {
            time.set_symmetric(i, j, (j - i) as f64);
        }
    }
    let pairs = unordered_pairs(4);
    let revenue = pairs.iter().map(|c| (c.destination - c.origin) as f64).collect();
    let params = Params {
        p: 2,
        alpha: 0.5,
        r: 1.0,
        vartheta: 0.0,
        revenue: RevenueSpec::Explicit(revenue),
        ..Params::default()
    };
    Problem::prepare(Instance::new(nodes, complete_edges(4), time, pairs, params).unwrap()).unwrap()
}

#[test]
fn metrics_match_hand_computation() {
    let prob = four_towns();
    let cands = enumerate_all(&prob, 1);
    let line = HubLine::new(&prob.instance, vec![0, 3]).unwrap();
    let sol = evaluate_line(&prob, &cands, &line, MetricsMode::DemandWeighted);
    // Only (0, 3) rides the line: time 1.5 instead of 3.
    let served: Vec<bool> = sol.assignment.iter().map(Option::is_some).collect();
    assert_eq!(served, vec![false, false, true, false, false, false]);
    assert_eq!(sol.t_prime[2], 1.5);
    // Profit 3 * (3 - 1.5) / 1.5 = 3.
    assert!((sol.objective - 3.0).abs() < 1e-12);

    // Direct demands 1/t: 1, 1/2, 1/3, 1, 1/2, 1; served demand 1/1.5.
    let w = [1.0, 0.5, 1.0 / 1.5, 1.0, 0.5, 1.0];
    let t_direct = [1.0, 2.0, 3.0, 1.0, 2.0, 1.0];
    let t_final = [1.0, 2.0, 1.5, 1.0, 2.0, 1.0];
    let total: f64 = w.iter().sum();
    let before: f64 = w.iter().zip(&t_direct).map(|(a, b)| a * b).sum();
    let after: f64 = w.iter().zip(&t_final).map(|(a, b)| a * b).sum();
    let m = sol.metrics;
    assert!((m.pct_od_served - 100.0 / 6.0).abs() < 1e-12);
    assert!((m.pct_demand_served - 100.0 * w[2] / total).abs() < 1e-12);
    assert!((m.pct_time_saved - 100.0 * (before - after) / before).abs() < 1e-12);

    let plain = evaluate_line(&prob, &cands, &line, MetricsMode::Unweighted).metrics;
    assert!((plain.pct_time_saved - 100.0 * 1.5 / 10.0).abs() < 1e-12);
}

#[test]
fn solution_csv_layout() {
    let prob = four_towns();
    let cands = enumerate_all(&prob, 1);
    let sol = solve_enumerate(&prob, &cands, &EnumerateConfig::default()).unwrap();
    let mut out = Vec::new();
    write_solution_csv(&mut out, &prob, &sol).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "o,d,served,t_direct,t_prime,demand,profit,hubs");
    assert_eq!(lines.len(), 1 + 6 + 1 + 5);
    assert_eq!(lines[7], "");
    assert!(lines[8].starts_with("objective,"));
    assert_eq!(lines[9], format!("line,{}", sol.line.nodes().iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";")));
}
