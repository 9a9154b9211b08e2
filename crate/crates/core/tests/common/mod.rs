#![allow(dead_code)]

use hubline::model::synthetic_instance;
use hubline::paths::{CandidatePath, Enumeration};
use hubline::{Instance, Params, Problem};

pub fn problem(n: usize, seed: u64, p: usize, alpha: f64) -> Problem {
    let params = Params {
        p,
        alpha,
        ..Params::default()
    };
    Problem::prepare(synthetic_instance(n, seed, params).unwrap()).unwrap()
}

/// Every canonical line by brute force over ordered node tuples.
pub fn all_lines(inst: &Instance) -> Vec<Vec<usize>> {
    let p = inst.params().p;
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(inst: &Instance, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            if cur[0] < cur[p - 1] {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..inst.n() {
            if cur.contains(&k) {
                continue;
            }
            if let Some(&last) = cur.last() {
                if inst.edge_index(last, k).is_none() {
                    continue;
                }
            }
            cur.push(k);
            rec(inst, p, cur, out);
            cur.pop();
        }
    }
    rec(inst, p, &mut cur, &mut out);
    out
}

/// A candidate is served by a line when its hub sequence appears as a
/// contiguous run of the line, read in either direction.
pub fn serves(line: &[usize], cand: &CandidatePath) -> bool {
    let h = &cand.hubs;
    let rev: Vec<usize> = line.iter().rev().copied().collect();
    [line.to_vec(), rev]
        .iter()
        .any(|l| l.windows(h.len()).any(|w| w == h.as_slice()))
}

pub fn line_value(line: &[usize], candidates: &Enumeration) -> f64 {
    candidates
        .per_commodity
        .iter()
        .map(|paths| {
            paths
                .iter()
                .filter(|c| serves(line, c))
                .map(|c| c.profit)
                .fold(0.0_f64, f64::max)
        })
        .sum()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
