use std::collections::HashMap;

use crate::paths::Enumeration;

/// Best candidate profit per commodity, keyed by the sorted edge set of the
/// candidate. A line serves a candidate exactly when the candidate's edges
/// form a contiguous stretch of the line, so a line is scored by looking up
/// each of its stretches.
#[derive(Debug, Clone)]
pub struct CandidateIndex {
    by_edges: HashMap<Vec<usize>, Vec<(usize, f64)>>,
    n_commodities: usize,
}

impl CandidateIndex {
    pub fn new(candidates: &Enumeration) -> CandidateIndex {
        let mut by_edges: HashMap<Vec<usize>, Vec<(usize, f64)>> = HashMap::new();
        for (c, paths) in candidates.per_commodity.iter().enumerate() {
            for cand in paths {
                if !(cand.profit > 0.0) {
                    continue;
                }
                let mut key = cand.edge_ids.clone();
                key.sort_unstable();
                let entry = by_edges.entry(key).or_default();
                match entry.last_mut() {
                    Some((last_c, best)) if *last_c == c => {
                        if cand.profit > *best {
                            *best = cand.profit;
                        }
                    }
                    _ => entry.push((c, cand.profit)),
                }
            }
        }
        CandidateIndex {
            by_edges,
            n_commodities: candidates.per_commodity.len(),
        }
    }

    pub fn n_commodities(&self) -> usize {
        self.n_commodities
    }

    /// Objective of the line with edges `edges` (line order).
    pub fn line_objective(&self, edges: &[usize], scratch: &mut Scratch) -> f64 {
        scratch.reset(self.n_commodities);
        let mut key = Vec::with_capacity(edges.len());
        for i in 0..edges.len() {
            for j in (i + 1)..=edges.len() {
                key.clear();
                key.extend_from_slice(&edges[i..j]);
                key.sort_unstable();
                if let Some(entries) = self.by_edges.get(&key) {
                    for &(c, profit) in entries {
                        scratch.offer(c, profit);
                    }
                }
            }
        }
        scratch.total()
    }
}

/// Reusable per-commodity maxima.
#[derive(Debug, Default)]
pub struct Scratch {
    best: Vec<f64>,
    touched: Vec<usize>,
}

impl Scratch {
    fn reset(&mut self, n: usize) {
        if self.best.len() != n {
            self.best = vec![0.0; n];
            self.touched.clear();
        }
        for &c in &self.touched {
            self.best[c] = 0.0;
        }
        self.touched.clear();
    }

    fn offer(&mut self, c: usize, profit: f64) {
        if self.best[c] == 0.0 {
            self.touched.push(c);
        }
        if profit > self.best[c] {
            self.best[c] = profit;
        }
    }

    /// Sum in commodity order, matching a plain loop over all commodities.
    fn total(&mut self) -> f64 {
        self.touched.sort_unstable();
        self.touched.iter().map(|&c| self.best[c]).sum()
    }
}
