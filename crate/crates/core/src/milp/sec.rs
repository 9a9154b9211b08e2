//! Subtour cut separation on the support graph of the edge values.

use crate::model::Instance;

/// `sum of edge indicators inside set <= sum of z over set minus anchor`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SecCut {
    /// Sorted node ids, at least two.
    pub set: Vec<usize>,
    /// Smallest id of `set`.
    pub anchor: usize,
}

impl SecCut {
    pub fn new(mut set: Vec<usize>) -> SecCut {
        set.sort_unstable();
        set.dedup();
        let anchor = set[0];
        SecCut { set, anchor }
    }

    /// `lhs - rhs` under the given node and edge values.
    pub fn violation(&self, instance: &Instance, z: &[f64], y: &[f64]) -> f64 {
        let mut in_set = vec![false; instance.n()];
        for &k in &self.set {
            in_set[k] = true;
        }
        let lhs: f64 = instance
            .edges()
            .iter()
            .zip(y)
            .filter(|((a, b), _)| in_set[*a] && in_set[*b])
            .map(|(_, v)| v)
            .sum();
        let rhs: f64 = self.set.iter().filter(|&&k| k != self.anchor).map(|&k| z[k]).sum();
        lhs - rhs
    }
}

const SUPPORT_THRESHOLD: f64 = 0.5;
const VIOLATION_TOL: f64 = 1e-6;

/// Components of the support graph (edges with value at least 0.5) that
/// hold a cycle, returned as violated cuts.
pub fn separate_sec(instance: &Instance, z: &[f64], y: &[f64]) -> Vec<SecCut> {
    let n = instance.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let support: Vec<(usize, usize)> = instance
        .edges()
        .iter()
        .zip(y)
        .filter(|(_, &v)| v >= SUPPORT_THRESHOLD)
        .map(|(&e, _)| e)
        .collect();
    let mut touched = vec![false; n];
    for &(a, b) in &support {
        touched[a] = true;
        touched[b] = true;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut nodes_in: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        if touched[v] {
            let r = find(&mut parent, v);
            nodes_in[r].push(v);
        }
    }
    let mut edges_in = vec![0usize; n];
    for &(a, _) in &support {
        let r = find(&mut parent, a);
        edges_in[r] += 1;
    }
    let mut cuts: Vec<SecCut> = (0..n)
        .filter(|&r| !nodes_in[r].is_empty() && edges_in[r] >= nodes_in[r].len())
        .map(|r| SecCut::new(nodes_in[r].clone()))
        .filter(|cut| cut.violation(instance, z, y) > VIOLATION_TOL)
        .collect();
    cuts.sort_by(|a, b| a.set.cmp(&b.set));
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{complete_edges, unordered_pairs, Node, Params, TimeMatrix};

    fn k_n(n: usize, p: usize) -> Instance {
        let nodes = (0..n).map(|i| Node::new(i, "", 1.0)).collect();
        let mut t = TimeMatrix::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                t.set_symmetric(i, j, 1.0);
            }
        }
        let params = Params { p, ..Params::default() };
        Instance::new(nodes, complete_edges(n), t, unordered_pairs(n), params).unwrap()
    }

    fn y_of(inst: &Instance, on: &[(usize, usize)]) -> Vec<f64> {
        inst.edges()
            .iter()
            .map(|e| if on.contains(e) { 1.0 } else { 0.0 })
            .collect()
    }

    #[test]
    fn triangle_is_cut() {
        let inst = k_n(5, 3);
        let z = [0.0, 1.0, 1.0, 1.0, 0.0];
        let y = y_of(&inst, &[(1, 2), (2, 3), (1, 3)]);
        let cuts = separate_sec(&inst, &z, &y);
        assert_eq!(cuts, vec![SecCut { set: vec![1, 2, 3], anchor: 1 }]);
        assert_eq!(cuts[0].violation(&inst, &z, &y), 1.0);
    }

    #[test]
    fn path_has_no_cut() {
        let inst = k_n(5, 4);
        let z = [1.0, 1.0, 1.0, 1.0, 0.0];
        let y = y_of(&inst, &[(0, 1), (1, 2), (2, 3)]);
        assert!(separate_sec(&inst, &z, &y).is_empty());
    }

    #[test]
    fn only_the_cyclic_segment_is_cut() {
        // p = 6 hubs, 5 edges: a triangle on {0,1,2} and a segment 3-4-5.
        let inst = k_n(7, 6);
        let z = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0];
        let y = y_of(&inst, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5)]);
        let cuts = separate_sec(&inst, &z, &y);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].set, vec![0, 1, 2]);
    }
}
