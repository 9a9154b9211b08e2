//! Plain linear-program container shared by the builders and the file formats.

use std::cmp::Ordering;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn holds(self, activity: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Sense::Le => activity <= rhs + tol,
            Sense::Ge => activity >= rhs - tol,
            Sense::Eq => (activity - rhs).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    /// `(variable index, coefficient)`, one entry per variable.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * values[j]).sum()
    }
}

/// A maximisation problem over named variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub name: String,
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    pub objective: Vec<(usize, f64)>,
    index: HashMap<String, usize>,
}

impl LinearProgram {
    pub fn new(name: impl Into<String>) -> Self {
        LinearProgram {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64) -> usize {
        let j = self.variables.len();
        self.index.insert(name.clone(), j);
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        j
    }

    /// Coefficients on the same variable are merged; zeros are dropped.
    pub fn add_row(&mut self, name: String, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        let mut coeffs = coeffs;
        coeffs.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (j, a) in coeffs {
            match merged.last_mut() {
                Some((k, b)) if *k == j => *b += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row {
            name,
            coeffs: merged,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * values[j]).sum()
    }

    /// Variable indices in natural name order.
    pub fn sorted_vars(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.variables.len()).collect();
        v.sort_by(|&a, &b| natural_cmp(&self.variables[a].name, &self.variables[b].name));
        v
    }

    /// Row indices in natural name order.
    pub fn sorted_rows(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.rows.len()).collect();
        v.sort_by(|&a, &b| natural_cmp(&self.rows[a].name, &self.rows[b].name));
        v
    }

    /// Order-independent form for structural comparison.
    pub fn canonical(&self) -> CanonicalLp {
        let name_of = |j: usize| self.variables[j].name.clone();
        let mut variables: Vec<Variable> = self.variables.clone();
        variables.sort_by(|a, b| natural_cmp(&a.name, &b.name));
        let mut rows: Vec<(String, Sense, f64, Vec<(String, f64)>)> = self
            .rows
            .iter()
            .map(|r| {
                let mut c: Vec<(String, f64)> = r.coeffs.iter().map(|&(j, a)| (name_of(j), a)).collect();
                c.sort_by(|a, b| natural_cmp(&a.0, &b.0));
                (r.name.clone(), r.sense, r.rhs, c)
            })
            .collect();
        rows.sort_by(|a, b| natural_cmp(&a.0, &b.0));
        let mut objective: Vec<(String, f64)> = self
            .objective
            .iter()
            .filter(|&&(_, c)| c != 0.0)
            .map(|&(j, c)| (name_of(j), c))
            .collect();
        objective.sort_by(|a, b| natural_cmp(&a.0, &b.0));
        CanonicalLp {
            variables,
            rows,
            objective,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalLp {
    pub variables: Vec<Variable>,
    pub rows: Vec<(String, Sense, f64, Vec<(String, f64)>)>,
    pub objective: Vec<(String, f64)>,
}

/// Compare names chunk by chunk, numeric chunks by value: `z_2 < z_10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a.as_bytes(), b.as_bytes());
    loop {
        match (x.first(), y.first()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(p), Some(q)) if p.is_ascii_digit() && q.is_ascii_digit() => {
                let i = x.iter().take_while(|c| c.is_ascii_digit()).count();
                let j = y.iter().take_while(|c| c.is_ascii_digit()).count();
                let (dx, dy) = (&x[..i], &y[..j]);
                let tx = trim_zeros(dx);
                let ty = trim_zeros(dy);
                let ord = tx.len().cmp(&ty.len()).then_with(|| tx.cmp(ty)).then_with(|| i.cmp(&j));
                if ord != Ordering::Equal {
                    return ord;
                }
                x = &x[i..];
                y = &y[j..];
            }
            (Some(p), Some(q)) => {
                if p != q {
                    return p.cmp(q);
                }
                x = &x[1..];
                y = &y[1..];
            }
        }
    }
}

fn trim_zeros(d: &[u8]) -> &[u8] {
    let k = d.iter().take_while(|&&c| c == b'0').count();
    &d[k.min(d.len().saturating_sub(1))..]
}

/// Rounds to 12 significant digits; values that are then integers print
/// plainly, so re-reading and re-writing gives the same text.
pub fn fmt_num(v: f64) -> String {
    let s = format!("{v:.11e}");
    let rounded: f64 = s.parse().unwrap();
    if rounded == rounded.trunc() && rounded.abs() < 1e15 {
        return format!("{}", rounded as i64);
    }
    let (mantissa, exp) = s.split_once('e').unwrap();
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    format!("{mantissa}e{exp}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_order() {
        let mut v = vec!["z_10", "z_2", "y_1_10", "y_1_2", "z_1", "v_0_11", "v_0_9"];
        v.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(v, vec!["v_0_9", "v_0_11", "y_1_2", "y_1_10", "z_1", "z_2", "z_10"]);
    }

    #[test]
    fn numbers() {
        assert_eq!(fmt_num(3.0), "3");
        assert_eq!(fmt_num(-2.0), "-2");
        assert_eq!(fmt_num(0.5), "5e-1");
        assert_eq!(fmt_num(1e20), "1e20");
        assert_eq!(fmt_num(1.0 / 3.0), "3.33333333333e-1");
        let x = 123.456789012345678;
        assert!((fmt_num(x).parse::<f64>().unwrap() - x).abs() / x < 1e-11);
        assert_eq!(fmt_num(40152197541.00936), "40152197541");
        for v in [x, 4.0152197541009e10, -7.25e-3, 1.0 / 7.0] {
            let once = fmt_num(v);
            assert_eq!(fmt_num(once.parse().unwrap()), once);
        }
    }

    #[test]
    fn rows_merge_duplicates() {
        let mut lp = LinearProgram::new("t");
        let a = lp.add_var("a".into(), VarKind::Binary, 0.0, 1.0);
        let r = lp.add_row("r".into(), vec![(a, 1.0), (a, 2.0)], Sense::Le, 3.0);
        assert_eq!(lp.rows[r].coeffs, vec![(a, 3.0)]);
        let r = lp.add_row("s".into(), vec![(a, 1.0), (a, -1.0)], Sense::Le, 3.0);
        assert!(lp.rows[r].coeffs.is_empty());
    }
}
