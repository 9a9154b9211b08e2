//! Readers for the two supported instance layouts.
//!
//! * CAB: a whitespace-separated `N x N` flow matrix followed by an `N x N`
//!   cost matrix (optionally preceded by `N`). Populations default to
//!   `sqrt(sum_j W_ij)` over the selected subset.
//! * csv-bundle: a directory holding `manifest.txt`, `nodes.csv`,
//!   `edges.csv` and optionally `commodities.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{
    complete_edges, ordered_pairs, unordered_pairs, Commodity, Instance, Node, Params,
    RevenueSpec, TimeMatrix,
};
use crate::error::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceFormat {
    Cab {
        /// Keep only the first `subset` nodes.
        subset: Option<usize>,
        /// Replaces the square-root-of-flow default.
        populations: Option<Vec<f64>>,
    },
    CsvBundle,
}

/// Load an instance. Travel times are returned exactly as read; call
/// [`super::metric_closure`] before preparing the instance.
pub fn load_instance(path: &Path, format: &InstanceFormat) -> Result<Instance, ModelError> {
    match format {
        InstanceFormat::Cab {
            subset,
            populations,
        } => load_cab(path, *subset, populations.as_deref()),
        InstanceFormat::CsvBundle => load_bundle(path),
    }
}

fn read(path: &Path) -> Result<String, ModelError> {
    fs::read_to_string(path).map_err(|e| ModelError::io(path, e))
}

fn load_cab(path: &Path, subset: Option<usize>, populations: Option<&[f64]>) -> Result<Instance, ModelError> {
    let text = read(path)?;
    let mut tokens: Vec<(usize, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| ModelError::parse(path, lineno + 1, format!("not a number: `{tok}`")))?;
            tokens.push((lineno + 1, v));
        }
    }
    let last_line = tokens.last().map_or(1, |t| t.0);
    let size = |count: usize| -> Option<usize> {
        if count % 2 != 0 {
            return None;
        }
        let side = ((count / 2) as f64).sqrt().round() as usize;
        (side * side * 2 == count && side > 0).then_some(side)
    };
    let (full, body) = match size(tokens.len()) {
        Some(side) => (side, &tokens[..]),
        None => {
            let header = tokens.first().map(|t| t.1).unwrap_or(0.0);
            let side = header as usize;
            if header.fract() != 0.0 || side == 0 || tokens.len() != 1 + 2 * side * side {
                return Err(ModelError::parse(
                    path,
                    last_line,
                    format!("expected two square matrices, found {} numbers", tokens.len()),
                ));
            }
            (side, &tokens[1..])
        }
    };
    let n = subset.unwrap_or(full);
    if n == 0 || n > full {
        return Err(ModelError::Validation(format!(
            "subset size {n} outside 1..={full}"
        )));
    }
    let flow = |i: usize, j: usize| body[i * full + j].1;
    let cost = |i: usize, j: usize| body[full * full + i * full + j];

    let mut time = TimeMatrix::empty(n);
    for i in 0..n {
        for j in 0..n {
            let (lineno, t) = cost(i, j);
            if i == j {
                if t != 0.0 {
                    return Err(ModelError::parse(path, lineno, format!("non-zero diagonal cost {t}")));
                }
                continue;
            }
            if !(t > 0.0) {
                return Err(ModelError::Validation(format!(
                    "non-positive time {t} between {i} and {j} (line {lineno})"
                )));
            }
            if j > i {
                time.set_symmetric(i, j, t);
            } else if (time.get(i, j) - t).abs() > super::TIME_EPS {
                return Err(ModelError::Validation(format!(
                    "cost matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let pops: Vec<f64> = match populations {
        Some(p) if p.len() != n => {
            return Err(ModelError::Validation(format!(
                "{} population overrides for {n} nodes",
                p.len()
            )))
        }
        Some(p) => p.to_vec(),
        None => (0..n)
            .map(|i| (0..n).map(|j| flow(i, j)).sum::<f64>().sqrt())
            .collect(),
    };
    let nodes = pops
        .iter()
        .enumerate()
        .map(|(i, &pop)| Node::new(i, format!("{}", i + 1), pop))
        .collect();
    let params = Params {
        p: Params::default().p.min(n.max(2)),
        ..Params::default()
    };
    Instance::new(nodes, complete_edges(n), time, unordered_pairs(n), params)
}

struct CsvRows {
    path: PathBuf,
    rows: Vec<(usize, Vec<String>)>,
}

impl CsvRows {
    fn read(path: PathBuf) -> Result<Self, ModelError> {
        let text = read(&path)?;
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
            rows.push((idx + 1, fields));
        }
        // A header is any first row whose first field is not numeric.
        if let Some((_, first)) = rows.first() {
            if first[0].parse::<f64>().is_err() {
                rows.remove(0);
            }
        }
        Ok(CsvRows { path, rows })
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> ModelError {
        ModelError::parse(&self.path, line, msg)
    }

    fn field<T: std::str::FromStr>(&self, line: usize, fields: &[String], idx: usize, name: &str) -> Result<T, ModelError> {
        let raw = fields
            .get(idx)
            .ok_or_else(|| self.err(line, format!("missing field `{name}`")))?;
        raw.parse()
            .map_err(|_| self.err(line, format!("invalid {name}: `{raw}`")))
    }
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

fn load_bundle(dir: &Path) -> Result<Instance, ModelError> {
    let manifest_path = dir.join("manifest.txt");
    let manifest_text = read(&manifest_path)?;
    let mut manifest = BTreeMap::new();
    for (idx, line) in manifest_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ModelError::parse(&manifest_path, idx + 1, "expected key=value"))?;
        manifest.insert(k.trim().to_string(), (idx + 1, v.trim().to_string()));
    }
    let known = [
        "n",
        "p",
        "alpha",
        "r",
        "vartheta",
        "seed",
        "revenue_mode",
        "ordered_pairs",
        "strict_filter",
        "selfloop_dominance_exempt",
    ];
    if let Some((k, (line, _))) = manifest.iter().find(|(k, _)| !known.contains(&k.as_str())) {
        return Err(ModelError::parse(&manifest_path, *line, format!("unknown key `{k}`")));
    }
    fn get<T: std::str::FromStr>(
        manifest: &BTreeMap<String, (usize, String)>,
        path: &Path,
        key: &str,
    ) -> Result<Option<T>, ModelError> {
        match manifest.get(key) {
            None => Ok(None),
            Some((line, raw)) => raw
                .parse()
                .map(Some)
                .map_err(|_| ModelError::parse(path, *line, format!("invalid value for `{key}`: `{raw}`"))),
        }
    }
    let get_bool = |key: &str| -> Result<Option<bool>, ModelError> {
        match manifest.get(key) {
            None => Ok(None),
            Some((line, raw)) => parse_bool(raw)
                .map(Some)
                .ok_or_else(|| ModelError::parse(&manifest_path, *line, format!("invalid boolean for `{key}`"))),
        }
    };

    let nodes_csv = CsvRows::read(dir.join("nodes.csv"))?;
    let mut nodes = Vec::with_capacity(nodes_csv.rows.len());
    for (line, f) in &nodes_csv.rows {
        let id: usize = nodes_csv.field(*line, f, 0, "id")?;
        let label = f.get(1).cloned().unwrap_or_default();
        let population: f64 = nodes_csv.field(*line, f, 2, "population")?;
        let mut node = Node::new(id, label, population);
        if f.len() >= 5 && !f[3].is_empty() {
            let lon: f64 = nodes_csv.field(*line, f, 3, "lon")?;
            let lat: f64 = nodes_csv.field(*line, f, 4, "lat")?;
            node = node.with_coords(lon, lat);
        }
        if !(population > 0.0) {
            return Err(ModelError::Validation(format!(
                "node {id} has non-positive population {population} ({}:{line})",
                nodes_csv.path.display()
            )));
        }
        nodes.push(node);
    }
    let n = nodes.len();
    if n == 0 {
        return Err(ModelError::parse(&nodes_csv.path, 1, "no nodes"));
    }
    if let Some(declared) = get::<usize>(&manifest, &manifest_path, "n")? {
        if declared != n {
            return Err(ModelError::Validation(format!(
                "manifest declares n={declared} but nodes.csv has {n} rows"
            )));
        }
    }
    if nodes.iter().any(|nd| nd.id >= n) {
        return Err(ModelError::Validation(format!("node ids must be dense 0..{n}")));
    }

    let edges_csv = CsvRows::read(dir.join("edges.csv"))?;
    let mut time = TimeMatrix::empty(n);
    let mut edges = Vec::with_capacity(edges_csv.rows.len());
    for (line, f) in &edges_csv.rows {
        let k: usize = edges_csv.field(*line, f, 0, "k")?;
        let m: usize = edges_csv.field(*line, f, 1, "m")?;
        let t: f64 = edges_csv.field(*line, f, 2, "time")?;
        if k >= n || m >= n || k == m {
            return Err(edges_csv.err(*line, format!("invalid edge [{k}, {m}]")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(ModelError::Validation(format!(
                "non-positive time {t} on edge [{k}, {m}] ({}:{line})",
                edges_csv.path.display()
            )));
        }
        if time.get(k, m).is_finite() {
            return Err(edges_csv.err(*line, format!("duplicate edge [{k}, {m}]")));
        }
        time.set_symmetric(k, m, t);
        edges.push((k, m));
    }
    check_connected(n, &edges)?;

    let ordered = get_bool("ordered_pairs")?.unwrap_or(false);
    let seed: u64 = get(&manifest, &manifest_path, "seed")?.unwrap_or(0);
    let mode = manifest.get("revenue_mode").map(|(l, v)| (*l, v.as_str()));
    let comm_path = dir.join("commodities.csv");
    let (commodities, explicit) = if comm_path.exists() {
        let rows = CsvRows::read(comm_path)?;
        let mut commodities = Vec::with_capacity(rows.rows.len());
        let mut revenues = Vec::with_capacity(rows.rows.len());
        for (line, f) in &rows.rows {
            let o: usize = rows.field(*line, f, 0, "o")?;
            let d: usize = rows.field(*line, f, 1, "d")?;
            commodities.push(Commodity::new(o, d));
            if f.len() >= 3 && !f[2].is_empty() {
                revenues.push(rows.field::<f64>(*line, f, 2, "R")?);
            }
        }
        let explicit = if revenues.len() == commodities.len() && !revenues.is_empty() {
            Some(revenues)
        } else if revenues.is_empty() {
            None
        } else {
            return Err(ModelError::Validation(
                "commodities.csv gives R for some rows only".into(),
            ));
        };
        (commodities, explicit)
    } else if ordered {
        (ordered_pairs(n), None)
    } else {
        (unordered_pairs(n), None)
    };
    let revenue = match (mode, explicit) {
        (Some((_, "explicit")), Some(values)) | (None, Some(values)) => RevenueSpec::Explicit(values),
        (Some((line, "explicit")), None) => {
            return Err(ModelError::parse(
                &manifest_path,
                line,
                "revenue_mode=explicit needs an R column in commodities.csv",
            ))
        }
        (Some((_, "gamma")), _) | (None, None) => RevenueSpec::Gamma {
            seed: seed.wrapping_add(1),
        },
        (Some((line, other)), _) => {
            return Err(ModelError::parse(
                &manifest_path,
                line,
                format!("unknown revenue_mode `{other}`"),
            ))
        }
    };
    let defaults = Params::default();
    let params = Params {
        p: get(&manifest, &manifest_path, "p")?.unwrap_or(defaults.p.min(n.max(2))),
        alpha: get(&manifest, &manifest_path, "alpha")?.unwrap_or(defaults.alpha),
        r: get(&manifest, &manifest_path, "r")?.unwrap_or(defaults.r),
        vartheta: get(&manifest, &manifest_path, "vartheta")?.unwrap_or(defaults.vartheta),
        revenue,
        strict_filter: get_bool("strict_filter")?.unwrap_or(true),
        selfloop_dominance_exempt: get_bool("selfloop_dominance_exempt")?.unwrap_or(true),
    };
    Instance::new(nodes, edges, time, commodities, params)
}

fn check_connected(n: usize, edges: &[(usize, usize)]) -> Result<(), ModelError> {
    let mut adj = vec![Vec::new(); n];
    for &(k, m) in edges {
        adj[k].push(m);
        adj[m].push(k);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(v) => Err(ModelError::Validation(format!(
            "edge list does not connect node {v} to node 0"
        ))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn bundle(files: &[(&str, &str)]) -> PathBuf {
        static COUNTER: AtomicUsize = AtomicUsize::new(0);
        let dir = std::env::temp_dir().join(format!(
            "hubline-io-{}-{}",
            std::process::id(),
            COUNTER.fetch_add(1, Ordering::SeqCst)
        ));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        for (name, body) in files {
            fs::File::create(dir.join(name))
                .unwrap()
                .write_all(body.as_bytes())
                .unwrap();
        }
        dir
    }

    #[test]
    fn three_node_bundle() {
        let dir = bundle(&[
            ("manifest.txt", "n=3\np=2\nalpha=0.5\nr=1\nvartheta=0.1\nseed=4\nrevenue_mode=gamma\n"),
            ("nodes.csv", "id,label,population,lon,lat\n0,a,10,-73.5,45.5\n1,b,20,-73.6,45.4\n2,c,30,-73.7,45.6\n"),
            ("edges.csv", "k,m,time\n0,1,3\n1,2,4\n0,2,9\n"),
        ]);
        let inst = load_instance(&dir, &InstanceFormat::CsvBundle).unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.commodities().len(), 3);
        assert_eq!(inst.t(0, 2), 9.0, "loader must not close the matrix");
        assert_eq!(inst.params().revenue, RevenueSpec::Gamma { seed: 5 });
        assert_eq!(inst.nodes()[0].lon, Some(-73.5));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn zero_population_fails_validation() {
        let dir = bundle(&[
            ("manifest.txt", "p=2\n"),
            ("nodes.csv", "0,a,1\n1,b,0\n"),
            ("edges.csv", "0,1,2\n"),
        ]);
        let err = load_instance(&dir, &InstanceFormat::CsvBundle).unwrap_err();
        assert!(matches!(err, ModelError::Validation(_)), "{err}");
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let dir = bundle(&[
            ("manifest.txt", "p=2\n"),
            ("nodes.csv", "id,label,population\n0,a,1\n1,b,x\n"),
            ("edges.csv", "0,1,2\n"),
        ]);
        match load_instance(&dir, &InstanceFormat::CsvBundle).unwrap_err() {
            ModelError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn explicit_revenues_from_commodity_file() {
        let dir = bundle(&[
            ("manifest.txt", "p=2\nrevenue_mode=explicit\n"),
            ("nodes.csv", "0,a,1\n1,b,1\n2,c,1\n"),
            ("edges.csv", "0,1,2\n0,2,2\n1,2,2\n"),
            ("commodities.csv", "o,d,R\n0,2,1.5\n2,1,0.5\n"),
        ]);
        let inst = load_instance(&dir, &InstanceFormat::CsvBundle).unwrap();
        assert_eq!(inst.commodities(), &[Commodity::new(0, 2), Commodity::new(2, 1)]);
        assert_eq!(inst.params().revenue, RevenueSpec::Explicit(vec![1.5, 0.5]));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn disconnected_edges_are_rejected() {
        let dir = bundle(&[
            ("manifest.txt", "p=2\n"),
            ("nodes.csv", "0,a,1\n1,b,1\n2,c,1\n3,d,1\n"),
            ("edges.csv", "0,1,2\n2,3,2\n"),
        ]);
        assert!(matches!(
            load_instance(&dir, &InstanceFormat::CsvBundle),
            Err(ModelError::Validation(_))
        ));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn cab_subset_with_header() {
        let full = 4;
        let mut text = format!("{full}\n");
        for i in 0..full {
            let row: Vec<String> = (0..full).map(|j| format!("{}", if i == j { 0 } else { i + j })).collect();
            text.push_str(&row.join(" "));
            text.push('\n');
        }
        for i in 0..full {
            let row: Vec<String> = (0..full)
                .map(|j| format!("{}", if i == j { 0.0 } else { 10.0 + (i + j) as f64 }))
                .collect();
            text.push_str(&row.join(" "));
            text.push('\n');
        }
        let path = std::env::temp_dir().join(format!("hubline-cab-{}.txt", std::process::id()));
        fs::write(&path, text).unwrap();
        let inst = load_instance(
            &path,
            &InstanceFormat::Cab {
                subset: Some(3),
                populations: None,
            },
        )
        .unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.commodities().len(), 3);
        assert_eq!(inst.edges().len(), 3);
        assert_eq!(inst.t(1, 2), 13.0);
        // Row 0 flows over the subset: 0 + 1 + 2.
        assert!((inst.nodes()[0].population - 3f64.sqrt()).abs() < 1e-15);
        fs::remove_file(path).unwrap();
    }
}
