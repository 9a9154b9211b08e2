//! Instance representation and the derived parameters every other module
//! consumes: closed travel times, access/exit times, revenues and the
//! candidate hub-edge set.

mod io;

pub use io::{load_instance, InstanceFormat};

use crate::error::ModelError;
use crate::gravity::ProfitTerm;
use crate::rng::SplitMix64;

/// Absolute tolerance used for every time comparison in the crate.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub label: String,
    pub population: f64,
    pub lon: Option<f64>,
    pub lat: Option<f64>,
}

impl Node {
    pub fn new(id: usize, label: impl Into<String>, population: f64) -> Self {
        Node {
            id,
            label: label.into(),
            population,
            lon: None,
            lat: None,
        }
    }

    pub fn with_coords(mut self, lon: f64, lat: f64) -> Self {
        self.lon = Some(lon);
        self.lat = Some(lat);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Commodity {
    pub origin: usize,
    pub destination: usize,
}

impl Commodity {
    pub fn new(origin: usize, destination: usize) -> Self {
        Commodity {
            origin,
            destination,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RevenueSpec {
    /// One revenue per commodity, in commodity order.
    Explicit(Vec<f64>),
    /// `R_c = (1 + gamma_c) t_od` with `gamma_c` drawn from SplitMix64(seed).
    Gamma { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Number of hubs on the line.
    pub p: usize,
    /// Discount factor applied to hub-edge travel times.
    pub alpha: f64,
    /// Gravity exponent.
    pub r: f64,
    /// Access/exit time as a fraction of the mean travel time.
    pub vartheta: f64,
    pub revenue: RevenueSpec,
    /// Discard candidate paths whose time equals the direct time.
    pub strict_filter: bool,
    /// A two-hub path never dominates itself.
    pub selfloop_dominance_exempt: bool,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            p: 3,
            alpha: 0.5,
            r: 1.7,
            vartheta: 0.1,
            revenue: RevenueSpec::Gamma { seed: 1 },
            strict_filter: true,
            selfloop_dominance_exempt: true,
        }
    }
}

impl Params {
    fn validate(&self, n: usize, n_commodities: usize) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::Validation(msg));
        if self.p < 2 || self.p > n {
            return bad(format!("p must satisfy 2 <= p <= n = {n}, got {}", self.p));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return bad(format!("gravity exponent must be non-negative, got {}", self.r));
        }
        if !(self.vartheta >= 0.0 && self.vartheta.is_finite()) {
            return bad(format!("vartheta must be non-negative, got {}", self.vartheta));
        }
        if let RevenueSpec::Explicit(values) = &self.revenue {
            if values.len() != n_commodities {
                return bad(format!(
                    "{} explicit revenues for {} commodities",
                    values.len(),
                    n_commodities
                ));
            }
            if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                return bad(format!("revenue must be non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

/// Dense symmetric travel-time matrix. Missing entries are `f64::INFINITY`
/// until [`metric_closure`] fills them.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMatrix {
    n: usize,
    data: Vec<f64>,
}

impl TimeMatrix {
    /// All off-diagonal entries infinite.
    pub fn empty(n: usize) -> Self {
        let mut data = vec![f64::INFINITY; n * n];
        for i in 0..n {
            data[i * n + i] = 0.0;
        }
        TimeMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "time matrix must be square");
            data.extend_from_slice(row);
        }
        TimeMatrix { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set_symmetric(&mut self, i: usize, j: usize, t: f64) {
        self.data[i * self.n + j] = t;
        self.data[j * self.n + i] = t;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Largest violation of `t_ij <= t_ik + t_kj`, zero for a metric matrix.
    pub fn triangle_violation(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                let tik = self.get(i, k);
                for j in 0..n {
                    worst = worst.max(self.get(i, j) - (tik + self.get(k, j)));
                }
            }
        }
        worst
    }
}

/// Sparse lookup from an unordered node pair to its index in the edge list.
#[derive(Debug, Clone, PartialEq)]
struct EdgeLookup {
    n: usize,
    slots: Vec<u32>,
}

impl EdgeLookup {
    const NONE: u32 = u32::MAX;

    fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut slots = vec![Self::NONE; n * n];
        for (idx, &(k, m)) in edges.iter().enumerate() {
            slots[k * n + m] = idx as u32;
            slots[m * n + k] = idx as u32;
        }
        EdgeLookup { n, slots }
    }

    fn get(&self, a: usize, b: usize) -> Option<usize> {
        match self.slots[a * self.n + b] {
            Self::NONE => None,
            idx => Some(idx as usize),
        }
    }
}

/// A validated instance. Immutable once built; every transformation
/// returns a new value.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    nodes: Vec<Node>,
    edges: Vec<(usize, usize)>,
    lookup: EdgeLookup,
    time: TimeMatrix,
    commodities: Vec<Commodity>,
    params: Params,
}

impl Instance {
    pub fn new(
        mut nodes: Vec<Node>,
        edges: Vec<(usize, usize)>,
        time: TimeMatrix,
        commodities: Vec<Commodity>,
        params: Params,
    ) -> Result<Self, ModelError> {
        let bad = |msg: String| Err(ModelError::Validation(msg));
        let n = nodes.len();
        nodes.sort_by_key(|node| node.id);
        for (expected, node) in nodes.iter().enumerate() {
            if node.id != expected {
                return bad(format!("node ids must be dense 0..{n}, found {}", node.id));
            }
            if !(node.population > 0.0 && node.population.is_finite()) {
                return bad(format!(
                    "node {} has non-positive population {}",
                    node.id, node.population
                ));
            }
        }
        if time.len() != n {
            return bad(format!("time matrix is {0}x{0} for {n} nodes", time.len()));
        }
        for i in 0..n {
            if time.get(i, i) != 0.0 {
                return bad(format!("time diagonal at {i} is {}", time.get(i, i)));
            }
            for j in (i + 1)..n {
                let (a, b) = (time.get(i, j), time.get(j, i));
                if !(a > 0.0) {
                    return bad(format!("non-positive time {a} between {i} and {j}"));
                }
                let asym = if a.is_infinite() || b.is_infinite() {
                    a != b
                } else {
                    (a - b).abs() > TIME_EPS
                };
                if asym {
                    return bad(format!("time matrix is not symmetric at ({i}, {j})"));
                }
            }
        }
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(k, m)| if k < m { (k, m) } else { (m, k) })
            .collect();
        for &(k, m) in &edges {
            if k == m || m >= n {
                return bad(format!("invalid edge [{k}, {m}]"));
            }
        }
        edges.sort_unstable();
        let before = edges.len();
        edges.dedup();
        if edges.len() != before {
            return bad("duplicate edges".to_string());
        }
        for c in &commodities {
            if c.origin == c.destination || c.origin >= n || c.destination >= n {
                return bad(format!(
                    "invalid commodity ({}, {})",
                    c.origin, c.destination
                ));
            }
        }
        params.validate(n, commodities.len())?;
        let lookup = EdgeLookup::new(n, &edges);
        Ok(Instance {
            nodes,
            edges,
            lookup,
            time,
            commodities,
            params,
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Candidate hub edges `[k, m]` with `k < m`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.lookup.get(a, b)
    }

    pub fn time(&self) -> &TimeMatrix {
        &self.time
    }

    #[inline]
    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.time.get(i, j)
    }

    pub fn commodities(&self) -> &[Commodity] {
        &self.commodities
    }

    pub fn commodity_index(&self, c: Commodity) -> Option<usize> {
        self.commodities.iter().position(|x| *x == c)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn with_params(&self, params: Params) -> Result<Instance, ModelError> {
        params.validate(self.n(), self.commodities.len())?;
        Ok(Instance {
            params,
            ..self.clone()
        })
    }

    pub fn with_commodities(&self, commodities: Vec<Commodity>) -> Result<Instance, ModelError> {
        Instance::new(
            self.nodes.clone(),
            self.edges.clone(),
            self.time.clone(),
            commodities,
            self.params.clone(),
        )
    }

    pub fn with_edges(&self, edges: Vec<(usize, usize)>) -> Result<Instance, ModelError> {
        Instance::new(
            self.nodes.clone(),
            edges,
            self.time.clone(),
            self.commodities.clone(),
            self.params.clone(),
        )
    }

    /// True when every entry is finite and the triangle inequality holds.
    pub fn is_metric(&self) -> bool {
        self.time.data.iter().all(|t| t.is_finite()) && self.time.triangle_violation() <= TIME_EPS
    }
}

/// Every unordered pair `i < j`.
pub fn unordered_pairs(n: usize) -> Vec<Commodity> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(Commodity::new(i, j));
        }
    }
    out
}

/// Every ordered pair `i != j`.
pub fn ordered_pairs(n: usize) -> Vec<Commodity> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(Commodity::new(i, j));
            }
        }
    }
    out
}

/// Every pair `[k, m]`, `k < m`.
pub fn complete_edges(n: usize) -> Vec<(usize, usize)> {
    unordered_pairs(n)
        .into_iter()
        .map(|c| (c.origin, c.destination))
        .collect()
}

/// Replace each travel time by the all-pairs shortest-path time. Sweeps
/// repeat until no entry changes, so rounding cannot leave a second call
/// anything to improve.
pub fn metric_closure(instance: &Instance) -> Instance {
    let n = instance.n();
    let mut d = instance.time.clone();
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                let dik = d.get(i, k);
                if dik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let via = dik + d.get(k, j);
                    if via < d.data[i * n + j] {
                        d.data[i * n + j] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Instance {
        time: d,
        ..instance.clone()
    }
}

/// Per-node access and exit times.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedTimes {
    pub access: Vec<f64>,
    pub exit: Vec<f64>,
}

impl DerivedTimes {
    pub fn uniform(n: usize, value: f64) -> Self {
        DerivedTimes {
            access: vec![value; n],
            exit: vec![value; n],
        }
    }
}

/// Uniform access/exit time: `vartheta` times the mean off-diagonal time.
pub fn derive_times(instance: &Instance) -> DerivedTimes {
    let n = instance.n();
    if n < 2 {
        return DerivedTimes::uniform(n, 0.0);
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += instance.t(i, j);
            }
        }
    }
    let value = instance.params.vartheta * total / (n * (n - 1)) as f64;
    DerivedTimes::uniform(n, value)
}

/// `R_c = (1 + gamma_c) t_od`, one SplitMix64 draw per commodity in order.
pub fn derive_revenues(instance: &Instance, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    instance
        .commodities
        .iter()
        .map(|c| {
            let gamma = rng.next_f64();
            (1.0 + gamma) * instance.t(c.origin, c.destination)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsifyConfig {
    /// Share of the trimmed edge list kept as candidate hub edges.
    pub fraction: f64,
    /// Share of edges discarded at each end of the time-sorted list.
    pub trim: f64,
}

impl SparsifyConfig {
    pub fn new(fraction: f64) -> Self {
        SparsifyConfig {
            fraction,
            trim: 0.1,
        }
    }
}

/// Restrict the candidate hub edges: sort by time, drop the shortest and
/// longest `trim` share, then keep a random `fraction` of the rest.
pub fn sparsify(instance: &Instance, config: &SparsifyConfig, seed: u64) -> Result<Instance, ModelError> {
    if !(config.fraction > 0.0 && config.fraction < 1.0) {
        return Err(ModelError::Validation(format!(
            "edge fraction must lie in (0, 1), got {}",
            config.fraction
        )));
    }
    if !(0.0..0.5).contains(&config.trim) {
        return Err(ModelError::Validation(format!(
            "trim share must lie in [0, 0.5), got {}",
            config.trim
        )));
    }
    let mut sorted = instance.edges.clone();
    sorted.sort_by(|a, b| {
        instance
            .t(a.0, a.1)
            .total_cmp(&instance.t(b.0, b.1))
            .then(a.cmp(b))
    });
    let total = sorted.len();
    let cut = (config.trim * total as f64 + TIME_EPS).floor() as usize;
    let mut middle: Vec<(usize, usize)> = sorted[cut..total - cut].to_vec();
    let keep = ((config.fraction * middle.len() as f64) - TIME_EPS).ceil().max(0.0) as usize;
    let keep = keep.min(middle.len());
    let mut rng = SplitMix64::new(seed);
    for i in 0..keep {
        let j = i + rng.next_index(middle.len() - i);
        middle.swap(i, j);
    }
    middle.truncate(keep);
    instance.with_edges(middle)
}

/// A closed instance with all derived quantities resolved, ready for path
/// generation and solving.
#[derive(Debug, Clone)]
pub struct Problem {
    pub instance: Instance,
    pub derived: DerivedTimes,
    pub revenues: Vec<f64>,
}

impl Problem {
    pub fn prepare(instance: Instance) -> Result<Problem, ModelError> {
        if !instance.is_metric() {
            return Err(ModelError::Validation(
                "travel times must be closed (finite and metric) before preparation".into(),
            ));
        }
        let derived = derive_times(&instance);
        let revenues = match &instance.params.revenue {
            RevenueSpec::Explicit(values) => values.clone(),
            RevenueSpec::Gamma { seed } => derive_revenues(&instance, *seed),
        };
        Ok(Problem {
            instance,
            derived,
            revenues,
        })
    }

    /// Prepare with caller-supplied access/exit times.
    pub fn with_derived(instance: Instance, derived: DerivedTimes) -> Result<Problem, ModelError> {
        let mut problem = Problem::prepare(instance)?;
        if derived.access.len() != problem.instance.n() || derived.exit.len() != problem.instance.n() {
            return Err(ModelError::Validation("derived times have the wrong length".into()));
        }
        if derived.access.iter().chain(&derived.exit).any(|v| !(*v >= 0.0)) {
            return Err(ModelError::Validation("access/exit times must be non-negative".into()));
        }
        problem.derived = derived;
        Ok(problem)
    }

    pub fn params(&self) -> &Params {
        self.instance.params()
    }

    pub fn direct_time(&self, c: usize) -> f64 {
        let com = self.instance.commodities[c];
        self.instance.t(com.origin, com.destination)
    }

    pub fn profit_term(&self, c: usize) -> ProfitTerm {
        let com = self.instance.commodities[c];
        ProfitTerm {
            revenue: self.revenues[c],
            pop_origin: self.instance.nodes[com.origin].population,
            pop_destination: self.instance.nodes[com.destination].population,
            t_direct: self.direct_time(c),
            r: self.params().r,
        }
    }
}

/// Random Euclidean instance on the plane `[0, 100]^2`: complete edge set,
/// all unordered commodities, populations in `[1, 100]`. Coordinates are
/// mapped onto a small lon/lat window so the instance can be exported.
pub fn synthetic_instance(n: usize, seed: u64, params: Params) -> Result<Instance, ModelError> {
    let mut rng = SplitMix64::new(seed);
    let mut nodes = Vec::with_capacity(n);
    let mut xy = Vec::with_capacity(n);
    for id in 0..n {
        let x = 100.0 * rng.next_f64();
        let y = 100.0 * rng.next_f64();
        let pop = 1.0 + 99.0 * rng.next_f64();
        xy.push((x, y));
        nodes.push(Node::new(id, format!("s{id}"), pop).with_coords(-74.0 + x / 200.0, 45.3 + y / 200.0));
    }
    let mut time = TimeMatrix::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let (dx, dy) = (xy[i].0 - xy[j].0, xy[i].1 - xy[j].1);
            // Keep coincident points apart.
            let t = (dx * dx + dy * dy).sqrt().max(1e-3);
            time.set_symmetric(i, j, t);
        }
    }
    let inst = Instance::new(nodes, complete_edges(n), time, unordered_pairs(n), params)?;
    Ok(metric_closure(&inst))
}
