//! Weighted locally finite graphs `G = (V, E, ω, μ)` and their metric structure.
//!
//! Vertices carry opaque string ids in files and dense `usize` indices
//! internally. Lattice and tree generators produce finite truncations (hop
//! balls) of infinite graphs; the truncation centre and radius are recorded
//! so downstream estimators can demand interior margins.

use std::collections::{HashMap, HashSet, VecDeque};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex `{0}` has nonpositive or non-finite measure {1}")]
    BadMeasure(String, f64),
    #[error("edge `{0}`-`{1}` has nonpositive or non-finite weight {2}")]
    BadWeight(String, String, f64),
    #[error("loop at vertex `{0}`")]
    Loop(String),
    #[error("duplicate edge `{0}`-`{1}`")]
    DuplicateEdge(String, String),
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("edge references unknown vertex `{0}`")]
    UnknownEdgeEndpoint(String),
    #[error("graph is disconnected: vertex `{0}` is unreachable from `{1}`")]
    Disconnected(String, String),
    #[error("graph has no vertices")]
    Empty,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("radius {requested} exceeds the available radius {available} around `{vertex}`")]
    Truncation {
        vertex: String,
        requested: usize,
        available: usize,
    },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed graph file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Recorded truncation of an infinite graph: the hop ball of `radius` around `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub center: usize,
    pub radius: usize,
}

/// Descriptor of a graph to build.
///
/// `Lattice` and `Tree` are truncations of infinite graphs; the rest are
/// finite graphs taken as they are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    /// Hop ball of `Z^dim` around the origin, `ω ≡ 1`, `μ ≡ dim`.
    Lattice { dim: usize, radius: usize },
    /// Hop ball of the homogeneous tree `T_q` (degree `q + 1`), `ω ≡ 1`, `μ ≡ q + 1`.
    Tree { q: usize, radius: usize },
    Path { n: usize },
    Cycle { n: usize },
    Complete { n: usize },
    /// Random connected graph: random spanning tree plus extra edges with
    /// probability `extra_edge_prob`; weights and measures uniform in `[0.5, 2]`.
    Random {
        n: usize,
        extra_edge_prob: f64,
        seed: u64,
    },
    File { path: String },
}

impl GraphSpec {
    /// Parse the compact CLI form, e.g. `lattice:1:30`, `tree:2:5`, `cycle:8`,
    /// `random:12:0.3:7`, `file:graph.json`.
    pub fn parse(s: &str) -> Result<Self, GraphError> {
        let bad = || GraphError::InvalidGenerator(s.to_string());
        let mut parts = s.splitn(2, ':');
        let kind = parts.next().ok_or_else(bad)?;
        let rest = parts.next().unwrap_or("");
        if kind == "file" {
            if rest.is_empty() {
                return Err(bad());
            }
            return Ok(GraphSpec::File {
                path: rest.to_string(),
            });
        }
        let args: Vec<&str> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(':').collect()
        };
        let int = |i: usize| -> Result<usize, GraphError> {
            args.get(i).and_then(|a| a.parse().ok()).ok_or_else(bad)
        };
        let spec = match (kind, args.len()) {
            ("lattice", 2) => GraphSpec::Lattice {
                dim: int(0)?,
                radius: int(1)?,
            },
            ("tree", 2) => GraphSpec::Tree {
                q: int(0)?,
                radius: int(1)?,
            },
            ("path", 1) => GraphSpec::Path { n: int(0)? },
            ("cycle", 1) => GraphSpec::Cycle { n: int(0)? },
            ("complete", 1) => GraphSpec::Complete { n: int(0)? },
            ("random", 3) => GraphSpec::Random {
                n: int(0)?,
                extra_edge_prob: args[1].parse().map_err(|_| bad())?,
                seed: args[2].parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        Ok(spec)
    }

    /// True for truncations of infinite graphs.
    pub fn is_generator(&self) -> bool {
        matches!(self, GraphSpec::Lattice { .. } | GraphSpec::Tree { .. })
    }

    /// Same generator at a different truncation radius.
    pub fn with_radius(&self, radius: usize) -> Result<Self, GraphError> {
        match self {
            GraphSpec::Lattice { dim, .. } => Ok(GraphSpec::Lattice { dim: *dim, radius }),
            GraphSpec::Tree { q, .. } => Ok(GraphSpec::Tree { q: *q, radius }),
            _ => Err(GraphError::InvalidGenerator(
                "only lattice and tree generators have a truncation radius".into(),
            )),
        }
    }

    pub fn build(&self) -> Result<WeightedGraph, GraphError> {
        build_graph(self)
    }
}

/// Validated weighted graph. Immutable after construction.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    mu: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
    m: Vec<f64>,
    truncation: Option<Truncation>,
    coords: Option<Vec<Vec<i64>>>,
}

impl WeightedGraph {
    /// Build and validate a graph from ids, measures and undirected weighted edges.
    pub fn new(
        ids: Vec<String>,
        mu: Vec<f64>,
        edges: &[(usize, usize, f64)],
    ) -> Result<Self, GraphError> {
        if ids.is_empty() {
            return Err(GraphError::Empty);
        }
        if ids.len() != mu.len() {
            return Err(GraphError::InvalidArgument(
                "ids and measures differ in length".into(),
            ));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(id.clone()));
            }
            if !(mu[i] > 0.0 && mu[i].is_finite()) {
                return Err(GraphError::BadMeasure(id.clone(), mu[i]));
            }
        }
        let n = ids.len();
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u >= n {
                return Err(GraphError::IndexOutOfRange(u));
            }
            if v >= n {
                return Err(GraphError::IndexOutOfRange(v));
            }
            if u == v {
                return Err(GraphError::Loop(ids[u].clone()));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(GraphError::BadWeight(ids[u].clone(), ids[v].clone(), w));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge(ids[u].clone(), ids[v].clone()));
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        let m = adj.iter().map(|l| l.iter().map(|&(_, w)| w).sum()).collect();
        let g = WeightedGraph {
            ids,
            index,
            mu,
            adj,
            m,
            truncation: None,
            coords: None,
        };
        let dist = g.distances_from(0);
        if let Some(far) = dist.iter().position(|d| d.is_none()) {
            return Err(GraphError::Disconnected(
                g.ids[far].clone(),
                g.ids[0].clone(),
            ));
        }
        Ok(g)
    }

    fn with_truncation(mut self, t: Truncation) -> Self {
        self.truncation = Some(t);
        self
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Result<usize, GraphError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.len() {
            Ok(())
        } else {
            Err(GraphError::IndexOutOfRange(v))
        }
    }

    pub fn mu(&self, v: usize) -> f64 {
        self.mu[v]
    }

    pub fn measures(&self) -> &[f64] {
        &self.mu
    }

    /// Weighted degree `m(x) = Σ_{y∼x} ω_xy`.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.m[v]
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    /// `ω_xy`, or `None` when `x ≁ y`.
    pub fn weight(&self, x: usize, y: usize) -> Option<f64> {
        self.adj[x]
            .binary_search_by_key(&y, |&(v, _)| v)
            .ok()
            .map(|i| self.adj[x][i].1)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Iterate each undirected edge once as `(x, y, ω)` with `x < y`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(x, l)| {
            l.iter()
                .filter(move |&&(y, _)| x < y)
                .map(move |&(y, w)| (x, y, w))
        })
    }

    pub fn truncation(&self) -> Option<&Truncation> {
        self.truncation.as_ref()
    }

    /// Lattice coordinates, when the graph came from the lattice generator.
    pub fn coords(&self) -> Option<&[Vec<i64>]> {
        self.coords.as_deref()
    }

    /// Outer shell of a truncation: vertices whose infinite-graph
    /// neighbourhood is cut off. Empty for finite graphs.
    pub fn shell(&self) -> Vec<usize> {
        match &self.truncation {
            None => Vec::new(),
            Some(t) => {
                let d = self.distances_from(t.center);
                (0..self.len())
                    .filter(|&v| d[v] == Some(t.radius))
                    .collect()
            }
        }
    }

    pub fn shell_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for v in self.shell() {
            mask[v] = true;
        }
        mask
    }

    /// BFS hop distances from `x`; `None` marks unreachable vertices.
    pub fn distances_from(&self, x: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        dist[x] = Some(0);
        queue.push_back(x);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap();
            for &(y, _) in &self.adj[v] {
                if dist[y].is_none() {
                    dist[y] = Some(dv + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    pub fn distance(&self, x: usize, y: usize) -> Result<usize, GraphError> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        Ok(self.distances_from(x)[y].expect("validated graphs are connected"))
    }

    /// Closed ball `B_x^r = {y : d(x, y) ≤ r}`, sorted by index.
    pub fn ball(&self, x: usize, r: usize) -> Result<Vec<usize>, GraphError> {
        self.check_vertex(x)?;
        let d = self.distances_from(x);
        Ok((0..self.len())
            .filter(|&v| matches!(d[v], Some(dv) if dv <= r))
            .collect())
    }

    /// `V(A) = Σ_{x∈A} μ(x)`.
    pub fn volume(&self, set: &[usize]) -> Result<f64, GraphError> {
        set.iter().try_fold(0.0, |acc, &v| {
            self.check_vertex(v)?;
            Ok(acc + self.mu[v])
        })
    }

    /// Largest radius around `x` that stays inside the graph: the remaining
    /// truncation radius, or the eccentricity of `x` for finite graphs.
    pub fn available_radius(&self, x: usize) -> usize {
        match &self.truncation {
            Some(t) => {
                let d = self.distances_from(t.center)[x].unwrap();
                t.radius.saturating_sub(d)
            }
            None => self
                .distances_from(x)
                .into_iter()
                .map(|d| d.unwrap())
                .max()
                .unwrap_or(0),
        }
    }

    /// True when `set` induces a connected subgraph.
    pub fn is_connected_subset(&self, set: &[usize]) -> bool {
        if set.is_empty() {
            return false;
        }
        let members: HashSet<usize> = set.iter().copied().collect();
        let mut seen = HashSet::new();
        let mut stack = vec![set[0]];
        seen.insert(set[0]);
        while let Some(v) = stack.pop() {
            for &(y, _) in &self.adj[v] {
                if members.contains(&y) && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen.len() == members.len()
    }

    /// Same graph with every measure multiplied by `c`.
    pub fn scale_measure(&self, c: f64) -> Result<Self, GraphError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(GraphError::InvalidArgument(format!(
                "measure scale must be positive, got {c}"
            )));
        }
        let mut g = self.clone();
        for mu in &mut g.mu {
            *mu *= c;
        }
        Ok(g)
    }

    /// Load the JSON graph format
    /// `{"vertices":[{"id":..,"mu":..}], "edges":[{"u":..,"v":..,"w":..}]}`.
    pub fn from_json_str(s: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(s)?;
        let ids: Vec<String> = file.vertices.iter().map(|v| v.id.clone()).collect();
        let mu: Vec<f64> = file.vertices.iter().map(|v| v.mu).collect();
        let mut index = HashMap::new();
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.as_str(), i).is_some() {
                return Err(GraphError::DuplicateVertex(id.clone()));
            }
        }
        let mut edges = Vec::with_capacity(file.edges.len());
        for e in &file.edges {
            let u = *index
                .get(e.u.as_str())
                .ok_or_else(|| GraphError::UnknownEdgeEndpoint(e.u.clone()))?;
            let v = *index
                .get(e.v.as_str())
                .ok_or_else(|| GraphError::UnknownEdgeEndpoint(e.v.clone()))?;
            edges.push((u, v, e.w));
        }
        WeightedGraph::new(ids, mu, &edges)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&s)
    }

    pub fn to_file_format(&self) -> GraphFile {
        GraphFile {
            vertices: (0..self.len())
                .map(|v| VertexRecord {
                    id: self.ids[v].clone(),
                    mu: self.mu[v],
                })
                .collect(),
            edges: self
                .edges()
                .map(|(x, y, w)| EdgeRecord {
                    u: self.ids[x].clone(),
                    v: self.ids[y].clone(),
                    w,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: String,
    pub mu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub w: f64,
}

/// Build a validated graph from a descriptor.
pub fn build_graph(spec: &GraphSpec) -> Result<WeightedGraph, GraphError> {
    match *spec {
        GraphSpec::Lattice { dim, radius } => lattice_ball(dim, radius),
        GraphSpec::Tree { q, radius } => tree_ball(q, radius),
        GraphSpec::Path { n } => {
            if n == 0 {
                return Err(GraphError::InvalidGenerator("path needs n ≥ 1".into()));
            }
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
            WeightedGraph::new(numbered(n), vec![1.0; n], &edges)
        }
        GraphSpec::Cycle { n } => {
            if n < 3 {
                return Err(GraphError::InvalidGenerator("cycle needs n ≥ 3".into()));
            }
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
            WeightedGraph::new(numbered(n), vec![1.0; n], &edges)
        }
        GraphSpec::Complete { n } => {
            if n == 0 {
                return Err(GraphError::InvalidGenerator("complete needs n ≥ 1".into()));
            }
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    edges.push((i, j, 1.0));
                }
            }
            WeightedGraph::new(numbered(n), vec![1.0; n], &edges)
        }
        GraphSpec::Random {
            n,
            extra_edge_prob,
            seed,
        } => random_graph(n, extra_edge_prob, seed),
        GraphSpec::File { ref path } => WeightedGraph::from_json_file(path),
    }
}

fn numbered(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn lattice_ball(dim: usize, radius: usize) -> Result<WeightedGraph, GraphError> {
    if dim == 0 {
        return Err(GraphError::InvalidGenerator("lattice needs dim ≥ 1".into()));
    }
    let r = radius as i64;
    let mut points: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::new();
        for p in &points {
            let used: i64 = p.iter().map(|c| c.abs()).sum();
            for c in -(r - used)..=(r - used) {
                let mut q = p.clone();
                q.push(c);
                next.push(q);
            }
        }
        points = next;
    }
    let index: HashMap<Vec<i64>, usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    let mut edges = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for axis in 0..dim {
            let mut q = p.clone();
            q[axis] += 1;
            if let Some(&j) = index.get(&q) {
                edges.push((i, j, 1.0));
            }
        }
    }
    let ids = points
        .iter()
        .map(|p| {
            p.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    let origin = index[&vec![0; dim]];
    let mut g = WeightedGraph::new(ids, vec![dim as f64; points.len()], &edges)?;
    g.coords = Some(points);
    Ok(g.with_truncation(Truncation {
        center: origin,
        radius,
    }))
}

fn tree_ball(q: usize, radius: usize) -> Result<WeightedGraph, GraphError> {
    if q == 0 {
        return Err(GraphError::InvalidGenerator("tree needs q ≥ 1".into()));
    }
    let mut ids = vec!["0".to_string()];
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    for depth in 0..radius {
        let mut next = Vec::new();
        for &v in &frontier {
            let children = if depth == 0 { q + 1 } else { q };
            for c in 0..children {
                let id = format!("{}.{}", ids[v], c);
                ids.push(id);
                let child = ids.len() - 1;
                edges.push((v, child, 1.0));
                next.push(child);
            }
        }
        frontier = next;
    }
    let n = ids.len();
    let g = WeightedGraph::new(ids, vec![(q + 1) as f64; n], &edges)?;
    Ok(g.with_truncation(Truncation { center: 0, radius }))
}

fn random_graph(n: usize, extra_edge_prob: f64, seed: u64) -> Result<WeightedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidGenerator("random needs n ≥ 1".into()));
    }
    if !(0.0..=1.0).contains(&extra_edge_prob) {
        return Err(GraphError::InvalidGenerator(format!(
            "edge probability {extra_edge_prob} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut present = HashSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.push((j, i, rng.random_range(0.5..2.0)));
        present.insert((j, i));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !present.contains(&(i, j)) && rng.random::<f64>() < extra_edge_prob {
                edges.push((i, j, rng.random_range(0.5..2.0)));
            }
        }
    }
    let mu = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    WeightedGraph::new(numbered(n), mu, &edges)
}

/// Global constants `D_μ`, `D_ω`, `ω_min`, `μ_max`, `μ_min` by exhaustive scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphConstants {
    pub d_mu: f64,
    /// Absent when the graph has no edges.
    pub d_omega: Option<f64>,
    pub omega_min: Option<f64>,
    pub mu_max: f64,
    pub mu_min: f64,
}

pub fn graph_constants(g: &WeightedGraph) -> GraphConstants {
    let d_mu = (0..g.len())
        .map(|v| g.weighted_degree(v) / g.mu(v))
        .fold(0.0, f64::max);
    let omega_min = g.edges().map(|(_, _, w)| w).reduce(f64::min);
    let mu_max = g.measures().iter().copied().fold(f64::MIN, f64::max);
    let mu_min = g.measures().iter().copied().fold(f64::MAX, f64::min);
    GraphConstants {
        d_mu,
        d_omega: omega_min.map(|w| mu_max / w),
        omega_min,
        mu_max,
        mu_min,
    }
}

/// Finite subset `Ω = Ω° ∪ ∂Ω` of a host graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSubset {
    interior: Vec<usize>,
    boundary: Vec<usize>,
}

impl DomainSubset {
    /// Split `Ω` into boundary `{x ∈ Ω : ∃ y ∉ Ω, y ∼ x}` and interior.
    ///
    /// Vertices on a truncation shell count as boundary: their cut-off
    /// neighbours lie outside `Ω` in the infinite graph.
    pub fn from_set(g: &WeightedGraph, set: &[usize]) -> Result<Self, GraphError> {
        let members = validated_members(g, set)?;
        let shell = g.shell_mask();
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for &x in &members {
            let open = shell[x] || g.neighbors(x).iter().any(|&(y, _)| !members.contains(&y));
            if open {
                boundary.push(x);
            } else {
                interior.push(x);
            }
        }
        Self::finish(g, interior, boundary)
    }

    /// Domain whose interior is `interior` and whose boundary is the vertex
    /// boundary of `interior`. Interior vertices may not lie on a truncation shell.
    pub fn from_interior(g: &WeightedGraph, interior: &[usize]) -> Result<Self, GraphError> {
        let inner = validated_members(g, interior)?;
        let shell = g.shell_mask();
        if let Some(&x) = inner.iter().find(|&&x| shell[x]) {
            return Err(GraphError::Truncation {
                vertex: g.id(x).to_string(),
                requested: 1,
                available: 0,
            });
        }
        let mut boundary: Vec<usize> = inner
            .iter()
            .flat_map(|&x| g.neighbors(x).iter().map(|&(y, _)| y))
            .filter(|y| !inner.contains(y))
            .collect();
        boundary.sort_unstable();
        boundary.dedup();
        Self::finish(g, inner.into_iter().collect(), boundary)
    }

    fn finish(
        g: &WeightedGraph,
        mut interior: Vec<usize>,
        mut boundary: Vec<usize>,
    ) -> Result<Self, GraphError> {
        interior.sort_unstable();
        boundary.sort_unstable();
        if interior.is_empty() {
            return Err(GraphError::InvalidDomain("interior is empty".into()));
        }
        let mut all = interior.clone();
        all.extend_from_slice(&boundary);
        if !g.is_connected_subset(&all) {
            return Err(GraphError::InvalidDomain("Ω is not connected".into()));
        }
        Ok(DomainSubset { interior, boundary })
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// `Ω = Ω° ∪ ∂Ω`, sorted.
    pub fn all(&self) -> Vec<usize> {
        let mut all = self.interior.clone();
        all.extend_from_slice(&self.boundary);
        all.sort_unstable();
        all
    }

    pub fn interior_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &x in &self.interior {
            mask[x] = true;
        }
        mask
    }
}

fn validated_members(g: &WeightedGraph, set: &[usize]) -> Result<std::collections::BTreeSet<usize>, GraphError> {
    let mut members = std::collections::BTreeSet::new();
    for &v in set {
        g.check_vertex(v)?;
        members.insert(v);
    }
    if members.is_empty() {
        return Err(GraphError::InvalidDomain("empty vertex set".into()));
    }
    Ok(members)
}

/// One row of the volume-growth table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub radius: usize,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub center: String,
    /// Least-squares slope of `log V(x, r)` against `log r`.
    pub m_hat: f64,
    pub c0_hat: f64,
    pub r_squared: f64,
    pub r0: usize,
    pub table: Vec<GrowthRow>,
    /// `R² ≥ 0.99`. Only marks polynomial growth as plausible at this centre.
    pub polynomial_flag: bool,
}

pub const VG_R0: usize = 2;
pub const VG_R2_THRESHOLD: f64 = 0.99;

/// Fit `V(x, r) ≈ c0 r^m` over `r ∈ [2, r_max]` by ordinary least squares in log-log space.
pub fn volume_growth_fit(
    g: &WeightedGraph,
    x: usize,
    r_max: usize,
) -> Result<GrowthReport, GraphError> {
    g.check_vertex(x)?;
    if r_max < 4 {
        return Err(GraphError::InvalidArgument(format!(
            "r_max must be at least 4, got {r_max}"
        )));
    }
    let available = g.available_radius(x);
    if r_max > available {
        return Err(GraphError::Truncation {
            vertex: g.id(x).to_string(),
            requested: r_max,
            available,
        });
    }
    let dist = g.distances_from(x);
    let mut shell_volume = vec![0.0; r_max + 1];
    for v in 0..g.len() {
        if let Some(d) = dist[v] {
            if d <= r_max {
                shell_volume[d] += g.mu(v);
            }
        }
    }
    let mut table = Vec::with_capacity(r_max + 1);
    let mut acc = 0.0;
    for (r, s) in shell_volume.iter().enumerate() {
        acc += s;
        table.push(GrowthRow {
            radius: r,
            volume: acc,
        });
    }
    let pts: Vec<(f64, f64)> = table[VG_R0..]
        .iter()
        .map(|row| ((row.radius as f64).ln(), row.volume.ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(GrowthReport {
        center: g.id(x).to_string(),
        m_hat: slope,
        c0_hat: intercept.exp(),
        r_squared,
        r0: VG_R0,
        table,
        polynomial_flag: r_squared >= VG_R2_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_z1_radius_3() {
        let g = build_graph(&GraphSpec::Lattice { dim: 1, radius: 3 }).unwrap();
        assert_eq!(g.len(), 7);
        let origin = g.index_of("0").unwrap();
        assert_eq!(g.weighted_degree(origin), 2.0);
        assert_eq!(g.mu(origin), 1.0);
        for id in ["-2", "-1", "1", "2"] {
            assert_eq!(g.weighted_degree(g.index_of(id).unwrap()), 2.0);
        }
        assert_eq!(g.truncation().unwrap().radius, 3);
        let mut shell: Vec<&str> = g.shell().iter().map(|&v| g.id(v)).collect();
        shell.sort();
        assert_eq!(shell, vec!["-3", "3"]);
    }

    #[test]
    fn tree_t2_radius_2_counts() {
        let g = build_graph(&GraphSpec::Tree { q: 2, radius: 2 }).unwrap();
        assert_eq!(g.len(), 1 + 3 + 6);
        assert!(g.measures().iter().all(|&m| m == 3.0));
        assert_eq!(g.weighted_degree(0), 3.0);
    }

    #[test]
    fn lattice_z2_diamond_count() {
        let g = build_graph(&GraphSpec::Lattice { dim: 2, radius: 4 }).unwrap();
        // 2r² + 2r + 1
        assert_eq!(g.len(), 41);
        assert!(g.measures().iter().all(|&m| m == 2.0));
    }

    #[test]
    fn negative_weight_rejected() {
        let s = r#"{"vertices":[{"id":"a","mu":1},{"id":"b","mu":1}],
                    "edges":[{"u":"a","v":"b","w":-1}]}"#;
        match WeightedGraph::from_json_str(s) {
            Err(GraphError::BadWeight(u, v, w)) => {
                assert_eq!((u.as_str(), v.as_str(), w), ("a", "b", -1.0))
            }
            other => panic!("expected weight error, got {other:?}"),
        }
    }

    #[test]
    fn file_validation_errors() {
        let disconnected = r#"{"vertices":[{"id":"a","mu":1},{"id":"b","mu":1},{"id":"c","mu":1}],
                               "edges":[{"u":"a","v":"b","w":1}]}"#;
        assert!(matches!(
            WeightedGraph::from_json_str(disconnected),
            Err(GraphError::Disconnected(ref v, _)) if v == "c"
        ));
        let looped = r#"{"vertices":[{"id":"a","mu":1}],"edges":[{"u":"a","v":"a","w":1}]}"#;
        assert!(matches!(
            WeightedGraph::from_json_str(looped),
            Err(GraphError::Loop(_))
        ));
        let dup = r#"{"vertices":[{"id":"a","mu":1},{"id":"b","mu":1}],
                      "edges":[{"u":"a","v":"b","w":1},{"u":"b","v":"a","w":2}]}"#;
        assert!(matches!(
            WeightedGraph::from_json_str(dup),
            Err(GraphError::DuplicateEdge(_, _))
        ));
        let bad_mu = r#"{"vertices":[{"id":"a","mu":0}],"edges":[]}"#;
        assert!(matches!(
            WeightedGraph::from_json_str(bad_mu),
            Err(GraphError::BadMeasure(_, _))
        ));
    }

    #[test]
    fn json_round_trip() {
        let g = build_graph(&GraphSpec::Random {
            n: 9,
            extra_edge_prob: 0.3,
            seed: 5,
        })
        .unwrap();
        let s = serde_json::to_string(&g.to_file_format()).unwrap();
        let h = WeightedGraph::from_json_str(&s).unwrap();
        assert_eq!(g.ids(), h.ids());
        assert_eq!(g.measures(), h.measures());
        assert_eq!(g.edges().collect::<Vec<_>>(), h.edges().collect::<Vec<_>>());
    }

    #[test]
    fn constants_examples() {
        let z1 = build_graph(&GraphSpec::Lattice { dim: 1, radius: 5 }).unwrap();
        let c = graph_constants(&z1);
        assert_eq!(c.d_mu, 2.0);
        assert_eq!(c.d_omega, Some(1.0));

        let t2 = build_graph(&GraphSpec::Tree { q: 2, radius: 3 }).unwrap();
        let c = graph_constants(&t2);
        assert_eq!(c.d_mu, 1.0);
        assert_eq!(c.d_omega, Some(3.0));

        let single = WeightedGraph::new(vec!["x".into()], vec![5.0], &[]).unwrap();
        let c = graph_constants(&single);
        assert_eq!(c.d_mu, 0.0);
        assert_eq!(c.omega_min, None);
        assert_eq!(c.d_omega, None);
    }

    #[test]
    fn ball_examples() {
        let z1 = build_graph(&GraphSpec::Lattice { dim: 1, radius: 6 }).unwrap();
        let o = z1.index_of("0").unwrap();
        let b = z1.ball(o, 2).unwrap();
        let mut ids: Vec<i64> = b.iter().map(|&v| z1.id(v).parse().unwrap()).collect();
        ids.sort();
        assert_eq!(ids, vec![-2, -1, 0, 1, 2]);
        assert_eq!(z1.volume(&b).unwrap(), 5.0);
        assert_eq!(z1.ball(o, 0).unwrap(), vec![o]);

        let t2 = build_graph(&GraphSpec::Tree { q: 2, radius: 3 }).unwrap();
        let b = t2.ball(0, 1).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(t2.volume(&b).unwrap(), 12.0);

        assert!(matches!(
            z1.index_of("nope"),
            Err(GraphError::UnknownVertex(_))
        ));
        assert!(z1.ball(999, 1).is_err());
    }

    #[test]
    fn volume_growth_examples() {
        let z1 = build_graph(&GraphSpec::Lattice { dim: 1, radius: 40 }).unwrap();
        let o = z1.index_of("0").unwrap();
        let rep = volume_growth_fit(&z1, o, 40).unwrap();
        assert!((0.9..=1.1).contains(&rep.m_hat), "{}", rep.m_hat);
        assert!(rep.polynomial_flag);
        for row in &rep.table {
            assert_eq!(row.volume, (2 * row.radius + 1) as f64);
        }

        let z2 = build_graph(&GraphSpec::Lattice { dim: 2, radius: 20 }).unwrap();
        let o = z2.index_of("0,0").unwrap();
        let rep = volume_growth_fit(&z2, o, 20).unwrap();
        assert!((1.8..=2.2).contains(&rep.m_hat), "{}", rep.m_hat);

        let t2 = build_graph(&GraphSpec::Tree { q: 2, radius: 8 }).unwrap();
        let rep = volume_growth_fit(&t2, 0, 8).unwrap();
        assert!(!rep.polynomial_flag, "R² = {}", rep.r_squared);
    }

    #[test]
    fn volume_growth_truncation_error() {
        let z1 = build_graph(&GraphSpec::Lattice { dim: 1, radius: 10 }).unwrap();
        let v = z1.index_of("4").unwrap();
        assert!(matches!(
            volume_growth_fit(&z1, v, 8),
            Err(GraphError::Truncation { available: 6, .. })
        ));
        assert!(volume_growth_fit(&z1, v, 3).is_err());
    }

    #[test]
    fn domain_boundary_from_set() {
        let g = build_graph(&GraphSpec::Path { n: 6 }).unwrap();
        let om = DomainSubset::from_set(&g, &[1, 2, 3, 4]).unwrap();
        assert_eq!(om.interior(), &[2, 3]);
        assert_eq!(om.boundary(), &[1, 4]);

        let from_int = DomainSubset::from_interior(&g, &[2, 3]).unwrap();
        assert_eq!(from_int, om);

        assert!(DomainSubset::from_set(&g, &[1, 2]).is_err());
        assert!(DomainSubset::from_interior(&g, &[]).is_err());
    }

    #[test]
    fn truncation_shell_is_boundary() {
        let g = build_graph(&GraphSpec::Lattice { dim: 1, radius: 4 }).unwrap();
        let all: Vec<usize> = (0..g.len()).collect();
        let om = DomainSubset::from_set(&g, &all).unwrap();
        assert_eq!(om.interior().len(), 7);
        assert_eq!(om.boundary().len(), 2);
        let edge = g.index_of("4").unwrap();
        assert!(DomainSubset::from_interior(&g, &[edge]).is_err());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(
            GraphSpec::parse("lattice:2:7").unwrap(),
            GraphSpec::Lattice { dim: 2, radius: 7 }
        );
        assert_eq!(
            GraphSpec::parse("random:12:0.25:9").unwrap(),
            GraphSpec::Random {
                n: 12,
                extra_edge_prob: 0.25,
                seed: 9
            }
        );
        assert_eq!(
            GraphSpec::parse("file:a:b.json").unwrap(),
            GraphSpec::File {
                path: "a:b.json".into()
            }
        );
        assert!(GraphSpec::parse("lattice:2").is_err());
        assert!(GraphSpec::parse("torus:3").is_err());
    }
}
