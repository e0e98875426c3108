//! Centroid distance matrix, the nearest-neighbour cluster graph, its
//! four-parameter index and exact isomorphism testing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::Point2;

/// Graphs are stored as adjacency bitmasks.
pub const MAX_VERTICES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("a nearest-neighbour graph needs at least two vertices")]
    SingletonGraph,
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) references a missing vertex")]
    VertexOutOfRange(usize, usize),
    #[error("graphs are limited to {MAX_VERTICES} vertices")]
    TooManyVertices,
    #[error("malformed index string: {0}")]
    BadIndex(String),
}

/// Symmetric matrix of Euclidean distances between centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    k: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.k..(i + 1) * self.k]
    }
}

pub fn dist_matrix(centroids: &[Point2]) -> DistanceMatrix {
    let k = centroids.len();
    let mut d = vec![0.0; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let v = centroids[i].dist(centroids[j]);
            d[i * k + j] = v;
            d[j * k + i] = v;
        }
    }
    DistanceMatrix { k, d }
}

/// Undirected simple graph over cluster ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinutiaeGraph {
    k: usize,
    /// Edges as `(i, j)` with `i < j`.
    edges: BTreeSet<(usize, usize)>,
}

impl MinutiaeGraph {
    /// Builds a graph from an edge list; duplicate edges collapse.
    pub fn from_edges(k: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        if k > MAX_VERTICES {
            return Err(GraphError::TooManyVertices);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= k || b >= k {
                return Err(GraphError::VertexOutOfRange(a, b));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { k, edges: set })
    }

    pub fn vertex_count(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.k];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    fn adjacency(&self) -> Vec<u64> {
        let mut adj = vec![0u64; self.k];
        for &(a, b) in &self.edges {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        adj
    }

    /// The graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.k);
        let edges = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (perm[a], perm[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        Self { k: self.k, edges }
    }
}

/// Smallest gap between a vertex's nearest and second-nearest neighbour
/// distances. Gaps below ~1e-9 make the graph sensitive to rounding.
pub fn nn_tie_gap(d: &DistanceMatrix) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..d.k {
        let mut row: Vec<f64> = (0..d.k).filter(|&j| j != i).map(|j| d.get(i, j)).collect();
        if row.len() < 2 {
            continue;
        }
        row.sort_by(f64::total_cmp);
        gap = gap.min(row[1] - row[0]);
    }
    gap
}

/// Joins every vertex to its nearest other vertex (smallest index on ties).
pub fn build_nn_graph(d: &DistanceMatrix) -> Result<MinutiaeGraph, GraphError> {
    if d.k < 2 {
        return Err(GraphError::SingletonGraph);
    }
    let edges = (0..d.k).map(|i| {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in (0..d.k).filter(|&j| j != i) {
            if d.get(i, j) < best_d {
                best_d = d.get(i, j);
                best = j;
            }
        }
        (i, best)
    });
    MinutiaeGraph::from_edges(d.k, edges.collect::<Vec<_>>())
}

/// Vertex count, degree sequence, highest degree and degree multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphIndex {
    pub vertex_count: usize,
    /// Sorted in descending order.
    pub degree_sequence: Vec<usize>,
    pub max_degree: usize,
    pub degree_multiplicity: BTreeMap<usize, usize>,
}

pub fn compute_index(g: &MinutiaeGraph) -> GraphIndex {
    let mut degree_sequence = g.degrees();
    degree_sequence.sort_unstable_by(|a, b| b.cmp(a));
    let mut degree_multiplicity = BTreeMap::new();
    for &d in &degree_sequence {
        *degree_multiplicity.entry(d).or_insert(0) += 1;
    }
    GraphIndex {
        vertex_count: g.vertex_count(),
        max_degree: degree_sequence.first().copied().unwrap_or(0),
        degree_sequence,
        degree_multiplicity,
    }
}

fn join<T: fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for GraphIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "V{}|D{}|H{}|M{}",
            self.vertex_count,
            join(self.degree_sequence.iter()),
            self.max_degree,
            join(self.degree_multiplicity.iter().map(|(d, c)| format!("{d}:{c}")))
        )
    }
}

/// Canonical text form, e.g. `V3|D2,1,1|H2|M1:2,2:1`.
pub fn index_string(idx: &GraphIndex) -> String {
    idx.to_string()
}

impl FromStr for GraphIndex {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::BadIndex(s.to_string());
        let parts: Vec<&str> = s.split('|').collect();
        let [v, d, h, m] = parts.as_slice() else {
            return Err(bad());
        };
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        fn list(t: &str) -> Result<Vec<&str>, GraphError> {
            Ok(if t.is_empty() { Vec::new() } else { t.split(',').collect() })
        }
        let vertex_count = num(v.strip_prefix('V').ok_or_else(bad)?)?;
        let degree_sequence = list(d.strip_prefix('D').ok_or_else(bad)?)?
            .into_iter()
            .map(num)
            .collect::<Result<Vec<_>, _>>()?;
        let max_degree = num(h.strip_prefix('H').ok_or_else(bad)?)?;
        let mut degree_multiplicity = BTreeMap::new();
        for pair in list(m.strip_prefix('M').ok_or_else(bad)?)? {
            let (deg, cnt) = pair.split_once(':').ok_or_else(bad)?;
            degree_multiplicity.insert(num(deg)?, num(cnt)?);
        }
        let idx = GraphIndex {
            vertex_count,
            degree_sequence,
            max_degree,
            degree_multiplicity,
        };
        let mut counts = BTreeMap::new();
        for &d in &idx.degree_sequence {
            *counts.entry(d).or_insert(0) += 1;
        }
        let consistent = idx.degree_sequence.len() == idx.vertex_count
            && idx.degree_sequence.windows(2).all(|w| w[0] >= w[1])
            && idx.max_degree == idx.degree_sequence.first().copied().unwrap_or(0)
            && counts == idx.degree_multiplicity;
        // only canonical strings are accepted
        if !consistent || idx.to_string() != s {
            return Err(bad());
        }
        Ok(idx)
    }
}

/// Exact isomorphism test by backtracking over degree-compatible vertex
/// assignments.
pub fn is_isomorphic(g1: &MinutiaeGraph, g2: &MinutiaeGraph) -> bool {
    if g1.k != g2.k || g1.edges.len() != g2.edges.len() {
        return false;
    }
    let (d1, d2) = (g1.degrees(), g2.degrees());
    let mut s1 = d1.clone();
    let mut s2 = d2.clone();
    s1.sort_unstable();
    s2.sort_unstable();
    if s1 != s2 {
        return false;
    }
    let (a1, a2) = (g1.adjacency(), g2.adjacency());

    // Visit g1 vertices so each one (after the first of its component) has an
    // already-mapped neighbour; this prunes early.
    let mut order = Vec::with_capacity(g1.k);
    let mut placed = 0u64;
    while order.len() < g1.k {
        let next = (0..g1.k)
            .filter(|&v| placed & (1 << v) == 0)
            .max_by_key(|&v| ((a1[v] & placed).count_ones(), d1[v], std::cmp::Reverse(v)))
            .expect("unplaced vertex exists");
        order.push(next);
        placed |= 1 << next;
    }

    let mut map = vec![usize::MAX; g1.k];
    let mut used = 0u64;
    extend(0, &order, &a1, &a2, &d1, &d2, &mut map, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn extend(
    depth: usize,
    order: &[usize],
    a1: &[u64],
    a2: &[u64],
    d1: &[usize],
    d2: &[usize],
    map: &mut [usize],
    used: &mut u64,
) -> bool {
    let Some(&v) = order.get(depth) else {
        return true;
    };
    for w in 0..a2.len() {
        if *used & (1 << w) != 0 || d2[w] != d1[v] {
            continue;
        }
        let consistent = order[..depth].iter().all(|&u| {
            let e1 = a1[v] & (1 << u) != 0;
            let e2 = a2[w] & (1 << map[u]) != 0;
            e1 == e2
        });
        if !consistent {
            continue;
        }
        map[v] = w;
        *used |= 1 << w;
        if extend(depth + 1, order, a1, a2, d1, d2, map, used) {
            return true;
        }
        *used &= !(1 << w);
        map[v] = usize::MAX;
    }
    false
}

/// 0 when the graphs are isomorphic (same fingerprint), 1 otherwise.
pub fn fingerprint_distance(g1: &MinutiaeGraph, g2: &MinutiaeGraph) -> u8 {
    u8::from(!is_isomorphic(g1, g2))
}
