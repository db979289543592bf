//! Finite connected graphs, shortest-path distances and exact geodesic counts.
//!
//! Builtin vertex orderings: `hypercube:n` is binary little-endian (coordinate
//! `i` is bit `i`), products are row-major with the first factor most
//! significant.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected, connected, simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    label: String,
    adjacency: Vec<Vec<usize>>,
    layout: Option<ProductLayout>,
}

/// Factor structure of a Cartesian product. Coordinate `i` of vertex `v` is
/// `(v / strides[i]) % factors[i].vertex_count()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductLayout {
    factors: Vec<Graph>,
    strides: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphJson {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl ProductLayout {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[Graph] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &Graph {
        &self.factors[i]
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(Graph::vertex_count).collect()
    }

    pub fn coordinate(&self, v: usize, i: usize) -> usize {
        (v / self.strides[i]) % self.factors[i].vertex_count()
    }

    pub fn coordinates(&self, v: usize) -> Vec<usize> {
        (0..self.len()).map(|i| self.coordinate(v, i)).collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    /// Vertex obtained from `v` by replacing coordinate `i` with `value`.
    pub fn with_coordinate(&self, v: usize, i: usize, value: usize) -> usize {
        v - self.coordinate(v, i) * self.strides[i] + value * self.strides[i]
    }
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops, duplicates,
    /// out-of-range endpoints and disconnected vertex sets.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)], label: impl Into<String>) -> Result<Graph> {
        if vertex_count == 0 {
            return Err(Error::InvalidGraph("empty vertex set".into()));
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u},{v}) references a vertex outside 0..{vertex_count}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u},{})", w[0])));
            }
        }
        let graph = Graph { label: label.into(), adjacency, layout: None };
        graph.check_connected()?;
        Ok(graph)
    }

    /// Parses a builtin spec (`complete:n`, `hypercube:n`, `path:n`,
    /// `cycle:n`, `two_point`, `product:A,B[,C...]`) or inline graph JSON.
    pub fn from_spec(spec: &str) -> Result<Graph> {
        let spec = spec.trim();
        let bad = |reason: &str| Error::GraphSpec { spec: spec.to_string(), reason: reason.to_string() };
        if spec.starts_with('{') {
            return Graph::from_json_str(spec);
        }
        if spec == "two_point" {
            return Ok(Graph::two_point());
        }
        if let Some(rest) = spec.strip_prefix("product:") {
            let mut parts = rest.split(',').map(str::trim).filter(|s| !s.is_empty());
            let first = parts.next().ok_or_else(|| bad("product needs at least two factors"))?;
            let mut acc = Graph::from_spec(first)?;
            let mut count = 1;
            for part in parts {
                acc = cartesian_product(&acc, &Graph::from_spec(part)?);
                count += 1;
            }
            if count < 2 {
                return Err(bad("product needs at least two factors"));
            }
            return Ok(acc);
        }
        let (kind, arg) = spec.split_once(':').ok_or_else(|| bad("expected kind:n"))?;
        let n: usize = arg.trim().parse().map_err(|_| bad("size is not a nonnegative integer"))?;
        match kind {
            "complete" => Graph::complete(n),
            "hypercube" => Graph::hypercube(n),
            "path" => Graph::path(n),
            "cycle" => Graph::cycle(n),
            _ => Err(bad("unknown graph kind")),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Graph> {
        let parsed: GraphJson = serde_json::from_str(text)?;
        let edges: Vec<(usize, usize)> = parsed.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edges(parsed.vertices, &edges, "json")
    }

    pub fn to_json_string(&self) -> String {
        let json = GraphJson { vertices: self.vertex_count(), edges: self.edges().map(|(u, v)| [u, v]).collect() };
        serde_json::to_string(&json).expect("graph json")
    }

    pub fn two_point() -> Graph {
        Graph { label: "two_point".into(), adjacency: vec![vec![1], vec![0]], layout: None }
    }

    pub fn complete(n: usize) -> Result<Graph> {
        if n == 0 {
            return Err(Error::GraphSpec { spec: "complete:0".into(), reason: "empty vertex set".into() });
        }
        let adjacency = (0..n).map(|u| (0..n).filter(|&v| v != u).collect()).collect();
        Ok(Graph { label: format!("complete:{n}"), adjacency, layout: None })
    }

    pub fn path(n: usize) -> Result<Graph> {
        if n == 0 {
            return Err(Error::GraphSpec { spec: "path:0".into(), reason: "empty vertex set".into() });
        }
        let adjacency = (0..n)
            .map(|u| {
                let mut list = Vec::with_capacity(2);
                if u > 0 {
                    list.push(u - 1);
                }
                if u + 1 < n {
                    list.push(u + 1);
                }
                list
            })
            .collect();
        Ok(Graph { label: format!("path:{n}"), adjacency, layout: None })
    }

    pub fn cycle(n: usize) -> Result<Graph> {
        if n < 3 {
            return Err(Error::GraphSpec { spec: format!("cycle:{n}"), reason: "a cycle needs at least 3 vertices".into() });
        }
        let adjacency = (0..n)
            .map(|u| {
                let mut list = vec![(u + n - 1) % n, (u + 1) % n];
                list.sort_unstable();
                list
            })
            .collect();
        Ok(Graph { label: format!("cycle:{n}"), adjacency, layout: None })
    }

    /// The discrete cube {0,1}^n; vertex `v` has coordinate `i` equal to bit `i`.
    pub fn hypercube(n: usize) -> Result<Graph> {
        if n == 0 || n > 24 {
            return Err(Error::GraphSpec { spec: format!("hypercube:{n}"), reason: "dimension must be in 1..=24".into() });
        }
        let size = 1usize << n;
        let adjacency = (0..size)
            .map(|v| {
                let mut list: Vec<usize> = (0..n).map(|i| v ^ (1 << i)).collect();
                list.sort_unstable();
                list
            })
            .collect();
        let layout = ProductLayout {
            factors: vec![Graph::two_point(); n],
            strides: (0..n).map(|i| 1usize << i).collect(),
        };
        Ok(Graph { label: format!("hypercube:{n}"), adjacency, layout: Some(layout) })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().copied().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn is_complete(&self) -> bool {
        let n = self.vertex_count();
        self.adjacency.iter().all(|l| l.len() == n - 1)
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, vertex_count: self.vertex_count() })
        }
    }

    /// Explicit product structure, if the graph was built as a product.
    pub fn explicit_layout(&self) -> Option<&ProductLayout> {
        self.layout.as_ref()
    }

    /// Product structure with a single trivial factor when the graph is not a product.
    pub fn layout(&self) -> ProductLayout {
        match &self.layout {
            Some(layout) => layout.clone(),
            None => ProductLayout { factors: vec![self.clone()], strides: vec![1] },
        }
    }

    /// Breadth-first distances from `source`.
    pub fn bfs(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn check_connected(&self) -> Result<()> {
        let dist = self.bfs(0);
        match dist.iter().position(|&d| d == usize::MAX) {
            Some(v) => Err(Error::InvalidGraph(format!("disconnected: vertex {v} unreachable from 0"))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} vertices, {} edges)", self.label, self.vertex_count(), self.edge_count())
    }
}

fn strip_product(label: &str) -> &str {
    label.strip_prefix("product:").unwrap_or(label)
}

/// Cartesian product `g1 □ g2`; vertex `(i1, i2)` has index `i1 * |V2| + i2`.
pub fn cartesian_product(g1: &Graph, g2: &Graph) -> Graph {
    let n2 = g2.vertex_count();
    let n = g1.vertex_count() * n2;
    let mut adjacency = Vec::with_capacity(n);
    for i1 in 0..g1.vertex_count() {
        for i2 in 0..n2 {
            let mut list: Vec<usize> = g1.neighbors(i1).iter().map(|&w1| w1 * n2 + i2).collect();
            list.extend(g2.neighbors(i2).iter().map(|&w2| i1 * n2 + w2));
            list.sort_unstable();
            adjacency.push(list);
        }
    }
    let left = g1.layout();
    let right = g2.layout();
    let mut factors = Vec::with_capacity(left.len() + right.len());
    let mut strides = Vec::with_capacity(left.len() + right.len());
    for (f, s) in left.factors.into_iter().zip(left.strides) {
        factors.push(f);
        strides.push(s * n2);
    }
    factors.extend(right.factors);
    strides.extend(right.strides);
    let label = format!("product:{},{}", strip_product(g1.label()), strip_product(g2.label()));
    Graph { label, adjacency, layout: Some(ProductLayout { factors, strides }) }
}

#[derive(Debug, Clone)]
enum Counts {
    Small(Vec<u64>),
    Big(Vec<BigUint>),
}

/// All-pairs distances and exact geodesic counts σ(x,y).
#[derive(Debug, Clone)]
pub struct GeodesicTable {
    n: usize,
    dist: Vec<u32>,
    counts: Counts,
}

impl GeodesicTable {
    pub fn new(g: &Graph) -> GeodesicTable {
        let n = g.vertex_count();
        let mut dist = vec![0u32; n * n];
        let mut orders = Vec::with_capacity(n);
        for x in 0..n {
            let mut order = Vec::with_capacity(n);
            let mut seen = vec![false; n];
            let mut queue = VecDeque::new();
            seen[x] = true;
            queue.push_back(x);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for &w in g.neighbors(u) {
                    if !seen[w] {
                        seen[w] = true;
                        dist[x * n + w] = dist[x * n + u] + 1;
                        queue.push_back(w);
                    }
                }
            }
            orders.push(order);
        }
        let counts = match small_counts(g, &dist, &orders) {
            Some(c) => Counts::Small(c),
            None => Counts::Big(big_counts(g, &dist, &orders)),
        };
        GeodesicTable { n, dist, counts }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn dist(&self, x: usize, y: usize) -> usize {
        self.dist[x * self.n + y] as usize
    }

    pub fn diameter(&self) -> usize {
        self.dist.iter().copied().max().unwrap_or(0) as usize
    }

    /// Exact number of geodesics from `x` to `y`.
    pub fn count(&self, x: usize, y: usize) -> BigUint {
        match &self.counts {
            Counts::Small(c) => BigUint::from(c[x * self.n + y]),
            Counts::Big(c) => c[x * self.n + y].clone(),
        }
    }

    pub fn count_f64(&self, x: usize, y: usize) -> f64 {
        match &self.counts {
            Counts::Small(c) => c[x * self.n + y] as f64,
            Counts::Big(c) => c[x * self.n + y].to_f64().unwrap_or(f64::INFINITY),
        }
    }

    /// Whether `z` lies on some geodesic from `x` to `y`.
    pub fn is_between(&self, x: usize, z: usize, y: usize) -> bool {
        self.dist(x, z) + self.dist(z, y) == self.dist(x, y)
    }

    /// Number of geodesics from `x` to `y` passing through `z`.
    pub fn count_through(&self, x: usize, z: usize, y: usize) -> BigUint {
        if self.is_between(x, z, y) {
            self.count(x, z) * self.count(z, y)
        } else {
            BigUint::zero()
        }
    }

    /// σ(x,z)σ(z,y)/σ(x,y), zero off the interval.
    pub fn through_fraction(&self, x: usize, z: usize, y: usize) -> f64 {
        if !self.is_between(x, z, y) {
            return 0.0;
        }
        let n = self.n;
        match &self.counts {
            Counts::Small(c) => {
                let (a, b, d) = (c[x * n + z], c[z * n + y], c[x * n + y]);
                match (a as u128).checked_mul(b as u128) {
                    Some(p) => ratio_u128(p, d as u128),
                    None => big_ratio(&(BigUint::from(a) * BigUint::from(b)), &BigUint::from(d)),
                }
            }
            Counts::Big(c) => big_ratio(&(&c[x * n + z] * &c[z * n + y]), &c[x * n + y]),
        }
    }

    /// σ(a,b)/σ(c,d) as a float.
    pub fn count_ratio(&self, (a, b): (usize, usize), (c, d): (usize, usize)) -> f64 {
        let n = self.n;
        match &self.counts {
            Counts::Small(v) => ratio_u128(v[a * n + b] as u128, v[c * n + d] as u128),
            Counts::Big(v) => big_ratio(&v[a * n + b], &v[c * n + d]),
        }
    }
}

fn ratio_u128(num: u128, den: u128) -> f64 {
    if num < (1u128 << 53) && den < (1u128 << 53) {
        num as f64 / den as f64
    } else {
        big_ratio(&BigUint::from(num), &BigUint::from(den))
    }
}

fn top_bits(x: &BigUint) -> (f64, i64) {
    let bits = x.bits();
    if bits <= 64 {
        (x.to_u64().expect("fits") as f64, 0)
    } else {
        let shift = bits - 64;
        ((x >> shift).to_u64().expect("fits") as f64, shift as i64)
    }
}

fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    let (n, sn) = top_bits(num);
    let (d, sd) = top_bits(den);
    (n / d) * 2f64.powi((sn - sd) as i32)
}

fn small_counts(g: &Graph, dist: &[u32], orders: &[Vec<usize>]) -> Option<Vec<u64>> {
    let n = g.vertex_count();
    let mut counts = vec![0u64; n * n];
    for x in 0..n {
        let row = x * n;
        counts[row + x] = 1;
        for &y in &orders[x][1..] {
            let dy = dist[row + y];
            let mut total = 0u64;
            for &w in g.neighbors(y) {
                if dist[row + w] + 1 == dy {
                    total = total.checked_add(counts[row + w])?;
                }
            }
            counts[row + y] = total;
        }
    }
    Some(counts)
}

fn big_counts(g: &Graph, dist: &[u32], orders: &[Vec<usize>]) -> Vec<BigUint> {
    let n = g.vertex_count();
    let mut counts = vec![BigUint::zero(); n * n];
    for x in 0..n {
        let row = x * n;
        counts[row + x] = BigUint::one();
        for &y in &orders[x][1..] {
            let dy = dist[row + y];
            let mut total = BigUint::zero();
            for &w in g.neighbors(y) {
                if dist[row + w] + 1 == dy {
                    total += &counts[row + w];
                }
            }
            counts[row + y] = total;
        }
    }
    counts
}

/// Lists every geodesic from `x` to `y` by depth-first search, refusing once
/// more than `cap` have been found.
pub fn enumerate_geodesics(g: &Graph, x: usize, y: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    let from_x = g.bfs(x);
    let to_y = g.bfs(y);
    let d = from_x[y];
    let mut out = Vec::new();
    let mut path = vec![x];
    fn walk(
        g: &Graph,
        from_x: &[usize],
        to_y: &[usize],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        let v = *path.last().expect("nonempty");
        if to_y[v] == 0 {
            out.push(path.clone());
            return out.len() <= cap;
        }
        for &w in g.neighbors(v) {
            if from_x[w] == from_x[v] + 1 && to_y[w] + 1 == to_y[v] {
                path.push(w);
                let ok = walk(g, from_x, to_y, path, out, cap);
                path.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    if !walk(g, &from_x, &to_y, &mut path, &mut out, cap) {
        return Err(Error::EnumerationCap { count: format!("more than {cap}"), cap });
    }
    debug_assert!(out.iter().all(|p| p.len() == d + 1));
    Ok(out)
}

/// A graph bundled with its geodesic table.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    graph: Graph,
    table: GeodesicTable,
}

impl MetricGraph {
    pub fn new(graph: Graph) -> MetricGraph {
        let table = GeodesicTable::new(&graph);
        MetricGraph { graph, table }
    }

    pub fn from_spec(spec: &str) -> Result<MetricGraph> {
        Ok(MetricGraph::new(Graph::from_spec(spec)?))
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn table(&self) -> &GeodesicTable {
        &self.table
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn dist(&self, x: usize, y: usize) -> usize {
        self.table.dist(x, y)
    }

    pub fn label(&self) -> &str {
        self.graph.label()
    }
}
