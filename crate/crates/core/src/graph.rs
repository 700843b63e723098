//! Qubit-network graphs.
//!
//! Vertices are labelled `1..=N` throughout the public API. Every graph carries
//! a designated input vertex (where a state is loaded) and output vertex (where
//! it is read back). Products index the pair `(g, h)` row-major, as
//! `(g - 1) * |V(H)| + h`, so the adjacency of `G × H` is literally the
//! Kronecker sum `A(G) ⊗ I + I ⊗ A(H)`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Simple undirected graph with designated input and output vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    input: usize,
    output: usize,
}

impl Graph {
    /// Builds a graph on `1..=vertex_count` with input `1` and output `N`.
    ///
    /// Self-loops, duplicate edges and out-of-range endpoints are rejected.
    pub fn new<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if vertex_count == 0 {
            return Err(Error::InvalidSize(
                "a graph needs at least one vertex".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w == 0 || w > vertex_count {
                    return Err(Error::InvalidGraph(format!(
                        "edge ({u}, {v}) has endpoint outside 1..={vertex_count}"
                    )));
                }
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
        }
        let edges: Vec<_> = seen.into_iter().collect();
        let mut neighbors = vec![Vec::new(); vertex_count];
        for &(u, v) in &edges {
            neighbors[u - 1].push(v);
            neighbors[v - 1].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Graph {
            vertex_count,
            edges,
            neighbors,
            input: 1,
            output: vertex_count,
        })
    }

    /// Replaces the designated input and output vertices.
    pub fn with_terminals(mut self, input: usize, output: usize) -> Result<Self> {
        for w in [input, output] {
            if w == 0 || w > self.vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "terminal {w} outside 1..={}",
                    self.vertex_count
                )));
            }
        }
        if self.vertex_count >= 2 && input == output {
            return Err(Error::InvalidGraph(
                "input and output vertices must differ".into(),
            ));
        }
        self.input = input;
        self.output = output;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn input_vertex(&self) -> usize {
        self.input
    }

    pub fn output_vertex(&self) -> usize {
        self.output
    }

    /// Sorted neighbours of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v - 1]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v - 1].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// The 0/1 adjacency matrix `A(G)`.
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.vertex_count;
        let mut a = DMatrix::zeros(n, n);
        for &(u, v) in &self.edges {
            a[(u - 1, v - 1)] = 1.0;
            a[(v - 1, u - 1)] = 1.0;
        }
        a
    }

    /// Breadth-first depth of every vertex from `root`; `None` when unreachable.
    pub fn bfs_depths(&self, root: usize) -> Vec<Option<usize>> {
        let mut depth = vec![None; self.vertex_count];
        let mut queue = VecDeque::new();
        depth[root - 1] = Some(0);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let du = depth[u - 1].unwrap_or(0);
            for &w in self.neighbors(u) {
                if depth[w - 1].is_none() {
                    depth[w - 1] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        depth
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_depths(1).iter().all(Option::is_some)
    }

    /// Renders the graph in the edge-list text format.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.vertex_count);
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out.push_str(&format!("input {}\noutput {}\n", self.input, self.output));
        out
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "graph with {} vertices, {} edges, input {}, output {}",
            self.vertex_count,
            self.edges.len(),
            self.input,
            self.output
        )
    }
}

/// Linear chain `1 - 2 - … - N` with input `1` and output `N`.
pub fn path_graph(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidSize("path needs at least one vertex".into()));
    }
    Graph::new(n, (1..n).map(|k| (k, k + 1)))
}

/// Cartesian product `G × H`, with `(g, h)` mapped to `(g - 1) * |V(H)| + h`.
///
/// Input and output are the pairs of the factors' inputs and outputs.
pub fn cartesian_product(g: &Graph, h: &Graph) -> Graph {
    let nh = h.vertex_count();
    let index = |gv: usize, hv: usize| (gv - 1) * nh + hv;
    let mut edges = Vec::with_capacity(g.vertex_count() * h.edge_count() + nh * g.edge_count());
    for gv in 1..=g.vertex_count() {
        for &(a, b) in h.edges() {
            edges.push((index(gv, a), index(gv, b)));
        }
    }
    for hv in 1..=nh {
        for &(a, b) in g.edges() {
            edges.push((index(a, hv), index(b, hv)));
        }
    }
    let input = index(g.input_vertex(), h.input_vertex());
    let output = index(g.output_vertex(), h.output_vertex());
    Graph::new(g.vertex_count() * nh, edges)
        .and_then(|p| p.with_terminals(input, output))
        .expect("product of valid graphs is a valid graph")
}

/// `d`-fold Cartesian power of the 2-vertex (`links = 1`) or 3-vertex
/// (`links = 2`) path, with input and output at the antipodes.
pub fn hypercube(d: usize, links: usize) -> Result<Graph> {
    if !(1..=2).contains(&links) {
        return Err(Error::UnsupportedLinks(links));
    }
    if d == 0 {
        return Err(Error::InvalidSize(
            "hypercube dimension must be at least 1".into(),
        ));
    }
    let base = path_graph(links + 1)?;
    let mut cube = base.clone();
    for _ in 1..d {
        cube = cartesian_product(&cube, &base);
    }
    Ok(cube)
}

/// Number of edges on a shortest path from `u` to `v`.
pub fn graph_distance(g: &Graph, u: usize, v: usize) -> Result<usize> {
    for w in [u, v] {
        if w == 0 || w > g.vertex_count() {
            return Err(Error::InvalidGraph(format!(
                "vertex {w} outside 1..={}",
                g.vertex_count()
            )));
        }
    }
    g.bfs_depths(u)[v - 1].ok_or(Error::Unreachable { from: u, to: v })
}

/// Partition of a graph's vertices into columns `G_1, …, G_N`, input first
/// and output last, with edges only between adjacent columns and the same
/// number of forward (and of backward) neighbours for every vertex of a
/// column. That is what keeps the column space invariant; members of the
/// column family additionally satisfy [`ColumnPartition::validate_family`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnPartition {
    columns: Vec<Vec<usize>>,
}

impl ColumnPartition {
    /// Columns in order; each column's vertices are sorted.
    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    /// Number of columns `N`.
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.columns.iter().map(Vec::len).collect()
    }

    /// Checks that the columns partition `g` as described on the type.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let column_of = self.column_index(g)?;
        let fail = |msg: String| Err(Error::NotInFamily(msg));
        for &(u, v) in g.edges() {
            let (cu, cv) = (column_of[u - 1], column_of[v - 1]);
            if cu == cv {
                return fail(format!("edge ({u}, {v}) lies within column {}", cu + 1));
            }
            if cu.abs_diff(cv) > 1 {
                return fail(format!(
                    "edge ({u}, {v}) skips from column {} to column {}",
                    cu.min(cv) + 1,
                    cu.max(cv) + 1
                ));
            }
        }
        let counts = self.neighbour_counts(g, &column_of);
        for (k, col) in self.columns.iter().enumerate() {
            let (f0, b0) = counts[col[0] - 1];
            for &v in &col[1..] {
                let (f, b) = counts[v - 1];
                if f != f0 {
                    return fail(format!(
                        "vertices {} and {v} in column {} have {f0} and {f} forward neighbours",
                        col[0],
                        k + 1
                    ));
                }
                if b != b0 {
                    return fail(format!(
                        "vertices {} and {v} in column {} have {b0} and {b} backward neighbours",
                        col[0],
                        k + 1
                    ));
                }
            }
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the column-family conditions:
    /// `|G_n| = C(N-1, n-1)`, `N - n` forward and `n - 1` backward neighbours
    /// for every vertex of column `n`.
    pub fn validate_family(&self, g: &Graph) -> Result<()> {
        self.validate(g)?;
        let fail = |msg: String| Err(Error::NotInFamily(msg));
        let n = self.columns.len();
        for (k, col) in self.columns.iter().enumerate() {
            let expected = binomial(n - 1, k);
            if expected != Some(col.len() as u128) {
                return fail(format!(
                    "column {} has {} vertices, expected C({}, {})",
                    k + 1,
                    col.len(),
                    n - 1,
                    k
                ));
            }
        }
        let column_of = self.column_index(g)?;
        let counts = self.neighbour_counts(g, &column_of);
        for (k, col) in self.columns.iter().enumerate() {
            let (forward, backward) = counts[col[0] - 1];
            if forward != n - 1 - k {
                return fail(format!(
                    "vertices in column {} have {forward} forward neighbours, expected {}",
                    k + 1,
                    n - 1 - k
                ));
            }
            if backward != k {
                return fail(format!(
                    "vertices in column {} have {backward} backward neighbours, expected {k}",
                    k + 1
                ));
            }
        }
        Ok(())
    }

    /// 0-based column of every vertex, after checking the partition and terminals.
    fn column_index(&self, g: &Graph) -> Result<Vec<usize>> {
        let fail = |msg: String| Err(Error::NotInFamily(msg));
        if self.columns.is_empty() {
            return fail("no columns".into());
        }
        let mut column_of = vec![usize::MAX; g.vertex_count()];
        for (k, col) in self.columns.iter().enumerate() {
            if col.is_empty() {
                return fail(format!("column {} is empty", k + 1));
            }
            for &v in col {
                if v == 0 || v > g.vertex_count() || column_of[v - 1] != usize::MAX {
                    return fail(format!(
                        "columns do not partition the vertex set (vertex {v})"
                    ));
                }
                column_of[v - 1] = k;
            }
        }
        if column_of.contains(&usize::MAX) {
            return fail("columns do not cover every vertex".into());
        }
        if self.columns[0] != [g.input_vertex()] {
            return fail(format!(
                "first column must be exactly the input vertex {}",
                g.input_vertex()
            ));
        }
        if self.columns[self.columns.len() - 1] != [g.output_vertex()] {
            return fail(format!(
                "last column must be exactly the output vertex {}",
                g.output_vertex()
            ));
        }
        Ok(column_of)
    }

    /// `(forward, backward)` neighbour counts of every vertex.
    fn neighbour_counts(&self, g: &Graph, column_of: &[usize]) -> Vec<(usize, usize)> {
        (1..=g.vertex_count())
            .map(|v| {
                let k = column_of[v - 1];
                let forward = g
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| column_of[w - 1] == k + 1)
                    .count();
                let backward = g
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| column_of[w - 1] + 1 == k)
                    .count();
                (forward, backward)
            })
            .collect()
    }
}

/// Splits `g` into BFS layers from its input vertex and returns them iff they
/// form a valid [`ColumnPartition`].
pub fn column_partition(g: &Graph) -> Result<ColumnPartition> {
    let depths = g.bfs_depths(g.input_vertex());
    if depths.iter().any(Option::is_none) {
        return Err(Error::NotInFamily("graph is not connected".into()));
    }
    let max_depth = depths.iter().flatten().copied().max().unwrap_or(0);
    let mut columns = vec![Vec::new(); max_depth + 1];
    for (i, d) in depths.iter().enumerate() {
        columns[d.unwrap_or(0)].push(i + 1);
    }
    let partition = ColumnPartition { columns };
    partition.validate(g)?;
    Ok(partition)
}

/// `C(n, k)`, or `None` on overflow.
pub(crate) fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Parses the edge-list text format.
///
/// ```text
/// # comment
/// 4
/// 1 2
/// 2 3
/// 3 4
/// input 1
/// output 4
/// ```
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut vertex_count = None;
    let mut edges = Vec::new();
    let mut input = None;
    let mut output = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let number = |tok: &str| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("expected a vertex index, found {tok:?}"),
            })
        };
        match (vertex_count, tokens.as_slice()) {
            (None, [n]) => vertex_count = Some(number(n)?),
            (None, _) => {
                return Err(Error::Parse {
                    line,
                    message: "first line must hold the vertex count".into(),
                })
            }
            (Some(_), ["input", v]) => input = Some(number(v)?),
            (Some(_), ["output", v]) => output = Some(number(v)?),
            (Some(_), [u, v]) => edges.push((number(u)?, number(v)?)),
            (Some(_), _) => {
                return Err(Error::Parse {
                    line,
                    message: format!("cannot parse {content:?}"),
                })
            }
        }
    }
    let n = vertex_count.ok_or(Error::Parse {
        line: 0,
        message: "missing vertex count".into(),
    })?;
    let g = Graph::new(n, edges)?;
    let (i, o) = (input.unwrap_or(1), output.unwrap_or(n));
    g.with_terminals(i, o)
}

/// Reads a graph from an edge-list file.
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}
