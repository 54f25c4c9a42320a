//! Undirected simple graphs: edge-list ingestion, serialization, and the
//! generator families used by the simulator tests.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type NodeId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: expected two whitespace-separated tokens, found {found}")]
    MalformedLine { line: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How input lines are interpreted by [`parse_edge_list`].
///
/// Both modes produce a simple undirected graph; `SymmetrizeDirected` makes
/// it explicit that each input line is an arc of a directed file and both
/// directions collapse onto one undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    Undirected,
    SymmetrizeDirected,
}

/// Immutable undirected simple graph with dense node ids in `[0, N)`.
///
/// Adjacency lists are sorted and free of self-loops and duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
    labels: Option<Vec<String>>,
}

impl Graph {
    /// Build a graph from an iterator of (possibly directed, possibly
    /// duplicated) node pairs. Self-loops are dropped, parallel edges collapse.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Graph {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u == v {
                continue;
            }
            debug_assert!((u as usize) < n && (v as usize) < n);
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        let mut edge_count = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Graph {
            adjacency,
            edge_count: edge_count / 2,
            labels: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u as usize].len()
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u as usize]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u as usize].binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        0..self.node_count() as NodeId
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Original external label of `u`, when the graph was parsed from a file
    /// with non-numeric ids.
    pub fn label(&self, u: NodeId) -> Option<&str> {
        self.labels.as_ref().map(|l| l[u as usize].as_str())
    }

    /// Full-scan structural check: symmetry, sortedness, no self-loops or
    /// duplicates, degree sum. Used by tests.
    pub fn validate(&self) -> Result<(), String> {
        let mut degree_sum = 0usize;
        for u in self.nodes() {
            let list = self.neighbors(u);
            degree_sum += list.len();
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("adjacency of {u} not strictly sorted"));
                }
            }
            for &v in list {
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if (v as usize) >= self.node_count() {
                    return Err(format!("neighbor {v} of {u} out of range"));
                }
                if !self.has_edge(v, u) {
                    return Err(format!("edge {u}-{v} not symmetric"));
                }
            }
        }
        if degree_sum != 2 * self.edge_count {
            return Err(format!(
                "degree sum {degree_sum} != 2*m = {}",
                2 * self.edge_count
            ));
        }
        Ok(())
    }
}

/// Parse a SNAP-style edge list: one edge (or arc) per line, two
/// whitespace-separated node tokens, `#` comment lines.
///
/// External ids may be arbitrary strings and are mapped to dense internal
/// ids. When every token is a decimal integer, internal ids follow the
/// numeric order of the external ids, so a file written with internal ids
/// re-parses to the identical graph; otherwise ids are assigned in
/// first-appearance order. `min_nodes` pads the id space so isolated nodes
/// beyond the highest mentioned id can be represented.
pub fn parse_edge_list<R: BufRead>(
    reader: R,
    _mode: ParseMode,
    min_nodes: Option<usize>,
) -> Result<Graph, GraphError> {
    let mut intern: HashMap<String, NodeId> = HashMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut arcs: Vec<(NodeId, NodeId)> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let a = tokens.next();
        let b = tokens.next();
        let extra = tokens.count();
        let (a, b) = match (a, b, extra) {
            (Some(a), Some(b), 0) => (a, b),
            (a, b, extra) => {
                let found = a.is_some() as usize + b.is_some() as usize + extra;
                return Err(GraphError::MalformedLine {
                    line: idx + 1,
                    found,
                });
            }
        };
        let mut id_of = |tok: &str| -> NodeId {
            *intern.entry(tok.to_string()).or_insert_with(|| {
                order.push(tok.to_string());
                (order.len() - 1) as NodeId
            })
        };
        let u = id_of(a);
        let v = id_of(b);
        arcs.push((u, v));
    }

    // Numeric files keep their numeric order, so writer output round-trips
    // onto identical internal ids.
    let numeric: Option<Vec<u64>> = order.iter().map(|s| s.parse::<u64>().ok()).collect();
    let remap: Option<Vec<NodeId>> = numeric.map(|values| {
        let mut ranked: Vec<usize> = (0..values.len()).collect();
        ranked.sort_unstable_by_key(|&i| values[i]);
        let mut remap = vec![0 as NodeId; values.len()];
        for (rank, &i) in ranked.iter().enumerate() {
            remap[i] = rank as NodeId;
        }
        remap
    });
    if let Some(remap) = &remap {
        for arc in &mut arcs {
            arc.0 = remap[arc.0 as usize];
            arc.1 = remap[arc.1 as usize];
        }
    }

    let n = order.len().max(min_nodes.unwrap_or(0));
    let mut graph = Graph::from_edges(n, arcs);

    let mut labels = vec![String::new(); n];
    for (i, lab) in order.iter().enumerate() {
        let internal = remap.as_ref().map_or(i as NodeId, |r| r[i]);
        labels[internal as usize] = lab.clone();
    }
    for (i, lab) in labels.iter_mut().enumerate() {
        if lab.is_empty() {
            *lab = i.to_string();
        }
    }
    if labels.iter().enumerate().any(|(i, l)| *l != i.to_string()) {
        graph.labels = Some(labels);
    }
    Ok(graph)
}

/// Write the canonical on-disk form: one `u<TAB>v` line per edge with
/// `u < v`, sorted by `(u, v)`. With `original_labels`, external labels are
/// emitted instead of internal ids.
pub fn write_edge_list<W: Write>(
    graph: &Graph,
    writer: &mut W,
    original_labels: bool,
) -> std::io::Result<()> {
    for u in graph.nodes() {
        for &v in graph.neighbors(u) {
            if v > u {
                if original_labels && graph.labels.is_some() {
                    writeln!(
                        writer,
                        "{}\t{}",
                        graph.label(u).unwrap(),
                        graph.label(v).unwrap()
                    )?;
                } else {
                    writeln!(writer, "{u}\t{v}")?;
                }
            }
        }
    }
    Ok(())
}

/// Build the family of graphs whose convergence time grows linearly in `n`
/// while the diameter stays constant. Using 1-based node names: node `n` is
/// adjacent to every other node except `n-3`, each node `i <= n-2` is
/// adjacent to `i+1`, and `n-3` is adjacent to `n-1`. Ids are shifted to
/// `[0, n)`.
pub fn gen_worst_case(n: usize) -> Result<Graph, GraphError> {
    if n < 5 {
        return Err(GraphError::InvalidParameter(format!(
            "worst-case family needs n >= 5, got {n}"
        )));
    }
    let hub = (n - 1) as NodeId;
    let skipped = (n - 4) as NodeId; // node n-3, shifted
    let mut edges = Vec::new();
    for v in 0..hub {
        if v != skipped {
            edges.push((hub, v));
        }
    }
    for i in 0..(n - 2) as NodeId {
        edges.push((i, i + 1));
    }
    edges.push((skipped, (n - 2) as NodeId));
    Ok(Graph::from_edges(n, edges))
}

/// Path graph `0 - 1 - ... - (n-1)`.
pub fn gen_chain(n: usize) -> Result<Graph, GraphError> {
    if n < 1 {
        return Err(GraphError::InvalidParameter(
            "chain needs n >= 1".to_string(),
        ));
    }
    Ok(Graph::from_edges(
        n,
        (0..(n - 1) as NodeId).map(|i| (i, i + 1)),
    ))
}

/// Erdős–Rényi `G(n, p)` drawn with a ChaCha8 stream seeded from `seed`,
/// scanning pairs `(u, v)` with `u < v` in lexicographic order. The same
/// `(n, p, seed)` yields the identical edge set on every platform.
pub fn gen_random(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidParameter(format!(
            "edge probability must be in [0, 1], got {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        for v in (u + 1)..n as NodeId {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::from_edges(n, edges))
}

#[cfg(test)]
pub(crate) use tests::example_graph;
