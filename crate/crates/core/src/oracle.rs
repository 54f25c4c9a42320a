//! Centralized ground truth: bucket-peeling coreness, the locality-theorem
//! verifier, and decomposition statistics.
//!
//! Every distributed run in this crate is validated against this module.

use std::io::{BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, NodeId};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("coreness map covers {have} nodes, graph has {want}")]
    CoverageMismatch { have: usize, want: usize },
    #[error("malformed coreness file at line {line}")]
    MalformedCorenessFile { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coreness value per node, indexed by internal node id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct CorenessMap {
    values: Vec<u32>,
}

impl CorenessMap {
    pub fn from_values(values: Vec<u32>) -> Self {
        CorenessMap { values }
    }

    pub fn get(&self, u: NodeId) -> u32 {
        self.values[u as usize]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn max_coreness(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(0)
    }
}

/// Exact coreness of every node by minimum-degree peeling with degree
/// buckets, O(N + M). Ties break toward the lowest node id.
pub fn coreness_exact(g: &Graph) -> CorenessMap {
    let n = g.node_count();
    if n == 0 {
        return CorenessMap { values: Vec::new() };
    }
    let mut degree: Vec<usize> = (0..n).map(|u| g.degree(u as NodeId)).collect();
    let max_degree = g.max_degree();

    // Counting sort by degree; within a degree class ids stay ascending.
    let mut bin = vec![0usize; max_degree + 1];
    for &d in &degree {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut pos = vec![0usize; n];
    let mut vert = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[degree[v]];
        vert[pos[v]] = v;
        bin[degree[v]] += 1;
    }
    for d in (1..=max_degree).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;

    for i in 0..n {
        let v = vert[i];
        for &u in g.neighbors(v as NodeId) {
            let u = u as usize;
            if degree[u] > degree[v] {
                let du = degree[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = vert[pw];
                if u != w {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                bin[du] += 1;
                degree[u] -= 1;
            }
        }
    }

    CorenessMap {
        values: degree.into_iter().map(|d| d as u32).collect(),
    }
}

/// Check the locality property of the decomposition: a node with coreness
/// `k` must have at least `k` neighbors with coreness >= `k` and at most `k`
/// neighbors with coreness >= `k + 1`. Returns the nodes violating either
/// condition (empty = ok).
pub fn verify_locality(g: &Graph, c: &CorenessMap) -> Result<Vec<NodeId>, OracleError> {
    if c.len() != g.node_count() {
        return Err(OracleError::CoverageMismatch {
            have: c.len(),
            want: g.node_count(),
        });
    }
    let mut violations = Vec::new();
    for u in g.nodes() {
        let k = c.get(u);
        let mut at_least_k = 0usize;
        let mut above_k = 0usize;
        for &v in g.neighbors(u) {
            let kv = c.get(v);
            if kv >= k {
                at_least_k += 1;
            }
            if kv > k {
                above_k += 1;
            }
        }
        if at_least_k < k as usize || above_k > k as usize {
            violations.push(u);
        }
    }
    Ok(violations)
}

/// Summary figures of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionStats {
    pub k_max: u32,
    pub k_avg: f64,
    pub delta_min: usize,
    pub delta_max: usize,
    /// Number of nodes attaining the minimum degree.
    pub min_degree_count: usize,
}

pub fn stats(g: &Graph, c: &CorenessMap) -> Result<DecompositionStats, OracleError> {
    if c.len() != g.node_count() {
        return Err(OracleError::CoverageMismatch {
            have: c.len(),
            want: g.node_count(),
        });
    }
    let n = g.node_count();
    let delta_min = g.min_degree();
    Ok(DecompositionStats {
        k_max: c.max_coreness(),
        k_avg: if n == 0 {
            0.0
        } else {
            c.values().iter().map(|&k| k as f64).sum::<f64>() / n as f64
        },
        delta_min,
        delta_max: g.max_degree(),
        min_degree_count: if n == 0 {
            0
        } else {
            g.nodes().filter(|&u| g.degree(u) == delta_min).count()
        },
    })
}

/// Write the coreness file format: a `#` header with N, M, k_max, then one
/// `node<TAB>coreness` line per node, sorted by node id.
pub fn write_coreness<W: Write>(
    g: &Graph,
    c: &CorenessMap,
    writer: &mut W,
) -> Result<(), OracleError> {
    if c.len() != g.node_count() {
        return Err(OracleError::CoverageMismatch {
            have: c.len(),
            want: g.node_count(),
        });
    }
    writeln!(
        writer,
        "# nodes {} edges {} k_max {}",
        g.node_count(),
        g.edge_count(),
        c.max_coreness()
    )?;
    for u in g.nodes() {
        writeln!(writer, "{u}\t{}", c.get(u))?;
    }
    Ok(())
}

/// Read a coreness file produced by [`write_coreness`]. Lines must be
/// sorted by node id starting at 0.
pub fn read_coreness<R: BufRead>(reader: R) -> Result<CorenessMap, OracleError> {
    let mut values = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let parsed = (|| {
            let u: usize = tokens.next()?.parse().ok()?;
            let k: u32 = tokens.next()?.parse().ok()?;
            (u == values.len() && tokens.next().is_none()).then_some(k)
        })();
        match parsed {
            Some(k) => values.push(k),
            None => return Err(OracleError::MalformedCorenessFile { line: idx + 1 }),
        }
    }
    Ok(CorenessMap { values })
}
