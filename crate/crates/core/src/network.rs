//! Agent graph and combination matrix.
//!
//! Node indices are zero-based throughout the library. The reference
//! ten-node network is described in one-based labels in the docs of
//! [`reference_network`]; use [`HUB`] and [`LEAF`] for the two nodes
//! with contractual degrees.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row sums of a combination matrix must equal one within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Index of the reference network's hub (label 3, five neighbors).
pub const HUB: usize = 2;
/// Index of the reference network's leaf (label 9, one neighbor).
pub const LEAF: usize = 8;

/// Undirected graph given as neighbor sets, self-loops excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    adjacency: Vec<Vec<usize>>,
}

impl Topology {
    /// Builds a topology on `size` nodes from zero-based undirected edges.
    pub fn from_edges(size: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidNetwork("network has no nodes".into()));
        }
        let mut adjacency = vec![Vec::new(); size];
        for &(a, b) in edges {
            if a >= size || b >= size {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({a}, {b}) references a node outside 0..{size}"
                )));
            }
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for row in &mut adjacency {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Self { adjacency })
    }

    pub fn size(&self) -> usize {
        self.adjacency.len()
    }

    /// Neighbors of `k`, excluding `k` itself.
    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.adjacency[k]
    }

    /// `|N_k|`: neighbors of `k` counting `k` itself.
    pub fn closed_degree(&self, k: usize) -> usize {
        self.adjacency[k].len() + 1
    }

    pub fn is_connected(&self) -> bool {
        let n = self.size();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            for &l in &self.adjacency[k] {
                if !seen[l] {
                    seen[l] = true;
                    stack.push(l);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// The ten-node reference network.
///
/// Only two degrees are contractual: label 3 has five neighbors and label 9
/// has one. The remaining edges are a fixed, connected choice. Edges in
/// one-based labels:
///
/// ```text
/// 1-2 1-3 2-3 2-4 3-4 3-5 3-6 4-7 5-6 6-8 7-8 7-10 8-9 8-10
/// ```
pub fn reference_network() -> Topology {
    const EDGES: [(usize, usize); 14] = [
        (1, 2),
        (1, 3),
        (2, 3),
        (2, 4),
        (3, 4),
        (3, 5),
        (3, 6),
        (4, 7),
        (5, 6),
        (6, 8),
        (7, 8),
        (7, 10),
        (8, 9),
        (8, 10),
    ];
    let edges: Vec<(usize, usize)> = EDGES.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
    Topology::from_edges(10, &edges).expect("reference edge list is valid")
}

/// Network topology plus right-stochastic combination matrix `A`.
///
/// Invariants: nonnegative entries, unit row sums (within [`ROW_SUM_TOL`]),
/// `a_{kl} = 0` outside the closed neighborhood of `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    /// Closed neighborhoods `N_k`, sorted, each containing `k`.
    neighborhoods: Vec<Vec<usize>>,
    /// Row-major `S x S` matrix.
    weights: Vec<f64>,
}

impl NetworkSpec {
    /// Validates an explicit matrix against `topology`. Rows are never
    /// silently renormalized; see [`NetworkSpec::renormalized`].
    pub fn new(topology: &Topology, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let spec = Self::assemble(topology, matrix)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Like [`NetworkSpec::new`] but rescales every row to unit sum first.
    pub fn renormalized(topology: &Topology, mut matrix: Vec<Vec<f64>>) -> Result<Self> {
        for (k, row) in matrix.iter_mut().enumerate() {
            let total: f64 = row.iter().sum();
            if !(total > 0.0) {
                return Err(Error::InvalidNetwork(format!("row {k} has no positive mass")));
            }
            row.iter_mut().for_each(|w| *w /= total);
        }
        Self::new(topology, matrix)
    }

    fn assemble(topology: &Topology, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let size = topology.size();
        if matrix.len() != size || matrix.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidNetwork(format!("combination matrix must be {size}x{size}")));
        }
        let neighborhoods = (0..size)
            .map(|k| {
                let mut n: Vec<usize> = topology.neighbors(k).to_vec();
                n.push(k);
                n.sort_unstable();
                n
            })
            .collect();
        Ok(Self {
            neighborhoods,
            weights: matrix.into_iter().flatten().collect(),
        })
    }

    fn validate(&self) -> Result<()> {
        let size = self.size();
        for k in 0..size {
            let row = self.row(k);
            let mut total = 0.0;
            for (l, &w) in row.iter().enumerate() {
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::InvalidNetwork(format!("a[{k}][{l}] = {w} is not a nonnegative real")));
                }
                if w > 0.0 && self.neighborhoods[k].binary_search(&l).is_err() {
                    return Err(Error::InvalidNetwork(format!("a[{k}][{l}] = {w} but {l} is not a neighbor of {k}")));
                }
                total += w;
            }
            if (total - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidNetwork(format!("row {k} sums to {total}")));
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.neighborhoods.len()
    }

    /// Closed neighborhood `N_k` (includes `k`).
    pub fn neighborhood(&self, k: usize) -> &[usize] {
        &self.neighborhoods[k]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let s = self.size();
        &self.weights[k * s..(k + 1) * s]
    }

    pub fn weight(&self, k: usize, l: usize) -> f64 {
        self.weights[k * self.size() + l]
    }

    /// Self-combination weight `a_k = a_{kk}`.
    pub fn self_weight(&self, k: usize) -> f64 {
        self.weight(k, k)
    }

    /// `sum_{l != k} a_{kl}^2`.
    pub fn offdiag_square_sum(&self, k: usize) -> f64 {
        self.row(k).iter().enumerate().filter(|&(l, _)| l != k).map(|(_, w)| w * w).sum()
    }

    /// Per-node parameters for step size `mu`.
    pub fn node_params(&self, k: usize, mu: f64) -> Result<NodeParams> {
        if k >= self.size() {
            return Err(Error::InvalidArgument(format!("node {k} out of range")));
        }
        NodeParams::new(k, self.self_weight(k), mu, self.row(k))
    }
}

/// Builds the uniform-weight matrix: `a_k` on the diagonal and
/// `(1 - a_k) / (|N_k| - 1)` on every neighbor entry.
pub fn build_uniform_matrix(topology: &Topology, self_weights: &[f64]) -> Result<NetworkSpec> {
    let size = topology.size();
    if self_weights.len() != size {
        return Err(Error::InvalidNetwork(format!(
            "expected {size} self-weights, got {}",
            self_weights.len()
        )));
    }
    let mut matrix = vec![vec![0.0; size]; size];
    for (k, &a) in self_weights.iter().enumerate() {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidNetwork(format!("self-weight a_{k} = {a} outside (0, 1]")));
        }
        let neighbors = topology.neighbors(k);
        if neighbors.is_empty() && a < 1.0 {
            return Err(Error::InvalidNetwork(format!("node {k} is isolated but a_{k} = {a} < 1")));
        }
        matrix[k][k] = a;
        if !neighbors.is_empty() {
            let share = (1.0 - a) / neighbors.len() as f64;
            for &l in neighbors {
                matrix[k][l] = share;
            }
        }
    }
    NetworkSpec::new(topology, matrix)
}

/// Same self-weight `a` at every node.
pub fn build_uniform_matrix_with(topology: &Topology, a: f64) -> Result<NetworkSpec> {
    build_uniform_matrix(topology, &vec![a; topology.size()])
}

/// Quantities of node `k` that enter the explicit state recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeParams {
    pub k: usize,
    /// Self-combination weight `a_k`.
    pub a: f64,
    pub mu: f64,
    /// Memory factor `(1 - mu) a_k`.
    pub eta: f64,
    /// Off-diagonal weights of row `k` (`c_kk = 0`).
    pub c_row: Vec<f64>,
}

impl NodeParams {
    pub fn new(k: usize, a: f64, mu: f64, row: &[f64]) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::InvalidArgument(format!("step size mu = {mu} outside (0, 1)")));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidArgument(format!("self-weight a = {a} outside (0, 1]")));
        }
        let mut c_row = row.to_vec();
        if k < c_row.len() {
            c_row[k] = 0.0;
        }
        Ok(Self {
            k,
            a,
            mu,
            eta: (1.0 - mu) * a,
            c_row,
        })
    }

    /// Parameters of an isolated-from-topology node, used when only `a_k` and
    /// `mu` matter (the continuous component).
    pub fn standalone(a: f64, mu: f64) -> Result<Self> {
        Self::new(0, a, mu, &[])
    }

    /// Neighbors `l != k` with positive weight.
    pub fn active_neighbors(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.c_row.iter().copied().enumerate().filter(|&(_, c)| c > 0.0)
    }
}
