use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::weights::Provenance;
use crate::error::{data, Result};

/// An undirected graph on nodes `0..n` with nonnegative edge weights.
///
/// Edges are stored once, as `(min, max)`; unweighted edges carry weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: BTreeMap<(usize, usize), f64>,
    provenance: Provenance,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self { n, edges: BTreeMap::new(), provenance: Provenance::new("graph") }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::new(n);
        for (a, b) in edges {
            g.add_edge(a, b, 1.0)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for a in 0..n {
            for b in a + 1..n {
                g.link(a, b);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Self::new(n);
        for a in 1..n {
            g.link(a - 1, a);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n > 2 {
            g.link(0, n - 1);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn key(a: usize, b: usize) -> (usize, usize) {
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Adds a new edge; self-loops, duplicates and negative weights are
    /// data errors.
    pub fn add_edge(&mut self, a: usize, b: usize, weight: f64) -> Result<()> {
        if a >= self.n || b >= self.n {
            return Err(data(format!("edge ({a}, {b}) outside a graph of {} nodes", self.n)));
        }
        if a == b {
            return Err(data(format!("self-loop at node {a}")));
        }
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(data(format!("edge ({a}, {b}) has invalid weight {weight}")));
        }
        if self.edges.insert(Self::key(a, b), weight).is_some() {
            return Err(data(format!("duplicate edge ({a}, {b})")));
        }
        Ok(())
    }

    /// Union insert of an unweighted link (generators OR their layers).
    pub(crate) fn link(&mut self, a: usize, b: usize) {
        debug_assert!(a != b && a < self.n && b < self.n);
        self.edges.insert(Self::key(a, b), 1.0);
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains_key(&Self::key(a, b))
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.edges.get(&Self::key(a, b)).copied()
    }

    /// Edges as `(a, b, weight)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_weighted(&self) -> bool {
        self.edges.values().any(|&w| w != 1.0)
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in self.edges.keys() {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(a, b) in self.edges.keys() {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.n as f64
    }
}
