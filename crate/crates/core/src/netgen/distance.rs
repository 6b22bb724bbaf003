use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::graph::Graph;

/// Distance sentinel for disconnected pairs.
pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    Geodesic,
    ChebyshevLattice,
}

/// Symmetric integer distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
    kind: DistanceKind,
}

impl DistanceMatrix {
    pub(crate) fn from_raw(n: usize, data: Vec<u32>, kind: DistanceKind) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data, kind }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    /// `None` for disconnected pairs.
    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        let d = self.data[i * self.n + j];
        (d != UNREACHABLE).then_some(d)
    }

    pub fn raw(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }
}

/// Hop counts from breadth-first search out of every node.
pub fn geodesic_distances(g: &Graph) -> DistanceMatrix {
    let n = g.n();
    let adj = g.neighbors();
    let mut data = vec![UNREACHABLE; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let row = &mut data[s * n..(s + 1) * n];
        row[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            let next = row[v] + 1;
            for &u in &adj[v] {
                if row[u] == UNREACHABLE {
                    row[u] = next;
                    queue.push_back(u);
                }
            }
        }
    }
    DistanceMatrix::from_raw(n, data, DistanceKind::Geodesic)
}

/// `|{j : d_ij = ℓ}|` for `ℓ = 0, 1, …` up to the eccentricity of `i`.
pub fn shell_sizes(dist: &DistanceMatrix, i: usize) -> Vec<usize> {
    let mut shells: Vec<usize> = Vec::new();
    for j in 0..dist.n() {
        if let Some(d) = dist.get(i, j) {
            let d = d as usize;
            if shells.len() <= d {
                shells.resize(d + 1, 0);
            }
            shells[d] += 1;
        }
    }
    shells
}
