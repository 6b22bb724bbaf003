use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::graph::Graph;
use crate::error::{data, Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};

/// Matrices sparser than this are stored in CSR form.
pub const SPARSE_DENSITY: f64 = 0.05;

/// Row sums of a normalized matrix are 1 (or 0) within this tolerance.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Where a weights matrix came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub source: String,
    pub params: Vec<(String, String)>,
    pub seed: Option<u64>,
    /// Nodes whose row was all zeros at normalization time.
    pub isolated: Vec<usize>,
}

impl Provenance {
    pub fn new(source: impl Into<String>) -> Self {
        Self { source: source.into(), ..Self::default() }
    }

    pub fn param(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.source)?;
        for (k, (key, value)) in self.params.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{key}={value}")?;
        }
        write!(f, ")")?;
        if let Some(seed) = self.seed {
            write!(f, " seed={seed}")?;
        }
        if !self.isolated.is_empty() {
            write!(f, " isolated={}", self.isolated.len())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
}

/// A nonnegative `n × n` network weights matrix with zero diagonal.
///
/// Storage is picked by density; every accessor gives the same numbers
/// either way.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightsMatrix {
    n: usize,
    storage: Storage,
    normalized: bool,
    provenance: Provenance,
}

impl WeightsMatrix {
    pub fn from_dense(m: DenseMatrix, provenance: Provenance) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!("weights must be square, got {}x{}", m.rows(), m.cols())));
        }
        let n = m.rows();
        for i in 0..n {
            for (j, &v) in m.row(i).iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(data(format!("weight ({}, {}) = {v} is not a nonnegative number", i + 1, j + 1)));
                }
            }
            if m[(i, i)] != 0.0 {
                return Err(data(format!("nonzero diagonal weight at node {}", i + 1)));
            }
        }
        let storage = if m.density() < SPARSE_DENSITY {
            Storage::Sparse(CsrMatrix::from_dense(&m))
        } else {
            Storage::Dense(m)
        };
        Ok(Self { n, storage, normalized: false, provenance })
    }

    /// Raw (unnormalized) adjacency weights of a graph.
    pub fn from_graph(g: &Graph) -> Self {
        let n = g.n();
        let mut triplets = Vec::with_capacity(2 * g.edge_count());
        for (a, b, w) in g.edges() {
            triplets.push((a, b, w));
            triplets.push((b, a, w));
        }
        let csr = CsrMatrix::from_triplets(n, n, &triplets).expect("graph edges are in range");
        let density = if n == 0 { 0.0 } else { csr.nnz() as f64 / (n * n) as f64 };
        let storage = if density < SPARSE_DENSITY {
            Storage::Sparse(csr)
        } else {
            Storage::Dense(csr.to_dense())
        };
        Self { n, storage, normalized: false, provenance: g.provenance().clone() }
    }

    /// Divides every nonzero row by its sum. Zero rows stay zero and are
    /// recorded as isolated in the provenance.
    pub fn normalize(&self) -> Self {
        let sums = self.row_sums();
        let mut provenance = self.provenance.clone();
        provenance.isolated = sums.iter().enumerate().filter(|(_, &s)| s == 0.0).map(|(i, _)| i).collect();
        let scale = |i: usize, v: f64| if sums[i] > 0.0 { v / sums[i] } else { 0.0 };
        let storage = match &self.storage {
            Storage::Dense(m) => {
                let mut out = m.clone();
                for i in 0..self.n {
                    for v in out.row_mut(i) {
                        *v = scale(i, *v);
                    }
                }
                Storage::Dense(out)
            }
            Storage::Sparse(m) => {
                let triplets: Vec<(usize, usize, f64)> = (0..self.n)
                    .flat_map(|i| m.row(i).map(move |(j, v)| (i, j, v)))
                    .map(|(i, j, v)| (i, j, scale(i, v)))
                    .collect();
                Storage::Sparse(CsrMatrix::from_triplets(self.n, self.n, &triplets).expect("same shape"))
            }
        };
        Self { n: self.n, storage, normalized: true, provenance }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn isolated(&self) -> &[usize] {
        &self.provenance.isolated
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m[(j, i)],
            Storage::Sparse(m) => m.get(j, i),
        }
    }

    /// Nonzero `(column, weight)` pairs of row `j`.
    pub fn row_entries(&self, j: usize) -> Vec<(usize, f64)> {
        match &self.storage {
            Storage::Dense(m) => m.row(j).iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect(),
            Storage::Sparse(m) => m.row(j).collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.as_slice().iter().filter(|&&v| v != 0.0).count(),
            Storage::Sparse(m) => m.nnz(),
        }
    }

    pub fn density(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.nnz() as f64 / (self.n * self.n) as f64
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(m) => m.row_sums(),
            Storage::Sparse(m) => (0..self.n).map(|i| m.row(i).map(|(_, v)| v).sum()).collect(),
        }
    }

    /// `‖W‖_∞`, the maximum row sum.
    pub fn norm_inf(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.norm_inf(),
            Storage::Sparse(m) => m.norm_inf(),
        }
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.storage {
            Storage::Dense(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = crate::linalg::dot(m.row(i), x);
                }
            }
            Storage::Sparse(m) => m.mul_vec_into(x, out),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.storage {
            Storage::Dense(m) => CsrMatrix::from_dense(m),
            Storage::Sparse(m) => m.clone(),
        }
    }

    /// Checks the normalization invariant; used by tests and ingestion.
    pub fn check_normalized(&self) -> Result<()> {
        for (i, s) in self.row_sums().into_iter().enumerate() {
            if s != 0.0 && (s - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(data(format!("row {} sums to {s}", i + 1)));
            }
        }
        Ok(())
    }
}

/// Row-normalized adjacency of a graph, `w_ji = A_ji / Σ_k A_jk`.
pub fn row_normalize(g: &Graph) -> WeightsMatrix {
    WeightsMatrix::from_graph(g).normalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_normalizes_to_halves() {
        let w = row_normalize(&Graph::cycle(3));
        for j in 0..3 {
            for i in 0..3 {
                let expected = if i == j { 0.0 } else { 0.5 };
                assert_eq!(w.get(j, i), expected);
            }
        }
        assert!(w.is_normalized());
        w.check_normalized().unwrap();
    }

    #[test]
    fn zero_row_stays_zero_and_is_flagged() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        let w = row_normalize(&g);
        assert_eq!(w.isolated(), &[3]);
        assert_eq!(w.row_sums()[3], 0.0);
        assert_eq!(w.row_sums()[1], 1.0);
        assert!(w.norm_inf() <= 1.0);
    }

    #[test]
    fn weighted_star_center_row() {
        let mut g = Graph::new(4);
        g.add_edge(0, 1, 2.0).unwrap();
        g.add_edge(0, 2, 1.0).unwrap();
        g.add_edge(0, 3, 1.0).unwrap();
        let w = row_normalize(&g);
        assert_eq!(w.row_entries(0), alloc::vec![(1, 0.5), (2, 0.25), (3, 0.25)]);
        assert_eq!(w.get(1, 0), 1.0);
    }

    #[test]
    fn raw_matrix_validation() {
        let bad = DenseMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        assert!(matches!(WeightsMatrix::from_dense(bad, Provenance::new("m")), Err(Error::Data(_))));
        let diag = DenseMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(WeightsMatrix::from_dense(diag, Provenance::new("m")).is_err());
        let ok = DenseMatrix::from_rows(&[&[0.0, 3.0], &[1.0, 0.0]]).unwrap();
        let w = WeightsMatrix::from_dense(ok, Provenance::new("m")).unwrap().normalize();
        assert_eq!(w.get(0, 1), 1.0);
    }

    #[test]
    fn dense_and_sparse_storage_agree() {
        let g = Graph::complete(5);
        let dense = row_normalize(&g);
        assert!(!dense.is_sparse());
        let mut big = Graph::new(60);
        for a in 0..59 {
            big.link(a, a + 1);
        }
        let sparse = row_normalize(&big);
        assert!(sparse.is_sparse());
        let via_dense = WeightsMatrix::from_dense(sparse.to_dense(), Provenance::new("x")).unwrap();
        assert!(via_dense.is_sparse());
        assert_eq!(via_dense.to_dense(), sparse.to_dense());
        let x: Vec<f64> = (0..60).map(|v| v as f64).collect();
        let mut a = alloc::vec![0.0; 60];
        let mut b = alloc::vec![0.0; 60];
        sparse.mul_vec_into(&x, &mut a);
        let as_dense = sparse.to_dense();
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = crate::linalg::dot(as_dense.row(i), &x);
        }
        assert_eq!(a, b);
    }

    #[test]
    fn provenance_display() {
        let p = Provenance::new("er").param("n", 100).param("deg", 3).seed(7);
        assert_eq!(alloc::format!("{p}"), "er(n=100,deg=3) seed=7");
    }
}
