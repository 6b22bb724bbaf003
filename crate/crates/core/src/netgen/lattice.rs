use alloc::format;
use alloc::vec::Vec;

use super::distance::{DistanceKind, DistanceMatrix};
use super::weights::{Provenance, WeightsMatrix};
use crate::error::{param, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    /// Direct interaction only below Chebyshev distance `radius` (> 1);
    /// each node spreads `base` evenly over its cutoff ball.
    Cutoff { radius: f64, base: f64 },
    /// Raw weights `c0 · d^{−alpha}` (alpha > dim), then row-normalized.
    PowerDecay { c0: f64, alpha: f64 },
}

/// Nodes on the integer grid `{0, …, side−1}^dim`, numbered with the first
/// coordinate varying fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    pub dim: usize,
    pub side: usize,
    pub scheme: WeightScheme,
}

impl LatticeConfig {
    pub fn n(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn coordinates(&self, node: usize) -> Vec<usize> {
        let mut rest = node;
        (0..self.dim)
            .map(|_| {
                let c = rest % self.side;
                rest /= self.side;
                c
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.side < 2 {
            return Err(param(format!("lattice needs dim >= 1 and side >= 2, got {}/{}", self.dim, self.side)));
        }
        match self.scheme {
            WeightScheme::Cutoff { radius, base } => {
                if !(radius > 1.0) {
                    return Err(param(format!("cutoff radius must exceed 1, got {radius}")));
                }
                if !(base > 0.0) {
                    return Err(param(format!("cutoff base weight must be positive, got {base}")));
                }
            }
            WeightScheme::PowerDecay { c0, alpha } => {
                if !(alpha > self.dim as f64) {
                    return Err(param(format!("power decay needs alpha > dim = {}, got {alpha}", self.dim)));
                }
                if !(c0 > 0.0) {
                    return Err(param(format!("power decay constant must be positive, got {c0}")));
                }
            }
        }
        Ok(())
    }

    /// Raw (pre-normalization) weight at distance `d >= 1` under the power
    /// scheme.
    pub fn raw_power_weight(c0: f64, alpha: f64, d: u32) -> f64 {
        c0 * libm::pow(d as f64, -alpha)
    }
}

/// Lattice weights and Chebyshev distances.
pub fn gen_lattice(config: &LatticeConfig) -> Result<(WeightsMatrix, DistanceMatrix)> {
    config.validate()?;
    let n = config.n();
    let coords: Vec<Vec<usize>> = (0..n).map(|v| config.coordinates(v)).collect();
    let mut dist = Vec::with_capacity(n * n);
    for a in &coords {
        for b in &coords {
            let d = a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).max().unwrap_or(0);
            dist.push(d as u32);
        }
    }
    let distances = DistanceMatrix::from_raw(n, dist, DistanceKind::ChebyshevLattice);
    let mut provenance = Provenance::new("lattice").param("dim", config.dim).param("side", config.side);
    let weights = match config.scheme {
        WeightScheme::Cutoff { radius, base } => {
            provenance = provenance.param("scheme", "cutoff").param("radius", radius).param("base", base);
            let inside = |j: usize, i: usize| i != j && (distances.get(j, i).unwrap() as f64) < radius;
            if base == 1.0 {
                let raw = DenseMatrix::from_fn(n, n, |j, i| if inside(j, i) { 1.0 } else { 0.0 });
                WeightsMatrix::from_dense(raw, provenance)?.normalize()
            } else {
                let ball: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| inside(j, i)).count()).collect();
                let raw = DenseMatrix::from_fn(n, n, |j, i| if inside(j, i) { base / ball[j] as f64 } else { 0.0 });
                WeightsMatrix::from_dense(raw, provenance)?
            }
        }
        WeightScheme::PowerDecay { c0, alpha } => {
            provenance = provenance.param("scheme", "power").param("c0", c0).param("alpha", alpha);
            let raw = DenseMatrix::from_fn(n, n, |j, i| {
                if i == j {
                    0.0
                } else {
                    LatticeConfig::raw_power_weight(c0, alpha, distances.get(j, i).unwrap())
                }
            });
            WeightsMatrix::from_dense(raw, provenance)?.normalize()
        }
    };
    Ok((weights, distances))
}
