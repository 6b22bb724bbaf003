//! Functional dependence measures for network-dependent random variables.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every numeric piece
//! of the toolkit:
//!
//! * [`netgen`]: random graph generators (Erdős–Rényi, triangle, stochastic
//!   block, Euclidean lattices), row normalization, geodesic distances and
//!   fund common-ownership weights.
//! * [`sar`]: the (possibly nonlinear) spatial autoregressive process
//!   `Y = F(λWY + c + ε)` and its propagation envelope `S⁺ = L(I − L|λW|)⁻¹`.
//! * [`fdm`]: functional dependence measures `δ_p(j, i)` computed as analytic
//!   bounds, exact values for linear processes, or coupled Monte Carlo
//!   estimates, plus the aggregate `Δ_{p,q}` and the transformation calculus.
//! * [`limits`]: finite-n diagnostics for the moment inequality, law of large
//!   numbers, central limit theorem and concentration inequality.
//! * [`stats`]: normal CDF, Kolmogorov–Smirnov statistics and small helpers.
//!
//! Randomness flows exclusively through [`rng::Streams`], a keyed
//! counter-based generator, so every result is reproducible from a seed and
//! independent of how work is scheduled.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod fdm;
pub mod limits;
pub mod linalg;
pub mod model;
pub mod netgen;
pub mod rng;
pub mod sar;
pub mod stats;

pub use error::{Error, Result};
pub use rng::Streams;
