//! Random graph models: Erdős–Rényi, triangle-closure and stochastic block.
//!
//! Each model stage draws from its own keyed stream, so the ER layer of a
//! triangle graph is the very graph `gen_er` would return for that seed.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::graph::Graph;
use super::weights::Provenance;
use crate::error::{param, Result};
use crate::rng::{stage, StreamRng, Streams};

/// Number of failures before the next success of a Bernoulli(`p`) sequence.
/// Returns `None` when no success ever happens (`p == 0`).
fn geometric_skip(rng: &mut StreamRng, log_q: f64) -> Option<u64> {
    if log_q == 0.0 {
        return None;
    }
    if log_q == f64::NEG_INFINITY {
        return Some(0);
    }
    let u = 1.0 - rng.random::<f64>(); // (0, 1]
    let skip = libm::floor(libm::log(u) / log_q);
    if skip >= u64::MAX as f64 {
        None
    } else {
        Some(skip as u64)
    }
}

fn log_complement(p: f64) -> f64 {
    if p >= 1.0 {
        f64::NEG_INFINITY
    } else {
        libm::log1p(-p)
    }
}

fn choose3(n: u64) -> u64 {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

fn choose2(n: u64) -> u64 {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

/// Links every unordered pair independently with probability `p`, walking
/// the pairs `(0,1), (0,2), …, (n−2,n−1)` with geometric skips.
fn bernoulli_pairs(g: &mut Graph, p: f64, rng: &mut StreamRng) {
    let n = g.n();
    let log_q = log_complement(p);
    let (mut a, mut b) = (0usize, 0usize); // cursor sits *before* (a, b + 1)
    loop {
        let Some(mut skip) = geometric_skip(rng, log_q) else { return };
        loop {
            let remaining = (n - 1 - b) as u64;
            if skip < remaining {
                b += skip as usize + 1;
                break;
            }
            skip -= remaining;
            a += 1;
            if a + 1 >= n {
                return;
            }
            b = a;
        }
        g.link(a, b);
    }
}

fn check_degree(n: usize, mean_degree: f64) -> Result<()> {
    if n < 2 {
        return Err(param(format!("need at least 2 nodes, got {n}")));
    }
    if !(mean_degree >= 1.0 && mean_degree <= (n - 1) as f64) {
        return Err(param(format!("mean degree {mean_degree} outside [1, {}]", n - 1)));
    }
    Ok(())
}

/// Erdős–Rényi graph: each pair linked with probability `D / (n − 1)`.
pub fn gen_er(n: usize, mean_degree: f64, streams: Streams) -> Result<Graph> {
    check_degree(n, mean_degree)?;
    let provenance = Provenance::new("er").param("n", n).param("deg", mean_degree).seed(streams.master());
    let mut g = Graph::new(n).with_provenance(provenance);
    let mut rng = streams.rng(&[stage::ER]);
    bernoulli_pairs(&mut g, mean_degree / (n - 1) as f64, &mut rng);
    Ok(g)
}

/// Decodes a colex rank into the trio `a < b < c`.
fn unrank_trio(mut t: u64) -> (usize, usize, usize) {
    let mut c = libm::cbrt(6.0 * t as f64) as u64 + 2;
    while choose3(c) > t {
        c -= 1;
    }
    while choose3(c + 1) <= t {
        c += 1;
    }
    t -= choose3(c);
    let mut b = libm::sqrt(2.0 * t as f64) as u64 + 1;
    while choose2(b) > t {
        b -= 1;
    }
    while choose2(b + 1) <= t {
        b += 1;
    }
    t -= choose2(b);
    (t as usize, b as usize, c as usize)
}

/// Triangle model: every trio closes into a triangle with probability
/// `T / C(n, 3)`; the result is OR-ed with an independent ER(`n`, `D`)
/// layer.
pub fn gen_triangle(n: usize, triangles: f64, mean_degree: f64, streams: Streams) -> Result<Graph> {
    if n < 3 {
        return Err(param(format!("triangle model needs at least 3 nodes, got {n}")));
    }
    check_degree(n, mean_degree)?;
    let trios = choose3(n as u64);
    let p = triangles / trios as f64;
    if !(triangles >= 0.0) || p > 1.0 {
        return Err(param(format!("triangle probability {triangles}/C({n},3) outside [0, 1]")));
    }
    let mut g = gen_er(n, mean_degree, streams)?;
    let mut rng = streams.rng(&[stage::TRIANGLE]);
    let log_q = log_complement(p);
    let mut next: u64 = 0;
    while let Some(skip) = geometric_skip(&mut rng, log_q) {
        let Some(t) = next.checked_add(skip).filter(|&t| t < trios) else { break };
        let (a, b, c) = unrank_trio(t);
        g.link(a, b);
        g.link(a, c);
        g.link(b, c);
        next = t + 1;
    }
    let provenance = Provenance::new("triangle")
        .param("n", n)
        .param("triangles", triangles)
        .param("deg", mean_degree)
        .seed(streams.master());
    Ok(g.with_provenance(provenance))
}

#[derive(Debug, Clone)]
pub struct SbmGraph {
    pub graph: Graph,
    /// Block label of each node, in `0..blocks`.
    pub labels: Vec<usize>,
}

/// `round(√n / 2)`, at least 1.
pub fn sbm_auto_blocks(n: usize) -> usize {
    (libm::round(libm::sqrt(n as f64) / 2.0) as usize).max(1)
}

/// Stochastic block model with uniformly assigned labels.
///
/// Link probabilities use the expected block size `n / M`:
/// `p_w = D_wb / (n/M − 1)` within blocks, `p_b = D_bb / (n − n/M)` between.
pub fn gen_sbm(n: usize, blocks: usize, within_degree: f64, between_degree: f64, streams: Streams) -> Result<SbmGraph> {
    if blocks == 0 || n < 2 * blocks {
        return Err(param(format!("need n >= 2M >= 2, got n={n}, M={blocks}")));
    }
    let block_size = n as f64 / blocks as f64;
    let p_within = within_degree / (block_size - 1.0);
    let p_between = if blocks == 1 { 0.0 } else { between_degree / (n as f64 - block_size) };
    if !(0.0..=1.0).contains(&p_within) || !(0.0..=1.0).contains(&p_between) {
        return Err(param(format!(
            "infeasible link probabilities: within {p_within}, between {p_between}"
        )));
    }
    let mut rng = streams.rng(&[stage::SBM_LABELS]);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..blocks)).collect();
    let provenance = Provenance::new("sbm")
        .param("n", n)
        .param("blocks", blocks)
        .param("dwb", within_degree)
        .param("dbb", between_degree)
        .seed(streams.master());
    let mut graph = Graph::new(n).with_provenance(provenance);
    let mut rng = streams.rng(&[stage::SBM_EDGES]);
    for a in 0..n {
        for b in a + 1..n {
            let p = if labels[a] == labels[b] { p_within } else { p_between };
            if rng.random::<f64>() < p {
                graph.link(a, b);
            }
        }
    }
    Ok(SbmGraph { graph, labels })
}
