//! Functional dependence measures `δ_p(j, i) = ‖Y_j − Y_{j,i}‖_{L^p}`,
//! where `Y_{j,i}` recomputes outcome `j` after input `i` is replaced by an
//! independent copy.
//!
//! Row index `j` is the affected outcome, column index `i` the perturbed
//! input, so column sums are influence powers.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::linalg::DenseMatrix;
use crate::model::{draw_inputs, OutcomeModel};
use crate::rng::{stage, Streams};
use crate::sar::{compute_splus, NoiseModel, SPlusMatrix, SarSpec};
use crate::stats::Welford;

/// Largest `n` for which Monte Carlo estimation defaults to every entry.
pub const MC_FULL_LIMIT: usize = 200;

pub const MIN_COUPLING_REPS: usize = 100;

const EXPONENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaMode {
    AnalyticBound,
    Exact,
    MonteCarlo { reps: usize, seed: u64 },
}

impl DeltaMode {
    pub fn label(&self) -> &'static str {
        match self {
            DeltaMode::AnalyticBound => "bound",
            DeltaMode::Exact => "exact",
            DeltaMode::MonteCarlo { .. } => "mc",
        }
    }
}

/// An `n × n` matrix of dependence measures for one moment order `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMatrix {
    n: usize,
    p: f64,
    data: DenseMatrix,
    mode: DeltaMode,
    std_errors: Option<DenseMatrix>,
    /// Entries actually estimated; `None` means all of them. Entries outside
    /// the list are stored as zero.
    targets: Option<Vec<(usize, usize)>>,
}

impl DeltaMatrix {
    pub fn new(data: DenseMatrix, p: f64, mode: DeltaMode) -> Result<Self> {
        if !data.is_square() {
            return Err(Error::Shape(format!("delta matrix must be square, got {}x{}", data.rows(), data.cols())));
        }
        if !(p >= 1.0) {
            return Err(param(format!("moment order must be at least 1, got {p}")));
        }
        if let Some(v) = data.as_slice().iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Data(format!("delta entries must be finite and nonnegative, found {v}")));
        }
        Ok(Self { n: data.rows(), p, data, mode, std_errors: None, targets: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mode(&self) -> DeltaMode {
        self.mode
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.data[(j, i)]
    }

    pub fn std_error(&self, j: usize, i: usize) -> Option<f64> {
        self.std_errors.as_ref().map(|s| s[(j, i)])
    }

    pub fn std_errors(&self) -> Option<&DenseMatrix> {
        self.std_errors.as_ref()
    }

    pub fn targets(&self) -> Option<&[(usize, usize)]> {
        self.targets.as_deref()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.data
    }

    /// Influence powers `Σ_j δ(j, i)`.
    pub fn column_sums(&self) -> Vec<f64> {
        self.data.col_sums()
    }

    /// Entries that carry information: the target list, or every pair.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        match &self.targets {
            Some(t) => t.clone(),
            None => (0..self.n).flat_map(|j| (0..self.n).map(move |i| (j, i))).collect(),
        }
    }

    fn derived(&self, data: DenseMatrix, p: f64) -> Result<Self> {
        let mut out = DeltaMatrix::new(data, p, DeltaMode::AnalyticBound)?;
        out.targets = self.targets.clone();
        Ok(out)
    }

    fn same_shape(&self, other: &DeltaMatrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Shape(format!("delta matrices have sizes {} and {}", self.n, other.n)));
        }
        Ok(())
    }
}

/// Exact `δ(j, i) = |A_{ji}| ‖ε_i − ε_i*‖_{L^p}` for the linear process
/// `Y = Aε`.
pub fn delta_linear_exact(a: &DenseMatrix, noise: &NoiseModel, p: f64) -> Result<DeltaMatrix> {
    let norm = noise
        .coupled_diff_norm(p)
        .ok_or_else(|| Error::Capability(format!("no closed-form coupled L^{p} norm for {}", noise.name())))?;
    DeltaMatrix::new(a.map(|v| v.abs() * norm), p, DeltaMode::Exact)
}

/// The analytic bound `2 ‖ε‖_{L^p} S⁺`.
pub fn delta_sar_bound(spec: &SarSpec, p: f64) -> Result<DeltaMatrix> {
    let norm = noise_norm(spec.noise(), p)?;
    delta_from_splus(&compute_splus(spec)?, norm, p)
}

pub fn delta_from_splus(splus: &SPlusMatrix, noise_norm: f64, p: f64) -> Result<DeltaMatrix> {
    DeltaMatrix::new(splus.matrix.map(|v| 2.0 * noise_norm * v), p, DeltaMode::AnalyticBound)
}

pub(crate) fn noise_norm(noise: &NoiseModel, p: f64) -> Result<f64> {
    noise
        .norm_lp(p)
        .ok_or_else(|| Error::Capability(format!("no closed-form L^{p} norm for {}", noise.name())))
}

/// Draws coupled replications of a model: replication `r` takes its base
/// inputs from stream `(COUPLED_BASE, r)` and the copy of input `i` from
/// `(COUPLED_COPY, r, i)`, so every number is independent of the target set
/// and of scheduling.
pub struct CoupledSampler<'a, M: OutcomeModel + ?Sized> {
    model: &'a M,
    streams: Streams,
    targets: Vec<(usize, usize)>,
    /// Distinct perturbed inputs and, for each, the target slots it feeds.
    columns: Vec<(usize, Vec<(usize, usize)>)>,
}

impl<'a, M: OutcomeModel + ?Sized> CoupledSampler<'a, M> {
    pub fn new(model: &'a M, streams: Streams, targets: Option<&[(usize, usize)]>) -> Result<Self> {
        let (n_out, n_in) = (model.outputs(), model.inputs());
        let targets: Vec<(usize, usize)> = match targets {
            Some(t) => t.to_vec(),
            None if n_in <= MC_FULL_LIMIT => (0..n_out).flat_map(|j| (0..n_in).map(move |i| (j, i))).collect(),
            None => {
                return Err(param(format!("n = {n_in} exceeds {MC_FULL_LIMIT}; pass an explicit target list")));
            }
        };
        let mut by_column: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (slot, &(j, i)) in targets.iter().enumerate() {
            if j >= n_out || i >= n_in {
                return Err(param(format!("target ({}, {}) outside {n_out}x{n_in}", j + 1, i + 1)));
            }
            by_column.entry(i).or_default().push((slot, j));
        }
        Ok(Self { model, streams, targets, columns: by_column.into_iter().collect() })
    }

    pub fn targets(&self) -> &[(usize, usize)] {
        &self.targets
    }

    /// `|Y_j − Y_{j,i}|` for every target, in target order.
    pub fn replicate(&self, r: u64) -> Result<Vec<f64>> {
        let model = self.model;
        let width = model.input_width();
        let base = draw_inputs(model, &mut self.streams.rng(&[stage::COUPLED_BASE, r]));
        let mut y = vec![0.0; model.outputs()];
        model.evaluate(&base, &mut y)?;
        let mut diffs = vec![0.0; self.targets.len()];
        let mut copy = base.clone();
        let mut y_copy = vec![0.0; model.outputs()];
        for (i, slots) in &self.columns {
            let block = i * width..(i + 1) * width;
            let mut rng = self.streams.rng(&[stage::COUPLED_COPY, r, *i as u64]);
            model.draw_input(*i, &mut rng, &mut copy[block.clone()]);
            model.evaluate(&copy, &mut y_copy)?;
            for &(slot, j) in slots {
                diffs[slot] = (y[j] - y_copy[j]).abs();
            }
            copy[block.clone()].copy_from_slice(&base[block]);
        }
        Ok(diffs)
    }
}

/// Accumulates `|d|^p` per target across replications, in replication
/// order.
#[derive(Debug, Clone)]
pub struct MomentAccumulator {
    p: f64,
    moments: Vec<Welford>,
}

impl MomentAccumulator {
    pub fn new(p: f64, targets: usize) -> Self {
        Self { p, moments: vec![Welford::new(); targets] }
    }

    pub fn push(&mut self, diffs: &[f64]) {
        for (w, d) in self.moments.iter_mut().zip(diffs) {
            w.push(libm::pow(*d, self.p));
        }
    }

    /// Estimates `δ = (mean |d|^p)^{1/p}` with delta-method standard errors
    /// built on the jackknife standard error of the mean.
    pub fn finish(&self, n: usize, targets: &[(usize, usize)], mode: DeltaMode) -> Result<DeltaMatrix> {
        let mut data = DenseMatrix::zeros(n, n);
        let mut se = DenseMatrix::zeros(n, n);
        for (&(j, i), w) in targets.iter().zip(&self.moments) {
            let m = w.mean();
            let delta = libm::pow(m, 1.0 / self.p);
            data[(j, i)] = delta;
            se[(j, i)] = if m > 0.0 { delta / (self.p * m) * w.std_error() } else { 0.0 };
        }
        let mut out = DeltaMatrix::new(data, self.p, mode)?;
        out.std_errors = Some(se);
        let all = targets.len() == n * n;
        out.targets = if all { None } else { Some(targets.to_vec()) };
        Ok(out)
    }
}

/// Coupled Monte Carlo estimate of `δ_p(j, i)` over `reps` replications.
pub fn delta_monte_carlo<M: OutcomeModel + ?Sized>(
    model: &M,
    p: f64,
    reps: usize,
    streams: Streams,
    targets: Option<&[(usize, usize)]>,
) -> Result<DeltaMatrix> {
    check_mc(model, p, reps)?;
    let sampler = CoupledSampler::new(model, streams, targets)?;
    let mut acc = MomentAccumulator::new(p, sampler.targets().len());
    for r in 0..reps as u64 {
        acc.push(&sampler.replicate(r)?);
    }
    acc.finish(model.outputs(), sampler.targets(), DeltaMode::MonteCarlo { reps, seed: streams.master() })
}

pub fn check_mc<M: OutcomeModel + ?Sized>(model: &M, p: f64, reps: usize) -> Result<()> {
    if reps < MIN_COUPLING_REPS {
        return Err(param(format!("need at least {MIN_COUPLING_REPS} coupling replications, got {reps}")));
    }
    if !(p >= 1.0) {
        return Err(param(format!("moment order must be at least 1, got {p}")));
    }
    if model.outputs() != model.inputs() {
        return Err(Error::Shape("delta matrices need as many outcomes as inputs".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    /// `Δ_{p,q} = n^{−q} Σ_i (Σ_j δ(j, i))^q`.
    pub value: f64,
    pub q: f64,
    pub influence: Vec<f64>,
}

pub fn delta_aggregate(delta: &DeltaMatrix, q: f64) -> Result<Aggregate> {
    if !(q >= 1.0) {
        return Err(param(format!("aggregate order q must be at least 1, got {q}")));
    }
    let influence = delta.column_sums();
    let n = delta.n() as f64;
    let powered: Vec<f64> = influence.iter().map(|s| libm::pow(*s, q)).collect();
    let value = crate::stats::pairwise_sum(&powered) / libm::pow(n, q);
    Ok(Aggregate { value, q, influence })
}

/// Named moment bounds used by the transformation calculus.
///
/// Orders may be `f64::INFINITY` for sup-norms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MomentBook {
    norms: BTreeMap<(String, u64), f64>,
}

impl MomentBook {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `‖series‖_{L^order} ≤ value`.
    pub fn insert(&mut self, series: &str, order: f64, value: f64) -> Result<()> {
        if !(value > 0.0) || !value.is_finite() || !(order >= 1.0) {
            return Err(param(format!("moment bound for {series} at order {order} must be finite and positive, got {value}")));
        }
        self.norms.insert((series.to_string(), order.to_bits()), value);
        Ok(())
    }

    pub fn with(mut self, series: &str, order: f64, value: f64) -> Result<Self> {
        self.insert(series, order, value)?;
        Ok(self)
    }

    pub fn norm(&self, series: &str, order: f64) -> Result<f64> {
        self.norms
            .get(&(series.to_string(), order.to_bits()))
            .copied()
            .ok_or_else(|| Error::Capability(format!("no L^{order} bound recorded for {series}")))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, f64, f64)> + '_ {
        self.norms.iter().map(|((s, o), v)| (s.as_str(), f64::from_bits(*o), *v))
    }
}

fn entrywise(delta: &DeltaMatrix, p: f64, f: impl Fn(f64) -> f64) -> Result<DeltaMatrix> {
    delta.derived(delta.data.map(f), p)
}

/// Solves `1/p = 1/q + 1/r` for `r` (infinite when `q = p`).
pub fn holder_conjugate(p: f64, q: f64) -> Result<f64> {
    if !(q >= p) || !(p >= 1.0) {
        return Err(param(format!("need q >= p >= 1, got p={p}, q={q}")));
    }
    let inv = 1.0 / p - 1.0 / q;
    Ok(if inv <= EXPONENT_TOLERANCE { f64::INFINITY } else { 1.0 / inv })
}

fn check_holder(p: f64, q: f64, r: f64) -> Result<()> {
    let r_inv = if r.is_infinite() { 0.0 } else { 1.0 / r };
    if (1.0 / p - 1.0 / q - r_inv).abs() > EXPONENT_TOLERANCE {
        return Err(param(format!("exponents violate 1/p = 1/q + 1/r: p={p}, q={q}, r={r}")));
    }
    Ok(())
}

/// `|H(y) − H(y')| ≤ C|y − y'|` gives `δ^{(H(Y))} ≤ C δ^{(Y)}`.
pub fn fdm_lipschitz(delta_y: &DeltaMatrix, c: f64) -> Result<DeltaMatrix> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(param(format!("Lipschitz constant must be nonnegative, got {c}")));
    }
    entrywise(delta_y, delta_y.p, |v| c * v)
}

/// Growth of the local Lipschitz modulus:
/// `|H(y) − H(y')| ≤ C₁(|y|^a + |y'|^a + 1)|y − y'|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyGrowth {
    pub a: f64,
    pub c1: f64,
}

/// Hölder version: `δ^{(H(Y))}_p ≤ C₁(2‖Y‖^a_{L^{ar}} + 1) δ^{(Y)}_q` with
/// `1/p = 1/q + 1/r`, where `q` is the order of `delta_y`.
pub fn fdm_poly_lipschitz_holder(
    delta_y: &DeltaMatrix,
    book: &MomentBook,
    series: &str,
    growth: PolyGrowth,
    p: f64,
    r: f64,
) -> Result<DeltaMatrix> {
    check_holder(p, delta_y.p, r)?;
    if !(growth.a >= 0.0) || !(growth.c1 >= 0.0) {
        return Err(param("growth constants must be nonnegative"));
    }
    let norm = book.norm(series, growth.a * r)?;
    let factor = growth.c1 * (2.0 * libm::pow(norm, growth.a) + 1.0);
    entrywise(delta_y, p, |v| factor * v)
}

/// Exponent `(q − ap − p)/(pq − ap − p)` of the moment version.
pub fn poly_moment_exponent(a: f64, p: f64, q: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(param(format!("moment version needs p > 1, got {p}")));
    }
    let threshold = (a * p / (p - 1.0)).max(a * p + p);
    if !(q > threshold) {
        return Err(param(format!("q = {q} must exceed max(ap/(p-1), ap+p) = {threshold}")));
    }
    Ok((q - a * p - p) / (p * q - a * p - p))
}

/// Moment version: `δ^{(H(Y))}_p ≤ C₂ [δ^{(Y)}_p]^{(q−ap−p)/(pq−ap−p)}`, where
/// `‖Y‖_{L^q}` must be on record and `C₂` is supplied by the caller.
pub fn fdm_poly_lipschitz_moment(delta_y: &DeltaMatrix, book: &MomentBook, series: &str, a: f64, q: f64, c2: f64) -> Result<DeltaMatrix> {
    let p = delta_y.p;
    let exponent = poly_moment_exponent(a, p, q)?;
    book.norm(series, q)?;
    check_constant(c2)?;
    entrywise(delta_y, p, |v| c2 * libm::pow(v, exponent))
}

fn check_constant(c: f64) -> Result<()> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(param(format!("constants must be finite and nonnegative, got {c}")));
    }
    Ok(())
}

/// Scale `1 + (2C₁)^{1/p}` of the indicator bound.
pub fn indicator_constant(density_bound: f64, p: f64) -> f64 {
    1.0 + libm::pow(2.0 * density_bound, 1.0 / p)
}

/// `H(y) = 1(y > 0)` when each `Y_j` has density at most `C₁`:
/// `δ^{(H(Y))}_p ≤ (1 + (2C₁)^{1/p}) [δ^{(Y)}_p]^{1/(p+1)}`.
pub fn fdm_indicator(delta_y: &DeltaMatrix, density_bound: Option<f64>) -> Result<DeltaMatrix> {
    let c1 = density_bound.ok_or_else(|| Error::Capability("indicator bound needs a density bound".into()))?;
    check_constant(c1)?;
    let p = delta_y.p;
    let scale = indicator_constant(c1, p);
    entrywise(delta_y, p, |v| scale * libm::pow(v, 1.0 / (p + 1.0)))
}

/// Minkowski: `δ^{(Y+Z)} ≤ δ^{(Y)} + δ^{(Z)}`.
pub fn fdm_sum(delta_y: &DeltaMatrix, delta_z: &DeltaMatrix) -> Result<DeltaMatrix> {
    delta_y.same_shape(delta_z)?;
    if delta_y.p != delta_z.p {
        return Err(param(format!("orders differ: {} and {}", delta_y.p, delta_z.p)));
    }
    let data = DenseMatrix::from_fn(delta_y.n, delta_y.n, |j, i| delta_y.get(j, i) + delta_z.get(j, i));
    delta_y.derived(data, delta_y.p)
}

/// Hölder product bound
/// `δ^{(YZ)}_p ≤ ‖Z‖_{L^{r₁}} δ^{(Y)}_{q₁} + ‖Y‖_{L^{r₂}} δ^{(Z)}_{q₂}`, with
/// `r₁, r₂` implied by the orders of the inputs.
pub fn fdm_product_holder(
    delta_y: &DeltaMatrix,
    delta_z: &DeltaMatrix,
    book: &MomentBook,
    series: (&str, &str),
    p: f64,
) -> Result<DeltaMatrix> {
    delta_y.same_shape(delta_z)?;
    let r1 = holder_conjugate(p, delta_y.p)?;
    let r2 = holder_conjugate(p, delta_z.p)?;
    let z_norm = book.norm(series.1, r1)?;
    let y_norm = book.norm(series.0, r2)?;
    let data = DenseMatrix::from_fn(delta_y.n, delta_y.n, |j, i| z_norm * delta_y.get(j, i) + y_norm * delta_z.get(j, i));
    delta_y.derived(data, p)
}

/// Exponent `(q − 2p)/(pq − 2p)` of the moment product bound.
pub fn product_moment_exponent(p: f64, q: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(param(format!("moment version needs p > 1, got {p}")));
    }
    let threshold = (p / (p - 1.0)).max(2.0 * p);
    if !(q > threshold) {
        return Err(param(format!("q = {q} must exceed max(p/(p-1), 2p) = {threshold}")));
    }
    Ok((q - 2.0 * p) / (p * q - 2.0 * p))
}

/// Moment product bound
/// `δ^{(YZ)}_p ≤ C₁[δ^{(Y)}_p]^e + C₂[δ^{(Z)}_p]^e`, `e = (q−2p)/(pq−2p)`.
pub fn fdm_product_moment(
    delta_y: &DeltaMatrix,
    delta_z: &DeltaMatrix,
    book: &MomentBook,
    series: (&str, &str),
    q: f64,
    constants: (f64, f64),
) -> Result<DeltaMatrix> {
    delta_y.same_shape(delta_z)?;
    if delta_y.p != delta_z.p {
        return Err(param(format!("orders differ: {} and {}", delta_y.p, delta_z.p)));
    }
    let p = delta_y.p;
    let e = product_moment_exponent(p, q)?;
    book.norm(series.0, q)?;
    book.norm(series.1, q)?;
    check_constant(constants.0)?;
    check_constant(constants.1)?;
    let data = DenseMatrix::from_fn(delta_y.n, delta_y.n, |j, i| {
        constants.0 * libm::pow(delta_y.get(j, i), e) + constants.1 * libm::pow(delta_z.get(j, i), e)
    });
    delta_y.derived(data, p)
}

/// `sup_j ‖Y_j‖_{L^q}` for a Gaussian linear process `Y = m + Aε`, bounded
/// by Minkowski as `|m_j| + σ‖A_{j·}‖₂ (E|N(0,1)|^q)^{1/q}`.
pub fn gaussian_linear_norm(a: &DenseMatrix, mean: &[f64], sigma: f64, q: f64) -> f64 {
    let z = if q.is_infinite() { f64::INFINITY } else { libm::pow(crate::stats::normal_abs_moment(q), 1.0 / q) };
    (0..a.rows())
        .map(|j| {
            let s = libm::sqrt(a.row(j).iter().map(|v| v * v).sum::<f64>());
            mean[j].abs() + sigma * s * z
        })
        .fold(0.0, f64::max)
}
