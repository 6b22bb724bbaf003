//! The spatial autoregressive process `Y = F(λWY + c + ε)` and its
//! propagation envelope `S⁺ = L(I − L|λ||W|)⁻¹`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::error::{param, Error, Result};
use crate::linalg::{neumann_series, neumann_terms, CsrMatrix, DenseMatrix, Lu};
use crate::netgen::WeightsMatrix;
use crate::rng::{stage, StreamRng, Streams};
use crate::stats::normal_abs_moment;

/// Truncation target for Neumann-series envelopes and fixed-point solves.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Largest dimension solved by dense LU.
pub const DIRECT_LIMIT: usize = 2000;

pub const MAX_ITERATIONS: usize = 1_000_000;

const LIPSCHITZ_PROBES: usize = 10_000;

type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum LinkFunction {
    Identity,
    /// `max(0, x)`.
    Tobit,
    Custom { name: String, lipschitz: f64, map: ScalarMap },
}

impl LinkFunction {
    /// A user link with a certified Lipschitz constant. The certificate is
    /// spot-checked on random pairs before it is accepted.
    pub fn custom(name: impl Into<String>, lipschitz: f64, map: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(lipschitz > 0.0) || !lipschitz.is_finite() {
            return Err(param(format!("Lipschitz constant must be positive, got {lipschitz}")));
        }
        let map: ScalarMap = Arc::new(map);
        let mut rng = Streams::new(0).rng(&[stage::LIPSCHITZ_PROBE]);
        for k in 0..LIPSCHITZ_PROBES {
            let scale = [0.01, 1.0, 100.0][k % 3];
            let x: f64 = scale * rng.sample::<f64, _>(StandardNormal);
            let y = if k % 2 == 0 { x + scale * 1e-3 * rng.sample::<f64, _>(StandardNormal) } else { scale * rng.sample::<f64, _>(StandardNormal) };
            let (fx, fy) = (map(x), map(y));
            if !fx.is_finite() || (fx - fy).abs() > lipschitz * (x - y).abs() * (1.0 + 1e-9) + 1e-12 {
                return Err(param(format!("link is not {lipschitz}-Lipschitz near x={x}, y={y}")));
            }
        }
        Ok(LinkFunction::Custom { name: name.into(), lipschitz, map })
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            LinkFunction::Identity | LinkFunction::Tobit => 1.0,
            LinkFunction::Custom { lipschitz, .. } => *lipschitz,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LinkFunction::Identity => x,
            LinkFunction::Tobit => x.max(0.0),
            LinkFunction::Custom { map, .. } => map(x),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            LinkFunction::Identity => "identity",
            LinkFunction::Tobit => "tobit",
            LinkFunction::Custom { name, .. } => name,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, LinkFunction::Identity)
    }
}

impl fmt::Debug for LinkFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinkFunction({}, L={})", self.name(), self.lipschitz())
    }
}

/// Distribution of the idiosyncratic shocks, drawn independently per node.
#[derive(Clone)]
pub enum NoiseModel {
    Gaussian { sigma: f64 },
    Uniform { low: f64, high: f64 },
    StudentT { dof: f64, scale: f64 },
    /// Inverse-CDF sampling; no closed-form moments.
    Quantile { name: String, map: ScalarMap },
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(param(format!("sigma must be positive, got {sigma}")));
        }
        Ok(NoiseModel::Gaussian { sigma })
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        if !(low < high) || !low.is_finite() || !high.is_finite() {
            return Err(param(format!("uniform noise needs low < high, got [{low}, {high}]")));
        }
        Ok(NoiseModel::Uniform { low, high })
    }

    pub fn student_t(dof: f64, scale: f64) -> Result<Self> {
        if !(dof > 4.0) || !(scale > 0.0) {
            return Err(param(format!("student-t noise needs dof > 4 and scale > 0, got dof={dof}, scale={scale}")));
        }
        Ok(NoiseModel::StudentT { dof, scale })
    }

    pub fn quantile(name: impl Into<String>, map: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        NoiseModel::Quantile { name: name.into(), map: Arc::new(map) }
    }

    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        match self {
            NoiseModel::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            NoiseModel::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            NoiseModel::StudentT { dof, scale } => {
                scale * StudentT::new(*dof).expect("validated dof").sample(rng)
            }
            NoiseModel::Quantile { map, .. } => {
                let u = ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
                map(u)
            }
        }
    }

    pub fn fill(&self, rng: &mut StreamRng, out: &mut [f64]) {
        for v in out {
            *v = self.sample(rng);
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match self {
            NoiseModel::Gaussian { .. } | NoiseModel::StudentT { .. } => Some(0.0),
            NoiseModel::Uniform { low, high } => Some(0.5 * (low + high)),
            NoiseModel::Quantile { .. } => None,
        }
    }

    pub fn variance(&self) -> Option<f64> {
        match self {
            NoiseModel::Gaussian { sigma } => Some(sigma * sigma),
            NoiseModel::Uniform { low, high } => Some((high - low) * (high - low) / 12.0),
            NoiseModel::StudentT { dof, scale } => Some(scale * scale * dof / (dof - 2.0)),
            NoiseModel::Quantile { .. } => None,
        }
    }

    /// `‖ε‖_{L^p}`, when finite and known in closed form.
    pub fn norm_lp(&self, p: f64) -> Option<f64> {
        if !(p >= 1.0) {
            return None;
        }
        match self {
            NoiseModel::Gaussian { sigma } => Some(sigma * libm::pow(normal_abs_moment(p), 1.0 / p)),
            NoiseModel::Uniform { low, high } => {
                let antiderivative = |x: f64| x.signum() * libm::pow(x.abs(), p + 1.0) / (p + 1.0);
                let moment = (antiderivative(*high) - antiderivative(*low)) / (high - low);
                Some(libm::pow(moment, 1.0 / p))
            }
            NoiseModel::StudentT { dof, scale } => {
                if p >= *dof {
                    return None;
                }
                let moment = libm::pow(*dof, p / 2.0) * libm::tgamma((p + 1.0) / 2.0) * libm::tgamma((dof - p) / 2.0)
                    / (libm::sqrt(core::f64::consts::PI) * libm::tgamma(dof / 2.0));
                Some(scale * libm::pow(moment, 1.0 / p))
            }
            NoiseModel::Quantile { .. } => None,
        }
    }

    /// `‖ε − ε*‖_{L^p}` for an independent copy `ε*`, when known in closed
    /// form.
    pub fn coupled_diff_norm(&self, p: f64) -> Option<f64> {
        if !(p >= 1.0) {
            return None;
        }
        match self {
            NoiseModel::Gaussian { sigma } => {
                Some(core::f64::consts::SQRT_2 * sigma * libm::pow(normal_abs_moment(p), 1.0 / p))
            }
            NoiseModel::Uniform { low, high } => {
                // The difference is triangular on [−w, w].
                let w = high - low;
                Some(w * libm::pow(2.0 / ((p + 1.0) * (p + 2.0)), 1.0 / p))
            }
            NoiseModel::StudentT { .. } | NoiseModel::Quantile { .. } => None,
        }
    }

    /// Growth order `ν` of `p ↦ ‖ε‖_{L^p}`: 1/2 for Gaussian, 0 for bounded
    /// noise.
    pub fn moment_growth(&self) -> Option<f64> {
        match self {
            NoiseModel::Gaussian { .. } => Some(0.5),
            NoiseModel::Uniform { .. } => Some(0.0),
            NoiseModel::StudentT { .. } | NoiseModel::Quantile { .. } => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            NoiseModel::Gaussian { sigma } => format!("gaussian(sigma={sigma})"),
            NoiseModel::Uniform { low, high } => format!("uniform({low},{high})"),
            NoiseModel::StudentT { dof, scale } => format!("student-t(dof={dof},scale={scale})"),
            NoiseModel::Quantile { name, .. } => format!("quantile({name})"),
        }
    }
}

impl fmt::Debug for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NoiseModel({})", self.name())
    }
}

/// A fully specified SAR data-generating process for a fixed design.
#[derive(Debug, Clone)]
pub struct SarSpec {
    weights: Arc<WeightsMatrix>,
    link: LinkFunction,
    lambda: f64,
    covariate: Vec<f64>,
    noise: NoiseModel,
    zeta: f64,
}

impl SarSpec {
    pub fn new(
        weights: impl Into<Arc<WeightsMatrix>>,
        link: LinkFunction,
        lambda: f64,
        covariate: Vec<f64>,
        noise: NoiseModel,
    ) -> Result<Self> {
        let weights = weights.into();
        if covariate.len() != weights.n() {
            return Err(Error::Shape(format!("covariate has length {}, network has {} nodes", covariate.len(), weights.n())));
        }
        if !lambda.is_finite() {
            return Err(param("lambda must be finite"));
        }
        let zeta = link.lipschitz() * lambda.abs() * weights.norm_inf();
        if !(zeta < 1.0) {
            return Err(param(format!("contraction coefficient zeta = {zeta} must be below 1")));
        }
        Ok(Self { weights, link, lambda, covariate, noise, zeta })
    }

    /// Convenience constructor with `c = 0`.
    pub fn centered(weights: impl Into<Arc<WeightsMatrix>>, link: LinkFunction, lambda: f64, noise: NoiseModel) -> Result<Self> {
        let weights = weights.into();
        let n = weights.n();
        Self::new(weights, link, lambda, vec![0.0; n], noise)
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn weights(&self) -> &WeightsMatrix {
        &self.weights
    }

    pub fn shared_weights(&self) -> Arc<WeightsMatrix> {
        self.weights.clone()
    }

    pub fn link(&self) -> &LinkFunction {
        &self.link
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn covariate(&self) -> &[f64] {
        &self.covariate
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// `L |λ| ‖W‖_∞`.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn with_noise(&self, noise: NoiseModel) -> Self {
        Self { noise, ..self.clone() }
    }

    pub fn with_link(&self, link: LinkFunction) -> Result<Self> {
        Self::new(self.weights.clone(), link, self.lambda, self.covariate.clone(), self.noise.clone())
    }

    /// `(I − λW)`, the system matrix of the identity-link model.
    pub fn system_matrix(&self) -> DenseMatrix {
        let w = self.weights.to_dense();
        DenseMatrix::from_fn(self.n(), self.n(), |j, i| (j == i) as u8 as f64 - self.lambda * w[(j, i)])
    }

    /// Draws one noise vector from `rng`.
    pub fn draw_noise(&self, rng: &mut StreamRng) -> Vec<f64> {
        let mut eps = vec![0.0; self.n()];
        self.noise.fill(rng, &mut eps);
        eps
    }
}

/// Fixed-point iterates and their step norms `‖Y⁽ᵏ⁺¹⁾ − Y⁽ᵏ⁾‖_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointTrace {
    pub solution: Vec<f64>,
    pub steps: Vec<f64>,
}

/// Reusable solver for one specification; the identity link keeps an LU
/// factorization of `I − λW`.
#[derive(Debug, Clone)]
pub struct SarSolver {
    spec: SarSpec,
    lu: Option<Lu>,
}

impl SarSolver {
    pub fn new(spec: &SarSpec) -> Result<Self> {
        let lu = if spec.link.is_identity() && spec.n() <= DIRECT_LIMIT && spec.lambda != 0.0 {
            Some(Lu::factor(&spec.system_matrix())?)
        } else {
            None
        };
        Ok(Self { spec: spec.clone(), lu })
    }

    pub fn spec(&self) -> &SarSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    /// The outcome vector for noise `eps`.
    pub fn solve(&self, eps: &[f64]) -> Result<Vec<f64>> {
        self.check_len(eps)?;
        if self.spec.link.is_identity() && self.spec.lambda == 0.0 {
            return Ok(self.spec.covariate.iter().zip(eps).map(|(c, e)| c + e).collect());
        }
        match &self.lu {
            Some(lu) => {
                let rhs: Vec<f64> = self.spec.covariate.iter().zip(eps).map(|(c, e)| c + e).collect();
                Ok(lu.solve(&rhs))
            }
            None => self.fixed_point(eps, false).map(|t| t.solution),
        }
    }

    /// Fixed-point iteration from `Y⁽⁰⁾ = F(c + ε)`, recording each step.
    pub fn solve_traced(&self, eps: &[f64]) -> Result<FixedPointTrace> {
        self.check_len(eps)?;
        self.fixed_point(eps, true)
    }

    fn check_len(&self, eps: &[f64]) -> Result<()> {
        if eps.len() != self.n() {
            return Err(Error::Shape(format!("noise has length {}, expected {}", eps.len(), self.n())));
        }
        Ok(())
    }

    fn fixed_point(&self, eps: &[f64], keep_trace: bool) -> Result<FixedPointTrace> {
        let spec = &self.spec;
        let n = spec.n();
        let base: Vec<f64> = spec.covariate.iter().zip(eps).map(|(c, e)| c + e).collect();
        let mut y: Vec<f64> = base.iter().map(|&x| spec.link.eval(x)).collect();
        let mut steps = Vec::new();
        if spec.zeta == 0.0 {
            return Ok(FixedPointTrace { solution: y, steps });
        }
        let tol = SOLVE_TOLERANCE * (1.0 - spec.zeta) / spec.zeta;
        let mut wy = vec![0.0; n];
        let mut last_step = f64::INFINITY;
        for _ in 0..MAX_ITERATIONS {
            spec.weights.mul_vec_into(&y, &mut wy);
            let mut step: f64 = 0.0;
            for k in 0..n {
                let next = spec.link.eval(spec.lambda * wy[k] + base[k]);
                step = step.max((next - y[k]).abs());
                y[k] = next;
            }
            if keep_trace {
                steps.push(step);
            }
            last_step = step;
            if step <= tol {
                return Ok(FixedPointTrace { solution: y, steps });
            }
        }
        Err(Error::Convergence { iterations: MAX_ITERATIONS, last_step })
    }
}

/// One outcome vector for `spec` and `eps`.
pub fn solve_sar(spec: &SarSpec, eps: &[f64]) -> Result<Vec<f64>> {
    SarSolver::new(spec)?.solve(eps)
}

/// Noise stream of replication `r`.
pub fn replication_rng(streams: &Streams, r: u64) -> StreamRng {
    streams.rng(&[stage::NOISE, r])
}

/// `R` independent outcome vectors; replication `r` always draws from the
/// same keyed stream, whatever else is computed.
pub fn simulate_replications(spec: &SarSpec, reps: usize, streams: Streams) -> Result<Vec<Vec<f64>>> {
    if reps == 0 {
        return Err(param("need at least one replication"));
    }
    let solver = SarSolver::new(spec)?;
    (0..reps as u64)
        .map(|r| solver.solve(&spec.draw_noise(&mut replication_rng(&streams, r))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SPlusMethod {
    Direct,
    Neumann { terms: usize, truncation_bound: f64 },
}

/// How to evaluate `S⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SPlusStrategy {
    /// Neumann series for sparse `W` or `n` above [`DIRECT_LIMIT`], LU
    /// otherwise.
    #[default]
    Auto,
    Direct,
    Neumann,
}

/// The entrywise envelope `S⁺ = L(I − L|λ||W|)⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct SPlusMatrix {
    pub matrix: DenseMatrix,
    pub zeta: f64,
    pub lipschitz: f64,
    pub method: SPlusMethod,
}

impl SPlusMatrix {
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.matrix[(j, i)]
    }

    /// Influence powers `Σ_j S⁺_{ji}`.
    pub fn column_sums(&self) -> Vec<f64> {
        self.matrix.col_sums()
    }
}

pub fn compute_splus(spec: &SarSpec) -> Result<SPlusMatrix> {
    splus(spec.weights(), spec.link.lipschitz(), spec.lambda, SPlusStrategy::Auto)
}

/// `S⁺` for weights `w`, Lipschitz constant `lipschitz` and `λ`.
pub fn splus(w: &WeightsMatrix, lipschitz: f64, lambda: f64, strategy: SPlusStrategy) -> Result<SPlusMatrix> {
    let scale = lipschitz * lambda.abs();
    let zeta = scale * w.norm_inf();
    if !(zeta < 1.0) {
        return Err(param(format!("contraction coefficient zeta = {zeta} must be below 1")));
    }
    let n = w.n();
    let use_neumann = match strategy {
        SPlusStrategy::Auto => w.is_sparse() || n > DIRECT_LIMIT,
        SPlusStrategy::Direct => false,
        SPlusStrategy::Neumann => true,
    };
    let (mut matrix, method) = if use_neumann || zeta == 0.0 {
        let mut m: CsrMatrix = w.to_csr();
        for v in m.values_mut() {
            *v = scale * v.abs();
        }
        let terms = neumann_terms(zeta, lipschitz, SOLVE_TOLERANCE);
        let truncation_bound = if zeta == 0.0 {
            0.0
        } else {
            lipschitz * libm::pow(zeta, (terms + 1) as f64) / (1.0 - zeta)
        };
        (neumann_series(&m, terms), SPlusMethod::Neumann { terms, truncation_bound })
    } else {
        let dense = w.to_dense();
        let a = DenseMatrix::from_fn(n, n, |j, i| (j == i) as u8 as f64 - scale * dense[(j, i)].abs());
        (Lu::factor(&a)?.inverse(), SPlusMethod::Direct)
    };
    for v in matrix.as_mut_slice() {
        // LU round-off can leave −1e-17 where the exact value is 0.
        *v = lipschitz * v.max(0.0);
    }
    Ok(SPlusMatrix { matrix, zeta, lipschitz, method })
}
