//! Monte Carlo experiments: condition tables, law of large numbers, CLT and
//! tail checks, and parallel coupled delta estimation.
//!
//! Work is spread over rayon, but every random number comes from a keyed
//! stream and every reduction runs in index order, so results do not depend
//! on the number of worker threads.

use rayon::prelude::*;

use netfdm_core::error::{Error, Result};
use netfdm_core::fdm::{check_mc, CoupledSampler, DeltaMatrix, DeltaMode, MomentAccumulator};
use netfdm_core::limits::{clt_conditions_sar, TailBoundParams};
use netfdm_core::linalg::{cholesky, solve_lower, symmetric_eigenvalues, CsrMatrix, DenseMatrix, Lu};
use netfdm_core::model::{draw_inputs, OutcomeModel};
use netfdm_core::netgen::{gen_er, gen_sbm, gen_triangle, row_normalize, sbm_auto_blocks, Graph, WeightsMatrix};
use netfdm_core::rng::stage;
use netfdm_core::sar::{replication_rng, splus, LinkFunction, SPlusStrategy, SarSolver, SarSpec, DIRECT_LIMIT, SOLVE_TOLERANCE};
use netfdm_core::stats::{
    chi_square_cdf, ks_critical_001, ks_normal, ks_statistic, linear_fit, pairwise_sum, quantile_sorted, survival_curve,
    Welford,
};
use netfdm_core::Streams;

/// Replications handed to the thread pool at a time by the coupled
/// estimator; bounds memory without affecting results.
pub const COUPLING_CHUNK: usize = 512;

/// Key head of the per-rung streams of a size ladder.
const LADDER: u64 = 0x50;

fn par_map<T: Send>(count: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..count as u64).into_par_iter().map(f).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Er,
    /// `triangles = None` means `T = n`.
    Triangle { triangles: Option<f64> },
    /// `blocks = None` means `round(√n / 2)`; `between` is the
    /// between-block mean degree.
    Sbm { blocks: Option<usize>, between: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Er => "er",
            Family::Triangle { .. } => "triangle",
            Family::Sbm { .. } => "sbm",
        }
    }

    /// One network with mean degree (within-block degree for SBM) `degree`.
    pub fn draw(&self, n: usize, degree: f64, streams: Streams) -> Result<Graph> {
        match *self {
            Family::Er => gen_er(n, degree, streams),
            Family::Triangle { triangles } => gen_triangle(n, triangles.unwrap_or(n as f64), degree, streams),
            Family::Sbm { blocks, between } => {
                let m = blocks.unwrap_or_else(|| sbm_auto_blocks(n));
                Ok(gen_sbm(n, m, degree, between, streams)?.graph)
            }
        }
    }
}

/// Streams of network draw `g` in the `(n, degree)` cell. Cells sharing
/// `(n, degree)` across `λ` see the same networks.
pub fn network_streams(seed: u64, n: usize, degree: f64, g: u64) -> Streams {
    Streams::new(seed).child(&[stage::NETWORK, n as u64, degree.to_bits(), g])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let mut w = Welford::new();
        xs.iter().for_each(|&x| w.push(x));
        Summary { mean: pairwise_sum(xs) / xs.len() as f64, std_error: w.std_error(), count: xs.len() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionPlan {
    pub family: Family,
    pub lambdas: Vec<f64>,
    pub degrees: Vec<f64>,
    pub sizes: Vec<usize>,
    /// Network draws per cell.
    pub networks: usize,
    pub p: f64,
    pub lipschitz: f64,
    pub seed: u64,
}

impl ConditionPlan {
    fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.degrees.is_empty() || self.sizes.is_empty() {
            return Err(Error::Parameter("condition plan needs at least one lambda, degree and size".into()));
        }
        if self.networks == 0 {
            return Err(Error::Parameter("need at least one network draw per cell".into()));
        }
        if !(self.p > 2.0) {
            return Err(Error::Parameter(format!("CLT conditions need p > 2, got {}", self.p)));
        }
        for &l in &self.lambdas {
            if !(self.lipschitz * l.abs() < 1.0) {
                return Err(Error::Parameter(format!("L|lambda| = {} must be below 1", self.lipschitz * l.abs())));
            }
        }
        Ok(())
    }
}

/// Mean and standard error of the condition statistics over the network
/// draws of one `(λ, D, n)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCell {
    pub n: usize,
    pub degree: f64,
    pub lambda: f64,
    /// Max column sum of `S⁺`.
    pub eq15: Summary,
    /// Min-sum statistic, `j ≥ i` form with nodes ranked by influence.
    pub eq16: Summary,
    /// `j ≥ i` form in the generator's node labels.
    pub eq16_labels: Summary,
    pub eq16_order_free: Summary,
}

type Stats = [f64; 4];

fn network_stats(w: &WeightsMatrix, lambdas: &[f64], lipschitz: f64, p: f64) -> Result<Vec<Stats>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let s = splus(w, lipschitz, lambda, SPlusStrategy::Auto)?;
            let r = clt_conditions_sar(&s, p)?;
            Ok([r.max_influence, r.min_sum_ranked, r.min_sum, r.min_sum_order_free])
        })
        .collect()
}

fn cell(n: usize, degree: f64, lambda: f64, stats: &[Stats]) -> ConditionCell {
    let pick = |k: usize| Summary::of(&stats.iter().map(|s| s[k]).collect::<Vec<_>>());
    ConditionCell { n, degree, lambda, eq15: pick(0), eq16: pick(1), eq16_labels: pick(2), eq16_order_free: pick(3) }
}

/// Cells ordered by `λ`, then degree, then `n`, as in the printed tables.
pub fn run_condition_table(plan: &ConditionPlan) -> Result<Vec<ConditionCell>> {
    plan.validate()?;
    let tasks: Vec<(usize, f64, u64)> = plan
        .sizes
        .iter()
        .flat_map(|&n| plan.degrees.iter().flat_map(move |&d| (0..plan.networks as u64).map(move |g| (n, d, g))))
        .collect();
    let per_task: Vec<Vec<Stats>> = tasks
        .par_iter()
        .map(|&(n, d, g)| {
            let graph = plan.family.draw(n, d, network_streams(plan.seed, n, d, g))?;
            network_stats(&row_normalize(&graph), &plan.lambdas, plan.lipschitz, plan.p)
        })
        .collect::<Result<_>>()?;
    let g = plan.networks;
    let nd = plan.degrees.len();
    let mut cells = Vec::new();
    for (li, &lambda) in plan.lambdas.iter().enumerate() {
        for (di, &d) in plan.degrees.iter().enumerate() {
            for (ni, &n) in plan.sizes.iter().enumerate() {
                let start = (ni * nd + di) * g;
                let stats: Vec<Stats> = per_task[start..start + g].iter().map(|v| v[li]).collect();
                cells.push(cell(n, d, lambda, &stats));
            }
        }
    }
    Ok(cells)
}

/// Condition statistics of a single given network; the degree column holds
/// the mean number of neighbours.
pub fn conditions_for_weights(w: &WeightsMatrix, lambdas: &[f64], lipschitz: f64, p: f64) -> Result<Vec<ConditionCell>> {
    let w = if w.is_normalized() { w.clone() } else { w.normalize() };
    let degree = w.nnz() as f64 / w.n() as f64;
    let stats = network_stats(&w, lambdas, lipschitz, p)?;
    Ok(lambdas.iter().zip(&stats).map(|(&l, s)| cell(w.n(), degree, l, std::slice::from_ref(s))).collect())
}

/// Coupled Monte Carlo delta estimate, replications spread over the pool.
/// Gives exactly the numbers of the sequential estimator.
pub fn delta_monte_carlo_par<M: OutcomeModel + ?Sized>(
    model: &M,
    p: f64,
    reps: usize,
    streams: Streams,
    targets: Option<&[(usize, usize)]>,
) -> Result<DeltaMatrix> {
    check_mc(model, p, reps)?;
    let sampler = CoupledSampler::new(model, streams, targets)?;
    let mut acc = MomentAccumulator::new(p, sampler.targets().len());
    let mut start = 0usize;
    while start < reps {
        let end = (start + COUPLING_CHUNK).min(reps);
        let diffs: Vec<Vec<f64>> =
            (start as u64..end as u64).into_par_iter().map(|r| sampler.replicate(r)).collect::<Result<_>>()?;
        diffs.iter().for_each(|d| acc.push(d));
        start = end;
    }
    acc.finish(model.outputs(), sampler.targets(), DeltaMode::MonteCarlo { reps, seed: streams.master() })
}

/// Cross-sectional means `(1/n) Σ_j Y_j` of `reps` replications, replication
/// `r` drawing its inputs from stream `(NOISE, r)`.
pub fn replicated_means<M: OutcomeModel + ?Sized>(model: &M, reps: usize, streams: Streams) -> Result<Vec<f64>> {
    let n = model.outputs();
    par_map(reps, |r| {
        let inputs = draw_inputs(model, &mut replication_rng(&streams, r));
        let mut y = vec![0.0; n];
        model.evaluate(&inputs, &mut y)?;
        Ok(pairwise_sum(&y) / n as f64)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlnRung {
    pub n: usize,
    /// 0.95 quantile of `|(1/n) Σ (Y_j − Ȳ_j)|`.
    pub quantile: f64,
    /// Half-width of the distribution-free order-statistic interval.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlnResult {
    pub rungs: Vec<LlnRung>,
    pub reps: usize,
    pub pass: bool,
}

pub const LLN_LEVEL: f64 = 0.95;

fn quantile_with_error(sorted: &[f64], prob: f64) -> (f64, f64) {
    let r = sorted.len() as f64;
    let spread = (r * prob * (1.0 - prob)).sqrt();
    let at = |rank: f64| sorted[(rank.round().max(0.0) as usize).min(sorted.len() - 1)];
    let (lo, hi) = (at(r * prob - spread), at(r * prob + spread));
    (quantile_sorted(sorted, prob), (hi - lo) / 2.0)
}

/// Law-of-large-numbers check along a size ladder. Passes when the quantile
/// never grows by more than the combined interval half-widths from one rung
/// to the next and ends clearly below where it started.
pub fn run_lln<M: OutcomeModel>(
    ladder: &[usize],
    reps: usize,
    seed: u64,
    build: impl Fn(usize) -> Result<M>,
) -> Result<LlnResult> {
    if ladder.len() < 2 {
        return Err(Error::Parameter("the size ladder needs at least two rungs".into()));
    }
    if reps < 20 {
        return Err(Error::Parameter(format!("need at least 20 replications, got {reps}")));
    }
    let mut rungs = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let model = build(n)?;
        let means = replicated_means(&model, reps, Streams::new(seed).child(&[LADDER, n as u64]))?;
        let grand = pairwise_sum(&means) / reps as f64;
        let mut dev: Vec<f64> = means.iter().map(|m| (m - grand).abs()).collect();
        dev.sort_by(f64::total_cmp);
        let (quantile, std_error) = quantile_with_error(&dev, LLN_LEVEL);
        rungs.push(LlnRung { n, quantile, std_error });
    }
    let steps_ok = rungs.windows(2).all(|w| w[1].quantile <= w[0].quantile + w[0].std_error + w[1].std_error);
    let (first, last) = (&rungs[0], &rungs[rungs.len() - 1]);
    let dropped = last.quantile + last.std_error + first.std_error < first.quantile;
    Ok(LlnResult { rungs, reps, pass: steps_ok && dropped })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSource {
    /// `σ_n² = Var(ε) ‖(I − λW)^{−T} 1‖²`.
    Exact,
    Pilot { reps: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltResult {
    pub n: usize,
    pub reps: usize,
    pub center: f64,
    pub sigma: f64,
    pub source: SigmaSource,
    pub ks: f64,
    pub critical: f64,
    pub pass: bool,
    pub standardized: Vec<f64>,
}

/// `(I − λW)^{−T} 1`.
fn transposed_resolvent_ones(spec: &SarSpec) -> Result<Vec<f64>> {
    let n = spec.n();
    let ones = vec![1.0; n];
    if n <= DIRECT_LIMIT {
        return Ok(Lu::factor(&spec.system_matrix())?.solve_transpose(&ones));
    }
    let w = spec.weights();
    let triplets: Vec<(usize, usize, f64)> =
        (0..n).flat_map(|j| w.row_entries(j).into_iter().map(move |(i, v)| (i, j, v))).collect();
    let wt = CsrMatrix::from_triplets(n, n, &triplets)?;
    let (mut v, mut next) = (ones.clone(), vec![0.0; n]);
    let zeta = spec.zeta();
    let tol = SOLVE_TOLERANCE * (1.0 - zeta) / zeta.max(f64::MIN_POSITIVE);
    loop {
        wt.mul_vec_into(&v, &mut next);
        let mut step: f64 = 0.0;
        for (k, x) in next.iter_mut().enumerate() {
            *x = 1.0 + spec.lambda() * *x;
            step = step.max((*x - v[k]).abs());
        }
        std::mem::swap(&mut v, &mut next);
        if step <= tol {
            return Ok(v);
        }
    }
}

fn sums(solver: &SarSolver, reps: usize, rng_for: impl Fn(u64) -> netfdm_core::rng::StreamRng + Sync) -> Result<Vec<f64>> {
    let spec = solver.spec();
    par_map(reps, |r| Ok(pairwise_sum(&solver.solve(&spec.draw_noise(&mut rng_for(r)))?)))
}

pub fn pilot_reps(reps: usize) -> usize {
    (reps / 10).max(50)
}

/// Standardized sums `(S_n − E S_n)/σ_n` over `reps` replications and their
/// KS distance to the standard normal.
pub fn run_clt(spec: &SarSpec, reps: usize, streams: Streams) -> Result<CltResult> {
    if reps < 20 {
        return Err(Error::Parameter(format!("need at least 20 replications, got {reps}")));
    }
    let solver = SarSolver::new(spec)?;
    let noise = spec.noise();
    let exact = match (spec.link().is_identity(), noise.mean(), noise.variance()) {
        (true, Some(mu), Some(var)) => Some((mu, var)),
        _ => None,
    };
    let (center, sigma, source) = match exact {
        Some((mu, var)) => {
            let v = transposed_resolvent_ones(spec)?;
            let center = pairwise_sum(&v.iter().zip(spec.covariate()).map(|(a, c)| a * (c + mu)).collect::<Vec<_>>());
            let norm2 = pairwise_sum(&v.iter().map(|a| a * a).collect::<Vec<_>>());
            (center, (var * norm2).sqrt(), SigmaSource::Exact)
        }
        None => {
            let k = pilot_reps(reps);
            let pilot = sums(&solver, k, |r| streams.rng(&[stage::PILOT, r]))?;
            let mut w = Welford::new();
            pilot.iter().for_each(|&s| w.push(s));
            (w.mean(), w.std_dev(), SigmaSource::Pilot { reps: k })
        }
    };
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Experiment(format!("degenerate standard deviation {sigma} of the sum")));
    }
    let standardized: Vec<f64> =
        sums(&solver, reps, |r| replication_rng(&streams, r))?.into_iter().map(|s| (s - center) / sigma).collect();
    let ks = ks_normal(&standardized);
    let critical = ks_critical_001(reps);
    Ok(CltResult { n: spec.n(), reps, center, sigma, source, ks, critical, pass: ks <= critical, standardized })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiCltResult {
    pub dims: usize,
    pub reps: usize,
    /// KS distance of each whitened coordinate to N(0, 1).
    pub ks: Vec<f64>,
    /// KS distance of the squared norm to chi-square with `dims` degrees.
    pub chi_square_ks: f64,
    pub critical: f64,
    pub pass: bool,
}

/// Joint CLT for outcome vectors whose components apply different links to
/// the same latent index `c + ε`. With one component this is [`run_clt`].
/// Smallest covariance eigenvalue, relative to the largest, accepted for
/// whitening.
pub const SINGULAR_RATIO: f64 = 1e-10;

pub fn run_clt_multivariate(spec: &SarSpec, links: &[LinkFunction], reps: usize, streams: Streams) -> Result<MultiCltResult> {
    let dims = links.len();
    if dims == 0 {
        return Err(Error::Parameter("need at least one outcome component".into()));
    }
    let critical = ks_critical_001(reps);
    if dims == 1 {
        let r = run_clt(&spec.with_link(links[0].clone())?, reps, streams)?;
        let squares: Vec<f64> = r.standardized.iter().map(|z| z * z).collect();
        let chi_square_ks = ks_statistic(&squares, |x| chi_square_cdf(x, 1));
        let pass = r.ks <= critical && chi_square_ks <= critical;
        return Ok(MultiCltResult { dims, reps, ks: vec![r.ks], chi_square_ks, critical, pass });
    }
    let solvers: Vec<SarSolver> =
        links.iter().map(|l| SarSolver::new(&spec.with_link(l.clone())?)).collect::<Result<_>>()?;
    let vector_sums = |count: usize, key: u64| {
        par_map(count, |r| {
            let eps = spec.draw_noise(&mut streams.rng(&[key, r]));
            solvers.iter().map(|s| Ok(pairwise_sum(&s.solve(&eps)?))).collect::<Result<Vec<f64>>>()
        })
    };
    // Mean and covariance come from the sample itself: a pilot small enough
    // to be cheap leaves whitening errors larger than the KS critical value.
    let sample = vector_sums(reps, stage::NOISE)?;
    let k = sample.len() as f64;
    let mean: Vec<f64> = (0..dims).map(|a| pairwise_sum(&sample.iter().map(|s| s[a]).collect::<Vec<_>>()) / k).collect();
    let cov = DenseMatrix::from_fn(dims, dims, |a, b| {
        pairwise_sum(&sample.iter().map(|s| (s[a] - mean[a]) * (s[b] - mean[b])).collect::<Vec<_>>()) / (k - 1.0)
    });
    let eig = symmetric_eigenvalues(&cov)?;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
    let singular = || Error::Experiment(format!("sample covariance is singular (condition number {:e})", hi / lo.max(0.0)));
    if !(lo > SINGULAR_RATIO * hi) {
        return Err(singular());
    }
    let l = cholesky(&cov).map_err(|_| singular())?;
    let whitened: Vec<Vec<f64>> = sample
        .into_iter()
        .map(|s| solve_lower(&l, &s.iter().zip(&mean).map(|(x, m)| x - m).collect::<Vec<_>>()))
        .collect();
    let ks: Vec<f64> = (0..dims).map(|a| ks_normal(&whitened.iter().map(|z| z[a]).collect::<Vec<_>>())).collect();
    let squares: Vec<f64> = whitened.iter().map(|z| z.iter().map(|v| v * v).sum()).collect();
    let chi_square_ks = ks_statistic(&squares, |x| chi_square_cdf(x, dims));
    let pass = ks.iter().all(|&d| d <= critical) && chi_square_ks <= critical;
    Ok(MultiCltResult { dims, reps, ks, chi_square_ks, critical, pass })
}

/// Tail points need this many exceedances to enter the slope fit.
pub const MIN_EXCEEDANCES: usize = 30;
/// Relative slack on the theoretical tail rate.
pub const TAIL_SLACK: f64 = 0.2;
pub const DEFAULT_TAIL_POINTS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub x: f64,
    pub survival: f64,
    pub count: usize,
    /// `x^α / (2 e α γ₀^α)`.
    pub bound_exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailResult {
    pub reps: usize,
    pub points: Vec<TailPoint>,
    /// Grid points dropped for having too few exceedances.
    pub truncated: usize,
    /// Least-squares slope of `log P(|Z| ≥ x)` against `x^α`.
    pub slope: f64,
    pub r_squared: f64,
    /// `−rate · (1 − slack)`; the slope must not exceed it.
    pub threshold: f64,
    pub pass: bool,
}

/// `Z = n^{−1/2} Σ_j (Y_j − Ȳ_j)` over replications, centred by the grand
/// mean.
pub fn scaled_sums(spec: &SarSpec, reps: usize, streams: Streams) -> Result<Vec<f64>> {
    let solver = SarSolver::new(spec)?;
    let s = sums(&solver, reps, |r| replication_rng(&streams, r))?;
    let grand = pairwise_sum(&s) / reps as f64;
    let root_n = (spec.n() as f64).sqrt();
    Ok(s.into_iter().map(|v| (v - grand) / root_n).collect())
}

/// Evenly spaced grid from a quarter to four standard deviations of `z`.
pub fn default_tail_grid(z: &[f64], points: usize) -> Vec<f64> {
    let sd = (z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64).sqrt();
    let (lo, hi) = (0.25 * sd, 4.0 * sd);
    (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect()
}

pub fn run_tail(spec: &SarSpec, params: &TailBoundParams, grid: Option<&[f64]>, reps: usize, streams: Streams) -> Result<TailResult> {
    let z = scaled_sums(spec, reps, streams)?;
    let grid = match grid {
        Some(g) => g.to_vec(),
        None => default_tail_grid(&z, DEFAULT_TAIL_POINTS),
    };
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.first().is_some_and(|&x| !(x >= 0.0)) {
        return Err(Error::Parameter("tail grid must be nonnegative and strictly increasing".into()));
    }
    let all: Vec<TailPoint> = survival_curve(&z, &grid)
        .into_iter()
        .zip(&grid)
        .map(|((survival, count), &x)| TailPoint { x, survival, count, bound_exponent: params.exponent(x) })
        .collect();
    let keep = all.iter().take_while(|p| p.count >= MIN_EXCEEDANCES).count();
    let points = all[..keep].to_vec();
    if points.len() < 3 {
        return Err(Error::Experiment(format!("only {} grid points have {MIN_EXCEEDANCES}+ exceedances", points.len())));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.x.powf(params.alpha)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.survival.ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or_else(|| Error::Experiment("degenerate tail grid".into()))?;
    let threshold = -params.rate() * (1.0 - TAIL_SLACK);
    Ok(TailResult {
        reps,
        truncated: all.len() - keep,
        points,
        slope: fit.slope,
        r_squared: fit.r_squared,
        threshold,
        pass: fit.slope <= threshold,
    })
}
