//! Command-line front end.
//!
//! Every subcommand option is a plain `--key value` string. Values come from
//! the command line, then the `--config` file, then the built-in default; the
//! fully resolved set is written as the manifest line that heads every
//! output file and as `manifest.txt`, which `--config` accepts again.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Arg, ArgMatches, Command};

use netfdm_core::fdm::{delta_linear_exact, delta_sar_bound, DeltaMatrix};
use netfdm_core::limits::{clt_conditions_delta, concentration_params, DEFAULT_P_GRID};
use netfdm_core::linalg::Lu;
use netfdm_core::model::CommonShock;
use netfdm_core::netgen::{
    gen_lattice, row_normalize, sbm_auto_blocks, Graph, LatticeConfig, WeightScheme, WeightsMatrix,
};
use netfdm_core::rng::RNG_ALGORITHM;
use netfdm_core::sar::{splus, LinkFunction, NoiseModel, SPlusStrategy, SarSolver, SarSpec};
use netfdm_core::stats::normal_cdf;
use netfdm_core::{Error, Streams};

use crate::config::{self, RunConfig};
use crate::error::{usage, CliError, CliResult};
use crate::io::{fmt_f64, format_delta, format_dense, format_edge_list, ingest, InputFormat};
use crate::mc::{
    conditions_for_weights, delta_monte_carlo_par, network_streams, run_clt, run_clt_multivariate, run_condition_table,
    run_lln, run_tail, ConditionCell, ConditionPlan, Family, SigmaSource,
};

type Opt = (&'static str, Option<&'static str>, &'static str);

const NETWORK: &[Opt] = &[
    ("model", Some("er"), "er, triangle, sbm, lattice or file"),
    ("n", Some("100"), "node count"),
    ("deg", Some("3"), "mean degree (within-block degree for sbm)"),
    ("triangles", None, "triangle model: expected triangle count T (default n)"),
    ("blocks", Some("auto"), "sbm: block count or 'auto' for round(sqrt(n)/2)"),
    ("dwb", None, "sbm: within-block mean degree (default --deg)"),
    ("dbb", Some("2"), "sbm: between-block mean degree"),
    ("dim", Some("2"), "lattice: dimension"),
    ("side", Some("10"), "lattice: nodes per axis"),
    ("scheme", Some("cutoff"), "lattice: cutoff or power"),
    ("radius", Some("2"), "lattice cutoff radius"),
    ("base", Some("1"), "lattice cutoff base weight"),
    ("c0", Some("1"), "lattice power-decay constant"),
    ("alpha", Some("3"), "lattice power-decay exponent"),
    ("input", None, "file model: path of the network file"),
    ("format", Some("binary"), "file model: binary, weighted, fcap or dense"),
];

const PROCESS: &[Opt] = &[
    ("lambda", Some("0.2"), "network effect"),
    ("link", Some("identity"), "identity, tobit or tanh"),
    ("noise", Some("gaussian"), "gaussian, uniform or t"),
    ("sigma", Some("1"), "noise scale (uniform: half-width)"),
    ("dof", Some("5"), "t noise degrees of freedom"),
];

struct CommandSpec {
    name: &'static str,
    about: &'static str,
    groups: &'static [&'static [Opt]],
}

const COMMANDS: &[CommandSpec] = &[
    CommandSpec { name: "gen", about: "Generate a network: edge list and normalized weights", groups: &[NETWORK] },
    CommandSpec {
        name: "splus",
        about: "Propagation envelope S+ of a network",
        groups: &[NETWORK, &[("lambda", Some("0.2"), "network effect"), ("lipschitz", Some("1"), "link Lipschitz constant"), ("strategy", Some("auto"), "auto, direct or neumann")]],
    },
    CommandSpec {
        name: "fdm",
        about: "Functional dependence matrix: analytic bound, exact linear value or coupled Monte Carlo",
        groups: &[
            NETWORK,
            PROCESS,
            &[
                ("p", Some("2"), "moment order"),
                ("mode", Some("bound"), "bound, exact or mc"),
                ("reps", Some("5000"), "mc: coupled replications"),
                ("targets", None, "mc: comma-separated j:i pairs (1-based)"),
            ],
        ],
    },
    CommandSpec {
        name: "conditions",
        about: "Table of CLT condition statistics over random networks",
        groups: &[&[
            ("model", Some("er"), "er, triangle, sbm or file"),
            ("lambda", Some("0.2,0.3,0.4,0.8"), "network effects"),
            ("deg", Some("3,5,10"), "mean degrees"),
            ("n", Some("100,400,900"), "network sizes"),
            ("reps", Some("100"), "network draws per cell"),
            ("p", Some("4"), "moment order"),
            ("lipschitz", Some("1"), "link Lipschitz constant"),
            ("variant", Some("ranked"), "extra min-sum columns: ranked (none), labels, orderfree or all"),
            ("triangles", None, "triangle model: T (default n)"),
            ("blocks", Some("auto"), "sbm: block count or 'auto'"),
            ("dbb", Some("2"), "sbm: between-block mean degree"),
            ("input", None, "file model: path of the network file"),
            ("format", Some("binary"), "file model: binary, weighted, fcap or dense"),
        ]],
    },
    CommandSpec {
        name: "decay",
        about: "Condition statistics and ordered-decay diagnostic of the delta bound",
        groups: &[NETWORK, PROCESS, &[("p", Some("4"), "moment order")]],
    },
    CommandSpec {
        name: "clt",
        about: "Standardized sums and their KS distance to the normal",
        groups: &[
            NETWORK,
            PROCESS,
            &[("reps", Some("2000"), "replications"), ("components", None, "comma-separated links for a joint CLT")],
        ],
    },
    CommandSpec {
        name: "lln",
        about: "Law of large numbers along a size ladder",
        groups: &[
            &[
                ("model", Some("er"), "er, triangle, sbm or shock (one common shock)"),
                ("deg", Some("3"), "mean degree"),
                ("ladder", Some("100,400,900,1600"), "network sizes"),
                ("reps", Some("2000"), "replications per rung"),
                ("triangles", None, "triangle model: T (default n)"),
                ("blocks", Some("auto"), "sbm: block count or 'auto'"),
                ("dbb", Some("2"), "sbm: between-block mean degree"),
            ],
            PROCESS,
        ],
    },
    CommandSpec {
        name: "tail",
        about: "Empirical tail of the scaled sum against the concentration bound",
        groups: &[
            NETWORK,
            PROCESS,
            &[
                ("reps", Some("10000"), "replications"),
                ("nu", None, "moment growth order (default from the noise: gaussian 0.5, uniform 0)"),
                ("grid", None, "comma-separated x grid (default: automatic)"),
                ("pgrid", Some("2,4,6,8,12,16"), "p values probed for gamma0"),
            ],
        ],
    },
    CommandSpec {
        name: "ingest",
        about: "Read a network file and write its weights matrix",
        groups: &[&[
            ("input", None, "path of the network file"),
            ("format", Some("binary"), "binary, weighted, fcap or dense"),
            ("normalize", Some("true"), "row-normalize the weights"),
        ]],
    },
];

fn options(spec: &CommandSpec) -> Vec<Opt> {
    let mut seen = BTreeMap::new();
    for group in spec.groups {
        for &opt in *group {
            seen.entry(opt.0).or_insert(opt);
        }
    }
    seen.into_values().collect()
}

pub fn command() -> Command {
    let mut cmd = Command::new("netfdm")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Functional dependence measures, SAR simulation and CLT diagnostics for network data")
        .subcommand_required(true)
        .arg(Arg::new("seed").long("seed").global(true).help("master seed [default: 1]"))
        .arg(Arg::new("threads").long("threads").global(true).help("worker threads (results do not depend on it)"))
        .arg(Arg::new("out").long("out").global(true).help("output directory (default: standard output)"))
        .arg(Arg::new("config").long("config").global(true).help("key = value file; flags take precedence"));
    for spec in COMMANDS {
        let mut sub = Command::new(spec.name).about(spec.about);
        for (key, default, help) in options(spec) {
            let help = match default {
                Some(d) => format!("{help} [default: {d}]"),
                None => help.to_string(),
            };
            sub = sub.arg(Arg::new(key).long(key).help(help));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

/// Resolved options of one run.
#[derive(Debug, Clone)]
pub struct Params {
    pub command: &'static str,
    values: RunConfig,
}

fn bad(key: &str, value: &str, what: &str) -> CliError {
    CliError::Core(Error::Parameter(format!("--{key} '{value}': expected {what}")))
}

impl Params {
    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> CliResult<&str> {
        self.raw(key).ok_or_else(|| CliError::Core(Error::Parameter(format!("--{key} is required"))))
    }

    fn parse<T: FromStr>(&self, key: &str, what: &str) -> CliResult<T> {
        let v = self.required(key)?;
        v.parse().map_err(|_| bad(key, v, what))
    }

    fn parse_opt<T: FromStr>(&self, key: &str, what: &str) -> CliResult<Option<T>> {
        self.raw(key).map(|v| v.parse().map_err(|_| bad(key, v, what))).transpose()
    }

    fn f64(&self, key: &str) -> CliResult<f64> {
        self.parse(key, "a number")
    }

    fn usize(&self, key: &str) -> CliResult<usize> {
        self.parse(key, "a nonnegative integer")
    }

    fn list<T: FromStr>(&self, key: &str, what: &str) -> CliResult<Vec<T>> {
        let v = self.required(key)?;
        v.split(',').map(|s| s.trim().parse().map_err(|_| bad(key, v, what))).collect()
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.parse("seed", "an unsigned integer")
    }

    /// `# netfdm <version> rng=<algorithm> command=<name> key=value …`
    pub fn manifest_line(&self) -> String {
        let mut s = format!("# netfdm {} rng={RNG_ALGORITHM} command={}", env!("CARGO_PKG_VERSION"), self.command);
        for (k, v) in &self.values {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }

    pub fn manifest_file(&self) -> String {
        let mut c = self.values.clone();
        c.insert("command".into(), self.command.into());
        format!("{}\n{}", self.manifest_line(), config::format(&c))
    }
}

/// Whether a defaulted key matters under the other resolved values; the
/// rest are left out of the manifest.
fn relevant(key: &str, values: &RunConfig) -> bool {
    let is = |k: &str, v: &str| values.get(k).is_some_and(|x| x == v);
    match key {
        "dim" | "side" | "scheme" => is("model", "lattice"),
        "radius" | "base" => is("model", "lattice") && is("scheme", "cutoff"),
        "c0" | "alpha" => is("model", "lattice") && is("scheme", "power"),
        "n" | "deg" => !is("model", "lattice") && !is("model", "file"),
        "blocks" | "dwb" | "dbb" => is("model", "sbm"),
        "triangles" => is("model", "triangle"),
        "input" => is("model", "file") || !values.contains_key("model"),
        "format" => is("model", "file") || !values.contains_key("model"),
        "dof" => is("noise", "t"),
        _ => true,
    }
}

fn resolve(spec: &CommandSpec, matches: &ArgMatches, file: Option<RunConfig>) -> CliResult<Params> {
    let opts = options(spec);
    let mut values = RunConfig::new();
    for (key, default, _) in &opts {
        if let Some(d) = default {
            values.insert(key.to_string(), d.to_string());
        }
    }
    values.insert("seed".into(), "1".into());
    let mut explicit = std::collections::BTreeSet::new();
    if let Some(file) = file {
        for (k, v) in file {
            if k == "command" {
                if v != spec.name {
                    return Err(usage(format!("config file is for '{v}', not '{}'", spec.name)));
                }
                continue;
            }
            if k != "seed" && !opts.iter().any(|o| o.0 == k) {
                return Err(CliError::Core(Error::Parameter(format!("unknown config key '{k}' for '{}'", spec.name))));
            }
            explicit.insert(k.clone());
            values.insert(k, v);
        }
    }
    for (key, _, _) in &opts {
        if let Some(v) = matches.get_one::<String>(key) {
            explicit.insert(key.to_string());
            values.insert(key.to_string(), v.clone());
        }
    }
    if let Some(v) = matches.get_one::<String>("seed") {
        values.insert("seed".into(), v.clone());
    }
    let irrelevant: Vec<String> =
        values.keys().filter(|k| !explicit.contains(*k) && !relevant(k, &values)).cloned().collect();
    for k in irrelevant {
        values.remove(&k);
    }
    Ok(Params { command: spec.name, values })
}

/// Where output files go. Each file starts with the manifest line.
pub struct Output {
    dir: Option<PathBuf>,
    header: String,
}

impl Output {
    fn write(&self, name: &str, body: &str) -> CliResult<()> {
        let content = format!("{}\n{body}", self.header);
        match &self.dir {
            Some(dir) => {
                let path = dir.join(name);
                fs::write(&path, content).map_err(|e| CliError::io(path, e))
            }
            None => {
                let mut out = std::io::stdout().lock();
                match out.write_all(content.as_bytes()) {
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
                    _ => Ok(()),
                }
            }
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and writes its
/// outputs.
pub fn run<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(usage(e.to_string())),
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let spec = COMMANDS.iter().find(|c| c.name == name).expect("registered subcommand");
    let file = match sub.get_one::<String>("config") {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            Some(config::parse(&text)?)
        }
        None => None,
    };
    let params = resolve(spec, sub, file)?;
    let dir = sub.get_one::<String>("out").map(PathBuf::from);
    if let Some(d) = &dir {
        fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
        let path = d.join("manifest.txt");
        fs::write(&path, params.manifest_file()).map_err(|e| CliError::io(path, e))?;
    }
    let out = Output { dir, header: params.manifest_line() };
    let threads = match sub.get_one::<String>("threads") {
        Some(t) => t.parse::<usize>().map_err(|_| bad("threads", t, "a positive integer"))?,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(&params, &out))
}

fn dispatch(p: &Params, out: &Output) -> CliResult<()> {
    match p.command {
        "gen" => cmd_gen(p, out),
        "splus" => cmd_splus(p, out),
        "fdm" => cmd_fdm(p, out),
        "conditions" => cmd_conditions(p, out),
        "decay" => cmd_decay(p, out),
        "clt" => cmd_clt(p, out),
        "lln" => cmd_lln(p, out),
        "tail" => cmd_tail(p, out),
        "ingest" => cmd_ingest(p, out),
        other => unreachable!("unregistered command {other}"),
    }
}

fn parse_blocks(p: &Params, n: usize) -> CliResult<usize> {
    match p.required("blocks")? {
        "auto" => Ok(sbm_auto_blocks(n)),
        v => v.parse().map_err(|_| bad("blocks", v, "an integer or 'auto'")),
    }
}

fn family(p: &Params, n: usize) -> CliResult<Family> {
    match p.required("model")? {
        "er" => Ok(Family::Er),
        "triangle" => Ok(Family::Triangle { triangles: p.parse_opt("triangles", "a number")? }),
        "sbm" => Ok(Family::Sbm { blocks: Some(parse_blocks(p, n)?), between: p.f64("dbb")? }),
        other => Err(bad("model", other, "er, triangle or sbm")),
    }
}

fn lattice_config(p: &Params) -> CliResult<LatticeConfig> {
    let scheme = match p.required("scheme")? {
        "cutoff" => WeightScheme::Cutoff { radius: p.f64("radius")?, base: p.f64("base")? },
        "power" => WeightScheme::PowerDecay { c0: p.f64("c0")?, alpha: p.f64("alpha")? },
        other => return Err(bad("scheme", other, "cutoff or power")),
    };
    Ok(LatticeConfig { dim: p.usize("dim")?, side: p.usize("side")?, scheme })
}

fn input_path(p: &Params) -> CliResult<PathBuf> {
    Ok(PathBuf::from(p.required("input")?))
}

/// Raw symmetric lattice weights as a graph, for the edge-list output.
fn lattice_graph(c: &LatticeConfig) -> CliResult<Graph> {
    let (_, dist) = gen_lattice(c)?;
    let n = c.n();
    let mut g = Graph::new(n);
    for a in 0..n {
        for b in a + 1..n {
            let d = dist.raw(a, b);
            let w = match c.scheme {
                WeightScheme::Cutoff { radius, base } => (f64::from(d) < radius).then_some(base),
                WeightScheme::PowerDecay { c0, alpha } => Some(LatticeConfig::raw_power_weight(c0, alpha, d)),
            };
            if let Some(w) = w {
                g.add_edge(a, b, w)?;
            }
        }
    }
    Ok(g)
}

/// The network of a single-network command, row-normalized, plus the graph
/// when there is one.
fn network(p: &Params) -> CliResult<(WeightsMatrix, Option<Graph>)> {
    let seed = p.seed()?;
    match p.required("model")? {
        "lattice" => {
            let c = lattice_config(p)?;
            Ok((gen_lattice(&c)?.0, Some(lattice_graph(&c)?)))
        }
        "file" => {
            let format: InputFormat = p.parse("format", "binary, weighted, fcap or dense")?;
            let w = ingest(&input_path(p)?, format)?;
            Ok((w.normalize(), None))
        }
        _ => {
            let n = p.usize("n")?;
            let fam = family(p, n)?;
            let deg = match (fam, p.raw("dwb")) {
                (Family::Sbm { .. }, Some(_)) => p.f64("dwb")?,
                _ => p.f64("deg")?,
            };
            let g = fam.draw(n, deg, network_streams(seed, n, deg, 0))?;
            Ok((row_normalize(&g), Some(g)))
        }
    }
}

fn link(name: &str) -> CliResult<LinkFunction> {
    match name {
        "identity" => Ok(LinkFunction::Identity),
        "tobit" => Ok(LinkFunction::Tobit),
        "tanh" => Ok(LinkFunction::custom("tanh", 1.0, f64::tanh)?),
        other => Err(bad("link", other, "identity, tobit or tanh")),
    }
}

fn noise(p: &Params) -> CliResult<NoiseModel> {
    let sigma = p.f64("sigma")?;
    Ok(match p.required("noise")? {
        "gaussian" => NoiseModel::gaussian(sigma)?,
        "uniform" => NoiseModel::uniform(-sigma, sigma)?,
        "t" => NoiseModel::student_t(p.f64("dof")?, sigma)?,
        other => return Err(bad("noise", other, "gaussian, uniform or t")),
    })
}

fn process(p: &Params, w: WeightsMatrix) -> CliResult<SarSpec> {
    Ok(SarSpec::centered(w, link(p.required("link")?)?, p.f64("lambda")?, noise(p)?)?)
}

/// Noise streams, kept apart from the network streams.
fn noise_streams(p: &Params) -> CliResult<Streams> {
    Ok(Streams::new(p.seed()?))
}

fn csv_row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

fn cmd_gen(p: &Params, out: &Output) -> CliResult<()> {
    if p.required("model")? == "file" {
        return Err(usage("gen does not read files; use ingest"));
    }
    let (w, g) = network(p)?;
    let g = g.expect("generated networks have a graph");
    let provenance = format!("# provenance: {}\n", w.provenance());
    out.write("edges.tsv", &format!("{provenance}{}", format_edge_list(&g)))?;
    out.write("weights.csv", &format!("{provenance}{}", format_dense(&w.to_dense())))
}

fn cmd_splus(p: &Params, out: &Output) -> CliResult<()> {
    let (w, _) = network(p)?;
    let strategy = match p.required("strategy")? {
        "auto" => SPlusStrategy::Auto,
        "direct" => SPlusStrategy::Direct,
        "neumann" => SPlusStrategy::Neumann,
        other => return Err(bad("strategy", other, "auto, direct or neumann")),
    };
    let s = splus(&w, p.f64("lipschitz")?, p.f64("lambda")?, strategy)?;
    out.write("splus.csv", &format_dense(&s.matrix))
}

fn parse_targets(text: &str) -> CliResult<Vec<(usize, usize)>> {
    text.split(',')
        .map(|pair| {
            let parsed = pair.trim().split_once(':').and_then(|(j, i)| Some((j.parse::<usize>().ok()?, i.parse::<usize>().ok()?)));
            match parsed {
                Some((j, i)) if j > 0 && i > 0 => Ok((j - 1, i - 1)),
                _ => Err(bad("targets", text, "comma-separated 1-based j:i pairs")),
            }
        })
        .collect()
}

fn cmd_fdm(p: &Params, out: &Output) -> CliResult<()> {
    let (w, _) = network(p)?;
    let spec = process(p, w)?;
    let order = p.f64("p")?;
    let mode = p.required("mode")?;
    let (delta, reps): (DeltaMatrix, usize) = match mode {
        "bound" => (delta_sar_bound(&spec, order)?, 0),
        "exact" => {
            if !spec.link().is_identity() {
                return Err(CliError::Core(Error::Capability("exact deltas need the identity link".into())));
            }
            let a = Lu::factor(&spec.system_matrix())?.inverse();
            (delta_linear_exact(&a, spec.noise(), order)?, 0)
        }
        "mc" => {
            let reps = p.usize("reps")?;
            let targets = p.raw("targets").map(parse_targets).transpose()?;
            let solver = SarSolver::new(&spec)?;
            (delta_monte_carlo_par(&solver, order, reps, noise_streams(p)?, targets.as_deref())?, reps)
        }
        other => return Err(bad("mode", other, "bound, exact or mc")),
    };
    let body = format!("# p={order},mode={},reps={reps},seed={}\n{}", delta.mode().label(), p.seed()?, format_delta(&delta));
    out.write("delta.csv", &body)
}

/// Which min-sum forms go next to the ranked one in `conditions.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtraColumns {
    pub labels: bool,
    pub order_free: bool,
}

impl FromStr for ExtraColumns {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        let (labels, order_free) = match s {
            "ranked" => (false, false),
            "labels" => (true, false),
            "orderfree" => (false, true),
            "all" => (true, true),
            _ => return Err(()),
        };
        Ok(Self { labels, order_free })
    }
}

pub fn format_conditions(model: &str, cells: &[ConditionCell], extra: ExtraColumns) -> String {
    let mut s = String::from("model,n,deg,lambda,networks,eq15_mean,eq15_se,eq16_mean,eq16_se");
    if extra.labels {
        s.push_str(",eq16_labels_mean,eq16_labels_se");
    }
    if extra.order_free {
        s.push_str(",eq16_orderfree_mean,eq16_orderfree_se");
    }
    s.push('\n');
    for c in cells {
        let mut f = vec![
            model.to_string(),
            c.n.to_string(),
            c.degree.to_string(),
            c.lambda.to_string(),
            c.eq15.count.to_string(),
            fmt_f64(c.eq15.mean),
            fmt_f64(c.eq15.std_error),
            fmt_f64(c.eq16.mean),
            fmt_f64(c.eq16.std_error),
        ];
        if extra.labels {
            f.push(fmt_f64(c.eq16_labels.mean));
            f.push(fmt_f64(c.eq16_labels.std_error));
        }
        if extra.order_free {
            f.push(fmt_f64(c.eq16_order_free.mean));
            f.push(fmt_f64(c.eq16_order_free.std_error));
        }
        s.push_str(&csv_row(&f));
    }
    s
}

fn cmd_conditions(p: &Params, out: &Output) -> CliResult<()> {
    let extra: ExtraColumns = p.parse("variant", "ranked, labels, orderfree or all")?;
    let lambdas: Vec<f64> = p.list("lambda", "comma-separated numbers")?;
    let order = p.f64("p")?;
    let lipschitz = p.f64("lipschitz")?;
    let model = p.required("model")?;
    let cells = if model == "file" {
        let format: InputFormat = p.parse("format", "binary, weighted, fcap or dense")?;
        conditions_for_weights(&ingest(&input_path(p)?, format)?, &lambdas, lipschitz, order)?
    } else {
        let fam = match model {
            "sbm" => Family::Sbm {
                blocks: match p.required("blocks")? {
                    "auto" => None,
                    v => Some(v.parse().map_err(|_| bad("blocks", v, "an integer or 'auto'"))?),
                },
                between: p.f64("dbb")?,
            },
            _ => family(p, 0)?,
        };
        let plan = ConditionPlan {
            family: fam,
            lambdas,
            degrees: p.list("deg", "comma-separated numbers")?,
            sizes: p.list("n", "comma-separated integers")?,
            networks: p.usize("reps")?,
            p: order,
            lipschitz,
            seed: p.seed()?,
        };
        run_condition_table(&plan)?
    };
    out.write("conditions.csv", &format_conditions(model, &cells, extra))
}

fn cmd_decay(p: &Params, out: &Output) -> CliResult<()> {
    let (w, _) = network(p)?;
    let spec = process(p, w)?;
    let delta = delta_sar_bound(&spec, p.f64("p")?)?;
    let report = clt_conditions_delta(&delta)?;
    let mut summary = String::from("statistic,value\n");
    let mut row = |k: &str, v: String| summary.push_str(&format!("{k},{v}\n"));
    row("max_influence", fmt_f64(report.max_influence));
    row("min_sum", fmt_f64(report.min_sum_ranked));
    row("min_sum_labels", fmt_f64(report.min_sum));
    row("min_sum_orderfree", fmt_f64(report.min_sum_order_free));
    row("aggregate_q2", fmt_f64(report.aggregate_q2));
    row("influence_concentrated", report.flags.influence_concentrated.to_string());
    row("min_sum_large", report.flags.min_sum_large.to_string());
    let mut rows = String::from("row,alpha_hat\n");
    if let Some(d) = &report.decay {
        row("alpha_min", d.alpha_min.map(fmt_f64).unwrap_or_else(|| "NaN".into()));
        row("kappa", fmt_f64(d.kappa));
        row("tail_sup", fmt_f64(d.tail_sup));
        row("tail_threshold", fmt_f64(d.tail_threshold));
        row("exponent_threshold", fmt_f64(d.exponent_threshold));
        row("skipped_rows", d.skipped_rows.len().to_string());
        row("pass", d.pass.to_string());
        for (i, a) in d.alpha_hat.iter().enumerate() {
            rows.push_str(&format!("{},{}\n", i + 1, a.map(fmt_f64).unwrap_or_else(|| "NaN".into())));
        }
    }
    out.write("decay.csv", &summary)?;
    out.write("decay_rows.csv", &rows)
}

fn cmd_clt(p: &Params, out: &Output) -> CliResult<()> {
    let (w, _) = network(p)?;
    let spec = process(p, w)?;
    let reps = p.usize("reps")?;
    let streams = noise_streams(p)?;
    if let Some(list) = p.raw("components") {
        let links: Vec<LinkFunction> = list.split(',').map(|s| link(s.trim())).collect::<CliResult<_>>()?;
        let r = run_clt_multivariate(&spec, &links, reps, streams)?;
        let mut s = String::from("component,statistic,ks,critical,pass\n");
        for (name, ks) in list.split(',').zip(&r.ks) {
            s.push_str(&csv_row(&[name.trim().into(), "normal".into(), fmt_f64(*ks), fmt_f64(r.critical), (*ks <= r.critical).to_string()]));
        }
        s.push_str(&csv_row(&[
            "all".into(),
            "chi_square".into(),
            fmt_f64(r.chi_square_ks),
            fmt_f64(r.critical),
            (r.chi_square_ks <= r.critical).to_string(),
        ]));
        return out.write("clt.csv", &s);
    }
    let r = run_clt(&spec, reps, streams)?;
    let source = match r.source {
        SigmaSource::Exact => "exact".to_string(),
        SigmaSource::Pilot { reps } => format!("pilot{reps}"),
    };
    let summary = format!(
        "n,lambda,link,reps,center,sigma,sigma_source,ks,critical,pass\n{}",
        csv_row(&[
            r.n.to_string(),
            spec.lambda().to_string(),
            spec.link().name().to_string(),
            reps.to_string(),
            fmt_f64(r.center),
            fmt_f64(r.sigma),
            source,
            fmt_f64(r.ks),
            fmt_f64(r.critical),
            r.pass.to_string(),
        ])
    );
    let mut sorted = r.standardized.clone();
    sorted.sort_by(f64::total_cmp);
    let mut qq = String::from("# z\tecdf\tnormal_cdf\n");
    for (k, z) in sorted.iter().enumerate() {
        qq.push_str(&format!("{}\t{}\t{}\n", fmt_f64(*z), fmt_f64((k + 1) as f64 / reps as f64), fmt_f64(normal_cdf(*z))));
    }
    out.write("clt.csv", &summary)?;
    out.write("clt_sums.tsv", &qq)
}

fn cmd_lln(p: &Params, out: &Output) -> CliResult<()> {
    let ladder: Vec<usize> = p.list("ladder", "comma-separated integers")?;
    let reps = p.usize("reps")?;
    let seed = p.seed()?;
    let model = p.required("model")?;
    let result = if model == "shock" {
        let nm = noise(p)?;
        run_lln(&ladder, reps, seed, |n| Ok(CommonShock { n, noise: nm.clone() }))?
    } else {
        let deg = p.f64("deg")?;
        let (lk, nm, lambda) = (link(p.required("link")?)?, noise(p)?, p.f64("lambda")?);
        run_lln(&ladder, reps, seed, |n| {
            let fam = family(p, n).map_err(|e| match e {
                CliError::Core(e) => e,
                other => Error::Parameter(other.to_string()),
            })?;
            let g = fam.draw(n, deg, network_streams(seed, n, deg, 0))?;
            SarSolver::new(&SarSpec::centered(row_normalize(&g), lk.clone(), lambda, nm.clone())?)
        })?
    };
    let mut s = String::from("n,reps,q95,std_error,verdict\n");
    let verdict = if result.pass { "pass" } else { "fail" };
    for r in &result.rungs {
        s.push_str(&csv_row(&[r.n.to_string(), reps.to_string(), fmt_f64(r.quantile), fmt_f64(r.std_error), verdict.into()]));
    }
    out.write("lln.csv", &s)
}

fn cmd_tail(p: &Params, out: &Output) -> CliResult<()> {
    let (w, _) = network(p)?;
    let spec = process(p, w)?;
    let nu = match p.parse_opt::<f64>("nu", "a number")? {
        Some(v) => v,
        None => spec.noise().moment_growth().ok_or_else(|| {
            CliError::Core(Error::Capability(format!("no default growth order for {} noise; pass --nu", spec.noise().name())))
        })?,
    };
    let pgrid: Vec<f64> = p.list("pgrid", "comma-separated numbers")?;
    let params = concentration_params(&spec, nu, if pgrid.is_empty() { &DEFAULT_P_GRID } else { &pgrid })?;
    let grid: Option<Vec<f64>> = match p.raw("grid") {
        Some(_) => Some(p.list("grid", "comma-separated numbers")?),
        None => None,
    };
    let r = run_tail(&spec, &params, grid.as_deref(), p.usize("reps")?, noise_streams(p)?)?;
    let mut curve = String::from("x,survival,count,bound_exponent\n");
    for pt in &r.points {
        curve.push_str(&csv_row(&[fmt_f64(pt.x), fmt_f64(pt.survival), pt.count.to_string(), fmt_f64(pt.bound_exponent)]));
    }
    let fit = format!(
        "nu,alpha,gamma0,rate,slope,threshold,r_squared,truncated,pass\n{}",
        csv_row(&[
            fmt_f64(params.nu),
            fmt_f64(params.alpha),
            fmt_f64(params.gamma0),
            fmt_f64(params.rate()),
            fmt_f64(r.slope),
            fmt_f64(r.threshold),
            fmt_f64(r.r_squared),
            r.truncated.to_string(),
            r.pass.to_string(),
        ])
    );
    out.write("tail.csv", &curve)?;
    out.write("tail_fit.csv", &fit)
}

fn cmd_ingest(p: &Params, out: &Output) -> CliResult<()> {
    let format: InputFormat = p.parse("format", "binary, weighted, fcap or dense")?;
    let normalize: bool = p.parse("normalize", "true or false")?;
    let raw = ingest(Path::new(p.required("input")?), format)?;
    let w = if normalize { raw.normalize() } else { raw };
    out.write("weights.csv", &format_dense(&w.to_dense()))?;
    let summary = format!(
        "n,nonzeros,isolated,normalized\n{},{},{},{}\n",
        w.n(),
        w.nnz(),
        w.isolated().len(),
        w.is_normalized()
    );
    out.write("ingest.csv", &summary)
}
