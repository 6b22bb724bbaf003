//! Text formats: TAB-separated edge lists and holdings tables, dense CSV
//! matrices and long-form delta tables.
//!
//! Node ids in files are 1-based. Floating-point values are written with 17
//! significant digits, so a write followed by a read gives back the same
//! bits.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use netfdm_core::fdm::DeltaMatrix;
use netfdm_core::linalg::DenseMatrix;
use netfdm_core::netgen::{fcap_graph, Graph, Holding, Provenance, WeightsMatrix};
use netfdm_core::Error;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSchema {
    /// `i<TAB>j`, unit weights.
    Binary,
    /// `i<TAB>j<TAB>weight`.
    Weighted,
    /// Holdings rows `fund<TAB>stock<TAB>shares<TAB>price<TAB>shares_outstanding`.
    Fcap,
}

impl std::str::FromStr for EdgeSchema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "binary" => Ok(Self::Binary),
            "weighted" => Ok(Self::Weighted),
            "fcap" => Ok(Self::Fcap),
            other => Err(Error::Parameter(format!("unknown edge-list schema '{other}'"))),
        }
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Data lines of a text table with their 1-based line numbers, plus the
/// value of a `# nodes=N` header if present.
struct Records {
    nodes: Option<usize>,
    rows: Vec<(usize, Vec<String>)>,
}

fn records(reader: impl Read, delimiter: char) -> Result<Records, Error> {
    let mut nodes = None;
    let mut rows = Vec::new();
    for (k, line) in BufReader::new(reader).lines().enumerate() {
        let number = k + 1;
        let line = line.map_err(|e| parse_err(number, e.to_string()))?;
        let trimmed = line.trim_end_matches('\r');
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("nodes=") {
                let n = value.trim().parse().map_err(|_| parse_err(number, format!("bad node count '{value}'")))?;
                nodes = Some(n);
            }
            continue;
        }
        if trimmed.trim().is_empty() {
            continue;
        }
        rows.push((number, trimmed.split(delimiter).map(|f| f.trim().to_string()).collect()));
    }
    Ok(Records { nodes, rows })
}

fn node_id(field: &str, line: usize) -> Result<usize, Error> {
    match field.parse::<usize>() {
        Ok(0) | Err(_) => Err(parse_err(line, format!("node id '{field}' is not a positive integer"))),
        Ok(v) => Ok(v - 1),
    }
}

fn number(field: &str, line: usize, what: &str) -> Result<f64, Error> {
    field.parse::<f64>().map_err(|_| parse_err(line, format!("{what} '{field}' is not a number")))
}

fn resolve_nodes(header: Option<usize>, max_id: usize, line_of_max: usize) -> Result<usize, Error> {
    match header {
        Some(n) if max_id >= n => Err(parse_err(line_of_max, format!("node {} exceeds declared count {n}", max_id + 1))),
        Some(n) => Ok(n),
        None => Ok(max_id + 1),
    }
}

/// Reads a binary or weighted edge list.
pub fn read_edge_list(reader: impl Read, schema: EdgeSchema) -> Result<Graph, Error> {
    let rec = records(reader, '\t')?;
    let want = match schema {
        EdgeSchema::Binary => 2,
        EdgeSchema::Weighted => 3,
        EdgeSchema::Fcap => return Err(Error::Parameter("fcap input is a holdings table; use read_holdings".into())),
    };
    let mut edges = Vec::with_capacity(rec.rows.len());
    let (mut max_id, mut max_line) = (0usize, 0usize);
    for (line, fields) in &rec.rows {
        if fields.len() != want {
            return Err(parse_err(*line, format!("expected {want} tab-separated fields, found {}", fields.len())));
        }
        let (a, b) = (node_id(&fields[0], *line)?, node_id(&fields[1], *line)?);
        let w = if want == 3 { number(&fields[2], *line, "weight")? } else { 1.0 };
        if a.max(b) >= max_id {
            (max_id, max_line) = (a.max(b), *line);
        }
        edges.push((*line, a, b, w));
    }
    if edges.is_empty() && rec.nodes.is_none() {
        return Err(Error::Data("edge list has no edges and no '# nodes=' header".into()));
    }
    let n = resolve_nodes(rec.nodes, max_id, max_line)?;
    let mut g = Graph::new(n);
    for (line, a, b, w) in edges {
        if a == b {
            return Err(Error::Data(format!("line {line}: self-loop at node {}", a + 1)));
        }
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::Data(format!("line {line}: weight {w} is not a nonnegative number")));
        }
        if g.has_edge(a, b) {
            return Err(Error::Data(format!("line {line}: duplicate pair ({}, {})", a + 1, b + 1)));
        }
        g.add_edge(a, b, w)?;
    }
    Ok(g)
}

/// Reads a holdings table; returns the node count and zero-based holdings.
pub fn read_holdings(reader: impl Read) -> Result<(usize, Vec<Holding>), Error> {
    let rec = records(reader, '\t')?;
    let mut out = Vec::with_capacity(rec.rows.len());
    let (mut max_id, mut max_line) = (0usize, 0usize);
    for (line, f) in &rec.rows {
        if f.len() != 5 {
            return Err(parse_err(*line, format!("expected 5 tab-separated fields, found {}", f.len())));
        }
        let fund = f[0].parse::<u64>().map_err(|_| parse_err(*line, format!("fund id '{}' is not an integer", f[0])))?;
        let stock = node_id(&f[1], *line)?;
        if stock >= max_id {
            (max_id, max_line) = (stock, *line);
        }
        out.push(Holding {
            fund,
            stock,
            shares: number(&f[2], *line, "shares")?,
            price: number(&f[3], *line, "price")?,
            shares_outstanding: number(&f[4], *line, "shares outstanding")?,
        });
    }
    if out.is_empty() {
        return Err(Error::Data("holdings table is empty".into()));
    }
    Ok((resolve_nodes(rec.nodes, max_id, max_line)?, out))
}

/// Edge-list text; weights are written only for weighted graphs.
pub fn format_edge_list(g: &Graph) -> String {
    let mut s = format!("# nodes={}\n", g.n());
    let weighted = g.is_weighted();
    for (a, b, w) in g.edges() {
        if weighted {
            let _ = writeln!(s, "{}\t{}\t{}", a + 1, b + 1, fmt_f64(w));
        } else {
            let _ = writeln!(s, "{}\t{}", a + 1, b + 1);
        }
    }
    s
}

/// Row-major CSV with one matrix row per line.
pub fn format_dense(m: &DenseMatrix) -> String {
    let mut s = String::with_capacity(m.rows() * m.cols() * 24);
    for r in 0..m.rows() {
        for (c, v) in m.row(r).iter().enumerate() {
            if c > 0 {
                s.push(',');
            }
            s.push_str(&fmt_f64(*v));
        }
        s.push('\n');
    }
    s
}

pub fn read_dense(reader: impl Read) -> Result<DenseMatrix, Error> {
    let rec = records(reader, ',')?;
    let cols = rec.rows.first().map(|r| r.1.len()).ok_or_else(|| Error::Data("empty matrix file".into()))?;
    let mut values = Vec::with_capacity(rec.rows.len() * cols);
    for (line, fields) in &rec.rows {
        if fields.len() != cols {
            return Err(parse_err(*line, format!("expected {cols} columns, found {}", fields.len())));
        }
        for f in fields {
            values.push(number(f, *line, "entry")?);
        }
    }
    DenseMatrix::from_row_major(rec.rows.len(), cols, values)
}

/// Long-form delta table: `j,i,delta,std_error` with 1-based indices. Every
/// entry is listed for full matrices, only the targets otherwise.
pub fn format_delta(d: &DeltaMatrix) -> String {
    let mut s = String::from("j,i,delta,std_error\n");
    let pairs: Vec<(usize, usize)> = match d.targets() {
        Some(t) => t.to_vec(),
        None => (0..d.n()).flat_map(|j| (0..d.n()).map(move |i| (j, i))).collect(),
    };
    for (j, i) in pairs {
        let se = d.std_error(j, i).map(fmt_f64).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{se}", j + 1, i + 1, fmt_f64(d.get(j, i)));
    }
    s
}

fn open(path: &Path) -> CliResult<fs::File> {
    fs::File::open(path).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Edges(EdgeSchema),
    /// A dense CSV weights matrix.
    Dense,
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "dense" {
            Ok(Self::Dense)
        } else {
            s.parse().map(Self::Edges)
        }
    }
}

/// Raw (unnormalized) weights from a file.
pub fn ingest(path: &Path, format: InputFormat) -> CliResult<WeightsMatrix> {
    let file = open(path)?;
    let source = format!("file:{}", path.display());
    let w = match format {
        InputFormat::Edges(EdgeSchema::Fcap) => {
            let (n, holdings) = read_holdings(file)?;
            let g = fcap_graph(n, &holdings)?;
            WeightsMatrix::from_graph(&g.with_provenance(Provenance::new(source).param("schema", "fcap")))
        }
        InputFormat::Edges(schema) => {
            let g = read_edge_list(file, schema)?;
            let g = g.with_provenance(Provenance::new(source).param("schema", format!("{schema:?}").to_lowercase()));
            WeightsMatrix::from_graph(&g)
        }
        InputFormat::Dense => WeightsMatrix::from_dense(read_dense(file)?, Provenance::new(source).param("schema", "dense"))?,
    };
    Ok(w)
}
