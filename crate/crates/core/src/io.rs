//! File formats: edge lists, coloring files, sweep rows and run manifests.
//!
//! Edge list: one `u v` pair of integer labels per line, whitespace separated.
//! Lines starting with `#` or `%` are comments. A `# nodes: N` comment (as
//! written by [`write_edge_list`]) declares the node count so that isolated
//! nodes survive a round trip.
//!
//! Coloring: one `node color` pair per line, with an optional `# q: Q` header.
//!
//! Rows: CSV with the fixed header [`ROW_CSV_HEADER`], or a JSON array of the
//! same records.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coloring::Coloring;
use crate::error::{Error, Result};
use crate::experiments::SweepRow;
use crate::graph::{largest_connected_component, Graph, NodeId};

/// How integer labels in an edge list become node ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexBase {
    /// Sorted distinct labels are mapped to `0..n`.
    #[default]
    Auto,
    /// Node id = label.
    Zero,
    /// Node id = label - 1.
    One,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub drop_self_loops: bool,
    pub dedup: bool,
    pub take_largest_component: bool,
    pub index_base: IndexBase,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            drop_self_loops: true,
            dedup: true,
            take_largest_component: false,
            index_base: IndexBase::Auto,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// Original label of every node id.
    pub labels: Vec<i64>,
    /// Smallest label in the file; 0 or 1 for the usual conventions.
    pub detected_base: i64,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

fn read_lines(path: &Path) -> Result<impl Iterator<Item = (usize, Result<String>)> + '_> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .map(move |(i, l)| (i + 1, l.map_err(|e| Error::io(path, e)))))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_pair(path: &Path, line_no: usize, line: &str) -> Result<(i64, i64)> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != 2 {
        return Err(parse_error(
            path,
            line_no,
            format!("expected two integers, found {} tokens", tokens.len()),
        ));
    }
    let parse = |t: &str| {
        t.parse::<i64>()
            .map_err(|_| parse_error(path, line_no, format!("{t:?} is not an integer")))
    };
    Ok((parse(tokens[0])?, parse(tokens[1])?))
}

/// Value of a `# key: value` comment, if `line` is one.
fn directive<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix(key)?.trim_start();
    Some(rest.strip_prefix(':')?.trim())
}

fn is_comment(line: &str) -> bool {
    line.starts_with('#') || line.starts_with('%')
}

pub fn load_edge_list(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let mut pairs = Vec::new();
    let mut declared_nodes: Option<usize> = None;
    for (line_no, line) in read_lines(path)? {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if is_comment(line) {
            if let Some(v) = directive(line, "nodes") {
                declared_nodes = Some(v.parse().map_err(|_| {
                    parse_error(path, line_no, format!("bad node count {v:?}"))
                })?);
            }
            continue;
        }
        pairs.push((line_no, parse_pair(path, line_no, line)?));
    }
    if pairs.is_empty() && declared_nodes.unwrap_or(0) == 0 {
        return Err(Error::validation(format!("{}: no edges", path.display())));
    }

    let min_label = pairs.iter().map(|(_, (u, v))| *u.min(v)).min().unwrap_or(0);
    let max_label = pairs.iter().map(|(_, (u, v))| *u.max(v)).max().unwrap_or(-1);

    // Explicit base, or a declared node count covering every label, keeps
    // labels as ids; otherwise distinct labels are packed densely.
    let offset = match opts.index_base {
        IndexBase::Zero => Some(0),
        IndexBase::One => Some(1),
        IndexBase::Auto => declared_nodes
            .filter(|&n| min_label >= 0 && max_label < n as i64)
            .map(|_| 0),
    };
    let labels: Vec<i64> = match offset {
        Some(base) => {
            if let Some(&(line_no, _)) = pairs.iter().find(|(_, (u, v))| *u.min(v) < base) {
                return Err(parse_error(path, line_no, format!("label below index base {base}")));
            }
            let n = declared_nodes
                .unwrap_or(0)
                .max((max_label - base + 1).max(0) as usize);
            (0..n as i64).map(|i| i + base).collect()
        }
        None => pairs
            .iter()
            .flat_map(|(_, (u, v))| [*u, *v])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let id_of = |label: i64| -> NodeId {
        match offset {
            Some(base) => (label - base) as usize,
            None => labels.binary_search(&label).expect("label collected"),
        }
    };

    let n = labels.len();
    let mut adjacency: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut self_loops = 0;
    for &(line_no, (a, b)) in &pairs {
        if a == b {
            if opts.drop_self_loops {
                self_loops += 1;
                continue;
            }
            return Err(parse_error(path, line_no, format!("self-loop on {a}")));
        }
        let (u, v) = (id_of(a), id_of(b));
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    let raw_edges = pairs.len() - self_loops;
    let graph = Graph::from_raw_adjacency(adjacency);
    let duplicates = raw_edges - graph.edge_count();
    if duplicates > 0 && !opts.dedup {
        return Err(Error::validation(format!(
            "{}: {duplicates} duplicate edges",
            path.display()
        )));
    }

    let detected_base = min_label;
    let (graph, labels) = if opts.take_largest_component {
        let (lcc, mapping) = largest_connected_component(&graph)?;
        let mut kept = vec![0; lcc.node_count()];
        for (old, new) in mapping.iter().enumerate() {
            if let Some(new) = *new {
                kept[new] = labels[old];
            }
        }
        (lcc, kept)
    } else {
        (graph, labels)
    };

    Ok(LoadedGraph {
        graph,
        labels,
        detected_base,
        self_loops_dropped: self_loops,
        duplicates_dropped: duplicates,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes `# nodes: n`, `# edges: m`, then one `u v` line per edge (u < v).
pub fn write_edge_list_to(g: &Graph, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "# nodes: {}", g.node_count())?;
    writeln!(out, "# edges: {}", g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()
}

pub fn write_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_edge_list_to(g, create(path)?).map_err(|e| Error::io(path, e))
}

pub fn write_coloring_to(col: &Coloring, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "# q: {}", col.q())?;
    for (u, c) in col.as_slice().iter().enumerate() {
        writeln!(out, "{u} {c}")?;
    }
    out.flush()
}

pub fn write_coloring(col: &Coloring, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_coloring_to(col, create(path)?).map_err(|e| Error::io(path, e))
}

/// Reads a coloring file. Every node `0..n` must appear exactly once. Without
/// a `# q:` header, q is one more than the largest color.
pub fn read_coloring(path: impl AsRef<Path>) -> Result<Coloring> {
    let path = path.as_ref();
    let mut q: Option<usize> = None;
    let mut entries: Vec<(usize, usize, usize)> = Vec::new();
    for (line_no, line) in read_lines(path)? {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if is_comment(line) {
            if let Some(v) = directive(line, "q") {
                q = Some(v.parse().map_err(|_| parse_error(path, line_no, format!("bad q {v:?}")))?);
            }
            continue;
        }
        let (u, c) = parse_pair(path, line_no, line)?;
        if u < 0 || c < 0 {
            return Err(parse_error(path, line_no, "negative node or color"));
        }
        entries.push((line_no, u as usize, c as usize));
    }
    let n = entries.len();
    let mut colors = vec![usize::MAX; n];
    for &(line_no, u, c) in &entries {
        if u >= n {
            return Err(parse_error(path, line_no, format!("node {u} out of range for {n} nodes")));
        }
        if colors[u] != usize::MAX {
            return Err(parse_error(path, line_no, format!("node {u} listed twice")));
        }
        colors[u] = c;
    }
    let q = q.unwrap_or_else(|| colors.iter().max().map_or(1, |m| m + 1));
    Coloring::new(colors, q)
}

pub const ROW_CSV_HEADER: [&str; 11] = [
    "scheme",
    "q",
    "beta",
    "run",
    "seed",
    "f_d",
    "r_max",
    "defective_edges",
    "max_defective_degree",
    "sweeps",
    "terminated_by",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for RowFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(RowFormat::Csv),
            "json" => Ok(RowFormat::Json),
            other => Err(Error::validation(format!("unknown format {other:?}"))),
        }
    }
}

/// `%.9g`-style formatting: 9 significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-4, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn row_record(r: &SweepRow) -> [String; 11] {
    [
        r.scheme.to_string(),
        r.q.to_string(),
        r.beta.map(format_sig9).unwrap_or_default(),
        r.run.to_string(),
        r.seed.to_string(),
        format_sig9(r.f_d),
        r.r_max.to_string(),
        r.defective_edges.to_string(),
        r.max_defective_degree.to_string(),
        r.sweeps.to_string(),
        r.terminated_by.map(|t| t.to_string()).unwrap_or_default(),
    ]
}

pub fn write_rows_to(rows: &[SweepRow], format: RowFormat, out: impl Write) -> Result<()> {
    match format {
        RowFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(ROW_CSV_HEADER)?;
            for r in rows {
                w.write_record(row_record(r))?;
            }
            w.flush().map_err(|e| Error::io("<csv>", e))?;
        }
        RowFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out).map_err(|e| Error::io("<json>", e))?;
        }
    }
    Ok(())
}

pub fn write_rows(rows: &[SweepRow], format: RowFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_rows_to(rows, format, create(path)?).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_rows_json(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn read_rows_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ROW_CSV_HEADER {
        return Err(parse_error(path, 1, "unexpected CSV header"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let num = |k: usize| -> Result<u64> {
            field(k)
                .parse()
                .map_err(|_| parse_error(path, line, format!("bad {} {:?}", ROW_CSV_HEADER[k], field(k))))
        };
        let float = |k: usize| -> Result<f64> {
            field(k)
                .parse()
                .map_err(|_| parse_error(path, line, format!("bad {} {:?}", ROW_CSV_HEADER[k], field(k))))
        };
        rows.push(SweepRow {
            scheme: field(0).parse()?,
            q: num(1)? as usize,
            beta: if field(2).is_empty() { None } else { Some(float(2)?) },
            run: num(3)? as usize,
            seed: num(4)?,
            f_d: float(5)?,
            r_max: num(6)? as usize,
            defective_edges: num(7)? as usize,
            max_defective_degree: num(8)? as usize,
            sweeps: num(9)? as usize,
            terminated_by: if field(10).is_empty() { None } else { Some(field(10).parse()?) },
        });
    }
    Ok(rows)
}

/// Sidecar describing how an output file was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub base_seed: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, base_seed: u64, config: serde_json::Value) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args,
            base_seed,
            timestamp,
            config,
        }
    }

    /// `<data file>.manifest.json`
    pub fn sidecar_path(data: &Path) -> PathBuf {
        let mut s = data.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }
}
