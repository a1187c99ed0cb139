//! Readers and writers for the on-disk dataset layouts.
//!
//! * TU flat files: `DS_A.txt` (`i, j`, 1-based, both directions),
//!   `DS_graph_indicator.txt`, `DS_graph_labels.txt`, optional
//!   `DS_node_labels.txt` and `DS_node_attributes.txt`.
//! * Node-task directories: `edges.csv`, `labels.csv`, optional
//!   `features.csv` and `groups.csv`, no headers, 0-based ids.
//! * Embedding CSV with header `id,e0,...,e{d-1}`.
//! * Single-graph text: `n m`, then `m` lines `u v`, then optionally
//!   `labels: l0 ... l{n-1}`.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::embedding::EmbeddingTable;
use crate::error::{AuditError, Result};
use crate::graph::{normalize_labels, Dataset, Graph, Level, NodeFeatures};
use crate::scalar::Scalar;

/// Source of initial node colors for TU datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorSource {
    /// Degree for IMDB-*, otherwise node labels, then attributes, then uniform.
    #[default]
    Auto,
    Labels,
    Attributes,
    Degree,
    Uniform,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub color_source: ColorSource,
    /// Drop duplicate edges instead of rejecting the file.
    pub dedupe: bool,
}

/// Diagnostics collected while loading.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub duplicate_edges: usize,
    pub color_source: Option<ColorSource>,
}

struct Lines {
    path: PathBuf,
    text: String,
}

impl Lines {
    fn read(path: PathBuf) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| AuditError::io(&path, e))?;
        Ok(Lines { path, text })
    }

    /// Non-blank lines with their 1-based line numbers.
    fn iter(&self) -> impl Iterator<Item = (usize, &str)> {
        self.text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
    }

    fn err(&self, line: usize, message: impl Into<String>) -> AuditError {
        AuditError::parse(&self.path, line, message)
    }

    fn parse_each<T>(&self, mut f: impl FnMut(usize, &str) -> Result<T>) -> Result<Vec<T>> {
        self.iter().map(|(n, l)| f(n, l)).collect()
    }

    fn parse_one<T: std::str::FromStr>(&self, line: usize, field: &str) -> Result<T> {
        field
            .trim()
            .parse()
            .map_err(|_| self.err(line, format!("cannot parse {:?}", field.trim())))
    }
}

fn optional(path: PathBuf) -> Result<Option<Lines>> {
    if path.exists() {
        Lines::read(path).map(Some)
    } else {
        Ok(None)
    }
}

/// Loads a TU dataset with default options.
pub fn load_tudataset(dir: &Path, name: &str) -> Result<Dataset> {
    load_tudataset_with(dir, name, &IngestOptions::default()).map(|(ds, _)| ds)
}

pub fn load_tudataset_with(
    dir: &Path,
    name: &str,
    opts: &IngestOptions,
) -> Result<(Dataset, IngestReport)> {
    let file = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));
    let indicator = Lines::read(file("graph_indicator"))?;
    let graph_labels = Lines::read(file("graph_labels"))?;
    let adjacency = Lines::read(file("A"))?;
    let node_labels = optional(file("node_labels"))?;
    let node_attributes = optional(file("node_attributes"))?;

    let raw_graph_labels: Vec<i64> =
        graph_labels.parse_each(|n, l| graph_labels.parse_one(n, l))?;
    let num_graphs = raw_graph_labels.len();

    let graph_of: Vec<usize> = indicator.parse_each(|n, l| {
        let id: usize = indicator.parse_one(n, l)?;
        if id == 0 || id > num_graphs {
            return Err(indicator.err(n, format!("graph id {id} outside 1..={num_graphs}")));
        }
        Ok(id - 1)
    })?;
    if let Some(w) = graph_of.windows(2).position(|w| w[1] < w[0]) {
        return Err(AuditError::InvalidData(format!(
            "graph indicator is not sorted: node {} belongs to graph {} after graph {}",
            w + 2,
            graph_of[w + 1] + 1,
            graph_of[w] + 1
        )));
    }
    let num_nodes = graph_of.len();
    let mut first_node = vec![num_nodes; num_graphs + 1];
    let mut sizes = vec![0usize; num_graphs];
    for (v, &g) in graph_of.iter().enumerate().rev() {
        first_node[g] = v;
        sizes[g] += 1;
    }
    // graphs without nodes start where the next one starts
    for g in (0..num_graphs).rev() {
        if sizes[g] == 0 {
            first_node[g] = first_node[g + 1];
        }
    }

    let mut directed: HashSet<(usize, usize)> = HashSet::new();
    let mut duplicates = 0usize;
    let mut per_graph: Vec<Vec<(u32, u32)>> = vec![Vec::new(); num_graphs];
    for (n, line) in adjacency.iter() {
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| adjacency.err(n, "expected \"i, j\""))?;
        let i: usize = adjacency.parse_one(n, a)?;
        let j: usize = adjacency.parse_one(n, b)?;
        if i == 0 || j == 0 || i > num_nodes || j > num_nodes {
            return Err(adjacency.err(n, format!("node id outside 1..={num_nodes}")));
        }
        let (i, j) = (i - 1, j - 1);
        if i == j {
            return Err(adjacency.err(n, format!("self-loop on node {}", i + 1)));
        }
        if graph_of[i] != graph_of[j] {
            return Err(adjacency.err(
                n,
                format!(
                    "edge {}-{} crosses graphs {} and {}",
                    i + 1,
                    j + 1,
                    graph_of[i] + 1,
                    graph_of[j] + 1
                ),
            ));
        }
        if !directed.insert((i, j)) {
            if !opts.dedupe {
                return Err(adjacency.err(n, format!("duplicate edge {}, {}", i + 1, j + 1)));
            }
            duplicates += 1;
            continue;
        }
        if i < j {
            let g = graph_of[i];
            let base = first_node[g];
            per_graph[g].push(((i - base) as u32, (j - base) as u32));
        }
    }
    if let Some(&(i, j)) = directed
        .iter()
        .filter(|&&(i, j)| !directed.contains(&(j, i)))
        .min()
    {
        return Err(AuditError::InvalidData(format!(
            "asymmetric edge list: {}, {} present without {}, {}",
            i + 1,
            j + 1,
            j + 1,
            i + 1
        )));
    }

    let source = match opts.color_source {
        ColorSource::Auto if name.to_ascii_uppercase().starts_with("IMDB") => ColorSource::Degree,
        ColorSource::Auto if node_labels.is_some() => ColorSource::Labels,
        ColorSource::Auto if node_attributes.is_some() => ColorSource::Attributes,
        ColorSource::Auto => ColorSource::Uniform,
        other => other,
    };

    let mut labels_per_node: Option<Vec<u32>> = None;
    let mut attributes: Option<(usize, Vec<f64>)> = None;
    match source {
        ColorSource::Labels => {
            let lines = node_labels.ok_or_else(|| {
                AuditError::InvalidData(format!("{name}: node labels requested but absent"))
            })?;
            let raw: Vec<i64> = lines.parse_each(|n, l| {
                // multi-column label files: the first column is the label
                let first = l.split(',').next().unwrap_or(l);
                lines.parse_one(n, first)
            })?;
            if raw.len() != num_nodes {
                return Err(AuditError::InvalidData(format!(
                    "{} node labels for {num_nodes} nodes",
                    raw.len()
                )));
            }
            labels_per_node = Some(normalize_labels(&raw));
        }
        ColorSource::Attributes => {
            let lines = node_attributes.ok_or_else(|| {
                AuditError::InvalidData(format!("{name}: node attributes requested but absent"))
            })?;
            attributes = Some(parse_float_rows(&lines, num_nodes)?);
        }
        ColorSource::Degree | ColorSource::Uniform | ColorSource::Auto => {}
    }

    let mut graphs = Vec::with_capacity(num_graphs);
    let graph_labels = normalize_labels(&raw_graph_labels);
    for g in 0..num_graphs {
        let base = first_node[g];
        let n = sizes[g];
        let mut graph = Graph::new(n, per_graph[g].iter().copied())?;
        match source {
            ColorSource::Degree => {
                let deg = (0..n).map(|v| graph.degree(v) as u32).collect();
                graph = graph.with_node_labels(deg)?;
            }
            ColorSource::Labels => {
                let labels = labels_per_node.as_ref().expect("labels parsed");
                graph = graph.with_node_labels(labels[base..base + n].to_vec())?;
            }
            ColorSource::Attributes => {
                let (dim, values) = attributes.as_ref().expect("attributes parsed");
                let rows = values[base * dim..(base + n) * dim].to_vec();
                graph = graph.with_node_features(NodeFeatures::from_flat(*dim, rows)?)?;
            }
            _ => {}
        }
        graphs.push(graph.with_graph_label(graph_labels[g]));
    }
    let ds = Dataset::graph_level(name, graphs)?;
    Ok((
        ds,
        IngestReport {
            duplicate_edges: duplicates,
            color_source: Some(source),
        },
    ))
}

fn parse_float_rows(lines: &Lines, expected_rows: usize) -> Result<(usize, Vec<f64>)> {
    let mut dim = None;
    let mut values = Vec::new();
    let mut rows = 0;
    for (n, line) in lines.iter() {
        let before = values.len();
        for field in line.split(',') {
            values.push(lines.parse_one::<f64>(n, field)?);
        }
        let width = values.len() - before;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(lines.err(n, format!("row has {width} values, expected {d}")))
            }
            _ => {}
        }
        rows += 1;
    }
    if rows != expected_rows {
        return Err(AuditError::InvalidData(format!(
            "{}: {rows} rows for {expected_rows} nodes",
            lines.path.display()
        )));
    }
    Ok((dim.unwrap_or(0), values))
}

/// Writes a graph-level dataset in canonical TU form: edges in both
/// directions sorted by source then target, 0-based graph labels.
pub fn write_tudataset(ds: &Dataset, dir: &Path, name: &str) -> Result<()> {
    if ds.level() != Level::Graph {
        return Err(AuditError::InvalidArgument(
            "only graph-level datasets have a TU layout".into(),
        ));
    }
    std::fs::create_dir_all(dir).map_err(|e| AuditError::io(dir, e))?;
    let open = |suffix: &str| -> Result<(PathBuf, std::io::BufWriter<std::fs::File>)> {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        let f = std::fs::File::create(&path).map_err(|e| AuditError::io(&path, e))?;
        Ok((path, std::io::BufWriter::new(f)))
    };
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |e| AuditError::io(path, e)
    };

    let (pa, mut a) = open("A")?;
    let (pi, mut ind) = open("graph_indicator")?;
    let (pl, mut gl) = open("graph_labels")?;
    let mut base = 0usize;
    for (g, graph) in ds.graphs().iter().enumerate() {
        for v in 0..graph.num_nodes() {
            for &w in graph.neighbors(v) {
                writeln!(a, "{}, {}", base + v + 1, base + w as usize + 1).map_err(io(&pa))?;
            }
            writeln!(ind, "{}", g + 1).map_err(io(&pi))?;
        }
        let label = graph.graph_label().unwrap_or(0);
        writeln!(gl, "{label}").map_err(io(&pl))?;
        base += graph.num_nodes();
    }
    a.flush().map_err(io(&pa))?;
    ind.flush().map_err(io(&pi))?;
    gl.flush().map_err(io(&pl))?;

    if ds.graphs().iter().all(|g| g.node_labels().is_some()) && !ds.graphs().is_empty() {
        let (p, mut w) = open("node_labels")?;
        for graph in ds.graphs() {
            for l in graph.node_labels().unwrap() {
                writeln!(w, "{l}").map_err(io(&p))?;
            }
        }
        w.flush().map_err(io(&p))?;
    } else if ds.graphs().iter().all(|g| g.node_features().is_some()) && !ds.graphs().is_empty() {
        let (p, mut w) = open("node_attributes")?;
        for graph in ds.graphs() {
            let f = graph.node_features().unwrap();
            for v in 0..graph.num_nodes() {
                writeln!(w, "{}", join_floats(f.row(v))).map_err(io(&p))?;
            }
        }
        w.flush().map_err(io(&p))?;
    }
    Ok(())
}

fn join_floats(row: &[f64]) -> String {
    row.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Loads a node-task directory as a node-level dataset named after the directory.
pub fn load_node_task(dir: &Path) -> Result<Dataset> {
    load_node_task_with(dir, &IngestOptions::default()).map(|(ds, _)| ds)
}

pub fn load_node_task_with(dir: &Path, opts: &IngestOptions) -> Result<(Dataset, IngestReport)> {
    let labels = Lines::read(dir.join("labels.csv"))?;
    let raw_labels: Vec<i64> = labels.parse_each(|n, l| labels.parse_one(n, l))?;
    let num_nodes = raw_labels.len();

    let edges_file = Lines::read(dir.join("edges.csv"))?;
    let mut edges = Vec::new();
    for (n, line) in edges_file.iter() {
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| edges_file.err(n, "expected \"src,dst\""))?;
        let u: usize = edges_file.parse_one(n, a)?;
        let v: usize = edges_file.parse_one(n, b)?;
        if u >= num_nodes || v >= num_nodes {
            return Err(edges_file.err(n, format!("endpoint outside 0..{num_nodes}")));
        }
        if u == v {
            return Err(edges_file.err(n, format!("self-loop on node {u}")));
        }
        edges.push((u as u32, v as u32));
    }
    let (mut graph, duplicate_edges) = if opts.dedupe {
        Graph::new_dedup(num_nodes, edges)?
    } else {
        (Graph::new(num_nodes, edges)?, 0)
    };

    if let Some(lines) = optional(dir.join("features.csv"))? {
        let (dim, values) = parse_float_rows(&lines, num_nodes)?;
        graph = graph.with_node_features(NodeFeatures::from_flat(dim, values)?)?;
    }
    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let mut ds = Dataset::node_level(name, graph).with_labels(normalize_labels(&raw_labels))?;
    if let Some(lines) = optional(dir.join("groups.csv"))? {
        let raw: Vec<i64> = lines.parse_each(|n, l| lines.parse_one(n, l))?;
        ds = ds.with_groups(normalize_labels(&raw))?;
    }
    Ok((
        ds,
        IngestReport {
            duplicate_edges,
            color_source: None,
        },
    ))
}

/// Reads an embedding CSV with header `id,e0,...,e{d-1}`.
pub fn load_embeddings<F: Scalar>(file: &Path) -> Result<EmbeddingTable<F>> {
    let lines = Lines::read(file.to_path_buf())?;
    let mut it = lines.iter();
    let (hn, header) = it
        .next()
        .ok_or_else(|| lines.err(1, "empty embedding file"))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.first() != Some(&"id") || columns.len() < 2 {
        return Err(lines.err(hn, "header must be id,e0,...,e{d-1}"));
    }
    for (k, c) in columns[1..].iter().enumerate() {
        if *c != format!("e{k}") {
            return Err(lines.err(hn, format!("expected column e{k}, found {c:?}")));
        }
    }
    let dim = columns.len() - 1;
    let mut table = EmbeddingTable::new(dim);
    for (n, line) in it {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(lines.err(n, format!("{} fields, expected {}", fields.len(), dim + 1)));
        }
        let id: usize = lines.parse_one(n, fields[0])?;
        let vector = fields[1..]
            .iter()
            .map(|f| lines.parse_one::<f64>(n, f).map(F::lit))
            .collect::<Result<Vec<F>>>()?;
        table
            .insert(id, vector)
            .map_err(|e| lines.err(n, e.to_string()))?;
    }
    Ok(table)
}

/// Writes one graph in the single-graph text format.
pub fn write_single_graph<W: Write>(graph: &Graph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", graph.num_nodes(), graph.num_edges())?;
    for &(u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    if let Some(labels) = graph.node_labels() {
        let joined: Vec<String> = labels.iter().map(u32::to_string).collect();
        writeln!(out, "labels: {}", joined.join(" "))?;
    }
    out.flush()
}

/// Reads a graph in the single-graph text format.
pub fn load_single_graph(path: &Path) -> Result<Graph> {
    let lines = Lines::read(path.to_path_buf())?;
    let mut it = lines.iter();
    let (hn, header) = it.next().ok_or_else(|| lines.err(1, "empty graph file"))?;
    let mut parts = header.split_whitespace();
    let (Some(n), Some(m), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(lines.err(hn, "expected \"n m\""));
    };
    let n: usize = lines.parse_one(hn, n)?;
    let m: usize = lines.parse_one(hn, m)?;
    let mut edges = Vec::with_capacity(m);
    let mut labels = None;
    for (ln, line) in it {
        if let Some(rest) = line.strip_prefix("labels:") {
            let parsed = rest
                .split_whitespace()
                .map(|f| lines.parse_one::<u32>(ln, f))
                .collect::<Result<Vec<u32>>>()?;
            labels = Some(parsed);
            continue;
        }
        if labels.is_some() {
            return Err(lines.err(ln, "edge after labels line"));
        }
        let mut parts = line.split_whitespace();
        let (Some(u), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(lines.err(ln, "expected \"u v\""));
        };
        edges.push((lines.parse_one(ln, u)?, lines.parse_one(ln, v)?));
    }
    if edges.len() != m {
        return Err(AuditError::InvalidData(format!(
            "{}: header declares {m} edges, found {}",
            path.display(),
            edges.len()
        )));
    }
    let mut graph = Graph::new(n, edges)?;
    if let Some(labels) = labels {
        graph = graph.with_node_labels(labels)?;
    }
    Ok(graph)
}
