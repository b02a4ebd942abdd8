//! File formats: whitespace edge lists and dense CSV matrices.
//!
//! Edge lists hold one edge per line as two whitespace-separated labels;
//! further columns (weights, timestamps) are ignored, and lines starting
//! with `#` or `%` are comments. Edges are undirected: reversed and repeated
//! edges collapse and self-loops are dropped.
//!
//! Dense matrices are written as a first line holding `N` followed by `N`
//! comma-separated rows.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::netcore::{numerical_rank, AdjacencyMatrix, LabelMap};
use crate::Matrix;

/// Descriptive statistics of a loaded network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSummary {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub average_degree: f64,
    pub numerical_rank: Option<f64>,
}

impl GraphSummary {
    pub fn of(a: &AdjacencyMatrix) -> Self {
        Self {
            n_nodes: a.n_nodes(),
            n_edges: a.n_edges(),
            average_degree: a.average_degree(),
            numerical_rank: numerical_rank(a).ok(),
        }
    }
}

/// A network read from an edge list, with its label map.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub adjacency: AdjacencyMatrix,
    pub labels: LabelMap,
}

impl LoadedGraph {
    pub fn summary(&self) -> GraphSummary {
        GraphSummary::of(&self.adjacency)
    }
}

/// Reads an edge list file. Labels get contiguous ids in order of first
/// appearance.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Ingestion {
        path: path.to_owned(),
        line: 0,
        message: e.to_string(),
    })?;
    parse_edge_list(BufReader::new(file), path)
}

pub fn parse_edge_list(reader: impl BufRead, path: &Path) -> Result<LoadedGraph> {
    let ingest = |line: usize, message: String| Error::Ingestion {
        path: path.to_owned(),
        line,
        message,
    };
    let mut labels = LabelMap::new();
    let mut edges = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(|e| ingest(line_no, e.to_string()))?;
        let trimmed = line.trim();
        if edges.is_empty() && labels.is_empty() {
            // Our own writer's header: keep ids 0..N-1, isolated nodes included.
            if let Some(n) = declared_nodes(trimmed) {
                for i in 0..n {
                    labels.intern(&i.to_string());
                }
                continue;
            }
        }
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(u), Some(v)) = (fields.next(), fields.next()) else {
            return Err(ingest(line_no, format!("expected two node labels, got `{trimmed}`")));
        };
        let (u, v) = (labels.intern(u), labels.intern(v));
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(ingest(0, "no edges found".into()));
    }
    let adjacency = AdjacencyMatrix::from_edges(labels.len(), edges)?;
    Ok(LoadedGraph { adjacency, labels })
}

fn declared_nodes(line: &str) -> Option<usize> {
    let mut words = line.strip_prefix('#')?.split_whitespace();
    match (words.next(), words.next()) {
        (Some("nodes"), Some(n)) => n.parse().ok(),
        _ => None,
    }
}

/// Writes undirected edges `i j` with `i < j`, using node ids as labels.
/// The header line records `N`, so isolated nodes survive a round trip.
pub fn write_edge_list(a: &AdjacencyMatrix, mut out: impl Write) -> Result<()> {
    writeln!(out, "# nodes {} edges {}", a.n_nodes(), a.n_edges())?;
    for (i, j) in a.edges() {
        writeln!(out, "{i} {j}")?;
    }
    Ok(())
}

/// Writes a dense matrix: `N` on the first line, then comma-separated rows.
/// Values use the shortest round-trip representation.
pub fn write_matrix_csv(m: &Matrix, out: impl Write) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{}", m.nrows())?;
    let mut line = String::new();
    for i in 0..m.nrows() {
        line.clear();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&m[(i, j)].to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::Ingestion {
            path: path.to_owned(),
            line: 0,
            message: e.to_string(),
        })?;
    parse_matrix_csv(&text, path)
}

pub fn parse_matrix_csv(text: &str, path: &Path) -> Result<Matrix> {
    let ingest = |line: usize, message: String| Error::Ingestion {
        path: path.to_owned(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let n: usize = match lines.next() {
        Some((_, header)) => header
            .trim()
            .parse()
            .map_err(|_| ingest(1, format!("header must be the matrix size, got `{header}`")))?,
        None => return Err(ingest(1, "empty matrix file".into())),
    };
    let mut m = Matrix::zeros(n, n);
    let mut rows = 0;
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if rows == n {
            return Err(ingest(k + 1, format!("more than {n} rows")));
        }
        let mut cols = 0;
        for field in line.split(',') {
            if cols == n {
                return Err(ingest(k + 1, format!("more than {n} columns")));
            }
            m[(rows, cols)] = field
                .trim()
                .parse()
                .map_err(|_| ingest(k + 1, format!("bad number `{field}`")))?;
            cols += 1;
        }
        if cols != n {
            return Err(ingest(k + 1, format!("expected {n} columns, got {cols}")));
        }
        rows += 1;
    }
    if rows != n {
        return Err(ingest(text.lines().count(), format!("expected {n} rows, got {rows}")));
    }
    Ok(m)
}

/// Reads an adjacency matrix from either a dense CSV (`.csv`) or an edge
/// list (anything else).
pub fn load_adjacency(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "csv") {
        let m = read_matrix_csv(path)?;
        let adjacency = AdjacencyMatrix::new(m).map_err(|e| Error::Ingestion {
            path: path.to_owned(),
            line: 0,
            message: e.to_string(),
        })?;
        let mut labels = LabelMap::new();
        for i in 0..adjacency.n_nodes() {
            labels.intern(&i.to_string());
        }
        Ok(LoadedGraph { adjacency, labels })
    } else {
        load_edge_list(path)
    }
}
