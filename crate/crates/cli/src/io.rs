//! Graph file formats and atomic output writing.

use std::fs;
use std::path::{Path, PathBuf};

use netshift_core::{Graph, Matrix};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    /// Matrix Market coordinate file.
    Mtx,
    /// Tab-separated 0-indexed edge list.
    Tsv,
}

impl GraphFormat {
    /// `.mtx` files are Matrix Market, everything else an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("mtx") => Self::Mtx,
            _ => Self::Tsv,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Mtx => "mtx",
            Self::Tsv => "tsv",
        }
    }
}

/// A parsed graph with the digest of the bytes it came from.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub path: PathBuf,
    pub sha256: String,
    pub graph: Graph,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load_graph(
    path: &Path,
    format: Option<GraphFormat>,
    n: Option<usize>,
) -> CliResult<LoadedGraph> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::input(format!("{} is not valid UTF-8", path.display())))?;
    let graph = match format.unwrap_or_else(|| GraphFormat::from_path(path)) {
        GraphFormat::Mtx => parse_matrix_market(text, n),
        GraphFormat::Tsv => parse_edge_list(text, n),
    }
    .map_err(|e| e.context(format!("reading {}", path.display())))?;
    Ok(LoadedGraph {
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
        graph,
    })
}

fn parse_index(tok: &str, line: usize) -> CliResult<usize> {
    tok.parse()
        .map_err(|_| CliError::input(format!("line {line}: expected a vertex index, got {tok:?}")))
}

/// Parses a Matrix Market `coordinate` file (`pattern`, `integer` or `real`;
/// `symmetric` or `general`). Nonzero entries become undirected edges.
pub fn parse_matrix_market(text: &str, n: Option<usize>) -> CliResult<Graph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::input("empty Matrix Market file"))?;
    let h: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(CliError::input(format!(
            "unsupported Matrix Market header {header:?}"
        )));
    }
    let valued = match h[3].as_str() {
        "pattern" => false,
        "integer" | "real" => true,
        other => {
            return Err(CliError::input(format!(
                "unsupported Matrix Market field {other:?}"
            )))
        }
    };
    if h[4] != "symmetric" && h[4] != "general" {
        return Err(CliError::input(format!(
            "unsupported Matrix Market symmetry {:?}",
            h[4]
        )));
    }
    let mut body = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let (size_no, size) = body
        .next()
        .ok_or_else(|| CliError::input("missing Matrix Market size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| parse_index(t, size_no + 1))
        .collect::<CliResult<_>>()?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(CliError::input(format!(
            "line {}: expected `rows cols entries`",
            size_no + 1
        )));
    };
    if rows != cols {
        return Err(CliError::input(format!(
            "adjacency matrix must be square, got {rows}x{cols}"
        )));
    }
    if let Some(n) = n {
        if n != rows {
            return Err(CliError::input(format!(
                "--n {n} disagrees with the {rows} vertices in the file"
            )));
        }
    }
    let mut edges = Vec::with_capacity(nnz);
    let mut seen = 0usize;
    for (no, line) in body {
        let no = no + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let want = if valued { 3 } else { 2 };
        if toks.len() != want {
            return Err(CliError::input(format!(
                "line {no}: expected {want} fields"
            )));
        }
        let (i, j) = (parse_index(toks[0], no)?, parse_index(toks[1], no)?);
        if i == 0 || j == 0 || i > rows || j > rows {
            return Err(CliError::input(format!(
                "line {no}: entry ({i}, {j}) outside 1..={rows}"
            )));
        }
        seen += 1;
        if valued {
            let v: f64 = toks[2]
                .parse()
                .map_err(|_| CliError::input(format!("line {no}: bad value {:?}", toks[2])))?;
            if v == 0.0 {
                continue;
            }
        }
        edges.push((i - 1, j - 1));
    }
    if seen != nnz {
        return Err(CliError::input(format!(
            "size line declares {nnz} entries, found {seen}"
        )));
    }
    Ok(Graph::from_edges(rows, edges)?)
}

/// Parses a tab-separated edge list `u<TAB>v` with 0-indexed vertices.
/// Lines starting with `#` are comments. Without `n`, the vertex count is one
/// more than the largest index.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> CliResult<Graph> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut edges = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::input(format!("malformed edge list: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(CliError::input(format!(
                "line {line}: expected 2 tab-separated fields, found {}",
                rec.len()
            )));
        }
        edges.push((
            parse_index(rec[0].trim(), line)?,
            parse_index(rec[1].trim(), line)?,
        ));
    }
    let n = match n {
        Some(n) => n,
        None => edges
            .iter()
            .map(|&(u, v)| u.max(v) + 1)
            .max()
            .ok_or_else(|| CliError::input("empty edge list; pass --n to give the vertex count"))?,
    };
    Ok(Graph::from_edges(n, edges)?)
}

pub fn write_matrix_market(g: &Graph) -> String {
    let edges = g.edges();
    let mut out = format!(
        "%%MatrixMarket matrix coordinate pattern symmetric\n{} {} {}\n",
        g.n(),
        g.n(),
        edges.len()
    );
    for (u, v) in edges {
        out.push_str(&format!("{} {}\n", v + 1, u + 1));
    }
    out
}

pub fn write_edge_list(g: &Graph) -> String {
    g.edges()
        .into_iter()
        .map(|(u, v)| format!("{u}\t{v}\n"))
        .collect()
}

pub fn write_graph(g: &Graph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Mtx => write_matrix_market(g),
        GraphFormat::Tsv => write_edge_list(g),
    }
}

/// CSV with a header row and one row per matrix row.
pub fn matrix_csv(header: &[String], m: &Matrix) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(internal)?;
    for r in 0..m.nrows() {
        w.write_record(m.row(r).iter().map(|v| v.to_string()))
            .map_err(internal)?;
    }
    w.into_inner().map_err(|e| internal(e.into_error()))
}

pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

pub fn internal(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Internal(e.into())
}

pub fn json_bytes(value: &impl serde::Serialize) -> CliResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(internal)?;
    v.push(b'\n');
    Ok(v)
}

/// Files produced by a command, written together once everything has been
/// computed.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file to a temporary name first and renames them into
    /// place only after all writes succeeded.
    pub fn commit(self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(dir)
            .map_err(|e| internal(anyhow::anyhow!("cannot create {}: {e}", dir.display())))?;
        let mut staged = Vec::new();
        let result = (|| {
            for (name, bytes) in &self.files {
                let tmp = dir.join(format!(".{name}.partial"));
                fs::write(&tmp, bytes).map_err(|e| {
                    internal(anyhow::anyhow!("cannot write {}: {e}", tmp.display()))
                })?;
                staged.push((tmp, dir.join(name)));
            }
            Ok(())
        })();
        if let Err(e) = result {
            for (tmp, _) in &staged {
                let _ = fs::remove_file(tmp);
            }
            return Err(e);
        }
        let mut done = Vec::new();
        for (tmp, dst) in staged {
            fs::rename(&tmp, &dst)
                .map_err(|e| internal(anyhow::anyhow!("cannot move {}: {e}", dst.display())))?;
            done.push(dst);
        }
        Ok(done)
    }
}
