use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::AttributedGraph;
use crate::error::{Error, Result};

/// Loads a whitespace-separated `src dst [weight]` edge list.
///
/// `n` is one past the largest node id. Blank lines and lines starting with
/// `#` are skipped. When `weighted` is false a third column is rejected.
pub fn load_edge_list(path: &Path, directed: bool, weighted: bool) -> Result<AttributedGraph> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Missing {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(&text, path, directed, weighted)
}

pub fn parse_edge_list(
    text: &str,
    origin: &Path,
    directed: bool,
    weighted: bool,
) -> Result<AttributedGraph> {
    let err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        msg,
    };
    let mut edges = Vec::new();
    let mut max_id = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let max_fields = if weighted { 3 } else { 2 };
        if fields.len() < 2 || fields.len() > max_fields {
            return Err(err(
                lineno,
                format!("expected {max_fields} fields at most, got {}", fields.len()),
            ));
        }
        let id = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(lineno, format!("invalid node id {s:?}")))
        };
        let (src, dst) = (id(fields[0])?, id(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => {
                let w: f64 = s
                    .parse()
                    .map_err(|_| err(lineno, format!("invalid weight {s:?}")))?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(err(lineno, format!("weight must be positive, got {w}")));
                }
                w
            }
            None => 1.0,
        };
        max_id = max_id.max(Some(src.max(dst)));
        edges.push((src, dst, w));
    }
    let n = max_id.map_or(0, |m| m + 1);
    if n == 0 {
        return Err(err(0, "no edges".into()));
    }
    AttributedGraph::from_edges(n, edges, directed)
}

/// Serializes each edge once (`i <= j` for undirected graphs) with 17 significant digits.
pub fn write_edge_list(graph: &AttributedGraph) -> String {
    let mut out = String::new();
    for (i, j, w) in graph.edges() {
        let _ = writeln!(out, "{i} {j} {w:.16e}");
    }
    out
}
