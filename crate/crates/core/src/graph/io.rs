//! Dataset ingestion and emission.
//!
//! Formats:
//! - edges: text, one `u v` pair per line, 0-based decimal indices
//! - features: binary, magic `MLPI`, u32 LE version=1 / N / D, then N*D
//!   f32 LE values row-major; or a text fallback of comma-separated rows
//! - labels: text, one decimal class index per line
//! - splits: JSON object with `train` / `val` / `test` index arrays

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{adjacency_from_edges, Graph, Splits};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

const FEATURE_MAGIC: &[u8; 4] = b"MLPI";
const FEATURE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SplitsFile {
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = fs::read_to_string(path)?;
    let mut edges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let u = parts
            .next()
            .ok_or_else(|| parse_err(path, lineno, "missing source index"))?;
        let v = parts
            .next()
            .ok_or_else(|| parse_err(path, lineno, "missing target index"))?;
        if parts.next().is_some() {
            return Err(parse_err(path, lineno, "more than two fields"));
        }
        let u: usize = u
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("bad index `{u}`: {e}")))?;
        let v: usize = v
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("bad index `{v}`: {e}")))?;
        edges.push((u, v));
    }
    Ok(edges)
}

fn read_features<T: Scalar>(path: &Path) -> Result<DenseMatrix<T>> {
    let bytes = fs::read(path)?;
    if bytes.len() >= 4 && &bytes[..4] == FEATURE_MAGIC {
        read_features_binary(path, &bytes)
    } else {
        read_features_text(path, &bytes)
    }
}

fn read_features_binary<T: Scalar>(path: &Path, bytes: &[u8]) -> Result<DenseMatrix<T>> {
    let mut cur = &bytes[4..];
    let mut u32_field = |name: &str| -> Result<u32> {
        let mut buf = [0u8; 4];
        cur.read_exact(&mut buf)
            .map_err(|_| parse_err(path, 0, format!("truncated {name} field")))?;
        Ok(u32::from_le_bytes(buf))
    };
    let version = u32_field("version")?;
    if version != FEATURE_VERSION {
        return Err(parse_err(path, 0, format!("unsupported version {version}")));
    }
    let n = u32_field("N")? as usize;
    let d = u32_field("D")? as usize;
    let need = n * d * 4;
    if cur.len() != need {
        return Err(parse_err(
            path,
            0,
            format!("expected {need} value bytes, found {}", cur.len()),
        ));
    }
    let mut data = Vec::with_capacity(n * d);
    for chunk in cur.chunks_exact(4) {
        data.push(T::from_f32(f32::from_le_bytes(chunk.try_into().unwrap())));
    }
    DenseMatrix::from_vec(n, d, data)
}

fn read_features_text<T: Scalar>(path: &Path, bytes: &[u8]) -> Result<DenseMatrix<T>> {
    let text = std::str::from_utf8(bytes).map_err(|_| parse_err(path, 0, "not valid UTF-8"))?;
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<T>> = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map(T::from_f64)
                    .map_err(|e| parse_err(path, lineno, format!("bad float `{tok}`: {e}")))
            })
            .collect();
        let row = row?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("row has {} values, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    DenseMatrix::from_vec(n, d, rows.into_iter().flatten().collect())
}

fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let y: usize = line
            .trim()
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("bad label `{line}`: {e}")))?;
        labels.push(y);
    }
    Ok(labels)
}

fn read_splits(path: &Path) -> Result<Splits> {
    let text = fs::read_to_string(path)?;
    let parsed: SplitsFile = serde_json::from_str(&text)?;
    Ok(Splits {
        train: parsed.train,
        val: parsed.val,
        test: parsed.test,
    })
}

/// Parse, symmetrize, deduplicate, and validate the four dataset files.
pub fn load_graph<T: Scalar>(
    edges_path: impl AsRef<Path>,
    features_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    splits_path: impl AsRef<Path>,
) -> Result<Graph<T>> {
    let features = read_features::<T>(features_path.as_ref())?;
    let n = features.rows();
    let edges = read_edges(edges_path.as_ref())?;
    for &(u, v) in &edges {
        if u >= n || v >= n {
            return Err(Error::Range(format!(
                "edge ({u},{v}) out of range for {n} feature rows"
            )));
        }
    }
    let labels = read_labels(labels_path.as_ref())?;
    if labels.len() != n {
        return Err(Error::Consistency(format!(
            "{} labels but {n} feature rows",
            labels.len()
        )));
    }
    let num_classes = labels.iter().copied().max().map_or(1, |m| m + 1);
    let splits = read_splits(splits_path.as_ref())?;
    let adjacency = adjacency_from_edges(n, &edges)?;
    Graph::new(features, adjacency, labels, num_classes, splits)
}

/// Emit the four dataset files into `dir` with fixed names
/// (`edges.txt`, `features.bin`, `labels.txt`, `splits.json`).
pub fn write_graph<T: Scalar>(graph: &Graph<T>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut edges = String::new();
    for (u, v) in graph.undirected_edges() {
        edges.push_str(&format!("{u} {v}\n"));
    }
    fs::write(dir.join("edges.txt"), edges)?;

    let f = &graph.features;
    let mut buf = Vec::with_capacity(16 + f.data().len() * 4);
    buf.extend_from_slice(FEATURE_MAGIC);
    buf.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(f.rows() as u32).to_le_bytes());
    buf.extend_from_slice(&(f.cols() as u32).to_le_bytes());
    for v in f.data() {
        buf.extend_from_slice(&v.as_f32().to_le_bytes());
    }
    let mut file = fs::File::create(dir.join("features.bin"))?;
    file.write_all(&buf)?;

    let mut labels = String::new();
    for y in &graph.labels {
        labels.push_str(&format!("{y}\n"));
    }
    fs::write(dir.join("labels.txt"), labels)?;

    let splits = SplitsFile {
        train: graph.splits.train.clone(),
        val: graph.splits.val.clone(),
        test: graph.splits.test.clone(),
    };
    fs::write(dir.join("splits.json"), serde_json::to_string_pretty(&splits)?)?;
    Ok(())
}
