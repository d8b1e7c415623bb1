//! File formats: tab-separated edge lists and label files, JSON provenance
//! sidecars, metrics CSV, and the JSONL recommendation log.
//!
//! Graphs serialize in canonical order (edges sorted by source then
//! target), so identical graphs produce identical bytes. Floats are
//! written with the shortest round-trip representation.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{IterationRecord, RecLogEntry};
use crate::graph::{GraphError, Group, LabeledDigraph, NodeId};
use crate::netgen::{NetConfig, NetworkStats};

/// Schema tag written as the first comment line of every metrics CSV.
pub const METRICS_SCHEMA: &str = "linkloop-metrics-v1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// One edge per line, `u<TAB>v`, canonical sort, no header.
pub fn write_edge_list(path: &Path, g: &LabeledDigraph) -> Result<(), IoError> {
    let mut out = String::new();
    for (u, v) in g.edges() {
        writeln!(out, "{u}\t{v}").unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

/// One node per line, `u<TAB>g` with 0 = majority, 1 = minority.
pub fn write_labels(path: &Path, g: &LabeledDigraph) -> Result<(), IoError> {
    let mut out = String::new();
    for (u, label) in g.labels().iter().enumerate() {
        writeln!(out, "{u}\t{}", label.code()).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

fn data_lines(path: &Path) -> Result<Vec<(usize, String)>, IoError> {
    let file = fs::File::open(path)?;
    let mut lines = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push((idx + 1, trimmed.to_string()));
    }
    Ok(lines)
}

fn split_pair(path: &Path, lineno: usize, line: &str) -> Result<(u32, u32), IoError> {
    let mut parts = line.split_whitespace();
    let a = parts
        .next()
        .ok_or_else(|| parse_err(path, lineno, "expected two fields"))?;
    let b = parts
        .next()
        .ok_or_else(|| parse_err(path, lineno, "expected two fields"))?;
    if parts.next().is_some() {
        return Err(parse_err(path, lineno, "expected exactly two fields"));
    }
    let a = a
        .parse::<u32>()
        .map_err(|e| parse_err(path, lineno, format!("bad id '{a}': {e}")))?;
    let b = b
        .parse::<u32>()
        .map_err(|e| parse_err(path, lineno, format!("bad value '{b}': {e}")))?;
    Ok((a, b))
}

/// A graph loaded from disk. When the label file used non-dense external
/// ids, `external_ids[dense]` records the original id of each node.
#[derive(Debug)]
pub struct LoadedGraph {
    pub graph: LabeledDigraph,
    pub external_ids: Option<Vec<u32>>,
}

/// Reads a label file plus an edge list. External ids may be arbitrary;
/// they are mapped to dense ids in ascending order.
pub fn load_graph(edges_path: &Path, labels_path: &Path) -> Result<LoadedGraph, IoError> {
    let mut raw_labels: Vec<(usize, u32, u32)> = Vec::new();
    for (lineno, line) in data_lines(labels_path)? {
        let (u, code) = split_pair(labels_path, lineno, &line)?;
        raw_labels.push((lineno, u, code));
    }
    if raw_labels.is_empty() {
        return Err(parse_err(labels_path, 0, "label file has no entries"));
    }
    let mut ids: Vec<u32> = raw_labels.iter().map(|&(_, u, _)| u).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != raw_labels.len() {
        return Err(parse_err(labels_path, 0, "duplicate node id in label file"));
    }
    let dense_identity = ids.len() == ids.last().map(|&m| m as usize + 1).unwrap_or(0);
    let to_dense = |u: u32| ids.binary_search(&u).ok().map(|i| i as NodeId);

    let mut labels = vec![Group::Majority; ids.len()];
    for &(lineno, u, code) in &raw_labels {
        let group = Group::from_code(code as u8).ok_or_else(|| {
            parse_err(
                labels_path,
                lineno,
                format!("label must be 0 or 1, got {code}"),
            )
        })?;
        labels[to_dense(u).unwrap() as usize] = group;
    }

    let mut graph = LabeledDigraph::new(labels);
    for (lineno, line) in data_lines(edges_path)? {
        let (u, v) = split_pair(edges_path, lineno, &line)?;
        let u = to_dense(u)
            .ok_or_else(|| parse_err(edges_path, lineno, format!("unlabeled node {u}")))?;
        let v = to_dense(v)
            .ok_or_else(|| parse_err(edges_path, lineno, format!("unlabeled node {v}")))?;
        graph
            .add_edge(u, v)
            .map_err(|e| parse_err(edges_path, lineno, e.to_string()))?;
    }
    Ok(LoadedGraph {
        graph,
        external_ids: if dense_identity { None } else { Some(ids) },
    })
}

/// `dense<TAB>external` per line.
pub fn write_translation_table(path: &Path, external_ids: &[u32]) -> Result<(), IoError> {
    let mut out = String::new();
    for (dense, ext) in external_ids.iter().enumerate() {
        writeln!(out, "{dense}\t{ext}").unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

/// Sidecar recording how a network was produced and what it measured.
#[derive(Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub preset: Option<String>,
    pub config: NetConfig,
    pub achieved: NetworkStats,
    pub edges_file: String,
    pub labels_file: String,
}

pub fn write_provenance(path: &Path, prov: &Provenance) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(prov)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn percentile_tag(q: f64) -> String {
    let pct = q * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}")
    }
}

/// Column names after the fixed prefix, one pair of blocks per threshold.
pub fn metrics_columns(percentiles: &[f64]) -> Vec<String> {
    let mut cols: Vec<String> = [
        "t",
        "recs_issued",
        "e_min",
        "e_maj",
        "edges_added",
        "growth_pct",
        "gini_min",
        "gini_maj",
        "h_m",
        "h_M",
        "e_mm",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for q in percentiles {
        cols.push(format!("pexp_min_{}", percentile_tag(*q)));
    }
    for q in percentiles {
        cols.push(format!("pexp_maj_{}", percentile_tag(*q)));
    }
    cols
}

fn record_fields(r: &IterationRecord, percentiles: &[f64]) -> Vec<String> {
    let mut fields = vec![
        r.t.to_string(),
        r.recs_issued.to_string(),
        fmt_opt(r.exposure.as_ref().map(|e| e.e_min)),
        fmt_opt(r.exposure.as_ref().map(|e| e.e_maj)),
        r.edges_added.to_string(),
        (r.cumulative_edge_growth * 100.0).to_string(),
        r.gini_minority.to_string(),
        r.gini_majority.to_string(),
        fmt_opt(r.h_m),
        fmt_opt(r.h_maj),
        fmt_opt(r.e_mm),
    ];
    for buckets in [&r.pexp_minority, &r.pexp_majority] {
        match buckets {
            Some(b) => fields.extend(b.shares.iter().map(|s| s.to_string())),
            None => fields.extend(std::iter::repeat_n(String::new(), percentiles.len())),
        }
    }
    fields
}

/// Renders the per-iteration metrics table, schema comment first.
pub fn metrics_csv(records: &[IterationRecord], percentiles: &[f64]) -> String {
    let mut out = format!("# schema={METRICS_SCHEMA}\n");
    writeln!(out, "{}", metrics_columns(percentiles).join(",")).unwrap();
    for r in records {
        writeln!(out, "{}", record_fields(r, percentiles).join(",")).unwrap();
    }
    out
}

pub fn write_metrics_csv(
    path: &Path,
    records: &[IterationRecord],
    percentiles: &[f64],
) -> Result<(), IoError> {
    fs::write(path, metrics_csv(records, percentiles))?;
    Ok(())
}

/// Long-format table over seeds: same columns with `seed` prepended.
pub fn write_combined_csv(
    path: &Path,
    runs: &[(u64, &[IterationRecord])],
    percentiles: &[f64],
) -> Result<(), IoError> {
    let mut out = format!("# schema={METRICS_SCHEMA}\n");
    writeln!(out, "seed,{}", metrics_columns(percentiles).join(",")).unwrap();
    for (seed, records) in runs {
        for r in *records {
            writeln!(out, "{seed},{}", record_fields(r, percentiles).join(",")).unwrap();
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// One JSON object per (iteration, user) with the ordered targets and the
/// accepted 1-based position.
pub fn write_rec_log(path: &Path, entries: &[RecLogEntry]) -> Result<(), IoError> {
    let file = fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    for entry in entries {
        serde_json::to_writer(&mut writer, entry)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_rec_log(path: &Path) -> Result<Vec<RecLogEntry>, IoError> {
    let file = fs::File::open(path)?;
    let mut entries = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: RecLogEntry =
            serde_json::from_str(&line).map_err(|e| parse_err(path, idx + 1, e.to_string()))?;
        entries.push(entry);
    }
    Ok(entries)
}

/// Numeric CSV loaded back for reporting. Empty cells become `None`.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub schema: Option<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl CsvTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn read_csv_table(path: &Path) -> Result<CsvTable, IoError> {
    let file = fs::File::open(path)?;
    let mut schema = None;
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if schema.is_none() {
                schema = trimmed
                    .trim_start_matches('#')
                    .trim()
                    .strip_prefix("schema=")
                    .map(|s| s.to_string());
            }
            continue;
        }
        match &columns {
            None => columns = Some(trimmed.split(',').map(|s| s.trim().to_string()).collect()),
            Some(cols) => {
                let cells: Vec<&str> = trimmed.split(',').collect();
                if cells.len() != cols.len() {
                    return Err(parse_err(
                        path,
                        idx + 1,
                        format!("expected {} fields, got {}", cols.len(), cells.len()),
                    ));
                }
                let mut row = Vec::with_capacity(cells.len());
                for cell in cells {
                    let cell = cell.trim();
                    if cell.is_empty() {
                        row.push(None);
                    } else {
                        let value = cell.parse::<f64>().map_err(|e| {
                            parse_err(path, idx + 1, format!("bad number '{cell}': {e}"))
                        })?;
                        row.push(Some(value));
                    }
                }
                rows.push(row);
            }
        }
    }
    let columns = columns.ok_or_else(|| parse_err(path, 0, "no header row"))?;
    Ok(CsvTable {
        schema,
        columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{build_preset, Preset};

    #[test]
    fn graph_round_trips_identically() {
        let dir = tempfile::tempdir().unwrap();
        let edges = dir.path().join("g.edges");
        let labels = dir.path().join("g.labels");
        let g = build_preset(Preset::G1, 300, 4.0, 5).unwrap();
        write_edge_list(&edges, &g).unwrap();
        write_labels(&labels, &g).unwrap();

        let loaded = load_graph(&edges, &labels).unwrap();
        assert!(loaded.external_ids.is_none());
        assert_eq!(loaded.graph.edges(), g.edges());
        assert_eq!(loaded.graph.labels(), g.labels());

        // canonical write is byte-stable
        let edges2 = dir.path().join("g2.edges");
        write_edge_list(&edges2, &loaded.graph).unwrap();
        assert_eq!(fs::read(&edges).unwrap(), fs::read(&edges2).unwrap());
    }

    #[test]
    fn loader_skips_comments_and_maps_sparse_ids() {
        let dir = tempfile::tempdir().unwrap();
        let edges = dir.path().join("e.tsv");
        let labels = dir.path().join("l.tsv");
        fs::write(&edges, "# comment\n10\t30\n\n30\t500\n").unwrap();
        fs::write(&labels, "10\t1\n30\t0\n500\t1\n").unwrap();
        let loaded = load_graph(&edges, &labels).unwrap();
        assert_eq!(loaded.external_ids, Some(vec![10, 30, 500]));
        assert_eq!(loaded.graph.node_count(), 3);
        assert_eq!(loaded.graph.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(loaded.graph.label(0), Group::Minority);
        assert_eq!(loaded.graph.label(1), Group::Majority);
    }

    #[test]
    fn loader_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let edges = dir.path().join("e.tsv");
        let labels = dir.path().join("l.tsv");
        fs::write(&edges, "0\t1\n1\t7\n").unwrap();
        fs::write(&labels, "0\t0\n1\t1\n").unwrap();
        let err = load_graph(&edges, &labels).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");

        fs::write(&labels, "0\t0\n1\t9\n").unwrap();
        let err = load_graph(&edges, &labels).unwrap_err();
        assert!(err.to_string().contains("label must be 0 or 1"), "{err}");
    }

    #[test]
    fn metrics_csv_shape_and_round_trip() {
        let g = build_preset(Preset::G1, 200, 4.0, 2).unwrap();
        let config = crate::engine::SimConfig {
            iterations: 3,
            ..Default::default()
        };
        let out = crate::engine::run_simulation(g, &config).unwrap();
        let text = metrics_csv(&out.records, &config.percentiles);
        assert!(text.starts_with(&format!("# schema={METRICS_SCHEMA}\n")));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, &text).unwrap();
        let table = read_csv_table(&path).unwrap();
        assert_eq!(table.schema.as_deref(), Some(METRICS_SCHEMA));
        assert_eq!(table.rows.len(), 3);
        assert_eq!(
            table.columns.len(),
            11 + 2 * config.percentiles.len(),
            "fixed prefix plus bucket columns"
        );
        let t_col = table.column("t").unwrap();
        assert_eq!(t_col[2], Some(3.0));
        let e_min = table.column("e_min").unwrap();
        let e_maj = table.column("e_maj").unwrap();
        for (a, b) in e_min.iter().zip(e_maj.iter()) {
            if let (Some(a), Some(b)) = (a, b) {
                assert!((a + b - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rec_log_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("recs.jsonl");
        let entries = vec![
            RecLogEntry {
                t: 1,
                user: 4,
                targets: vec![9, 2, 7],
                accepted: Some(2),
            },
            RecLogEntry {
                t: 2,
                user: 0,
                targets: vec![5],
                accepted: Some(1),
            },
        ];
        write_rec_log(&path, &entries).unwrap();
        assert_eq!(read_rec_log(&path).unwrap(), entries);
    }
}
