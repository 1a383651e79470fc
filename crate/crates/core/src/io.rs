//! File formats. Every format carries a `format_version`; JSON documents
//! as a field, CSV files as a leading `# format_version: N` comment.
//!
//! Floats are written in shortest round-trip form, so emit followed by
//! ingest reproduces values bit for bit.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{GbsError, Result};
use crate::graph::Graph;
use crate::linalg::RMat;
use crate::matfuncs::PhotonPattern;
use crate::points::StateSpace;
use crate::sampler::{BatchMeta, Detector, SampleBatch};
use crate::similarity::FeatureVector;
use crate::vibronic::{Spectrum, VibronicInput};

pub const FORMAT_VERSION: u32 = 1;

fn parse_err(msg: impl Into<String>) -> GbsError {
    GbsError::Parse(msg.into())
}

fn check_version(doc: &Value, what: &str) -> Result<()> {
    match doc.get("format_version") {
        None => Ok(()),
        Some(v) if v.as_u64() == Some(FORMAT_VERSION as u64) => Ok(()),
        Some(v) => Err(parse_err(format!("{what}: unsupported format_version {v}"))),
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], field: &str) -> Result<RMat> {
    let n = rows.len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(parse_err(format!("{field}: row {i} has {} entries, expected {n}", r.len())));
        }
    }
    Ok(RMat::from_fn(n, n, |i, j| rows[i][j]))
}

fn matrix_rows(m: &RMat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Strips comments and blank lines, keeping 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn csv_version(text: &str) -> Result<()> {
    for line in text.lines().map(str::trim).filter(|l| l.starts_with('#')) {
        if let Some(v) = line.trim_start_matches('#').trim().strip_prefix("format_version:") {
            if v.trim() != FORMAT_VERSION.to_string() {
                return Err(parse_err(format!("unsupported format_version {}", v.trim())));
            }
        }
    }
    Ok(())
}

fn csv_header() -> String {
    format!("# format_version: {FORMAT_VERSION}\n")
}

fn is_header(fields: &[&str]) -> bool {
    fields.iter().any(|f| f.parse::<f64>().is_err())
}

// ---- graphs

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    #[serde(default)]
    format_version: Option<u32>,
    adjacency: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    node_weights: Option<Vec<f64>>,
}

pub fn graph_to_json(g: &Graph) -> String {
    let doc = GraphDoc {
        format_version: Some(FORMAT_VERSION),
        adjacency: matrix_rows(g.adjacency()),
        node_weights: g.kernel().node_weights().map(<[f64]>::to_vec),
    };
    serde_json::to_string(&doc).expect("graph serializes") + "\n"
}

pub fn graph_from_json(text: &str) -> Result<Graph> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_err(format!("graph JSON: {e}")))?;
    check_version(&value, "graph JSON")?;
    let doc: GraphDoc = serde_json::from_value(value).map_err(|e| parse_err(format!("graph JSON: {e}")))?;
    let m = matrix_from_rows(&doc.adjacency, "adjacency")?;
    let mut kernel = crate::gaussian::AdjacencyKernel::new(m)?;
    if let Some(w) = doc.node_weights {
        kernel = kernel.with_node_weights(w)?;
    }
    Graph::new(kernel)
}

/// Edge list with one `u,v` or `u,v,weight` per line. The node count is
/// one more than the largest index unless a `# nodes: N` line says
/// otherwise. A non-numeric first line is taken as a header.
pub fn graph_from_edge_csv(text: &str) -> Result<Graph> {
    csv_version(text)?;
    let mut nodes: Option<usize> = None;
    for line in text.lines().map(str::trim).filter(|l| l.starts_with('#')) {
        if let Some(v) = line.trim_start_matches('#').trim().strip_prefix("nodes:") {
            nodes = Some(v.trim().parse().map_err(|_| parse_err(format!("bad node count '{}'", v.trim())))?);
        }
    }
    let mut edges = Vec::new();
    for (k, (lineno, line)) in data_lines(text).enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if k == 0 && is_header(&fields) {
            continue;
        }
        if fields.len() != 2 && fields.len() != 3 {
            return Err(parse_err(format!("line {lineno}: expected 'u,v' or 'u,v,weight'")));
        }
        let idx = |s: &str, name: &str| {
            s.parse::<usize>().map_err(|_| parse_err(format!("line {lineno}, field {name}: '{s}' is not a node index")))
        };
        let u = idx(fields[0], "u")?;
        let v = idx(fields[1], "v")?;
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|_| parse_err(format!("line {lineno}, field weight: '{s}' is not a number")))?,
            None => 1.0,
        };
        if u == v {
            return Err(parse_err(format!("line {lineno}: self-loop on node {u}")));
        }
        edges.push((u, v, w));
    }
    let inferred = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    let n = nodes.unwrap_or(inferred);
    if n < inferred {
        return Err(parse_err(format!("edge list mentions node {} but declares {n} nodes", inferred - 1)));
    }
    Graph::from_edges(n, &edges)
}

pub fn graph_to_edge_csv(g: &Graph) -> String {
    let mut out = csv_header();
    out += &format!("# nodes: {}\nu,v,weight\n", g.node_count());
    for u in 0..g.node_count() {
        for v in u + 1..g.node_count() {
            if g.has_edge(u, v) {
                out += &format!("{u},{v},{}\n", g.weight(u, v));
            }
        }
    }
    out
}

/// Dense JSON or edge-list CSV, by file extension.
pub fn read_graph(path: &std::path::Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => graph_from_edge_csv(&text),
        _ => graph_from_json(&text),
    }
}

// ---- sample batches

#[derive(Serialize, Deserialize)]
struct BatchHeader {
    format_version: u32,
    #[serde(rename = "type")]
    kind: String,
    detector: Detector,
    meta: BatchMeta,
    samples: usize,
}

#[derive(Serialize, Deserialize)]
struct SampleLine {
    pattern: Vec<usize>,
    k: usize,
    detector: Detector,
}

/// A header line with the batch metadata, then one line per sample.
pub fn batch_to_jsonl(batch: &SampleBatch) -> String {
    let header = BatchHeader {
        format_version: FORMAT_VERSION,
        kind: "header".into(),
        detector: batch.detector,
        meta: batch.meta.clone(),
        samples: batch.samples.len(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for s in &batch.samples {
        let line = SampleLine { pattern: s.counts.clone(), k: s.total(), detector: batch.detector };
        out += &serde_json::to_string(&line).expect("sample serializes");
        out.push('\n');
    }
    out
}

pub fn batch_from_jsonl(text: &str) -> Result<SampleBatch> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| parse_err("empty sample file"))?;
    let value: Value = serde_json::from_str(first).map_err(|e| parse_err(format!("line 1: {e}")))?;
    check_version(&value, "line 1")?;
    let header: BatchHeader = serde_json::from_value(value).map_err(|e| parse_err(format!("line 1: {e}")))?;
    if header.kind != "header" {
        return Err(parse_err(format!("line 1: expected a header, found type '{}'", header.kind)));
    }
    let mut samples = Vec::with_capacity(header.samples);
    for (i, line) in lines {
        let s: SampleLine = serde_json::from_str(line).map_err(|e| parse_err(format!("line {}: {e}", i + 1)))?;
        let p = PhotonPattern::new(s.pattern);
        if p.total() != s.k {
            return Err(parse_err(format!("line {}: k = {} but pattern sums to {}", i + 1, s.k, p.total())));
        }
        if p.modes() != header.meta.modes {
            return Err(parse_err(format!("line {}: {} modes, header says {}", i + 1, p.modes(), header.meta.modes)));
        }
        if s.detector != header.detector {
            return Err(parse_err(format!("line {}: detector differs from header", i + 1)));
        }
        samples.push(p);
    }
    if samples.len() != header.samples {
        return Err(parse_err(format!("header announces {} samples, file has {}", header.samples, samples.len())));
    }
    Ok(SampleBatch { detector: header.detector, meta: header.meta, samples })
}

// ---- points

/// One point per row, comma separated; a non-numeric first row is a header.
pub fn points_from_csv(text: &str) -> Result<StateSpace> {
    csv_version(text)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, (lineno, line)) in data_lines(text).enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if k == 0 && is_header(&fields) {
            continue;
        }
        let row = fields
            .iter()
            .enumerate()
            .map(|(j, f)| f.parse::<f64>().map_err(|_| parse_err(format!("line {lineno}, column {}: '{f}' is not a number", j + 1))))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(format!("line {lineno}: {} coordinates, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    StateSpace::from_rows(&rows)
}

pub fn points_to_csv(space: &StateSpace) -> String {
    let mut out = csv_header();
    for i in 0..space.len() {
        let row: Vec<String> = space.point(i).iter().map(f64::to_string).collect();
        out += &row.join(",");
        out.push('\n');
    }
    out
}

// ---- vibronic

#[derive(Serialize, Deserialize)]
struct VibronicDoc {
    #[serde(default)]
    format_version: Option<u32>,
    w: Vec<f64>,
    wp: Vec<f64>,
    #[serde(rename = "Ud")]
    ud: Vec<Vec<f64>>,
    delta: Vec<f64>,
    #[serde(rename = "T")]
    temperature: f64,
}

pub fn vibronic_from_json(text: &str) -> Result<VibronicInput> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_err(format!("vibronic JSON: {e}")))?;
    check_version(&value, "vibronic JSON")?;
    let doc: VibronicDoc = serde_json::from_value(value).map_err(|e| parse_err(format!("vibronic JSON: {e}")))?;
    let ud = matrix_from_rows(&doc.ud, "Ud")?;
    VibronicInput::new(doc.w, doc.wp, ud, doc.delta, doc.temperature)
}

pub fn vibronic_to_json(input: &VibronicInput) -> String {
    let doc = VibronicDoc {
        format_version: Some(FORMAT_VERSION),
        w: input.w.clone(),
        wp: input.wp.clone(),
        ud: matrix_rows(&input.ud),
        delta: input.delta.clone(),
        temperature: input.temperature,
    };
    serde_json::to_string(&doc).expect("vibronic input serializes") + "\n"
}

/// Bin centre, count and broadened intensity at the centre.
pub fn spectrum_to_csv(s: &Spectrum) -> String {
    let mut out = csv_header();
    out += &format!("# gamma: {}\n# outside: {}\n", s.gamma, s.outside);
    out += "energy,count,broadened\n";
    for (x, count) in s.bin_centres().iter().zip(&s.counts) {
        out += &format!("{x},{count},{}\n", s.broadened_at(*x));
    }
    out
}

// ---- features

/// One row per event, raw and normalised, for each named feature vector.
pub fn features_to_csv(rows: &[(String, FeatureVector)]) -> String {
    let mut out = csv_header();
    out += "name,k,n_max,value,normalized,n_samples\n";
    for (name, f) in rows {
        let norm = f.normalized();
        for (i, k) in f.ks.iter().enumerate() {
            out += &format!("{name},{k},{},{},{},{}\n", f.n_max, f.values[i], norm.values[i], f.n_samples);
        }
    }
    out
}

/// Any serializable result wrapped as `{"format_version", "kind", "result"}`.
pub fn result_to_json<T: Serialize>(kind: &str, result: &T) -> String {
    let doc = serde_json::json!({ "format_version": FORMAT_VERSION, "kind": kind, "result": result });
    serde_json::to_string(&doc).expect("result serializes") + "\n"
}
