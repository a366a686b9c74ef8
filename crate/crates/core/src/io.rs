//! Graph documents (plain edge lists and JSON) and fixed-precision output.
//!
//! Plain edge-list format:
//!
//! ```text
//! # comment
//! n=3 directed=0 [labels=a,b,c]
//! 0 1 1.0
//! b c 2.5      # endpoints may be labels when a label table is given
//! ```
//!
//! Repeated `(u, v)` lines are parallel edges.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, GraphError, WeightedMultigraph};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    Index(usize),
    Label(String),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Index(i) => write!(f, "{i}"),
            Endpoint::Label(l) => f.write_str(l),
        }
    }
}

fn one() -> usize {
    1
}

fn is_one(x: &usize) -> bool {
    *x == 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: Endpoint,
    pub v: Endpoint,
    pub weight: f64,
    /// Number of identical parallel edges this record stands for.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub version: u32,
    pub n: usize,
    pub directed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// 1-based line and column in a plain edge list.
    Line {
        line: usize,
        column: usize,
    },
    /// 0-based record index in a structured document.
    Record(usize),
    Document,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line { line, column } => write!(f, "line {line}, column {column}"),
            Location::Record(r) => write!(f, "edge record {r}"),
            Location::Document => f.write_str("document"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("missing header `n=<count> directed=<0|1>`")]
    MissingHeader,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed record: expected `<u> <v> <weight>`, got {0:?}")]
    MalformedLine(String),
    #[error("invalid number {0:?}")]
    InvalidNumber(String),
    #[error("weight {0} is not strictly positive")]
    NonPositiveWeight(f64),
    #[error("endpoint {vertex} out of range for {n} vertices")]
    EndpointOutOfRange { vertex: usize, n: usize },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("label {0:?} must be non-empty, non-numeric and free of whitespace, ',' and '#'")]
    InvalidLabel(String),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("label table has {labels} entries but n = {n}")]
    LabelCountMismatch { labels: usize, n: usize },
    #[error("multiplicity must be at least 1")]
    ZeroMultiplicity,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("invalid JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{location}: {kind}")]
pub struct ParseError {
    pub location: Location,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn at(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        Self { location: Location::Line { line, column }, kind }
    }
}

/// Splits a line into whitespace-separated tokens with 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

type LabelTable = HashMap<String, usize>;

fn validate_labels(labels: &[String], n: usize) -> Result<LabelTable, ParseErrorKind> {
    if labels.len() != n {
        return Err(ParseErrorKind::LabelCountMismatch { labels: labels.len(), n });
    }
    let mut table = HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        let clashes = l.is_empty()
            || l.parse::<usize>().is_ok()
            || l.contains(|c: char| c.is_whitespace() || c == ',' || c == '#');
        if clashes {
            return Err(ParseErrorKind::InvalidLabel(l.clone()));
        }
        if table.insert(l.clone(), i).is_some() {
            return Err(ParseErrorKind::DuplicateLabel(l.clone()));
        }
    }
    Ok(table)
}

/// Integer tokens are indices; anything else is a label.
pub fn parse_endpoint(token: &str) -> Endpoint {
    match token.parse::<usize>() {
        Ok(i) => Endpoint::Index(i),
        Err(_) => Endpoint::Label(token.to_string()),
    }
}

fn resolve(ep: &Endpoint, n: usize, table: Option<&LabelTable>) -> Result<usize, ParseErrorKind> {
    match ep {
        Endpoint::Index(i) if *i < n => Ok(*i),
        Endpoint::Index(i) => Err(ParseErrorKind::EndpointOutOfRange { vertex: *i, n }),
        Endpoint::Label(l) => {
            table.and_then(|t| t.get(l.as_str()).copied()).ok_or_else(|| ParseErrorKind::UnknownLabel(l.clone()))
        }
    }
}

fn check_weight(w: f64) -> Result<f64, ParseErrorKind> {
    if w > 0.0 && w.is_finite() {
        Ok(w)
    } else {
        Err(ParseErrorKind::NonPositiveWeight(w))
    }
}

pub fn parse_edge_list(text: &str) -> Result<GraphDocument, ParseError> {
    let mut header: Option<(usize, bool, Option<Vec<String>>)> = None;
    let mut table: Option<LabelTable> = None;
    let mut edges = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens(content);
        if toks.is_empty() {
            continue;
        }
        let Some((n, _, _)) = &header else {
            let parsed = parse_header(line_no, &toks)?;
            table = parsed.2.as_ref().map(|l| validate_labels(l, parsed.0).expect("checked in header"));
            header = Some(parsed);
            continue;
        };
        if toks.len() != 3 {
            return Err(ParseError::at(line_no, toks[0].0, ParseErrorKind::MalformedLine(content.trim().to_string())));
        }
        let mut ends = [Endpoint::Index(0), Endpoint::Index(0)];
        for (slot, &(col, tok)) in ends.iter_mut().zip(&toks[..2]) {
            let ep = parse_endpoint(tok);
            resolve(&ep, *n, table.as_ref()).map_err(|k| ParseError::at(line_no, col, k))?;
            *slot = ep;
        }
        let (wcol, wtok) = toks[2];
        let weight: f64 =
            wtok.parse().map_err(|_| ParseError::at(line_no, wcol, ParseErrorKind::InvalidNumber(wtok.to_string())))?;
        check_weight(weight).map_err(|k| ParseError::at(line_no, wcol, k))?;
        let [u, v] = ends;
        edges.push(EdgeRecord { u, v, weight, multiplicity: 1 });
    }
    let (n, directed, labels) = header.ok_or(ParseError::at(last_line.max(1), 1, ParseErrorKind::MissingHeader))?;
    Ok(GraphDocument { version: FORMAT_VERSION, n, directed, labels, edges })
}

fn parse_header(line: usize, toks: &[(usize, &str)]) -> Result<(usize, bool, Option<Vec<String>>), ParseError> {
    let mut n = None;
    let mut directed = None;
    let mut labels = None;
    for &(col, tok) in toks {
        let bad = || ParseError::at(line, col, ParseErrorKind::MalformedHeader(tok.to_string()));
        let (key, value) = tok.split_once('=').ok_or_else(bad)?;
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
            "directed" => {
                directed = Some(match value {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad()),
                })
            }
            "labels" => labels = Some(value.split(',').map(str::to_string).collect::<Vec<_>>()),
            _ => return Err(bad()),
        }
    }
    let (Some(n), Some(directed)) = (n, directed) else {
        return Err(ParseError::at(line, 1, ParseErrorKind::MissingHeader));
    };
    if let Some(l) = &labels {
        validate_labels(l, n).map_err(|k| ParseError::at(line, 1, k))?;
    }
    Ok((n, directed, labels))
}

/// Writes the plain edge-list form. Records with multiplicity above one are
/// written as repeated lines.
pub fn serialize_edge_list(doc: &GraphDocument) -> String {
    let mut out = format!("n={} directed={}", doc.n, u8::from(doc.directed));
    if let Some(labels) = &doc.labels {
        let _ = write!(out, " labels={}", labels.join(","));
    }
    out.push('\n');
    for e in &doc.edges {
        for _ in 0..e.multiplicity {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.weight);
        }
    }
    out
}

#[derive(Deserialize)]
struct RawDocument {
    #[serde(default)]
    version: Option<u32>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    directed: bool,
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
}

/// Parses the structured (JSON) document. Without an explicit label table,
/// string endpoints define labels in order of first appearance.
pub fn parse_json_document(text: &str) -> Result<GraphDocument, ParseError> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| ParseError {
        location: Location::Line { line: e.line(), column: e.column() },
        kind: ParseErrorKind::Json(e.to_string()),
    })?;
    let doc_err = |kind| ParseError { location: Location::Document, kind };
    let version = raw.version.unwrap_or(FORMAT_VERSION);
    if version != FORMAT_VERSION {
        return Err(doc_err(ParseErrorKind::UnsupportedVersion(version)));
    }
    let mut labels = raw.labels;
    if labels.is_none()
        && raw.edges.iter().any(|e| matches!(e.u, Endpoint::Label(_)) || matches!(e.v, Endpoint::Label(_)))
    {
        let mut seen: Vec<String> = Vec::new();
        for e in &raw.edges {
            for ep in [&e.u, &e.v] {
                if let Endpoint::Label(l) = ep {
                    if !seen.contains(l) {
                        seen.push(l.clone());
                    }
                }
            }
        }
        labels = Some(seen);
    }
    let max_index = raw
        .edges
        .iter()
        .flat_map(|e| [&e.u, &e.v])
        .filter_map(|ep| match ep {
            Endpoint::Index(i) => Some(i + 1),
            Endpoint::Label(_) => None,
        })
        .max()
        .unwrap_or(0);
    let n = raw.n.unwrap_or_else(|| labels.as_ref().map_or(max_index, Vec::len));
    let table = match &labels {
        Some(l) => Some(validate_labels(l, n).map_err(doc_err)?),
        None => None,
    };
    for (r, e) in raw.edges.iter().enumerate() {
        let rec_err = |kind| ParseError { location: Location::Record(r), kind };
        resolve(&e.u, n, table.as_ref()).map_err(rec_err)?;
        resolve(&e.v, n, table.as_ref()).map_err(rec_err)?;
        check_weight(e.weight).map_err(rec_err)?;
        if e.multiplicity == 0 {
            return Err(rec_err(ParseErrorKind::ZeroMultiplicity));
        }
    }
    Ok(GraphDocument { version, n, directed: raw.directed, labels, edges: raw.edges })
}

pub fn serialize_json_document(doc: &GraphDocument) -> String {
    serde_json::to_string_pretty(doc).expect("documents always serialize")
}

/// Picks the parser from content: JSON documents start with `{`.
pub fn parse_document(text: &str) -> Result<GraphDocument, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_json_document(text)
    } else {
        parse_edge_list(text)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocumentError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl GraphDocument {
    fn label_table(&self) -> Result<Option<LabelTable>, ParseError> {
        match &self.labels {
            Some(l) => {
                validate_labels(l, self.n).map(Some).map_err(|kind| ParseError { location: Location::Document, kind })
            }
            None => Ok(None),
        }
    }

    /// Resolves a label or index to a vertex.
    pub fn vertex(&self, ep: &Endpoint) -> Result<usize, ParseError> {
        let table = self.label_table()?;
        resolve(ep, self.n, table.as_ref()).map_err(|kind| ParseError { location: Location::Document, kind })
    }

    /// Builds the graph, expanding multiplicities into parallel edges.
    pub fn to_graph(&self) -> Result<WeightedMultigraph, DocumentError> {
        let table = self.label_table()?;
        let mut edges = Vec::new();
        for (r, e) in self.edges.iter().enumerate() {
            let rec_err = |kind| ParseError { location: Location::Record(r), kind };
            let u = resolve(&e.u, self.n, table.as_ref()).map_err(rec_err)?;
            let v = resolve(&e.v, self.n, table.as_ref()).map_err(rec_err)?;
            for _ in 0..e.multiplicity {
                edges.push(Edge::new(u, v, e.weight));
            }
        }
        let g = WeightedMultigraph::new(self.n, edges, self.directed)?;
        Ok(match &self.labels {
            Some(l) => g.with_labels(l.clone()),
            None => g,
        })
    }

    pub fn from_graph(g: &WeightedMultigraph) -> Self {
        Self {
            version: FORMAT_VERSION,
            n: g.n(),
            directed: g.is_directed(),
            labels: g.labels().map(<[String]>::to_vec),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    u: Endpoint::Index(e.u),
                    v: Endpoint::Index(e.v),
                    weight: e.weight,
                    multiplicity: 1,
                })
                .collect(),
        }
    }
}

/// Full precision for `f64` output.
pub const FULL_DIGITS: usize = 17;

/// Formats like C's `%.<digits>g`: `digits` significant digits, trailing
/// zeros removed, scientific notation outside `1e-5 <= |x| < 10^digits`.
pub fn format_number(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Matrix as CSV: a header row of labels, then one labelled row per vertex.
pub fn matrix_csv(m: &DMatrix<f64>, labels: &[String], digits: usize) -> String {
    let mut out = String::new();
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for i in 0..m.nrows() {
        out.push_str(&labels[i]);
        for j in 0..m.ncols() {
            out.push(',');
            out.push_str(&format_number(m[(i, j)], digits));
        }
        out.push('\n');
    }
    out
}

/// Row-major nested vectors, for structured output.
pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
