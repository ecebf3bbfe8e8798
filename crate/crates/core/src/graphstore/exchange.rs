//! Two-file TSV exchange format.
//!
//! `<base>.nodes.tsv`:
//!
//! ```text
//! id	kind	type	label	year	props
//! a:2019:0	applicant		0	2019	name=Alice
//! v:english:Business	attribute	english	Business
//! ```
//!
//! `<base>.edges.tsv`:
//!
//! ```text
//! applicant_id	attribute_id
//! a:2019:0	v:english:Business
//! ```
//!
//! Files are UTF-8 with LF line endings (including after the last line).
//! Nodes are sorted by id, edges by `(applicant_id, attribute_id)`, property
//! keys ascending, all bytewise. Props are `key=value` pairs joined by `;`.
//! TAB, LF, `;`, `=` and `%` inside text fields are written as `%09`, `%0A`,
//! `%3B`, `%3D` and `%25`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{EdgeRecord, GraphError, NodeKind, NodeRecord, PropertyGraph};

const NODES_HEADER: &str = "id\tkind\ttype\tlabel\tyear\tprops";
const EDGES_HEADER: &str = "applicant_id\tattribute_id";

#[derive(Debug, Error)]
pub enum ExchangeError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{file} line {line}: {reason}")]
    Malformed {
        file: String,
        line: usize,
        reason: String,
    },

    #[error("{file} line {line}: edge references absent node `{id}`")]
    DanglingEdge { file: String, line: usize, id: String },
}

impl ExchangeError {
    /// 1-based line number the error points at, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            ExchangeError::Io { .. } => None,
            ExchangeError::Malformed { line, .. } | ExchangeError::DanglingEdge { line, .. } => {
                Some(*line)
            }
        }
    }
}

/// `<base>.nodes.tsv` and `<base>.edges.tsv`.
pub fn exchange_paths(base: &Path) -> (PathBuf, PathBuf) {
    let mut nodes = base.as_os_str().to_owned();
    nodes.push(".nodes.tsv");
    let mut edges = base.as_os_str().to_owned();
    edges.push(".edges.tsv");
    (PathBuf::from(nodes), PathBuf::from(edges))
}

fn encode_into(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '\t' => out.push_str("%09"),
            '\n' => out.push_str("%0A"),
            ';' => out.push_str("%3B"),
            '=' => out.push_str("%3D"),
            '%' => out.push_str("%25"),
            c => out.push(c),
        }
    }
}

fn decode(s: &str) -> Result<String, String> {
    if !s.contains('%') {
        return Ok(s.to_string());
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(pos) = rest.find('%') {
        out.push_str(&rest[..pos]);
        let esc = rest.get(pos..pos + 3).unwrap_or(&rest[pos..]);
        let c = match esc {
            "%09" => '\t',
            "%0A" => '\n',
            "%3B" => ';',
            "%3D" => '=',
            "%25" => '%',
            other => return Err(format!("invalid escape `{other}`")),
        };
        out.push(c);
        rest = &rest[pos + 3..];
    }
    out.push_str(rest);
    Ok(out)
}

fn node_line(node: &NodeRecord) -> String {
    let mut line = String::new();
    encode_into(&mut line, &node.id);
    line.push('\t');
    line.push_str(node.kind.as_str());
    line.push('\t');
    encode_into(&mut line, &node.attr_type);
    line.push('\t');
    encode_into(&mut line, &node.label);
    line.push('\t');
    if let Some(year) = node.year {
        line.push_str(&year.to_string());
    }
    line.push('\t');
    for (i, (k, v)) in node.props.iter().enumerate() {
        if i > 0 {
            line.push(';');
        }
        encode_into(&mut line, k);
        line.push('=');
        encode_into(&mut line, v);
    }
    line.push('\n');
    line
}

fn edge_line(edge: &EdgeRecord) -> String {
    let mut line = String::new();
    encode_into(&mut line, &edge.applicant_id);
    line.push('\t');
    encode_into(&mut line, &edge.attribute_id);
    line.push('\n');
    line
}

/// Serializes the graph into the two exchange streams.
pub fn write_exchange<N: Write, E: Write>(
    graph: &PropertyGraph,
    nodes: &mut N,
    edges: &mut E,
) -> io::Result<()> {
    writeln!(nodes, "{NODES_HEADER}")?;
    for node in graph.nodes() {
        nodes.write_all(node_line(node).as_bytes())?;
    }
    writeln!(edges, "{EDGES_HEADER}")?;
    for edge in graph.edges() {
        edges.write_all(edge_line(edge).as_bytes())?;
    }
    Ok(())
}

pub fn export_pg(graph: &PropertyGraph, base: &Path) -> Result<(), ExchangeError> {
    let (nodes_path, edges_path) = exchange_paths(base);
    let create = |p: &Path| {
        File::create(p)
            .map(BufWriter::new)
            .map_err(|source| ExchangeError::Io {
                path: p.to_path_buf(),
                source,
            })
    };
    let mut nodes = create(&nodes_path)?;
    let mut edges = create(&edges_path)?;
    write_exchange(graph, &mut nodes, &mut edges).map_err(|source| ExchangeError::Io {
        path: nodes_path.clone(),
        source,
    })?;
    for (w, p) in [(&mut nodes, &nodes_path), (&mut edges, &edges_path)] {
        w.flush().map_err(|source| ExchangeError::Io {
            path: p.clone(),
            source,
        })?;
    }
    Ok(())
}

pub fn import_pg(base: &Path) -> Result<PropertyGraph, ExchangeError> {
    let (nodes_path, edges_path) = exchange_paths(base);
    let open = |p: &Path| {
        File::open(p)
            .map(BufReader::new)
            .map_err(|source| ExchangeError::Io {
                path: p.to_path_buf(),
                source,
            })
    };
    read_exchange_named(
        open(&nodes_path)?,
        &nodes_path.display().to_string(),
        open(&edges_path)?,
        &edges_path.display().to_string(),
    )
}

/// Parses the two exchange streams back into a graph.
pub fn read_exchange<N: Read, E: Read>(nodes: N, edges: E) -> Result<PropertyGraph, ExchangeError> {
    read_exchange_named(
        BufReader::new(nodes),
        "nodes.tsv",
        BufReader::new(edges),
        "edges.tsv",
    )
}

/// Splits a stream into LF-terminated lines, yielding `(line_number, text)`.
fn lines<R: BufRead>(mut reader: R, file: &str) -> Result<Vec<(usize, String)>, ExchangeError> {
    let mut buf = Vec::new();
    reader
        .read_to_end(&mut buf)
        .map_err(|source| ExchangeError::Io {
            path: PathBuf::from(file),
            source,
        })?;
    let text = String::from_utf8(buf).map_err(|e| {
        let line = 1 + e.as_bytes()[..e.utf8_error().valid_up_to()]
            .iter()
            .filter(|b| **b == b'\n')
            .count();
        ExchangeError::Malformed {
            file: file.to_string(),
            line,
            reason: "invalid UTF-8".into(),
        }
    })?;
    let mut out: Vec<(usize, String)> = Vec::new();
    let mut parts = text.split('\n').enumerate().peekable();
    while let Some((i, part)) = parts.next() {
        if parts.peek().is_none() {
            if !part.is_empty() {
                return Err(ExchangeError::Malformed {
                    file: file.to_string(),
                    line: i + 1,
                    reason: "missing trailing newline".into(),
                });
            }
            break;
        }
        out.push((i + 1, part.to_string()));
    }
    Ok(out)
}

fn read_exchange_named<N: BufRead, E: BufRead>(
    nodes: N,
    nodes_file: &str,
    edges: E,
    edges_file: &str,
) -> Result<PropertyGraph, ExchangeError> {
    let malformed = |file: &str, line: usize, reason: String| ExchangeError::Malformed {
        file: file.to_string(),
        line,
        reason,
    };

    let mut graph = PropertyGraph::new();
    let node_lines = lines(nodes, nodes_file)?;
    match node_lines.first() {
        Some((_, h)) if h == NODES_HEADER => {}
        _ => return Err(malformed(nodes_file, 1, format!("expected header `{NODES_HEADER}`"))),
    }
    for (line, text) in &node_lines[1..] {
        let node = parse_node(text).map_err(|r| malformed(nodes_file, *line, r))?;
        if graph.node(&node.id).is_some() {
            return Err(malformed(nodes_file, *line, format!("duplicate node id `{}`", node.id)));
        }
        graph
            .insert_node(node)
            .map_err(|e| malformed(nodes_file, *line, e.to_string()))?;
    }

    let edge_lines = lines(edges, edges_file)?;
    match edge_lines.first() {
        Some((_, h)) if h == EDGES_HEADER => {}
        _ => return Err(malformed(edges_file, 1, format!("expected header `{EDGES_HEADER}`"))),
    }
    for (line, text) in &edge_lines[1..] {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 2 {
            return Err(malformed(
                edges_file,
                *line,
                format!("expected 2 fields, found {}", fields.len()),
            ));
        }
        let applicant_id = decode(fields[0]).map_err(|r| malformed(edges_file, *line, r))?;
        let attribute_id = decode(fields[1]).map_err(|r| malformed(edges_file, *line, r))?;
        for id in [&applicant_id, &attribute_id] {
            if graph.node(id).is_none() {
                return Err(ExchangeError::DanglingEdge {
                    file: edges_file.to_string(),
                    line: *line,
                    id: id.clone(),
                });
            }
        }
        graph
            .insert_edge(EdgeRecord::new(applicant_id, attribute_id))
            .map_err(|e: GraphError| malformed(edges_file, *line, e.to_string()))?;
    }
    Ok(graph)
}

fn parse_node(text: &str) -> Result<NodeRecord, String> {
    let fields: Vec<&str> = text.split('\t').collect();
    let [id, kind, attr_type, label, year, props] = fields[..] else {
        return Err(format!("expected 6 fields, found {}", fields.len()));
    };
    let kind: NodeKind = kind.parse()?;
    let year = if year.is_empty() {
        None
    } else {
        Some(year.parse().map_err(|_| format!("invalid year `{year}`"))?)
    };
    let mut prop_map = BTreeMap::new();
    if !props.is_empty() {
        for pair in props.split(';') {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| format!("property `{pair}` lacks `=`"))?;
            let k = decode(k)?;
            if k.is_empty() {
                return Err("empty property key".into());
            }
            let v = decode(v)?;
            if prop_map.insert(k.clone(), v).is_some() {
                return Err(format!("duplicate property key `{k}`"));
            }
        }
    }
    Ok(NodeRecord {
        id: decode(id)?,
        kind,
        attr_type: decode(attr_type)?,
        label: decode(label)?,
        year,
        props: prop_map,
    })
}
