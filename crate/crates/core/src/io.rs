//! Plain-text graph and signal files.
//!
//! Edge lists hold one edge per line, `u v` or `u v w`, with 0-based vertex
//! ids and an optional nonnegative weight. Signals hold one value per line
//! (line order is vertex order) or `vertex,value` pairs. In both formats `#`
//! starts a comment and blank lines are ignored. A comment of the form
//! `# vertices: N` fixes the vertex count of an edge list; otherwise it is one
//! more than the largest id.
//!
//! Reals are written in the shortest form that parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{EdgeWeighting, Graph};

/// Parsed contents of an edge-list file.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub graph: Graph,
    /// Present when every edge line carries a weight.
    pub weights: Option<EdgeWeighting>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn vertex_directive(line: &str) -> Option<&str> {
    let rest = line.trim().strip_prefix('#')?.trim();
    rest.strip_prefix("vertices:").map(str::trim)
}

fn parse_real(token: &str, line: usize, what: &str) -> Result<f64> {
    let x: f64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} {token:?}")))?;
    if !x.is_finite() {
        return Err(parse_err(line, format!("non-finite {what} {token:?}")));
    }
    Ok(x)
}

fn parse_id(token: &str, line: usize) -> Result<usize> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid vertex id {token:?}")))
}

/// Parses an edge list. Errors carry 1-based line numbers.
pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut declared = None;
    let mut raw = Vec::new();
    let mut weighted = None;
    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        if let Some(value) = vertex_directive(line) {
            let n = value
                .parse::<usize>()
                .map_err(|_| parse_err(lineno, format!("invalid vertex count {value:?}")))?;
            declared = Some(n);
            continue;
        }
        let body = strip_comment(line);
        if body.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let has_weight = match tokens.len() {
            2 => false,
            3 => true,
            m => return Err(parse_err(lineno, format!("expected 2 or 3 fields, found {m}"))),
        };
        if *weighted.get_or_insert(has_weight) != has_weight {
            return Err(parse_err(lineno, "some edges are weighted and some are not"));
        }
        let u = parse_id(tokens[0], lineno)?;
        let v = parse_id(tokens[1], lineno)?;
        let w = if has_weight {
            let w = parse_real(tokens[2], lineno, "weight")?;
            if w < 0.0 {
                return Err(parse_err(lineno, format!("negative weight {w}")));
            }
            Some(w)
        } else {
            None
        };
        if u == v {
            return Err(parse_err(lineno, format!("self-loop at vertex {u}")));
        }
        raw.push((lineno, u, v, w));
    }

    let n = match declared {
        Some(n) => n,
        None => raw.iter().map(|&(_, u, v, _)| u.max(v) + 1).max().unwrap_or(0),
    };
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if let Some(&(lineno, u, v, _)) = raw.iter().find(|&&(_, u, v, _)| u >= n || v >= n) {
        return Err(parse_err(lineno, format!("edge ({u}, {v}) outside 0..{n}")));
    }
    // Report duplicates against the line that repeats an earlier edge.
    let mut seen = std::collections::HashMap::new();
    for &(lineno, u, v, _) in &raw {
        if let Some(first) = seen.insert((u.min(v), u.max(v)), lineno) {
            return Err(parse_err(
                lineno,
                format!("duplicate edge ({u}, {v}), first given on line {first}"),
            ));
        }
    }

    let graph = Graph::new(n, raw.iter().map(|&(_, u, v, _)| (u, v)))?;
    let weights = match weighted {
        Some(true) => {
            let mut w = vec![0.0; graph.num_edges()];
            for &(_, u, v, wt) in &raw {
                let e = graph.edge_index(u, v).expect("edge was just inserted");
                w[e] = wt.expect("weighted line");
            }
            Some(EdgeWeighting::new(w, &graph)?)
        }
        _ => None,
    };
    Ok(EdgeList { graph, weights })
}

fn push_header(out: &mut String, header: &[String]) {
    for line in header {
        for part in line.lines() {
            let _ = writeln!(out, "# {part}");
        }
    }
}

/// Formats a graph, and optionally per-edge weights, as an edge list.
pub fn format_edge_list(g: &Graph, weights: Option<&EdgeWeighting>, header: &[String]) -> String {
    let mut out = String::new();
    push_header(&mut out, header);
    let _ = writeln!(out, "# vertices: {}", g.n());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        match weights {
            Some(w) => {
                let _ = writeln!(out, "{u} {v} {}", w.get(e));
            }
            None => {
                let _ = writeln!(out, "{u} {v}");
            }
        }
    }
    out
}

/// Parses a signal: one value per line, or `vertex,value` lines covering
/// every vertex exactly once (an optional `vertex,value` header is skipped).
pub fn parse_signal(text: &str) -> Result<Vec<f64>> {
    let mut plain = Vec::new();
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    let mut csv = None;
    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        let body = strip_comment(line);
        if body.is_empty() {
            continue;
        }
        let is_pair = body.contains(',');
        if *csv.get_or_insert(is_pair) != is_pair {
            return Err(parse_err(lineno, "mixes plain values and vertex,value pairs"));
        }
        if is_pair {
            let fields: Vec<&str> = body.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(parse_err(lineno, format!("expected vertex,value, found {body:?}")));
            }
            if pairs.is_empty() && fields[0].eq_ignore_ascii_case("vertex") {
                continue;
            }
            let v = parse_id(fields[0], lineno)?;
            pairs.push((lineno, v, parse_real(fields[1], lineno, "value")?));
        } else {
            plain.push(parse_real(body, lineno, "value")?);
        }
    }
    if csv != Some(true) {
        return Ok(plain);
    }
    let n = pairs.len();
    let mut values = vec![None; n];
    for &(lineno, v, x) in &pairs {
        if v >= n {
            return Err(parse_err(lineno, format!("vertex {v} outside 0..{n}")));
        }
        if values[v].replace(x).is_some() {
            return Err(parse_err(lineno, format!("vertex {v} given twice")));
        }
    }
    Ok(values.into_iter().map(|x| x.expect("every slot filled")).collect())
}

/// Formats a signal with one value per line.
pub fn format_signal(values: &[f64], header: &[String]) -> String {
    let mut out = String::new();
    push_header(&mut out, header);
    for x in values {
        let _ = writeln!(out, "{x}");
    }
    out
}

pub fn read_edge_list(path: &Path) -> Result<EdgeList> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_edge_list(&text)
}

pub fn read_signal(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_signal(&text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
