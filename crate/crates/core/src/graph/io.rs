//! Edge-list text format: one `u v` pair per line, 0-based, `#` starts a
//! comment. A `# vertices N` comment fixes the vertex count; otherwise it is
//! one more than the largest endpoint.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut declared_n = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (body, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        if let Some(c) = comment {
            let mut words = c.split_whitespace();
            if words.next() == Some("vertices") {
                let value = words.next().ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: "missing vertex count".into(),
                })?;
                declared_n = Some(value.parse::<usize>().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: e.to_string(),
                })?);
            }
        }
        let mut fields = body.split_whitespace();
        let Some(a) = fields.next() else { continue };
        let b = fields.next().ok_or_else(|| Error::Parse {
            line: line_no,
            msg: "expected two endpoints".into(),
        })?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: "trailing fields".into(),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("{s:?}: {e}"),
            })
        };
        edges.push((parse(a)?, parse(b)?));
    }
    let n = declared_n.unwrap_or_else(|| {
        edges
            .iter()
            .map(|&(u, v)| u.max(v) + 1)
            .max()
            .unwrap_or(0)
    });
    Graph::from_edges(n, &edges)
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    parse_edge_list(&fs::read_to_string(path)?)
}

/// Writes the canonical edge list with a `# vertices N` header.
pub fn write_edge_list(g: &Graph, mut out: impl Write) -> Result<()> {
    writeln!(out, "# vertices {}", g.n())?;
    writeln!(out, "# edges {}", g.m())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}
