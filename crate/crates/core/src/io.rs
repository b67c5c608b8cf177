//! Edge-list text format: one `u v` pair per line, 0-based, whitespace
//! separated, undirected edges listed once; `#` starts a comment line.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// Reads an edge list. The vertex count is one past the largest index seen.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    let mut max_vertex: Option<Vertex> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse = |field: Option<&str>| -> Result<Vertex> {
            field
                .ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    message: "expected two vertex indices".to_string(),
                })?
                .parse()
                .map_err(|e| Error::Parse { line: lineno + 1, message: format!("{e}") })
        };
        let u = parse(fields.next())?;
        let v = parse(fields.next())?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: lineno + 1,
                message: "trailing fields after edge".to_string(),
            });
        }
        max_vertex = Some(max_vertex.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u, v));
    }
    let n = max_vertex.map_or(0, |m| m + 1);
    Graph::from_edges(n, &edges)
}

/// Writes each undirected edge once as `u v` with `u < v`, sorted.
pub fn write_edge_list<W: Write>(graph: &Graph, mut writer: W) -> Result<()> {
    for u in 0..graph.num_vertices() {
        for &v in graph.neighbors(u)? {
            if u < v as Vertex {
                writeln!(writer, "{u} {v}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_exact() {
        let g = Graph::complete(4).unwrap().kron_power(2).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let h = read_edge_list(buf.as_slice()).unwrap();
        assert_eq!(h.num_vertices(), g.num_vertices());
        for u in 0..g.num_vertices() {
            assert_eq!(h.neighbors(u).unwrap(), g.neighbors(u).unwrap());
        }
        let mut buf2 = Vec::new();
        write_edge_list(&h, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# a comment\n\n0 1\n1 2\n";
        let g = read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.neighbors(1).unwrap(), &[0, 2]);
    }

    #[test]
    fn malformed_lines_error() {
        assert!(matches!(read_edge_list("0".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_edge_list("0 1 2".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_edge_list("a b".as_bytes()), Err(Error::Parse { .. })));
    }
}
