//! Line-oriented graph files.
//!
//! ```text
//! # comment
//! graph <n> <m>
//! edge <u> <v> <w>      (m lines)
//! port <u> <v> <p>      (optional: port of edge {u,v} at u)
//! ```
//!
//! A graph with one node and no edges is node `0`. Output is canonical:
//! edges sorted by `(min id, max id)`, and port lines only for nodes whose
//! ports differ from the default assignment.

use std::fmt::Write;

use certroute_core::{Edge, NodeId, Port, PortOverride, WeightedGraph};

use crate::error::{Error, ParseError};

fn number<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::new(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| ParseError::new(line, format!("bad {what} `{tok}`")))
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph, Error> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut ports = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let word = toks.next().unwrap_or("");
        if header.is_none() && word != "graph" {
            return Err(ParseError::new(line, "expected `graph <n> <m>` first").into());
        }
        match word {
            "graph" => {
                if header.is_some() {
                    return Err(ParseError::new(line, "second graph header").into());
                }
                header = Some((number(toks.next(), line, "n")?, number(toks.next(), line, "m")?));
            }
            "edge" => {
                let u = number(toks.next(), line, "endpoint")?;
                let v = number(toks.next(), line, "endpoint")?;
                let w = number(toks.next(), line, "weight")?;
                edges.push(Edge::new(u, v, w));
            }
            "port" => {
                let u: u64 = number(toks.next(), line, "node")?;
                let v: u64 = number(toks.next(), line, "neighbor")?;
                let p: u32 = number(toks.next(), line, "port")?;
                ports.push(PortOverride { node: NodeId(u), neighbor: NodeId(v), port: Port(p) });
            }
            other => return Err(ParseError::new(line, format!("unknown record `{other}`")).into()),
        }
        if toks.next().is_some() {
            return Err(ParseError::new(line, "trailing fields").into());
        }
    }
    let (n, m) = header.ok_or_else(|| ParseError::new(0, "missing graph header"))?;
    if edges.len() != m {
        return Err(ParseError::new(0, format!("header says {m} edges, found {}", edges.len())).into());
    }
    let nodes = if n == 1 && m == 0 { vec![NodeId(0)] } else { Vec::new() };
    let g = WeightedGraph::new(nodes, &edges, &ports)?;
    if g.n() != n {
        return Err(ParseError::new(0, format!("header says {n} nodes, edges mention {}", g.n())).into());
    }
    Ok(g)
}

pub fn write_graph(g: &WeightedGraph) -> String {
    let edges = g.edges();
    let mut out = format!("graph {} {}\n", g.n(), edges.len());
    for e in &edges {
        writeln!(out, "edge {} {} {}", e.a, e.b, e.weight).unwrap();
    }
    for v in (0..g.n()).filter(|&v| !g.has_canonical_ports(v)) {
        for inc in g.incident(v) {
            writeln!(out, "port {} {} {}", g.id(v), g.id(inc.neighbor), inc.port.0).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_ports_are_read() {
        let text = "# triangle\ngraph 3 3\nedge 1 2 5\nedge 2 3 1 # light\nedge 1 3 2\nport 1 2 2\nport 1 3 1\n";
        let g = parse_graph(text).unwrap();
        let one = g.index_of(NodeId(1)).unwrap();
        assert_eq!(g.port_to(one, g.index_of(NodeId(3)).unwrap()), Some(Port(1)));
        assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
        assert!(write_graph(&g).contains("port 1 3 1"));
    }

    #[test]
    fn bad_inputs_name_the_line() {
        let e = parse_graph("graph 2 1\nedge 1 x 3\n").unwrap_err();
        assert!(e.to_string().starts_with("line 2"), "{e}");
        assert!(parse_graph("edge 1 2 3\n").is_err());
        assert!(parse_graph("graph 2 2\nedge 1 2 3\n").is_err());
        assert!(matches!(parse_graph("graph 3 1\nedge 1 2 3\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_graph("graph 2 1\nedge 1 2 0\n"), Err(Error::Graph(_))));
    }

    #[test]
    fn single_node() {
        let g = parse_graph("graph 1 0\n").unwrap();
        assert_eq!(g.ids(), &[NodeId(0)]);
        assert_eq!(write_graph(&g), "graph 1 0\n");
    }
}
