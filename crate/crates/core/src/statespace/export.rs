use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use quick_xml::escape::escape;
use thiserror::Error;

use super::graph::StateGraph;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("unknown export format `{0}` (expected graphml or dot)")]
    UnknownFormat(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    GraphMl,
    Dot,
}

impl FromStr for ExportFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "graphml" => Ok(ExportFormat::GraphMl),
            "dot" => Ok(ExportFormat::Dot),
            _ => Err(ExportError::UnknownFormat(s.to_string())),
        }
    }
}

/// Writes `g` in `format`. `describe` renders a node's marking; pass a
/// trimming function to keep only top-level places.
pub fn export<M>(
    g: &StateGraph<M>,
    format: ExportFormat,
    describe: impl Fn(&M) -> String,
    mut out: impl io::Write,
) -> Result<(), ExportError> {
    let doc = match format {
        ExportFormat::GraphMl => to_graphml(g, describe),
        ExportFormat::Dot => to_dot(g, describe),
    };
    out.write_all(doc.as_bytes())?;
    Ok(())
}

/// GraphML document with node keys `marking` and `retained` and edge key
/// `event`.
pub fn to_graphml<M>(g: &StateGraph<M>, describe: impl Fn(&M) -> String) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"marking\" for=\"node\" attr.name=\"marking\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"retained\" for=\"node\" attr.name=\"retained\" attr.type=\"boolean\"/>\n");
    out.push_str("  <key id=\"root\" for=\"node\" attr.name=\"root\" attr.type=\"boolean\"/>\n");
    out.push_str("  <key id=\"event\" for=\"edge\" attr.name=\"event\" attr.type=\"string\"/>\n");
    out.push_str("  <graph id=\"statespace\" edgedefault=\"directed\">\n");
    let roots: Vec<usize> = g.roots().collect();
    for n in g.nodes() {
        let _ = writeln!(out, "    <node id=\"n{}\">", n.id);
        let _ = writeln!(out, "      <data key=\"marking\">{}</data>", escape(describe(&n.marking).as_str()));
        let _ = writeln!(out, "      <data key=\"retained\">{}</data>", n.retained);
        if roots.contains(&n.id) {
            out.push_str("      <data key=\"root\">true</data>\n");
        }
        out.push_str("    </node>\n");
    }
    for (i, a) in g.arcs().iter().enumerate() {
        let _ = writeln!(out, "    <edge id=\"e{i}\" source=\"n{}\" target=\"n{}\">", a.from, a.to);
        let _ = writeln!(out, "      <data key=\"event\">{}</data>", escape(a.label.as_str()));
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

fn dot_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// DOT digraph; node labels are ids, tooltips are marking descriptions.
/// Roots are drawn as double circles and removed nodes dashed.
pub fn to_dot<M>(g: &StateGraph<M>, describe: impl Fn(&M) -> String) -> String {
    let mut out = String::from("digraph statespace {\n");
    let roots: Vec<usize> = g.roots().collect();
    for n in g.nodes() {
        let mut attrs = vec![
            format!("label={}", dot_string(&n.id.to_string())),
            format!("tooltip={}", dot_string(&describe(&n.marking))),
        ];
        if roots.contains(&n.id) {
            attrs.push("shape=doublecircle".into());
        }
        if !n.retained {
            attrs.push("style=dashed".into());
        }
        let _ = writeln!(out, "  n{} [{}];", n.id, attrs.join(", "));
    }
    for a in g.arcs() {
        let _ = writeln!(out, "  n{} -> n{} [label={}];", a.from, a.to, dot_string(&a.label));
    }
    out.push_str("}\n");
    out
}
