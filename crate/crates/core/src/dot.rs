//! Graphviz export for debugging.

use std::fmt::Write;

use crate::graph::{ArcId, DirectedMultigraph, VertexId};

/// Renders `g` as a `digraph`. The closures supply extra vertex attributes
/// (e.g. `shape=box`) and arc labels; return `None` to use the defaults.
pub fn to_dot<V, A>(g: &DirectedMultigraph, name: &str, vertex_attrs: V, arc_label: A) -> String
where
    V: Fn(VertexId) -> Option<String>,
    A: Fn(ArcId) -> Option<String>,
{
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    for v in g.vertices() {
        match vertex_attrs(v) {
            Some(attrs) => writeln!(out, "  {} [{}];", v.0, attrs).unwrap(),
            None => writeln!(out, "  {};", v.0).unwrap(),
        }
    }
    for a in g.arc_ids() {
        let label = arc_label(a).unwrap_or_else(|| a.0.to_string());
        writeln!(out, "  {} -> {} [label={}];", g.tail(a).0, g.head(a).0, quote(&label)).unwrap();
    }
    out.push_str("}\n");
    out
}

pub(crate) fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}
