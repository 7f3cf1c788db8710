//! Graphviz output.
//!
//! The emitter is canonical: vertices are numbered by their storage order,
//! so two structurally identical drags print byte-identically no matter
//! which vertex ids they carry.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::drag::{Drag, VertexId};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders a drag as a DOT digraph. Internal vertices are ellipses labeled
/// `name:symbol`, sprouts are boxes labeled `$var`, every root bundle is a
/// bold arrow from an invisible marker node carrying the multiplicity, and
/// edges carry their 1-based successor position.
pub fn emit_dot(d: &Drag) -> String {
    let index: BTreeMap<VertexId, usize> =
        d.vertex_ids().enumerate().map(|(i, v)| (v, i)).collect();
    let mut out = String::from("digraph drag {\n");
    for v in d.vertex_ids() {
        let i = index[&v];
        match d.variable(v) {
            Some(var) => {
                let _ = writeln!(out, "  n{} [shape=box,label=\"${}\"];", i, escape(var));
            }
            None => {
                let _ = writeln!(
                    out,
                    "  n{} [shape=ellipse,label=\"{}:{}\"];",
                    i,
                    escape(d.name(v)),
                    escape(d.label(v).symbol().unwrap_or(""))
                );
            }
        }
    }
    for v in d.vertex_ids() {
        if d.roots(v) > 0 {
            let i = index[&v];
            let _ = writeln!(out, "  r{} [shape=none,label=\"\"];", i);
            let _ = writeln!(out, "  r{} -> n{} [style=bold,label=\"{}\"];", i, i, d.roots(v));
        }
    }
    for v in d.vertex_ids() {
        for (slot, &h) in d.successors(v).iter().enumerate() {
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"{}\"];",
                index[&v],
                index[&h],
                slot + 1
            );
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_drag;

    #[test]
    fn the_empty_drag_prints_an_empty_body() {
        assert_eq!(emit_dot(&Drag::empty()), "digraph drag {\n}\n");
    }

    #[test]
    fn a_rooted_sprout_prints_a_box_and_a_bold_marker() {
        let d = parse_drag("{s: $x[2]}").unwrap();
        let dot = emit_dot(&d);
        assert_eq!(
            dot,
            "digraph drag {\n  n0 [shape=box,label=\"$x\"];\n  r0 [shape=none,label=\"\"];\n  r0 -> n0 [style=bold,label=\"2\"];\n}\n"
        );
    }

    #[test]
    fn the_collected_figure_has_three_of_everything() {
        let d = parse_drag("{f: f[1](h); g: g[1](h); h: h[1](h)}").unwrap();
        let dot = emit_dot(&d);
        assert_eq!(dot.matches("shape=ellipse").count(), 3);
        assert_eq!(dot.matches("style=bold").count(), 3);
        assert_eq!(dot.matches("label=\"1\"").count(), 6);
        assert!(dot.contains("-> n2 [label=\"1\"];"));
        let h = dot.lines().find(|l| l.contains("h:h")).unwrap();
        let n = h.split_whitespace().next().unwrap();
        assert!(dot.contains(&format!("  {} -> {} [label=\"1\"];", n, n)));
    }

    #[test]
    fn output_is_stable_across_reparses() {
        let literal = "{f: f[1](x, a); x: $x; a: a[1]}";
        let once = emit_dot(&parse_drag(literal).unwrap());
        let twice = emit_dot(&parse_drag(literal).unwrap());
        assert_eq!(once, twice);
        assert!(once.contains("label=\"2\"];"));
    }

    #[test]
    fn quotes_and_backslashes_are_escaped() {
        assert_eq!(escape(r#"a"b\c"#), r#"a\"b\\c"#);
    }
}
