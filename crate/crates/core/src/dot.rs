//! Graphviz DOT export with stable vertex and edge ordering.
//!
//! Cyclic vertices of the letter-fixing graph and minimal vertices of the
//! power-set graph are drawn with `peripheries=2`.

use std::fmt::Write;

use crate::presentation::NucleusAutomaton;
use crate::structure::{DeltaGraph, StrongFixGraph, SubsetDigraphView};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// The letter-fixing subgraph; cyclic vertices double-circled.
pub fn strongfix_dot(aut: &NucleusAutomaton, h: &StrongFixGraph) -> String {
    let mut out = String::from("digraph strongfix {\n  rankdir=LR;\n  node [shape=circle];\n");
    for id in aut.state_ids() {
        let attrs = if h.is_cyclic(id) { " [peripheries=2]" } else { "" };
        writeln!(out, "  {}{};", quote(aut.state_name(id)), attrs).unwrap();
    }
    for (g, x, t) in h.edges() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(aut.state_name(g)),
            quote(aut.state_name(t)),
            quote(aut.letter_token(x))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// The power-set Schreier graph; minimal vertices double-circled.
pub fn delta_dot(aut: &NucleusAutomaton, d: &DeltaGraph) -> String {
    let mut out = String::from("digraph delta {\n  rankdir=LR;\n  node [shape=circle];\n");
    for v in 0..d.vertex_count() {
        let attrs = if d.is_minimal(v) { " [peripheries=2]" } else { "" };
        writeln!(out, "  {}{};", quote(&d.vertex(v).display(aut)), attrs).unwrap();
    }
    for v in 0..d.vertex_count() {
        for x in aut.letters() {
            let w = d.edge(v, x);
            writeln!(
                out,
                "  {} -> {} [label={}];",
                quote(&d.vertex(v).display(aut)),
                quote(&d.vertex(w).display(aut)),
                quote(aut.letter_token(x))
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// The subset digraph (or a truncation of it); on-cycle vertices double-circled.
pub fn subset_digraph_dot(aut: &NucleusAutomaton, view: &SubsetDigraphView) -> String {
    let mut out =
        String::from("digraph subsets {\n  rankdir=LR;\n  node [shape=circle];\n");
    for (v, cyclic) in &view.vertices {
        let attrs = if *cyclic { " [peripheries=2]" } else { "" };
        writeln!(out, "  {}{};", quote(&v.display(aut)), attrs).unwrap();
    }
    for &(from, x, to) in &view.edges {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&view.vertices[from].0.display(aut)),
            quote(&view.vertices[to].0.display(aut)),
            quote(aut.letter_token(x))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
