//! Graphviz export of layered networks, `F_k` problems and restricted networks.

use std::fmt::Write as _;

use crate::layered::{FkInstance, LayeredState, RestrictedNetwork, Tail};
use crate::pedigree::Triangle;
use crate::rational::format;

fn node_id(state: &LayeredState, t: Tail) -> String {
    format!("\"{}\"", state.tail_label(t))
}

fn layer_rank(out: &mut String, nodes: &[Triangle]) {
    let mut layers: Vec<usize> = nodes.iter().map(|t| t.k).collect();
    layers.dedup();
    for l in layers {
        let ids: Vec<String> = nodes.iter().filter(|t| t.k == l).map(|t| format!("\"{t}\"")).collect();
        let _ = writeln!(out, "  {{ rank = same; {} }}", ids.join("; "));
    }
}

pub fn state_dot(state: &LayeredState) -> String {
    let mut out = format!("digraph N{} {{\n  rankdir = LR;\n", state.k);
    let nodes: Vec<Triangle> = state.nodes.keys().copied().collect();
    for (t, c) in &state.nodes {
        let _ = writeln!(out, "  \"{t}\" [label = \"{t}\\n{}\"];", format(c));
    }
    for (i, r) in state.rigid.iter().enumerate() {
        let shape = if r.is_alive() { "box" } else { "box, style = dashed" };
        let _ = writeln!(
            out,
            "  {} [shape = {shape}, label = \"R[{}]:{i}\\n{:?}\\n{}\"];",
            node_id(state, Tail::Shrunk(i)),
            r.stage,
            r.pedigree,
            format(&r.mu)
        );
    }
    layer_rank(&mut out, &nodes);
    for a in &state.arcs {
        let _ = writeln!(
            out,
            "  {} -> \"{}\" [label = \"{}\"];",
            node_id(state, a.tail),
            a.head,
            format(&a.cap)
        );
    }
    out.push_str("}\n");
    out
}

pub fn fk_dot(state: &LayeredState, fk: &FkInstance, flow: Option<&[crate::rational::Rational]>) -> String {
    let mut out = format!("digraph F{} {{\n  rankdir = LR;\n", fk.k);
    for (o, s) in fk.origins.iter().zip(&fk.problem.supply) {
        let _ = writeln!(out, "  {} [label = \"{}\\n{}\"];", node_id(state, *o), state.tail_label(*o), format(s));
    }
    for (d, b) in fk.dests.iter().zip(&fk.problem.demand) {
        let _ = writeln!(out, "  \"{d}\" [label = \"{d}\\n{}\"];", format(b));
    }
    for (a, arc) in fk.problem.arcs.iter().enumerate() {
        let cap = arc.cap.as_ref().map_or("inf".to_string(), format);
        let label = match flow {
            Some(f) => format!("{}/{cap}", format(&f[a])),
            None => cap,
        };
        let _ = writeln!(
            out,
            "  {} -> \"{}\" [label = \"{label}\"];",
            node_id(state, fk.origins[arc.origin]),
            fk.dests[arc.dest]
        );
    }
    out.push_str("}\n");
    out
}

pub fn restricted_dot(state: &LayeredState, rn: &RestrictedNetwork) -> String {
    let (u, v) = rn.link;
    let mut out = format!("digraph L {{\n  rankdir = LR;\n  label = \"{u} -> {v}\";\n");
    for t in &rn.nodes {
        let shape = if *t == u { ", shape = doublecircle" } else { "" };
        let _ = writeln!(out, "  \"{t}\" [label = \"{t}\\n{}\"{shape}];", format(&state.nodes[t]));
    }
    for t in &rn.deleted {
        let _ = writeln!(out, "  \"{t}\" [style = dotted];");
    }
    for &p in &rn.shrunk {
        let _ = writeln!(out, "  {} [shape = box];", node_id(state, Tail::Shrunk(p)));
    }
    layer_rank(&mut out, &rn.nodes);
    for &a in &rn.arcs {
        let arc = &state.arcs[a];
        let _ = writeln!(out, "  {} -> \"{}\" [label = \"{}\"];", node_id(state, arc.tail), arc.head, format(&arc.cap));
    }
    out.push_str("}\n");
    out
}
