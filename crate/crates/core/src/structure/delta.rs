//! The Schreier graph of the power-set action reachable from {e}.
//!
//! Letters act on subsets of the nucleus by x . Y = {g : g(x) = x, g|_x in Y};
//! the vertex reached from {e} along the reversed letters of w is exactly the
//! set of nucleus elements strongly fixing w. Minimal vertices are those in a
//! strongly connected component with no exit; they index the projections the
//! simplicity condition quantifies over.

use std::collections::HashMap;

use super::{letter_action, SubsetVertex};
use crate::presentation::{Letter, NucleusAutomaton, StateId};
use crate::scc::tarjan_scc;

#[derive(Clone, Debug)]
pub struct DeltaGraph {
    /// Vertices in breadth-first discovery order; vertex 0 is {e}.
    vertices: Vec<SubsetVertex>,
    /// edges[v][x] = index of x . vertices[v].
    edges: Vec<Vec<usize>>,
    minimal: Vec<bool>,
}

impl DeltaGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[SubsetVertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &SubsetVertex {
        &self.vertices[v]
    }

    pub fn edge(&self, v: usize, x: Letter) -> usize {
        self.edges[v][x.0 as usize]
    }

    pub fn is_minimal(&self, v: usize) -> bool {
        self.minimal[v]
    }

    /// Indices of minimal vertices in canonical (member-list) order.
    pub fn minimal_vertices(&self) -> Vec<usize> {
        let mut ids: Vec<usize> =
            (0..self.vertices.len()).filter(|&v| self.minimal[v]).collect();
        ids.sort_by(|&a, &b| self.vertices[a].cmp(&self.vertices[b]));
        ids
    }

    pub fn vertex_index(&self, subset: &SubsetVertex) -> Option<usize> {
        self.vertices.iter().position(|v| v == subset)
    }
}

/// Breadth-first closure of {e} under the letter actions, with minimal
/// vertices marked from the component structure.
pub fn build_delta(aut: &NucleusAutomaton) -> DeltaGraph {
    let start = SubsetVertex::new(vec![aut.identity()]);
    let mut vertices = vec![start.clone()];
    let mut index: HashMap<SubsetVertex, usize> = HashMap::from([(start, 0)]);
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut head = 0usize;
    while head < vertices.len() {
        let mut row = Vec::with_capacity(aut.alphabet_size());
        for x in aut.letters() {
            let next_members: Vec<StateId> = letter_action(aut, x, vertices[head].members());
            let next = SubsetVertex::new(next_members);
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    vertices.push(next.clone());
                    index.insert(next, vertices.len() - 1);
                    vertices.len() - 1
                }
            };
            row.push(id);
        }
        edges.push(row);
        head += 1;
    }

    let scc = tarjan_scc(vertices.len(), |v, i| edges[v].get(i).copied());
    let mut has_exit = vec![false; scc.count];
    for (v, row) in edges.iter().enumerate() {
        for &w in row {
            if scc.comp_of[v] != scc.comp_of[w] {
                has_exit[scc.comp_of[v] as usize] = true;
            }
        }
    }
    let minimal = (0..vertices.len())
        .map(|v| !has_exit[scc.comp_of[v] as usize])
        .collect();

    DeltaGraph { vertices, edges, minimal }
}

#[cfg(test)]
mod tests {
    use super::super::tests as fixtures;
    use super::*;
    use crate::presentation::parse_presentation;

    fn vertex_names(aut: &NucleusAutomaton, d: &DeltaGraph) -> Vec<String> {
        d.vertices().iter().map(|v| v.display(aut)).collect()
    }

    #[test]
    fn grigorchuk_delta_matches_figure() {
        let aut = parse_presentation(fixtures::GRIGORCHUK).unwrap();
        let d = build_delta(&aut);
        assert_eq!(
            vertex_names(&aut, &d),
            vec!["{e}", "{e,d}", "{e,c}", "{e,b}"]
        );
        let idx =
            |name: &str| d.vertices().iter().position(|v| v.display(&aut) == name).unwrap();
        let expect = [
            ("{e}", 0, "{e,d}"),
            ("{e}", 1, "{e}"),
            ("{e,d}", 0, "{e,d}"),
            ("{e,d}", 1, "{e,c}"),
            ("{e,c}", 0, "{e,d}"),
            ("{e,c}", 1, "{e,b}"),
            ("{e,b}", 0, "{e,d}"),
            ("{e,b}", 1, "{e,d}"),
        ];
        for (from, x, to) in expect {
            assert_eq!(
                d.edge(idx(from), Letter(x)),
                idx(to),
                "edge {from} --{x}--> {to}"
            );
        }
        let minimal: Vec<String> =
            d.minimal_vertices().iter().map(|&v| d.vertex(v).display(&aut)).collect();
        assert_eq!(minimal, vec!["{e,b}", "{e,c}", "{e,d}"]);
        assert!(!d.is_minimal(idx("{e}")));
    }

    #[test]
    fn grigorchuk_erschler_delta_matches_figure() {
        let aut = parse_presentation(fixtures::GRIGORCHUK_ERSCHLER).unwrap();
        let d = build_delta(&aut);
        assert_eq!(vertex_names(&aut, &d), vec!["{e}", "{e,d}", "{e,c}"]);
        let minimal: Vec<String> =
            d.minimal_vertices().iter().map(|&v| d.vertex(v).display(&aut)).collect();
        assert_eq!(minimal, vec!["{e,c}", "{e,d}"]);
    }

    #[test]
    fn trivial_delta_is_a_point() {
        let aut =
            parse_presentation("alphabet 0 1\nstate e : 0 -> 0 . e , 1 -> 1 . e\n").unwrap();
        let d = build_delta(&aut);
        assert_eq!(d.vertex_count(), 1);
        assert!(d.is_minimal(0));
        assert_eq!(d.minimal_vertices(), vec![0]);
    }

    #[test]
    fn every_vertex_contains_the_identity_and_is_deterministic() {
        let aut = parse_presentation(fixtures::GRIGORCHUK).unwrap();
        let d = build_delta(&aut);
        for v in 0..d.vertex_count() {
            assert!(d.vertex(v).contains(aut.identity()));
            for x in aut.letters() {
                assert!(d.edge(v, x) < d.vertex_count());
            }
        }
    }
}
