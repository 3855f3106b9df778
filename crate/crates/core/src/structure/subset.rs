//! The digraph on letter-fixing subsets of the cyclic set.
//!
//! Vertices are subsets of the cyclic set; an x-edge A -> B exists when the
//! partial map g -> g|_x (defined where g fixes x) is total and injective on
//! A with image B. A subset lies inside some subgroup of strongly-fixing
//! elements exactly when it lies on a directed cycle here, so cycle vertices
//! are what the verdict consumes.
//!
//! Only subsets containing the identity are enumerated: e has a fixing loop
//! on every letter, adjoining it preserves cycle membership, and every
//! maximal cycle subset contains it. That halves the exponent; the digraph
//! still has 2^(|C|-1) vertices and is explored without materializing edges.

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use super::{StrongFixGraph, SubsetVertex};
use crate::presentation::{Letter, NucleusAutomaton, StateId, Word};
use crate::scc::tarjan_scc;

/// Default cap on subset-digraph vertices (the algorithm is intrinsically
/// exponential in the cyclic set).
pub const DEFAULT_SUBSET_CAPACITY: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubsetError {
    #[error(
        "subset digraph over {cyclic} cyclic states needs 2^{exponent} vertices, \
         exceeding the capacity of {capacity}"
    )]
    CapacityExceeded { cyclic: usize, exponent: usize, capacity: u64 },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

/// A maximal cycle subset together with a word w such that the subset equals
/// {g : g(w) = w, g|_w = g} exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicSubgroupWitness {
    pub elements: SubsetVertex,
    pub word: Word,
}

/// The deterministic partial automaton on identity-containing subsets of the
/// cyclic set, with subsets encoded as bit masks over the nontrivial part.
struct SubsetDigraph {
    /// Nontrivial cyclic states; mask bit i stands for members[i].
    members: Vec<StateId>,
    /// step[x][i] = Some(j): the x-edge sends members[i] to members[j];
    /// None when the edge is missing, leaves the cyclic set, or hits e.
    step: Vec<Vec<Option<u32>>>,
    letters: usize,
}

impl SubsetDigraph {
    fn build(h: &StrongFixGraph, capacity: u64) -> Result<Self, SubsetError> {
        let cyclic = h.cyclic_set();
        let e = h.identity();
        let members: Vec<StateId> =
            cyclic.members().iter().copied().filter(|&g| g != e).collect();
        let m = members.len();
        if m >= 63 || (1u64 << m) > capacity {
            return Err(SubsetError::CapacityExceeded {
                cyclic: cyclic.len(),
                exponent: m,
                capacity,
            });
        }
        let pos: HashMap<StateId, u32> =
            members.iter().enumerate().map(|(i, &g)| (g, i as u32)).collect();
        let letters = h.alphabet_size();
        let step = (0..letters)
            .map(|x| {
                members
                    .iter()
                    .map(|&g| {
                        let t = h.edge(g, Letter(x as u16))?;
                        if t == e {
                            // Would collide with e's own loop.
                            return None;
                        }
                        pos.get(&t).copied()
                    })
                    .collect()
            })
            .collect();
        Ok(SubsetDigraph { members, step, letters })
    }

    fn vertex_count(&self) -> usize {
        1usize << self.members.len()
    }

    /// The x-successor of a mask, requiring totality and injectivity.
    fn edge(&self, mask: u64, x: usize) -> Option<u64> {
        let mut image = 0u64;
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let j = self.step[x][i]?;
            let bit = 1u64 << j;
            if image & bit != 0 {
                return None;
            }
            image |= bit;
        }
        Some(image)
    }

    /// Masks lying on a directed cycle (component size >= 2 or self-loop).
    fn cycle_masks(&self) -> Vec<u64> {
        let n = self.vertex_count();
        let scc = tarjan_scc(n, |v, i| {
            let mut seen = 0usize;
            for x in 0..self.letters {
                if let Some(b) = self.edge(v as u64, x) {
                    if seen == i {
                        return Some(b as usize);
                    }
                    seen += 1;
                }
            }
            None
        });
        let sizes = scc.comp_sizes();
        (0..n as u64)
            .filter(|&v| {
                sizes[scc.comp_of[v as usize] as usize] >= 2
                    || (0..self.letters).any(|x| self.edge(v, x) == Some(v))
            })
            .collect()
    }

    fn to_subset(&self, mask: u64, e: StateId) -> SubsetVertex {
        let mut members = vec![e];
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            members.push(self.members[i]);
        }
        SubsetVertex::new(members)
    }

    /// Label of a shortest cycle through `mask` (smallest letters first).
    fn cycle_word(&self, mask: u64) -> Option<Word> {
        let mut prev: HashMap<u64, (u64, u16)> = HashMap::new();
        let mut seen: HashSet<u64> = HashSet::from([mask]);
        let mut queue = VecDeque::from([mask]);
        while let Some(v) = queue.pop_front() {
            for x in 0..self.letters {
                let Some(w) = self.edge(v, x) else { continue };
                if w == mask {
                    let mut letters = vec![Letter(x as u16)];
                    let mut cur = v;
                    while cur != mask {
                        let (p, px) = prev[&cur];
                        letters.push(Letter(px));
                        cur = p;
                    }
                    letters.reverse();
                    return Some(Word(letters));
                }
                if seen.insert(w) {
                    prev.insert(w, (v, x as u16));
                    queue.push_back(w);
                }
            }
        }
        None
    }
}

/// A materialized (and possibly truncated) rendering of the subset digraph,
/// for export and inspection on small instances.
#[derive(Clone, Debug)]
pub struct SubsetDigraphView {
    /// Subset vertices (identity included) with their on-cycle mark, in
    /// mask order.
    pub vertices: Vec<(SubsetVertex, bool)>,
    /// Edges among the retained vertices, indices into `vertices`.
    pub edges: Vec<(usize, Letter, usize)>,
}

/// Enumerates the subset digraph, keeping only the first `limit` vertices
/// (all of them when `None`). Cycle marks are computed on the full digraph.
pub fn subset_digraph_view(
    h: &StrongFixGraph,
    capacity: u64,
    limit: Option<usize>,
) -> Result<SubsetDigraphView, SubsetError> {
    let dg = SubsetDigraph::build(h, capacity)?;
    let e = h.identity();
    let cycle_masks: HashSet<u64> = dg.cycle_masks().into_iter().collect();
    let keep = limit.unwrap_or(usize::MAX).min(dg.vertex_count());
    let vertices: Vec<(SubsetVertex, bool)> = (0..keep as u64)
        .map(|mask| (dg.to_subset(mask, e), cycle_masks.contains(&mask)))
        .collect();
    let mut edges = Vec::new();
    for mask in 0..keep as u64 {
        for x in 0..dg.letters {
            if let Some(t) = dg.edge(mask, x) {
                if (t as usize) < keep {
                    edges.push((mask as usize, Letter(x as u16), t as usize));
                }
            }
        }
    }
    Ok(SubsetDigraphView { vertices, edges })
}

/// All nonempty subsets of the cyclic set contained in some strongly-fixing
/// subgroup, i.e. the vertices of the subset digraph lying on directed
/// cycles, each emitted with and without the identity. Sorted by size, then
/// members. The output can be exponentially large.
pub fn cyclic_subsets(
    h: &StrongFixGraph,
    capacity: u64,
) -> Result<Vec<SubsetVertex>, SubsetError> {
    let dg = SubsetDigraph::build(h, capacity)?;
    let e = h.identity();
    let mut out = Vec::new();
    for mask in dg.cycle_masks() {
        let with_e = dg.to_subset(mask, e);
        if mask != 0 {
            let without: Vec<StateId> =
                with_e.members().iter().copied().filter(|&g| g != e).collect();
            out.push(SubsetVertex::new(without));
        }
        out.push(with_e);
    }
    out.sort_by(|a, b| (a.len(), a.members()).cmp(&(b.len(), b.members())));
    out.dedup();
    Ok(out)
}

/// The maximal cycle subsets under inclusion, each paired with a verified
/// word w for which the subset is exactly {g : g(w) = w, g|_w = g}.
///
/// The word is a shortest cycle label through the subset, repeated by the
/// order of the permutation it induces; the fixed-point set of that power is
/// then recomputed on the whole automaton and must coincide with the subset.
pub fn maximal_cyclic_subgroups(
    aut: &NucleusAutomaton,
    h: &StrongFixGraph,
    capacity: u64,
) -> Result<Vec<CyclicSubgroupWitness>, SubsetError> {
    let dg = SubsetDigraph::build(h, capacity)?;
    let e = h.identity();

    let mut masks = dg.cycle_masks();
    // Maximal under inclusion; all carry the implicit identity bit.
    masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    let mut maximal: Vec<u64> = Vec::new();
    for m in masks {
        if !maximal.iter().any(|&big| m & big == m) {
            maximal.push(m);
        }
    }

    let mut out = Vec::new();
    for mask in maximal {
        let elements = dg.to_subset(mask, e);
        let base = dg.cycle_word(mask).ok_or_else(|| {
            SubsetError::Inconsistent(format!(
                "cycle vertex {} lost its cycle",
                elements.display(aut)
            ))
        })?;
        let word = widen_to_fixed_points(aut, &elements, &base)?;
        out.push(CyclicSubgroupWitness { elements, word });
    }
    out.sort_by(|a, b| a.elements.cmp(&b.elements));
    Ok(out)
}

/// Repeats the cycle label `base` just enough that every element of
/// `elements` is a fixed point of the induced partial map, and checks that
/// no other state is.
fn widen_to_fixed_points(
    aut: &NucleusAutomaton,
    elements: &SubsetVertex,
    base: &Word,
) -> Result<Word, SubsetError> {
    let n = aut.state_count();
    // The partial map g -> g|_base along letter-fixing edges.
    let map: Vec<Option<StateId>> = (0..n)
        .map(|g| {
            let mut cur = StateId(g as u32);
            for &x in &base.0 {
                let (y, r) = aut.act_letter(cur, x);
                if y != x {
                    return None;
                }
                cur = r;
            }
            Some(cur)
        })
        .collect();
    // e must survive; elements must be permuted.
    for &g in elements.members() {
        match map[g.index()] {
            Some(t) if elements.contains(t) => {}
            _ => {
                return Err(SubsetError::Inconsistent(format!(
                    "cycle label does not permute {}",
                    elements.display(aut)
                )))
            }
        }
    }
    // Order of the induced permutation = lcm of its cycle lengths.
    let mut order: u64 = 1;
    let mut visited = vec![false; elements.len()];
    let index_of = |g: StateId| elements.members().binary_search(&g).unwrap();
    for start in 0..elements.len() {
        if visited[start] {
            continue;
        }
        let mut len = 0u64;
        let mut cur = start;
        while !visited[cur] {
            visited[cur] = true;
            len += 1;
            cur = index_of(map[elements.members()[cur].index()].unwrap());
        }
        order = num_integer::lcm(order, len);
    }

    // Fixed points of map^order: states on map-cycles of length dividing order.
    let mut fixed: Vec<StateId> = Vec::new();
    for g in 0..n {
        let mut cur = StateId(g as u32);
        let mut steps = 0u64;
        let on_cycle = loop {
            match map[cur.index()] {
                Some(t) => {
                    steps += 1;
                    cur = t;
                    if cur.index() == g {
                        break true;
                    }
                    if steps > n as u64 {
                        break false;
                    }
                }
                None => break false,
            }
        };
        if on_cycle && order % steps == 0 {
            fixed.push(StateId(g as u32));
        }
    }
    let fixed = SubsetVertex::new(fixed);
    if &fixed != elements {
        return Err(SubsetError::Inconsistent(format!(
            "fixed points {} of the repeated cycle label differ from the maximal cycle subset {}",
            fixed.display(aut),
            elements.display(aut)
        )));
    }
    Ok(base.repeat(order as usize))
}

#[cfg(test)]
mod tests {
    use super::super::{build_strongfix, tests as fixtures};
    use super::*;
    use crate::presentation::parse_presentation;

    fn subset_names(aut: &NucleusAutomaton, v: &SubsetVertex) -> String {
        v.display(aut)
    }

    #[test]
    fn grigorchuk_cycle_subsets_are_all_nonempty_subsets() {
        // The 1-labeled edges permute the whole cyclic set {e,b,c,d}, so
        // every nonempty subset lies on a 1-cycle.
        let aut = parse_presentation(fixtures::GRIGORCHUK).unwrap();
        let h = build_strongfix(&aut);
        let subsets = cyclic_subsets(&h, DEFAULT_SUBSET_CAPACITY).unwrap();
        assert_eq!(subsets.len(), 15);
        for name in ["e", "b", "c", "d"] {
            let singleton = SubsetVertex::new(vec![aut.state_by_name(name).unwrap()]);
            assert!(subsets.contains(&singleton), "missing singleton {name}");
        }
        let full = h.cyclic_set();
        assert!(subsets.contains(&full));
        let without_e: Vec<StateId> = full
            .members()
            .iter()
            .copied()
            .filter(|&g| g != aut.identity())
            .collect();
        assert!(subsets.contains(&SubsetVertex::new(without_e)));
    }

    #[test]
    fn grigorchuk_maximal_subgroup_is_h111() {
        let aut = parse_presentation(fixtures::GRIGORCHUK).unwrap();
        let h = build_strongfix(&aut);
        let maximal = maximal_cyclic_subgroups(&aut, &h, DEFAULT_SUBSET_CAPACITY).unwrap();
        assert_eq!(maximal.len(), 1);
        let w = &maximal[0];
        assert_eq!(subset_names(&aut, &w.elements), "{e,b,c,d}");
        assert_eq!(aut.display_word(&w.word), "111");
        for &g in w.elements.members() {
            let (out, rest) = aut.act_word(g, &w.word);
            assert_eq!(out, w.word);
            assert_eq!(rest, g);
        }
    }

    #[test]
    fn grigorchuk_erschler_maximal_subgroup_is_h11() {
        let aut = parse_presentation(fixtures::GRIGORCHUK_ERSCHLER).unwrap();
        let h = build_strongfix(&aut);
        let maximal = maximal_cyclic_subgroups(&aut, &h, DEFAULT_SUBSET_CAPACITY).unwrap();
        assert_eq!(maximal.len(), 1);
        let w = &maximal[0];
        assert_eq!(subset_names(&aut, &w.elements), "{e,b,c,d}");
        assert_eq!(aut.display_word(&w.word), "11");
    }

    #[test]
    fn trivial_nucleus_has_the_identity_subgroup() {
        let aut =
            parse_presentation("alphabet 0 1\nstate e : 0 -> 0 . e , 1 -> 1 . e\n").unwrap();
        let h = build_strongfix(&aut);
        let maximal = maximal_cyclic_subgroups(&aut, &h, DEFAULT_SUBSET_CAPACITY).unwrap();
        assert_eq!(maximal.len(), 1);
        assert_eq!(subset_names(&aut, &maximal[0].elements), "{e}");
        assert_eq!(maximal[0].word.len(), 1);
    }

    #[test]
    fn capacity_is_enforced() {
        let aut = parse_presentation(fixtures::GRIGORCHUK).unwrap();
        let h = build_strongfix(&aut);
        // |C \ {e}| = 3 needs 8 vertices; a capacity of 4 must trip.
        match cyclic_subsets(&h, 4) {
            Err(SubsetError::CapacityExceeded { exponent, capacity, .. }) => {
                assert_eq!(exponent, 3);
                assert_eq!(capacity, 4);
            }
            other => panic!("expected CapacityExceeded, got {:?}", other),
        }
    }
}
