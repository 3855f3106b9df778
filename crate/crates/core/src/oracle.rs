//! Independent cross-check: the partition-based simplicity criterion.
//!
//! Letters act on equivalence relations over the nucleus by refining with
//! outputs and pushing through restrictions; the Schreier graph of that
//! action from the equality relation decides simplicity by comparing the
//! rank of the equations of its minimal vertices with the rank of the
//! equations of its essential vertices, over each field of interest. The
//! state space is bounded by Bell numbers, which is exactly the cost the
//! subset-based engine avoids, so this module is a checker and not a
//! production path: no witnesses, no attention to performance.

use std::collections::HashMap;

use thiserror::Error;

use crate::linalg::{rank_mod_p, rational_rank, IntMatrix};
use crate::presentation::{Letter, NucleusAutomaton, StateId};
use crate::scc::tarjan_scc;
use crate::structure::{DeltaGraph, SubsetVertex};

/// A partition of the nucleus states, canonically encoded: block ids are
/// assigned by first occurrence, so blocks are ordered by least member.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NucleusPartition {
    block_of: Vec<u32>,
    block_count: usize,
}

impl NucleusPartition {
    /// The equality relation.
    pub fn equality(states: usize) -> Self {
        NucleusPartition { block_of: (0..states as u32).collect(), block_count: states }
    }

    fn from_keys<K: Eq + std::hash::Hash>(keys: Vec<K>) -> Self {
        let mut ids: HashMap<K, u32> = HashMap::new();
        let mut block_of = Vec::with_capacity(keys.len());
        for k in keys {
            let next = ids.len() as u32;
            let id = *ids.entry(k).or_insert(next);
            block_of.push(id);
        }
        let block_count = ids.len();
        NucleusPartition { block_of, block_count }
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn same_block(&self, a: StateId, b: StateId) -> bool {
        self.block_of[a.index()] == self.block_of[b.index()]
    }

    pub fn blocks(&self) -> Vec<Vec<StateId>> {
        let mut blocks = vec![Vec::new(); self.block_count];
        for (i, &b) in self.block_of.iter().enumerate() {
            blocks[b as usize].push(StateId(i as u32));
        }
        blocks
    }

    /// The block containing the given state.
    pub fn block_of(&self, g: StateId) -> Vec<StateId> {
        let id = self.block_of[g.index()];
        self.block_of
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b == id).then_some(StateId(i as u32)))
            .collect()
    }
}

/// One step of the letter action: a and b merge iff their outputs at x agree
/// and their restrictions at x were already equivalent.
pub fn gamma_step(
    aut: &NucleusAutomaton,
    part: &NucleusPartition,
    x: Letter,
) -> NucleusPartition {
    let keys: Vec<(Letter, u32)> = aut
        .state_ids()
        .map(|g| {
            let (y, r) = aut.act_letter(g, x);
            (y, part.block_of[r.index()])
        })
        .collect();
    NucleusPartition::from_keys(keys)
}

/// Schreier graph of the letter action on partitions, reachable from equality.
#[derive(Clone, Debug)]
pub struct GammaGraph {
    vertices: Vec<NucleusPartition>,
    edges: Vec<Vec<usize>>,
    essential: Vec<bool>,
    minimal: Vec<bool>,
}

impl GammaGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, v: usize) -> &NucleusPartition {
        &self.vertices[v]
    }

    pub fn edge(&self, v: usize, x: Letter) -> usize {
        self.edges[v][x.0 as usize]
    }

    pub fn is_essential(&self, v: usize) -> bool {
        self.essential[v]
    }

    pub fn is_minimal(&self, v: usize) -> bool {
        self.minimal[v]
    }

    pub fn minimal_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.minimal[v]).collect()
    }

    pub fn essential_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.essential[v]).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("gamma graph has {count} minimal strongly connected components, expected exactly one")]
    MinimalComponentCount { count: usize },
    #[error("morphism violation: {0}")]
    MorphismViolation(String),
}

/// Builds the reachable partition graph with essential and minimal marks.
///
/// Exactly one minimal component must exist; anything else signals a bug.
pub fn build_gamma(aut: &NucleusAutomaton) -> Result<GammaGraph, OracleError> {
    let start = NucleusPartition::equality(aut.state_count());
    let mut vertices = vec![start.clone()];
    let mut index: HashMap<NucleusPartition, usize> = HashMap::from([(start, 0)]);
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut head = 0usize;
    while head < vertices.len() {
        let mut row = Vec::with_capacity(aut.alphabet_size());
        for x in aut.letters() {
            let next = gamma_step(aut, &vertices[head], x);
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

    let n = vertices.len();
    let scc = tarjan_scc(n, |v, i| edges[v].get(i).copied());
    let sizes = scc.comp_sizes();
    let mut has_exit = vec![false; scc.count];
    for (v, row) in edges.iter().enumerate() {
        for &w in row {
            if scc.comp_of[v] != scc.comp_of[w] {
                has_exit[scc.comp_of[v] as usize] = true;
            }
        }
    }
    let minimal: Vec<bool> = (0..n).map(|v| !has_exit[scc.comp_of[v] as usize]).collect();

    let minimal_comps = (0..scc.count).filter(|&c| !has_exit[c]).count();
    if minimal_comps != 1 {
        return Err(OracleError::MinimalComponentCount { count: minimal_comps });
    }

    // Essential: reachable from a vertex lying on a cycle (cycle vertices
    // included).
    let on_cycle = |v: usize| {
        sizes[scc.comp_of[v] as usize] >= 2 || edges[v].iter().any(|&w| w == v)
    };
    let mut essential = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&v| on_cycle(v)).collect();
    while let Some(v) = stack.pop() {
        if essential[v] {
            continue;
        }
        essential[v] = true;
        for &w in &edges[v] {
            if !essential[w] {
                stack.push(w);
            }
        }
    }

    Ok(GammaGraph { vertices, edges, essential, minimal })
}

/// Stacks the block indicator rows of the chosen vertices over the nucleus.
fn equations_matrix(aut: &NucleusAutomaton, gamma: &GammaGraph, vertices: &[usize]) -> IntMatrix {
    let n = aut.state_count();
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for &v in vertices {
        for block in gamma.vertex(v).blocks() {
            let mut row = vec![0i64; n];
            for g in block {
                row[g.index()] = 1;
            }
            rows.push(row);
        }
    }
    IntMatrix::from_rows_i64(&rows)
}

/// Rank comparison between minimal and essential equations, per field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaVerdict {
    pub rank_minimal_q: usize,
    pub rank_essential_q: usize,
    /// (p, rank of minimal equations, rank of essential equations).
    pub per_prime: Vec<(u64, usize, usize)>,
}

impl GammaVerdict {
    /// Simplicity over fields of the given characteristic: the two ranks
    /// agree. `None` when the characteristic was not requested.
    pub fn simple_in_characteristic(&self, characteristic: u64) -> Option<bool> {
        if characteristic == 0 {
            return Some(self.rank_minimal_q == self.rank_essential_q);
        }
        self.per_prime
            .iter()
            .find(|&&(p, _, _)| p == characteristic)
            .map(|&(_, rm, re)| rm == re)
    }
}

/// Runs the partition-based criterion over the rationals and the given primes.
pub fn gamma_verdict(
    aut: &NucleusAutomaton,
    primes: &[u64],
) -> Result<GammaVerdict, OracleError> {
    let gamma = build_gamma(aut)?;
    let minimal = equations_matrix(aut, &gamma, &gamma.minimal_vertices());
    let essential = equations_matrix(aut, &gamma, &gamma.essential_vertices());
    let rank_minimal_q = rational_rank(&minimal);
    let rank_essential_q = rational_rank(&essential);
    let mut per_prime = Vec::with_capacity(primes.len());
    for &p in primes {
        let rm = rank_mod_p(&minimal, p).expect("prime modulus");
        let re = rank_mod_p(&essential, p).expect("prime modulus");
        per_prime.push((p, rm, re));
    }
    Ok(GammaVerdict { rank_minimal_q, rank_essential_q, per_prime })
}

/// The vertex map sending a partition to the class of the identity, checked
/// to be a surjective label-preserving morphism onto the power-set graph.
pub fn phi_morphism(
    aut: &NucleusAutomaton,
    gamma: &GammaGraph,
    delta: &DeltaGraph,
) -> Result<Vec<usize>, OracleError> {
    let e = aut.identity();
    let mut map = Vec::with_capacity(gamma.vertex_count());
    for v in 0..gamma.vertex_count() {
        let class = SubsetVertex::new(gamma.vertex(v).block_of(e));
        let Some(target) = delta.vertex_index(&class) else {
            return Err(OracleError::MorphismViolation(format!(
                "class of the identity {} is not a power-set vertex",
                class.display(aut)
            )));
        };
        map.push(target);
    }
    for v in 0..gamma.vertex_count() {
        for x in aut.letters() {
            let w = gamma.edge(v, x);
            if delta.edge(map[v], x) != map[w] {
                return Err(OracleError::MorphismViolation(format!(
                    "labels disagree at vertex {} letter {}",
                    v,
                    aut.letter_token(x)
                )));
            }
        }
    }
    let mut covered = vec![false; delta.vertex_count()];
    for &t in &map {
        covered[t] = true;
    }
    if !covered.iter().all(|&c| c) {
        return Err(OracleError::MorphismViolation(
            "morphism misses a power-set vertex".into(),
        ));
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::parse_presentation;
    use crate::structure::build_delta;

    const GRIGORCHUK: &str = "\
alphabet 0 1
identity e
state e : 0 -> 0 . e , 1 -> 1 . e
state a : 0 -> 1 . e , 1 -> 0 . e
state b : 0 -> 0 . a , 1 -> 1 . c
state c : 0 -> 0 . a , 1 -> 1 . d
state d : 0 -> 0 . e , 1 -> 1 . b
";

    const GRIGORCHUK_ERSCHLER: &str = "\
alphabet 0 1
identity e
state e : 0 -> 0 . e , 1 -> 1 . e
state a : 0 -> 1 . e , 1 -> 0 . e
state b : 0 -> 0 . a , 1 -> 1 . b
state c : 0 -> 0 . a , 1 -> 1 . d
state d : 0 -> 0 . e , 1 -> 1 . c
";

    #[test]
    fn gamma_step_on_equality() {
        let aut = parse_presentation(GRIGORCHUK).unwrap();
        let eq = NucleusPartition::equality(5);
        let sid = |n: &str| aut.state_by_name(n).unwrap();
        // Letter 0 merges e with d (both fix 0 and restrict to e) and b with
        // c (both fix 0 and restrict to a); a stands alone.
        let p0 = gamma_step(&aut, &eq, Letter(0));
        assert_eq!(p0.block_count(), 3);
        assert!(p0.same_block(sid("e"), sid("d")));
        assert!(p0.same_block(sid("b"), sid("c")));
        assert!(!p0.same_block(sid("e"), sid("b")));
        assert!(!p0.same_block(sid("a"), sid("e")));
        // Letter 1 merges nothing.
        let p1 = gamma_step(&aut, &eq, Letter(1));
        assert_eq!(p1, eq);
    }

    #[test]
    fn gamma_step_on_trivial_nucleus_is_identity() {
        let aut =
            parse_presentation("alphabet 0 1\nstate e : 0 -> 0 . e , 1 -> 1 . e\n").unwrap();
        let eq = NucleusPartition::equality(1);
        for x in aut.letters() {
            assert_eq!(gamma_step(&aut, &eq, x), eq);
        }
    }

    #[test]
    fn grigorchuk_gamma_graph_shape() {
        // Hand enumeration: the equality relation (self-loop on letter 1)
        // and the three-vertex minimal component {ed|bc|a}, {ec|bd|a},
        // {eb|cd|a}, cyclically permuted by letter 1 and sent to the first
        // by letter 0.
        let aut = parse_presentation(GRIGORCHUK).unwrap();
        let gamma = build_gamma(&aut).unwrap();
        assert_eq!(gamma.vertex_count(), 4);
        assert_eq!(gamma.minimal_vertices().len(), 3);
        assert_eq!(gamma.essential_vertices().len(), 4);
        for v in gamma.minimal_vertices() {
            assert!(gamma.is_essential(v));
            assert_eq!(gamma.vertex(v).block_count(), 3);
        }
        let sid = |n: &str| aut.state_by_name(n).unwrap();
        let first = gamma.edge(0, Letter(0));
        assert!(gamma.is_minimal(first));
        assert!(gamma.vertex(first).same_block(sid("e"), sid("d")));
        assert!(gamma.vertex(first).same_block(sid("b"), sid("c")));
    }

    #[test]
    fn grigorchuk_gamma_verdict() {
        let aut = parse_presentation(GRIGORCHUK).unwrap();
        let verdict = gamma_verdict(&aut, &[2, 3, 5, 7]).unwrap();
        assert_eq!(verdict.simple_in_characteristic(0), Some(true));
        assert_eq!(verdict.simple_in_characteristic(2), Some(false));
        assert_eq!(verdict.simple_in_characteristic(3), Some(true));
        assert_eq!(verdict.simple_in_characteristic(7), Some(true));
        assert_eq!(verdict.simple_in_characteristic(11), None);
    }

    #[test]
    fn grigorchuk_erschler_gamma_verdict() {
        let aut = parse_presentation(GRIGORCHUK_ERSCHLER).unwrap();
        let verdict = gamma_verdict(&aut, &[2, 3]).unwrap();
        assert_eq!(verdict.simple_in_characteristic(0), Some(false));
        assert_eq!(verdict.simple_in_characteristic(2), Some(false));
        assert_eq!(verdict.simple_in_characteristic(3), Some(false));
    }

    #[test]
    fn trivial_gamma_is_one_essential_minimal_vertex() {
        let aut =
            parse_presentation("alphabet 0 1\nstate e : 0 -> 0 . e , 1 -> 1 . e\n").unwrap();
        let gamma = build_gamma(&aut).unwrap();
        assert_eq!(gamma.vertex_count(), 1);
        assert!(gamma.is_minimal(0));
        assert!(gamma.is_essential(0));
        let verdict = gamma_verdict(&aut, &[2]).unwrap();
        assert_eq!(verdict.simple_in_characteristic(0), Some(true));
    }

    #[test]
    fn phi_maps_gamma_onto_delta() {
        let aut = parse_presentation(GRIGORCHUK).unwrap();
        let gamma = build_gamma(&aut).unwrap();
        let delta = build_delta(&aut);
        let map = phi_morphism(&aut, &gamma, &delta).unwrap();
        // The equality relation maps to {e}.
        assert_eq!(map[0], 0);
        // Surjective onto the four power-set vertices.
        let mut image: Vec<usize> = map.clone();
        image.sort_unstable();
        image.dedup();
        assert_eq!(image.len(), delta.vertex_count());
        // Minimal vertices map onto minimal vertices and conversely.
        for v in 0..gamma.vertex_count() {
            if gamma.is_minimal(v) {
                assert!(delta.is_minimal(map[v]));
            }
        }
        for m in delta.minimal_vertices() {
            assert!((0..gamma.vertex_count())
                .any(|v| gamma.is_minimal(v) && map[v] == m));
        }
    }
}
