//! Bounded nucleus computation from a generating set.
//!
//! The working set starts from the identity, the generators, and their formal
//! inverses, closed under restriction. Each saturation round multiplies every
//! pair of known classes and adds the product's *eventual* restrictions: the
//! vertices of its restriction digraph that are reachable from a directed
//! cycle. Those are exactly the elements the product keeps producing at
//! arbitrarily deep levels, which is what membership in the nucleus asks for.
//!
//! Duplicate detection never compares products pairwise. All candidate forms
//! are thrown into one deterministic transition system together with the
//! already-known classes and partition-refined (Moore style): states start
//! grouped by output permutation and split while their letter successors
//! disagree, so the final blocks are exactly the bisimulation classes.
//!
//! The run succeeds when a full round adds no new class; it aborts once
//! `depth_bound` rounds (or an internal class cap) are exhausted, reporting
//! the frontier. Success certifies a restriction-closed,
//! bisimulation-reduced set, but not minimality when the generating set
//! itself is not contracted.

use std::collections::HashMap;

use thiserror::Error;

use super::product::{Factor, FormalProduct};
use super::{Letter, NucleusAutomaton, ParseError, State, StateId};
use crate::scc::tarjan_scc_adj;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClosureError {
    #[error(
        "contraction not certified within {rounds} rounds: \
         {classes} classes reached, frontier of {frontier} still open"
    )]
    NotContractedWithinBound { rounds: usize, classes: usize, frontier: usize },
    #[error("closure result failed validation: {0}")]
    InvalidResult(#[from] ParseError),
}

/// Caps on the number of bisimulation classes kept, on the syntactic forms
/// explored per product, and on the total work per saturation round, before
/// declaring the input not contracted.
const MAX_CLASSES: usize = 2048;
const MAX_FORMS: usize = 65_536;
const MAX_ROUND_WORK: usize = 1 << 20;

struct Class {
    rep: Vec<Factor>,
    name: String,
    output: Vec<Letter>,
    restriction: Vec<usize>,
}

struct Builder<'a> {
    aut: &'a NucleusAutomaton,
    classes: Vec<Class>,
}

fn reduce(aut: &NucleusAutomaton, factors: &[Factor]) -> Vec<Factor> {
    let id = aut.identity();
    let mut out: Vec<Factor> = Vec::with_capacity(factors.len());
    for &f in factors {
        if f.state == id {
            continue;
        }
        match out.last() {
            Some(&top) if top.state == f.state && top.inverse != f.inverse => {
                out.pop();
            }
            _ => out.push(f),
        }
    }
    out
}

fn act_form(aut: &NucleusAutomaton, form: &[Factor], x: Letter) -> (Letter, Vec<Factor>) {
    if form.is_empty() {
        return (x, Vec::new());
    }
    let p = FormalProduct::new(form.to_vec());
    let (y, r) = p.act_letter(aut, x);
    (y, reduce(aut, r.factors()))
}

/// A set of reduced forms syntactically closed under restriction, with its
/// letter structure.
struct FormSystem {
    forms: Vec<Vec<Factor>>,
    output: Vec<Vec<Letter>>,
    succ: Vec<Vec<usize>>,
}

/// Breadth-first syntactic closure of the seeds under restriction.
fn close_forms(aut: &NucleusAutomaton, seeds: &[Vec<Factor>]) -> Option<FormSystem> {
    let mut forms: Vec<Vec<Factor>> = Vec::new();
    let mut index: HashMap<Vec<Factor>, usize> = HashMap::new();
    for seed in seeds {
        let seed = reduce(aut, seed);
        if !index.contains_key(&seed) {
            index.insert(seed.clone(), forms.len());
            forms.push(seed);
        }
    }
    let mut output = Vec::new();
    let mut succ = Vec::new();
    let mut head = 0usize;
    while head < forms.len() {
        if forms.len() > MAX_FORMS {
            return None;
        }
        let mut out_row = Vec::with_capacity(aut.alphabet_size());
        let mut succ_row = Vec::with_capacity(aut.alphabet_size());
        for x in aut.letters() {
            let (y, r) = act_form(aut, &forms[head], x);
            out_row.push(y);
            let id = match index.get(&r) {
                Some(&id) => id,
                None => {
                    index.insert(r.clone(), forms.len());
                    forms.push(r);
                    forms.len() - 1
                }
            };
            succ_row.push(id);
        }
        output.push(out_row);
        succ.push(succ_row);
        head += 1;
    }
    Some(FormSystem { forms, output, succ })
}

/// Canonical block numbering by first occurrence of the key.
fn assign_blocks<K: Eq + std::hash::Hash>(keys: Vec<K>) -> Vec<usize> {
    let mut ids: HashMap<K, usize> = HashMap::new();
    keys.into_iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k).or_insert(next)
        })
        .collect()
}

/// Moore partition refinement on a deterministic letter-output system.
fn moore_blocks(output: &[Vec<Letter>], succ: &[Vec<usize>]) -> Vec<usize> {
    let n = output.len();
    let mut block = assign_blocks(output.iter().cloned().collect::<Vec<_>>());
    loop {
        let keys: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|s| (block[s], succ[s].iter().map(|&t| block[t]).collect()))
            .collect();
        let refined = assign_blocks(keys);
        if refined == block {
            return block;
        }
        block = refined;
    }
}

impl<'a> Builder<'a> {
    /// Merges a restriction-closed form system into the class set, creating
    /// one class per previously unknown bisimulation block. Returns false on
    /// overflow.
    fn absorb(&mut self, system: &FormSystem) -> bool {
        let n = self.classes.len();
        let total = n + system.forms.len();
        let output: Vec<Vec<Letter>> = self
            .classes
            .iter()
            .map(|c| c.output.clone())
            .chain(system.output.iter().cloned())
            .collect();
        let succ: Vec<Vec<usize>> = self
            .classes
            .iter()
            .map(|c| c.restriction.clone())
            .chain(system.succ.iter().map(|row| row.iter().map(|&t| t + n).collect()))
            .collect();
        let block = moore_blocks(&output, &succ);

        // Existing classes are pairwise non-bisimilar, so they own distinct
        // blocks; forms sharing a block with one are identified with it.
        let block_count = block.iter().max().map_or(0, |&b| b + 1);
        let mut owner: Vec<Option<usize>> = vec![None; block_count];
        for (s, &b) in block.iter().enumerate().take(n) {
            debug_assert!(owner[b].is_none());
            owner[b] = Some(s);
        }
        // First pass: allocate a class per unowned block, in form order.
        for s in n..total {
            let b = block[s];
            if owner[b].is_none() {
                if self.classes.len() >= MAX_CLASSES {
                    return false;
                }
                let form = &system.forms[s - n];
                let name = self.name_for(form);
                self.classes.push(Class {
                    rep: form.clone(),
                    name,
                    output: output[s].clone(),
                    restriction: Vec::new(),
                });
                owner[b] = Some(self.classes.len() - 1);
            }
        }
        // Second pass: wire restrictions through block owners.
        for s in n..total {
            let class_id = owner[block[s]].expect("owner allocated");
            if !self.classes[class_id].restriction.is_empty() {
                continue;
            }
            let restriction: Vec<usize> =
                succ[s].iter().map(|&t| owner[block[t]].expect("owner allocated")).collect();
            self.classes[class_id].restriction = restriction;
        }
        true
    }

    fn name_for(&self, rep: &[Factor]) -> String {
        let base = if rep.is_empty() {
            self.aut.state_name(self.aut.identity()).to_string()
        } else {
            rep.iter()
                .map(|f| {
                    let mut s = self.aut.state_name(f.state).to_string();
                    if f.inverse {
                        s.push_str("^-1");
                    }
                    s
                })
                .collect::<Vec<_>>()
                .join("*")
        };
        let mut name = base;
        while self.classes.iter().any(|c| c.name == name) {
            name.push('\'');
        }
        name
    }
}

/// Eventual restrictions of `rep`: the forms of its restriction digraph
/// reachable from a directed cycle, as a restriction-closed subsystem.
/// Also reports the number of forms explored.
fn eventual_restrictions(
    aut: &NucleusAutomaton,
    rep: &[Factor],
) -> Option<(FormSystem, usize)> {
    let full = close_forms(aut, std::slice::from_ref(&rep.to_vec()))?;
    let scc = tarjan_scc_adj(&full.succ);
    let sizes = scc.comp_sizes();
    let mut reach = vec![false; full.forms.len()];
    let mut stack: Vec<usize> = (0..full.forms.len())
        .filter(|&v| {
            sizes[scc.comp_of[v] as usize] >= 2 || full.succ[v].contains(&v)
        })
        .collect();
    while let Some(v) = stack.pop() {
        if reach[v] {
            continue;
        }
        reach[v] = true;
        for &w in &full.succ[v] {
            if !reach[w] {
                stack.push(w);
            }
        }
    }
    let explored = full.forms.len();
    let keep: Vec<usize> = (0..full.forms.len()).filter(|&v| reach[v]).collect();
    let relabel: HashMap<usize, usize> =
        keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let system = FormSystem {
        forms: keep.iter().map(|&v| full.forms[v].clone()).collect(),
        output: keep.iter().map(|&v| full.output[v].clone()).collect(),
        // Successors of reachable-from-cycle forms are reachable too.
        succ: keep
            .iter()
            .map(|&v| full.succ[v].iter().map(|&w| relabel[&w]).collect())
            .collect(),
    };
    Some((system, explored))
}

/// Saturates `generators` (symmetrized, with the identity) towards the
/// nucleus, identifying duplicates by bisimilarity, aborting after
/// `depth_bound` rounds.
pub fn nucleus_closure(
    aut: &NucleusAutomaton,
    generators: &[StateId],
    depth_bound: usize,
) -> Result<NucleusAutomaton, ClosureError> {
    let depth_bound = depth_bound.max(1);
    let mut b = Builder { aut, classes: Vec::new() };

    let overflow = |b: &Builder<'_>, rounds: usize, frontier: usize| {
        ClosureError::NotContractedWithinBound { rounds, classes: b.classes.len(), frontier }
    };

    let mut seeds: Vec<Vec<Factor>> = vec![Vec::new()];
    for &g in generators {
        seeds.push(vec![Factor { state: g, inverse: false }]);
        seeds.push(vec![Factor { state: g, inverse: true }]);
    }
    let Some(initial) = close_forms(aut, &seeds) else {
        return Err(overflow(&b, 0, seeds.len()));
    };
    if !b.absorb(&initial) {
        return Err(overflow(&b, 0, b.classes.len()));
    }

    let mut settled = 0usize; // pairs over classes below this index are done
    for round in 0..depth_bound {
        let snapshot = b.classes.len();
        let mut round_work = 0usize;
        for i in 0..snapshot {
            for j in 0..snapshot {
                if i < settled && j < settled {
                    continue;
                }
                if round_work > MAX_ROUND_WORK {
                    return Err(overflow(&b, round + 1, b.classes.len() - settled));
                }
                let mut rep = b.classes[i].rep.clone();
                rep.extend_from_slice(&b.classes[j].rep);
                let rep = reduce(aut, &rep);
                let Some((evres, explored)) = eventual_restrictions(aut, &rep) else {
                    return Err(overflow(&b, round + 1, b.classes.len() - settled));
                };
                round_work += explored + b.classes.len();
                if !b.absorb(&evres) {
                    return Err(overflow(&b, round + 1, b.classes.len() - settled));
                }
            }
        }
        settled = snapshot;
        if b.classes.len() == snapshot {
            return build_result(&b).map_err(ClosureError::from);
        }
    }
    let frontier = b.classes.len() - settled;
    Err(overflow(&b, depth_bound, frontier))
}

fn build_result(b: &Builder<'_>) -> Result<NucleusAutomaton, ParseError> {
    let states: Vec<State> = b
        .classes
        .iter()
        .map(|c| State {
            name: c.name.clone(),
            output: c.output.clone(),
            restriction: c.restriction.iter().map(|&r| StateId(r as u32)).collect(),
        })
        .collect();
    NucleusAutomaton::new(
        b.aut.alphabet().to_vec(),
        states,
        Some(StateId(0)), // the identity class is created first
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::parse_presentation;

    #[test]
    fn grigorchuk_generators_close_to_five_states() {
        let aut = parse_presentation(super::super::tests::GRIGORCHUK).unwrap();
        let gens: Vec<StateId> =
            ["a", "b", "c", "d"].iter().map(|n| aut.state_by_name(n).unwrap()).collect();
        let nucleus = nucleus_closure(&aut, &gens, 10).unwrap();
        assert_eq!(nucleus.state_count(), 5);
        let mut names: Vec<&str> =
            nucleus.state_ids().map(|id| nucleus.state_name(id)).collect();
        names.sort();
        assert_eq!(names, vec!["a", "b", "c", "d", "e"]);
    }

    #[test]
    fn identity_only_presentation_closes_to_identity() {
        let aut = parse_presentation("alphabet 0 1\nstate e : 0 -> 0 . e , 1 -> 1 . e\n").unwrap();
        let nucleus = nucleus_closure(&aut, &[aut.identity()], 10).unwrap();
        assert_eq!(nucleus.state_count(), 1);
    }

    #[test]
    fn adding_machine_gains_the_inverse() {
        let text = "\
alphabet 0 1
state e : 0 -> 0 . e , 1 -> 1 . e
state a : 0 -> 1 . e , 1 -> 0 . a
generators a
";
        let aut = parse_presentation(text).unwrap();
        let nucleus = nucleus_closure(&aut, aut.generators().unwrap(), 10).unwrap();
        assert_eq!(nucleus.state_count(), 3);
        let mut names: Vec<&str> =
            nucleus.state_ids().map(|id| nucleus.state_name(id)).collect();
        names.sort();
        assert_eq!(names, vec!["a", "a^-1", "e"]);
        // a * a^-1 collapses to the identity in the closed automaton.
        let a = nucleus.state_by_name("a").unwrap();
        let ai = nucleus.state_by_name("a^-1").unwrap();
        let p = FormalProduct::state(a).product(&FormalProduct::state(ai));
        assert_eq!(
            crate::presentation::identify_in_nucleus(&nucleus, &p),
            Some(nucleus.identity())
        );
    }

    #[test]
    fn lamplighter_wires_are_not_contracted_within_small_bound() {
        let text = "\
alphabet 0 1
state e : 0 -> 0 . e , 1 -> 1 . e
state a : 0 -> 1 . a , 1 -> 0 . b
state b : 0 -> 0 . a , 1 -> 1 . b
generators a b
";
        let aut = parse_presentation(text).unwrap();
        match nucleus_closure(&aut, aut.generators().unwrap(), 3) {
            Err(ClosureError::NotContractedWithinBound { frontier, .. }) => {
                assert!(frontier > 0);
            }
            other => panic!("expected NotContractedWithinBound, got {:?}", other),
        }
    }
}
