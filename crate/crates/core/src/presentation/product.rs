//! Formal products of nucleus states and bisimulation equality.
//!
//! A [`FormalProduct`] is a word over the states and their formal inverses,
//! read as a composition (the rightmost factor acts first). Two products are
//! equal as transformations of the infinite-word space exactly when a
//! bisimulation relates them: outputs agree on every letter and the
//! restricted products are again related. Equality is decided coinductively
//! as a greatest fixpoint — revisited pairs are assumed equal, a mismatch
//! anywhere refutes — which terminates because restriction never increases
//! the number of factors, so the reachable pair space is finite.

use std::collections::HashSet;

use super::{Letter, NucleusAutomaton, StateId, Word};

/// One factor of a formal product: a state or its formal inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub state: StateId,
    pub inverse: bool,
}

impl Factor {
    /// Applies the factor to a letter: returns the output letter and the
    /// factor's restriction. For inverses this uses
    /// g^{-1}(y) = x where g(x) = y, and g^{-1}|_y = (g|_x)^{-1}.
    fn act(self, aut: &NucleusAutomaton, x: Letter) -> (Letter, Factor) {
        if self.inverse {
            let y = aut.act_letter_inverse(self.state, x);
            let r = aut.state(self.state).restriction[y.0 as usize];
            (y, Factor { state: r, inverse: true })
        } else {
            let (y, r) = aut.act_letter(self.state, x);
            (y, Factor { state: r, inverse: false })
        }
    }
}

/// A nonempty word over states and their inverses, composed right to left.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormalProduct {
    factors: Vec<Factor>,
}

impl FormalProduct {
    pub fn new(factors: Vec<Factor>) -> Self {
        assert!(!factors.is_empty(), "formal products are nonempty");
        FormalProduct { factors }
    }

    pub fn state(id: StateId) -> Self {
        FormalProduct { factors: vec![Factor { state: id, inverse: false }] }
    }

    pub fn inverse_state(id: StateId) -> Self {
        FormalProduct { factors: vec![Factor { state: id, inverse: true }] }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// The product self · other (other acts first).
    pub fn product(&self, other: &FormalProduct) -> FormalProduct {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        FormalProduct { factors }
    }

    /// The formal inverse: reversed factors with flipped exponents.
    pub fn inverse(&self) -> FormalProduct {
        FormalProduct {
            factors: self
                .factors
                .iter()
                .rev()
                .map(|f| Factor { state: f.state, inverse: !f.inverse })
                .collect(),
        }
    }

    /// Applies the product to one letter; the restriction keeps one factor
    /// per input factor: (gh)(x) = g(h(x)) and (gh)|_x = g|_{h(x)} h|_x.
    pub fn act_letter(&self, aut: &NucleusAutomaton, x: Letter) -> (Letter, FormalProduct) {
        let (y, rest) = act_factors(aut, &self.factors, x);
        (y, FormalProduct { factors: rest })
    }

    /// Direct letter-by-letter action on a word, with no identification or
    /// memoization anywhere; this is the reference evaluator that
    /// bisimulation answers are checked against.
    pub fn act_word(&self, aut: &NucleusAutomaton, w: &Word) -> (Word, FormalProduct) {
        let mut out = Vec::with_capacity(w.len());
        let mut cur = self.factors.clone();
        for &x in &w.0 {
            let (y, rest) = act_factors(aut, &cur, x);
            out.push(y);
            cur = rest;
        }
        (Word(out), FormalProduct { factors: cur })
    }
}

fn act_factors(aut: &NucleusAutomaton, factors: &[Factor], x: Letter) -> (Letter, Vec<Factor>) {
    let mut rest = vec![Factor { state: StateId(0), inverse: false }; factors.len()];
    let mut cur = x;
    for (i, f) in factors.iter().enumerate().rev() {
        let (y, rf) = f.act(aut, cur);
        rest[i] = rf;
        cur = y;
    }
    (cur, rest)
}

/// Canonical reduced form: identity factors dropped (when the identity is
/// known) and adjacent f·f^{-1} pairs cancelled. The empty vector denotes the
/// identity transformation.
fn reduce(factors: &[Factor], identity: Option<StateId>) -> Vec<Factor> {
    let mut out: Vec<Factor> = Vec::with_capacity(factors.len());
    for &f in factors {
        if identity == Some(f.state) {
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

fn act_reduced(
    aut: &NucleusAutomaton,
    factors: &[Factor],
    x: Letter,
    identity: Option<StateId>,
) -> (Letter, Vec<Factor>) {
    let (y, rest) = act_factors(aut, factors, x);
    (y, reduce(&rest, identity))
}

pub(crate) fn bisimilar_raw(
    aut: &NucleusAutomaton,
    p: &FormalProduct,
    q: &FormalProduct,
    identity: Option<StateId>,
) -> bool {
    let start = (reduce(&p.factors, identity), reduce(&q.factors, identity));
    let mut seen: HashSet<(Vec<Factor>, Vec<Factor>)> = HashSet::new();
    let mut todo = vec![start];
    while let Some(pair) = todo.pop() {
        if pair.0 == pair.1 {
            continue;
        }
        if !seen.insert(pair.clone()) {
            continue;
        }
        for x in aut.letters() {
            let (ya, ra) = act_reduced(aut, &pair.0, x, identity);
            let (yb, rb) = act_reduced(aut, &pair.1, x, identity);
            if ya != yb {
                return false;
            }
            todo.push((ra, rb));
        }
    }
    true
}

/// Whether two formal products define the same isometry of the infinite-word
/// space. Always terminates; soundness rests on faithfulness of the action.
pub fn bisimilar(aut: &NucleusAutomaton, p: &FormalProduct, q: &FormalProduct) -> bool {
    bisimilar_raw(aut, p, q, Some(aut.identity()))
}

/// The unique nucleus state equal to `p` as a transformation, if any.
///
/// Uniqueness holds because validated automata have no bisimilar state pairs.
/// `None` means the product falls outside the nucleus; that is an ordinary
/// answer, not a failure.
pub fn identify_in_nucleus(aut: &NucleusAutomaton, p: &FormalProduct) -> Option<StateId> {
    // Cheap screen first: the one-letter outputs must match.
    let outputs: Vec<Letter> = aut.letters().map(|x| p.act_letter(aut, x).0).collect();
    for s in aut.state_ids() {
        if aut.state(s).output != outputs {
            continue;
        }
        if bisimilar(aut, p, &FormalProduct::state(s)) {
            return Some(s);
        }
    }
    None
}
