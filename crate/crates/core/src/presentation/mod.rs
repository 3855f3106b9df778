//! Nucleus automata: parsing, validation, and the algebra of their states.
//!
//! A nucleus automaton is a finite set of states acting on an alphabet, each
//! state carrying an output permutation of the letters and a restriction map
//! back into the state set. States act on infinite words letter by letter:
//! the output permutation transforms the head and the restriction state takes
//! over on the tail. Validation guarantees that outputs are permutations,
//! restrictions stay inside the automaton, a lawful identity state exists,
//! and no two states define the same transformation.

mod closure;
mod parse;
mod product;

pub use closure::{nucleus_closure, ClosureError};
pub use parse::{parse_presentation, serialize_presentation, ParseError};
pub use product::{bisimilar, identify_in_nucleus, Factor, FormalProduct};

use std::collections::HashMap;

/// Index of a letter in the alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub u16);

/// Dense handle into the automaton's state table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Finite word over the alphabet; possibly empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenates `self` repeated `times` times.
    pub fn repeat(&self, times: usize) -> Word {
        let mut letters = Vec::with_capacity(self.0.len() * times);
        for _ in 0..times {
            letters.extend_from_slice(&self.0);
        }
        Word(letters)
    }
}

/// One state of a nucleus automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub name: String,
    /// output[x] = g(x); a permutation of the alphabet.
    pub output: Vec<Letter>,
    /// restriction[x] = g|_x.
    pub restriction: Vec<StateId>,
}

/// A validated nucleus automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NucleusAutomaton {
    alphabet: Vec<String>,
    states: Vec<State>,
    /// inverse_output[g][y] = x with g(x) = y.
    inverse_output: Vec<Vec<Letter>>,
    identity: StateId,
    generators: Option<Vec<StateId>>,
}

impl NucleusAutomaton {
    /// Builds and validates an automaton from raw parts.
    ///
    /// `declared_identity` distinguishes an explicit identity declaration
    /// (verified) from none (inferred from the identity laws).
    pub fn new(
        alphabet: Vec<String>,
        states: Vec<State>,
        declared_identity: Option<StateId>,
        generators: Option<Vec<StateId>>,
    ) -> Result<Self, ParseError> {
        let syntax = |msg: String| ParseError::Syntax { line: 0, col: 0, msg };
        if alphabet.len() < 2 {
            return Err(syntax(format!(
                "alphabet must have at least two letters, got {}",
                alphabet.len()
            )));
        }
        if alphabet.len() > u16::MAX as usize {
            return Err(syntax("alphabet too large".into()));
        }
        if states.is_empty() {
            return Err(syntax("automaton has no states".into()));
        }
        if states.len() > u32::MAX as usize / 2 {
            return Err(syntax("too many states".into()));
        }
        let k = alphabet.len();
        {
            let mut seen = HashMap::new();
            for (i, tok) in alphabet.iter().enumerate() {
                if let Some(prev) = seen.insert(tok.clone(), i) {
                    return Err(syntax(format!(
                        "duplicate alphabet token '{}' (positions {} and {})",
                        tok, prev, i
                    )));
                }
            }
        }
        let mut names = HashMap::new();
        for (i, st) in states.iter().enumerate() {
            if st.name.is_empty() {
                return Err(syntax(format!("state {} has an empty name", i)));
            }
            if let Some(prev) = names.insert(st.name.clone(), i) {
                return Err(syntax(format!(
                    "duplicate state name '{}' (states {} and {})",
                    st.name, prev, i
                )));
            }
        }

        // Outputs are permutations of the alphabet.
        for st in &states {
            if st.output.len() != k || st.restriction.len() != k {
                return Err(syntax(format!(
                    "state '{}' must define exactly one clause per alphabet letter",
                    st.name
                )));
            }
            let mut hit = vec![false; k];
            let mut ok = true;
            for &Letter(y) in &st.output {
                if (y as usize) >= k || hit[y as usize] {
                    ok = false;
                    break;
                }
                hit[y as usize] = true;
            }
            if !ok {
                return Err(ParseError::NotAPermutation {
                    state: st.name.clone(),
                    images: st
                        .output
                        .iter()
                        .map(|&Letter(y)| {
                            alphabet.get(y as usize).cloned().unwrap_or_else(|| format!("#{}", y))
                        })
                        .collect(),
                });
            }
            for r in &st.restriction {
                if r.index() >= states.len() {
                    return Err(ParseError::DanglingRestriction {
                        name: format!("#{}", r.0),
                        referrer: st.name.clone(),
                    });
                }
            }
        }

        let inverse_output = states
            .iter()
            .map(|st| {
                let mut inv = vec![Letter(0); k];
                for (x, &y) in st.output.iter().enumerate() {
                    inv[y.0 as usize] = Letter(x as u16);
                }
                inv
            })
            .collect();

        let mut aut = NucleusAutomaton {
            alphabet,
            states,
            inverse_output,
            identity: StateId(0),
            generators: None,
        };

        // No two distinct states may be bisimilar (the action is faithful, so
        // the nucleus injects into the group).
        for i in 0..aut.states.len() {
            for j in i + 1..aut.states.len() {
                let p = FormalProduct::state(StateId(i as u32));
                let q = FormalProduct::state(StateId(j as u32));
                if product::bisimilar_raw(&aut, &p, &q, None) {
                    return Err(ParseError::DuplicateBisimilarStates {
                        first: aut.states[i].name.clone(),
                        second: aut.states[j].name.clone(),
                    });
                }
            }
        }

        let lawful = |st: &State, id: usize| {
            st.output.iter().enumerate().all(|(x, &y)| y.0 as usize == x)
                && st.restriction.iter().all(|r| r.index() == id)
        };
        let identity = match declared_identity {
            Some(id) => {
                if id.index() >= aut.states.len() {
                    return Err(ParseError::DanglingRestriction {
                        name: format!("#{}", id.0),
                        referrer: "identity".into(),
                    });
                }
                if !lawful(&aut.states[id.index()], id.index()) {
                    return Err(ParseError::NoIdentity {
                        reason: format!(
                            "declared identity '{}' is not an identity transformation",
                            aut.states[id.index()].name
                        ),
                    });
                }
                id
            }
            None => {
                // At most one candidate survives the bisimilarity check above.
                match aut.states.iter().enumerate().find(|(i, st)| lawful(st, *i)) {
                    Some((i, _)) => StateId(i as u32),
                    None => {
                        return Err(ParseError::NoIdentity {
                            reason: "no state satisfies the identity laws".into(),
                        })
                    }
                }
            }
        };
        aut.identity = identity;

        if let Some(gens) = &generators {
            for g in gens {
                if g.index() >= aut.states.len() {
                    return Err(ParseError::DanglingRestriction {
                        name: format!("#{}", g.0),
                        referrer: "generators".into(),
                    });
                }
            }
        }
        aut.generators = generators;
        Ok(aut)
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.alphabet.len() as u16).map(Letter)
    }

    pub fn letter_token(&self, x: Letter) -> &str {
        &self.alphabet[x.0 as usize]
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id.index()]
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id.index()].name
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|st| st.name == name)
            .map(|i| StateId(i as u32))
    }

    pub fn identity(&self) -> StateId {
        self.identity
    }

    pub fn generators(&self) -> Option<&[StateId]> {
        self.generators.as_deref()
    }

    /// g applied to one letter: returns (g(x), g|_x).
    pub fn act_letter(&self, g: StateId, x: Letter) -> (Letter, StateId) {
        let st = &self.states[g.index()];
        (st.output[x.0 as usize], st.restriction[x.0 as usize])
    }

    /// x with g(x) = y.
    pub fn act_letter_inverse(&self, g: StateId, y: Letter) -> Letter {
        self.inverse_output[g.index()][y.0 as usize]
    }

    /// g applied to a finite word: returns (g(w), g|_w).
    pub fn act_word(&self, g: StateId, w: &Word) -> (Word, StateId) {
        let mut out = Vec::with_capacity(w.len());
        let mut cur = g;
        for &x in &w.0 {
            let (y, next) = self.act_letter(cur, x);
            out.push(y);
            cur = next;
        }
        (Word(out), cur)
    }

    /// Renders a word with the alphabet's tokens. Tokens are concatenated
    /// when all are single characters and space-separated otherwise.
    pub fn display_word(&self, w: &Word) -> String {
        let sep = if self.alphabet.iter().all(|t| t.chars().count() == 1) { "" } else { " " };
        w.0.iter()
            .map(|&x| self.letter_token(x))
            .collect::<Vec<_>>()
            .join(sep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::parse::parse_presentation;

    pub(crate) const GRIGORCHUK: &str = "\
alphabet 0 1
identity e
state e : 0 -> 0 . e , 1 -> 1 . e
state a : 0 -> 1 . e , 1 -> 0 . e
state b : 0 -> 0 . a , 1 -> 1 . c
state c : 0 -> 0 . a , 1 -> 1 . d
state d : 0 -> 0 . e , 1 -> 1 . b
";

    fn grigorchuk() -> NucleusAutomaton {
        parse_presentation(GRIGORCHUK).expect("valid presentation")
    }

    fn letters(aut: &NucleusAutomaton, s: &str) -> Word {
        Word(
            s.chars()
                .map(|c| {
                    Letter(
                        aut.alphabet.iter().position(|t| t == &c.to_string()).expect("letter") as u16,
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn act_letter_reads_tables() {
        let aut = grigorchuk();
        let b = aut.state_by_name("b").unwrap();
        let c = aut.state_by_name("c").unwrap();
        let a = aut.state_by_name("a").unwrap();
        let e = aut.identity();
        assert_eq!(aut.act_letter(b, Letter(1)), (Letter(1), c));
        assert_eq!(aut.act_letter(a, Letter(0)), (Letter(1), e));
        for g in aut.state_ids() {
            for x in aut.letters() {
                let (y, r) = aut.act_letter(e, x);
                assert_eq!((y, r), (x, e));
                let _ = (g, r, y);
            }
        }
    }

    #[test]
    fn act_word_folds_letters() {
        let aut = grigorchuk();
        let d = aut.state_by_name("d").unwrap();
        let b = aut.state_by_name("b").unwrap();
        let e = aut.identity();
        let (out, rest) = aut.act_word(d, &letters(&aut, "0"));
        assert_eq!((out, rest), (letters(&aut, "0"), e));
        // b -> c -> d -> b along the 1|1 edges.
        let (out, rest) = aut.act_word(b, &letters(&aut, "111"));
        assert_eq!((out, rest), (letters(&aut, "111"), b));
        let (out, rest) = aut.act_word(b, &Word::empty());
        assert_eq!((out, rest), (Word::empty(), b));
    }

    #[test]
    fn identity_is_inferred_when_undeclared() {
        let text = "\
alphabet x y
state flip : x -> y . idle , y -> x . idle
state idle : x -> x . idle , y -> y . idle
";
        let aut = parse_presentation(text).unwrap();
        assert_eq!(aut.state_name(aut.identity()), "idle");
    }

    #[test]
    fn missing_identity_is_rejected() {
        let text = "\
alphabet 0 1
state a : 0 -> 1 . a , 1 -> 0 . a
";
        match parse_presentation(text) {
            Err(ParseError::NoIdentity { .. }) => {}
            other => panic!("expected NoIdentity, got {:?}", other),
        }
    }

    #[test]
    fn degenerate_alphabet_is_rejected() {
        let text = "\
alphabet 0
state e : 0 -> 0 . e
";
        assert!(matches!(parse_presentation(text), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn bisimilar_duplicate_states_are_rejected() {
        // Both u and v act trivially below the root swap.
        let text = "\
alphabet 0 1
state e : 0 -> 0 . e , 1 -> 1 . e
state u : 0 -> 1 . e , 1 -> 0 . e
state v : 0 -> 1 . e , 1 -> 0 . e
";
        match parse_presentation(text) {
            Err(ParseError::DuplicateBisimilarStates { first, second }) => {
                assert_eq!((first.as_str(), second.as_str()), ("u", "v"));
            }
            other => panic!("expected DuplicateBisimilarStates, got {:?}", other),
        }
    }
}
