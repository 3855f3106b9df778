//! Line-oriented presentation format for nucleus automata.
//!
//! ```text
//! # comment
//! alphabet 0 1
//! identity e
//! state e : 0 -> 0 . e , 1 -> 1 . e
//! state a : 0 -> 1 . e , 1 -> 0 . e
//! generators a
//! ```
//!
//! `alphabet` declares the letter tokens in order and must precede the state
//! lines. Each `state` line gives exactly one clause `x -> y . r` per letter:
//! the state maps letter `x` to `y` and restricts to state `r` below `x`.
//! `identity` is optional (inferred and verified when omitted), `generators`
//! marks the presentation as input for the nucleus closure.

use std::collections::HashMap;

use thiserror::Error;

use super::{Letter, NucleusAutomaton, State, StateId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("state '{state}' does not act by a permutation; letter images: {images:?}")]
    NotAPermutation { state: String, images: Vec<String> },
    #[error("unknown state name '{name}' referenced by {referrer}")]
    DanglingRestriction { name: String, referrer: String },
    #[error("no identity state: {reason}")]
    NoIdentity { reason: String },
    #[error("states '{first}' and '{second}' are bisimilar as transformations")]
    DuplicateBisimilarStates { first: String, second: String },
}

const RESERVED: [&str; 4] = [":", "->", ".", ","];

#[derive(Clone, Debug)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None; // (byte offset, column)
    let mut col_no = 0usize;
    for (i, ch) in body.char_indices() {
        col_no += 1;
        if ch.is_whitespace() {
            if let Some((s, c)) = start.take() {
                tokens.push(Token { text: &body[s..i], line: line_no, col: c });
            }
        } else if start.is_none() {
            start = Some((i, col_no));
        }
    }
    if let Some((s, c)) = start {
        tokens.push(Token { text: &body[s..], line: line_no, col: c });
    }
    tokens
}

struct RawState {
    name: String,
    // (letter token, output token, restriction name), one per clause.
    clauses: Vec<(String, String, String)>,
    line: usize,
}

fn syntax(tok: &Token<'_>, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line: tok.line, col: tok.col, msg: msg.into() }
}

fn syntax_at(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, col, msg: msg.into() }
}

/// Parses and fully validates a presentation.
pub fn parse_presentation(text: &str) -> Result<NucleusAutomaton, ParseError> {
    let mut alphabet: Option<(Vec<String>, usize)> = None;
    let mut identity_name: Option<(String, usize)> = None;
    let mut generator_names: Option<(Vec<String>, usize)> = None;
    let mut raw_states: Vec<RawState> = Vec::new();

    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let tokens = tokenize(line, line_no);
        if tokens.is_empty() {
            continue;
        }
        let head = &tokens[0];
        match head.text {
            "alphabet" => {
                if alphabet.is_some() {
                    return Err(syntax(head, "duplicate alphabet directive"));
                }
                let toks: Vec<String> = tokens[1..].iter().map(|t| t.text.to_string()).collect();
                for (t, tok) in toks.iter().zip(&tokens[1..]) {
                    if RESERVED.contains(&t.as_str()) {
                        return Err(syntax(tok, format!("reserved token '{}' in alphabet", t)));
                    }
                }
                if toks.len() < 2 {
                    return Err(syntax(
                        head,
                        format!("alphabet must have at least two letters, got {}", toks.len()),
                    ));
                }
                alphabet = Some((toks, line_no));
            }
            "identity" => {
                if identity_name.is_some() {
                    return Err(syntax(head, "duplicate identity directive"));
                }
                if tokens.len() != 2 {
                    return Err(syntax(head, "expected: identity <name>"));
                }
                identity_name = Some((tokens[1].text.to_string(), line_no));
            }
            "generators" => {
                if generator_names.is_some() {
                    return Err(syntax(head, "duplicate generators directive"));
                }
                if tokens.len() < 2 {
                    return Err(syntax(head, "expected: generators <name> ..."));
                }
                generator_names =
                    Some((tokens[1..].iter().map(|t| t.text.to_string()).collect(), line_no));
            }
            "state" => {
                let Some((alpha, _)) = &alphabet else {
                    return Err(syntax(head, "state declared before alphabet"));
                };
                let raw = parse_state_line(&tokens, alpha.len())?;
                raw_states.push(RawState { line: line_no, ..raw });
            }
            other => {
                return Err(syntax(head, format!("unknown directive '{}'", other)));
            }
        }
    }

    let Some((alphabet, _)) = alphabet else {
        return Err(syntax_at(1, 1, "missing alphabet directive"));
    };
    if raw_states.is_empty() {
        return Err(syntax_at(1, 1, "no state declarations"));
    }

    let letter_index: HashMap<&str, u16> =
        alphabet.iter().enumerate().map(|(i, t)| (t.as_str(), i as u16)).collect();
    let mut name_index: HashMap<&str, u32> = HashMap::new();
    for (i, rs) in raw_states.iter().enumerate() {
        if RESERVED.contains(&rs.name.as_str()) {
            return Err(syntax_at(rs.line, 1, format!("reserved token '{}' as state name", rs.name)));
        }
        if name_index.insert(rs.name.as_str(), i as u32).is_some() {
            return Err(syntax_at(rs.line, 1, format!("duplicate state name '{}'", rs.name)));
        }
    }

    let mut states = Vec::with_capacity(raw_states.len());
    for rs in &raw_states {
        let k = alphabet.len();
        let mut output = vec![None; k];
        let mut restriction = vec![None; k];
        for (lt, ot, rn) in &rs.clauses {
            let Some(&x) = letter_index.get(lt.as_str()) else {
                return Err(syntax_at(
                    rs.line,
                    1,
                    format!("state '{}': unknown letter token '{}'", rs.name, lt),
                ));
            };
            let Some(&y) = letter_index.get(ot.as_str()) else {
                return Err(syntax_at(
                    rs.line,
                    1,
                    format!("state '{}': unknown letter token '{}'", rs.name, ot),
                ));
            };
            if output[x as usize].is_some() {
                return Err(syntax_at(
                    rs.line,
                    1,
                    format!("state '{}': repeated clause for letter '{}'", rs.name, lt),
                ));
            }
            let Some(&r) = name_index.get(rn.as_str()) else {
                return Err(ParseError::DanglingRestriction {
                    name: rn.clone(),
                    referrer: rs.name.clone(),
                });
            };
            output[x as usize] = Some(Letter(y));
            restriction[x as usize] = Some(StateId(r));
        }
        // parse_state_line already enforced the clause count, so a hole means
        // some letter was covered twice and another missed.
        let mut out_vec = Vec::with_capacity(k);
        let mut res_vec = Vec::with_capacity(k);
        for x in 0..k {
            match (output[x], restriction[x]) {
                (Some(o), Some(r)) => {
                    out_vec.push(o);
                    res_vec.push(r);
                }
                _ => {
                    return Err(syntax_at(
                        rs.line,
                        1,
                        format!(
                            "state '{}': missing clause for letter '{}'",
                            rs.name, alphabet[x]
                        ),
                    ))
                }
            }
        }
        states.push(State { name: rs.name.clone(), output: out_vec, restriction: res_vec });
    }

    let declared_identity = match identity_name {
        Some((name, _)) => match name_index.get(name.as_str()) {
            Some(&i) => Some(StateId(i)),
            None => {
                return Err(ParseError::DanglingRestriction { name, referrer: "identity".into() })
            }
        },
        None => None,
    };
    let generators = match generator_names {
        Some((names, _)) => {
            let mut ids = Vec::with_capacity(names.len());
            for name in names {
                match name_index.get(name.as_str()) {
                    Some(&i) => ids.push(StateId(i)),
                    None => {
                        return Err(ParseError::DanglingRestriction {
                            name,
                            referrer: "generators".into(),
                        })
                    }
                }
            }
            Some(ids)
        }
        None => None,
    };

    NucleusAutomaton::new(alphabet, states, declared_identity, generators)
}

fn parse_state_line(tokens: &[Token<'_>], arity: usize) -> Result<RawState, ParseError> {
    // state <name> : <tok> -> <tok> . <name> , ...
    let head = &tokens[0];
    if tokens.len() < 2 {
        return Err(syntax(head, "expected: state <name> : <clauses>"));
    }
    let name = tokens[1].text.to_string();
    let expect = |i: usize, what: &str| -> Result<&Token<'_>, ParseError> {
        tokens.get(i).ok_or_else(|| {
            let last = tokens.last().unwrap();
            syntax_at(last.line, last.col + last.text.len(), format!("expected {what}"))
        })
    };
    let t = expect(2, "':'")?;
    if t.text != ":" {
        return Err(syntax(t, "expected ':'"));
    }
    let mut clauses = Vec::new();
    let mut i = 3;
    loop {
        let lt = expect(i, "letter token")?;
        let arrow = expect(i + 1, "'->'")?;
        if arrow.text != "->" {
            return Err(syntax(arrow, "expected '->'"));
        }
        let ot = expect(i + 2, "letter token")?;
        let dot = expect(i + 3, "'.'")?;
        if dot.text != "." {
            return Err(syntax(dot, "expected '.'"));
        }
        let rn = expect(i + 4, "state name")?;
        for t in [lt, ot, rn] {
            if RESERVED.contains(&t.text) {
                return Err(syntax(t, format!("unexpected '{}'", t.text)));
            }
        }
        clauses.push((lt.text.to_string(), ot.text.to_string(), rn.text.to_string()));
        i += 5;
        match tokens.get(i) {
            None => break,
            Some(t) if t.text == "," => i += 1,
            Some(t) => return Err(syntax(t, "expected ',' between clauses")),
        }
    }
    if clauses.len() != arity {
        return Err(syntax(
            head,
            format!("state '{}' has {} clauses, expected {}", name, clauses.len(), arity),
        ));
    }
    Ok(RawState { name, clauses, line: head.line })
}

/// Emits the same grammar deterministically: states in declaration order,
/// clauses in alphabet order. `parse ∘ serialize` is the identity.
pub fn serialize_presentation(aut: &NucleusAutomaton) -> String {
    let mut out = String::new();
    out.push_str("alphabet");
    for t in aut.alphabet() {
        out.push(' ');
        out.push_str(t);
    }
    out.push('\n');
    out.push_str(&format!("identity {}\n", aut.state_name(aut.identity())));
    for id in aut.state_ids() {
        let st = aut.state(id);
        out.push_str(&format!("state {} :", st.name));
        for x in aut.letters() {
            if x.0 > 0 {
                out.push_str(" ,");
            }
            let (y, r) = aut.act_letter(id, x);
            out.push_str(&format!(
                " {} -> {} . {}",
                aut.letter_token(x),
                aut.letter_token(y),
                aut.state_name(r)
            ));
        }
        out.push('\n');
    }
    if let Some(gens) = aut.generators() {
        out.push_str("generators");
        for &g in gens {
            out.push(' ');
            out.push_str(aut.state_name(g));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grigorchuk() {
        let aut = parse_presentation(super::super::tests::GRIGORCHUK).unwrap();
        assert_eq!(aut.alphabet_size(), 2);
        assert_eq!(aut.state_count(), 5);
        assert_eq!(aut.state_name(aut.identity()), "e");
    }

    #[test]
    fn accepts_trivial_nucleus() {
        let aut = parse_presentation("alphabet 0 1\nstate e : 0 -> 0 . e , 1 -> 1 . e\n").unwrap();
        assert_eq!(aut.state_count(), 1);
        assert_eq!(aut.state_name(aut.identity()), "e");
    }

    #[test]
    fn rejects_non_permutation() {
        let text = "\
alphabet 0 1
state e : 0 -> 0 . e , 1 -> 1 . e
state b : 0 -> 0 . e , 1 -> 0 . e
";
        match parse_presentation(text) {
            Err(ParseError::NotAPermutation { state, images }) => {
                assert_eq!(state, "b");
                assert_eq!(images, vec!["0", "0"]);
            }
            other => panic!("expected NotAPermutation, got {:?}", other),
        }
    }

    #[test]
    fn rejects_unknown_restriction() {
        let text = "\
alphabet 0 1
state e : 0 -> 0 . e , 1 -> 1 . ghost
";
        match parse_presentation(text) {
            Err(ParseError::DanglingRestriction { name, referrer }) => {
                assert_eq!(name, "ghost");
                assert_eq!(referrer, "e");
            }
            other => panic!("expected DanglingRestriction, got {:?}", other),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_presentation("alphabet 0 1\nstate e 0 -> 0 . e , 1 -> 1 . e\n") {
            Err(ParseError::Syntax { line, col, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(col, 9);
            }
            other => panic!("expected Syntax, got {:?}", other),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "\
# Grigorchuk-style identity only
alphabet 0 1   # binary

state e : 0 -> 0 . e , 1 -> 1 . e  # the identity
";
        assert!(parse_presentation(text).is_ok());
    }

    #[test]
    fn round_trips_through_serialization() {
        let text = "\
alphabet 0 1
state e : 0 -> 0 . e , 1 -> 1 . e
state a : 0 -> 1 . e , 1 -> 0 . a
generators a
";
        let aut = parse_presentation(text).unwrap();
        let emitted = serialize_presentation(&aut);
        let reparsed = parse_presentation(&emitted).unwrap();
        assert_eq!(aut, reparsed);
        assert_eq!(emitted, serialize_presentation(&reparsed));
    }
}
