//! The controlled rule language.
//!
//! Two surface forms are accepted everywhere:
//!
//! - compact: `pred(subj)`, `!pred(subj)`, `a(x) & !b(y) -> c(z)`
//! - English: `Bob is kind`, `The weather is not fine`,
//!   `Bob does not drive to work`, `Bob drives to work`,
//!   `If the weather is fine, Bob drives to work`,
//!   `If a is kind and b is kind then c is kind`
//!
//! Parsing is lossy on purpose: casing and articles are dropped, verb
//! phrases are slugified into predicate tokens (`drives to work` ->
//! `drives_to_work`), and `does not <verb>` normalizes the verb to its
//! third-person form so positive and negative statements of the same
//! proposition map to the same atom. The `Display` impls on
//! [`Literal`] and [`Rule`] are the canonical serialization, and
//! `parse(x.to_string()) == x` holds for every value.

use std::fmt;

use thiserror::Error;

use crate::logic::{Atom, Literal, LogicError, Provenance, Rule, RuleId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at byte {offset}: expected {expected}, found `{found}`")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    fn new(offset: usize, expected: impl Into<String>, found: &str) -> ParseError {
        let mut found = found.trim().to_string();
        if found.len() > 40 {
            found.truncate(40);
            found.push('…');
        }
        if found.is_empty() {
            found.push_str("end of input");
        }
        ParseError { offset, expected: expected.into(), found }
    }

    fn shifted(mut self, base: usize) -> ParseError {
        self.offset += base;
        self
    }

    fn from_logic(err: LogicError, offset: usize, found: &str) -> ParseError {
        ParseError::new(offset, err.to_string(), found)
    }
}

/// Articles stripped from the head of English subjects.
const ARTICLES: [&str; 3] = ["the", "a", "an"];

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `have -> has`, `drive -> drives`, `go -> goes`, `carry -> carries`.
fn third_person(verb: &str) -> String {
    match verb {
        "have" => return "has".to_string(),
        "do" => return "does".to_string(),
        "be" | "is" => return "is".to_string(),
        _ => {}
    }
    let bytes = verb.as_bytes();
    let last = *bytes.last().unwrap_or(&b'x') as char;
    if verb.ends_with('s')
        || verb.ends_with('x')
        || verb.ends_with('z')
        || verb.ends_with('o')
        || verb.ends_with("ch")
        || verb.ends_with("sh")
    {
        format!("{verb}es")
    } else if last == 'y'
        && bytes.len() >= 2
        && !matches!(bytes[bytes.len() - 2] as char, 'a' | 'e' | 'i' | 'o' | 'u')
    {
        format!("{}ies", &verb[..verb.len() - 1])
    } else {
        format!("{verb}s")
    }
}

/// Word of the input plus its byte offset.
#[derive(Clone, Copy)]
struct Word<'a> {
    text: &'a str,
    offset: usize,
}

fn tokenize(text: &str) -> Vec<Word<'_>> {
    let mut words = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                words.push(Word { text: &text[s..i], offset: s });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        words.push(Word { text: &text[s..], offset: s });
    }
    // Trailing sentence punctuation is not significant.
    for w in &mut words {
        w.text = w.text.trim_end_matches(['.', '!', '?', ',', ';']);
    }
    words.retain(|w| !w.text.is_empty());
    words
}

fn slug(words: &[Word<'_>]) -> String {
    words
        .iter()
        .map(|w| w.text.to_ascii_lowercase())
        .collect::<Vec<_>>()
        .join("_")
}

/// Parse one statement into a [`Literal`].
pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let trimmed = text.trim_start();
    let base = text.len() - trimmed.len();
    if trimmed.is_empty() {
        return Err(ParseError::new(base, "a statement", ""));
    }
    if looks_compact(trimmed) {
        return compact_literal(trimmed).map_err(|e| e.shifted(base));
    }
    english_literal(trimmed).map_err(|e| e.shifted(base))
}

fn looks_compact(text: &str) -> bool {
    let head = text.trim_start_matches('!');
    match head.find('(') {
        Some(i) => is_ident(head[..i].trim_end()),
        None => false,
    }
}

fn compact_literal(text: &str) -> Result<Literal, ParseError> {
    let text_trimmed = text.trim_end();
    let (negative, rest, rest_off) = match text_trimmed.strip_prefix('!') {
        Some(rest) => (true, rest, 1),
        None => (false, text_trimmed, 0),
    };
    let open = rest
        .find('(')
        .ok_or_else(|| ParseError::new(rest_off, "`(` after predicate", rest))?;
    let close = rest
        .rfind(')')
        .filter(|&c| c > open && rest[c + 1..].trim().is_empty())
        .ok_or_else(|| ParseError::new(rest_off + rest.len(), "closing `)`", ""))?;
    let predicate = rest[..open].trim();
    let subject = rest[open + 1..close].trim();
    if !is_ident(predicate) {
        return Err(ParseError::new(rest_off, "predicate token", predicate));
    }
    if !is_ident(subject) {
        return Err(ParseError::new(rest_off + open + 1, "subject token", subject));
    }
    let atom = Atom::new(subject, predicate)
        .map_err(|e| ParseError::from_logic(e, rest_off, text_trimmed))?;
    Ok(Literal::new(atom, polarity(negative)))
}

fn polarity(negative: bool) -> crate::logic::Polarity {
    if negative {
        crate::logic::Polarity::Negative
    } else {
        crate::logic::Polarity::Positive
    }
}

fn english_literal(text: &str) -> Result<Literal, ParseError> {
    let words = tokenize(text);
    if words.is_empty() {
        return Err(ParseError::new(0, "a statement", text));
    }

    let marker = words
        .iter()
        .position(|w| matches!(w.text.to_ascii_lowercase().as_str(), "is" | "does" | "do"));

    if let Some(m) = marker {
        let mut subject_words: Vec<Word> = words[..m].to_vec();
        if subject_words.len() > 1
            && ARTICLES.contains(&subject_words[0].text.to_ascii_lowercase().as_str())
        {
            subject_words.remove(0);
        }
        if subject_words.is_empty() {
            return Err(ParseError::new(words[m].offset, "a subject before the verb", text));
        }

        let keyword = words[m].text.to_ascii_lowercase();
        let mut rest = &words[m + 1..];
        let mut negative = false;
        if rest.first().map(|w| w.text.eq_ignore_ascii_case("not")) == Some(true) {
            negative = true;
            rest = &rest[1..];
        }
        if rest.is_empty() {
            let at = words.last().map(|w| w.offset + w.text.len()).unwrap_or(0);
            return Err(ParseError::new(at, "a predicate phrase", ""));
        }

        let predicate = if keyword == "is" {
            slug(rest)
        } else {
            // `does [not] drive to work` -> `drives_to_work`
            let mut parts = vec![third_person(&rest[0].text.to_ascii_lowercase())];
            parts.extend(rest[1..].iter().map(|w| w.text.to_ascii_lowercase()));
            parts.join("_")
        };
        let atom = Atom::new(&slug(&subject_words), &predicate)
            .map_err(|e| ParseError::from_logic(e, words[0].offset, text))?;
        return Ok(Literal::new(atom, polarity(negative)));
    }

    // Bare verb form: single-token subject (after an optional article),
    // the remainder is the predicate phrase. `Bob drives to work`.
    let mut idx = 0;
    if words.len() > 2 && ARTICLES.contains(&words[0].text.to_ascii_lowercase().as_str()) {
        idx = 1;
    }
    if words.len() < idx + 2 {
        let at = words.last().map(|w| w.offset + w.text.len()).unwrap_or(0);
        return Err(ParseError::new(at, "a predicate phrase after the subject", ""));
    }
    let subject = words[idx].text;
    let predicate = slug(&words[idx + 1..]);
    let atom = Atom::new(subject, &predicate)
        .map_err(|e| ParseError::from_logic(e, words[idx].offset, text))?;
    Ok(Literal::new(atom, polarity(false)))
}

/// Parse one rule. Free-standing rules get the id `r1`; sets reassign
/// ids positionally on construction.
pub fn parse_rule(text: &str) -> Result<Rule, ParseError> {
    parse_rule_with_id(text, RuleId::new("r1"))
}

pub fn parse_rule_with_id(text: &str, id: RuleId) -> Result<Rule, ParseError> {
    let trimmed = text.trim_start();
    let base = text.len() - trimmed.len();
    if trimmed.is_empty() {
        return Err(ParseError::new(base, "a rule", ""));
    }
    if let Some(arrow) = trimmed.find("->") {
        return compact_rule(trimmed, arrow, id).map_err(|e| e.shifted(base));
    }
    if trimmed.len() >= 3 && trimmed[..3].eq_ignore_ascii_case("if ") {
        return english_rule(trimmed, id).map_err(|e| e.shifted(base));
    }
    Err(ParseError::new(base, "`If ...` or `... -> ...`", trimmed))
}

fn compact_rule(text: &str, arrow: usize, id: RuleId) -> Result<Rule, ParseError> {
    let lhs = &text[..arrow];
    let rhs = &text[arrow + 2..];
    let mut antecedents = Vec::new();
    let mut seg_start = 0;
    for segment in lhs.split('&') {
        let lit = parse_segment(segment, seg_start)?;
        antecedents.push(lit);
        seg_start += segment.len() + 1;
    }
    let consequent = parse_segment(rhs, arrow + 2)?;
    Rule::new(id, antecedents, consequent).map_err(|e| ParseError::from_logic(e, 0, text))
}

fn parse_segment(segment: &str, base: usize) -> Result<Literal, ParseError> {
    let trimmed = segment.trim_start();
    if trimmed.trim_end().is_empty() {
        return Err(ParseError::new(base, "a statement", ""));
    }
    let inner_base = base + (segment.len() - trimmed.len());
    parse_literal(trimmed).map_err(|e| e.shifted(inner_base))
}

fn english_rule(text: &str, id: RuleId) -> Result<Rule, ParseError> {
    let words = tokenize(text);
    debug_assert!(words[0].text.eq_ignore_ascii_case("if"));
    let body_start = words[0].offset + words[0].text.len();
    let body = &text[body_start..];

    // The consequent starts at the word `then`, or after the first
    // comma when no `then` is present.
    let then_word = tokenize(body)
        .iter()
        .find(|w| w.text.eq_ignore_ascii_case("then"))
        .map(|w| (w.offset, w.offset + "then".len() + 1));
    let (lhs_end, rhs_start) = match then_word {
        Some(span) => span,
        None => match body.find(',') {
            Some(c) => (c, c + 1),
            None => {
                return Err(ParseError::new(
                    body_start,
                    "`then` or `,` separating the conclusion",
                    body,
                ))
            }
        },
    };
    let lhs = body[..lhs_end].trim_end().trim_end_matches(',');
    let rhs = &body[rhs_start.min(body.len())..];

    let mut antecedents = Vec::new();
    let mut cursor = 0;
    loop {
        let rest = &lhs[cursor..];
        match find_word(rest, "and") {
            Some(at) => {
                let lit = parse_segment(&rest[..at], body_start + cursor)?;
                antecedents.push(lit);
                cursor += at + "and".len();
            }
            None => {
                let lit = parse_segment(rest, body_start + cursor)?;
                antecedents.push(lit);
                break;
            }
        }
    }
    let consequent = parse_segment(rhs, body_start + rhs_start)?;
    Rule::new(id, antecedents, consequent).map_err(|e| ParseError::from_logic(e, 0, text))
}

/// Byte offset of a whole-word occurrence, if any.
fn find_word(text: &str, word: &str) -> Option<usize> {
    tokenize(text)
        .iter()
        .find(|w| w.text.eq_ignore_ascii_case(word))
        .map(|w| w.offset)
}

/// Canonical serialization; the inverse of [`parse_literal`].
pub fn serialize_literal(lit: &Literal) -> String {
    lit.to_string()
}

/// Canonical serialization; the inverse of [`parse_rule`].
pub fn serialize_rule(rule: &Rule) -> String {
    rule.to_string()
}

/// Parse a rule line from an LLM completion, tagging it as a
/// contrapositive of unknown origin.
pub fn parse_contrapositive_line(text: &str) -> Result<Rule, ParseError> {
    let rule = parse_rule(text)?;
    Rule::with_provenance(
        rule.id().clone(),
        rule.antecedents().to_vec(),
        rule.consequent().clone(),
        Provenance::Contrapositive { of: None },
    )
    .map_err(|e| ParseError::from_logic(e, 0, text))
}

impl fmt::Debug for Word<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}@{}", self.text, self.offset)
    }
}
