//! Propositional literals, rules, and contrapositive augmentation.
//!
//! An [`Atom`] is a unary-predicate proposition (`drives_to_work(bob)`),
//! a [`Literal`] is a signed atom, and a [`Rule`] is a conjunction of
//! antecedent literals implying one consequent literal. [`augment`]
//! extends a [`RuleSet`] with the contrapositive of every rule.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("atom tokens must be non-empty")]
    EmptyToken,
    #[error("atom token `{0}` contains characters outside [a-z0-9_]")]
    InvalidToken(String),
    #[error("rule must have at least one antecedent")]
    EmptyAntecedents,
    #[error("duplicate antecedent literal `{0}`")]
    DuplicateAntecedent(Literal),
    #[error("consequent `{0}` already appears among the antecedents")]
    TautologicalRule(Literal),
    #[error("rule `{0}` duplicates an existing rule (same antecedent set and consequent)")]
    DuplicateRule(Rule),
}

/// A ground proposition: one predicate applied to one subject.
///
/// Tokens are lowercased at construction, so `Atom` equality is
/// case-insensitive with respect to the source text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    subject: String,
    predicate: String,
}

fn normalize_token(token: &str) -> Result<String, LogicError> {
    let token = token.trim().to_ascii_lowercase();
    if token.is_empty() {
        return Err(LogicError::EmptyToken);
    }
    if !token.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(LogicError::InvalidToken(token));
    }
    Ok(token)
}

impl Atom {
    pub fn new(subject: &str, predicate: &str) -> Result<Atom, LogicError> {
        Ok(Atom {
            subject: normalize_token(subject)?,
            predicate: normalize_token(predicate)?,
        })
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.subject)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Negative,
}

/// A signed atom. Negation flips the sign; there is no stacked `¬¬p`
/// representation, so double negation is an involution by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    atom: Atom,
    polarity: Polarity,
}

impl Literal {
    pub fn positive(atom: Atom) -> Literal {
        Literal { atom, polarity: Polarity::Positive }
    }

    pub fn negative(atom: Atom) -> Literal {
        Literal { atom, polarity: Polarity::Negative }
    }

    pub fn new(atom: Atom, polarity: Polarity) -> Literal {
        Literal { atom, polarity }
    }

    pub fn atom(&self) -> &Atom {
        &self.atom
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn is_positive(&self) -> bool {
        self.polarity == Polarity::Positive
    }

    /// Same atom, flipped sign.
    pub fn negated(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            polarity: match self.polarity {
                Polarity::Positive => Polarity::Negative,
                Polarity::Negative => Polarity::Positive,
            },
        }
    }

    /// True when `other` is the same atom with the opposite sign.
    pub fn is_complement_of(&self, other: &Literal) -> bool {
        self.atom == other.atom && self.polarity != other.polarity
    }
}

// Canonical compact form: `pred(subj)` or `!pred(subj)`.
impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity == Polarity::Negative {
            write!(f, "!")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// Identifier a rule carries inside a [`RuleSet`]. Ids are positional:
/// the i-th rule of a set is always `r{i+1}`, and prompt renderings,
/// trace steps, and provenance records all refer to rules this way.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(String);

impl RuleId {
    pub fn new(id: impl Into<String>) -> RuleId {
        RuleId(id.into())
    }

    pub fn positional(index: usize) -> RuleId {
        RuleId(format!("r{}", index + 1))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Where a rule came from: stated in the source rulebase, or generated
/// as the contrapositive of another rule. LLM-extracted contrapositives
/// may not be attributable to a specific source rule, hence the option.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Original,
    Contrapositive { of: Option<RuleId> },
}

impl Provenance {
    pub fn is_contrapositive(&self) -> bool {
        matches!(self, Provenance::Contrapositive { .. })
    }
}

/// `a1 & a2 & ... -> c`. Antecedents are ordered and duplicate-free;
/// the consequent may not repeat an antecedent (tautologies are
/// rejected at construction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    id: RuleId,
    antecedents: Vec<Literal>,
    consequent: Literal,
    provenance: Provenance,
}

/// Deduplication key: antecedents as a set plus the consequent.
/// Identity and provenance do not participate.
pub type RuleKey = (BTreeSet<Literal>, Literal);

impl Rule {
    pub fn new(
        id: RuleId,
        antecedents: Vec<Literal>,
        consequent: Literal,
    ) -> Result<Rule, LogicError> {
        Rule::with_provenance(id, antecedents, consequent, Provenance::Original)
    }

    pub fn with_provenance(
        id: RuleId,
        antecedents: Vec<Literal>,
        consequent: Literal,
        provenance: Provenance,
    ) -> Result<Rule, LogicError> {
        if antecedents.is_empty() {
            return Err(LogicError::EmptyAntecedents);
        }
        let mut seen = BTreeSet::new();
        for a in &antecedents {
            if !seen.insert(a.clone()) {
                return Err(LogicError::DuplicateAntecedent(a.clone()));
            }
        }
        if seen.contains(&consequent) {
            return Err(LogicError::TautologicalRule(consequent));
        }
        Ok(Rule { id, antecedents, consequent, provenance })
    }

    pub fn id(&self) -> &RuleId {
        &self.id
    }

    pub fn antecedents(&self) -> &[Literal] {
        &self.antecedents
    }

    pub fn consequent(&self) -> &Literal {
        &self.consequent
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn key(&self) -> RuleKey {
        (self.antecedents.iter().cloned().collect(), self.consequent.clone())
    }

    fn reidentified(mut self, index: usize) -> Rule {
        self.id = RuleId::positional(index);
        self
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.antecedents.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, " -> {}", self.consequent)
    }
}

/// An ordered, duplicate-free collection of rules. Rule ids are
/// reassigned positionally (`r1`, `r2`, ...) whenever a set is built,
/// so a rule's id always matches its rendering order in prompts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

impl RuleSet {
    pub fn new() -> RuleSet {
        RuleSet::default()
    }

    /// Build a set, rejecting rules that collide on the dedup key.
    pub fn from_rules(rules: Vec<Rule>) -> Result<RuleSet, LogicError> {
        let mut set = RuleSet::new();
        for rule in rules {
            if set.contains_key(&rule.key()) {
                return Err(LogicError::DuplicateRule(rule));
            }
            set.push_unchecked(rule);
        }
        Ok(set)
    }

    fn contains_key(&self, key: &RuleKey) -> bool {
        self.rules.iter().any(|r| &r.key() == key)
    }

    fn push_unchecked(&mut self, rule: Rule) {
        let index = self.rules.len();
        self.rules.push(rule.reidentified(index));
    }

    /// Insert unless an equivalent rule is already present. Returns the
    /// assigned id on insertion.
    pub fn push_dedup(&mut self, rule: Rule) -> Option<RuleId> {
        if self.contains_key(&rule.key()) {
            return None;
        }
        self.push_unchecked(rule);
        Some(self.rules.last().expect("just pushed").id.clone())
    }

    pub fn get(&self, id: &RuleId) -> Option<&Rule> {
        self.rules.iter().find(|r| &r.id == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl<'a> IntoIterator for &'a RuleSet {
    type Item = &'a Rule;
    type IntoIter = std::slice::Iter<'a, Rule>;

    fn into_iter(self) -> Self::IntoIter {
        self.rules.iter()
    }
}

/// All contrapositives of a rule.
///
/// For `a1 & ... & an -> c` the i-th output moves the negated
/// consequent into the body and negates the i-th antecedent:
/// `!c & a1 & ... & a_{i-1} & a_{i+1} & ... & an -> !a_i`. With a
/// single antecedent this is the familiar `p -> q  ==>  !q -> !p`.
///
/// Generated rules get ids derived from the source (`r1c1`, `r1c2`, ...)
/// and provenance pointing back at it. A source whose antecedents
/// contain a complementary pair can yield degenerate (tautological)
/// outputs; those are skipped.
pub fn contrapositives(rule: &Rule) -> Vec<Rule> {
    let negated_consequent = rule.consequent().negated();
    let mut out = Vec::with_capacity(rule.antecedents().len());
    for (i, pivot) in rule.antecedents().iter().enumerate() {
        let mut body = vec![negated_consequent.clone()];
        for (j, a) in rule.antecedents().iter().enumerate() {
            if j != i && !body.contains(a) {
                body.push(a.clone());
            }
        }
        let id = RuleId::new(format!("{}c{}", rule.id(), i + 1));
        let provenance = Provenance::Contrapositive { of: Some(rule.id().clone()) };
        if let Ok(r) = Rule::with_provenance(id, body, pivot.negated(), provenance) {
            out.push(r);
        }
    }
    out
}

/// Extend a rule set with the contrapositives of every rule,
/// deduplicated. Originals keep their positions (and therefore their
/// ids); generated rules are appended after them.
pub fn augment(rules: &RuleSet) -> RuleSet {
    let mut out = rules.clone();
    for rule in rules {
        for c in contrapositives(rule) {
            out.push_dedup(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(spec: &str) -> Literal {
        let (neg, rest) = match spec.strip_prefix('!') {
            Some(rest) => (true, rest),
            None => (false, spec),
        };
        let atom = Atom::new("x", rest).unwrap();
        if neg {
            Literal::negative(atom)
        } else {
            Literal::positive(atom)
        }
    }

    fn rule(id: &str, ants: &[&str], cons: &str) -> Rule {
        Rule::new(
            RuleId::new(id),
            ants.iter().map(|a| lit(a)).collect(),
            lit(cons),
        )
        .unwrap()
    }

    #[test]
    fn atom_is_case_normalized() {
        let a = Atom::new("Bob", "DRIVES_to_work").unwrap();
        let b = Atom::new("bob", "drives_to_work").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "drives_to_work(bob)");
    }

    #[test]
    fn atom_rejects_empty_and_bad_tokens() {
        assert_eq!(Atom::new("", "p"), Err(LogicError::EmptyToken));
        assert_eq!(Atom::new("  ", "p"), Err(LogicError::EmptyToken));
        assert!(matches!(Atom::new("a b", "p"), Err(LogicError::InvalidToken(_))));
    }

    #[test]
    fn negation_flips_polarity() {
        let drives = Literal::positive(Atom::new("Bob", "drives").unwrap());
        assert_eq!(drives.negated().polarity(), Polarity::Negative);
        let fine = Literal::negative(Atom::new("weather", "fine").unwrap());
        assert!(fine.negated().is_positive());
    }

    #[test]
    fn negation_is_an_involution() {
        let big = Literal::positive(Atom::new("cat", "big").unwrap());
        assert_eq!(big.negated().negated(), big);
    }

    #[test]
    fn rule_rejects_duplicate_antecedents() {
        let err = Rule::new(RuleId::new("r1"), vec![lit("a"), lit("a")], lit("b"));
        assert!(matches!(err, Err(LogicError::DuplicateAntecedent(_))));
    }

    #[test]
    fn rule_rejects_consequent_repeating_an_antecedent() {
        let err = Rule::new(RuleId::new("r1"), vec![lit("a"), lit("b")], lit("a"));
        assert!(matches!(err, Err(LogicError::TautologicalRule(_))));
        // Opposite polarity is allowed.
        assert!(Rule::new(RuleId::new("r1"), vec![lit("a")], lit("!a")).is_ok());
    }

    #[test]
    fn single_antecedent_contrapositive() {
        // fine -> drives  becomes  !drives -> !fine
        let r = rule("r1", &["fine"], &"drives");
        let cs = contrapositives(&r);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].antecedents(), &[lit("!drives")]);
        assert_eq!(cs[0].consequent(), &lit("!fine"));
        assert_eq!(
            cs[0].provenance(),
            &Provenance::Contrapositive { of: Some(RuleId::new("r1")) }
        );
    }

    #[test]
    fn two_antecedent_contrapositives() {
        // a & b -> c  becomes  !c & b -> !a  and  !c & a -> !b
        let r = rule("r1", &["a", "b"], "c");
        let cs = contrapositives(&r);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].antecedents(), &[lit("!c"), lit("b")]);
        assert_eq!(cs[0].consequent(), &lit("!a"));
        assert_eq!(cs[1].antecedents(), &[lit("!c"), lit("a")]);
        assert_eq!(cs[1].consequent(), &lit("!b"));
    }

    #[test]
    fn negated_antecedent_contrapositive_eliminates_double_negation() {
        // !p -> q  becomes  !q -> p
        let r = rule("r1", &["!p"], "q");
        let cs = contrapositives(&r);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].antecedents(), &[lit("!q")]);
        assert_eq!(cs[0].consequent(), &lit("p"));
    }

    #[test]
    fn augment_appends_deduplicated_contrapositives() {
        let rs = RuleSet::from_rules(vec![rule("r1", &["fine"], "drives")]).unwrap();
        let aug = augment(&rs);
        assert_eq!(aug.len(), 2);
        let rules: Vec<_> = aug.iter().collect();
        assert_eq!(rules[0].provenance(), &Provenance::Original);
        assert_eq!(rules[0].id().as_str(), "r1");
        assert!(rules[1].provenance().is_contrapositive());
        assert_eq!(rules[1].id().as_str(), "r2");
    }

    #[test]
    fn augment_empty_set_is_empty() {
        assert!(augment(&RuleSet::new()).is_empty());
    }

    #[test]
    fn augment_is_idempotent_up_to_dedup() {
        let rs = RuleSet::from_rules(vec![
            rule("r1", &["a", "b"], "c"),
            rule("r2", &["!c"], "d"),
        ])
        .unwrap();
        let once = augment(&rs);
        let twice = augment(&once);
        let keys = |s: &RuleSet| s.iter().map(|r| r.key()).collect::<BTreeSet<_>>();
        assert_eq!(keys(&once), keys(&twice));
    }

    #[test]
    fn ruleset_rejects_duplicate_keys() {
        // Same antecedent set in a different order still collides.
        let r1 = rule("r1", &["a", "b"], "c");
        let r2 = rule("r2", &["b", "a"], "c");
        assert!(matches!(
            RuleSet::from_rules(vec![r1, r2]),
            Err(LogicError::DuplicateRule(_))
        ));
    }

    #[test]
    fn ruleset_ids_are_positional() {
        let rs = RuleSet::from_rules(vec![
            rule("anything", &["a"], "b"),
            rule("whatever", &["b"], "c"),
        ])
        .unwrap();
        let ids: Vec<_> = rs.iter().map(|r| r.id().as_str().to_string()).collect();
        assert_eq!(ids, ["r1", "r2"]);
        assert!(rs.get(&RuleId::new("r2")).is_some());
    }

    #[test]
    fn display_is_compact_form() {
        assert_eq!(lit("!p").to_string(), "!p(x)");
        assert_eq!(rule("r1", &["a", "!b"], "c").to_string(), "a(x) & !b(x) -> c(x)");
    }
}
