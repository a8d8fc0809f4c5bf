//! Forward chaining, proof by contradiction, and the truth-table
//! oracle that certifies both.
//!
//! The two reasoners are deliberately restricted to unit propagation:
//! a rule fires only when every antecedent is already established, and
//! no case-splitting is performed. That mirrors the stepwise
//! derivations an LLM is prompted to produce, and it means the
//! reasoners can return `Unknown` on instances [`model_check`] can
//! decide. They must never contradict the oracle, though — that
//! property is enforced by the test suite over enumerated families of
//! small knowledge bases.

use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Literal, RuleId, RuleSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReasonError {
    #[error("facts contain the complementary pair `{0}` and `{1}`")]
    ComplementaryFacts(Literal, Literal),
    #[error("knowledge base is inconsistent: derived both `{0}` and `{1}`")]
    InconsistentKb(Literal, Literal),
    #[error("model check over {0} atoms exceeds the cap of {MAX_ATOMS}")]
    TooManyAtoms(usize),
}

/// The answer alphabet: a question is provable, refutable, or neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    True,
    False,
    Unknown,
}

impl Answer {
    pub const ALL: [Answer; 3] = [Answer::True, Answer::False, Answer::Unknown];

    pub fn is_definite(self) -> bool {
        self != Answer::Unknown
    }

    pub fn parse(token: &str) -> Option<Answer> {
        match token.trim().to_ascii_lowercase().as_str() {
            "true" => Some(Answer::True),
            "false" => Some(Answer::False),
            "unknown" => Some(Answer::Unknown),
            _ => None,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::True => "True",
            Answer::False => "False",
            Answer::Unknown => "Unknown",
        })
    }
}

/// Facts plus rules. Construction rejects fact sets containing a
/// complementary pair; duplicate facts are collapsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    facts: Vec<Literal>,
    rules: RuleSet,
}

impl KnowledgeBase {
    pub fn new(facts: Vec<Literal>, rules: RuleSet) -> Result<KnowledgeBase, ReasonError> {
        let mut unique: Vec<Literal> = Vec::with_capacity(facts.len());
        for f in facts {
            if let Some(clash) = unique.iter().find(|u| u.is_complement_of(&f)) {
                return Err(ReasonError::ComplementaryFacts(clash.clone(), f));
            }
            if !unique.contains(&f) {
                unique.push(f);
            }
        }
        Ok(KnowledgeBase { facts: unique, rules })
    }

    pub fn facts(&self) -> &[Literal] {
        &self.facts
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn has_fact(&self, lit: &Literal) -> bool {
        self.facts.contains(lit)
    }

    /// Same facts, different rules; used when staging augmented rules.
    pub fn with_rules(&self, rules: RuleSet) -> KnowledgeBase {
        KnowledgeBase { facts: self.facts.clone(), rules }
    }
}

/// What licensed a derivation step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepSource {
    Fact,
    Assumption,
    Rule(RuleId),
}

impl fmt::Display for StepSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSource::Fact => f.write_str("fact"),
            StepSource::Assumption => f.write_str("assumption"),
            StepSource::Rule(id) => write!(f, "{id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub derived: Literal,
    pub via: StepSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceMode {
    Direct,
    Contradiction,
}

/// A machine-checkable derivation. In contradiction mode the
/// `assumption` is the literal that was assumed for the phase that
/// produced the verdict (the negated question when the verdict is
/// `True`, the question itself when it is `False`), and
/// `contradiction_pair` holds the complementary literals that closed
/// the proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTrace {
    pub mode: TraceMode,
    pub assumption: Option<Literal>,
    pub steps: Vec<TraceStep>,
    pub verdict: Answer,
    pub contradiction_pair: Option<(Literal, Literal)>,
}

impl ProofTrace {
    /// Number of rule applications; fact/assumption steps don't count.
    pub fn depth(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s.via, StepSource::Rule(_)))
            .count()
    }
}

/// Result of saturating a knowledge base: either a consistent closure,
/// or the first complementary pair encountered along with everything
/// derived up to that point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureOutcome {
    Consistent {
        literals: IndexSet<Literal>,
        steps: Vec<TraceStep>,
    },
    Contradiction {
        literals: IndexSet<Literal>,
        steps: Vec<TraceStep>,
        pair: (Literal, Literal),
    },
}

/// Unit propagation to a fixed point over `facts ∪ assumption`.
/// Deterministic: rules are tried in set order, rounds repeat until no
/// rule fires. Stops at the first complementary pair.
fn propagate(kb: &KnowledgeBase, assumption: Option<&Literal>) -> ClosureOutcome {
    let mut established: IndexSet<Literal> = kb.facts().iter().cloned().collect();
    let mut steps = Vec::new();

    if let Some(a) = assumption {
        if let Some(clash) = established.iter().find(|l| l.is_complement_of(a)).cloned() {
            established.insert(a.clone());
            return ClosureOutcome::Contradiction {
                literals: established,
                steps,
                pair: (a.clone(), clash),
            };
        }
        established.insert(a.clone());
    }

    loop {
        let mut fired = false;
        for rule in kb.rules() {
            if established.contains(rule.consequent()) {
                continue;
            }
            if !rule.antecedents().iter().all(|a| established.contains(a)) {
                continue;
            }
            let derived = rule.consequent().clone();
            established.insert(derived.clone());
            steps.push(TraceStep {
                derived: derived.clone(),
                via: StepSource::Rule(rule.id().clone()),
            });
            if let Some(clash) =
                established.iter().find(|l| l.is_complement_of(&derived)).cloned()
            {
                return ClosureOutcome::Contradiction {
                    literals: established,
                    steps,
                    pair: (derived, clash),
                };
            }
            fired = true;
        }
        if !fired {
            return ClosureOutcome::Consistent { literals: established, steps };
        }
    }
}

/// Least fixed point of the rule set over the facts. A complementary
/// pair in the closure is reported as a distinguished outcome rather
/// than an error so callers can inspect the offending derivation.
pub fn forward_closure(kb: &KnowledgeBase) -> ClosureOutcome {
    propagate(kb, None)
}

/// Keep only the steps on the derivation path to `targets`, in their
/// original firing order. Antecedents found in the facts or the
/// assumption terminate the walk.
fn prune_steps(
    kb: &KnowledgeBase,
    assumption: Option<&Literal>,
    steps: &[TraceStep],
    targets: &[&Literal],
) -> Vec<TraceStep> {
    let mut needed: IndexSet<Literal> = IndexSet::new();
    for t in targets {
        if !kb.has_fact(t) && assumption != Some(*t) {
            needed.insert((*t).clone());
        }
    }
    let mut keep = vec![false; steps.len()];
    for (i, step) in steps.iter().enumerate().rev() {
        if !needed.contains(&step.derived) {
            continue;
        }
        keep[i] = true;
        if let StepSource::Rule(id) = &step.via {
            if let Some(rule) = kb.rules().get(id) {
                for a in rule.antecedents() {
                    if !kb.has_fact(a) && assumption != Some(a) {
                        needed.insert(a.clone());
                    }
                }
            }
        }
    }
    steps
        .iter()
        .zip(keep)
        .filter_map(|(s, k)| k.then(|| s.clone()))
        .collect()
}

/// Forward chaining: `True` if the question is in the closure, `False`
/// if its negation is, `Unknown` otherwise. The trace holds only the
/// steps backward-reachable from the verdict literal.
pub fn direct_answer(
    kb: &KnowledgeBase,
    question: &Literal,
) -> Result<(Answer, ProofTrace), ReasonError> {
    let (literals, steps) = match forward_closure(kb) {
        ClosureOutcome::Consistent { literals, steps } => (literals, steps),
        ClosureOutcome::Contradiction { pair, .. } => {
            return Err(ReasonError::InconsistentKb(pair.0, pair.1))
        }
    };
    let negated = question.negated();
    let (verdict, target) = if literals.contains(question) {
        (Answer::True, Some(question))
    } else if literals.contains(&negated) {
        (Answer::False, Some(&negated))
    } else {
        (Answer::Unknown, None)
    };
    let steps = match target {
        Some(t) => {
            let mut pruned = prune_steps(kb, None, &steps, &[t]);
            if pruned.is_empty() {
                // The verdict literal is itself a fact.
                pruned.push(TraceStep { derived: t.clone(), via: StepSource::Fact });
            }
            pruned
        }
        None => Vec::new(),
    };
    Ok((
        verdict,
        ProofTrace {
            mode: TraceMode::Direct,
            assumption: None,
            steps,
            verdict,
            contradiction_pair: None,
        },
    ))
}

/// Proof by contradiction, in two phases. Phase 1 assumes the negated
/// question; a derived complementary pair proves the question. Phase 2
/// (only reached when phase 1 stays consistent) assumes the question
/// itself; a contradiction refutes it. Neither phase closing yields
/// `Unknown`.
pub fn indirect_answer(
    kb: &KnowledgeBase,
    question: &Literal,
) -> Result<(Answer, ProofTrace), ReasonError> {
    if let ClosureOutcome::Contradiction { pair, .. } = forward_closure(kb) {
        return Err(ReasonError::InconsistentKb(pair.0, pair.1));
    }

    let negated = question.negated();
    for (assumed, verdict) in [(&negated, Answer::True), (question, Answer::False)] {
        if let ClosureOutcome::Contradiction { steps, pair, .. } = propagate(kb, Some(assumed)) {
            let pruned = prune_steps(kb, Some(assumed), &steps, &[&pair.0, &pair.1]);
            return Ok((
                verdict,
                ProofTrace {
                    mode: TraceMode::Contradiction,
                    assumption: Some(assumed.clone()),
                    steps: pruned,
                    verdict,
                    contradiction_pair: Some(pair),
                },
            ));
        }
    }

    Ok((
        Answer::Unknown,
        ProofTrace {
            mode: TraceMode::Contradiction,
            assumption: Some(negated),
            steps: Vec::new(),
            verdict: Answer::Unknown,
            contradiction_pair: None,
        },
    ))
}

const MAX_ATOMS: usize = 20;

/// Entailment under exhaustive truth-assignment enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entailment {
    Answer(Answer),
    /// `facts ∪ rules` has no models at all.
    Inconsistent,
}

impl Entailment {
    pub fn as_answer(self) -> Option<Answer> {
        match self {
            Entailment::Answer(a) => Some(a),
            Entailment::Inconsistent => None,
        }
    }
}

/// Brute-force entailment oracle. Enumerates every assignment over the
/// atoms of the knowledge base and the question: `True` when all
/// models satisfy the question, `False` when all satisfy its negation,
/// `Unknown` otherwise, and `Inconsistent` when there are no models.
pub fn model_check(kb: &KnowledgeBase, question: &Literal) -> Result<Entailment, ReasonError> {
    let mut atoms: IndexSet<crate::logic::Atom> = IndexSet::new();
    for f in kb.facts() {
        atoms.insert(f.atom().clone());
    }
    for rule in kb.rules() {
        for a in rule.antecedents() {
            atoms.insert(a.atom().clone());
        }
        atoms.insert(rule.consequent().atom().clone());
    }
    atoms.insert(question.atom().clone());
    let n = atoms.len();
    if n > MAX_ATOMS {
        return Err(ReasonError::TooManyAtoms(n));
    }

    let index_of = |lit: &Literal| -> usize {
        atoms.get_index_of(lit.atom()).expect("atom was collected")
    };
    let truth = |lit: &Literal, mask: u32| -> bool {
        let bit = (mask >> index_of(lit)) & 1 == 1;
        bit == lit.is_positive()
    };

    let mut any_model = false;
    let mut q_in_all = true;
    let mut not_q_in_all = true;
    for mask in 0..(1u32 << n) {
        let facts_ok = kb.facts().iter().all(|f| truth(f, mask));
        if !facts_ok {
            continue;
        }
        let rules_ok = kb.rules().iter().all(|r| {
            !r.antecedents().iter().all(|a| truth(a, mask)) || truth(r.consequent(), mask)
        });
        if !rules_ok {
            continue;
        }
        any_model = true;
        if truth(question, mask) {
            not_q_in_all = false;
        } else {
            q_in_all = false;
        }
        if !q_in_all && !not_q_in_all {
            break;
        }
    }

    Ok(if !any_model {
        Entailment::Inconsistent
    } else if q_in_all {
        Entailment::Answer(Answer::True)
    } else if not_q_in_all {
        Entailment::Answer(Answer::False)
    } else {
        Entailment::Answer(Answer::Unknown)
    })
}

/// Outcome of mechanical trace validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceCheck {
    Valid,
    Invalid(String),
}

impl TraceCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, TraceCheck::Valid)
    }
}

fn invalid(reason: impl Into<String>) -> TraceCheck {
    TraceCheck::Invalid(reason.into())
}

/// Structural validation: every step must be licensed by a fact, the
/// recorded assumption, or a rule whose antecedents were all
/// established earlier; contradiction verdicts need a complementary,
/// established pair. (Whether the verdict answers a *particular*
/// question is checked by [`check_trace_for`].)
pub fn check_trace(kb: &KnowledgeBase, trace: &ProofTrace) -> TraceCheck {
    match trace.mode {
        TraceMode::Direct => {
            if trace.assumption.is_some() {
                return invalid("direct trace carries an assumption");
            }
            if trace.contradiction_pair.is_some() {
                return invalid("direct trace carries a contradiction pair");
            }
        }
        TraceMode::Contradiction => {
            if trace.assumption.is_none() {
                return invalid("contradiction trace lacks an assumption");
            }
            match (&trace.contradiction_pair, trace.verdict.is_definite()) {
                (Some(_), true) | (None, false) => {}
                (Some(_), false) => {
                    return invalid("contradiction pair present but verdict is Unknown")
                }
                (None, true) => {
                    return invalid("definite verdict without a contradiction pair")
                }
            }
        }
    }

    let mut established: IndexSet<Literal> = kb.facts().iter().cloned().collect();
    if let Some(a) = &trace.assumption {
        established.insert(a.clone());
    }
    for (i, step) in trace.steps.iter().enumerate() {
        match &step.via {
            StepSource::Fact => {
                if !kb.has_fact(&step.derived) {
                    return invalid(format!(
                        "step {}: `{}` cited as a fact but not in the fact set",
                        i + 1,
                        step.derived
                    ));
                }
            }
            StepSource::Assumption => {
                if trace.assumption.as_ref() != Some(&step.derived) {
                    return invalid(format!(
                        "step {}: `{}` cited as the assumption but it is not",
                        i + 1,
                        step.derived
                    ));
                }
            }
            StepSource::Rule(id) => {
                let Some(rule) = kb.rules().get(id) else {
                    return invalid(format!("step {}: unknown rule `{id}`", i + 1));
                };
                if rule.consequent() != &step.derived {
                    return invalid(format!(
                        "step {}: rule `{id}` concludes `{}`, not `{}`",
                        i + 1,
                        rule.consequent(),
                        step.derived
                    ));
                }
                if let Some(missing) =
                    rule.antecedents().iter().find(|a| !established.contains(*a))
                {
                    return invalid(format!(
                        "unlicensed step {}: antecedent `{missing}` of `{id}` not established",
                        i + 1
                    ));
                }
            }
        }
        established.insert(step.derived.clone());
    }

    if let Some((x, y)) = &trace.contradiction_pair {
        if !x.is_complement_of(y) {
            return invalid("pair not complementary");
        }
        if !established.contains(x) || !established.contains(y) {
            return invalid("contradiction pair not established by the trace");
        }
    }
    TraceCheck::Valid
}

/// [`check_trace`] plus the link between verdict and question: a
/// direct proof must actually derive the question (or its negation for
/// `False`), and a contradiction proof must have assumed the right
/// side of it.
pub fn check_trace_for(
    kb: &KnowledgeBase,
    trace: &ProofTrace,
    question: &Literal,
) -> TraceCheck {
    let structural = check_trace(kb, trace);
    if !structural.is_valid() {
        return structural;
    }
    match (trace.mode, trace.verdict) {
        (_, Answer::Unknown) => TraceCheck::Valid,
        (TraceMode::Direct, verdict) => {
            let goal = if verdict == Answer::True { question.clone() } else { question.negated() };
            if trace.steps.iter().any(|s| s.derived == goal) {
                TraceCheck::Valid
            } else {
                invalid(format!("direct trace never derives `{goal}`"))
            }
        }
        (TraceMode::Contradiction, verdict) => {
            let expected = if verdict == Answer::True {
                question.negated()
            } else {
                question.clone()
            };
            if trace.assumption.as_ref() == Some(&expected) {
                TraceCheck::Valid
            } else {
                invalid(format!("contradiction proof should assume `{expected}`"))
            }
        }
    }
}
