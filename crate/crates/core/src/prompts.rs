//! Prompt templates and completion parsing.
//!
//! Rendering is a pure function of its inputs: the same arguments
//! always produce a byte-identical body, and golden copies of every
//! template are pinned under `fixtures/prompts/` at the repository
//! root. The required instruction phrases (the merge-conditions step,
//! "Please consider all possibilities", the proof-by-contradiction
//! instruction block) are part of the template constants below and
//! asserted by tests.
//!
//! Completions flow back through [`extract_answer`], which also
//! recognizes an optional structured `TRACE:` block so reasoning
//! processes can be graded mechanically, and through
//! [`extract_contrapositives`] for rule-augmentation completions.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Literal, Rule};
use crate::parse::{parse_contrapositive_line, parse_literal};
use crate::reasoner::{Answer, ProofTrace, StepSource, TraceMode, TraceStep};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("prompt input must be non-empty: {0}")]
    EmptyInput(&'static str),
    #[error("few-shot exemplars must include at least one contradiction-found and one no-contradiction example")]
    DiversityViolation,
    #[error("conflict resolution needs at least two outputs with differing answers")]
    NoConflict,
    #[error("exemplar `{0}` has no direct-reasoning worked answer")]
    MissingDirectWorkedAnswer(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("no answer marker found in completion")]
pub struct Unparseable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PromptKind {
    RuleAugmentation,
    ZeroShotIr,
    ZeroShotDr,
    FewShotIr,
    FewShotDr,
    ConflictResolution,
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromptKind::RuleAugmentation => "rule-augmentation",
            PromptKind::ZeroShotIr => "zero-shot-ir",
            PromptKind::ZeroShotDr => "zero-shot-dr",
            PromptKind::FewShotIr => "few-shot-ir",
            PromptKind::FewShotDr => "few-shot-dr",
            PromptKind::ConflictResolution => "conflict-resolution",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptText {
    pub body: String,
    pub kind: PromptKind,
    pub exemplar_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExemplarLabel {
    #[serde(rename = "contradiction-found")]
    ContradictionFound,
    #[serde(rename = "no-contradiction")]
    NoContradiction,
}

/// A worked example for few-shot prompts. `worked_answer` shows an
/// indirect (contradiction) derivation; `direct_worked_answer`, when
/// present, shows the forward-chaining derivation of the same problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub id: String,
    #[serde(default)]
    pub facts: Vec<String>,
    #[serde(default)]
    pub rules: Vec<String>,
    pub question: String,
    pub worked_answer: String,
    pub label: ExemplarLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_worked_answer: Option<String>,
}

/// Load an exemplar pool (same line-delimited layout as datasets, with
/// the extra `worked_answer` / `label` fields).
pub fn load_exemplars(path: impl AsRef<Path>) -> Result<Vec<Exemplar>, std::io::Error> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ex: Exemplar = serde_json::from_str(line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("exemplar line {}: {e}", i + 1),
            )
        })?;
        out.push(ex);
    }
    Ok(out)
}

const RULE_AUG_INSTRUCTION: &str = "# <Instruction>The contrapositive is equivalent to the original rule, and now we need to convert the following rules into their contrapositives.</Instruction>";

const FEW_SHOT_IR_INSTRUCTION: &str = "# <Instruction> Proof by contradiction is a proof that determines the truth of a question by assuming the proposition is false, then working to show its falsity until the result of that assumption is a contradiction. </Instruction>";

const FEW_SHOT_DR_INSTRUCTION: &str = "# <Instruction> Direct reasoning determines the truth of a question by chaining forward from the given facts through the rules, one derivation at a time, until the question or its negation is reached. </Instruction>";

const CONFLICT_INSTRUCTION: &str = "# <Instruction>The reasoning outputs below answer the same question but reach different answers. Judge which reasoning is more reliable, then restate the final answer of the more reliable reasoning.</Instruction>";

const TRACE_FORMAT: &str = "# <Format>After the reasoning, emit a block that starts with the line TRACE: followed by an optional `assume <literal>` line, one `derive <literal> via <rule-id|fact|assumption>` line per step, an optional `conflict <literal> <literal>` line, and a final `verdict <True|False|Unknown>` line. End the whole reply with `Answer: <True|False|Unknown>`.</Format>";

/// Whether few-shot prompts ask for the structured `TRACE:` block.
/// Disable to reproduce the plain natural-language templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    pub request_trace: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { request_trace: true }
    }
}

fn problem_block(out: &mut String, facts: &[String], rules: &[String], question: &str) {
    out.push_str("# Facts:\n");
    for f in facts {
        out.push_str(f);
        out.push('\n');
    }
    out.push_str("# Rules:\n");
    for r in rules {
        out.push_str(r);
        out.push('\n');
    }
    out.push_str("# Question: ");
    out.push_str(question);
    out.push('\n');
}

/// Stage-1 prompt: convert rules to contrapositives, with worked
/// `(rule, contrapositive)` pairs ahead of the target rules.
pub fn render_rule_augmentation(
    rules: &[String],
    exemplars: &[(String, String)],
) -> Result<PromptText, PromptError> {
    if rules.is_empty() {
        return Err(PromptError::EmptyInput("rules"));
    }
    if exemplars.is_empty() {
        return Err(PromptError::EmptyInput("exemplar pairs"));
    }
    let mut body = String::new();
    body.push_str(RULE_AUG_INSTRUCTION);
    body.push('\n');
    for (i, (rule, contrapositive)) in exemplars.iter().enumerate() {
        body.push_str(&format!("# Example {}\n", i + 1));
        body.push_str(&format!("# Rule: {rule}\n"));
        body.push_str(&format!("# Contrapositive: {contrapositive}\n"));
    }
    body.push_str("# Rules:\n");
    for r in rules {
        body.push_str(r);
        body.push('\n');
    }
    body.push_str("# Contrapositives:");
    Ok(PromptText { body, kind: PromptKind::RuleAugmentation, exemplar_ids: Vec::new() })
}

/// Zero-shot indirect prompt. The three-step instruction block asks
/// the model to list the conditions, merge them into one (`wj`), and
/// test whether the merged condition can coexist with the negated
/// question.
pub fn render_zero_shot_ir(question: &str) -> Result<PromptText, PromptError> {
    if question.trim().is_empty() {
        return Err(PromptError::EmptyInput("question"));
    }
    let body = format!(
        "# Question: {question}\n\
         # Step 1: List the conditions and questions in the original proposition.\n\
         # Step 2: Merge the conditions listed in step 1 into one. Define it as wj.\n\
         # Step 3: Let us think it step by step. Please consider all possibilities. \
         If the intersection between wj (defined in step 2) and the negation of the question \
         is not empty at least in one possibility, the original proposition is false. \
         Otherwise, the original proposition is true.\n\
         # Answer:"
    );
    Ok(PromptText { body, kind: PromptKind::ZeroShotIr, exemplar_ids: Vec::new() })
}

/// Zero-shot direct (chain-of-thought) prompt; the baseline
/// counterpart of [`render_zero_shot_ir`].
pub fn render_zero_shot_dr(question: &str) -> Result<PromptText, PromptError> {
    if question.trim().is_empty() {
        return Err(PromptError::EmptyInput("question"));
    }
    let body = format!(
        "# Question: {question}\n\
         # Let us think it step by step. Reason forward from the given conditions to the \
         question, and decide whether the original proposition is true, false, or unknown.\n\
         # Answer:"
    );
    Ok(PromptText { body, kind: PromptKind::ZeroShotDr, exemplar_ids: Vec::new() })
}

fn check_diversity(exemplars: &[Exemplar]) -> Result<(), PromptError> {
    let found = exemplars.iter().any(|e| e.label == ExemplarLabel::ContradictionFound);
    let none = exemplars.iter().any(|e| e.label == ExemplarLabel::NoContradiction);
    if found && none {
        Ok(())
    } else {
        Err(PromptError::DiversityViolation)
    }
}

fn render_few_shot(
    kind: PromptKind,
    instruction: &str,
    facts: &[String],
    rules: &[String],
    question: &str,
    exemplars: &[Exemplar],
    worked: impl Fn(&Exemplar) -> Result<String, PromptError>,
    options: RenderOptions,
) -> Result<PromptText, PromptError> {
    if question.trim().is_empty() {
        return Err(PromptError::EmptyInput("question"));
    }
    let mut body = String::new();
    body.push_str(instruction);
    body.push('\n');
    if options.request_trace {
        body.push_str(TRACE_FORMAT);
        body.push('\n');
    }
    for (i, ex) in exemplars.iter().enumerate() {
        body.push_str(&format!("# Example {}\n", i + 1));
        problem_block(&mut body, &ex.facts, &ex.rules, &ex.question);
        body.push_str("# Answer: ");
        body.push_str(&worked(ex)?);
        body.push('\n');
    }
    problem_block(&mut body, facts, rules, question);
    body.push_str("# Answer:");
    Ok(PromptText {
        body,
        kind,
        exemplar_ids: exemplars.iter().map(|e| e.id.clone()).collect(),
    })
}

/// Few-shot indirect prompt: the proof-by-contradiction instruction
/// block, worked exemplars (which must mix contradiction-found and
/// no-contradiction labels), then the target problem.
pub fn render_few_shot_ir(
    facts: &[String],
    rules: &[String],
    question: &str,
    exemplars: &[Exemplar],
    options: RenderOptions,
) -> Result<PromptText, PromptError> {
    check_diversity(exemplars)?;
    render_few_shot(
        PromptKind::FewShotIr,
        FEW_SHOT_IR_INSTRUCTION,
        facts,
        rules,
        question,
        exemplars,
        |e| Ok(e.worked_answer.clone()),
        options,
    )
}

/// Few-shot direct prompt over the same exemplar pool; each exemplar
/// must carry a `direct_worked_answer`.
pub fn render_few_shot_dr(
    facts: &[String],
    rules: &[String],
    question: &str,
    exemplars: &[Exemplar],
    options: RenderOptions,
) -> Result<PromptText, PromptError> {
    if exemplars.is_empty() {
        return Err(PromptError::EmptyInput("exemplars"));
    }
    render_few_shot(
        PromptKind::FewShotDr,
        FEW_SHOT_DR_INSTRUCTION,
        facts,
        rules,
        question,
        exemplars,
        |e| {
            e.direct_worked_answer
                .clone()
                .ok_or_else(|| PromptError::MissingDirectWorkedAnswer(e.id.clone()))
        },
        options,
    )
}

/// Arbitration prompt over conflicting reasoning outputs. Requires at
/// least two outputs whose extracted answers differ.
pub fn render_conflict_resolution(outputs: &[String]) -> Result<PromptText, PromptError> {
    if outputs.len() < 2 {
        return Err(PromptError::EmptyInput("outputs"));
    }
    let answers: Vec<Option<Answer>> =
        outputs.iter().map(|o| extract_answer(o).ok().map(|(a, _)| a)).collect();
    let mut distinct: Vec<Answer> = Vec::new();
    for a in answers.into_iter().flatten() {
        if !distinct.contains(&a) {
            distinct.push(a);
        }
    }
    if distinct.len() < 2 {
        return Err(PromptError::NoConflict);
    }
    let mut body = String::new();
    body.push_str(CONFLICT_INSTRUCTION);
    body.push('\n');
    for (i, output) in outputs.iter().enumerate() {
        body.push_str(&format!("# Reasoning {}:\n{}\n", i + 1, output.trim_end()));
    }
    body.push_str("# Which reasoning is more reliable?\n# Answer:");
    Ok(PromptText { body, kind: PromptKind::ConflictResolution, exemplar_ids: Vec::new() })
}

fn find_token_answer(segment: &str) -> Option<Answer> {
    segment
        .split(|c: char| !c.is_ascii_alphanumeric())
        .find_map(Answer::parse)
}

/// Pull the final answer out of a completion, last marker wins:
/// `Answer: X`, "the original proposition is true/false", or a bare
/// `True`/`False`/`Unknown` as the whole last line. Also parses the
/// optional `TRACE:` block; a missing or malformed block simply yields
/// no trace.
pub fn extract_answer(completion: &str) -> Result<(Answer, Option<ProofTrace>), Unparseable> {
    let lower = completion.to_ascii_lowercase();
    let mut best: Option<(usize, Answer)> = None;
    let mut consider = |pos: usize, answer: Option<Answer>| {
        if let Some(a) = answer {
            if best.map(|(p, _)| pos >= p).unwrap_or(true) {
                best = Some((pos, a));
            }
        }
    };

    for (pos, _) in lower.match_indices("answer:") {
        let rest = &completion[pos + "answer:".len()..];
        let line_end = rest.find('\n').unwrap_or(rest.len());
        consider(pos, find_token_answer(&rest[..line_end]));
    }
    for (pos, _) in lower.match_indices("the original proposition is") {
        let rest = &lower[pos + "the original proposition is".len()..];
        let rest = rest.trim_start();
        let answer = if rest.starts_with("true") {
            Some(Answer::True)
        } else if rest.starts_with("false") {
            Some(Answer::False)
        } else {
            None
        };
        consider(pos, answer);
    }
    if let Some(last_line) = completion.lines().rev().find(|l| !l.trim().is_empty()) {
        let trimmed = last_line.trim().trim_end_matches(['.', '!']);
        if !trimmed.contains(' ') {
            let pos = completion.rfind(last_line).unwrap_or(0);
            consider(pos, Answer::parse(trimmed));
        }
    }

    match best {
        Some((_, answer)) => Ok((answer, extract_trace(completion))),
        None => Err(Unparseable),
    }
}

/// Parse the last `TRACE:` block, if any. Grammar:
///
/// ```text
/// TRACE:
/// assume <literal>                (optional, contradiction mode)
/// derive <literal> via <source>   (source: rule id, `fact`, `assumption`)
/// conflict <literal> <literal>    (optional)
/// verdict <True|False|Unknown>
/// ```
pub fn extract_trace(completion: &str) -> Option<ProofTrace> {
    let lines: Vec<&str> = completion.lines().collect();
    let start = lines.iter().rposition(|l| l.trim() == "TRACE:")?;

    let mut assumption: Option<Literal> = None;
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut pair: Option<(Literal, Literal)> = None;
    let mut verdict: Option<Answer> = None;

    for line in &lines[start + 1..] {
        let line = line.trim().trim_matches('`');
        if line.is_empty() || line.starts_with("```") {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next() {
            Some("assume") => {
                if assumption.is_some() || !steps.is_empty() {
                    return None;
                }
                assumption = Some(parse_literal(words.next()?).ok()?);
            }
            Some("derive") => {
                let lit = parse_literal(words.next()?).ok()?;
                if words.next() != Some("via") {
                    return None;
                }
                let source = match words.next()? {
                    "fact" => StepSource::Fact,
                    "assumption" => StepSource::Assumption,
                    id => StepSource::Rule(crate::logic::RuleId::new(id)),
                };
                steps.push(TraceStep { derived: lit, via: source });
            }
            Some("conflict") => {
                let a = parse_literal(words.next()?).ok()?;
                let b = parse_literal(words.next()?).ok()?;
                pair = Some((a, b));
            }
            Some("verdict") => {
                verdict = Answer::parse(words.next()?);
                break;
            }
            _ => return None,
        }
        if words.next().is_some() {
            return None;
        }
    }

    let verdict = verdict?;
    let mode = if assumption.is_some() { TraceMode::Contradiction } else { TraceMode::Direct };
    Some(ProofTrace { mode, assumption, steps, verdict, contradiction_pair: pair })
}

/// Result of scanning a rule-augmentation completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContrapositiveExtraction {
    pub rules: Vec<Rule>,
    /// Non-empty lines that did not parse as rules.
    pub dropped: usize,
}

/// Parse candidate contrapositive lines from a completion. Header and
/// list decorations are stripped; lines that still fail to parse are
/// dropped and counted rather than failing the whole extraction.
pub fn extract_contrapositives(completion: &str) -> ContrapositiveExtraction {
    let mut rules = Vec::new();
    let mut dropped = 0;
    for line in completion.lines() {
        let mut line = line.trim();
        for prefix in ["#", "-", "*"] {
            line = line.strip_prefix(prefix).unwrap_or(line).trim_start();
        }
        // `1.` / `2)` list numbering.
        if let Some((head, rest)) = line.split_once(['.', ')']) {
            if !head.is_empty() && head.chars().all(|c| c.is_ascii_digit()) {
                line = rest.trim_start();
            }
        }
        for header in ["Contrapositives:", "Contrapositive:"] {
            if let Some(rest) = strip_prefix_ci(line, header) {
                line = rest.trim_start();
            }
        }
        if line.is_empty() {
            continue;
        }
        match parse_contrapositive_line(line) {
            Ok(rule) => rules.push(rule),
            Err(_) => dropped += 1,
        }
    }
    ContrapositiveExtraction { rules, dropped }
}

fn strip_prefix_ci<'a>(text: &'a str, prefix: &str) -> Option<&'a str> {
    if text.len() >= prefix.len() && text[..prefix.len()].eq_ignore_ascii_case(prefix) {
        Some(&text[prefix.len()..])
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exemplar(id: &str, label: ExemplarLabel) -> Exemplar {
        Exemplar {
            id: id.to_string(),
            facts: vec!["The oven is not hot".into()],
            rules: vec!["If the stove is lit, the oven is hot".into()],
            question: "The stove is not lit".into(),
            worked_answer: "The negation of the original question is the stove is lit. \
             Assuming the stove is lit is true, the oven is hot by r1. It contradicts the \
             fact that the oven is not hot. Answer: True"
                .into(),
            label,
            direct_worked_answer: Some(
                "From the facts nothing derives the question directly. Answer: Unknown".into(),
            ),
        }
    }

    #[test]
    fn rule_augmentation_orders_exemplars_before_targets() {
        let p = render_rule_augmentation(
            &["If a is kind, b is kind".into()],
            &[("rule".into(), "contrapositive".into())],
        )
        .unwrap();
        let ex = p.body.find("# Example 1").unwrap();
        let target = p.body.find("# Rules:").unwrap();
        assert!(ex < target);
        assert!(p.body.ends_with("# Contrapositives:"));
    }

    #[test]
    fn rule_augmentation_rejects_empty_input() {
        assert_eq!(
            render_rule_augmentation(&[], &[("r".into(), "c".into())]).unwrap_err(),
            PromptError::EmptyInput("rules")
        );
    }

    #[test]
    fn zero_shot_ir_contains_required_phrases() {
        let p = render_zero_shot_ir("Decide whether n is even.").unwrap();
        assert!(p.body.contains("Please consider all possibilities"));
        assert!(p.body.contains("Merge the conditions listed in step 1 into one"));
        assert!(p.body.contains("Define it as wj"));
        assert!(p.body.ends_with("Answer:"));
    }

    #[test]
    fn few_shot_ir_enforces_exemplar_diversity() {
        let only_found = vec![
            exemplar("e1", ExemplarLabel::ContradictionFound),
            exemplar("e2", ExemplarLabel::ContradictionFound),
        ];
        let err = render_few_shot_ir(&[], &[], "q(x)", &only_found, RenderOptions::default());
        assert_eq!(err.unwrap_err(), PromptError::DiversityViolation);
    }

    #[test]
    fn few_shot_ir_renders_instruction_then_exemplars_then_target() {
        let exemplars = vec![
            exemplar("e1", ExemplarLabel::ContradictionFound),
            exemplar("e2", ExemplarLabel::NoContradiction),
        ];
        let p = render_few_shot_ir(
            &["a is kind".into()],
            &["If a is kind, b is kind".into()],
            "b is kind",
            &exemplars,
            RenderOptions::default(),
        )
        .unwrap();
        assert!(p.body.starts_with(FEW_SHOT_IR_INSTRUCTION));
        assert!(p.body.contains("Proof by contradiction"));
        assert!(p.body.ends_with("# Answer:"));
        assert_eq!(p.exemplar_ids, vec!["e1", "e2"]);
        let target = p.body.rfind("# Question: b is kind").unwrap();
        assert!(target > p.body.find("# Example 2").unwrap());
    }

    #[test]
    fn conflict_resolution_requires_a_conflict() {
        let agree = vec!["Answer: True".to_string(), "Answer: True".to_string()];
        assert_eq!(
            render_conflict_resolution(&agree).unwrap_err(),
            PromptError::NoConflict
        );
        let disagree = vec!["Answer: True".to_string(), "Answer: False".to_string()];
        let p = render_conflict_resolution(&disagree).unwrap();
        assert!(p.body.contains("# Reasoning 1:"));
        assert!(p.body.contains("# Reasoning 2:"));
    }

    #[test]
    fn extract_answer_takes_the_last_marker() {
        let (a, _) = extract_answer("Answer: False ... later ... Answer: True").unwrap();
        assert_eq!(a, Answer::True);
        let (a, _) =
            extract_answer("it conflicts with the fact. Answer: True").unwrap();
        assert_eq!(a, Answer::True);
    }

    #[test]
    fn extract_answer_reads_proposition_phrasing() {
        let (a, _) = extract_answer("Therefore the original proposition is false.").unwrap();
        assert_eq!(a, Answer::False);
    }

    #[test]
    fn extract_answer_reads_bare_final_token() {
        let (a, _) = extract_answer("Reasoning...\nUnknown").unwrap();
        assert_eq!(a, Answer::Unknown);
    }

    #[test]
    fn extract_answer_fails_without_marker() {
        assert!(extract_answer("the weather is probably nice").is_err());
    }

    #[test]
    fn extract_answer_round_trips_all_values() {
        for (token, expected) in
            [("True", Answer::True), ("False", Answer::False), ("Unknown", Answer::Unknown)]
        {
            let completion = format!("reasoning text. Answer: {token}");
            assert_eq!(extract_answer(&completion).unwrap().0, expected);
        }
    }

    #[test]
    fn trace_block_parses_into_a_proof() {
        let completion = "Assuming fine(weather)...\n\
            TRACE:\n\
            assume fine(weather)\n\
            derive drives_to_work(bob) via r1\n\
            conflict drives_to_work(bob) !drives_to_work(bob)\n\
            verdict True\n\
            Answer: True";
        let (a, trace) = extract_answer(completion).unwrap();
        assert_eq!(a, Answer::True);
        let trace = trace.unwrap();
        assert_eq!(trace.mode, TraceMode::Contradiction);
        assert_eq!(trace.steps.len(), 1);
        assert!(trace.contradiction_pair.is_some());
        assert_eq!(trace.verdict, Answer::True);
    }

    #[test]
    fn malformed_trace_yields_none() {
        let completion = "TRACE:\nderive nonsense without via\nverdict True\nAnswer: True";
        let (_, trace) = extract_answer(completion).unwrap();
        assert!(trace.is_none());
        let completion = "TRACE:\nderive a(x) via r1\nAnswer: True"; // no verdict
        assert!(extract_answer(completion).unwrap().1.is_none());
    }

    #[test]
    fn contrapositive_extraction_is_lossy_by_contract() {
        let completion = "# Contrapositives:\n\
            If b is not kind, a is not kind\n\
            this line is not a rule\n\
            !c(x) -> !b(x)\n";
        let out = extract_contrapositives(completion);
        assert_eq!(out.rules.len(), 2);
        assert_eq!(out.dropped, 1);
        assert!(out.rules.iter().all(|r| r.provenance().is_contrapositive()));
    }

    #[test]
    fn contrapositive_extraction_of_empty_completion() {
        let out = extract_contrapositives("");
        assert!(out.rules.is_empty());
        assert_eq!(out.dropped, 0);
    }
}
