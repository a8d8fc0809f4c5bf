//! Offline backend driven by the symbolic reasoner.
//!
//! The mock parses the *target* problem back out of the prompt body
//! (the last `# Facts:` / `# Rules:` / `# Question:` block), answers
//! it with [`direct_answer`] or [`indirect_answer`] depending on the
//! prompt kind, and wraps the verdict in the same phrasing the
//! few-shot templates teach, including the structured `TRACE:` block.
//! Because the mock reasons over exactly the rules present in the
//! prompt, an instance that needs a contrapositive the prompt does not
//! contain comes back `Unknown` — rule augmentation visibly changes
//! mock behavior just as it is meant to change model behavior.
//!
//! Error injection simulates an unreliable model: a flipped sample
//! rewrites the final `Answer:` line but keeps the honestly computed
//! reasoning and trace, and garbage output has no answer marker at
//! all. The arbitration path exploits that: when asked to pick the
//! more reliable of conflicting reasonings, the mock prefers one whose
//! trace verdict agrees with its stated answer.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::client::SamplingConfig;
use crate::logic::{Rule, RuleId, RuleSet};
use crate::parse::{parse_literal, parse_rule_with_id};
use crate::prompts::{extract_answer, PromptKind, PromptText};
use crate::reasoner::{
    direct_answer, indirect_answer, Answer, KnowledgeBase, ProofTrace, TraceMode,
};

/// How the mock corrupts its output.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MockErrorMode {
    #[default]
    None,
    /// Flip every definite answer.
    FlipAll,
    /// Flip each definite answer independently with this probability.
    FlipProbability(f64),
    /// Flip direct answers on deep derivations (rule steps >=
    /// `threshold`) and indirect answers on shallow ones (< threshold).
    FlipByDepth { threshold: usize },
    /// Emit an unparseable completion with this probability.
    Garbage(f64),
}

#[derive(Debug, Clone, Default)]
pub struct MockConfig {
    pub error_mode: MockErrorMode,
}

#[derive(Debug)]
pub struct MockBackend {
    cfg: MockConfig,
}

fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for b in text.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

impl MockBackend {
    pub fn new(cfg: MockConfig) -> MockBackend {
        MockBackend { cfg }
    }

    /// Deterministic: the reply is a pure function of the prompt body,
    /// the seed, and the sample index.
    pub fn respond(&self, prompt: &PromptText, sampling: &SamplingConfig, index: usize) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(
            sampling.seed.unwrap_or(0)
                ^ fnv1a(&prompt.body)
                ^ (index as u64).wrapping_mul(0x9e3779b97f4a7c15),
        );

        if let MockErrorMode::Garbage(p) = self.cfg.error_mode {
            if rng.gen_bool(p.clamp(0.0, 1.0)) {
                return "The lanterns disagree about the weather, and the ledger \
                        hums a different tune entirely."
                    .to_string();
            }
        }

        match prompt.kind {
            PromptKind::RuleAugmentation => respond_rule_augmentation(&prompt.body),
            PromptKind::ConflictResolution => respond_arbitration(&prompt.body),
            PromptKind::FewShotIr | PromptKind::ZeroShotIr => {
                self.respond_factual(prompt, true, &mut rng)
            }
            PromptKind::FewShotDr | PromptKind::ZeroShotDr => {
                self.respond_factual(prompt, false, &mut rng)
            }
        }
    }

    fn respond_factual(
        &self,
        prompt: &PromptText,
        indirect: bool,
        rng: &mut ChaCha8Rng,
    ) -> String {
        let Some(problem) = TargetProblem::from_body(&prompt.body) else {
            return "The question cannot be assessed from the given material. Answer: Unknown"
                .to_string();
        };
        let outcome = if indirect {
            indirect_answer(&problem.kb, &problem.question)
        } else {
            direct_answer(&problem.kb, &problem.question)
        };
        let (answer, trace) = match outcome {
            Ok(pair) => pair,
            Err(e) => {
                return format!(
                    "The given facts and rules are contradictory ({e}). Answer: Unknown"
                )
            }
        };

        let flip = match self.cfg.error_mode {
            MockErrorMode::FlipAll => answer.is_definite(),
            MockErrorMode::FlipProbability(p) => {
                answer.is_definite() && rng.gen_bool(p.clamp(0.0, 1.0))
            }
            MockErrorMode::FlipByDepth { threshold } => {
                answer.is_definite()
                    && if indirect {
                        trace.depth() < threshold
                    } else {
                        trace.depth() >= threshold
                    }
            }
            MockErrorMode::None | MockErrorMode::Garbage(_) => false,
        };
        let stated = if flip {
            match answer {
                Answer::True => Answer::False,
                Answer::False => Answer::True,
                Answer::Unknown => Answer::Unknown,
            }
        } else {
            answer
        };

        let mut text = narrate(&problem, &trace);
        text.push_str(&render_trace_block(&trace));
        text.push_str(&format!("\nAnswer: {stated}"));
        text
    }
}

/// Narrative paragraph in the template's phrasing. Kept free of
/// answer markers so only the final `Answer:` line decides parsing.
fn narrate(problem: &TargetProblem, trace: &ProofTrace) -> String {
    let question = &problem.question;
    let mut out = String::new();
    match trace.mode {
        TraceMode::Contradiction => {
            let negated = question.negated();
            out.push_str(&format!("The negation of the original question is {negated}. "));
            let assumed = trace.assumption.clone().unwrap_or_else(|| negated.clone());
            out.push_str(&format!("Assuming {assumed} is true"));
            for step in &trace.steps {
                out.push_str(&format!(", {} holds by {}", step.derived, step.via));
            }
            match &trace.contradiction_pair {
                Some((x, y)) => {
                    let ground = if problem.kb.has_fact(y) { "fact" } else { "assumption" };
                    out.push_str(&format!(
                        ". {x} is the opposite of {y}. It contradicts the {ground} {y}."
                    ));
                }
                None => {
                    out.push_str(
                        ". No contradiction arises, and the symmetric assumption also \
                         stays consistent, so the question cannot be decided.",
                    );
                }
            }
        }
        TraceMode::Direct => {
            if trace.steps.is_empty() {
                out.push_str(
                    "Chaining forward from the facts reaches neither the question nor \
                     its negation.",
                );
            } else {
                out.push_str("Chaining forward from the facts");
                for step in &trace.steps {
                    out.push_str(&format!(", {} holds by {}", step.derived, step.via));
                }
                out.push('.');
            }
        }
    }
    out.push('\n');
    out
}

/// The `TRACE:` block for a computed proof.
pub fn render_trace_block(trace: &ProofTrace) -> String {
    let mut out = String::from("TRACE:\n");
    if let Some(a) = &trace.assumption {
        out.push_str(&format!("assume {a}\n"));
    }
    for step in &trace.steps {
        out.push_str(&format!("derive {} via {}\n", step.derived, step.via));
    }
    if let Some((x, y)) = &trace.contradiction_pair {
        out.push_str(&format!("conflict {x} {y}\n"));
    }
    out.push_str(&format!("verdict {}", trace.verdict));
    out
}

/// The target problem recovered from a prompt body: the last
/// `# Facts:` block, or just the `# Question:` line for zero-shot
/// prompts (which carry no facts and therefore answer `Unknown`).
struct TargetProblem {
    kb: KnowledgeBase,
    question: crate::logic::Literal,
}

impl TargetProblem {
    fn from_body(body: &str) -> Option<TargetProblem> {
        let lines: Vec<&str> = body.lines().collect();
        let facts_at = lines.iter().rposition(|l| l.trim() == "# Facts:");

        let mut facts = Vec::new();
        let mut rules: Vec<Rule> = Vec::new();
        let mut question = None;

        match facts_at {
            Some(start) => {
                let mut section = "facts";
                for line in &lines[start + 1..] {
                    let trimmed = line.trim();
                    if trimmed == "# Rules:" {
                        section = "rules";
                        continue;
                    }
                    if let Some(q) = trimmed.strip_prefix("# Question:") {
                        question = Some(parse_literal(q).ok()?);
                        break;
                    }
                    if trimmed.is_empty() || trimmed.starts_with('#') {
                        continue;
                    }
                    match section {
                        "facts" => facts.push(parse_literal(trimmed).ok()?),
                        _ => rules.push(
                            parse_rule_with_id(trimmed, RuleId::positional(rules.len())).ok()?,
                        ),
                    }
                }
            }
            None => {
                let q = lines
                    .iter()
                    .find_map(|l| l.trim().strip_prefix("# Question:"))?;
                question = parse_literal(q).ok();
            }
        }

        let question = question?;
        let rules = RuleSet::from_rules(rules).ok()?;
        let kb = KnowledgeBase::new(facts, rules).ok()?;
        Some(TargetProblem { kb, question })
    }
}

fn respond_rule_augmentation(body: &str) -> String {
    let lines: Vec<&str> = body.lines().collect();
    let Some(start) = lines.iter().rposition(|l| l.trim() == "# Rules:") else {
        return String::new();
    };
    let mut out = Vec::new();
    let mut index = 0;
    for line in &lines[start + 1..] {
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            break;
        }
        if trimmed.is_empty() {
            continue;
        }
        if let Ok(rule) = parse_rule_with_id(trimmed, RuleId::positional(index)) {
            for c in crate::logic::contrapositives(&rule) {
                out.push(c.to_string());
            }
        }
        index += 1;
    }
    out.join("\n")
}

/// Pick the more reliable of the listed reasonings: prefer the first
/// whose trace verdict matches its stated answer, then the first that
/// parses at all.
fn respond_arbitration(body: &str) -> String {
    let mut candidates: Vec<(usize, String)> = Vec::new();
    let mut current: Option<(usize, String)> = None;
    for line in body.lines() {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("# Reasoning ") {
            if let Some((n, _)) = rest.split_once(':') {
                if let Ok(n) = n.parse::<usize>() {
                    if let Some(done) = current.take() {
                        candidates.push(done);
                    }
                    current = Some((n, String::new()));
                    continue;
                }
            }
        }
        if trimmed.starts_with("# Which reasoning") || trimmed.starts_with("# Answer:") {
            if let Some(done) = current.take() {
                candidates.push(done);
            }
            continue;
        }
        if let Some((_, text)) = current.as_mut() {
            text.push_str(line);
            text.push('\n');
        }
    }
    if let Some(done) = current.take() {
        candidates.push(done);
    }

    let mut first_parseable: Option<(usize, Answer)> = None;
    for (n, text) in &candidates {
        if let Ok((answer, trace)) = extract_answer(text) {
            if first_parseable.is_none() {
                first_parseable = Some((*n, answer));
            }
            if trace.map(|t| t.verdict == answer).unwrap_or(false) {
                return format!(
                    "Reasoning {n} is internally consistent and therefore more reliable. \
                     Answer: {answer}"
                );
            }
        }
    }
    match first_parseable {
        Some((n, answer)) => format!(
            "None of the reasonings is internally consistent; taking reasoning {n}. \
             Answer: {answer}"
        ),
        None => "No reasoning could be assessed. Answer: Unknown".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::{Client, MockConfig};
    use crate::prompts::{render_few_shot_ir, Exemplar, ExemplarLabel, RenderOptions};

    fn exemplars() -> Vec<Exemplar> {
        vec![
            Exemplar {
                id: "e1".into(),
                facts: vec!["The oven is not hot".into()],
                rules: vec!["If the stove is lit, the oven is hot".into()],
                question: "The stove is not lit".into(),
                worked_answer: "The negation of the original question is the stove is lit. \
                 Assuming the stove is lit is true, the oven is hot by r1. It contradicts \
                 the fact that the oven is not hot. Answer: True"
                    .into(),
                label: ExemplarLabel::ContradictionFound,
                direct_worked_answer: None,
            },
            Exemplar {
                id: "e2".into(),
                facts: vec![],
                rules: vec!["If rex is hungry, rex barks".into()],
                question: "Rex barks".into(),
                worked_answer: "The negation of the original question is rex does not bark. \
                 Assuming rex does not bark is true, nothing follows; assuming rex barks is \
                 true, nothing follows either. Answer: Unknown"
                    .into(),
                label: ExemplarLabel::NoContradiction,
                direct_worked_answer: None,
            },
        ]
    }

    fn ir_prompt() -> PromptText {
        render_few_shot_ir(
            &["Bob does not drive to work".into()],
            &["If the weather is fine, Bob drives to work".into()],
            "The weather is not fine",
            &exemplars(),
            RenderOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn mock_answers_with_the_symbolic_verdict() {
        let client = Client::mock(MockConfig::default());
        let mut cfg = SamplingConfig::gpt35_profile();
        cfg.seed = Some(3);
        let completion = client.complete(&ir_prompt(), &cfg).unwrap();
        let (answer, trace) = extract_answer(&completion.text).unwrap();
        assert_eq!(answer, Answer::True);
        let trace = trace.expect("mock emits a trace block");
        assert_eq!(trace.verdict, Answer::True);
        assert!(completion.text.contains("The negation of the original question is"));
        assert!(completion.text.contains("It contradicts the fact"));
    }

    #[test]
    fn mock_is_deterministic_for_a_fixed_seed() {
        let client = Client::mock(MockConfig::default());
        let mut cfg = SamplingConfig::gpt35_profile();
        cfg.seed = Some(11);
        let a = client.complete(&ir_prompt(), &cfg).unwrap();
        let b = client.complete(&ir_prompt(), &cfg).unwrap();
        assert_eq!(a.text, b.text);
    }

    #[test]
    fn flipped_answers_keep_the_honest_trace() {
        let client = Client::mock(MockConfig { error_mode: MockErrorMode::FlipAll });
        let cfg = SamplingConfig::gpt35_profile();
        let completion = client.complete(&ir_prompt(), &cfg).unwrap();
        let (answer, trace) = extract_answer(&completion.text).unwrap();
        assert_eq!(answer, Answer::False);
        assert_eq!(trace.unwrap().verdict, Answer::True);
    }

    #[test]
    fn garbage_mode_is_unparseable() {
        let client = Client::mock(MockConfig { error_mode: MockErrorMode::Garbage(1.0) });
        let cfg = SamplingConfig::gpt35_profile();
        let completion = client.complete(&ir_prompt(), &cfg).unwrap();
        assert!(extract_answer(&completion.text).is_err());
    }

    #[test]
    fn augmentation_prompt_gets_contrapositive_lines() {
        let prompt = crate::prompts::render_rule_augmentation(
            &["If the weather is fine, Bob drives to work".into()],
            &[("rule".into(), "contrapositive".into())],
        )
        .unwrap();
        let client = Client::mock(MockConfig::default());
        let completion = client.complete(&prompt, &SamplingConfig::gpt35_profile()).unwrap();
        assert_eq!(
            completion.text.trim(),
            "!drives_to_work(bob) -> !fine(weather)"
        );
    }

    #[test]
    fn arbitration_prefers_the_coherent_reasoning() {
        let honest = "reasoning...\nTRACE:\nderive a(x) via fact\nverdict True\nAnswer: True";
        let flipped = "reasoning...\nTRACE:\nderive a(x) via fact\nverdict True\nAnswer: False";
        let prompt = crate::prompts::render_conflict_resolution(&[
            flipped.to_string(),
            honest.to_string(),
        ])
        .unwrap();
        let client = Client::mock(MockConfig::default());
        let completion = client.complete(&prompt, &SamplingConfig::gpt35_profile()).unwrap();
        let (answer, _) = extract_answer(&completion.text).unwrap();
        assert_eq!(answer, Answer::True);
        assert!(completion.text.contains("Reasoning 2"));
    }
}
