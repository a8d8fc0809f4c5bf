//! Ballot pooling and majority vote over candidate answers.
//!
//! A [`VoteTally`] records the candidates, per-answer counts, the
//! selected answer, and `P(selected) = count(selected) / M` where `M`
//! is the number of candidates. A tie between top answers leaves the
//! tally `Unresolved`; [`resolve`] escalates it either to an LLM
//! arbiter over one representative completion per tied answer, or to
//! the deterministic fallback, which abstains to `Unknown`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{Client, ClientError, SamplingConfig};
use crate::prompts::{extract_answer, render_conflict_resolution};
use crate::reasoner::Answer;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VoteError {
    #[error("cannot vote over an empty ballot")]
    EmptyBallot,
}

/// Which reasoning path produced a candidate answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Dr,
    Ir,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Dr => "DR",
            Source::Ir => "IR",
        })
    }
}

/// One ballot entry. `completion_ref` indexes the run's completion
/// list so arbitration can retrieve the underlying reasoning text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub answer: Answer,
    pub source: Source,
    pub completion_ref: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnswerCounts {
    pub true_count: usize,
    pub false_count: usize,
    pub unknown_count: usize,
}

impl AnswerCounts {
    pub fn get(&self, answer: Answer) -> usize {
        match answer {
            Answer::True => self.true_count,
            Answer::False => self.false_count,
            Answer::Unknown => self.unknown_count,
        }
    }

    fn bump(&mut self, answer: Answer) {
        match answer {
            Answer::True => self.true_count += 1,
            Answer::False => self.false_count += 1,
            Answer::Unknown => self.unknown_count += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_count + self.false_count + self.unknown_count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resolution {
    Majority,
    Unresolved,
    LlmArbitrated,
    DeterministicFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteTally {
    pub candidates: Vec<Candidate>,
    pub counts: AnswerCounts,
    pub selected: Answer,
    /// `count(selected) / candidates.len()`.
    pub probability: f64,
    pub resolution: Resolution,
}

impl VoteTally {
    pub fn is_resolved(&self) -> bool {
        self.resolution != Resolution::Unresolved
    }

    /// The answers sharing the maximum count, in canonical order.
    pub fn tied_answers(&self) -> Vec<Answer> {
        let max = Answer::ALL.iter().map(|a| self.counts.get(*a)).max().unwrap_or(0);
        Answer::ALL
            .iter()
            .copied()
            .filter(|a| self.counts.get(*a) == max && max > 0)
            .collect()
    }

    fn probability_of(&self, answer: Answer) -> f64 {
        self.counts.get(answer) as f64 / self.candidates.len() as f64
    }
}

/// Majority vote. A unique top answer resolves immediately; a tie is
/// marked `Unresolved` (with the canonically first tied answer as the
/// provisional selection) for escalation via [`resolve`].
pub fn vote(candidates: Vec<Candidate>) -> Result<VoteTally, VoteError> {
    if candidates.is_empty() {
        return Err(VoteError::EmptyBallot);
    }
    let mut counts = AnswerCounts::default();
    for c in &candidates {
        counts.bump(c.answer);
    }
    let max = Answer::ALL.iter().map(|a| counts.get(*a)).max().unwrap();
    let top: Vec<Answer> =
        Answer::ALL.iter().copied().filter(|a| counts.get(*a) == max).collect();
    let selected = top[0];
    let resolution = if top.len() == 1 { Resolution::Majority } else { Resolution::Unresolved };
    let probability = counts.get(selected) as f64 / candidates.len() as f64;
    Ok(VoteTally { candidates, counts, selected, probability, resolution })
}

/// Pool direct and indirect ballots and vote over the union.
pub fn combine_dir(
    dr: Vec<Candidate>,
    ir: Vec<Candidate>,
) -> Result<VoteTally, VoteError> {
    if dr.is_empty() || ir.is_empty() {
        return Err(VoteError::EmptyBallot);
    }
    let mut pooled = dr;
    pooled.extend(ir);
    vote(pooled)
}

/// How to break ties.
pub enum ResolveStrategy<'a> {
    /// Abstain: ties resolve to `Unknown`.
    Deterministic,
    /// Ask the model which reasoning is more reliable (one
    /// representative completion per tied answer). An unparseable
    /// arbitration falls back to the deterministic rule.
    Llm { client: &'a Client, sampling: &'a SamplingConfig, completions: &'a [String] },
}

/// Escalate an unresolved tally. Resolved tallies pass through
/// unchanged; client failures during arbitration propagate.
pub fn resolve(tally: VoteTally, strategy: ResolveStrategy<'_>) -> Result<VoteTally, ClientError> {
    if tally.is_resolved() {
        return Ok(tally);
    }
    let mut tally = tally;
    match strategy {
        ResolveStrategy::Deterministic => {
            tally.selected = Answer::Unknown;
            tally.probability = tally.probability_of(Answer::Unknown);
            tally.resolution = Resolution::DeterministicFallback;
            Ok(tally)
        }
        ResolveStrategy::Llm { client, sampling, completions } => {
            let mut representatives = Vec::new();
            for answer in tally.tied_answers() {
                let rep = tally
                    .candidates
                    .iter()
                    .find(|c| c.answer == answer)
                    .and_then(|c| completions.get(c.completion_ref));
                if let Some(text) = rep {
                    representatives.push(text.clone());
                }
            }
            let arbitrated = render_conflict_resolution(&representatives)
                .ok()
                .map(|prompt| client.complete(&prompt, sampling))
                .transpose()?
                .and_then(|completion| extract_answer(&completion.text).ok());
            match arbitrated {
                Some((answer, _)) => {
                    tally.selected = answer;
                    tally.probability = tally.probability_of(answer);
                    tally.resolution = Resolution::LlmArbitrated;
                }
                None => {
                    tally.selected = Answer::Unknown;
                    tally.probability = tally.probability_of(Answer::Unknown);
                    tally.resolution = Resolution::DeterministicFallback;
                }
            }
            Ok(tally)
        }
    }
}
