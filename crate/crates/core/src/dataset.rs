//! Problem instances and line-delimited dataset files.
//!
//! A dataset is UTF-8, one JSON object per line:
//!
//! ```json
//! {"id":"d1-001","task":"factual","facts":["Bob is kind"],
//!  "rules":["If Bob is kind, Anne is happy"],
//!  "question":"Anne is happy","answer":"True","depth":1}
//! ```
//!
//! Factual records parse their facts, rules, and question into the
//! rule language; math-proof records keep the problem as free text in
//! `question` and only the answer is structured. The original strings
//! are preserved verbatim for prompt rendering.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Literal, LogicError, Rule, RuleId, RuleSet};
use crate::parse::{parse_literal, parse_rule_with_id, ParseError};
use crate::reasoner::{Answer, KnowledgeBase, ReasonError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error reading dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: field `{field}`: {message}")]
    Schema { line: usize, field: &'static str, message: String },
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
}

impl DatasetError {
    fn schema(line: usize, field: &'static str, message: impl Into<String>) -> DatasetError {
        DatasetError::Schema { line, field, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    #[serde(rename = "factual")]
    Factual,
    #[serde(rename = "math-proof")]
    MathProof,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Factual => "factual",
            TaskKind::MathProof => "math-proof",
        })
    }
}

/// The source strings of a record, kept verbatim so prompts show the
/// text the dataset author wrote rather than the canonical forms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawText {
    pub facts: Vec<String>,
    pub rules: Vec<String>,
    pub question: String,
}

/// Parsed content of a factual record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactualBody {
    pub facts: Vec<Literal>,
    pub rules: RuleSet,
    pub question: Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub id: String,
    pub task: TaskKind,
    /// Present iff `task == Factual`.
    pub factual: Option<FactualBody>,
    pub gold_answer: Answer,
    pub gold_depth: Option<u32>,
    pub raw: RawText,
}

impl ProblemInstance {
    pub fn kb(&self) -> Result<KnowledgeBase, ReasonError> {
        let body = self.factual.as_ref().expect("kb() requires a factual instance");
        KnowledgeBase::new(body.facts.clone(), body.rules.clone())
    }

    pub fn question(&self) -> Option<&Literal> {
        self.factual.as_ref().map(|b| &b.question)
    }
}

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    task: TaskKind,
    #[serde(default)]
    facts: Vec<String>,
    #[serde(default)]
    rules: Vec<String>,
    question: String,
    answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    depth: Option<u32>,
}

fn instance_from_record(record: Record, line: usize) -> Result<ProblemInstance, DatasetError> {
    if record.id.trim().is_empty() {
        return Err(DatasetError::schema(line, "id", "must be non-empty"));
    }
    let answer = Answer::parse(&record.answer).ok_or_else(|| {
        DatasetError::schema(
            line,
            "answer",
            format!("must be True/False/Unknown, got `{}`", record.answer),
        )
    })?;

    let factual = match record.task {
        TaskKind::MathProof => None,
        TaskKind::Factual => {
            let facts = record
                .facts
                .iter()
                .map(|f| parse_literal(f))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|source| DatasetError::Parse { line, source })?;
            let rules = record
                .rules
                .iter()
                .enumerate()
                .map(|(i, r)| parse_rule_with_id(r, RuleId::positional(i)))
                .collect::<Result<Vec<Rule>, _>>()
                .map_err(|source| DatasetError::Parse { line, source })?;
            let rules = RuleSet::from_rules(rules)
                .map_err(|e: LogicError| DatasetError::schema(line, "rules", e.to_string()))?;
            let question = parse_literal(&record.question)
                .map_err(|source| DatasetError::Parse { line, source })?;
            Some(FactualBody { facts, rules, question })
        }
    };

    Ok(ProblemInstance {
        id: record.id,
        task: record.task,
        factual,
        gold_answer: answer,
        gold_depth: record.depth,
        raw: RawText {
            facts: record.facts,
            rules: record.rules,
            question: record.question,
        },
    })
}

fn record_from_instance(instance: &ProblemInstance) -> Record {
    Record {
        id: instance.id.clone(),
        task: instance.task,
        facts: instance.raw.facts.clone(),
        rules: instance.raw.rules.clone(),
        question: instance.raw.question.clone(),
        answer: instance.gold_answer.to_string(),
        depth: instance.gold_depth,
    }
}

/// Parse one dataset line. `line` is 1-based and used in errors only.
pub fn parse_record(text: &str, line: usize) -> Result<ProblemInstance, DatasetError> {
    let record: Record = serde_json::from_str(text)
        .map_err(|e| DatasetError::schema(line, "record", e.to_string()))?;
    instance_from_record(record, line)
}

/// Serialize one instance back to its dataset line. Raw strings are
/// emitted verbatim, so `parse_record(serialize_record(x)) == x`.
pub fn serialize_record(instance: &ProblemInstance) -> String {
    serde_json::to_string(&record_from_instance(instance)).expect("record serialization")
}

/// Load a whole dataset. Any bad line fails the load with its line
/// number; blank lines are skipped; instance order is file order.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<ProblemInstance>, DatasetError> {
    let text = fs::read_to_string(path)?;
    let mut instances = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let instance = parse_record(line, i + 1)?;
        if instances.iter().any(|e: &ProblemInstance| e.id == instance.id) {
            return Err(DatasetError::schema(
                i + 1,
                "id",
                format!("duplicate id `{}`", instance.id),
            ));
        }
        instances.push(instance);
    }
    Ok(instances)
}

pub fn write_dataset(
    path: impl AsRef<Path>,
    instances: &[ProblemInstance],
) -> Result<(), DatasetError> {
    let mut out = fs::File::create(path)?;
    for instance in instances {
        writeln!(out, "{}", serialize_record(instance))?;
    }
    Ok(())
}
