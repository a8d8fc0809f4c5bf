//! Pipeline runner, grading, metrics, and run files.
//!
//! [`run_pipeline`] evaluates a dataset instance by instance: stage
//! the rules (optionally augmenting them symbolically or via an LLM
//! round trip), render the path prompts, draw `M` samples per path,
//! pool and vote the extracted answers, escalate ties, and grade the
//! selected answer and its reasoning trace. Per-instance failures are
//! captured in the record and the run continues; only dataset-level
//! problems abort.
//!
//! Instances are evaluated concurrently but records always come back
//! in dataset order, and with the mock backend the records are a pure
//! function of the dataset, the options, and the seed.

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{Client, ClientError, SamplingConfig};
use crate::dataset::{ProblemInstance, TaskKind};
use crate::logic::{augment, contrapositives, Provenance, Rule, RuleSet};
use crate::prompts::{
    extract_answer, extract_contrapositives, render_few_shot_dr, render_few_shot_ir,
    render_rule_augmentation, render_zero_shot_dr, render_zero_shot_ir, Exemplar, PromptText,
    RenderOptions,
};
use crate::logic::Literal;
use crate::reasoner::{check_trace_for, Answer, KnowledgeBase, ProofTrace};
use crate::vote::{combine_dir, resolve, vote, Candidate, ResolveStrategy, Source, VoteTally};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot compute metrics over an empty run")]
    EmptyRun,
    #[error("records mix pipelines or augmentation settings; compute metrics per cell")]
    MixedCell,
    #[error("a comparison needs at least two cells")]
    NeedTwoCells,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed run file: {0}")]
    Malformed(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pipeline {
    Dr,
    Ir,
    Dir,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Dr => "dr",
            Pipeline::Ir => "ir",
            Pipeline::Dir => "dir",
        })
    }
}

impl FromStr for Pipeline {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dr" => Ok(Pipeline::Dr),
            "ir" => Ok(Pipeline::Ir),
            "dir" => Ok(Pipeline::Dir),
            other => Err(format!("unknown pipeline `{other}` (expected dr|ir|dir)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PromptStyle {
    ZeroShot,
    FewShot,
}

impl FromStr for PromptStyle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "zero-shot" | "zeroshot" => Ok(PromptStyle::ZeroShot),
            "few-shot" | "fewshot" => Ok(PromptStyle::FewShot),
            other => Err(format!("unknown prompt style `{other}` (expected zero-shot|few-shot)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleAugMode {
    Off,
    Symbolic,
    Llm,
}

impl RuleAugMode {
    pub fn is_on(self) -> bool {
        self != RuleAugMode::Off
    }
}

impl FromStr for RuleAugMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "off" | "none" => Ok(RuleAugMode::Off),
            "symbolic" => Ok(RuleAugMode::Symbolic),
            "llm" => Ok(RuleAugMode::Llm),
            other => Err(format!("unknown rule_aug `{other}` (expected off|symbolic|llm)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arbitration {
    Llm,
    Deterministic,
}

impl FromStr for Arbitration {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "llm" => Ok(Arbitration::Llm),
            "deterministic" => Ok(Arbitration::Deterministic),
            other => Err(format!("unknown arbitration `{other}` (expected llm|deterministic)")),
        }
    }
}

/// The worked rule/contrapositive pair embedded in Stage-1 prompts.
pub const AUGMENTATION_EXEMPLARS: [(&str, &str); 1] = [(
    "If the weather is fine, Bob drives to work",
    "If Bob does not drive to work, the weather is not fine",
)];

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub pipeline: Pipeline,
    pub prompt_style: PromptStyle,
    pub rule_aug: RuleAugMode,
    /// Per-path decoder settings; `num_samples` is M per path.
    pub sampling: SamplingConfig,
    pub arbitration: Arbitration,
    pub render: RenderOptions,
    pub concurrency: usize,
    pub exemplars: Vec<Exemplar>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceStatus {
    Correct,
    Incorrect,
    Ungraded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub source: Source,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub instance_id: String,
    pub pipeline: Pipeline,
    pub rule_aug: bool,
    pub gold: Answer,
    pub predicted: Option<Answer>,
    pub tally: Option<VoteTally>,
    pub trace_status: TraceStatus,
    pub answer_correct: bool,
    pub overall_correct: bool,
    pub completions: Vec<SampleRecord>,
    /// Set when the instance could not be answered at all.
    pub failure: Option<String>,
}

/// Everything the grader needs to judge one prediction. The knowledge
/// base is the *staged* one (augmented rules included) so traces that
/// cite generated rules validate.
pub struct GradingContext<'a> {
    pub gold: Answer,
    pub kb: Option<&'a KnowledgeBase>,
    pub question: Option<&'a Literal>,
}

/// Returns `(answer_correct, trace_status)`. A missing trace — or a
/// math-proof instance, which has no checkable structure — grades as
/// `Ungraded`, which counts as not-correct for overall accuracy.
pub fn grade(
    ctx: &GradingContext<'_>,
    predicted: Option<Answer>,
    trace: Option<&ProofTrace>,
) -> (bool, TraceStatus) {
    let answer_correct = predicted == Some(ctx.gold);
    let trace_status = match (trace, ctx.kb, ctx.question) {
        (Some(trace), Some(kb), Some(question)) => {
            if check_trace_for(kb, trace, question).is_valid() && trace.verdict == ctx.gold {
                TraceStatus::Correct
            } else {
                TraceStatus::Incorrect
            }
        }
        _ => TraceStatus::Ungraded,
    };
    (answer_correct, trace_status)
}

/// Rules staged for prompting: the effective rule set plus the text
/// lines rendered into the prompt, index-aligned with the set.
pub struct StagedRules {
    pub rules: RuleSet,
    pub text: Vec<String>,
}

/// Stage 1 for one instance: pass the rules through, augment them
/// symbolically, or round-trip them through the augmentation prompt
/// and fold the extracted contrapositives back in (attributed to their
/// source rule when they match a symbolic contrapositive).
pub fn stage_rules(
    instance: &ProblemInstance,
    mode: RuleAugMode,
    client: &Client,
    sampling: &SamplingConfig,
) -> Result<StagedRules, String> {
    let body = instance.factual.as_ref().expect("factual instance");
    let original_text = instance.raw.rules.clone();
    match mode {
        RuleAugMode::Off => Ok(StagedRules { rules: body.rules.clone(), text: original_text }),
        RuleAugMode::Symbolic => {
            let rules = augment(&body.rules);
            let mut text = original_text;
            for rule in rules.iter().skip(body.rules.len()) {
                text.push(rule.to_string());
            }
            Ok(StagedRules { rules, text })
        }
        RuleAugMode::Llm => {
            if body.rules.is_empty() {
                return Ok(StagedRules { rules: body.rules.clone(), text: original_text });
            }
            let pairs: Vec<(String, String)> = AUGMENTATION_EXEMPLARS
                .iter()
                .map(|(r, c)| (r.to_string(), c.to_string()))
                .collect();
            let prompt = render_rule_augmentation(&instance.raw.rules, &pairs)
                .map_err(|e| e.to_string())?;
            let completion = client.complete(&prompt, sampling).map_err(|e| e.to_string())?;
            let extracted = extract_contrapositives(&completion.text);

            // Attribute each extracted rule to its source when it
            // matches a symbolic contrapositive of an original rule.
            let mut rules = body.rules.clone();
            let mut text = original_text;
            for mut rule in extracted.rules {
                let source = body
                    .rules
                    .iter()
                    .find(|orig| contrapositives(orig).iter().any(|c| c.key() == rule.key()))
                    .map(|orig| orig.id().clone());
                rule = Rule::with_provenance(
                    rule.id().clone(),
                    rule.antecedents().to_vec(),
                    rule.consequent().clone(),
                    Provenance::Contrapositive { of: source },
                )
                .map_err(|e| e.to_string())?;
                let rendering = rule.to_string();
                if rules.push_dedup(rule).is_some() {
                    text.push(rendering);
                }
            }
            Ok(StagedRules { rules, text })
        }
    }
}

fn path_prompt(
    source: Source,
    instance: &ProblemInstance,
    staged: Option<&StagedRules>,
    opts: &RunOptions,
) -> Result<PromptText, String> {
    let question = &instance.raw.question;
    let few_shot = instance.task == TaskKind::Factual && opts.prompt_style == PromptStyle::FewShot;
    let prompt = if few_shot {
        let staged = staged.expect("factual instances are staged");
        match source {
            Source::Ir => render_few_shot_ir(
                &instance.raw.facts,
                &staged.text,
                question,
                &opts.exemplars,
                opts.render,
            ),
            Source::Dr => render_few_shot_dr(
                &instance.raw.facts,
                &staged.text,
                question,
                &opts.exemplars,
                opts.render,
            ),
        }
    } else {
        match source {
            Source::Ir => render_zero_shot_ir(question),
            Source::Dr => render_zero_shot_dr(question),
        }
    };
    prompt.map_err(|e| e.to_string())
}

fn failed_record(instance: &ProblemInstance, opts: &RunOptions, message: String) -> EvalRecord {
    EvalRecord {
        instance_id: instance.id.clone(),
        pipeline: opts.pipeline,
        rule_aug: opts.rule_aug.is_on(),
        gold: instance.gold_answer,
        predicted: None,
        tally: None,
        trace_status: TraceStatus::Ungraded,
        answer_correct: false,
        overall_correct: false,
        completions: Vec::new(),
        failure: Some(message),
    }
}

fn evaluate_instance(
    instance: &ProblemInstance,
    client: &Client,
    opts: &RunOptions,
) -> EvalRecord {
    // Stage 1: rule augmentation (factual instances only).
    let staged = if instance.task == TaskKind::Factual {
        match stage_rules(instance, opts.rule_aug, client, &opts.sampling) {
            Ok(s) => Some(s),
            Err(message) => return failed_record(instance, opts, message),
        }
    } else {
        None
    };
    let staged_kb = match (&staged, instance.factual.as_ref()) {
        (Some(staged), Some(_)) => match instance.kb() {
            Ok(kb) => Some(kb.with_rules(staged.rules.clone())),
            Err(e) => return failed_record(instance, opts, e.to_string()),
        },
        _ => None,
    };

    // Stage 2: prompt, sample, and extract per path.
    let paths: &[Source] = match opts.pipeline {
        Pipeline::Dr => &[Source::Dr],
        Pipeline::Ir => &[Source::Ir],
        Pipeline::Dir => &[Source::Dr, Source::Ir],
    };

    let mut completions: Vec<SampleRecord> = Vec::new();
    let mut traces: Vec<Option<ProofTrace>> = Vec::new();
    let mut ballots: Vec<Vec<Candidate>> = Vec::new();
    let mut errors: Vec<String> = Vec::new();

    for &source in paths {
        let prompt = match path_prompt(source, instance, staged.as_ref(), opts) {
            Ok(p) => p,
            Err(message) => return failed_record(instance, opts, message),
        };
        let samples = match client.sample_n(&prompt, &opts.sampling) {
            Ok(samples) => samples,
            Err(ClientError::SampleShortfall { completions: got, want }) => {
                errors.push(format!("{source}: sampled {} of {want}", got.len()));
                got
            }
            Err(e) => {
                errors.push(format!("{source}: {e}"));
                Vec::new()
            }
        };
        let mut candidates = Vec::new();
        for sample in samples {
            let index = completions.len();
            match extract_answer(&sample.text) {
                Ok((answer, trace)) => {
                    candidates.push(Candidate { answer, source, completion_ref: index });
                    traces.push(trace);
                }
                Err(_) => traces.push(None),
            }
            completions.push(SampleRecord { source, text: sample.text });
        }
        ballots.push(candidates);
    }

    // Vote, pooling both paths for DIR.
    let tally = match opts.pipeline {
        Pipeline::Dir => {
            let mut it = ballots.into_iter();
            combine_dir(it.next().unwrap_or_default(), it.next().unwrap_or_default())
        }
        _ => vote(ballots.into_iter().flatten().collect()),
    };
    let tally = match tally {
        Ok(t) => t,
        Err(_) => {
            let mut record = failed_record(
                instance,
                opts,
                format!("no usable ballot ({})", errors.join("; ")),
            );
            record.completions = completions;
            return record;
        }
    };

    // Tie escalation.
    let completion_texts: Vec<String> = completions.iter().map(|c| c.text.clone()).collect();
    let strategy = match opts.arbitration {
        Arbitration::Deterministic => ResolveStrategy::Deterministic,
        Arbitration::Llm => ResolveStrategy::Llm {
            client,
            sampling: &opts.sampling,
            completions: &completion_texts,
        },
    };
    let tally = match resolve(tally, strategy) {
        Ok(t) => t,
        Err(e) => {
            let mut record = failed_record(instance, opts, format!("arbitration failed: {e}"));
            record.completions = completions;
            return record;
        }
    };

    let predicted = tally.selected;
    // Representative trace: the first candidate that voted for the
    // selected answer and carried a parseable trace.
    let trace = tally
        .candidates
        .iter()
        .filter(|c| c.answer == predicted)
        .find_map(|c| traces.get(c.completion_ref).and_then(|t| t.as_ref()));

    let ctx = GradingContext {
        gold: instance.gold_answer,
        kb: staged_kb.as_ref(),
        question: instance.question(),
    };
    let (answer_correct, trace_status) = grade(&ctx, Some(predicted), trace);

    EvalRecord {
        instance_id: instance.id.clone(),
        pipeline: opts.pipeline,
        rule_aug: opts.rule_aug.is_on(),
        gold: instance.gold_answer,
        predicted: Some(predicted),
        tally: Some(tally),
        trace_status,
        answer_correct,
        overall_correct: answer_correct && trace_status == TraceStatus::Correct,
        completions,
        failure: if errors.is_empty() { None } else { Some(errors.join("; ")) },
    }
}

/// Evaluate every instance; records come back in dataset order.
pub fn run_pipeline(
    dataset: &[ProblemInstance],
    client: &Client,
    opts: &RunOptions,
) -> Result<Vec<EvalRecord>, HarnessError> {
    if dataset.is_empty() {
        return Err(HarnessError::EmptyRun);
    }
    let workers = opts.concurrency.clamp(1, dataset.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<EvalRecord>>> = Mutex::new(vec![None; dataset.len()]);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= dataset.len() {
                    break;
                }
                let record = evaluate_instance(&dataset[index], client, opts);
                slots.lock().unwrap()[index] = Some(record);
            });
        }
    });

    Ok(slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every index visited"))
        .collect())
}

/// Answer / proof / overall accuracy over one run cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub an: usize,
    pub pn: usize,
    pub on: usize,
    /// Records whose trace could not be graded (no trace emitted, or
    /// math-proof instances).
    pub ungraded: usize,
    pub aa: f64,
    pub ap: f64,
    pub oa: f64,
}

pub fn format_percent(fraction: f64) -> String {
    format!("{:.2}%", fraction * 100.0)
}

/// Counts per the accuracy definitions: `AA = AN/N`, `AP = PN/N`,
/// `OA = ON/N`. Failed instances stay in `N` and join no numerator.
pub fn compute_metrics(records: &[EvalRecord]) -> Result<Metrics, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyRun);
    }
    let first = (&records[0].pipeline, records[0].rule_aug);
    if records.iter().any(|r| (&r.pipeline, r.rule_aug) != first) {
        return Err(HarnessError::MixedCell);
    }
    let n = records.len();
    let an = records.iter().filter(|r| r.answer_correct).count();
    let pn = records.iter().filter(|r| r.trace_status == TraceStatus::Correct).count();
    let on = records.iter().filter(|r| r.overall_correct).count();
    let ungraded = records.iter().filter(|r| r.trace_status == TraceStatus::Ungraded).count();
    Ok(Metrics {
        n,
        an,
        pn,
        on,
        ungraded,
        aa: an as f64 / n as f64,
        ap: pn as f64 / n as f64,
        oa: on as f64 / n as f64,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportCell {
    pub label: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    pub machine: serde_json::Value,
}

/// Side-by-side table of metric cells plus deltas of every cell
/// against the first one.
pub fn compare_runs(cells: &[ReportCell]) -> Result<Report, HarnessError> {
    if cells.len() < 2 {
        return Err(HarnessError::NeedTwoCells);
    }
    let mut text = String::new();
    text.push_str(&format!(
        "{:<16} {:>5} {:>9} {:>9} {:>9} {:>9}\n",
        "cell", "N", "AA", "AP", "OA", "ungraded"
    ));
    for cell in cells {
        let m = &cell.metrics;
        text.push_str(&format!(
            "{:<16} {:>5} {:>9} {:>9} {:>9} {:>9}\n",
            cell.label,
            m.n,
            format_percent(m.aa),
            format_percent(m.ap),
            format_percent(m.oa),
            m.ungraded
        ));
    }
    let base = &cells[0];
    let mut deltas = Vec::new();
    for cell in &cells[1..] {
        let delta = |a: f64, b: f64| format!("{:+.2}%", (a - b) * 100.0);
        text.push_str(&format!(
            "{:<16} {:>5} {:>9} {:>9} {:>9}\n",
            format!("Δ {} − {}", cell.label, base.label),
            "",
            delta(cell.metrics.aa, base.metrics.aa),
            delta(cell.metrics.ap, base.metrics.ap),
            delta(cell.metrics.oa, base.metrics.oa),
        ));
        deltas.push(serde_json::json!({
            "from": base.label,
            "to": cell.label,
            "aa": cell.metrics.aa - base.metrics.aa,
            "ap": cell.metrics.ap - base.metrics.ap,
            "oa": cell.metrics.oa - base.metrics.oa,
        }));
    }
    let machine = serde_json::json!({ "cells": cells, "deltas": deltas });
    Ok(Report { text, machine })
}

/// `run.json` header. The timestamp lives here and nowhere else, so
/// the other run files are byte-identical across reruns with the same
/// seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunHeader {
    pub created_at: String,
    pub label: String,
    pub config: serde_json::Value,
}

pub fn write_run(
    dir: impl AsRef<Path>,
    header: &RunHeader,
    records: &[EvalRecord],
    metrics: &Metrics,
) -> Result<(), HarnessError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;

    let run = serde_json::json!({
        "created_at": header.created_at,
        "label": header.label,
        "config": header.config,
        "metrics": metrics,
    });
    std::fs::write(dir.join("run.json"), format!("{:#}\n", run))?;

    let mut records_file = std::fs::File::create(dir.join("records.jsonl"))?;
    for record in records {
        writeln!(records_file, "{}", serde_json::to_string(record)?)?;
    }

    let report = format!(
        "{:<16} {:>5} {:>9} {:>9} {:>9} {:>9}\n{:<16} {:>5} {:>9} {:>9} {:>9} {:>9}\n",
        "cell",
        "N",
        "AA",
        "AP",
        "OA",
        "ungraded",
        header.label,
        metrics.n,
        format_percent(metrics.aa),
        format_percent(metrics.ap),
        format_percent(metrics.oa),
        metrics.ungraded,
    );
    std::fs::write(dir.join("report.txt"), report)?;
    Ok(())
}

#[derive(Debug)]
pub struct LoadedRun {
    pub header: RunHeader,
    pub metrics: Metrics,
    pub records: Vec<EvalRecord>,
}

pub fn load_run(dir: impl AsRef<Path>) -> Result<LoadedRun, HarnessError> {
    let dir = dir.as_ref();
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("run.json"))?)?;
    let header = RunHeader {
        created_at: run["created_at"].as_str().unwrap_or_default().to_string(),
        label: run["label"].as_str().unwrap_or_default().to_string(),
        config: run["config"].clone(),
    };
    let metrics: Metrics = serde_json::from_value(run["metrics"].clone())?;
    let mut records = Vec::new();
    for line in std::fs::read_to_string(dir.join("records.jsonl"))?.lines() {
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(line)?);
    }
    Ok(LoadedRun { header, metrics, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::MockConfig;
    use crate::dataset::parse_record;
    use crate::prompts::ExemplarLabel;

    fn record(answer_ok: bool, trace: TraceStatus) -> EvalRecord {
        EvalRecord {
            instance_id: "x".into(),
            pipeline: Pipeline::Ir,
            rule_aug: false,
            gold: Answer::True,
            predicted: Some(Answer::True),
            tally: None,
            trace_status: trace,
            answer_correct: answer_ok,
            overall_correct: answer_ok && trace == TraceStatus::Correct,
            completions: vec![],
            failure: None,
        }
    }

    #[test]
    fn metrics_reproduce_published_percentages() {
        // 70 correct answers of 150, 13 correct proofs of 150.
        let mut records = Vec::new();
        for i in 0..150 {
            records.push(record(i < 70, if i < 13 { TraceStatus::Correct } else { TraceStatus::Incorrect }));
        }
        let m = compute_metrics(&records).unwrap();
        assert_eq!(m.n, 150);
        assert_eq!(format_percent(m.aa), "46.67%");
        assert_eq!(format_percent(m.ap), "8.67%");
    }

    #[test]
    fn all_correct_yields_unit_metrics() {
        let records = vec![record(true, TraceStatus::Correct); 4];
        let m = compute_metrics(&records).unwrap();
        assert_eq!((m.aa, m.ap, m.oa), (1.0, 1.0, 1.0));
        assert!(m.on <= m.an.min(m.pn));
    }

    #[test]
    fn empty_and_mixed_cells_are_rejected() {
        assert!(matches!(compute_metrics(&[]), Err(HarnessError::EmptyRun)));
        let mut records = vec![record(true, TraceStatus::Correct)];
        let mut other = record(true, TraceStatus::Correct);
        other.pipeline = Pipeline::Dr;
        records.push(other);
        assert!(matches!(compute_metrics(&records), Err(HarnessError::MixedCell)));
    }

    #[test]
    fn grade_requires_both_axes_for_overall() {
        let instance = parse_record(
            r#"{"id":"g1","task":"factual","facts":["a is kind"],"rules":["If a is kind, b is kind"],"question":"b is kind","answer":"True"}"#,
            1,
        )
        .unwrap();
        let kb = instance.kb().unwrap();
        let (answer, trace) =
            crate::reasoner::direct_answer(&kb, instance.question().unwrap()).unwrap();
        assert_eq!(answer, Answer::True);
        let ctx = GradingContext {
            gold: instance.gold_answer,
            kb: Some(&kb),
            question: instance.question(),
        };
        assert_eq!(grade(&ctx, Some(answer), Some(&trace)), (true, TraceStatus::Correct));
        assert_eq!(grade(&ctx, Some(answer), None), (true, TraceStatus::Ungraded));
        assert_eq!(grade(&ctx, Some(Answer::False), Some(&trace)), (false, TraceStatus::Correct));
    }

    fn exemplars() -> Vec<Exemplar> {
        vec![
            Exemplar {
                id: "e1".into(),
                facts: vec!["The oven is not hot".into()],
                rules: vec!["If the stove is lit, the oven is hot".into()],
                question: "The stove is not lit".into(),
                worked_answer: "The negation of the original question is the stove is lit. \
                 Assuming the stove is lit is true, the oven is hot by r1. It contradicts the \
                 fact that the oven is not hot. Answer: True"
                    .into(),
                label: ExemplarLabel::ContradictionFound,
                direct_worked_answer: Some(
                    "Chaining forward from the facts reaches nothing further; the oven is not \
                     hot is a fact and nothing rules out the stove. Answer: Unknown"
                        .into(),
                ),
            },
            Exemplar {
                id: "e2".into(),
                facts: vec![],
                rules: vec!["If rex is hungry, rex barks".into()],
                question: "Rex barks".into(),
                worked_answer: "The negation of the original question is rex does not bark. \
                 Assuming rex does not bark is true, nothing follows, and assuming rex barks \
                 is true, nothing follows either. Answer: Unknown"
                    .into(),
                label: ExemplarLabel::NoContradiction,
                direct_worked_answer: Some(
                    "No rule fires from the given facts. Answer: Unknown".into(),
                ),
            },
        ]
    }

    fn options(pipeline: Pipeline) -> RunOptions {
        let mut sampling = SamplingConfig::gpt35_profile();
        sampling.seed = Some(17);
        RunOptions {
            pipeline,
            prompt_style: PromptStyle::FewShot,
            rule_aug: RuleAugMode::Off,
            sampling,
            arbitration: Arbitration::Llm,
            render: RenderOptions::default(),
            concurrency: 4,
            exemplars: exemplars(),
        }
    }

    fn tiny_dataset() -> Vec<ProblemInstance> {
        [
            r#"{"id":"t1","task":"factual","facts":["Bob does not drive to work"],"rules":["If the weather is fine, Bob drives to work"],"question":"The weather is not fine","answer":"True","depth":1}"#,
            r#"{"id":"t2","task":"factual","facts":["Anne is tired"],"rules":["If anne is tired, anne naps"],"question":"Anne naps","answer":"True","depth":1}"#,
            r#"{"id":"t3","task":"factual","facts":[],"rules":["If anne is tired, anne naps"],"question":"Anne is tired","answer":"Unknown"}"#,
        ]
        .iter()
        .enumerate()
        .map(|(i, line)| parse_record(line, i + 1).unwrap())
        .collect()
    }

    #[test]
    fn mock_ir_run_is_overall_correct_on_definite_instances() {
        let client = Client::mock(MockConfig::default());
        let records = run_pipeline(&tiny_dataset(), &client, &options(Pipeline::Ir)).unwrap();
        assert_eq!(records.len(), 3);
        assert!(records.iter().all(|r| r.failure.is_none()));
        assert!(records.iter().all(|r| r.overall_correct), "{records:#?}");
        let ids: Vec<_> = records.iter().map(|r| r.instance_id.as_str()).collect();
        assert_eq!(ids, ["t1", "t2", "t3"]);
    }

    #[test]
    fn dir_records_pool_both_sources() {
        let client = Client::mock(MockConfig::default());
        let records = run_pipeline(&tiny_dataset(), &client, &options(Pipeline::Dir)).unwrap();
        for record in &records {
            let tally = record.tally.as_ref().unwrap();
            assert!(tally.candidates.iter().any(|c| c.source == Source::Dr));
            assert!(tally.candidates.iter().any(|c| c.source == Source::Ir));
        }
    }

    #[test]
    fn runs_are_deterministic_for_a_fixed_seed() {
        let client = Client::mock(MockConfig::default());
        let a = run_pipeline(&tiny_dataset(), &client, &options(Pipeline::Dir)).unwrap();
        let b = run_pipeline(&tiny_dataset(), &client, &options(Pipeline::Dir)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flip_all_inverts_definite_answers() {
        let client =
            Client::mock(MockConfig { error_mode: crate::client::MockErrorMode::FlipAll });
        let records = run_pipeline(&tiny_dataset(), &client, &options(Pipeline::Ir)).unwrap();
        // t1 and t2 are definite and flipped; t3 stays Unknown.
        assert!(!records[0].answer_correct);
        assert!(!records[1].answer_correct);
        assert!(records[2].answer_correct);
    }

    #[test]
    fn symbolic_augmentation_changes_the_staged_prompt() {
        let client = Client::mock(MockConfig::default());
        let mut opts = options(Pipeline::Dr);
        // Needs the contrapositive: fact !drives, rule fine->drives, q !fine.
        let dataset = vec![tiny_dataset().remove(0)];
        let plain = run_pipeline(&dataset, &client, &opts).unwrap();
        assert_eq!(plain[0].predicted, Some(Answer::Unknown));
        assert!(!plain[0].answer_correct);
        opts.rule_aug = RuleAugMode::Symbolic;
        let augmented = run_pipeline(&dataset, &client, &opts).unwrap();
        assert_eq!(augmented[0].predicted, Some(Answer::True));
        assert!(augmented[0].overall_correct, "{augmented:#?}");
    }

    #[test]
    fn run_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let client = Client::mock(MockConfig::default());
        let records = run_pipeline(&tiny_dataset(), &client, &options(Pipeline::Ir)).unwrap();
        let metrics = compute_metrics(&records).unwrap();
        let header = RunHeader {
            created_at: "2026-01-01T00:00:00Z".into(),
            label: "ir".into(),
            config: serde_json::json!({"pipeline": "ir"}),
        };
        write_run(dir.path(), &header, &records, &metrics).unwrap();
        let loaded = load_run(dir.path()).unwrap();
        assert_eq!(loaded.records, records);
        assert_eq!(loaded.metrics, metrics);
        assert_eq!(loaded.header.label, "ir");
    }

    #[test]
    fn comparison_needs_two_cells_and_shows_deltas() {
        let m = Metrics { n: 2, an: 1, pn: 1, on: 1, ungraded: 0, aa: 0.5, ap: 0.5, oa: 0.5 };
        let cell = |label: &str, oa: f64| ReportCell {
            label: label.into(),
            metrics: Metrics { oa, ..m },
        };
        assert!(matches!(
            compare_runs(&[cell("dr", 0.5)]),
            Err(HarnessError::NeedTwoCells)
        ));
        let report = compare_runs(&[cell("dr", 0.5), cell("ir", 1.0)]).unwrap();
        assert!(report.text.contains("+50.00%"), "{}", report.text);
        assert_eq!(report.machine["cells"].as_array().unwrap().len(), 2);
    }
}
