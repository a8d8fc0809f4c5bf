//! Batch command-line surface for the reasoning pipelines.
//!
//! Subcommands:
//! - `augment`  — rewrite a dataset with contrapositive-extended rules
//! - `solve`    — pure-symbolic sweep: both reasoners against the
//!   truth-table oracle, agreement matrix, soundness violations
//! - `run`      — evaluate a pipeline over a dataset and write a run
//!   directory with records, metrics, and a report
//! - `report`   — compare metrics across run directories

mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use config::RunConfig;
use dir_core::client::{Client, HttpConfig, MockConfig};
use dir_core::dataset::{load_dataset, write_dataset, TaskKind};
use dir_core::harness::{
    compare_runs, compute_metrics, format_percent, load_run, run_pipeline, stage_rules,
    ReportCell, RuleAugMode, RunHeader, RunOptions, TraceStatus,
};
use dir_core::logic::augment;
use dir_core::prompts::{load_exemplars, Exemplar, RenderOptions};
use dir_core::reasoner::{
    direct_answer, indirect_answer, model_check, Answer, Entailment, KnowledgeBase,
};

#[derive(Parser)]
#[command(name = "dir-cli", version, about = "Direct/indirect reasoning pipelines over rulebases")]
struct Cli {
    /// Flat TOML config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for all run randomness (mock backend sampling).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for run artifacts.
    #[arg(long, global = true)]
    output: Option<String>,

    /// Completion backend.
    #[arg(long, global = true, value_parser = ["http", "mock"])]
    backend: Option<String>,

    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a copy of a dataset with rules replaced by their
    /// augmentation (rules plus contrapositives).
    Augment {
        dataset: PathBuf,
        /// `symbolic` derives contrapositives in-process; `llm` asks
        /// the configured backend and parses them back.
        #[arg(long, default_value = "symbolic", value_parser = ["symbolic", "llm"])]
        mode: String,
        /// Output file; defaults to `<dataset>.aug.jsonl`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the symbolic reasoners and the truth-table oracle over a
    /// dataset and report their agreement. Exits nonzero on any
    /// soundness violation.
    Solve { dataset: PathBuf },
    /// Evaluate a pipeline over a dataset and write a run directory.
    Run {
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long, value_parser = ["dr", "ir", "dir"])]
        pipeline: Option<String>,
        #[arg(long, value_parser = ["zero-shot", "few-shot"])]
        prompt_style: Option<String>,
        #[arg(long, value_parser = ["off", "symbolic", "llm"])]
        rule_aug: Option<String>,
        /// Samples per reasoning path (M).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        exemplar_pool: Option<String>,
        /// Comma-separated exemplar ids; empty means the whole pool.
        #[arg(long)]
        exemplar_ids: Option<String>,
        #[arg(long, value_parser = ["llm", "deterministic"])]
        arbitration: Option<String>,
        /// Mock error injection: none|flip-all|flip-prob:<p>|flip-depth:<d>|garbage:<p>.
        #[arg(long)]
        mock_errors: Option<String>,
        #[arg(long)]
        concurrency: Option<usize>,
    },
    /// Compare metrics across run directories.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Emit the machine-readable comparison instead of the table.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    match run_cli() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run_cli() -> Result<ExitCode> {
    let cli = Cli::parse();

    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(output) = &cli.output {
        cfg.output = output.clone();
    }
    if let Some(backend) = &cli.backend {
        cfg.backend = backend.clone();
    }

    match cli.command {
        Command::Augment { dataset, mode, out } => {
            if cli.print_config {
                print!("{}", cfg.to_toml());
                return Ok(ExitCode::SUCCESS);
            }
            cmd_augment(&cfg, &dataset, &mode, out)
        }
        Command::Solve { dataset } => cmd_solve(&dataset),
        Command::Run {
            dataset,
            pipeline,
            prompt_style,
            rule_aug,
            samples,
            label,
            exemplar_pool,
            exemplar_ids,
            arbitration,
            mock_errors,
            concurrency,
        } => {
            macro_rules! merge {
                ($($field:ident),*) => {
                    $(if let Some(value) = $field { cfg.$field = value; })*
                };
            }
            merge!(dataset, pipeline, prompt_style, rule_aug, samples, label);
            merge!(exemplar_pool, exemplar_ids, arbitration, mock_errors, concurrency);
            if cli.print_config {
                print!("{}", cfg.to_toml());
                return Ok(ExitCode::SUCCESS);
            }
            cmd_run(&cfg)
        }
        Command::Report { runs, json } => cmd_report(&runs, json),
    }
}

fn build_client(cfg: &RunConfig) -> Result<Client> {
    match cfg.backend.as_str() {
        "mock" => Ok(Client::mock(MockConfig { error_mode: cfg.mock_error_mode()? })),
        "http" => {
            let http = HttpConfig::from_env()?;
            Ok(Client::http_with_budget(http, cfg.concurrency)?)
        }
        other => bail!("unknown backend `{other}` (expected http|mock)"),
    }
}

fn cmd_augment(
    cfg: &RunConfig,
    dataset_path: &PathBuf,
    mode: &str,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let mode: RuleAugMode = mode.parse().map_err(anyhow::Error::msg)?;
    let instances = load_dataset(dataset_path)
        .with_context(|| format!("loading {}", dataset_path.display()))?;
    let client = build_client(cfg)?;
    let sampling = cfg.sampling()?;

    let mut augmented = Vec::with_capacity(instances.len());
    let mut added_total = 0usize;
    for instance in &instances {
        if instance.task != TaskKind::Factual {
            augmented.push(instance.clone());
            continue;
        }
        let staged = stage_rules(instance, mode, &client, &sampling)
            .map_err(|e| anyhow::anyhow!("{}: {e}", instance.id))?;
        let originals = instance.factual.as_ref().map(|b| b.rules.len()).unwrap_or(0);
        let added = staged.rules.len() - originals;
        added_total += added;
        for rule in staged.rules.iter().skip(originals) {
            let source = match rule.provenance() {
                dir_core::logic::Provenance::Contrapositive { of: Some(id) } => id.to_string(),
                _ => "unattributed".to_string(),
            };
            println!("{}: {} (contrapositive of {source})", instance.id, rule);
        }
        let mut copy = instance.clone();
        if let Some(body) = copy.factual.as_mut() {
            body.rules = staged.rules;
        }
        copy.raw.rules = staged.text;
        augmented.push(copy);
    }

    let out = out.unwrap_or_else(|| {
        let mut path = dataset_path.clone();
        path.set_extension("aug.jsonl");
        path
    });
    write_dataset(&out, &augmented)?;
    println!(
        "augmented {} instances (+{added_total} rules) -> {}",
        augmented.len(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

/// Agreement bucket of a reasoner verdict against the oracle.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Agreement {
    AgreeDefinite,
    AgreeUnknown,
    /// Reasoner abstained where the oracle is definite.
    Gap,
    /// Definite disagreement: a soundness violation.
    Conflict,
}

fn classify(reasoner: Answer, oracle: Entailment) -> Option<Agreement> {
    let oracle = oracle.as_answer()?;
    Some(match (reasoner, oracle) {
        (Answer::Unknown, Answer::Unknown) => Agreement::AgreeUnknown,
        (r, o) if r == o => Agreement::AgreeDefinite,
        (Answer::Unknown, _) => Agreement::Gap,
        // Oracle Unknown with a definite reasoner is unsound too.
        _ => Agreement::Conflict,
    })
}

fn cmd_solve(dataset_path: &PathBuf) -> Result<ExitCode> {
    let instances = load_dataset(dataset_path)
        .with_context(|| format!("loading {}", dataset_path.display()))?;

    let mut counts: BTreeMap<&'static str, BTreeMap<u8, usize>> = BTreeMap::new();
    let mut bump = |row: &'static str, agreement: Agreement| {
        *counts.entry(row).or_default().entry(agreement as u8).or_insert(0) += 1;
    };
    let mut skipped_math = 0usize;
    let mut skipped_vacuous = 0usize;
    let mut violations = 0usize;
    let mut factual = 0usize;

    for instance in &instances {
        if instance.task != TaskKind::Factual {
            skipped_math += 1;
            continue;
        }
        factual += 1;
        let kb = instance.kb().map_err(|e| anyhow::anyhow!("{}: {e}", instance.id))?;
        let question = instance.question().expect("factual instance").clone();
        let augmented = kb.with_rules(augment(kb.rules()));

        let rows: [(&'static str, &KnowledgeBase); 4] = [
            ("direct", &kb),
            ("direct+aug", &augmented),
            ("indirect", &kb),
            ("indirect+aug", &augmented),
        ];
        for (row, base) in rows {
            let answer = if row.starts_with("direct") {
                direct_answer(base, &question)
            } else {
                indirect_answer(base, &question)
            };
            let answer = match answer {
                Ok((a, _)) => a,
                Err(e) => bail!("{}: {row}: {e}", instance.id),
            };
            let oracle = model_check(base, &question)
                .map_err(|e| anyhow::anyhow!("{}: {e}", instance.id))?;
            match classify(answer, oracle) {
                Some(agreement) => {
                    if agreement == Agreement::Conflict {
                        violations += 1;
                        eprintln!(
                            "CONFLICT {} [{row}]: reasoner={answer} oracle={oracle:?}",
                            instance.id
                        );
                    }
                    bump(row, agreement);
                }
                None => skipped_vacuous += 1,
            }
        }
    }

    println!("instances: {} factual, {skipped_math} math-proof skipped", factual);
    if skipped_vacuous > 0 {
        println!("vacuous (unsatisfiable) checks skipped: {skipped_vacuous}");
    }
    println!(
        "{:<14} {:>15} {:>14} {:>6} {:>10}",
        "reasoner", "agree-definite", "agree-unknown", "gap", "conflicts"
    );
    for row in ["direct", "direct+aug", "indirect", "indirect+aug"] {
        let get = |a: Agreement| {
            counts.get(row).and_then(|m| m.get(&(a as u8))).copied().unwrap_or(0)
        };
        println!(
            "{:<14} {:>15} {:>14} {:>6} {:>10}",
            row,
            get(Agreement::AgreeDefinite),
            get(Agreement::AgreeUnknown),
            get(Agreement::Gap),
            get(Agreement::Conflict),
        );
    }
    println!("soundness violations: {violations}");
    Ok(if violations == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn select_exemplars(cfg: &RunConfig) -> Result<Vec<Exemplar>> {
    if cfg.exemplar_pool.is_empty() {
        return Ok(Vec::new());
    }
    let pool = load_exemplars(&cfg.exemplar_pool)
        .with_context(|| format!("loading exemplar pool {}", cfg.exemplar_pool))?;
    let ids = cfg.exemplar_id_list();
    if ids.is_empty() {
        return Ok(pool);
    }
    ids.iter()
        .map(|id| {
            pool.iter()
                .find(|e| &e.id == id)
                .cloned()
                .ok_or_else(|| anyhow::anyhow!("exemplar `{id}` not found in {}", cfg.exemplar_pool))
        })
        .collect()
}

fn cmd_run(cfg: &RunConfig) -> Result<ExitCode> {
    if cfg.dataset.is_empty() {
        bail!("no dataset configured (set `dataset` in the config or pass --dataset)");
    }
    cfg.validate_exemplar_pool()?;
    let instances = load_dataset(&cfg.dataset).with_context(|| format!("loading {}", cfg.dataset))?;
    let exemplars = select_exemplars(cfg)?;
    let client = build_client(cfg)?;

    let options = RunOptions {
        pipeline: cfg.pipeline()?,
        prompt_style: cfg.prompt_style()?,
        rule_aug: cfg.rule_aug()?,
        sampling: cfg.sampling()?,
        arbitration: cfg.arbitration()?,
        render: RenderOptions { request_trace: cfg.trace_block },
        concurrency: cfg.concurrency,
        exemplars,
    };

    let records = run_pipeline(&instances, &client, &options)?;
    for record in &records {
        let predicted =
            record.predicted.map(|a| a.to_string()).unwrap_or_else(|| "failed".into());
        let trace = match record.trace_status {
            TraceStatus::Correct => "correct",
            TraceStatus::Incorrect => "incorrect",
            TraceStatus::Ungraded => "ungraded",
        };
        eprintln!(
            "[{}] predicted={predicted} gold={} answer={} trace={trace}{}",
            record.instance_id,
            record.gold,
            if record.answer_correct { "ok" } else { "wrong" },
            record.failure.as_deref().map(|f| format!(" ({f})")).unwrap_or_default(),
        );
    }

    let metrics = compute_metrics(&records)?;
    let label = cfg.effective_label();
    let timestamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let run_dir = unique_dir(&cfg.output_dir(), &format!("{timestamp}-{label}"));
    let header = RunHeader {
        created_at: timestamp,
        label: label.clone(),
        config: serde_json::to_value(cfg)?,
    };
    dir_core::harness::write_run(&run_dir, &header, &records, &metrics)?;

    println!(
        "{:<12} {:>5} {:>9} {:>9} {:>9} {:>9}",
        "cell", "N", "AA", "AP", "OA", "ungraded"
    );
    println!(
        "{:<12} {:>5} {:>9} {:>9} {:>9} {:>9}",
        label,
        metrics.n,
        format_percent(metrics.aa),
        format_percent(metrics.ap),
        format_percent(metrics.oa),
        metrics.ungraded
    );
    println!("run dir: {}", run_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn unique_dir(base: &std::path::Path, name: &str) -> PathBuf {
    let candidate = base.join(name);
    if !candidate.exists() {
        return candidate;
    }
    for i in 2.. {
        let candidate = base.join(format!("{name}-{i}"));
        if !candidate.exists() {
            return candidate;
        }
    }
    unreachable!()
}

fn cmd_report(runs: &[PathBuf], json: bool) -> Result<ExitCode> {
    let mut cells = Vec::new();
    for dir in runs {
        let run = load_run(dir).with_context(|| format!("loading run {}", dir.display()))?;
        cells.push(ReportCell { label: run.header.label, metrics: run.metrics });
    }
    let report = compare_runs(&cells)?;
    if json {
        println!("{:#}", report.machine);
    } else {
        print!("{}", report.text);
    }
    Ok(ExitCode::SUCCESS)
}
