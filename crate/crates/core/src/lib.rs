//! Direct and indirect propositional reasoning over small rulebases.
//!
//! The crate is organized around a pipeline: parse a rulebase, optionally
//! augment its rules with contrapositives, answer questions either by
//! forward chaining (direct) or by proof by contradiction (indirect),
//! prompt an LLM to do the same, and grade the results against a
//! brute-force truth-table oracle.
//!
//! Modules:
//! - [`logic`] — literals, rules, contrapositive augmentation
//! - [`reasoner`] — forward chaining, contradiction search, model checking,
//!   trace validation
//! - [`parse`] — the controlled rule language (compact and English forms)
//! - [`dataset`] — problem instances and line-delimited dataset files
//! - [`prompts`] — prompt templates and completion parsing
//! - [`client`] — chat-completion backends (HTTP and offline mock)
//! - [`vote`] — ballot pooling, majority vote, conflict escalation
//! - [`harness`] — pipeline runner, metrics, run files, reports
//! - [`enumerate`] — deterministic small-knowledge-base families for
//!   oracle sweeps

pub mod client;
pub mod dataset;
pub mod enumerate;
pub mod harness;
pub mod logic;
pub mod parse;
pub mod prompts;
pub mod reasoner;
pub mod vote;

pub use logic::{
    augment, contrapositives, Atom, Literal, Polarity, Provenance, Rule, RuleId, RuleSet,
};
pub use reasoner::{Answer, KnowledgeBase, ProofTrace};

