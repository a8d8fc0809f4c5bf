//! Run configuration: defaults, a flat TOML config file, command-line
//! overrides, and environment variables for secrets.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use dir_core::client::{MockErrorMode, SamplingConfig};
use dir_core::harness::{Arbitration, Pipeline, PromptStyle, RuleAugMode};

/// The flat key-value config document. Every field has a default so a
/// config file may set any subset; command-line flags override the
/// file. Secrets (`IR_ENDPOINT`, `IR_API_KEY`) come from the
/// environment only.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: String,
    pub pipeline: String,
    pub prompt_style: String,
    pub rule_aug: String,
    /// M: samples per reasoning path.
    pub samples: usize,
    /// `gpt35` or `gemini`; pins model name and temperature defaults.
    pub profile: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub backend: String,
    pub seed: u64,
    pub output: String,
    pub label: String,
    pub exemplar_pool: String,
    /// Comma-separated exemplar ids; empty means the whole pool.
    pub exemplar_ids: String,
    pub arbitration: String,
    pub trace_block: bool,
    pub mock_errors: String,
    pub concurrency: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: String::new(),
            pipeline: "ir".into(),
            prompt_style: "few-shot".into(),
            rule_aug: "off".into(),
            samples: 1,
            profile: "gpt35".into(),
            model: String::new(),
            temperature: -1.0,
            max_tokens: 1024,
            backend: "mock".into(),
            seed: 42,
            output: "runs".into(),
            label: String::new(),
            exemplar_pool: String::new(),
            exemplar_ids: String::new(),
            arbitration: "llm".into(),
            trace_block: true,
            mock_errors: "none".into(),
            concurrency: 4,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn pipeline(&self) -> Result<Pipeline> {
        Pipeline::from_str(&self.pipeline).map_err(anyhow::Error::msg)
    }

    pub fn prompt_style(&self) -> Result<PromptStyle> {
        PromptStyle::from_str(&self.prompt_style).map_err(anyhow::Error::msg)
    }

    pub fn rule_aug(&self) -> Result<RuleAugMode> {
        RuleAugMode::from_str(&self.rule_aug).map_err(anyhow::Error::msg)
    }

    pub fn arbitration(&self) -> Result<Arbitration> {
        Arbitration::from_str(&self.arbitration).map_err(anyhow::Error::msg)
    }

    /// Decoder settings: profile defaults, then explicit overrides.
    pub fn sampling(&self) -> Result<SamplingConfig> {
        let mut sampling = match self.profile.as_str() {
            "gpt35" | "gpt-3.5" => SamplingConfig::gpt35_profile(),
            "gemini" => SamplingConfig::gemini_profile(),
            other => bail!("unknown profile `{other}` (expected gpt35|gemini)"),
        };
        if !self.model.is_empty() {
            sampling.model = self.model.clone();
        }
        if self.temperature >= 0.0 {
            sampling.temperature = self.temperature;
        }
        sampling.max_tokens = self.max_tokens;
        sampling.num_samples = self.samples;
        sampling.seed = Some(self.seed);
        Ok(sampling)
    }

    pub fn mock_error_mode(&self) -> Result<MockErrorMode> {
        parse_mock_errors(&self.mock_errors)
    }

    /// The invariant on prompt styles: few-shot needs an exemplar
    /// pool, zero-shot forbids one.
    pub fn validate_exemplar_pool(&self) -> Result<()> {
        match self.prompt_style()? {
            PromptStyle::FewShot if self.exemplar_pool.is_empty() => {
                bail!("prompt_style=few-shot requires exemplar_pool")
            }
            PromptStyle::ZeroShot if !self.exemplar_pool.is_empty() => {
                bail!("prompt_style=zero-shot forbids exemplar_pool")
            }
            _ => Ok(()),
        }
    }

    pub fn effective_label(&self) -> String {
        if !self.label.is_empty() {
            return self.label.clone();
        }
        let mut label = self.pipeline.clone();
        if self.rule_aug != "off" {
            label.push_str("+aug");
        }
        label
    }

    pub fn exemplar_id_list(&self) -> Vec<String> {
        self.exemplar_ids
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(&self.output)
    }
}

/// `none`, `flip-all`, `flip-prob:<p>`, `flip-depth:<d>`, `garbage:<p>`.
pub fn parse_mock_errors(text: &str) -> Result<MockErrorMode> {
    let text = text.trim();
    if text.is_empty() || text == "none" {
        return Ok(MockErrorMode::None);
    }
    if text == "flip-all" {
        return Ok(MockErrorMode::FlipAll);
    }
    if let Some(p) = text.strip_prefix("flip-prob:") {
        return Ok(MockErrorMode::FlipProbability(p.parse().context("flip-prob value")?));
    }
    if let Some(d) = text.strip_prefix("flip-depth:") {
        return Ok(MockErrorMode::FlipByDepth { threshold: d.parse().context("flip-depth value")? });
    }
    if let Some(p) = text.strip_prefix("garbage:") {
        return Ok(MockErrorMode::Garbage(p.parse().context("garbage value")?));
    }
    bail!("unknown mock_errors `{text}` (expected none|flip-all|flip-prob:<p>|flip-depth:<d>|garbage:<p>)")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml();
        let again: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(again.pipeline, "ir");
        assert_eq!(again.seed, 42);
    }

    #[test]
    fn profile_sets_temperature_unless_overridden() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.sampling().unwrap().temperature, 0.7);
        cfg.profile = "gemini".into();
        assert_eq!(cfg.sampling().unwrap().temperature, 0.9);
        cfg.temperature = 0.2;
        assert_eq!(cfg.sampling().unwrap().temperature, 0.2);
    }

    #[test]
    fn exemplar_pool_invariant() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate_exemplar_pool().is_err());
        cfg.exemplar_pool = "data/exemplars.jsonl".into();
        assert!(cfg.validate_exemplar_pool().is_ok());
        cfg.prompt_style = "zero-shot".into();
        assert!(cfg.validate_exemplar_pool().is_err());
        cfg.exemplar_pool.clear();
        assert!(cfg.validate_exemplar_pool().is_ok());
    }

    #[test]
    fn mock_error_modes_parse() {
        assert_eq!(parse_mock_errors("none").unwrap(), MockErrorMode::None);
        assert_eq!(parse_mock_errors("flip-all").unwrap(), MockErrorMode::FlipAll);
        assert_eq!(
            parse_mock_errors("flip-depth:3").unwrap(),
            MockErrorMode::FlipByDepth { threshold: 3 }
        );
        assert!(matches!(
            parse_mock_errors("flip-prob:0.25").unwrap(),
            MockErrorMode::FlipProbability(p) if (p - 0.25).abs() < 1e-12
        ));
        assert!(parse_mock_errors("garble").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<RunConfig>("pipelin = \"ir\"");
        assert!(err.is_err());
    }
}
