//! Chat-completion backends.
//!
//! [`Client`] exposes one operation, [`Client::complete`], over either
//! a chat-completions-compatible HTTP endpoint or the offline
//! [`mock`] backend. Transient HTTP failures (timeouts, 429, 5xx) are
//! retried with exponential backoff up to a configured cap; auth and
//! other 4xx failures surface immediately. A counting limiter keeps at
//! most `max_in_flight` requests outstanding at a time.

pub mod mock;

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::prompts::PromptText;

pub use mock::{MockBackend, MockConfig, MockErrorMode};

/// Env var naming the chat-completions endpoint URL.
pub const ENDPOINT_VAR: &str = "IR_ENDPOINT";
/// Env var holding the bearer token for that endpoint.
pub const API_KEY_VAR: &str = "IR_API_KEY";

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("invalid sampling config: {0}")]
    InvalidConfig(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited; gave up after {retries} retries")]
    RateLimitExhausted { retries: u32 },
    #[error("transport error after {retries} retries: {message}")]
    Transport { message: String, retries: u32 },
    #[error("provider error (status {status}): {body}")]
    Provider { status: u16, body: String },
    #[error("sampled {} of {want} completions", completions.len())]
    SampleShortfall { completions: Vec<Completion>, want: usize },
}

/// Decoder settings for one request batch. The profile constructors
/// pin the defaults the evaluation uses: temperature 0.7 for the
/// GPT-3.5-class profile and 0.9 for the Gemini-class one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub model: String,
    pub temperature: f64,
    /// `M`: how many independent samples `sample_n` draws.
    pub num_samples: usize,
    pub max_tokens: u32,
    /// Mock backend only; ignored by HTTP.
    pub seed: Option<u64>,
}

impl SamplingConfig {
    pub fn gpt35_profile() -> SamplingConfig {
        SamplingConfig {
            model: "gpt-3.5-turbo".into(),
            temperature: 0.7,
            num_samples: 1,
            max_tokens: 1024,
            seed: None,
        }
    }

    pub fn gemini_profile() -> SamplingConfig {
        SamplingConfig { model: "gemini-pro".into(), temperature: 0.9, ..Self::gpt35_profile() }
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        if self.num_samples == 0 {
            return Err(ClientError::InvalidConfig("num_samples must be at least 1".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ClientError::InvalidConfig(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(ClientError::InvalidConfig("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackendKind {
    Http,
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u32,
    pub completion_tokens: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub backend: BackendKind,
    pub latency: Duration,
    pub usage: Option<TokenUsage>,
    /// Transient-failure retries spent obtaining this completion.
    pub retries: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 4,
            base_delay: Duration::from_millis(250),
            max_delay: Duration::from_secs(4),
        }
    }
}

impl RetryPolicy {
    fn delay(&self, attempt: u32) -> Duration {
        let exp = self.base_delay.saturating_mul(1u32 << attempt.min(16));
        exp.min(self.max_delay)
    }
}

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub endpoint: String,
    pub api_key: String,
    pub retry: RetryPolicy,
    pub timeout: Duration,
}

impl HttpConfig {
    /// Read `IR_ENDPOINT` / `IR_API_KEY` from the environment.
    pub fn from_env() -> Result<HttpConfig, ClientError> {
        let endpoint = std::env::var(ENDPOINT_VAR)
            .map_err(|_| ClientError::Auth(format!("{ENDPOINT_VAR} is not set")))?;
        let api_key = std::env::var(API_KEY_VAR)
            .map_err(|_| ClientError::Auth(format!("{API_KEY_VAR} is not set")))?;
        Ok(HttpConfig {
            endpoint,
            api_key,
            retry: RetryPolicy::default(),
            timeout: Duration::from_secs(60),
        })
    }
}

/// Counting limiter for in-flight requests.
struct Limiter {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Limiter {
    fn new(permits: usize) -> Limiter {
        Limiter { permits: Mutex::new(permits.max(1)), available: Condvar::new() }
    }

    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.available.wait(permits).unwrap();
        }
        *permits -= 1;
        drop(permits);
        let out = f();
        *self.permits.lock().unwrap() += 1;
        self.available.notify_one();
        out
    }
}

enum Backend {
    Http { cfg: HttpConfig, http: reqwest::blocking::Client },
    Mock(MockBackend),
}

/// A completion client; shareable across threads.
pub struct Client {
    backend: Backend,
    limiter: Limiter,
}

pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

impl Client {
    pub fn http(cfg: HttpConfig) -> Result<Client, ClientError> {
        Client::http_with_budget(cfg, DEFAULT_MAX_IN_FLIGHT)
    }

    pub fn http_with_budget(cfg: HttpConfig, max_in_flight: usize) -> Result<Client, ClientError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| ClientError::Transport { message: e.to_string(), retries: 0 })?;
        Ok(Client { backend: Backend::Http { cfg, http }, limiter: Limiter::new(max_in_flight) })
    }

    pub fn mock(cfg: MockConfig) -> Client {
        Client {
            backend: Backend::Mock(MockBackend::new(cfg)),
            limiter: Limiter::new(DEFAULT_MAX_IN_FLIGHT),
        }
    }

    pub fn backend_kind(&self) -> BackendKind {
        match self.backend {
            Backend::Http { .. } => BackendKind::Http,
            Backend::Mock(_) => BackendKind::Mock,
        }
    }

    /// One completion for the prompt.
    pub fn complete(
        &self,
        prompt: &PromptText,
        cfg: &SamplingConfig,
    ) -> Result<Completion, ClientError> {
        self.complete_indexed(prompt, cfg, 0)
    }

    /// `M = cfg.num_samples` independent completions. On partial
    /// failure the successes are carried inside the error.
    pub fn sample_n(
        &self,
        prompt: &PromptText,
        cfg: &SamplingConfig,
    ) -> Result<Vec<Completion>, ClientError> {
        cfg.validate()?;
        let want = cfg.num_samples;
        let mut completions = Vec::with_capacity(want);
        for index in 0..want {
            match self.complete_indexed(prompt, cfg, index) {
                Ok(c) => completions.push(c),
                // Credentials will not fix themselves mid-batch.
                Err(e @ ClientError::Auth(_)) => return Err(e),
                Err(_) => {}
            }
        }
        if completions.len() == want {
            Ok(completions)
        } else {
            Err(ClientError::SampleShortfall { completions, want })
        }
    }

    fn complete_indexed(
        &self,
        prompt: &PromptText,
        cfg: &SamplingConfig,
        sample_index: usize,
    ) -> Result<Completion, ClientError> {
        cfg.validate()?;
        let started = Instant::now();
        match &self.backend {
            Backend::Mock(mock) => {
                let text = self.limiter.run(|| mock.respond(prompt, cfg, sample_index));
                Ok(Completion {
                    text,
                    backend: BackendKind::Mock,
                    latency: started.elapsed(),
                    usage: None,
                    retries: 0,
                })
            }
            Backend::Http { cfg: http_cfg, http } => {
                self.limiter.run(|| http_complete(http, http_cfg, prompt, cfg, started))
            }
        }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<ChatUsage>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

#[derive(Deserialize)]
struct ChatUsage {
    #[serde(default)]
    prompt_tokens: u32,
    #[serde(default)]
    completion_tokens: u32,
}

fn http_complete(
    http: &reqwest::blocking::Client,
    http_cfg: &HttpConfig,
    prompt: &PromptText,
    cfg: &SamplingConfig,
    started: Instant,
) -> Result<Completion, ClientError> {
    let body = json!({
        "model": cfg.model,
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
        "messages": [{"role": "user", "content": prompt.body}],
    });

    let mut retries = 0u32;
    loop {
        let attempt = http
            .post(&http_cfg.endpoint)
            .bearer_auth(&http_cfg.api_key)
            .json(&body)
            .send();

        match attempt {
            Ok(response) => {
                let status = response.status();
                if status.is_success() {
                    let parsed: ChatResponse = response.json().map_err(|e| {
                        ClientError::Provider { status: status.as_u16(), body: e.to_string() }
                    })?;
                    let choice = parsed.choices.into_iter().next().ok_or_else(|| {
                        ClientError::Provider {
                            status: status.as_u16(),
                            body: "response carried no choices".into(),
                        }
                    })?;
                    return Ok(Completion {
                        text: choice.message.content,
                        backend: BackendKind::Http,
                        latency: started.elapsed(),
                        usage: parsed.usage.map(|u| TokenUsage {
                            prompt_tokens: u.prompt_tokens,
                            completion_tokens: u.completion_tokens,
                        }),
                        retries,
                    });
                }
                let code = status.as_u16();
                let text = response.text().unwrap_or_default();
                if code == 401 || code == 403 {
                    return Err(ClientError::Auth(text));
                }
                if code == 429 {
                    if retries >= http_cfg.retry.max_retries {
                        return Err(ClientError::RateLimitExhausted { retries });
                    }
                } else if status.is_server_error() {
                    if retries >= http_cfg.retry.max_retries {
                        return Err(ClientError::Provider { status: code, body: text });
                    }
                } else {
                    return Err(ClientError::Provider { status: code, body: text });
                }
            }
            Err(e) => {
                if retries >= http_cfg.retry.max_retries {
                    return Err(ClientError::Transport { message: e.to_string(), retries });
                }
            }
        }

        std::thread::sleep(http_cfg.retry.delay(retries));
        retries += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompts::PromptKind;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    fn prompt() -> PromptText {
        PromptText {
            body: "# Question: a(x)\n# Answer:".into(),
            kind: PromptKind::ZeroShotDr,
            exemplar_ids: vec![],
        }
    }

    fn fast_retry() -> RetryPolicy {
        RetryPolicy {
            max_retries: 4,
            base_delay: Duration::from_millis(2),
            max_delay: Duration::from_millis(10),
        }
    }

    /// Tiny canned-response HTTP server; one response per accepted
    /// connection, then closes.
    fn serve(responses: Vec<String>) -> (String, std::thread::JoinHandle<usize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let mut served = 0;
            for response in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut buf = [0u8; 65536];
                let _ = stream.read(&mut buf).unwrap();
                stream.write_all(response.as_bytes()).unwrap();
                served += 1;
            }
            served
        });
        (format!("http://{addr}/v1/chat/completions"), handle)
    }

    fn http_response(status: &str, body: &str) -> String {
        format!(
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
    }

    fn ok_body(content: &str) -> String {
        serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": content}}],
            "usage": {"prompt_tokens": 10, "completion_tokens": 3}
        })
        .to_string()
    }

    fn http_client(endpoint: String) -> Client {
        Client::http(HttpConfig {
            endpoint,
            api_key: "k".into(),
            retry: fast_retry(),
            timeout: Duration::from_secs(5),
        })
        .unwrap()
    }

    #[test]
    fn config_validation() {
        let mut cfg = SamplingConfig::gpt35_profile();
        assert!(cfg.validate().is_ok());
        cfg.temperature = 2.5;
        assert!(cfg.validate().is_err());
        cfg.temperature = 0.7;
        cfg.num_samples = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn profiles_pin_temperatures() {
        assert_eq!(SamplingConfig::gpt35_profile().temperature, 0.7);
        assert_eq!(SamplingConfig::gemini_profile().temperature, 0.9);
    }

    #[test]
    fn http_success_parses_content_and_usage() {
        let (endpoint, server) = serve(vec![http_response("200 OK", &ok_body("Answer: True"))]);
        let client = http_client(endpoint);
        let c = client.complete(&prompt(), &SamplingConfig::gpt35_profile()).unwrap();
        assert_eq!(c.text, "Answer: True");
        assert_eq!(c.retries, 0);
        assert_eq!(c.usage.unwrap().completion_tokens, 3);
        assert_eq!(server.join().unwrap(), 1);
    }

    #[test]
    fn rate_limit_retries_then_succeeds() {
        let (endpoint, server) = serve(vec![
            http_response("429 Too Many Requests", "{}"),
            http_response("429 Too Many Requests", "{}"),
            http_response("429 Too Many Requests", "{}"),
            http_response("200 OK", &ok_body("Answer: False")),
        ]);
        let client = http_client(endpoint);
        let c = client.complete(&prompt(), &SamplingConfig::gpt35_profile()).unwrap();
        assert_eq!(c.retries, 3);
        assert_eq!(c.text, "Answer: False");
        assert_eq!(server.join().unwrap(), 4);
    }

    #[test]
    fn auth_failure_does_not_retry() {
        let (endpoint, server) = serve(vec![http_response("401 Unauthorized", "bad key")]);
        let client = http_client(endpoint);
        match client.complete(&prompt(), &SamplingConfig::gpt35_profile()) {
            Err(ClientError::Auth(msg)) => assert!(msg.contains("bad key")),
            other => panic!("unexpected: {other:?}"),
        }
        assert_eq!(server.join().unwrap(), 1);
    }

    #[test]
    fn rate_limit_exhaustion_reports_retry_count() {
        let responses: Vec<String> =
            (0..5).map(|_| http_response("429 Too Many Requests", "{}")).collect();
        let (endpoint, server) = serve(responses);
        let client = http_client(endpoint);
        match client.complete(&prompt(), &SamplingConfig::gpt35_profile()) {
            Err(ClientError::RateLimitExhausted { retries }) => assert_eq!(retries, 4),
            other => panic!("unexpected: {other:?}"),
        }
        assert_eq!(server.join().unwrap(), 5);
    }

    #[test]
    fn non_transient_provider_error_is_immediate() {
        let (endpoint, server) = serve(vec![http_response("400 Bad Request", "model unknown")]);
        let client = http_client(endpoint);
        match client.complete(&prompt(), &SamplingConfig::gpt35_profile()) {
            Err(ClientError::Provider { status, body }) => {
                assert_eq!(status, 400);
                assert!(body.contains("model unknown"));
            }
            other => panic!("unexpected: {other:?}"),
        }
        assert_eq!(server.join().unwrap(), 1);
    }

    #[test]
    fn sample_n_returns_exactly_m() {
        let client = Client::mock(MockConfig::default());
        let mut cfg = SamplingConfig::gpt35_profile();
        cfg.num_samples = 5;
        cfg.seed = Some(1);
        let out = client.sample_n(&prompt(), &cfg).unwrap();
        assert_eq!(out.len(), 5);
    }
}
