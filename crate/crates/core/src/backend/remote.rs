//! HTTP client for a model server.
//!
//! Wire format (UTF-8 JSON):
//!
//! ```text
//! POST {endpoint}/extract  {"items":[{"id","question","context"}]}
//!                       -> {"items":[{"id","text"|null,"answer_start"|null,"span_score","no_answer_score"}]}
//! GET  {endpoint}/health -> {"status":"ok","model":"<name>"}
//! ```
//!
//! `answer_start` counts characters. Batches are split into requests of at
//! most `batch_size` items, sent one after another. Answers that fail the
//! substring check come back as per-item `ContractViolation`s and are never
//! turned into fills.

use std::collections::HashMap;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendConfig, BackendError, ExtractionResult, SpanExtractor};
use crate::text::char_len;

#[derive(Debug, Serialize)]
struct RequestItem<'a> {
    id: String,
    question: &'a str,
    context: &'a str,
}

#[derive(Debug, Serialize)]
struct ExtractRequest<'a> {
    items: Vec<RequestItem<'a>>,
}

#[derive(Debug, Deserialize)]
struct ResponseItem {
    id: String,
    text: Option<String>,
    answer_start: Option<usize>,
    span_score: f64,
    no_answer_score: f64,
}

#[derive(Debug, Deserialize)]
struct ExtractResponse {
    items: Vec<ResponseItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    #[serde(default)]
    pub model: Option<String>,
}

impl HealthStatus {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone)]
pub struct RemoteBackend {
    endpoint: String,
    agent: ureq::Agent,
    retries: u32,
}

enum Failure {
    /// Worth another attempt: connection trouble, timeouts, 5xx.
    Transient(String),
    Fatal(String),
}

impl RemoteBackend {
    /// A client for `cfg.endpoint`, which must be set.
    pub fn new(cfg: &BackendConfig) -> Result<Self, BackendError> {
        cfg.validate()?;
        let endpoint = cfg
            .endpoint
            .as_deref()
            .filter(|e| !e.trim().is_empty())
            .ok_or_else(|| BackendError::InvalidConfig("the remote backend needs an endpoint".into()))?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(RemoteBackend {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            agent,
            retries: cfg.retries,
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn health(&self) -> Result<HealthStatus, BackendError> {
        let url = format!("{}/health", self.endpoint);
        self.with_retries(|| {
            let mut resp = self.agent.get(&url).call().map_err(transport)?;
            check_status(resp.status().as_u16())?;
            resp.body_mut()
                .read_json::<HealthStatus>()
                .map_err(|e| Failure::Fatal(format!("malformed /health response: {e}")))
        })
    }

    fn with_retries<T>(&self, mut op: impl FnMut() -> Result<T, Failure>) -> Result<T, BackendError> {
        let mut attempt = 0;
        loop {
            match op() {
                Ok(v) => return Ok(v),
                Err(Failure::Fatal(msg)) => return Err(BackendError::Unavailable(msg)),
                Err(Failure::Transient(msg)) if attempt >= self.retries => {
                    return Err(BackendError::Unavailable(format!("{msg} (after {} attempts)", attempt + 1)))
                }
                Err(Failure::Transient(msg)) => {
                    log::warn!("{}: {msg}; retrying", self.endpoint);
                    attempt += 1;
                    thread::sleep(Duration::from_millis(50 << attempt.min(6)));
                }
            }
        }
    }

    /// `chunk` pairs carry their position in the caller's batch, used as the id.
    fn post_chunk(&self, chunk: &[(usize, (&str, &str))]) -> Result<ExtractResponse, BackendError> {
        let url = format!("{}/extract", self.endpoint);
        let body = ExtractRequest {
            items: chunk
                .iter()
                .map(|(i, (question, context))| RequestItem {
                    id: i.to_string(),
                    question,
                    context,
                })
                .collect(),
        };
        self.with_retries(|| {
            let mut resp = self.agent.post(&url).send_json(&body).map_err(transport)?;
            check_status(resp.status().as_u16())?;
            resp.body_mut()
                .read_json::<ExtractResponse>()
                .map_err(|e| Failure::Fatal(format!("malformed /extract response: {e}")))
        })
    }
}

fn transport(e: ureq::Error) -> Failure {
    match e {
        ureq::Error::Json(e) => Failure::Fatal(e.to_string()),
        other => Failure::Transient(other.to_string()),
    }
}

fn check_status(code: u16) -> Result<(), Failure> {
    match code {
        200..=299 => Ok(()),
        500..=599 => Err(Failure::Transient(format!("server answered HTTP {code}"))),
        _ => Err(Failure::Fatal(format!("server answered HTTP {code}"))),
    }
}

fn convert(item: ResponseItem, question: &str, context: &str) -> Result<ExtractionResult, BackendError> {
    let violation = |reason: String| BackendError::ContractViolation {
        item: question.to_string(),
        reason,
    };
    match (item.text, item.answer_start) {
        (Some(text), Some(start)) => {
            let end = start + char_len(&text);
            let r = ExtractionResult::span(context, start, end, item.span_score, item.no_answer_score).map_err(violation)?;
            if r.answer.as_ref().map(|a| a.text.as_str()) != Some(text.as_str()) {
                return Err(violation(format!("answer `{text}` is not the context at {start}..{end}")));
            }
            Ok(r)
        }
        (None, None) => {
            let r = ExtractionResult {
                answer: None,
                span_score: item.span_score,
                no_answer_score: item.no_answer_score,
            };
            r.check(context).map_err(violation)?;
            Ok(r)
        }
        _ => Err(violation("`text` and `answer_start` must be both set or both null".into())),
    }
}

impl SpanExtractor for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn extract(&self, question: &str, context: &str, cfg: &BackendConfig) -> Result<ExtractionResult, BackendError> {
        self.batch_extract(&[(question, context)], cfg)
            .pop()
            .unwrap_or(Err(BackendError::Unavailable("empty response".into())))
    }

    fn batch_extract(
        &self,
        pairs: &[(&str, &str)],
        cfg: &BackendConfig,
    ) -> Vec<Result<ExtractionResult, BackendError>> {
        let mut out = Vec::with_capacity(pairs.len());
        let batch = cfg.batch_size.max(1);
        for (chunk_no, chunk) in pairs.chunks(batch).enumerate() {
            let first_id = chunk_no * batch;
            // Empty contexts never leave the process.
            let mut results: Vec<Option<Result<ExtractionResult, BackendError>>> = chunk
                .iter()
                .map(|(_, c)| c.is_empty().then_some(Err(BackendError::EmptyContext)))
                .collect();
            let send: Vec<(usize, (&str, &str))> = chunk
                .iter()
                .enumerate()
                .filter(|(i, _)| results[*i].is_none())
                .map(|(i, p)| (first_id + i, *p))
                .collect();
            if !send.is_empty() {
                match self.post_chunk(&send) {
                    Ok(resp) => {
                        let mut by_id: HashMap<String, ResponseItem> =
                            resp.items.into_iter().map(|it| (it.id.clone(), it)).collect();
                        for &(g, (q, c)) in &send {
                            let id = g.to_string();
                            results[g - first_id] = Some(match by_id.remove(&id) {
                                Some(item) => convert(item, q, c),
                                None => Err(BackendError::ContractViolation {
                                    item: q.to_string(),
                                    reason: format!("no result for item id {id}"),
                                }),
                            });
                        }
                    }
                    Err(e) => {
                        for &(g, _) in &send {
                            results[g - first_id] = Some(Err(e.clone()));
                        }
                    }
                }
            }
            out.extend(results.into_iter().map(|r| r.expect("every slot filled")));
        }
        out
    }
}
