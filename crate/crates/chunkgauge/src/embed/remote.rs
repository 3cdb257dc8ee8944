//! HTTP clients for the remote embedding service and the chat endpoint used
//! by the LLM chunker. Both speak the common JSON wire shape: embeddings via
//! `POST {endpoint}/embeddings`, completions via
//! `POST {endpoint}/chat/completions`, bearer auth from `EMBED_API_KEY`.

use std::time::Duration;

use serde::Deserialize;

use crate::embed::{EmbeddingProvider, EmbeddingVector, LlmClient};
use crate::error::{Error, Result};

/// Env var holding the bearer token for remote calls.
pub const API_KEY_ENV: &str = "EMBED_API_KEY";

fn build_client(timeout: Duration) -> Result<reqwest::blocking::Client> {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| Error::provider(format!("http client: {e}")))
}

fn post_json(
    client: &reqwest::blocking::Client,
    url: &str,
    api_key: Option<&str>,
    body: &serde_json::Value,
) -> Result<serde_json::Value> {
    let mut req = client.post(url).json(body);
    if let Some(key) = api_key {
        req = req.bearer_auth(key);
    }
    let resp = req
        .send()
        .map_err(|e| Error::provider(format!("{url}: {e}")))?;
    let status = resp.status();
    let text = resp
        .text()
        .map_err(|e| Error::provider(format!("{url}: reading body: {e}")))?;
    if !status.is_success() {
        let snippet: String = text.chars().take(200).collect();
        return Err(Error::provider(format!("{url}: HTTP {status}: {snippet}")));
    }
    serde_json::from_str(&text).map_err(|e| Error::provider(format!("{url}: bad JSON: {e}")))
}

/// Remote embedding service client.
pub struct RemoteProvider {
    endpoint: String,
    model: String,
    dims: usize,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl RemoteProvider {
    /// `endpoint` is the service base URL; the request path `/embeddings` is
    /// appended. The bearer token is read from `EMBED_API_KEY` once, here.
    pub fn new(endpoint: &str, model: &str, dims: usize, timeout: Duration) -> Result<Self> {
        Ok(RemoteProvider {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model: model.to_string(),
            dims,
            api_key: std::env::var(API_KEY_ENV).ok(),
            client: build_client(timeout)?,
        })
    }
}

#[derive(Deserialize)]
struct EmbeddingsResponse {
    data: Vec<EmbeddingRow>,
}

#[derive(Deserialize)]
struct EmbeddingRow {
    index: usize,
    embedding: Vec<f32>,
}

impl EmbeddingProvider for RemoteProvider {
    fn kind(&self) -> &str {
        "remote"
    }

    fn model(&self) -> &str {
        &self.model
    }

    fn dims(&self) -> usize {
        self.dims
    }

    fn embed_raw(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        let url = format!("{}/embeddings", self.endpoint);
        let body = serde_json::json!({ "model": self.model, "input": texts });
        let value = post_json(&self.client, &url, self.api_key.as_deref(), &body)?;
        let parsed: EmbeddingsResponse = serde_json::from_value(value)
            .map_err(|e| Error::provider(format!("{url}: unexpected response shape: {e}")))?;
        if parsed.data.len() != texts.len() {
            return Err(Error::provider(format!(
                "{url}: {} rows for {} inputs",
                parsed.data.len(),
                texts.len()
            )));
        }
        // Responses may arrive in any order; `index` is authoritative.
        let mut out: Vec<Option<EmbeddingVector>> = vec![None; texts.len()];
        for row in parsed.data {
            let slot = out.get_mut(row.index).ok_or_else(|| {
                Error::provider(format!("{url}: index {} out of range", row.index))
            })?;
            if slot.is_some() {
                return Err(Error::provider(format!(
                    "{url}: duplicate index {}",
                    row.index
                )));
            }
            *slot = Some(EmbeddingVector::new(row.embedding));
        }
        Ok(out.into_iter().map(|v| v.expect("all indices seen")).collect())
    }
}

/// Chat-completions client backing the LLM chunker.
pub struct RemoteChatClient {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl RemoteChatClient {
    pub fn new(endpoint: &str, model: &str, timeout: Duration) -> Result<Self> {
        Ok(RemoteChatClient {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key: std::env::var(API_KEY_ENV).ok(),
            client: build_client(timeout)?,
        })
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

impl LlmClient for RemoteChatClient {
    fn complete(&self, prompt: &str) -> Result<String> {
        let url = format!("{}/chat/completions", self.endpoint);
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{ "role": "user", "content": prompt }],
        });
        let value = post_json(&self.client, &url, self.api_key.as_deref(), &body)?;
        let parsed: ChatResponse = serde_json::from_value(value)
            .map_err(|e| Error::provider(format!("{url}: unexpected response shape: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| Error::provider(format!("{url}: empty choices")))
    }
}
