//! Blocking HTTP client for local multimodal-model servers.
//!
//! The wire format matches common local inference servers: POST a JSON body
//! `{"model", "prompt", "images": [base64], "temperature", "stream": false}`
//! and read the generated text from a single JSON field of the response.
//! The image-list and response-text field names are configurable.

use std::time::Duration;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::normalize::PlaceholderSet;
use crate::ontology::Ontology;

use super::{parse_response_with, ExtractionRecord};

/// Endpoint settings for the extraction client.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientConfig {
    pub endpoint: String,
    pub model: String,
    pub timeout_secs: u64,
    /// Extra attempts after a network/timeout failure (never after an HTTP
    /// error status).
    pub max_retries: u32,
    pub max_concurrent: usize,
    pub temperature: f64,
    /// Sent with every request when set, for endpoints that support seeding.
    pub seed: Option<u64>,
    pub images_field: String,
    pub response_field: String,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            endpoint: "http://127.0.0.1:11434/api/generate".into(),
            model: "llama3.2-vision".into(),
            timeout_secs: 120,
            max_retries: 2,
            max_concurrent: 4,
            temperature: 0.0,
            seed: Some(0),
            images_field: "images".into(),
            response_field: "response".into(),
        }
    }
}

impl ClientConfig {
    pub fn validate(&self) -> Result<()> {
        if self.timeout_secs == 0 {
            return Err(Error::Config("timeout must be > 0 seconds".into()));
        }
        if self.max_concurrent == 0 {
            return Err(Error::Config("max concurrent requests must be >= 1".into()));
        }
        if self.endpoint.is_empty() {
            return Err(Error::Config("endpoint URL is empty".into()));
        }
        Ok(())
    }
}

/// A reusable client over one endpoint configuration.
pub struct ModelClient {
    config: ClientConfig,
    http: reqwest::blocking::Client,
}

impl ModelClient {
    pub fn new(config: ClientConfig) -> Result<Self> {
        config.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(ModelClient { config, http })
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    /// One generation call with retries; returns the raw response text.
    pub fn generate(&self, prompt: &str, image: &[u8]) -> Result<String> {
        let mut body = serde_json::Map::new();
        body.insert("model".into(), json!(self.config.model));
        body.insert("prompt".into(), json!(prompt));
        body.insert(
            self.config.images_field.clone(),
            json!([BASE64.encode(image)]),
        );
        body.insert("temperature".into(), json!(self.config.temperature));
        body.insert("stream".into(), json!(false));
        if let Some(seed) = self.config.seed {
            body.insert("seed".into(), json!(seed));
        }
        let body = Value::Object(body);

        let mut last_err = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(100 * attempt as u64));
            }
            let sent = self.http.post(&self.config.endpoint).json(&body).send();
            let response = match sent {
                Ok(response) => response,
                Err(e) => {
                    last_err = e.to_string();
                    continue;
                }
            };
            let status = response.status();
            let text = response.text().unwrap_or_default();
            if !status.is_success() {
                return Err(Error::Endpoint {
                    status: status.as_u16(),
                    body: snippet(&text),
                });
            }
            let parsed: Value = serde_json::from_str(&text)
                .map_err(|e| Error::Protocol(format!("response is not JSON: {e}")))?;
            return match parsed.get(&self.config.response_field).and_then(Value::as_str) {
                Some(generated) => Ok(generated.to_string()),
                None => Err(Error::Protocol(format!(
                    "response JSON has no string field `{}`",
                    self.config.response_field
                ))),
            };
        }
        Err(Error::Transport {
            url: self.config.endpoint.clone(),
            message: last_err,
        })
    }

    /// Extract triples for one image: call the endpoint, then parse,
    /// null-filter, and validate the response against the ontology.
    pub fn extract_image(
        &self,
        image_id: &str,
        image: &[u8],
        ontology: &Ontology,
        prompt: &str,
        placeholders: &PlaceholderSet,
    ) -> Result<ExtractionRecord> {
        if image.is_empty() {
            return Err(Error::InvalidInput(format!("image `{image_id}` is empty")));
        }
        let raw_response = self.generate(prompt, image)?;
        let parsed = parse_response_with(&raw_response, image_id, ontology, placeholders);
        for warning in &parsed.warnings {
            log::warn!("{image_id}: {warning}");
        }
        Ok(ExtractionRecord {
            image_id: image_id.to_string(),
            triples: parsed.triples,
            rejected: parsed.rejected,
            raw_response,
        })
    }
}

fn snippet(text: &str) -> String {
    let trimmed = text.trim();
    if trimmed.len() <= 200 {
        trimmed.to_string()
    } else {
        let mut end = 200;
        while !trimmed.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}...", &trimmed[..end])
    }
}

/// One-shot convenience wrapper around [`ModelClient::extract_image`].
pub fn extract_image(
    image: &[u8],
    image_id: &str,
    ontology: &Ontology,
    prompt: &str,
    config: &ClientConfig,
) -> Result<ExtractionRecord> {
    ModelClient::new(config.clone())?.extract_image(
        image_id,
        image,
        ontology,
        prompt,
        &PlaceholderSet::default(),
    )
}

/// Per-image outcome of a batch run; failures never abort the batch.
#[derive(Debug)]
pub struct BatchItem {
    pub image_id: String,
    pub outcome: Result<ExtractionRecord>,
}

/// Extract all images, issuing up to `max_concurrent` requests at a time
/// (sequentially without the `parallel` feature). Output order equals input
/// order regardless of concurrency.
pub fn extract_batch(
    client: &ModelClient,
    images: &[(String, Vec<u8>)],
    ontology: &Ontology,
    prompt: &str,
    placeholders: &PlaceholderSet,
) -> Vec<BatchItem> {
    let run_one = |(image_id, bytes): &(String, Vec<u8>)| BatchItem {
        image_id: image_id.clone(),
        outcome: client.extract_image(image_id, bytes, ontology, prompt, placeholders),
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let threads = client.config.max_concurrent.min(images.len().max(1));
        if threads > 1 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                return pool.install(|| images.par_iter().map(run_one).collect());
            }
        }
    }
    images.iter().map(run_one).collect()
}
