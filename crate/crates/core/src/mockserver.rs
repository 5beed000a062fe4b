//! A tiny canned model server for tests and offline runs.
//!
//! Speaks just enough HTTP for the extraction client: POST with a JSON body
//! carrying a prompt and one base64 image, JSON response with a single text
//! field. The decoded image bytes (as UTF-8) select the canned response, so
//! fixtures use small text files in place of real images.
//!
//! Responses come in two variants per key: `rich` when the prompt mentions
//! at least `min_markers` of the configured marker tokens (the usual markers
//! are ontology relationship names), `plain` otherwise. This emulates the
//! coverage gap between ontology-guided and unguided prompting. A key
//! starting with `fail:` triggers an HTTP 500 for error-path tests.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// The two canned response variants for one image key.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MockResponse {
    pub rich: String,
    pub plain: String,
}

/// Canned content served by [`MockServer`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MockFixture {
    /// Tokens whose presence in the prompt marks it as ontology-guided.
    pub ontology_markers: Vec<String>,
    /// How many distinct markers the prompt needs for the `rich` variant.
    pub min_markers: usize,
    /// Image key (decoded image bytes, trimmed) -> responses.
    pub responses: BTreeMap<String, MockResponse>,
    /// Served when the key is unknown; without it unknown keys get HTTP 404.
    pub default: Option<MockResponse>,
    /// Response JSON field carrying the generated text.
    pub response_field: String,
    /// Request JSON field carrying the base64 image list.
    pub images_field: String,
}

impl Default for MockFixture {
    fn default() -> Self {
        MockFixture {
            ontology_markers: Vec::new(),
            min_markers: 3,
            responses: BTreeMap::new(),
            default: None,
            response_field: "response".into(),
            images_field: "images".into(),
        }
    }
}

impl MockFixture {
    fn pick(&self, key: &str, prompt: &str) -> Option<String> {
        let response = self.responses.get(key).or(self.default.as_ref())?;
        let hits = self
            .ontology_markers
            .iter()
            .filter(|marker| prompt.contains(marker.as_str()))
            .count();
        Some(if hits >= self.min_markers && !self.ontology_markers.is_empty() {
            response.rich.clone()
        } else {
            response.plain.clone()
        })
    }
}

/// A running mock server; shuts down on drop.
pub struct MockServer {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    requests: Arc<AtomicUsize>,
    accept_thread: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Bind an ephemeral 127.0.0.1 port and start serving.
    pub fn start(fixture: MockFixture) -> std::io::Result<MockServer> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let shutdown = Arc::new(AtomicBool::new(false));
        let requests = Arc::new(AtomicUsize::new(0));
        let fixture = Arc::new(fixture);

        let accept_thread = {
            let shutdown = Arc::clone(&shutdown);
            let requests = Arc::clone(&requests);
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if shutdown.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let fixture = Arc::clone(&fixture);
                    let requests = Arc::clone(&requests);
                    std::thread::spawn(move || {
                        let _ = handle_connection(stream, &fixture, &requests);
                    });
                }
            })
        };

        Ok(MockServer {
            addr,
            shutdown,
            requests,
            accept_thread: Some(accept_thread),
        })
    }

    /// Endpoint URL to point the extraction client at.
    pub fn url(&self) -> String {
        format!("http://{}/api/generate", self.addr)
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// POST requests handled so far.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.accept_thread.take() {
            let _ = handle.join();
        }
    }
}

fn handle_connection(
    stream: TcpStream,
    fixture: &MockFixture,
    requests: &AtomicUsize,
) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;

    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                content_length = value.trim().parse().unwrap_or(0);
            }
        }
    }

    if request_line.starts_with("GET") {
        return respond(stream, 200, "text/plain", "ok");
    }
    if !request_line.starts_with("POST") {
        return respond(stream, 405, "text/plain", "method not allowed");
    }
    requests.fetch_add(1, Ordering::SeqCst);

    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let Ok(parsed) = serde_json::from_slice::<Value>(&body) else {
        return respond(stream, 400, "text/plain", "body is not JSON");
    };
    let prompt = parsed.get("prompt").and_then(Value::as_str).unwrap_or("");
    let image_b64 = parsed
        .get(&fixture.images_field)
        .and_then(Value::as_array)
        .and_then(|list| list.first())
        .and_then(Value::as_str)
        .unwrap_or("");
    let Ok(image_bytes) = BASE64.decode(image_b64) else {
        return respond(stream, 400, "text/plain", "image is not base64");
    };
    let key = String::from_utf8_lossy(&image_bytes).trim().to_string();

    if key.starts_with("fail:") {
        return respond(stream, 500, "text/plain", "injected failure");
    }
    match fixture.pick(&key, prompt) {
        Some(text) => {
            let reply = json!({ fixture.response_field.clone(): text });
            respond(stream, 200, "application/json", &reply.to_string())
        }
        None => respond(stream, 404, "text/plain", "unknown image key"),
    }
}

fn respond(mut stream: TcpStream, status: u16, content_type: &str, body: &str) -> std::io::Result<()> {
    let reason = match status {
        200 => "OK",
        400 => "Bad Request",
        404 => "Not Found",
        405 => "Method Not Allowed",
        _ => "Internal Server Error",
    };
    let response = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(response.as_bytes())?;
    stream.flush()
}
