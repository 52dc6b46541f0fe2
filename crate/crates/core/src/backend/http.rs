use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use serde_json::Value;

use super::{Backend, BackendError, CompletionRequest};

/// Settings for an HTTP completion endpoint.
///
/// The request body is `request_template` with every string equal to
/// `$prompt` or `$model` replaced; the reply text is read from
/// `response_path`, a dot-separated path where numeric segments index arrays.
#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub url: String,
    pub model: String,
    /// Environment variable holding a bearer token, if the endpoint needs one.
    pub token_env: Option<String>,
    /// Per-attempt timeout.
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff_base: Duration,
    pub request_template: Value,
    pub response_path: String,
    pub max_in_flight: usize,
}

impl HttpConfig {
    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            model: model.into(),
            token_env: None,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            backoff_base: Duration::from_millis(500),
            request_template: default_request_template(),
            response_path: "choices.0.message.content".into(),
            max_in_flight: 4,
        }
    }
}

pub fn default_request_template() -> Value {
    serde_json::json!({
        "model": "$model",
        "messages": [{"role": "user", "content": "$prompt"}],
        "temperature": 0
    })
}

#[derive(Debug, Default)]
struct InFlight {
    count: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self, cap: usize) -> Permit<'_> {
        let mut n = self.count.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= cap.max(1) {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.0.count.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.0.freed.notify_one();
    }
}

/// Blocking client for a JSON completion API.
///
/// Clones share the connection pool and the in-flight cap but count their
/// retries separately, so one clone per episode gives per-episode counts.
#[derive(Clone)]
pub struct HttpBackend {
    config: Arc<HttpConfig>,
    agent: ureq::Agent,
    in_flight: Arc<InFlight>,
    retries: u64,
}

enum Attempt {
    Retry(String),
    Fatal(BackendError),
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            config: Arc::new(config),
            agent,
            in_flight: Arc::default(),
            retries: 0,
        }
    }

    /// A handle sharing this client's pool and cap, with its own counter.
    pub fn fork(&self) -> Self {
        Self {
            retries: 0,
            ..self.clone()
        }
    }

    fn token(&self) -> Result<Option<String>, BackendError> {
        match &self.config.token_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| BackendError::Auth(format!("environment variable {var} is not set"))),
        }
    }

    fn attempt(
        &self,
        body: &Value,
        token: Option<&str>,
        timeout: Duration,
    ) -> Result<String, Attempt> {
        let mut request = self
            .agent
            .post(&self.config.url)
            .config()
            .timeout_global(Some(timeout))
            .build();
        if let Some(token) = token {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request
            .send_json(body)
            .map_err(|e| Attempt::Retry(e.to_string()))?;
        let status = response.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => return Err(Attempt::Fatal(BackendError::Auth(format!("HTTP {status}")))),
            429 | 500..=599 => return Err(Attempt::Retry(format!("HTTP {status}"))),
            _ => {
                return Err(Attempt::Fatal(BackendError::Unavailable(format!(
                    "HTTP {status}"
                ))));
            }
        }
        let json: Value = response.body_mut().read_json().map_err(|e| {
            Attempt::Fatal(BackendError::Unavailable(format!(
                "invalid response body: {e}"
            )))
        })?;
        extract(&json, &self.config.response_path)
            .map(str::to_string)
            .ok_or_else(|| {
                Attempt::Fatal(BackendError::Unavailable(format!(
                    "response has no string at {}",
                    self.config.response_path
                )))
            })
    }
}

impl Backend for HttpBackend {
    fn complete(&mut self, req: &CompletionRequest) -> Result<String, BackendError> {
        let token = self.token()?;
        let body = substitute(
            &self.config.request_template,
            &req.prompt,
            &self.config.model,
        );
        let _permit = self.in_flight.acquire(self.config.max_in_flight);
        let mut attempt = 0u32;
        loop {
            let timeout = match req.deadline {
                Some(deadline) => {
                    let left = deadline.saturating_duration_since(Instant::now());
                    if left.is_zero() {
                        return Err(BackendError::DeadlineExceeded);
                    }
                    left.min(self.config.timeout)
                }
                None => self.config.timeout,
            };
            match self.attempt(&body, token.as_deref(), timeout) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(reason)) => {
                    if attempt >= self.config.max_retries {
                        return Err(BackendError::Unavailable(reason));
                    }
                    tracing::warn!(attempt, %reason, "retrying completion request");
                    let wait = self
                        .config
                        .backoff_base
                        .saturating_mul(1 << attempt.min(16));
                    if let Some(deadline) = req.deadline {
                        if Instant::now() + wait >= deadline {
                            return Err(BackendError::DeadlineExceeded);
                        }
                    }
                    std::thread::sleep(wait);
                    attempt += 1;
                    self.retries += 1;
                }
            }
        }
    }

    fn transport_retries(&self) -> u64 {
        self.retries
    }
}

fn substitute(template: &Value, prompt: &str, model: &str) -> Value {
    match template {
        Value::String(s) if s == "$prompt" => Value::String(prompt.to_string()),
        Value::String(s) if s == "$model" => Value::String(model.to_string()),
        Value::Array(items) => {
            Value::Array(items.iter().map(|v| substitute(v, prompt, model)).collect())
        }
        Value::Object(map) => Value::Object(
            map.iter()
                .map(|(k, v)| (k.clone(), substitute(v, prompt, model)))
                .collect(),
        ),
        other => other.clone(),
    }
}

fn extract<'a>(value: &'a Value, path: &str) -> Option<&'a str> {
    let mut cur = value;
    for seg in path.split('.').filter(|s| !s.is_empty()) {
        cur = match cur {
            Value::Array(items) => items.get(seg.parse::<usize>().ok()?)?,
            Value::Object(map) => map.get(seg)?,
            _ => return None,
        };
    }
    cur.as_str()
}

#[cfg(test)]
mod tests {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::thread;

    use super::*;
    use crate::backend::tests::request;

    /// Serves one canned (status, body) per connection, returning the
    /// request bodies it saw.
    fn stub(replies: Vec<(u16, String)>) -> (String, thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!(
            "http://{}/v1/chat/completions",
            listener.local_addr().unwrap()
        );
        let handle = thread::spawn(move || {
            let mut seen = Vec::new();
            for (status, body) in replies {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    let line = line.trim_end();
                    if line.is_empty() {
                        break;
                    }
                    if let Some((k, v)) = line.split_once(':') {
                        if k.eq_ignore_ascii_case("content-length") {
                            len = v.trim().parse().unwrap();
                        }
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                seen.push(String::from_utf8(buf).unwrap());
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
            seen
        });
        (url, handle)
    }

    fn reply(text: &str) -> String {
        serde_json::json!({"choices": [{"message": {"content": text}}]}).to_string()
    }

    fn config(url: String) -> HttpConfig {
        HttpConfig {
            backoff_base: Duration::from_millis(1),
            ..HttpConfig::new(url, "m")
        }
    }

    #[test]
    fn returns_canned_reply() {
        let (url, server) = stub(vec![(200, reply("The next action is: inventory."))]);
        let mut b = HttpBackend::new(config(url));
        assert_eq!(
            b.complete(&request("hello")).unwrap(),
            "The next action is: inventory."
        );
        let seen = server.join().unwrap();
        let body: Value = serde_json::from_str(&seen[0]).unwrap();
        assert_eq!(body["messages"][0]["content"], "hello");
        assert_eq!(body["model"], "m");
        assert_eq!(b.transport_retries(), 0);
    }

    #[test]
    fn server_error_is_retried_once() {
        let (url, server) = stub(vec![(500, "{}".into()), (200, reply("ok"))]);
        let mut b = HttpBackend::new(config(url));
        assert_eq!(b.complete(&request("p")).unwrap(), "ok");
        assert_eq!(b.transport_retries(), 1);
        server.join().unwrap();
    }

    #[test]
    fn missing_token_fails_before_any_request() {
        let mut cfg = config("http://127.0.0.1:9/unused".into());
        cfg.token_env = Some("REBACT_TEST_TOKEN_THAT_IS_NEVER_SET".into());
        let mut b = HttpBackend::new(cfg);
        assert!(matches!(
            b.complete(&request("p")),
            Err(BackendError::Auth(_))
        ));
    }

    #[test]
    fn unauthorized_is_not_retried() {
        let (url, server) = stub(vec![(401, "{}".into())]);
        let mut b = HttpBackend::new(config(url));
        assert!(matches!(
            b.complete(&request("p")),
            Err(BackendError::Auth(_))
        ));
        assert_eq!(b.transport_retries(), 0);
        server.join().unwrap();
    }

    #[test]
    fn expired_deadline_is_reported() {
        let mut b = HttpBackend::new(config("http://127.0.0.1:9/unused".into()));
        let mut req = request("p");
        req.deadline = Some(Instant::now());
        assert!(matches!(
            b.complete(&req),
            Err(BackendError::DeadlineExceeded)
        ));
    }

    #[test]
    fn extract_walks_objects_and_arrays() {
        let v = serde_json::json!({"a": [{"b": "x"}]});
        assert_eq!(extract(&v, "a.0.b"), Some("x"));
        assert_eq!(extract(&v, "a.1.b"), None);
    }
}
