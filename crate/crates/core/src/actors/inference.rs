use std::sync::{Arc, Mutex};
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Actor, ActorProposal, RegionAux, TokenUsage};
use crate::scheduling::{render_block_context, BlockView, Edit, SchedulingDomain};

use super::escalation::EscalationState;
use super::pheromones::PheromoneStore;
use super::prompt::{build_prompt, parse_patch, SYSTEM_PROMPT};
use super::ActorFailure;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

/// Blocking client for an Ollama-compatible `/api/generate` endpoint.
pub struct OllamaClient {
    host: String,
    http: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    system: &'a str,
    stream: bool,
    options: GenerateOptions,
}

#[derive(Serialize)]
struct GenerateOptions {
    temperature: f64,
    top_p: f64,
}

#[derive(Debug, Deserialize)]
pub struct GenerateResponse {
    pub response: String,
    #[serde(default)]
    pub prompt_eval_count: u64,
    #[serde(default)]
    pub eval_count: u64,
}

impl OllamaClient {
    pub fn new(host: impl Into<String>, timeout: Duration) -> Self {
        let host = host.into();
        let host = host.trim_end_matches('/').to_string();
        Self {
            host,
            http: reqwest::blocking::Client::builder()
                .timeout(timeout)
                .build()
                .expect("building the HTTP client cannot fail"),
        }
    }

    pub fn host(&self) -> &str {
        &self.host
    }

    pub fn generate(
        &self,
        model: &str,
        prompt: &str,
        temperature: f64,
        top_p: f64,
    ) -> Result<GenerateResponse, String> {
        let request = GenerateRequest {
            model,
            prompt,
            system: SYSTEM_PROMPT,
            stream: false,
            options: GenerateOptions { temperature, top_p },
        };
        let response = self
            .http
            .post(format!("{}/api/generate", self.host))
            .json(&request)
            .send()
            .map_err(|e| format!("transport: {e}"))?;
        if !response.status().is_success() {
            return Err(format!("status: {}", response.status()));
        }
        response
            .json::<GenerateResponse>()
            .map_err(|e| format!("body: {e}"))
    }
}

/// Proposer backed by a language model. Each call samples temperature and
/// top-p from the current escalation band, injects pheromone hints for the
/// region, and parses a MOVE directive out of the completion.
pub struct InferenceActor {
    client: Arc<OllamaClient>,
    escalation: Arc<Mutex<EscalationState>>,
    pheromones: Arc<Mutex<PheromoneStore>>,
    rng: ChaCha8Rng,
    /// Fixed (temperature, top_p) overriding band sampling; used by the
    /// conversation strategy.
    fixed_sampling: Option<(f64, f64)>,
}

impl InferenceActor {
    pub fn new(
        client: Arc<OllamaClient>,
        escalation: Arc<Mutex<EscalationState>>,
        pheromones: Arc<Mutex<PheromoneStore>>,
        seed: u64,
    ) -> Self {
        Self {
            client,
            escalation,
            pheromones,
            rng: ChaCha8Rng::seed_from_u64(seed),
            fixed_sampling: None,
        }
    }

    pub fn with_fixed_sampling(mut self, temperature: f64, top_p: f64) -> Self {
        self.fixed_sampling = Some((temperature, top_p));
        self
    }
}

impl Actor<SchedulingDomain> for InferenceActor {
    fn propose(
        &mut self,
        view: &BlockView,
        _aux: &RegionAux,
    ) -> Result<Option<ActorProposal<Edit>>, ActorFailure> {
        let (band, model) = {
            let esc = self.escalation.lock().expect("escalation lock poisoned");
            (esc.band(), esc.model().to_string())
        };
        let (temperature, top_p) = self
            .fixed_sampling
            .unwrap_or_else(|| band.sample(&mut self.rng));
        let hints = self
            .pheromones
            .lock()
            .expect("pheromone lock poisoned")
            .hints_for(view.region_id);
        let prompt = build_prompt(&render_block_context(view), &hints);

        let response = self
            .client
            .generate(&model, &prompt, temperature, top_p)
            .map_err(|reason| ActorFailure {
                reason: format!("http_error: {reason}"),
                usage: TokenUsage::default(),
            })?;
        let usage = TokenUsage {
            prompt: response.prompt_eval_count,
            completion: response.eval_count,
        };
        match parse_patch(&response.response, view) {
            Ok(edit) => Ok(Some(ActorProposal {
                edit,
                // Models do not estimate deltas; validation measures them.
                predicted_delta: 0.0,
                band: Some(band.name().to_string()),
                model: Some(model),
                usage,
            })),
            Err(err) => Err(ActorFailure {
                reason: format!("parse_error: {err}"),
                usage,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    fn serve_once(body: &'static str) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = vec![0u8; 65536];
            let mut request = String::new();
            loop {
                let n = stream.read(&mut buf).unwrap();
                request.push_str(&String::from_utf8_lossy(&buf[..n]));
                if let Some(headers_end) = request.find("\r\n\r\n") {
                    let content_length: usize = request
                        .lines()
                        .find_map(|l| l.strip_prefix("Content-Length: "))
                        .and_then(|v| v.trim().parse().ok())
                        .unwrap_or(0);
                    if request.len() >= headers_end + 4 + content_length {
                        break;
                    }
                }
            }
            let reply = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                body.len(),
                body
            );
            stream.write_all(reply.as_bytes()).unwrap();
            request
        });
        (format!("http://{addr}"), handle)
    }

    #[test]
    fn sends_the_expected_request_shape() {
        let (host, handle) = serve_once(
            r#"{"response":"MOVE 5 TO RoomA Tuesday 10:00","prompt_eval_count":120,"eval_count":14}"#,
        );
        let client = OllamaClient::new(host, Duration::from_secs(5));
        let response = client
            .generate("qwen2.5:0.5b", "PROMPT", 0.3, 0.9)
            .unwrap();
        assert_eq!(response.response, "MOVE 5 TO RoomA Tuesday 10:00");
        assert_eq!(response.prompt_eval_count, 120);
        assert_eq!(response.eval_count, 14);

        let request = handle.join().unwrap();
        assert!(request.starts_with("POST /api/generate"));
        let body = &request[request.find("\r\n\r\n").unwrap() + 4..];
        let json: serde_json::Value = serde_json::from_str(body).unwrap();
        assert_eq!(json["model"], "qwen2.5:0.5b");
        assert_eq!(json["prompt"], "PROMPT");
        assert_eq!(json["stream"], false);
        assert_eq!(json["options"]["temperature"], 0.3);
        assert_eq!(json["options"]["top_p"], 0.9);
        assert!(json["system"]
            .as_str()
            .unwrap()
            .starts_with("You optimize meeting room schedules."));
    }

    #[test]
    fn missing_token_counts_default_to_zero() {
        let (host, handle) = serve_once(r#"{"response":"no idea"}"#);
        let client = OllamaClient::new(host, Duration::from_secs(5));
        let response = client.generate("m", "p", 0.2, 0.8).unwrap();
        assert_eq!(response.prompt_eval_count, 0);
        assert_eq!(response.eval_count, 0);
        handle.join().unwrap();
    }

    #[test]
    fn unreachable_host_is_a_transport_error() {
        let client = OllamaClient::new("http://127.0.0.1:1", Duration::from_millis(200));
        let err = client.generate("m", "p", 0.2, 0.8).unwrap_err();
        assert!(err.starts_with("transport:"), "got {err}");
    }
}
