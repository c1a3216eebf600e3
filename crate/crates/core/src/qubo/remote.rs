//! HTTP sampler client: POST /sample with a JSON body, parse the returned
//! sample list, and re-derive every energy locally so a misbehaving
//! service cannot smuggle in wrong numbers.
//!
//! Transport failures retry up to three times with exponential backoff;
//! HTTP error statuses and malformed payloads fail immediately.

use super::wire::{SampleRequest, SampleResponse, WireQubo};
use super::{Qubo, Sampler, SampleParams, SampleSet, SamplerError};
use std::collections::BTreeMap;
use std::time::Duration;

pub struct RemoteSampler {
    endpoint: String,
    retries: u32,
    backoff: Duration,
}

impl RemoteSampler {
    pub fn new(endpoint: String) -> Self {
        RemoteSampler { endpoint, retries: 3, backoff: Duration::from_millis(50) }
    }

    fn url(&self) -> String {
        format!("{}/sample", self.endpoint.trim_end_matches('/'))
    }

    fn post(&self, body: &str) -> Result<String, SamplerError> {
        let url = self.url();
        let mut delay = self.backoff;
        let mut attempt = 0;
        loop {
            let result = ureq::post(&url)
                .set("content-type", "application/json")
                .timeout(Duration::from_secs(120))
                .send_string(body);
            match result {
                Ok(resp) => {
                    return resp
                        .into_string()
                        .map_err(|e| SamplerError::Transport(format!("reading body: {e}")));
                }
                Err(ureq::Error::Status(code, resp)) => {
                    let detail = resp.into_string().unwrap_or_default();
                    return Err(SamplerError::Protocol(format!(
                        "HTTP {code} from {url}: {}",
                        detail.trim()
                    )));
                }
                Err(ureq::Error::Transport(t)) => {
                    if attempt >= self.retries {
                        return Err(SamplerError::Transport(t.to_string()));
                    }
                    std::thread::sleep(delay);
                    delay *= 4;
                    attempt += 1;
                }
            }
        }
    }
}

impl Sampler for RemoteSampler {
    fn sample(&self, q: &Qubo, params: &SampleParams) -> Result<SampleSet, SamplerError> {
        let request = SampleRequest { qubo: WireQubo::from_qubo(q), params: params.into() };
        let body = serde_json::to_string(&request)
            .map_err(|e| SamplerError::Protocol(format!("encoding request: {e}")))?;
        let text = self.post(&body)?;
        let response: SampleResponse = serde_json::from_str(&text)
            .map_err(|e| SamplerError::Protocol(format!("decoding response: {e}")))?;
        if response.samples.is_empty() {
            return Err(SamplerError::Protocol("empty sample list".into()));
        }
        let mut counts: BTreeMap<Vec<u8>, (f64, u32)> = BTreeMap::new();
        for s in response.samples {
            if s.bits.len() != q.n() || s.bits.iter().any(|&b| b > 1) {
                return Err(SamplerError::Protocol("malformed bit vector".into()));
            }
            let local = q.energy(&s.bits);
            if (local - s.energy).abs() > 1e-6 * (1.0 + local.abs()) {
                return Err(SamplerError::Protocol(format!(
                    "energy mismatch: reported {} but local recomputation gives {local}",
                    s.energy
                )));
            }
            counts
                .entry(s.bits)
                .and_modify(|(_, c)| *c += s.occurrences)
                .or_insert((local, s.occurrences));
        }
        Ok(SampleSet::from_counts(counts))
    }
}
