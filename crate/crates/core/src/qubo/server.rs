//! Minimal HTTP sampler service backed by the local annealer. Exists so
//! the remote client path can be exercised end to end over loopback and
//! so a box on the network can serve sampling to several workers.

use super::sa::Annealer;
use super::wire::{SampleRequest, SampleResponse, WireSample};
use super::Sampler;
use crate::exec::ExecMode;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;
use tiny_http::{Header, Method, Response, Server};

pub struct SamplerServer {
    addr: SocketAddr,
    server: Arc<Server>,
    worker: Option<JoinHandle<()>>,
}

impl SamplerServer {
    /// Bind and serve on a background thread. Use port 0 to let the OS
    /// pick one; the chosen address is available from [`Self::endpoint`].
    pub fn spawn(bind: &str) -> std::io::Result<SamplerServer> {
        let server = Arc::new(
            Server::http(bind).map_err(|e| std::io::Error::other(e.to_string()))?,
        );
        let addr = server
            .server_addr()
            .to_ip()
            .expect("tcp listener always has an ip address");
        let looper = Arc::clone(&server);
        let worker = std::thread::spawn(move || {
            for request in looper.incoming_requests() {
                handle(request);
            }
        });
        Ok(SamplerServer { addr, server, worker: Some(worker) })
    }

    pub fn endpoint(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for SamplerServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

fn json_header() -> Header {
    Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..]).unwrap()
}

fn handle(mut request: tiny_http::Request) {
    if *request.method() != Method::Post || request.url() != "/sample" {
        let _ = request.respond(Response::from_string("only POST /sample").with_status_code(404));
        return;
    }
    let mut body = String::new();
    if request.as_reader().read_to_string(&mut body).is_err() {
        let _ = request.respond(Response::from_string("unreadable body").with_status_code(400));
        return;
    }
    match answer(&body) {
        Ok(json) => {
            let _ = request
                .respond(Response::from_string(json).with_status_code(200).with_header(json_header()));
        }
        Err(msg) => {
            let _ = request.respond(Response::from_string(msg).with_status_code(400));
        }
    }
}

fn answer(body: &str) -> Result<String, String> {
    let req: SampleRequest = serde_json::from_str(body).map_err(|e| format!("bad request: {e}"))?;
    let qubo = req.qubo.to_qubo();
    let set = Annealer::new(ExecMode::default())
        .sample(&qubo, &req.params.into())
        .map_err(|e| e.to_string())?;
    let response = SampleResponse {
        samples: set
            .samples
            .into_iter()
            .map(|s| WireSample { bits: s.bits, energy: s.energy, occurrences: s.occurrences })
            .collect(),
    };
    serde_json::to_string(&response).map_err(|e| e.to_string())
}
