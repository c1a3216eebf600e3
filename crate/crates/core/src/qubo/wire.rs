//! JSON wire format shared by the HTTP sampler client and server.
//!
//! Variable roles stay on the client side: the wire carries only the raw
//! coefficient data plus sampling parameters. `chain_strength` rides along
//! opaquely for samplers that need it; the local annealer ignores it.

use super::{Qubo, SampleParams};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WireQubo {
    pub n: usize,
    pub linear: Vec<f64>,
    pub quadratic: Vec<(usize, usize, f64)>,
    pub offset: f64,
}

impl WireQubo {
    pub fn from_qubo(q: &Qubo) -> Self {
        WireQubo {
            n: q.n(),
            linear: q.linear().to_vec(),
            quadratic: q.iter_quad().collect(),
            offset: q.offset(),
        }
    }

    pub fn to_qubo(&self) -> Qubo {
        let mut q = Qubo::with_size(self.n);
        q.add_offset(self.offset);
        for (i, &w) in self.linear.iter().enumerate() {
            q.add_linear(i, w);
        }
        for &(i, j, w) in &self.quadratic {
            q.add_quad(i, j, w);
        }
        q
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WireParams {
    pub reads: u32,
    pub sweeps: u32,
    pub seed: u64,
    pub chain_strength: f64,
}

impl From<&SampleParams> for WireParams {
    fn from(p: &SampleParams) -> Self {
        WireParams {
            reads: p.reads,
            sweeps: p.sweeps,
            seed: p.seed,
            chain_strength: p.chain_strength,
        }
    }
}

impl From<WireParams> for SampleParams {
    fn from(w: WireParams) -> Self {
        SampleParams {
            reads: w.reads,
            sweeps: w.sweeps,
            seed: w.seed,
            chain_strength: w.chain_strength,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleRequest {
    pub qubo: WireQubo,
    pub params: WireParams,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WireSample {
    pub bits: Vec<u8>,
    pub energy: f64,
    pub occurrences: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleResponse {
    pub samples: Vec<WireSample>,
}
