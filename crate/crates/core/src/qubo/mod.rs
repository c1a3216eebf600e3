//! Quadratic unconstrained binary optimization: model type, samplers, and
//! the backends the cut-selection layer draws from.
//!
//! Energy convention: `offset + sum_i linear[i] x_i + sum_{i<j} q[i,j] x_i x_j`
//! over x in {0,1}^n, with strictly upper-triangular quadratic keys.

pub mod exhaustive;
pub mod ising;
pub mod remote;
pub mod sa;
pub mod server;
pub mod wire;

use crate::exec::ExecMode;
use std::collections::BTreeMap;
use thiserror::Error;

/// What a QUBO variable stands for. Samplers ignore roles; the structured
/// exhaustive path and the decoder rely on them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRole {
    /// Pick-this-item bit; `usize` is the item (cut) index.
    Decision(usize),
    /// Dimension-j-is-covered indicator.
    Coverage(usize),
    /// Binary expansion bit of the slack for one column's balance term.
    ColumnSlack { col: usize, bit: u32 },
    /// Binary expansion bit of the slack in the cardinality term.
    CardinalitySlack { bit: u32 },
}

#[derive(Clone, Debug)]
pub struct Qubo {
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
    roles: Vec<VarRole>,
}

impl Qubo {
    pub fn new(roles: Vec<VarRole>) -> Self {
        let n = roles.len();
        Qubo { linear: vec![0.0; n], quadratic: BTreeMap::new(), offset: 0.0, roles }
    }

    /// All-decision role vector, for plain (non-selection) problems.
    pub fn with_size(n: usize) -> Self {
        Self::new((0..n).map(VarRole::Decision).collect())
    }

    pub fn n(&self) -> usize {
        self.linear.len()
    }

    pub fn roles(&self) -> &[VarRole] {
        &self.roles
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn add_offset(&mut self, w: f64) {
        self.offset += w;
    }

    pub fn add_linear(&mut self, i: usize, w: f64) {
        self.linear[i] += w;
    }

    /// Accumulate a quadratic term; `i == j` folds into the linear part
    /// since x^2 = x on binaries.
    pub fn add_quad(&mut self, i: usize, j: usize, w: f64) {
        assert!(i < self.n() && j < self.n(), "index out of range");
        if i == j {
            self.linear[i] += w;
        } else {
            *self.quadratic.entry((i.min(j), i.max(j))).or_insert(0.0) += w;
        }
    }

    pub fn iter_quad(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.quadratic.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn energy(&self, bits: &[u8]) -> f64 {
        debug_assert_eq!(bits.len(), self.n());
        let mut e = self.offset;
        for (i, &w) in self.linear.iter().enumerate() {
            if bits[i] == 1 {
                e += w;
            }
        }
        for (&(i, j), &w) in &self.quadratic {
            if bits[i] == 1 && bits[j] == 1 {
                e += w;
            }
        }
        e
    }

    /// Largest coefficient magnitude over linear and quadratic terms.
    pub fn max_abs_coeff(&self) -> f64 {
        let l = self.linear.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.quadratic.values().fold(l, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub bits: Vec<u8>,
    pub energy: f64,
    pub occurrences: u32,
}

/// Aggregated samples, ascending energy, ties by lexicographically
/// smallest bit vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
}

impl SampleSet {
    pub fn from_counts(counts: BTreeMap<Vec<u8>, (f64, u32)>) -> Self {
        let mut samples: Vec<Sample> = counts
            .into_iter()
            .map(|(bits, (energy, occurrences))| Sample { bits, energy, occurrences })
            .collect();
        samples.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.bits.cmp(&b.bits)));
        SampleSet { samples }
    }

    pub fn best(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SampleParams {
    pub reads: u32,
    pub sweeps: u32,
    pub seed: u64,
    /// Forwarded opaquely to remote samplers; local ones ignore it.
    pub chain_strength: f64,
}

impl Default for SampleParams {
    fn default() -> Self {
        SampleParams { reads: 1000, sweeps: 1000, seed: 0, chain_strength: 1.5 }
    }
}

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("{n} variables exceed the exhaustive cap of {cap}")]
    SizeCap { n: usize, cap: usize },
    #[error("transport failure talking to the sampler: {0}")]
    Transport(String),
    #[error("sampler protocol violation: {0}")]
    Protocol(String),
}

pub trait Sampler {
    fn sample(&self, q: &Qubo, params: &SampleParams) -> Result<SampleSet, SamplerError>;
}

/// Which engine answers QUBO minimization requests.
#[derive(Clone, Debug)]
pub enum Backend {
    /// Exact: structured block enumeration when the variable roles allow
    /// it, otherwise full enumeration up to `cap` variables.
    Exhaustive { cap: usize },
    /// Local simulated annealing.
    Annealer { exec: ExecMode },
    /// JSON-over-HTTP sampler at this endpoint.
    Remote { endpoint: String },
}

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 25;

impl Backend {
    pub fn solve(&self, q: &Qubo, params: &SampleParams) -> Result<SampleSet, SamplerError> {
        match self {
            Backend::Exhaustive { cap } => {
                if let Some(best) = exhaustive::structured_minimum(q, *cap) {
                    return Ok(SampleSet { samples: vec![best] });
                }
                exhaustive::exhaustive_solve(q, *cap, 64)
            }
            Backend::Annealer { exec } => sa::Annealer::new(*exec).sample(q, params),
            Backend::Remote { endpoint } => {
                remote::RemoteSampler::new(endpoint.clone()).sample(q, params)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_counts_active_terms_only() {
        let mut q = Qubo::with_size(3);
        q.add_offset(1.5);
        q.add_linear(0, 2.0);
        q.add_linear(2, -1.0);
        q.add_quad(0, 2, 4.0);
        q.add_quad(2, 0, 1.0); // accumulates onto the same key
        q.add_quad(1, 1, 7.0); // folds into linear
        assert_eq!(q.energy(&[0, 0, 0]), 1.5);
        assert_eq!(q.energy(&[1, 0, 0]), 3.5);
        assert_eq!(q.energy(&[1, 0, 1]), 2.5 + 5.0);
        assert_eq!(q.energy(&[0, 1, 0]), 8.5);
    }

    #[test]
    fn sample_sets_sort_by_energy_then_bits() {
        let mut counts = BTreeMap::new();
        counts.insert(vec![1, 0], (2.0, 3));
        counts.insert(vec![0, 1], (2.0, 1));
        counts.insert(vec![1, 1], (-1.0, 2));
        let s = SampleSet::from_counts(counts);
        assert_eq!(s.samples[0].bits, vec![1, 1]);
        assert_eq!(s.samples[1].bits, vec![0, 1]);
        assert_eq!(s.samples[2].bits, vec![1, 0]);
    }
}
