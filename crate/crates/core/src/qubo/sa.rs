//! Simulated annealing sampler.
//!
//! Single-bit Metropolis sweeps in fixed variable order under a geometric
//! temperature schedule from T0 = max |coefficient| down to 1e-3 * T0.
//! Each read derives its own RNG stream from (seed, read index), so a
//! batch of reads gives identical results whether the reads run
//! sequentially or fanned out across threads, and reruns with the same
//! seed reproduce bit for bit.

use super::{Qubo, Sampler, SampleParams, SampleSet, SamplerError};
use crate::exec::{map_indexed, ExecMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub struct Annealer {
    exec: ExecMode,
}

impl Annealer {
    pub fn new(exec: ExecMode) -> Self {
        Annealer { exec }
    }
}

fn mix_seed(seed: u64, read: u64) -> u64 {
    // splitmix64 round over the pair; cheap and well spread.
    let mut z = seed ^ read.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn one_read(q: &Qubo, adj: &[Vec<(usize, f64)>], sweeps: u32, t0: f64, t1: f64, seed: u64) -> Vec<u8> {
    let n = q.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1u8)).collect();
    // f[b]: energy change of raising bit b given the current neighbors.
    let mut f: Vec<f64> = q.linear().to_vec();
    for (i, row) in adj.iter().enumerate() {
        for &(j, w) in row {
            if bits[j] == 1 {
                f[i] += w;
            }
        }
        let _ = i;
    }
    let ratio = if sweeps > 1 { (t1 / t0).powf(1.0 / (sweeps as f64 - 1.0)) } else { 1.0 };
    let mut temp = t0;
    for _ in 0..sweeps {
        for b in 0..n {
            let delta = if bits[b] == 0 { f[b] } else { -f[b] };
            let accept = delta <= 0.0 || rng.random::<f64>() < (-delta / temp).exp();
            if accept {
                let sign = if bits[b] == 0 { 1.0 } else { -1.0 };
                bits[b] ^= 1;
                for &(v, w) in &adj[b] {
                    f[v] += sign * w;
                }
            }
        }
        temp *= ratio;
    }
    bits
}

impl Sampler for Annealer {
    fn sample(&self, q: &Qubo, params: &SampleParams) -> Result<SampleSet, SamplerError> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); q.n()];
        for (i, j, w) in q.iter_quad() {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        let t0 = q.max_abs_coeff().max(1e-6);
        let t1 = 1e-3 * t0;
        let reads = params.reads.max(1) as usize;
        let sweeps = params.sweeps;
        let seed = params.seed;
        let all = map_indexed(self.exec, reads, |r| {
            one_read(q, &adj, sweeps, t0, t1, mix_seed(seed, r as u64))
        });
        let mut counts: BTreeMap<Vec<u8>, (f64, u32)> = BTreeMap::new();
        for bits in all {
            let e = q.energy(&bits);
            counts.entry(bits).and_modify(|(_, c)| *c += 1).or_insert((e, 1));
        }
        Ok(SampleSet::from_counts(counts))
    }
}
