//! QUBO <-> Ising translation via x = (s + 1) / 2.

use super::Qubo;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct Ising {
    pub h: Vec<f64>,
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl Ising {
    /// Energy over spins in {-1, +1}.
    pub fn energy(&self, spins: &[i8]) -> f64 {
        let mut e = self.offset;
        for (i, &hi) in self.h.iter().enumerate() {
            e += hi * spins[i] as f64;
        }
        for (&(i, j), &w) in &self.j {
            e += w * (spins[i] as f64) * (spins[j] as f64);
        }
        e
    }
}

/// Substituting x_i = (s_i + 1)/2 term by term:
///   l x      -> l/2 s            + l/2
///   q x x'   -> q/4 s s' + q/4 s + q/4 s' + q/4
pub fn to_ising(q: &Qubo) -> Ising {
    let n = q.n();
    let mut h = vec![0.0; n];
    let mut jj: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut offset = q.offset();
    for (i, &l) in q.linear().iter().enumerate() {
        h[i] += 0.5 * l;
        offset += 0.5 * l;
    }
    for (i, j, w) in q.iter_quad() {
        *jj.entry((i, j)).or_insert(0.0) += 0.25 * w;
        h[i] += 0.25 * w;
        h[j] += 0.25 * w;
        offset += 0.25 * w;
    }
    Ising { h, j: jj, offset }
}
