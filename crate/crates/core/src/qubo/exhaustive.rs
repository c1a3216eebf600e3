//! Exact QUBO minimization by enumeration.
//!
//! Two paths. [`exhaustive_solve`] walks all 2^n assignments in Gray-code
//! order with incremental energy updates and keeps the lowest-energy
//! states. [`structured_minimum`] exploits the variable roles the
//! selection encodings produce: slack/coverage bits split into blocks
//! that interact with the decision bits only through one shared coupling
//! pattern per block, so each block can be minimized from a small table
//! per count of active decisions and only the decision bits need full
//! enumeration.

use super::{Qubo, Sample, SampleSet, SamplerError, VarRole};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, BTreeMap};

/// Bit k of the mask is position k of the bit vector; the first differing
/// position decides, 0 before 1.
fn lex_less(a: u64, b: u64) -> bool {
    if a == b {
        return false;
    }
    let k = (a ^ b).trailing_zeros();
    (a >> k) & 1 == 0
}

/// Max-heap item so the worst kept state (highest energy, then
/// lexicographically largest bits) sits on top.
struct Worst {
    energy: f64,
    mask: u64,
}

impl PartialEq for Worst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Worst {}
impl PartialOrd for Worst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Worst {
    fn cmp(&self, other: &Self) -> Ordering {
        self.energy.total_cmp(&other.energy).then_with(|| {
            if self.mask == other.mask {
                Ordering::Equal
            } else if lex_less(self.mask, other.mask) {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

fn mask_to_bits(mask: u64, n: usize) -> Vec<u8> {
    (0..n).map(|k| ((mask >> k) & 1) as u8).collect()
}

/// Enumerate every assignment and return the `keep` lowest-energy ones.
pub fn exhaustive_solve(q: &Qubo, cap: usize, keep: usize) -> Result<SampleSet, SamplerError> {
    let n = q.n();
    if n > cap {
        return Err(SamplerError::SizeCap { n, cap });
    }
    assert!(n <= 48, "enumeration over {n} bits is never viable");
    let keep = keep.max(1);
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, j, w) in q.iter_quad() {
        adj[i].push((j, w));
        adj[j].push((i, w));
    }
    // f[b] = linear[b] + sum of quadratic weights to active neighbors:
    // the energy change of raising bit b.
    let mut f: Vec<f64> = q.linear().to_vec();
    let mut bits = vec![0u8; n];
    let mut energy = q.offset();
    let mut mask = 0u64;
    let mut heap: BinaryHeap<Worst> = BinaryHeap::new();
    heap.push(Worst { energy, mask });
    for k in 1u64..(1u64 << n) {
        let b = k.trailing_zeros() as usize;
        let delta = if bits[b] == 0 { 1.0 } else { -1.0 };
        energy += delta * f[b];
        bits[b] ^= 1;
        mask ^= 1 << b;
        for &(v, w) in &adj[b] {
            f[v] += delta * w;
        }
        let cand = Worst { energy, mask };
        if heap.len() < keep {
            heap.push(cand);
        } else if let Some(top) = heap.peek() {
            if cand < *top {
                heap.pop();
                heap.push(cand);
            }
        }
    }
    let mut counts = BTreeMap::new();
    for w in heap {
        let bits = mask_to_bits(w.mask, n);
        // Exact recompute shields the ranking from incremental drift.
        let e = q.energy(&bits);
        counts.insert(bits, (e, 1u32));
    }
    Ok(SampleSet::from_counts(counts))
}

struct Block {
    /// Member variable indices, ascending.
    vars: Vec<usize>,
    /// Which decision positions couple into this block.
    active: Vec<bool>,
    /// table[t] = (min energy, argmin member mask) given t active
    /// coupled decisions selected.
    table: Vec<(f64, u64)>,
}

/// Exact global minimum using the role structure; None when the QUBO does
/// not fit the shape (then callers fall back to plain enumeration).
pub fn structured_minimum(q: &Qubo, decision_cap: usize) -> Option<Sample> {
    let n = q.n();
    let mut d_idx: Vec<usize> = Vec::new();
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    const CARD_KEY: u64 = u64::MAX;
    for (v, role) in q.roles().iter().enumerate() {
        match role {
            VarRole::Decision(_) => d_idx.push(v),
            VarRole::Coverage(j) => groups.entry(*j as u64).or_default().push(v),
            VarRole::ColumnSlack { col, .. } => groups.entry(*col as u64).or_default().push(v),
            VarRole::CardinalitySlack { .. } => groups.entry(CARD_KEY).or_default().push(v),
        }
    }
    if groups.is_empty() || d_idx.len() > decision_cap || d_idx.len() > 32 {
        return None;
    }
    // Class per variable: usize::MAX for decisions, group ordinal else.
    let mut class = vec![usize::MAX; n];
    let group_list: Vec<&Vec<usize>> = groups.values().collect();
    for (g, members) in group_list.iter().enumerate() {
        for &v in *members {
            class[v] = g;
        }
    }
    for (i, j, _) in q.iter_quad() {
        let (ci, cj) = (class[i], class[j]);
        if ci != usize::MAX && cj != usize::MAX && ci != cj {
            return None;
        }
    }
    let dpos: BTreeMap<usize, usize> = d_idx.iter().enumerate().map(|(p, &v)| (v, p)).collect();
    let nd = d_idx.len();

    let mut blocks: Vec<Block> = Vec::new();
    for members in &group_list {
        let vars = (*members).clone();
        let nb = vars.len();
        assert!(nb <= 20, "slack block unexpectedly large");
        let vpos: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        // Collect decision cross patterns; they must all equal one shared
        // pattern (bitwise) or be absent, which is exactly what the
        // squared balance terms produce.
        let mut patterns: Vec<Vec<f64>> = vec![vec![0.0; nb]; nd];
        for (i, j, w) in q.iter_quad() {
            let (d, v) = if dpos.contains_key(&i) && vpos.contains_key(&j) {
                (dpos[&i], vpos[&j])
            } else if dpos.contains_key(&j) && vpos.contains_key(&i) {
                (dpos[&j], vpos[&i])
            } else {
                continue;
            };
            patterns[d][v] += w;
        }
        let mut reference: Option<Vec<f64>> = None;
        let mut active = vec![false; nd];
        for (d, pat) in patterns.iter().enumerate() {
            if pat.iter().all(|&w| w == 0.0) {
                continue;
            }
            match &reference {
                None => reference = Some(pat.clone()),
                Some(r) => {
                    if r != pat {
                        return None;
                    }
                }
            }
            active[d] = true;
        }
        let g = reference.unwrap_or_else(|| vec![0.0; nb]);
        let t_max = active.iter().filter(|&&a| a).count();
        // Intra-block quadratic terms, in member coordinates.
        let mut intra: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, w) in q.iter_quad() {
            if let (Some(&pi), Some(&pj)) = (vpos.get(&i), vpos.get(&j)) {
                intra.push((pi, pj, w));
            }
        }
        let lin: Vec<f64> = vars.iter().map(|&v| q.linear()[v]).collect();
        let mut table = Vec::with_capacity(t_max + 1);
        for t in 0..=t_max {
            let mut best = (f64::INFINITY, 0u64);
            for m in 0u64..(1u64 << nb) {
                let mut e = 0.0;
                for k in 0..nb {
                    if (m >> k) & 1 == 1 {
                        e += lin[k] + (t as f64) * g[k];
                    }
                }
                for &(pi, pj, w) in &intra {
                    if (m >> pi) & 1 == 1 && (m >> pj) & 1 == 1 {
                        e += w;
                    }
                }
                if e < best.0 || (e == best.0 && lex_less(m, best.1)) {
                    best = (e, m);
                }
            }
            table.push(best);
        }
        blocks.push(Block { vars, active, table });
    }

    // Decision-only adjacency for the incremental Gray walk.
    let mut dadj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nd];
    for (i, j, w) in q.iter_quad() {
        if let (Some(&pi), Some(&pj)) = (dpos.get(&i), dpos.get(&j)) {
            dadj[pi].push((pj, w));
            dadj[pj].push((pi, w));
        }
    }
    let mut f: Vec<f64> = d_idx.iter().map(|&v| q.linear()[v]).collect();
    let mut dbits = vec![0u8; nd];
    let mut base = q.offset();
    let mut t: Vec<usize> = vec![0; blocks.len()];
    let mut dmask = 0u64;

    let assemble = |dmask: u64, t: &[usize]| -> Vec<u8> {
        let mut bits = vec![0u8; n];
        for (p, &v) in d_idx.iter().enumerate() {
            bits[v] = ((dmask >> p) & 1) as u8;
        }
        for (b, blk) in blocks.iter().enumerate() {
            let m = blk.table[t[b]].1;
            for (k, &v) in blk.vars.iter().enumerate() {
                bits[v] = ((m >> k) & 1) as u8;
            }
        }
        bits
    };

    let mut best_total = base + blocks.iter().zip(&t).map(|(b, &tb)| b.table[tb].0).sum::<f64>();
    let mut best_bits = assemble(dmask, &t);
    for k in 1u64..(1u64 << nd) {
        let p = k.trailing_zeros() as usize;
        let delta = if dbits[p] == 0 { 1.0 } else { -1.0 };
        base += delta * f[p];
        dbits[p] ^= 1;
        dmask ^= 1 << p;
        for &(v, w) in &dadj[p] {
            f[v] += delta * w;
        }
        for (b, blk) in blocks.iter().enumerate() {
            if blk.active[p] {
                if delta > 0.0 {
                    t[b] += 1;
                } else {
                    t[b] -= 1;
                }
            }
        }
        let total = base + blocks.iter().zip(&t).map(|(b, &tb)| b.table[tb].0).sum::<f64>();
        if total < best_total {
            best_total = total;
            best_bits = assemble(dmask, &t);
        } else if total == best_total {
            let cand = assemble(dmask, &t);
            if cand < best_bits {
                best_bits = cand;
            }
        }
    }
    let energy = q.energy(&best_bits);
    Some(Sample { bits: best_bits, energy, occurrences: 1 })
}
