//! Branch and bound for mixed 0-1 linear programs, producing a pool of
//! distinct integral solutions rather than a single optimum.
//!
//! The tree shares one warm [`Tableau`]: moving between nodes applies the
//! bound-fix diff and runs the dual simplex, falling back to a cold solve
//! if the repair stalls. Exploration is best-first on the parent LP bound
//! and keeps nodes alive up to a configurable slack above the incumbent so
//! near-optimal integral solutions survive into the pool. If the tree
//! closes with spare pool capacity, recorded solutions are probed by
//! single-bit flips (each probe is one more LP) to fill the pool with
//! neighbors.

use crate::lp::{certified, LinearProgram, LpError, LpOutcome, Sense, SimplexOptions, Tableau};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use thiserror::Error;

/// Relative tolerance for certifying warm-tableau verdicts against the
/// node data; see [`crate::lp::certified`].
const CERT_REL: f64 = 1e-7;

#[derive(Clone, Copy, Debug)]
pub struct MilpOptions {
    /// Maximum number of pool entries returned.
    pub pool_size: usize,
    /// Relative slack above the incumbent objective within which nodes
    /// stay open and integral solutions are recorded.
    pub pool_gap: f64,
    /// Hard cap on processed nodes (tree nodes plus flip probes).
    pub node_budget: usize,
    /// A binary counts as integral within this distance of 0 or 1.
    pub int_tol: f64,
    pub simplex: SimplexOptions,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            pool_size: 10,
            pool_gap: 0.2,
            node_budget: 10_000,
            int_tol: 1e-6,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PoolEntry {
    /// Full assignment with binaries snapped to exact 0.0 / 1.0.
    pub assignment: Vec<f64>,
    /// Binary values only, in the order the binary indices were given.
    pub binary: Vec<f64>,
    pub objective: f64,
    /// True only on entry 0, and only when the search ran to completion.
    pub proven_optimal: bool,
}

#[derive(Clone, Debug)]
pub struct MilpResult {
    /// Distinct integral solutions, ascending objective, ties broken by
    /// lexicographically smallest binary assignment.
    pub pool: Vec<PoolEntry>,
    /// False when the node budget stopped the search first.
    pub complete: bool,
    pub nodes: usize,
}

#[derive(Clone, Debug)]
pub enum MilpOutcome {
    Feasible(MilpResult),
    Infeasible,
}

#[derive(Debug, Error)]
pub enum MilpError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("relaxation is unbounded")]
    UnboundedRelaxation,
    #[error("node budget exhausted before any integral solution")]
    BudgetExhausted,
}

struct Node {
    fixes: Vec<(usize, u8)>,
    bound: f64,
    seq: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap; reverse so the smallest bound pops first,
    // ties resolved by insertion order.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Reusable branch-and-bound driver. Rows appended via [`Self::add_row`]
/// carry over to later [`Self::solve`] calls on the same warm tableau.
pub struct BranchAndBound {
    lp: LinearProgram,
    /// `lp` with the current node's bound fixes applied; the pristine data
    /// every warm tableau verdict is certified against.
    node_lp: LinearProgram,
    binaries: Vec<usize>,
    opts: MilpOptions,
    tableau: Tableau,
    /// Current bound-fix state of the tableau, indexed like `binaries`.
    cur: Vec<Option<u8>>,
}

impl BranchAndBound {
    pub fn new(lp: LinearProgram, binaries: Vec<usize>, opts: MilpOptions) -> Self {
        lp.validate().expect("malformed program");
        let mut seen = HashSet::new();
        for &j in &binaries {
            assert!(j < lp.n_vars(), "binary index out of range");
            assert!(
                lp.lower[j] >= 0.0 && lp.upper[j] <= 1.0,
                "binary variable {j} must have bounds within [0, 1]"
            );
            assert!(seen.insert(j), "duplicate binary index {j}");
        }
        let tableau = Tableau::from_program(&lp, opts.simplex);
        let cur = vec![None; binaries.len()];
        BranchAndBound { node_lp: lp.clone(), lp, binaries, opts, tableau, cur }
    }

    pub fn program(&self) -> &LinearProgram {
        &self.lp
    }

    /// Append a row to both the program and the live tableau.
    pub fn add_row(&mut self, coeffs: &[f64], sense: Sense, rhs: f64) {
        self.lp.add_row(coeffs, sense, rhs);
        self.node_lp.add_row(coeffs, sense, rhs);
        self.tableau.add_row(coeffs, sense, rhs);
    }

    /// Move the tableau to `target` fixes and reoptimize. Warm verdicts
    /// count only when the pristine node data certifies them; anything
    /// else (a stalled repair, a numerical breakdown, or a confident
    /// answer from a drifted basis) is re-solved from scratch, which also
    /// replaces the rotten tableau.
    fn solve_at(&mut self, target: &[Option<u8>]) -> Result<LpOutcome, MilpError> {
        for (k, (&next, &prev)) in target.iter().zip(self.cur.iter()).enumerate() {
            if next != prev {
                let j = self.binaries[k];
                let (l, u) = match next {
                    Some(v) => (v as f64, v as f64),
                    None => (self.lp.lower[j], self.lp.upper[j]),
                };
                self.tableau.set_var_bounds(j, l, u);
                self.node_lp.lower[j] = l;
                self.node_lp.upper[j] = u;
            }
        }
        self.cur.copy_from_slice(target);
        if let Ok(out) = self.tableau.dual_reoptimize() {
            if certified(&self.node_lp, &self.node_lp.rhs, &out, CERT_REL) {
                return Ok(out);
            }
        }
        let mut fresh = Tableau::from_program(&self.node_lp, self.opts.simplex);
        let out = fresh.primal_solve()?;
        self.tableau = fresh;
        Ok(out)
    }

    pub fn solve(&mut self) -> Result<MilpOutcome, MilpError> {
        let p = self.binaries.len();
        let opts = self.opts;
        let mut seq = 0u64;
        let mut heap = BinaryHeap::new();
        heap.push(Node { fixes: Vec::new(), bound: f64::NEG_INFINITY, seq });
        let mut incumbent = f64::INFINITY;
        let mut recorded: Vec<PoolEntry> = Vec::new();
        let mut recorded_keys: HashSet<Vec<u8>> = HashSet::new();
        let mut nodes = 0usize;
        let mut complete = true;
        let cutoff = |inc: f64| {
            if inc.is_finite() {
                inc + opts.pool_gap * inc.abs().max(1.0)
            } else {
                f64::INFINITY
            }
        };

        while let Some(node) = heap.pop() {
            if node.bound > cutoff(incumbent) {
                break;
            }
            nodes += 1;
            if nodes > opts.node_budget {
                complete = false;
                break;
            }
            let mut target = vec![None; p];
            for &(k, v) in &node.fixes {
                target[k] = Some(v);
            }
            let sol = match self.solve_at(&target)? {
                LpOutcome::Optimal(s) => s,
                LpOutcome::Infeasible { .. } => continue,
                LpOutcome::Unbounded => return Err(MilpError::UnboundedRelaxation),
            };
            if sol.objective > cutoff(incumbent) {
                continue;
            }
            // Most fractional unfixed binary, ties to the lowest index.
            let mut branch: Option<(usize, f64)> = None;
            for (k, &j) in self.binaries.iter().enumerate() {
                let v = sol.primal[j];
                let dist = (v - v.round()).abs();
                if dist > opts.int_tol {
                    if branch.map_or(true, |(_, d)| dist > d) {
                        branch = Some((k, dist));
                    }
                }
            }
            match branch {
                None => {
                    let entry = self.make_entry(&sol.primal);
                    if entry.objective < incumbent {
                        incumbent = entry.objective;
                    }
                    recorded_keys.insert(binary_key(&entry.binary));
                    recorded.push(entry);
                }
                Some((k, _)) => {
                    for v in [0u8, 1u8] {
                        let mut fixes = node.fixes.clone();
                        fixes.push((k, v));
                        seq += 1;
                        heap.push(Node { fixes, bound: sol.objective, seq });
                    }
                }
            }
        }

        if complete && !recorded.is_empty() && recorded_keys.len() < opts.pool_size {
            let keep = cutoff(incumbent);
            self.flip_probe(&mut recorded, &mut recorded_keys, &mut incumbent, &mut nodes, keep)?;
        }

        if recorded.is_empty() {
            return if complete {
                Ok(MilpOutcome::Infeasible)
            } else {
                Err(MilpError::BudgetExhausted)
            };
        }
        let keep = cutoff(incumbent);
        recorded.retain(|e| e.objective <= keep);
        recorded.sort_by(|a, b| {
            a.objective
                .total_cmp(&b.objective)
                .then_with(|| binary_key(&a.binary).cmp(&binary_key(&b.binary)))
        });
        let mut seen = HashSet::new();
        recorded.retain(|e| seen.insert(binary_key(&e.binary)));
        recorded.truncate(opts.pool_size);
        if let Some(first) = recorded.first_mut() {
            first.proven_optimal = complete;
        }
        Ok(MilpOutcome::Feasible(MilpResult { pool: recorded, complete, nodes }))
    }

    /// Fill spare pool capacity by re-solving at single-bit flips of the
    /// recorded assignments (breadth-first over new finds).
    fn flip_probe(
        &mut self,
        recorded: &mut Vec<PoolEntry>,
        recorded_keys: &mut HashSet<Vec<u8>>,
        incumbent: &mut f64,
        nodes: &mut usize,
        keep: f64,
    ) -> Result<(), MilpError> {
        let p = self.binaries.len();
        let mut queue: Vec<Vec<u8>> = recorded.iter().map(|e| binary_key(&e.binary)).collect();
        queue.sort();
        queue.dedup();
        let mut probed: HashSet<Vec<u8>> = queue.iter().cloned().collect();
        let mut qi = 0;
        'outer: while qi < queue.len() && recorded_keys.len() < self.opts.pool_size {
            let base = queue[qi].clone();
            qi += 1;
            for k in 0..p {
                if recorded_keys.len() >= self.opts.pool_size {
                    break 'outer;
                }
                let mut cand = base.clone();
                cand[k] ^= 1;
                if !probed.insert(cand.clone()) {
                    continue;
                }
                *nodes += 1;
                if *nodes > self.opts.node_budget {
                    break 'outer;
                }
                let target: Vec<Option<u8>> = cand.iter().map(|&b| Some(b)).collect();
                match self.solve_at(&target)? {
                    LpOutcome::Optimal(s) if s.objective <= keep => {
                        let entry = self.make_entry(&s.primal);
                        if entry.objective < *incumbent {
                            *incumbent = entry.objective;
                        }
                        recorded_keys.insert(cand.clone());
                        recorded.push(entry);
                        queue.push(cand);
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    fn make_entry(&self, primal: &[f64]) -> PoolEntry {
        let mut assignment = primal.to_vec();
        for &j in &self.binaries {
            assignment[j] = assignment[j].round().clamp(0.0, 1.0);
        }
        let binary: Vec<f64> = self.binaries.iter().map(|&j| assignment[j]).collect();
        let objective = crate::dense::dot(&self.lp.objective, &assignment);
        PoolEntry { assignment, binary, objective, proven_optimal: false }
    }
}

fn binary_key(binary: &[f64]) -> Vec<u8> {
    binary.iter().map(|&v| v as u8).collect()
}

/// One-shot solve.
pub fn solve_milp(
    lp: &LinearProgram,
    binaries: &[usize],
    opts: MilpOptions,
) -> Result<MilpOutcome, MilpError> {
    BranchAndBound::new(lp.clone(), binaries.to_vec(), opts).solve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool_of(out: MilpOutcome) -> Vec<PoolEntry> {
        match out {
            MilpOutcome::Feasible(r) => {
                assert!(r.complete, "expected a completed search");
                r.pool
            }
            MilpOutcome::Infeasible => panic!("unexpected infeasible"),
        }
    }

    #[test]
    fn knapsack_optimum_is_found() {
        // max 8a + 11b + 6c + 4d s.t. 5a + 7b + 4c + 3d <= 14.
        let mut lp = LinearProgram::new(4);
        lp.objective = vec![-8.0, -11.0, -6.0, -4.0];
        lp.upper = vec![1.0; 4];
        lp.add_row(&[5.0, 7.0, 4.0, 3.0], Sense::Le, 14.0);
        let pool = pool_of(solve_milp(&lp, &[0, 1, 2, 3], MilpOptions::default()).unwrap());
        assert!((pool[0].objective + 21.0).abs() < 1e-9, "got {}", pool[0].objective);
        assert_eq!(pool[0].binary, vec![0.0, 1.0, 1.0, 1.0]);
        assert!(pool[0].proven_optimal);
    }

    #[test]
    fn flip_probes_fill_the_pool_when_the_root_is_integral() {
        // Root relaxation lands on (1, 0); the two remaining feasible
        // assignments are only reachable through flip probes.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, -1.0];
        lp.upper = vec![1.0, 1.0];
        lp.add_row(&[1.0, 1.0], Sense::Le, 1.0);
        let opts = MilpOptions { pool_gap: 2.0, ..MilpOptions::default() };
        let pool = pool_of(solve_milp(&lp, &[0, 1], opts).unwrap());
        let got: Vec<(Vec<f64>, f64)> =
            pool.iter().map(|e| (e.binary.clone(), e.objective)).collect();
        assert_eq!(
            got,
            vec![
                (vec![0.0, 1.0], -1.0),
                (vec![1.0, 0.0], -1.0),
                (vec![0.0, 0.0], 0.0),
            ]
        );
    }

    #[test]
    fn contradictory_binaries_are_infeasible() {
        let mut lp = LinearProgram::new(2);
        lp.upper = vec![1.0, 1.0];
        lp.add_row(&[1.0, 1.0], Sense::Ge, 3.0);
        match solve_milp(&lp, &[0, 1], MilpOptions::default()).unwrap() {
            MilpOutcome::Infeasible => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn pool_respects_the_gap_threshold() {
        // Assignments cost 0, 10, 20, 30; with a 50% gap over optimum 0
        // within max(1, |0|) = 1 slack only the optimum survives.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![10.0, 20.0];
        lp.upper = vec![1.0, 1.0];
        let opts = MilpOptions { pool_gap: 0.5, ..MilpOptions::default() };
        let pool = pool_of(solve_milp(&lp, &[0, 1], opts).unwrap());
        assert_eq!(pool.len(), 1);
        assert_eq!(pool[0].binary, vec![0.0, 0.0]);
    }

    #[test]
    fn continuous_part_follows_the_binaries() {
        // min x + 5y s.t. x >= 2 - 2y, x >= 0: y=0 gives 2, y=1 gives 5.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 5.0];
        lp.upper = vec![f64::INFINITY, 1.0];
        lp.add_row(&[1.0, 2.0], Sense::Ge, 2.0);
        let pool = pool_of(solve_milp(&lp, &[1], MilpOptions::default()).unwrap());
        assert!((pool[0].objective - 2.0).abs() < 1e-9);
        assert_eq!(pool[0].binary, vec![0.0]);
        assert!((pool[0].assignment[0] - 2.0).abs() < 1e-9);
    }
}
