//! Bounded-variable primal/dual simplex over a dense tableau.
//!
//! Every row `i` of the program gets a logical variable `L_i` with
//! coefficient +1, so the system is `A x + L = rhs` with the row sense
//! encoded purely in the logical's bounds:
//!
//!   `>=` row:  L in (-inf, 0]
//!   `<=` row:  L in [0, +inf)
//!   `=`  row:  L fixed at 0
//!
//! The initial basis is all logicals, so columns `n..n+m` of the tableau
//! always hold B^-1 verbatim. That block yields duals (y_i = -dj[L_i]),
//! Farkas rays (signed sums of its rows), and cheap rhs replacement.
//!
//! The same tableau supports warm restarts: callers may change the rhs,
//! tighten or relax variable bounds, or append rows, then call
//! [`Tableau::dual_reoptimize`]. Reduced costs stay dual-feasible under
//! all three edits, so the dual simplex resumes from the prior basis.

use super::{LinearProgram, LpError, LpOutcome, LpSolution, Sense, SimplexOptions};

const AT_LOWER: i32 = -1;
const AT_UPPER: i32 = -2;
const FREE: i32 = -3;

/// Step sizes at or below this count as degenerate pivots.
const DEGEN_STEP: f64 = 1e-9;
/// Coefficients at or below this are treated as exact zeros in updates.
const DROP_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Tableau {
    m: usize,
    n: usize,
    ncols: usize,
    /// Row-major m x ncols; invariant: equals B^-1 [A | I].
    a: Vec<f64>,
    /// Values of the basic variables, row by row.
    xb: Vec<f64>,
    /// Reduced costs; exactly 0.0 at basic columns.
    dj: Vec<f64>,
    basis: Vec<usize>,
    /// Per variable: basis row if >= 0, else AT_LOWER / AT_UPPER / FREE.
    loc: Vec<i32>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    opts: SimplexOptions,
    scratch: Vec<f64>,
    wcol: Vec<f64>,
    degen_run: u32,
    bland: bool,
    pivots: usize,
}

enum Phase {
    Feasibility,
    Cost,
}

enum RatioHit {
    Row { r: usize, target: f64, leave_to: i32 },
    SpanFlip,
    None,
}

impl Tableau {
    pub fn from_program(lp: &LinearProgram, opts: SimplexOptions) -> Self {
        let m = lp.n_rows();
        let n = lp.n_vars();
        let ncols = n + m;
        let mut a = vec![0.0; m * ncols];
        for i in 0..m {
            let row = &mut a[i * ncols..(i + 1) * ncols];
            if n > 0 {
                row[..n].copy_from_slice(lp.constraints.row(i));
            }
            row[n + i] = 1.0;
        }
        let mut lower = Vec::with_capacity(ncols);
        let mut upper = Vec::with_capacity(ncols);
        lower.extend_from_slice(&lp.lower);
        upper.extend_from_slice(&lp.upper);
        for s in &lp.senses {
            let (l, u) = logical_bounds(*s);
            lower.push(l);
            upper.push(u);
        }
        let mut cost = vec![0.0; ncols];
        cost[..n].copy_from_slice(&lp.objective);
        let mut loc = Vec::with_capacity(ncols);
        for j in 0..n {
            loc.push(initial_state(lower[j], upper[j]));
        }
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            loc.push(i as i32);
            basis.push(n + i);
        }
        let mut t = Tableau {
            m,
            n,
            ncols,
            a,
            xb: vec![0.0; m],
            dj: cost.clone(),
            basis,
            loc,
            lower,
            upper,
            cost,
            rhs: lp.rhs.clone(),
            opts,
            scratch: vec![0.0; ncols],
            wcol: vec![0.0; m],
            degen_run: 0,
            bland: false,
            pivots: 0,
        };
        t.recompute_xb();
        t
    }

    pub fn n_rows(&self) -> usize {
        self.m
    }

    pub fn n_structural(&self) -> usize {
        self.n
    }

    pub fn pivot_count(&self) -> usize {
        self.pivots
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.ncols..(i + 1) * self.ncols]
    }

    /// Current value of any variable, basic or not.
    fn val(&self, j: usize) -> f64 {
        match self.loc[j] {
            AT_LOWER => self.lower[j],
            AT_UPPER => self.upper[j],
            FREE => 0.0,
            r => self.xb[r as usize],
        }
    }

    pub fn structural_values(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.val(j)).collect()
    }

    pub fn duals(&self) -> Vec<f64> {
        (0..self.m).map(|i| -self.dj[self.n + i]).collect()
    }

    pub fn objective_value(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.val(j)).sum()
    }

    /// xb = B^-1 rhs - sum over nonbasic j of (B^-1 A_j) value_j.
    /// The logical block of each row is that row of B^-1, so the first
    /// term is a contiguous dot product. Nonbasic logicals always sit at
    /// value 0, so only structural columns appear in the second term.
    fn recompute_xb(&mut self) {
        let nz: Vec<(usize, f64)> = (0..self.n)
            .filter(|&j| self.loc[j] < 0)
            .map(|j| (j, self.val(j)))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        for i in 0..self.m {
            let row = &self.a[i * self.ncols..(i + 1) * self.ncols];
            let mut v = crate::dense::dot(&row[self.n..], &self.rhs);
            for &(j, xj) in &nz {
                v -= row[j] * xj;
            }
            self.xb[i] = v;
        }
    }

    fn worst_primal_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m {
            let v = self.basis[i];
            let r = (self.lower[v] - self.xb[i]).max(self.xb[i] - self.upper[v]);
            if r > worst {
                worst = r;
            }
        }
        worst
    }

    /// Fresh two-phase primal solve from the current state.
    pub fn primal_solve(&mut self) -> Result<LpOutcome, LpError> {
        self.degen_run = 0;
        self.bland = false;
        for round in 0..3 {
            if let Some(out) = self.phase_feasibility()? {
                return Ok(out);
            }
            if let Some(out) = self.phase_cost()? {
                return Ok(out);
            }
            // Guard against drift accumulated over many pivots: refresh
            // the basic values and re-enter the loop if anything slipped.
            self.recompute_xb();
            if self.worst_primal_violation() <= self.opts.tol_feas || round == 2 {
                return Ok(self.optimal_outcome());
            }
        }
        unreachable!()
    }

    /// Phase 1. Returns Some(Infeasible) when it proves infeasibility,
    /// None when a feasible basis was reached.
    fn phase_feasibility(&mut self) -> Result<Option<LpOutcome>, LpError> {
        loop {
            let (below, above) = self.violated_rows();
            if below.is_empty() && above.is_empty() {
                return Ok(None);
            }
            // Slope of the total violation with respect to increasing
            // each nonbasic variable.
            let mut slope = vec![0.0; self.ncols];
            for &i in &below {
                let row = self.row(i);
                for (s, &v) in slope.iter_mut().zip(row) {
                    *s += v;
                }
            }
            for &i in &above {
                let row = self.row(i);
                for (s, &v) in slope.iter_mut().zip(row) {
                    *s -= v;
                }
            }
            let entering = self.pick_entering(&slope);
            let Some((e, dir)) = entering else {
                // Same guard as the dual exit: only a violation that
                // survives a refresh of the basic values proves anything.
                // Identical refreshed sets reuse this round's slope
                // verdict; changed sets retry, and the retry terminates
                // because a refresh with no pivot in between is a no-op.
                self.recompute_xb();
                let (below2, above2) = self.violated_rows();
                if below2.is_empty() && above2.is_empty() {
                    return Ok(None);
                }
                if below2 == below && above2 == above {
                    return Ok(Some(self.infeasible_outcome(&below, &above)));
                }
                continue;
            };
            self.load_column(e);
            match self.ratio_test(e, dir, Phase::Feasibility) {
                RatioHit::Row { r, target, leave_to } => {
                    let step = dir * ((self.xb[r] - target) / (self.wcol[r] * dir)).max(0.0);
                    self.apply_pivot(r, e, step, leave_to)?;
                }
                RatioHit::SpanFlip => self.apply_span_flip(e, dir)?,
                RatioHit::None => {
                    return Err(LpError::Numerical(
                        "violation slope negative but no blocking bound".into(),
                    ))
                }
            }
        }
    }

    /// Phase 2 from a primal-feasible basis. Returns Some(Unbounded) or
    /// None when optimal.
    fn phase_cost(&mut self) -> Result<Option<LpOutcome>, LpError> {
        loop {
            let dj = std::mem::take(&mut self.dj);
            let entering = self.pick_entering(&dj);
            self.dj = dj;
            let Some((e, dir)) = entering else {
                return Ok(None);
            };
            self.load_column(e);
            match self.ratio_test(e, dir, Phase::Cost) {
                RatioHit::Row { r, target, leave_to } => {
                    let step = dir * ((self.xb[r] - target) / (self.wcol[r] * dir)).max(0.0);
                    self.apply_pivot(r, e, step, leave_to)?;
                }
                RatioHit::SpanFlip => self.apply_span_flip(e, dir)?,
                RatioHit::None => return Ok(Some(LpOutcome::Unbounded)),
            }
        }
    }

    fn violated_rows(&self) -> (Vec<usize>, Vec<usize>) {
        let tol = self.opts.tol_feas;
        let mut below = Vec::new();
        let mut above = Vec::new();
        for i in 0..self.m {
            let v = self.basis[i];
            if self.xb[i] < self.lower[v] - tol {
                below.push(i);
            } else if self.xb[i] > self.upper[v] + tol {
                above.push(i);
            }
        }
        (below, above)
    }

    /// Dantzig pricing on `score` (Bland's rule once degeneracy persists).
    /// Returns the entering column and its movement direction.
    fn pick_entering(&self, score: &[f64]) -> Option<(usize, f64)> {
        let tol = self.opts.tol_dual;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ncols {
            let state = self.loc[j];
            if state >= 0 || self.lower[j] == self.upper[j] {
                continue;
            }
            let s = score[j];
            let dir = match state {
                AT_LOWER if s < -tol => 1.0,
                AT_UPPER if s > tol => -1.0,
                FREE if s < -tol => 1.0,
                FREE if s > tol => -1.0,
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            match best {
                Some((_, _, mag)) if s.abs() <= mag => {}
                _ => best = Some((j, dir, s.abs())),
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn load_column(&mut self, e: usize) {
        for i in 0..self.m {
            self.wcol[i] = self.a[i * self.ncols + e];
        }
    }

    /// Shared ratio test. `w = wcol * dir` is the rate at which each basic
    /// value falls as the entering variable moves; rows block where a
    /// basic meets a bound, and in phase 1 a violated row also blocks as
    /// soon as it becomes feasible (short step).
    fn ratio_test(&self, e: usize, dir: f64, phase: Phase) -> RatioHit {
        let tol = self.opts.tol_feas;
        let eps = self.opts.pivot_eps;
        let mut t_min = f64::INFINITY;
        let mut hit: Option<(usize, f64, i32, f64)> = None; // r, target, leave_to, |w|
        for i in 0..self.m {
            let w = self.wcol[i] * dir;
            if w.abs() <= eps {
                continue;
            }
            let v = self.basis[i];
            let (lb, ub) = (self.lower[v], self.upper[v]);
            let x = self.xb[i];
            let (t, target, leave_to) = if matches!(phase, Phase::Feasibility) && x < lb - tol {
                if w < 0.0 {
                    ((x - lb) / w, lb, AT_LOWER)
                } else {
                    continue;
                }
            } else if matches!(phase, Phase::Feasibility) && x > ub + tol {
                if w > 0.0 {
                    ((x - ub) / w, ub, AT_UPPER)
                } else {
                    continue;
                }
            } else if w > 0.0 {
                if lb.is_finite() {
                    ((x - lb) / w, lb, AT_LOWER)
                } else {
                    continue;
                }
            } else if ub.is_finite() {
                ((x - ub) / w, ub, AT_UPPER)
            } else {
                continue;
            };
            let t = t.max(0.0);
            let better = match hit {
                None => t < t_min,
                Some((hr, _, _, hw)) => {
                    t < t_min - DEGEN_STEP
                        || (t <= t_min + DEGEN_STEP
                            && if self.bland {
                                self.basis[i] < self.basis[hr]
                            } else {
                                w.abs() > hw
                            })
                }
            };
            if better {
                t_min = t.min(t_min);
                hit = Some((i, target, leave_to, w.abs()));
            }
        }
        let span = self.upper[e] - self.lower[e];
        if span.is_finite() && span < t_min {
            return RatioHit::SpanFlip;
        }
        match hit {
            Some((r, target, leave_to, _)) => RatioHit::Row { r, target, leave_to },
            None => {
                if span.is_finite() {
                    RatioHit::SpanFlip
                } else {
                    RatioHit::None
                }
            }
        }
    }

    /// Move entering variable e by `step` (signed), exchange it with the
    /// basic variable of row r, and restore the tableau invariants.
    /// `wcol` must hold column e as captured before the call.
    fn apply_pivot(&mut self, r: usize, e: usize, step: f64, leave_to: i32) -> Result<(), LpError> {
        self.pivots += 1;
        if self.pivots > self.opts.max_pivots {
            return Err(LpError::PivotLimit);
        }
        let piv = self.wcol[r];
        if piv.abs() <= self.opts.pivot_eps {
            return Err(LpError::Numerical("pivot element vanished".into()));
        }
        let enter_val = self.val(e) + step;
        if step.abs() != 0.0 {
            for i in 0..self.m {
                let w = self.wcol[i];
                if w.abs() > DROP_EPS {
                    self.xb[i] -= w * step;
                }
            }
        }
        let leave = self.basis[r];
        // Snap the leaving variable exactly onto the bound it hit.
        self.loc[leave] = leave_to;
        // Normalize the pivot row into scratch, then eliminate column e
        // from every other row and from the reduced costs.
        let inv = 1.0 / piv;
        {
            let row = &self.a[r * self.ncols..(r + 1) * self.ncols];
            for (s, &v) in self.scratch.iter_mut().zip(row) {
                *s = v * inv;
            }
            self.scratch[e] = 1.0;
        }
        self.a[r * self.ncols..(r + 1) * self.ncols].copy_from_slice(&self.scratch);
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.wcol[i];
            if f.abs() <= DROP_EPS {
                self.a[i * self.ncols + e] = 0.0;
                continue;
            }
            let row = &mut self.a[i * self.ncols..(i + 1) * self.ncols];
            for (x, &s) in row.iter_mut().zip(&self.scratch) {
                *x -= f * s;
            }
            row[e] = 0.0;
        }
        let de = self.dj[e];
        if de.abs() > DROP_EPS {
            for (d, &s) in self.dj.iter_mut().zip(&self.scratch) {
                *d -= de * s;
            }
        }
        self.dj[e] = 0.0;
        self.basis[r] = e;
        self.loc[e] = r as i32;
        self.xb[r] = enter_val;
        self.note_step(step.abs());
        Ok(())
    }

    /// Entering variable jumps from one of its bounds to the other; the
    /// basis is unchanged.
    fn apply_span_flip(&mut self, e: usize, dir: f64) -> Result<(), LpError> {
        self.pivots += 1;
        if self.pivots > self.opts.max_pivots {
            return Err(LpError::PivotLimit);
        }
        let span = self.upper[e] - self.lower[e];
        debug_assert!(span.is_finite());
        let step = dir * span;
        for i in 0..self.m {
            let w = self.wcol[i];
            if w.abs() > DROP_EPS {
                self.xb[i] -= w * step;
            }
        }
        self.loc[e] = if dir > 0.0 { AT_UPPER } else { AT_LOWER };
        self.note_step(span);
        Ok(())
    }

    fn note_step(&mut self, step: f64) {
        if step > DEGEN_STEP {
            self.degen_run = 0;
            self.bland = false;
        } else {
            self.degen_run += 1;
            if self.degen_run > self.opts.degen_limit {
                self.bland = true;
            }
        }
    }

    fn optimal_outcome(&self) -> LpOutcome {
        let primal = self.structural_values();
        let objective = crate::dense::dot(&self.cost[..self.n], &primal);
        LpOutcome::Optimal(LpSolution { primal, duals: self.duals(), objective })
    }

    /// Farkas ray from a phase-1 optimum that still has violated rows:
    /// the signed sum of the corresponding rows of B^-1 (read off the
    /// logical block) aggregates the original rows into an inequality
    /// the variable box cannot satisfy.
    fn infeasible_outcome(&self, below: &[usize], above: &[usize]) -> LpOutcome {
        let mut u = vec![0.0; self.m];
        for &k in above {
            let row = self.row(k);
            for (ui, &v) in u.iter_mut().zip(&row[self.n..]) {
                *ui += v;
            }
        }
        for &k in below {
            let row = self.row(k);
            for (ui, &v) in u.iter_mut().zip(&row[self.n..]) {
                *ui -= v;
            }
        }
        LpOutcome::Infeasible { farkas: normalize_ray(u) }
    }

    // ----- warm-restart edits -------------------------------------------

    /// Replace the right-hand side, keeping the basis and reduced costs.
    pub fn set_rhs(&mut self, rhs: &[f64]) {
        assert_eq!(rhs.len(), self.m, "rhs length mismatch");
        self.rhs.copy_from_slice(rhs);
        self.recompute_xb();
    }

    /// Change the bounds of structural variable `j`. A nonbasic variable
    /// snaps onto the edited box immediately; a basic one is left for the
    /// next reoptimization to repair.
    pub fn set_var_bounds(&mut self, j: usize, l: f64, u: f64) {
        assert!(j < self.n, "structural variables only");
        assert!(l <= u, "lower > upper");
        let old = self.val(j);
        self.lower[j] = l;
        self.upper[j] = u;
        if self.loc[j] >= 0 {
            return;
        }
        let keep_lower = l.is_finite();
        let keep_upper = u.is_finite();
        let state = match self.loc[j] {
            AT_LOWER if keep_lower => AT_LOWER,
            AT_LOWER if keep_upper => AT_UPPER,
            AT_UPPER if keep_upper => AT_UPPER,
            AT_UPPER if keep_lower => AT_LOWER,
            FREE if !keep_lower && !keep_upper => FREE,
            _ if keep_lower => AT_LOWER,
            _ if keep_upper => AT_UPPER,
            _ => FREE,
        };
        self.loc[j] = state;
        let delta = self.val(j) - old;
        if delta != 0.0 {
            for i in 0..self.m {
                let w = self.a[i * self.ncols + j];
                if w.abs() > DROP_EPS {
                    self.xb[i] -= w * delta;
                }
            }
        }
    }

    /// Append one row `coeffs . x (sense) rhs`. The new logical enters the
    /// basis, so the reduced costs are untouched and stay dual-feasible.
    pub fn add_row(&mut self, coeffs: &[f64], sense: Sense, rhs: f64) {
        assert_eq!(coeffs.len(), self.n, "coefficient length mismatch");
        let old_cols = self.ncols;
        let new_cols = old_cols + 1;
        let mut a = vec![0.0; (self.m + 1) * new_cols];
        for i in 0..self.m {
            a[i * new_cols..i * new_cols + old_cols]
                .copy_from_slice(&self.a[i * old_cols..(i + 1) * old_cols]);
        }
        self.a = a;
        self.ncols = new_cols;
        // Build the incoming row in original coordinates, then eliminate
        // every basic column against the existing tableau rows so the
        // B^-1 invariant extends to the enlarged basis.
        let base = self.m * new_cols;
        self.a[base..base + self.n].copy_from_slice(coeffs);
        self.a[base + new_cols - 1] = 1.0;
        for i in 0..self.m {
            let v = self.basis[i];
            let f = self.a[base + v];
            if f.abs() <= DROP_EPS {
                self.a[base + v] = 0.0;
                continue;
            }
            let (head, tail) = self.a.split_at_mut(base);
            let src = &head[i * new_cols..i * new_cols + new_cols];
            for (x, &s) in tail[..new_cols].iter_mut().zip(src) {
                *x -= f * s;
            }
            tail[v] = 0.0;
        }
        let value = rhs
            - coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| c.abs() > 0.0)
                .map(|(j, c)| c * self.val(j))
                .sum::<f64>();
        let (l, u) = logical_bounds(sense);
        let newvar = new_cols - 1;
        self.lower.push(l);
        self.upper.push(u);
        self.cost.push(0.0);
        self.dj.push(0.0);
        self.basis.push(newvar);
        self.loc.push(self.m as i32);
        self.xb.push(value);
        self.rhs.push(rhs);
        self.m += 1;
        self.scratch = vec![0.0; self.ncols];
        self.wcol = vec![0.0; self.m];
    }

    /// Dual simplex from the current (dual-feasible) reduced costs back to
    /// primal feasibility, then a cleanup cost phase. Errors with
    /// [`LpError::PivotLimit`] when the repair stalls; callers treat that
    /// as "rebuild from scratch".
    pub fn dual_reoptimize(&mut self) -> Result<LpOutcome, LpError> {
        let cap = 10 * self.m + 200;
        let mut taken = 0usize;
        self.degen_run = 0;
        self.bland = false;
        loop {
            let Some((r, above)) = self.most_violated_row() else {
                if let Some(out) = self.phase_cost()? {
                    return Ok(out);
                }
                self.recompute_xb();
                if self.worst_primal_violation() > self.opts.tol_feas {
                    // Drift was hiding real infeasibility; resume repair.
                    taken += 1;
                    if taken > cap {
                        return Err(LpError::PivotLimit);
                    }
                    continue;
                }
                return Ok(self.optimal_outcome());
            };
            taken += 1;
            if taken > cap {
                return Err(LpError::PivotLimit);
            }
            let rho = if above { 1.0 } else { -1.0 };
            let Some(e) = self.dual_entering(r, rho) else {
                // An infeasibility verdict must survive a refresh of the
                // basic values from original data: the incremental xb
                // updates drift, and a phantom hair-width violation in a
                // row no column can repair would otherwise turn into a
                // false proof. Refresh rounds are charged to `taken`.
                self.recompute_xb();
                let v = self.basis[r];
                let still = if above {
                    self.xb[r] - self.upper[v]
                } else {
                    self.lower[v] - self.xb[r]
                };
                if still > self.opts.tol_feas {
                    return Ok(self.dual_infeasible_outcome(r, above));
                }
                continue;
            };
            let v = self.basis[r];
            let target = if above { self.upper[v] } else { self.lower[v] };
            self.load_column(e);
            let alpha = self.wcol[r];
            let step = (self.xb[r] - target) / alpha;
            self.apply_pivot(r, e, step, if above { AT_UPPER } else { AT_LOWER })?;
        }
    }

    fn most_violated_row(&self) -> Option<(usize, bool)> {
        let tol = self.opts.tol_feas;
        let mut best: Option<(usize, bool, f64)> = None;
        for i in 0..self.m {
            let v = self.basis[i];
            let below = self.lower[v] - self.xb[i];
            let above = self.xb[i] - self.upper[v];
            let (viol, is_above) = if above >= below { (above, true) } else { (below, false) };
            if viol > tol {
                match best {
                    Some((_, _, b)) if b >= viol => {}
                    _ => best = Some((i, is_above, viol)),
                }
            }
        }
        best.map(|(i, ab, _)| (i, ab))
    }

    /// Min dual-ratio entering column for leaving row `r`. `rho` is +1
    /// when the leaving basic sits above its upper bound, -1 below its
    /// lower bound. Returns None when no column can repair the row, which
    /// proves primal infeasibility.
    fn dual_entering(&self, r: usize, rho: f64) -> Option<usize> {
        let eps = self.opts.pivot_eps;
        let row = &self.a[r * self.ncols..(r + 1) * self.ncols];
        let mut best: Option<(usize, f64, f64)> = None; // j, ratio, |alpha|
        for j in 0..self.ncols {
            let state = self.loc[j];
            if state >= 0 || self.lower[j] == self.upper[j] {
                continue;
            }
            let alpha = row[j];
            if alpha.abs() <= eps {
                continue;
            }
            let ok = match state {
                AT_LOWER => alpha * rho > 0.0,
                AT_UPPER => alpha * rho < 0.0,
                FREE => true,
                _ => unreachable!(),
            };
            if !ok {
                continue;
            }
            let ratio = self.dj[j].abs() / alpha.abs();
            if self.bland {
                return Some(j);
            }
            let better = match best {
                None => true,
                Some((_, br, ba)) => {
                    ratio < br - 1e-12 || (ratio <= br + 1e-12 && alpha.abs() > ba)
                }
            };
            if better {
                best = Some((j, ratio, alpha.abs()));
            }
        }
        best.map(|(j, _, _)| j)
    }

    fn dual_infeasible_outcome(&self, r: usize, above: bool) -> LpOutcome {
        let row = self.row(r);
        let sign = if above { 1.0 } else { -1.0 };
        let u: Vec<f64> = row[self.n..].iter().map(|&v| sign * v).collect();
        LpOutcome::Infeasible { farkas: normalize_ray(u) }
    }
}

fn logical_bounds(sense: Sense) -> (f64, f64) {
    match sense {
        Sense::Ge => (f64::NEG_INFINITY, 0.0),
        Sense::Le => (0.0, f64::INFINITY),
        Sense::Eq => (0.0, 0.0),
    }
}

fn initial_state(l: f64, u: f64) -> i32 {
    if l.is_finite() {
        AT_LOWER
    } else if u.is_finite() {
        AT_UPPER
    } else {
        FREE
    }
}

fn normalize_ray(mut u: Vec<f64>) -> Vec<f64> {
    let norm = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm > 0.0 {
        for v in &mut u {
            *v /= norm;
            if v.abs() <= DROP_EPS {
                *v = 0.0;
            }
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{check_certificate, solve_lp, LinearProgram, SimplexOptions};

    fn opts() -> SimplexOptions {
        SimplexOptions::default()
    }

    #[test]
    fn warm_rhs_change_matches_cold_solve() {
        // min x1 + 2 x2  s.t.  x1 + x2 >= b1, x1 - x2 <= b2.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 2.0];
        lp.add_row(&[1.0, 1.0], super::super::Sense::Ge, 4.0);
        lp.add_row(&[1.0, -1.0], super::super::Sense::Le, 1.0);
        let mut t = Tableau::from_program(&lp, opts());
        let LpOutcome::Optimal(first) = t.primal_solve().unwrap() else {
            panic!("expected optimal")
        };
        assert!((first.objective - 5.5).abs() < 1e-9, "got {}", first.objective);

        t.set_rhs(&[10.0, 1.0]);
        let warm = t.dual_reoptimize().unwrap();
        let mut cold_lp = lp.clone();
        cold_lp.rhs = vec![10.0, 1.0];
        let cold = solve_lp(&cold_lp, &opts()).unwrap();
        match (&warm, &cold) {
            (LpOutcome::Optimal(w), LpOutcome::Optimal(c)) => {
                assert!((w.objective - c.objective).abs() < 1e-9);
                for (a, b) in w.duals.iter().zip(&c.duals) {
                    assert!((a - b).abs() < 1e-9, "duals diverged: {a} vs {b}");
                }
            }
            other => panic!("expected two optima, got {other:?}"),
        }
    }

    #[test]
    fn warm_bound_fix_matches_cold_solve() {
        // Fixing a variable to each binary value reproduces cold solves.
        let mut lp = LinearProgram::new(3);
        lp.objective = vec![1.0, 3.0, 2.0];
        lp.upper = vec![1.0, 1.0, 1.0];
        lp.add_row(&[2.0, 1.0, 1.0], super::super::Sense::Ge, 2.0);
        let mut t = Tableau::from_program(&lp, opts());
        t.primal_solve().unwrap();
        for fixed in [0.0, 1.0] {
            t.set_var_bounds(0, fixed, fixed);
            let warm = t.dual_reoptimize().unwrap();
            let mut cold_lp = lp.clone();
            cold_lp.lower[0] = fixed;
            cold_lp.upper[0] = fixed;
            let cold = solve_lp(&cold_lp, &opts()).unwrap();
            match (&warm, &cold) {
                (LpOutcome::Optimal(w), LpOutcome::Optimal(c)) => {
                    assert!(
                        (w.objective - c.objective).abs() < 1e-9,
                        "fix={fixed}: {} vs {}",
                        w.objective,
                        c.objective
                    );
                }
                other => panic!("expected optima, got {other:?}"),
            }
        }
    }

    #[test]
    fn appended_row_cuts_off_current_optimum() {
        // max x1 + x2 over the unit box, then cut x1 + x2 <= 1.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, -1.0];
        lp.upper = vec![1.0, 1.0];
        let mut t = Tableau::from_program(&lp, opts());
        let LpOutcome::Optimal(s) = t.primal_solve().unwrap() else {
            panic!("expected optimal")
        };
        assert!((s.objective + 2.0).abs() < 1e-9);
        t.add_row(&[1.0, 1.0], super::super::Sense::Le, 1.0);
        let LpOutcome::Optimal(s) = t.dual_reoptimize().unwrap() else {
            panic!("expected optimal after cut")
        };
        assert!((s.objective + 1.0).abs() < 1e-9, "got {}", s.objective);
    }

    #[test]
    fn bound_fix_can_prove_infeasibility_with_valid_ray() {
        // x1 + x2 >= 2 with both variables fixed to 0 is infeasible.
        let mut lp = LinearProgram::new(2);
        lp.upper = vec![1.0, 1.0];
        lp.add_row(&[1.0, 1.0], super::super::Sense::Ge, 2.0);
        let mut t = Tableau::from_program(&lp, opts());
        t.primal_solve().unwrap();
        t.set_var_bounds(0, 0.0, 0.0);
        t.set_var_bounds(1, 0.0, 0.0);
        let out = t.dual_reoptimize().unwrap();
        let mut fixed_lp = lp.clone();
        fixed_lp.upper = vec![0.0, 0.0];
        match &out {
            LpOutcome::Infeasible { .. } => {
                let rep = check_certificate(&fixed_lp, &out, 1e-7);
                assert!(rep.ok, "bad ray: {}", rep.detail);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
