//! Decomposition loop for mixed 0-1 linear programs.
//!
//! A problem `min c.x + d.y  s.t.  A x + B y (senses) b,  y binary` is
//! split into a master over the binaries plus a surrogate variable for the
//! continuous cost, and an LP subproblem over x whose rhs depends on the
//! master's binary pick. Each iteration solves the master for a pool of
//! good integral solutions, prices every pool entry through the
//! subproblem, turns the duals into cuts, runs the configured cut
//! selection, and adds the survivors to the master. The master objective
//! bounds the optimum from below, the priced pool optimum from above, and
//! the loop stops when their relative gap closes.

mod sub;
pub mod trace;

pub use sub::{SpOutcome, SpRequest, SubproblemTemplate};
pub use trace::{BendersTrace, IterationRecord, RunStatus, TimingMode, TRACE_HEADER};

pub use crate::cutsel::{Criterion, Cut, CutKind, Strategy};

use crate::cutsel::{select_cuts, EncodeOptions, SelectionContext, SelectionReport};
use crate::dense::{dot, DenseMatrix};
use crate::exec::ExecMode;
use crate::lp::{LinearProgram, LpError, Sense};
use crate::milp::{BranchAndBound, MilpError, MilpOptions, MilpOutcome};
use crate::qubo::{Backend, SampleParams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::time::Instant;
use thiserror::Error;

pub const DEFAULT_ZETA_LOW: f64 = -1e9;
pub const DEFAULT_EPSILON: f64 = 0.005;

/// One linear row over the binaries only.
#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `min c.x + d.y  s.t.  A x + B y (senses) b,  x in [x_lower, x_upper],
/// y binary and satisfying `y_constraints`.
#[derive(Clone, Debug)]
pub struct MixedProblem {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub a: DenseMatrix,
    pub bmat: DenseMatrix,
    pub b: Vec<f64>,
    pub senses: Vec<Sense>,
    pub x_lower: Vec<f64>,
    pub x_upper: Vec<f64>,
    /// Constraints involving no continuous variable; they live in the
    /// master untouched.
    pub y_constraints: Vec<LinearConstraint>,
    /// Floor for the master's surrogate variable; any value below the
    /// least possible continuous cost works.
    pub zeta_low: f64,
}

impl MixedProblem {
    /// Problem with nonnegative continuous variables, free of y-only
    /// constraints, and the default surrogate floor.
    pub fn new(
        c: Vec<f64>,
        d: Vec<f64>,
        a: DenseMatrix,
        bmat: DenseMatrix,
        b: Vec<f64>,
        senses: Vec<Sense>,
    ) -> Self {
        let n = c.len();
        MixedProblem {
            c,
            d,
            a,
            bmat,
            b,
            senses,
            x_lower: vec![0.0; n],
            x_upper: vec![f64::INFINITY; n],
            y_constraints: Vec::new(),
            zeta_low: DEFAULT_ZETA_LOW,
        }
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.d.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<(), BendersError> {
        let (n, m, q) = (self.n(), self.m(), self.q());
        let err = |msg: String| Err(BendersError::DimensionMismatch(msg));
        if self.a.rows() != q || self.senses.len() != q {
            return err(format!("coupling rows: A has {}, senses {}, rhs {q}", self.a.rows(), self.senses.len()));
        }
        if q > 0 && self.a.cols() != n {
            return err(format!("A has {} columns, c has {n}", self.a.cols()));
        }
        if self.bmat.rows() != q {
            return err(format!("B has {} rows, rhs {q}", self.bmat.rows()));
        }
        if q > 0 && self.bmat.cols() != m {
            return err(format!("B has {} columns, d has {m}", self.bmat.cols()));
        }
        if self.x_lower.len() != n || self.x_upper.len() != n {
            return err("x bound length mismatch".into());
        }
        for j in 0..n {
            if self.x_lower[j] > self.x_upper[j] {
                return err(format!("x[{j}]: lower > upper"));
            }
        }
        for (k, yc) in self.y_constraints.iter().enumerate() {
            if yc.coeffs.len() != m {
                return err(format!("y constraint {k} has {} coefficients, expected {m}", yc.coeffs.len()));
            }
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.c) || !finite(&self.d) || !finite(&self.b) || !self.zeta_low.is_finite() {
            return err("c, d, b and zeta_low must be finite".into());
        }
        Ok(())
    }

    /// The undecomposed program over [x, y] plus the binary index list,
    /// for direct solves.
    pub fn to_monolithic(&self) -> (LinearProgram, Vec<usize>) {
        let (n, m) = (self.n(), self.m());
        let mut lp = LinearProgram::new(n + m);
        lp.objective[..n].copy_from_slice(&self.c);
        lp.objective[n..].copy_from_slice(&self.d);
        lp.lower[..n].copy_from_slice(&self.x_lower);
        lp.upper[..n].copy_from_slice(&self.x_upper);
        for j in n..n + m {
            lp.lower[j] = 0.0;
            lp.upper[j] = 1.0;
        }
        let mut row = vec![0.0; n + m];
        for i in 0..self.q() {
            row[..n].copy_from_slice(self.a.row(i));
            row[n..].copy_from_slice(self.bmat.row(i));
            lp.add_row(&row, self.senses[i], self.b[i]);
        }
        for yc in &self.y_constraints {
            row[..n].fill(0.0);
            row[n..].copy_from_slice(&yc.coeffs);
            lp.add_row(&row, yc.sense, yc.rhs);
        }
        (lp, (n..n + m).collect())
    }
}

/// Which generated cuts reach the master each iteration.
#[derive(Clone, Debug, PartialEq)]
pub enum SelectionMode {
    /// Single cut from the pool optimum; the pool is not consulted.
    PlainBd,
    /// Every pool entry's cut.
    AllCuts,
    /// Cuts from the pool optimum plus k random other entries.
    RandomK { k: usize },
    /// Indicator-matrix selection over the full pool's cuts.
    Select { criterion: Criterion, strategy: Strategy, opt_select: bool },
}

#[derive(Clone, Debug)]
pub struct BendersConfig {
    /// Relative gap at which the run stops (0.005 = 0.5%).
    pub epsilon: f64,
    /// Master solution-pool size.
    pub pool_size: usize,
    pub mode: SelectionMode,
    pub backend: Backend,
    pub sample_params: SampleParams,
    pub max_iters: usize,
    pub exec: ExecMode,
    pub timing: TimingMode,
    /// Drives the random-entry draw; sampler seeds derive from
    /// `sample_params.seed`.
    pub seed: u64,
    pub milp: MilpOptions,
}

impl Default for BendersConfig {
    fn default() -> Self {
        BendersConfig {
            epsilon: DEFAULT_EPSILON,
            pool_size: 10,
            mode: SelectionMode::PlainBd,
            backend: Backend::Exhaustive { cap: crate::qubo::DEFAULT_EXHAUSTIVE_CAP },
            sample_params: SampleParams::default(),
            max_iters: 200,
            exec: ExecMode::default(),
            timing: TimingMode::Wall,
            seed: 0,
            milp: MilpOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum BendersError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("problem is infeasible")]
    Infeasible,
    #[error("subproblem unbounded below; the problem has no finite optimum")]
    Unbounded,
    #[error("iteration cap {cap} reached with bounds [{lb}, {ub}]")]
    IterationCapExceeded { cap: usize, lb: f64, ub: f64, trace: Box<BendersTrace> },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Milp(#[from] MilpError),
}

#[derive(Clone, Debug)]
pub struct BendersSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Master program over [y, zeta]: the binary costs plus the surrogate,
/// its floor row, the y-only rows, and every cut added so far. The
/// branch-and-bound state persists across iterations so each re-solve
/// starts warm.
pub struct MasterState {
    bb: BranchAndBound,
    n_binaries: usize,
}

impl MasterState {
    pub fn program(&self) -> &LinearProgram {
        self.bb.program()
    }

    pub fn n_rows(&self) -> usize {
        self.bb.program().n_rows()
    }

    pub fn n_binaries(&self) -> usize {
        self.n_binaries
    }

    pub fn solve(&mut self) -> Result<MilpOutcome, MilpError> {
        self.bb.solve()
    }

    /// Append one cut row. An optimality cut `constant + coeff.y <= zeta`
    /// becomes `-coeff.y + zeta >= constant`; a feasibility cut drops the
    /// surrogate term.
    pub fn add_cut(&mut self, cut: &Cut) {
        let m = self.n_binaries;
        let mut row = vec![0.0; m + 1];
        for (r, c) in row[..m].iter_mut().zip(&cut.coeff_y) {
            *r = -c;
        }
        row[m] = match cut.kind {
            CutKind::Optimality => 1.0,
            CutKind::Feasibility => 0.0,
        };
        self.bb.add_row(&row, Sense::Ge, cut.constant);
    }
}

/// Split the problem into the master and the subproblem template.
pub fn decompose(
    p: &MixedProblem,
    cfg: &BendersConfig,
) -> Result<(MasterState, SubproblemTemplate), BendersError> {
    p.validate()?;
    let m = p.m();

    let mut mlp = LinearProgram::new(m + 1);
    mlp.objective[..m].copy_from_slice(&p.d);
    mlp.objective[m] = 1.0;
    for j in 0..m {
        mlp.upper[j] = 1.0;
    }
    mlp.lower[m] = f64::NEG_INFINITY;
    let mut zrow = vec![0.0; m + 1];
    zrow[m] = 1.0;
    mlp.add_row(&zrow, Sense::Ge, p.zeta_low);
    for yc in &p.y_constraints {
        let mut row = yc.coeffs.clone();
        row.push(0.0);
        mlp.add_row(&row, yc.sense, yc.rhs);
    }
    let mut opts = cfg.milp;
    opts.pool_size = match cfg.mode {
        SelectionMode::PlainBd => 1,
        _ => cfg.pool_size.max(1),
    };
    let master = MasterState { bb: BranchAndBound::new(mlp, (0..m).collect(), opts), n_binaries: m };

    let mut slp = LinearProgram::new(p.n());
    slp.objective = p.c.clone();
    slp.lower = p.x_lower.clone();
    slp.upper = p.x_upper.clone();
    slp.constraints = p.a.clone();
    slp.senses = p.senses.clone();
    slp.rhs = p.b.clone();
    let sp = SubproblemTemplate::new(slp, p.bmat.clone(), p.b.clone(), cfg.milp.simplex);
    Ok((master, sp))
}

/// Keep a selection nonempty: an empty pick is replaced by the single
/// lowest-rank generated cut, anything else passes through untouched.
/// Indices address `generated`.
pub fn ensure_nonempty_selection(selected: Vec<usize>, generated: &[Cut]) -> Vec<usize> {
    if !selected.is_empty() {
        return selected;
    }
    assert!(!generated.is_empty(), "no cuts generated");
    let mut best = 0;
    for (i, c) in generated.iter().enumerate() {
        if c.source_rank < generated[best].source_rank {
            best = i;
        }
    }
    vec![best]
}

/// Bound update from the pool optimum's subproblem outcome: the upper
/// bound improves only when that entry priced out optimal, by its
/// subproblem value plus the binary cost of its generator.
pub fn update_bounds(lb: f64, ub: f64, entry0: &SpOutcome, d: &[f64], y0: &[f64]) -> (f64, f64) {
    match entry0 {
        SpOutcome::Optimality { dsp_value, .. } => (lb, ub.min(dsp_value + dot(d, y0))),
        _ => (lb, ub),
    }
}

/// `(ub - lb) / max(|ub|, 1)`, infinite while either bound is open.
pub fn relative_gap(lb: f64, ub: f64) -> f64 {
    if !lb.is_finite() || !ub.is_finite() {
        return f64::INFINITY;
    }
    (ub - lb) / ub.abs().max(1.0)
}

fn pack_bits(y: &[f64]) -> Vec<u64> {
    let mut words = vec![0u64; y.len().div_ceil(64)];
    for (j, v) in y.iter().enumerate() {
        if *v > 0.5 {
            words[j / 64] |= 1 << (j % 64);
        }
    }
    words
}

fn millis(nanos: u128) -> u64 {
    (nanos / 1_000_000) as u64
}

struct IterationStats {
    n_feas_gen: usize,
    n_opt_gen: usize,
    n_feas_sel: usize,
    n_opt_sel: usize,
    mp_nanos: u128,
    sp_nanos: u128,
    select_nanos: u128,
    report: SelectionReport,
}

impl IterationStats {
    fn quiet(mp_nanos: u128) -> Self {
        IterationStats {
            n_feas_gen: 0,
            n_opt_gen: 0,
            n_feas_sel: 0,
            n_opt_sel: 0,
            mp_nanos,
            sp_nanos: 0,
            select_nanos: 0,
            report: SelectionReport::default(),
        }
    }

    fn record(&self, iter: usize, lb: f64, ub: f64, mp_constraints: usize, timing: TimingMode) -> IterationRecord {
        let (mp_ms, sp_ms, matrix_ms, select_ms, sampler_us) = match timing {
            TimingMode::Wall => (
                millis(self.mp_nanos),
                millis(self.sp_nanos),
                millis(self.report.matrix_nanos),
                millis(self.select_nanos),
                (self.report.sampler_nanos / 1_000) as u64,
            ),
            TimingMode::Model => {
                (0, 0, 0, 0, self.report.reads_requested * trace::MODEL_US_PER_READ)
            }
        };
        IterationRecord {
            iter,
            lb,
            ub,
            gap_pct: 100.0 * relative_gap(lb, ub),
            n_feas_cuts_generated: self.n_feas_gen,
            n_opt_cuts_generated: self.n_opt_gen,
            n_feas_selected: self.n_feas_sel,
            n_opt_selected: self.n_opt_sel,
            mp_constraints,
            mp_ms,
            sp_ms,
            matrix_ms,
            select_ms,
            sampler_us,
        }
    }
}

fn choose_entries(mode: &SelectionMode, pool_len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    match mode {
        SelectionMode::PlainBd => vec![0],
        SelectionMode::AllCuts | SelectionMode::Select { .. } => (0..pool_len).collect(),
        SelectionMode::RandomK { k } => {
            let mut others: Vec<usize> = (1..pool_len).collect();
            let mut picked = vec![0];
            for _ in 0..(*k).min(others.len()) {
                let i = rng.random_range(0..others.len());
                picked.push(others.swap_remove(i));
            }
            picked.sort_unstable();
            picked
        }
    }
}

pub fn run_benders(
    p: &MixedProblem,
    cfg: &BendersConfig,
) -> Result<(BendersSolution, f64, BendersTrace), BendersError> {
    let (mut master, mut sp) = decompose(p, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut lb = f64::NEG_INFINITY;
    let mut ub = f64::INFINITY;
    let mut best: Option<BendersSolution> = None;
    let mut records: Vec<IterationRecord> = Vec::new();
    // Binary patterns of past pool optima, split by whether a rank-0 cut
    // entered the master for them. A repeat whose cut never made it in
    // would re-derive the same master solution forever, so that cut gets
    // forced into the selection.
    let mut seen = BTreeSet::<Vec<u64>>::new();
    let mut cut_added = BTreeSet::<Vec<u64>>::new();

    for iter in 1..=cfg.max_iters {
        let mp_constraints = master.n_rows();
        let t_mp = Instant::now();
        let outcome = master.solve()?;
        let mp_nanos = t_mp.elapsed().as_nanos();
        let result = match outcome {
            MilpOutcome::Feasible(r) => r,
            MilpOutcome::Infeasible => return Err(BendersError::Infeasible),
        };
        // An exhausted node budget leaves entry 0 unproven, so the bound
        // must not move; cuts from the pool are still valid.
        if result.complete {
            lb = lb.max(result.pool[0].objective);
        }

        if relative_gap(lb, ub) <= cfg.epsilon {
            records.push(IterationStats::quiet(mp_nanos).record(iter, lb, ub, mp_constraints, cfg.timing));
            let trace = BendersTrace { records, status: RunStatus::Converged };
            let solution = best.unwrap_or_else(|| BendersSolution {
                x: vec![0.0; p.n()],
                y: result.pool[0].binary.clone(),
            });
            let objective = if ub.is_finite() { ub } else { lb };
            return Ok((solution, objective, trace));
        }

        let pool = &result.pool;
        let chosen = choose_entries(&cfg.mode, pool.len(), &mut rng);
        debug_assert_eq!(chosen[0], 0, "the pool optimum is always priced");
        let reqs: Vec<SpRequest> = chosen
            .iter()
            .map(|&r| SpRequest {
                rank: r,
                y_hat: &pool[r].binary,
                master_objective: pool[r].objective,
            })
            .collect();

        let t_sp = Instant::now();
        let outcomes = sp.solve_batch(&reqs, cfg.exec)?;
        let sp_nanos = t_sp.elapsed().as_nanos();
        if outcomes.iter().any(|o| matches!(o, SpOutcome::GlobalInfeasible)) {
            return Err(BendersError::Unbounded);
        }

        let y0 = &pool[0].binary;
        let (nlb, nub) = update_bounds(lb, ub, &outcomes[0], &p.d, y0);
        let improved = nub < ub;
        lb = nlb;
        ub = nub;

        let mut cuts: Vec<Cut> = Vec::with_capacity(outcomes.len());
        let mut feas_sources: Vec<Vec<f64>> = Vec::new();
        let mut n_feas_gen = 0;
        let mut n_opt_gen = 0;
        for (req, out) in reqs.iter().zip(outcomes) {
            match out {
                SpOutcome::Optimality { cut, x, .. } => {
                    if req.rank == 0 && improved {
                        best = Some(BendersSolution { x, y: req.y_hat.to_vec() });
                    }
                    n_opt_gen += 1;
                    cuts.push(cut);
                }
                SpOutcome::Feasibility { cut } => {
                    n_feas_gen += 1;
                    feas_sources.push(req.y_hat.to_vec());
                    cuts.push(cut);
                }
                SpOutcome::GlobalInfeasible => unreachable!("checked above"),
            }
        }

        let t_sel = Instant::now();
        let (mut selected, report) = match &cfg.mode {
            SelectionMode::Select { criterion, strategy, opt_select } => {
                let mut params = cfg.sample_params;
                params.seed =
                    cfg.sample_params.seed ^ (iter as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let ctx = SelectionContext {
                    criterion: *criterion,
                    strategy: *strategy,
                    opt_select: *opt_select,
                    backend: &cfg.backend,
                    params,
                    master_len: p.m(),
                    encode: EncodeOptions::default(),
                };
                match select_cuts(&cuts, &feas_sources, &ctx) {
                    Ok(report) => {
                        let selected = report.selected.clone();
                        (selected, report)
                    }
                    // A dead sampler must not kill the run; the fallback
                    // below re-arms the iteration with the rank-0 cut.
                    Err(_) => (Vec::new(), SelectionReport::default()),
                }
            }
            _ => ((0..cuts.len()).collect(), SelectionReport::default()),
        };
        let select_nanos = t_sel.elapsed().as_nanos();

        selected = ensure_nonempty_selection(selected, &cuts);

        let pattern = pack_bits(y0);
        let rank0 = cuts.iter().position(|c| c.source_rank == 0);
        if seen.contains(&pattern) && !cut_added.contains(&pattern) {
            if let Some(i0) = rank0 {
                if !selected.contains(&i0) {
                    // Swap out the worst pick of the same kind so the
                    // selection size stays within the strategy's cap.
                    let evict = selected
                        .iter()
                        .enumerate()
                        .filter(|(_, &i)| cuts[i].kind == cuts[i0].kind)
                        .max_by_key(|(_, &i)| cuts[i].source_rank)
                        .map(|(pos, _)| pos);
                    match evict {
                        Some(pos) => selected[pos] = i0,
                        None => selected.push(i0),
                    }
                }
            }
        }
        seen.insert(pattern.clone());
        selected.sort_unstable();
        selected.dedup();
        if rank0.is_some_and(|i0| selected.contains(&i0)) {
            cut_added.insert(pattern);
        }

        let mut n_feas_sel = 0;
        let mut n_opt_sel = 0;
        for &i in &selected {
            match cuts[i].kind {
                CutKind::Feasibility => n_feas_sel += 1,
                CutKind::Optimality => n_opt_sel += 1,
            }
            master.add_cut(&cuts[i]);
        }

        let stats = IterationStats {
            n_feas_gen,
            n_opt_gen,
            n_feas_sel,
            n_opt_sel,
            mp_nanos,
            sp_nanos,
            select_nanos,
            report,
        };
        records.push(stats.record(iter, lb, ub, mp_constraints, cfg.timing));
    }

    let trace = BendersTrace { records, status: RunStatus::IterationCap };
    Err(BendersError::IterationCapExceeded { cap: cfg.max_iters, lb, ub, trace: Box::new(trace) })
}
