//! Cut selection: decide which of an iteration's candidate cuts enter the
//! master, by casting the choice as a small covering problem and handing
//! it to a QUBO backend.
//!
//! Two filtering criteria build different indicator matrices over the
//! candidate cuts. [`Criterion::Exclusion`] scores feasibility cuts by
//! which candidate points they cut off; [`Criterion::Coverage`] scores
//! cuts by which master binaries they touch. Two selection strategies
//! turn a matrix into a QUBO: [`Strategy::MinSetCover`] asks for the
//! fewest cuts that cover every column, [`Strategy::MaxCoverage`] for at
//! most `cap` cuts covering as many columns as possible.

mod decode;
mod encode;
mod matrix;

pub use decode::{decode_selection, DecodeDiagnostics};
pub use encode::{encode_max_coverage, encode_set_cover, EncodeOptions, EncodedSelection};
pub use matrix::{build_coverage_matrix, build_exclusion_matrix, inspect_matrix, Inspection};

use crate::qubo::{Backend, SampleParams, SamplerError};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("indicator matrix has no rows or columns to encode")]
    EmptyMatrix,
    #[error("selection cap must be at least 1, got {0}")]
    InvalidCap(usize),
    #[error("sampler returned an empty sample set")]
    EmptySampleSet,
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

/// Strict ">0" tests on floating-point cut data need a tolerance.
pub const EXCL_EPS: f64 = 1e-9;
pub const COVER_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutKind {
    Feasibility,
    Optimality,
}

/// One cut over the master binaries: `value_at(y) <= 0` for feasibility
/// cuts, `value_at(y) <= zeta` for optimality cuts.
#[derive(Clone, Debug)]
pub struct Cut {
    pub kind: CutKind,
    /// The subproblem dual vector (extreme point) or infeasibility ray
    /// (extreme ray) the cut came from, one weight per coupling row.
    pub dual: Vec<f64>,
    /// rhs-weighted dual constant.
    pub constant: f64,
    /// Per-master-binary coefficients.
    pub coeff_y: Vec<f64>,
    /// Rank of the pool entry whose subproblem produced this cut.
    pub source_rank: usize,
    /// Objective of that pool entry; lower means a better master solution.
    pub source_objective: f64,
    /// Fraction of binaries the cut touches.
    pub density: f64,
}

impl Cut {
    pub fn new(
        kind: CutKind,
        dual: Vec<f64>,
        constant: f64,
        coeff_y: Vec<f64>,
        source_rank: usize,
        source_objective: f64,
    ) -> Self {
        let touched = coeff_y.iter().filter(|v| v.abs() > COVER_EPS).count();
        let density =
            if coeff_y.is_empty() { 0.0 } else { touched as f64 / coeff_y.len() as f64 };
        Cut { kind, dual, constant, coeff_y, source_rank, source_objective, density }
    }

    pub fn value_at(&self, y: &[f64]) -> f64 {
        self.constant + crate::dense::dot(&self.coeff_y, y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    /// Indicator: cut i excludes candidate point j. Applies to
    /// feasibility cuts only; optimality cuts always pass through.
    Exclusion,
    /// Indicator: cut i has a nonzero coefficient on master binary j.
    Coverage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    MinSetCover,
    /// Keep at most `cap` cuts.
    MaxCoverage { cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Exclusion,
    CoverFeasibility,
    CoverOptimality,
}

#[derive(Clone, Debug)]
pub struct RowMeta {
    /// Index into the candidate cut slice this row stands for.
    pub cut: usize,
    pub source_objective: f64,
    pub source_rank: usize,
}

/// Binary indicator matrix with provenance on both axes.
#[derive(Clone, Debug)]
pub struct IndicatorMatrix {
    pub kind: MatrixKind,
    /// Row-major bits, rows.len() x cols.len().
    pub bits: Vec<Vec<u8>>,
    pub rows: Vec<RowMeta>,
    /// Column targets: excluded-point index (exclusion kind) or master
    /// binary index (coverage kinds).
    pub cols: Vec<usize>,
}

impl IndicatorMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn col_sum(&self, j: usize) -> usize {
        self.bits.iter().filter(|r| r[j] == 1).count()
    }
}

/// Closed-form cap on encoder output size, asserted after every encode.
pub fn qubit_upper_bound(
    criterion: Criterion,
    strategy: Strategy,
    n_cuts: usize,
    n_cols: usize,
    keep_cardinality_slacks: bool,
) -> usize {
    let cols = match criterion {
        Criterion::Exclusion => n_cuts,
        Criterion::Coverage => n_cols,
    };
    match strategy {
        Strategy::MinSetCover => n_cuts + cols * ceil_log2(n_cuts),
        Strategy::MaxCoverage { cap } => {
            let per_col = 1 + ceil_log2(cap + 1);
            let card = if keep_cardinality_slacks { ceil_log2(cap + 1) } else { 0 };
            n_cuts + cols * per_col + card
        }
    }
}

pub(crate) fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

#[derive(Clone, Debug)]
pub struct SelectionContext<'a> {
    pub criterion: Criterion,
    pub strategy: Strategy,
    /// Whether coverage selection also runs on optimality cuts; when off
    /// they all pass through.
    pub opt_select: bool,
    pub backend: &'a Backend,
    pub params: SampleParams,
    /// Master binary count (coverage matrix width).
    pub master_len: usize,
    pub encode: EncodeOptions,
}

#[derive(Clone, Debug, Default)]
pub struct SelectionReport {
    /// Indices into the candidate slice, feasibility picks then
    /// optimality picks, each ascending.
    pub selected: Vec<usize>,
    pub n_feas_considered: usize,
    pub n_opt_considered: usize,
    pub n_feas_selected: usize,
    pub n_opt_selected: usize,
    /// Wall time spent building and inspecting matrices.
    pub matrix_nanos: u128,
    /// Wall time spent inside the sampler backend.
    pub sampler_nanos: u128,
    /// Number of backend invocations (0 when shortcuts fired).
    pub qubo_solves: usize,
    /// Total reads requested across backend invocations.
    pub reads_requested: u64,
    pub largest_qubo: usize,
    pub diagnostics: Vec<DecodeDiagnostics>,
}

/// Algorithm: partition the candidates, build the criterion's matrix for
/// each side that gets selection, inspect it (dedup rows, drop dead
/// columns, shortcut on an all-ones row), encode with the strategy, solve
/// on the backend, decode the winning rows back to cut indices.
///
/// `feas_sources\[k\]` is the master assignment whose subproblem generated
/// the k-th feasibility cut (in candidate order); the exclusion matrix
/// tests cuts against exactly these points.
pub fn select_cuts(
    cuts: &[Cut],
    feas_sources: &[Vec<f64>],
    ctx: &SelectionContext,
) -> Result<SelectionReport, SelectError> {
    let feas_idx: Vec<usize> =
        (0..cuts.len()).filter(|&i| cuts[i].kind == CutKind::Feasibility).collect();
    let opt_idx: Vec<usize> =
        (0..cuts.len()).filter(|&i| cuts[i].kind == CutKind::Optimality).collect();
    assert_eq!(feas_idx.len(), feas_sources.len(), "one source point per feasibility cut");

    let mut report = SelectionReport {
        n_feas_considered: feas_idx.len(),
        n_opt_considered: opt_idx.len(),
        ..Default::default()
    };

    let mut selected: Vec<usize> = Vec::new();
    if !feas_idx.is_empty() {
        let t0 = Instant::now();
        let matrix = match ctx.criterion {
            Criterion::Exclusion => build_exclusion_matrix(cuts, &feas_idx, feas_sources),
            Criterion::Coverage => build_coverage_matrix(cuts, &feas_idx, ctx.master_len),
        };
        let inspection = inspect_matrix(&matrix);
        report.matrix_nanos += t0.elapsed().as_nanos();
        let picks = resolve(&inspection, feas_idx.len(), ctx, &mut report)?;
        selected.extend(picks);
    }
    report.n_feas_selected = selected.len();

    if !opt_idx.is_empty() {
        if ctx.criterion == Criterion::Coverage && ctx.opt_select {
            let t0 = Instant::now();
            let matrix = build_coverage_matrix(cuts, &opt_idx, ctx.master_len);
            let inspection = inspect_matrix(&matrix);
            report.matrix_nanos += t0.elapsed().as_nanos();
            let picks = resolve(&inspection, opt_idx.len(), ctx, &mut report)?;
            report.n_opt_selected = picks.len();
            selected.extend(picks);
        } else {
            // Exclusion never filters optimality cuts; coverage with
            // selection disabled passes them all through.
            report.n_opt_selected = opt_idx.len();
            selected.extend(opt_idx.iter().copied());
        }
    }
    selected.sort_unstable();
    selected.dedup();
    report.selected = selected;
    Ok(report)
}

/// Shortcut, or encode + sample + decode. Returns candidate-slice
/// indices. `candidates` is the pre-inspection row count; the size bound
/// is stated over candidates and dominates whatever inspection left over.
fn resolve(
    inspection: &Inspection,
    candidates: usize,
    ctx: &SelectionContext,
    report: &mut SelectionReport,
) -> Result<Vec<usize>, SelectError> {
    if let Some(cut) = inspection.shortcut {
        return Ok(vec![cut]);
    }
    let m = &inspection.reduced;
    if m.n_rows() == 0 {
        // Every candidate row reduced away (all-zero coverage).
        return Ok(Vec::new());
    }
    let enc = match ctx.strategy {
        Strategy::MinSetCover => encode_set_cover(m)?,
        Strategy::MaxCoverage { cap } => encode_max_coverage(m, cap, &ctx.encode)?,
    };
    let bound = qubit_upper_bound(
        match m.kind {
            MatrixKind::Exclusion => Criterion::Exclusion,
            _ => Criterion::Coverage,
        },
        ctx.strategy,
        candidates,
        ctx.master_len,
        ctx.encode.keep_cardinality_slacks,
    );
    assert!(
        enc.qubo.n() <= bound,
        "encoded {} variables, over the {} bound",
        enc.qubo.n(),
        bound
    );
    report.largest_qubo = report.largest_qubo.max(enc.qubo.n());
    let t0 = Instant::now();
    let samples = ctx.backend.solve(&enc.qubo, &ctx.params)?;
    report.sampler_nanos += t0.elapsed().as_nanos();
    report.qubo_solves += 1;
    report.reads_requested += match ctx.backend {
        Backend::Exhaustive { .. } => 1,
        _ => ctx.params.reads as u64,
    };
    let (rows, diag) = decode_selection(&enc.qubo, &samples, m, ctx.strategy)?;
    report.diagnostics.push(diag);
    Ok(rows.into_iter().map(|r| m.rows[r].cut).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_bounds_match_hand_computation() {
        assert_eq!(
            qubit_upper_bound(Criterion::Exclusion, Strategy::MinSetCover, 8, 999, true),
            32
        );
        assert_eq!(
            qubit_upper_bound(Criterion::Coverage, Strategy::MinSetCover, 8, 72, true),
            8 + 72 * 3
        );
        assert_eq!(
            qubit_upper_bound(Criterion::Coverage, Strategy::MaxCoverage { cap: 3 }, 8, 72, false),
            8 + 72 * 3
        );
        assert_eq!(
            qubit_upper_bound(Criterion::Coverage, Strategy::MaxCoverage { cap: 3 }, 8, 72, true),
            8 + 72 * 3 + 2
        );
    }

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
    }
}
