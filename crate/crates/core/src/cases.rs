//! The benchmark case matrix.
//!
//! A case names a cut-handling policy: plain single-cut decomposition,
//! every pool cut, the pool optimum plus k random entries, or one of the
//! twelve selection configurations (criterion x strategy x whether
//! optimality cuts are filtered, each on the exact backend and again on
//! the annealer). A matrix runs each case several times over one
//! problem, records a trace per run, and folds the runs into a summary
//! table keyed by the case labels.

use crate::benders::{run_benders, BendersConfig, BendersTrace, MixedProblem, RunStatus, SelectionMode};
use crate::cutsel::{Criterion, Strategy};
use crate::exec::map_indexed;
use crate::qubo::Backend;
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("unknown case label '{0}'")]
    UnknownLabel(String),
    #[error("a case needs at least one repeat")]
    NoRepeats,
}

/// One column of the benchmark table.
#[derive(Clone, Debug)]
pub struct CaseSpec {
    /// Display label: "BD", "All cuts", "Random" or "C1".."C12".
    pub label: String,
    pub mode: SelectionMode,
    pub backend: Backend,
    /// One run per entry; the same seeds across cases keep columns
    /// comparable.
    pub seeds: Vec<u64>,
}

/// Knobs for building the standard labeled cases.
#[derive(Clone, Debug)]
pub struct CaseOptions {
    pub repeats: usize,
    pub base_seed: u64,
    /// Selection cap for the max-coverage strategy.
    pub cap_m: usize,
    /// Random entries drawn besides the pool optimum in random mode.
    pub random_k: usize,
    /// Backend for C1..C6.
    pub exact: Backend,
    /// Backend for C7..C12.
    pub annealer: Backend,
}

impl Default for CaseOptions {
    fn default() -> Self {
        CaseOptions {
            repeats: 5,
            base_seed: 0,
            cap_m: 3,
            random_k: 3,
            exact: Backend::Exhaustive { cap: crate::qubo::DEFAULT_EXHAUSTIVE_CAP },
            annealer: Backend::Annealer { exec: crate::exec::ExecMode::default() },
        }
    }
}

/// Labels of the full standard matrix, in table order.
pub const STANDARD_LABELS: [&str; 15] = [
    "BD", "All cuts", "Random", "C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10",
    "C11", "C12",
];

impl CaseSpec {
    /// Builds the case a standard label stands for. Labels are matched
    /// case-insensitively, with "all" and "all-cuts" accepted for the
    /// all-cuts column.
    pub fn from_label(label: &str, opts: &CaseOptions) -> Result<CaseSpec, CaseError> {
        if opts.repeats == 0 {
            return Err(CaseError::NoRepeats);
        }
        let canon = label.to_ascii_lowercase();
        let (display, mode, backend) = match canon.as_str() {
            "bd" => ("BD", SelectionMode::PlainBd, opts.exact.clone()),
            "all" | "all-cuts" | "all cuts" => {
                ("All cuts", SelectionMode::AllCuts, opts.exact.clone())
            }
            "random" => ("Random", SelectionMode::RandomK { k: opts.random_k }, opts.exact.clone()),
            _ => {
                let Some(index) = canon
                    .strip_prefix('c')
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|n| (1..=12).contains(n))
                else {
                    return Err(CaseError::UnknownLabel(label.to_string()));
                };
                // C1..C6 and C7..C12 share the same three-column pattern:
                // strategy switches halfway through each sextet, the
                // criterion and the optimality filter cycle within each
                // triple.
                let strategy = if (index - 1) % 6 < 3 {
                    Strategy::MinSetCover
                } else {
                    Strategy::MaxCoverage { cap: opts.cap_m }
                };
                let (criterion, opt_select) = match (index - 1) % 3 {
                    0 => (Criterion::Exclusion, false),
                    1 => (Criterion::Coverage, false),
                    _ => (Criterion::Coverage, true),
                };
                let backend =
                    if index <= 6 { opts.exact.clone() } else { opts.annealer.clone() };
                let mode = SelectionMode::Select { criterion, strategy, opt_select };
                return Ok(CaseSpec {
                    label: format!("C{index}"),
                    mode,
                    backend,
                    seeds: opts.seed_list(),
                });
            }
        };
        Ok(CaseSpec { label: display.into(), mode, backend, seeds: opts.seed_list() })
    }

    /// The run configuration for one repeat: the shared base with this
    /// case's policy and the repeat's seed spliced in.
    pub fn config(&self, base: &BendersConfig, seed: u64) -> BendersConfig {
        let mut cfg = base.clone();
        cfg.mode = self.mode.clone();
        cfg.backend = self.backend.clone();
        cfg.seed = seed;
        cfg.sample_params.seed = seed;
        cfg
    }
}

impl CaseOptions {
    fn seed_list(&self) -> Vec<u64> {
        (0..self.repeats).map(|r| self.base_seed + r as u64).collect()
    }
}

/// One finished run of one case.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub iterations: usize,
    pub objective: f64,
    pub lower_bound: f64,
    pub status: RunStatus,
    pub mp_ms: u64,
    pub sp_ms: u64,
    pub matrix_ms: u64,
    pub select_ms: u64,
    pub sampler_us: u64,
    /// Sum of the four wall-clock components.
    pub total_ms: u64,
    pub trace: BendersTrace,
}

impl RunRecord {
    fn new(seed: u64, objective: f64, trace: BendersTrace) -> RunRecord {
        let sum = |f: fn(&crate::benders::IterationRecord) -> u64| -> u64 {
            trace.records.iter().map(f).sum()
        };
        let (mp_ms, sp_ms) = (sum(|r| r.mp_ms), sum(|r| r.sp_ms));
        let (matrix_ms, select_ms) = (sum(|r| r.matrix_ms), sum(|r| r.select_ms));
        RunRecord {
            seed,
            iterations: trace.iterations(),
            objective,
            lower_bound: trace.final_lb(),
            status: trace.status,
            mp_ms,
            sp_ms,
            matrix_ms,
            select_ms,
            sampler_us: sum(|r| r.sampler_us),
            total_ms: mp_ms + sp_ms + matrix_ms + select_ms,
            trace,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunFailure {
    pub seed: u64,
    pub error: String,
}

/// All repeats of one case; failures are kept alongside the runs rather
/// than aborting the matrix.
#[derive(Clone, Debug)]
pub struct CaseResult {
    pub spec: CaseSpec,
    pub runs: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
}

pub fn run_case(p: &MixedProblem, base: &BendersConfig, spec: &CaseSpec) -> CaseResult {
    // Repeats fan out data-parallel; keying the merge by seed keeps the
    // aggregate independent of completion order.
    let outcomes = map_indexed(base.exec, spec.seeds.len(), |r| {
        let seed = spec.seeds[r];
        (seed, run_benders(p, &spec.config(base, seed)))
    });
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok((_, objective, trace)) => runs.push(RunRecord::new(seed, objective, trace)),
            Err(e) => failures.push(RunFailure { seed, error: e.to_string() }),
        }
    }
    runs.sort_by_key(|r| r.seed);
    failures.sort_by_key(|f| f.seed);
    CaseResult { spec: spec.clone(), runs, failures }
}

pub fn run_case_matrix(
    p: &MixedProblem,
    base: &BendersConfig,
    cases: &[CaseSpec],
) -> Vec<CaseResult> {
    cases.iter().map(|spec| run_case(p, base, spec)).collect()
}

/// Per-case aggregate. Every mean is the exact arithmetic mean over the
/// successful runs; a case with no successful run reports `None`.
#[derive(Clone, Debug, Serialize)]
pub struct CaseSummary {
    pub label: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_iterations: Option<f64>,
    pub mean_total_s: Option<f64>,
    pub mean_mp_s: Option<f64>,
    pub mean_sp_s: Option<f64>,
    pub mean_matrix_s: Option<f64>,
    pub mean_select_s: Option<f64>,
    pub mean_sampler_us: Option<f64>,
    pub mean_objective: Option<f64>,
}

impl CaseSummary {
    pub fn of(result: &CaseResult) -> CaseSummary {
        let n = result.runs.len();
        let mean = |f: fn(&RunRecord) -> f64| -> Option<f64> {
            (n > 0).then(|| result.runs.iter().map(f).sum::<f64>() / n as f64)
        };
        let ms_to_s = 1e-3;
        CaseSummary {
            label: result.spec.label.clone(),
            runs: n,
            failures: result.failures.len(),
            mean_iterations: mean(|r| r.iterations as f64),
            mean_total_s: mean(|r| r.total_ms as f64).map(|v| v * ms_to_s),
            mean_mp_s: mean(|r| r.mp_ms as f64).map(|v| v * ms_to_s),
            mean_sp_s: mean(|r| r.sp_ms as f64).map(|v| v * ms_to_s),
            mean_matrix_s: mean(|r| r.matrix_ms as f64).map(|v| v * ms_to_s),
            mean_select_s: mean(|r| r.select_ms as f64).map(|v| v * ms_to_s),
            mean_sampler_us: mean(|r| r.sampler_us as f64),
            mean_objective: mean(|r| r.objective),
        }
    }
}

/// Hardware-mapping time rows have no analog on the local backends: the
/// samplers here take the problem graph as-is, so there is nothing to
/// embed and reporting zeros would fake a measurement.
pub const OMITTED_ROWS_NOTE: &str =
    "minor embedding rows omitted: local samplers take the problem graph as-is";

/// Sampler access is modeled anneal time and reported in microseconds;
/// the other time rows are wall-clock seconds.
pub const SAMPLER_ROW_NOTE: &str =
    "Sampler access is modeled per-read time (us); other time rows are wall seconds";

#[derive(Clone, Debug, Serialize)]
pub struct SummaryTable {
    pub cases: Vec<CaseSummary>,
    pub notes: [&'static str; 2],
}

pub fn summarize(results: &[CaseResult]) -> SummaryTable {
    assert!(!results.is_empty(), "summarize needs at least one case");
    SummaryTable {
        cases: results.iter().map(CaseSummary::of).collect(),
        notes: [OMITTED_ROWS_NOTE, SAMPLER_ROW_NOTE],
    }
}

impl SummaryTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// Fixed-width text table: metric rows down, case labels across.
    /// Cases whose every run failed render as a `failed` column.
    pub fn to_text(&self) -> String {
        const ROWS: [(&str, fn(&CaseSummary) -> Option<f64>); 8] = [
            ("Iterations", |c| c.mean_iterations),
            ("Time (s)", |c| c.mean_total_s),
            ("MP solution (s)", |c| c.mean_mp_s),
            ("DSP solution (s)", |c| c.mean_sp_s),
            ("M construction (s)", |c| c.mean_matrix_s),
            ("Cut selection (s)", |c| c.mean_select_s),
            ("Sampler access (us)", |c| c.mean_sampler_us),
            ("Objective", |c| c.mean_objective),
        ];
        let label_w = ROWS.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
        let cell = |v: Option<f64>| match v {
            Some(v) => format!("{v:.2}"),
            None => "failed".into(),
        };
        let col_w: Vec<usize> = self
            .cases
            .iter()
            .map(|c| {
                ROWS.iter()
                    .map(|(_, f)| cell(f(c)).len())
                    .chain([c.label.len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();

        let mut out = String::new();
        let _ = write!(out, "{:label_w$}", "");
        for (c, w) in self.cases.iter().zip(&col_w) {
            let _ = write!(out, "  {:>w$}", c.label);
        }
        out.push('\n');
        for (name, f) in ROWS {
            let _ = write!(out, "{name:label_w$}");
            for (c, w) in self.cases.iter().zip(&col_w) {
                let _ = write!(out, "  {:>w$}", cell(f(c)));
            }
            out.push('\n');
        }
        for note in self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}
