//! Per-iteration run records and their CSV rendering.

use serde::{Deserialize, Serialize};

/// How the timing columns are filled in.
///
/// `Wall` measures elapsed time. `Model` zeroes the wall clocks and charges
/// the sampler column a fixed 10 microseconds per requested read, so two
/// runs with the same seed produce byte-identical traces regardless of
/// host load.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimingMode {
    #[default]
    Wall,
    Model,
}

/// Modeled annealer access time per read, in microseconds.
pub const MODEL_US_PER_READ: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    IterationCap,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based iteration counter.
    pub iter: usize,
    pub lb: f64,
    pub ub: f64,
    /// Relative gap in percent: 100 (ub - lb) / max(|ub|, 1).
    pub gap_pct: f64,
    pub n_feas_cuts_generated: usize,
    pub n_opt_cuts_generated: usize,
    pub n_feas_selected: usize,
    pub n_opt_selected: usize,
    /// Master row count at the time this iteration's master was solved.
    pub mp_constraints: usize,
    pub mp_ms: u64,
    pub sp_ms: u64,
    /// Indicator-matrix construction time.
    pub matrix_ms: u64,
    /// Whole cut-selection pass, sampler included.
    pub select_ms: u64,
    /// Sampler access only; under `TimingMode::Model` this is
    /// `MODEL_US_PER_READ` per requested read.
    pub sampler_us: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BendersTrace {
    pub records: Vec<IterationRecord>,
    pub status: RunStatus,
}

pub const TRACE_HEADER: &str = "iter,lb,ub,gap_pct,n_feas_cuts_generated,n_opt_cuts_generated,\
n_feas_selected,n_opt_selected,mp_constraints,mp_ms,sp_ms,matrix_ms,select_ms,sampler_us";

fn fmt(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

impl BendersTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_lb(&self) -> f64 {
        self.records.last().map_or(f64::NEG_INFINITY, |r| r.lb)
    }

    pub fn final_ub(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.ub)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.iter,
                fmt(r.lb),
                fmt(r.ub),
                fmt(r.gap_pct),
                r.n_feas_cuts_generated,
                r.n_opt_cuts_generated,
                r.n_feas_selected,
                r.n_opt_selected,
                r.mp_constraints,
                r.mp_ms,
                r.sp_ms,
                r.matrix_ms,
                r.select_ms,
                r.sampler_us
            ));
        }
        out
    }
}
