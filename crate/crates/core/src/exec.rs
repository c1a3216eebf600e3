//! Execution-mode switch. Data-parallel fan-outs (subproblem solves,
//! annealer reads, benchmark repeats) go through [`map_indexed`] so the
//! parallel and sequential paths share one call site. Results are always
//! merged in input order, so outcomes are identical in both modes.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Rayon-backed. Falls back to sequential when the crate is built
    /// without the `parallel` feature.
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Order-preserving indexed map over `0..n`.
pub fn map_indexed<U, F>(mode: ExecMode, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_merge_in_the_same_order() {
        let a = map_indexed(ExecMode::Sequential, 100, |i| i * i);
        let b = map_indexed(ExecMode::Parallel, 100, |i| i * i);
        assert_eq!(a, b);
    }
}
