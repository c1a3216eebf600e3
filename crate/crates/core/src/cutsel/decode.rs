use super::{IndicatorMatrix, SelectError, Strategy};
use crate::qubo::{Qubo, SampleSet, VarRole};

#[derive(Clone, Debug)]
pub struct DecodeDiagnostics {
    /// Occurrence-weighted share of samples passing the validity check.
    pub valid_fraction: f64,
    /// Lowest energy in the sample set.
    pub best_energy: f64,
    /// Violated-constraint count of the chosen sample; zero when valid.
    pub violations: usize,
}

/// Map sampler output back to matrix rows. The winner is the
/// lowest-energy sample whose decision bits satisfy the selection's own
/// integer constraints (slacks ignored); with no valid sample, the one
/// with the fewest violated constraints, ties by energy then
/// lexicographic bits. Samples arrive sorted by (energy, bits), so the
/// first hit under each rule is the winner.
pub fn decode_selection(
    q: &Qubo,
    samples: &SampleSet,
    m: &IndicatorMatrix,
    strategy: Strategy,
) -> Result<(Vec<usize>, DecodeDiagnostics), SelectError> {
    if samples.samples.is_empty() {
        return Err(SelectError::EmptySampleSet);
    }
    let ni = m.n_rows();
    let mut dec_var = vec![usize::MAX; ni];
    let mut cov_var = vec![usize::MAX; m.n_cols()];
    for (v, role) in q.roles().iter().enumerate() {
        match role {
            VarRole::Decision(i) => dec_var[*i] = v,
            VarRole::Coverage(j) => cov_var[*j] = v,
            _ => {}
        }
    }
    assert!(dec_var.iter().all(|&v| v != usize::MAX), "every row needs a decision bit");

    let violations = |bits: &[u8]| -> usize {
        let picked: Vec<bool> = dec_var.iter().map(|&v| bits[v] == 1).collect();
        let mut count = 0;
        match strategy {
            Strategy::MinSetCover => {
                for j in 0..m.n_cols() {
                    let covered = (0..ni).any(|i| picked[i] && m.bits[i][j] == 1);
                    if !covered {
                        count += 1;
                    }
                }
            }
            Strategy::MaxCoverage { cap } => {
                for j in 0..m.n_cols() {
                    let claimed = cov_var[j] != usize::MAX && bits[cov_var[j]] == 1;
                    let covered = (0..ni).any(|i| picked[i] && m.bits[i][j] == 1);
                    if claimed && !covered {
                        count += 1;
                    }
                }
                if picked.iter().filter(|&&p| p).count() > cap {
                    count += 1;
                }
            }
        }
        count
    };

    let total: u64 = samples.samples.iter().map(|s| u64::from(s.occurrences)).sum();
    let mut valid_occ: u64 = 0;
    let mut chosen: Option<(usize, usize)> = None;
    for (pos, s) in samples.samples.iter().enumerate() {
        let v = violations(&s.bits);
        if v == 0 {
            valid_occ += u64::from(s.occurrences);
        }
        let better = match chosen {
            None => true,
            Some((_, best_v)) => v < best_v,
        };
        if better {
            chosen = Some((pos, v));
        }
    }
    let (pos, violations_chosen) = chosen.expect("nonempty sample set");
    let bits = &samples.samples[pos].bits;
    let rows = (0..ni).filter(|&i| bits[dec_var[i]] == 1).collect();
    let diagnostics = DecodeDiagnostics {
        valid_fraction: valid_occ as f64 / total.max(1) as f64,
        best_energy: samples.samples[0].energy,
        violations: violations_chosen,
    };
    Ok((rows, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutsel::{MatrixKind, RowMeta};
    use crate::qubo::Sample;

    fn matrix(bits: Vec<Vec<u8>>) -> IndicatorMatrix {
        let rows = (0..bits.len())
            .map(|i| RowMeta { cut: i, source_objective: i as f64, source_rank: i })
            .collect();
        let cols = (0..bits[0].len()).collect();
        IndicatorMatrix { kind: MatrixKind::CoverFeasibility, bits, rows, cols }
    }

    fn qubo_with_decisions(n: usize) -> Qubo {
        Qubo::new((0..n).map(VarRole::Decision).collect())
    }

    fn set(samples: Vec<Sample>) -> SampleSet {
        SampleSet { samples }
    }

    #[test]
    fn lowest_energy_valid_sample_wins() {
        let m = matrix(vec![vec![1, 0], vec![0, 1], vec![1, 1]]);
        let q = qubo_with_decisions(3);
        let samples = set(vec![
            // Invalid but lowest energy: covers nothing.
            Sample { bits: vec![0, 0, 0], energy: -5.0, occurrences: 3 },
            Sample { bits: vec![0, 0, 1], energy: 1.0, occurrences: 2 },
            Sample { bits: vec![1, 1, 0], energy: 2.0, occurrences: 1 },
        ]);
        let (rows, diag) =
            decode_selection(&q, &samples, &m, Strategy::MinSetCover).unwrap();
        assert_eq!(rows, vec![2]);
        assert_eq!(diag.violations, 0);
        assert_eq!(diag.best_energy, -5.0);
        assert!((diag.valid_fraction - 0.5).abs() < 1e-12, "3 of 6 reads valid");
    }

    #[test]
    fn invalid_only_set_falls_back_to_fewest_violations() {
        let m = matrix(vec![vec![1, 0], vec![0, 1]]);
        let q = qubo_with_decisions(2);
        let samples = set(vec![
            Sample { bits: vec![0, 0], energy: 0.0, occurrences: 1 },
            Sample { bits: vec![1, 0], energy: 4.0, occurrences: 1 },
        ]);
        let (rows, diag) =
            decode_selection(&q, &samples, &m, Strategy::MinSetCover).unwrap();
        assert_eq!(rows, vec![0], "one uncovered column beats two");
        assert_eq!(diag.violations, 1);
        assert_eq!(diag.valid_fraction, 0.0);
    }

    #[test]
    fn cap_violations_count_for_max_coverage() {
        let m = matrix(vec![vec![1, 0], vec![0, 1]]);
        // Decisions plus coverage indicators, no slacks.
        let mut roles: Vec<VarRole> = (0..2).map(VarRole::Decision).collect();
        roles.push(VarRole::Coverage(0));
        roles.push(VarRole::Coverage(1));
        let q = Qubo::new(roles);
        let samples = set(vec![
            // Claims both columns with both rows picked: over the cap.
            Sample { bits: vec![1, 1, 1, 1], energy: 0.0, occurrences: 1 },
            // One row, claims only its column: valid.
            Sample { bits: vec![1, 0, 1, 0], energy: 3.0, occurrences: 1 },
        ]);
        let (rows, diag) =
            decode_selection(&q, &samples, &m, Strategy::MaxCoverage { cap: 1 }).unwrap();
        assert_eq!(rows, vec![0]);
        assert_eq!(diag.violations, 0);

        // A claim without coverage is a violation.
        let bogus = set(vec![Sample { bits: vec![1, 0, 1, 1], energy: 0.0, occurrences: 1 }]);
        let (_, diag) =
            decode_selection(&q, &bogus, &m, Strategy::MaxCoverage { cap: 1 }).unwrap();
        assert_eq!(diag.violations, 1);
    }

    #[test]
    fn empty_sample_set_is_an_error() {
        let m = matrix(vec![vec![1]]);
        let q = qubo_with_decisions(1);
        let r = decode_selection(&q, &set(vec![]), &m, Strategy::MinSetCover);
        assert!(matches!(r, Err(SelectError::EmptySampleSet)));
    }
}
