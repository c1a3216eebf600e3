use super::{ceil_log2, IndicatorMatrix, SelectError};
use crate::qubo::{Qubo, VarRole};

#[derive(Clone, Copy, Debug)]
pub struct EncodeOptions {
    /// Encode the cardinality bound as inequality with binary slacks. Off
    /// means a pure equality: exactly `cap` rows get selected, which is
    /// tighter and cheaper when the cap is far below the row count.
    pub keep_cardinality_slacks: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions { keep_cardinality_slacks: true }
    }
}

/// A selection QUBO plus the penalty weights that built it, so callers
/// can reconstruct the Hamiltonian term by term.
#[derive(Clone, Debug)]
pub struct EncodedSelection {
    pub qubo: Qubo,
    /// Weight on each decision bit (set cover) or coverage reward (max
    /// coverage).
    pub objective_weight: f64,
    /// Per-column balance penalty.
    pub balance_weights: Vec<f64>,
    /// Cardinality penalty; zero for set cover.
    pub cardinality_weight: f64,
}

/// weight * (sum of a_v x_v + c)^2 accumulated onto the QUBO, folding the
/// diagonal with x^2 = x.
pub(crate) fn add_squared_form(q: &mut Qubo, terms: &[(usize, f64)], c: f64, weight: f64) {
    for (k, &(i, a)) in terms.iter().enumerate() {
        q.add_linear(i, weight * (a * a + 2.0 * c * a));
        for &(j, b) in &terms[k + 1..] {
            q.add_quad(i, j, weight * 2.0 * a * b);
        }
    }
    q.add_offset(weight * c * c);
}

/// Fewest rows covering every column. Each decision bit costs 1; each
/// column contributes a balance penalty of weight |I| forcing its
/// coverage count to 1 plus a binary-expanded surplus.
pub fn encode_set_cover(m: &IndicatorMatrix) -> Result<EncodedSelection, SelectError> {
    let ni = m.n_rows();
    let nj = m.n_cols();
    if ni == 0 || nj == 0 {
        return Err(SelectError::EmptyMatrix);
    }
    let w_obj = 1.0;
    let w_bal = ni as f64;

    let mut roles: Vec<VarRole> = (0..ni).map(VarRole::Decision).collect();
    let mut col_slacks: Vec<Vec<usize>> = Vec::with_capacity(nj);
    for j in 0..nj {
        let gamma = ceil_log2(m.col_sum(j));
        let slots = (0..gamma as u32)
            .map(|bit| {
                roles.push(VarRole::ColumnSlack { col: j, bit });
                roles.len() - 1
            })
            .collect();
        col_slacks.push(slots);
    }

    let mut q = Qubo::new(roles);
    for i in 0..ni {
        q.add_linear(i, w_obj);
    }
    for j in 0..nj {
        let mut terms: Vec<(usize, f64)> = (0..ni)
            .filter(|&i| m.bits[i][j] == 1)
            .map(|i| (i, 1.0))
            .collect();
        for (alpha, &v) in col_slacks[j].iter().enumerate() {
            terms.push((v, -((1u64 << alpha) as f64)));
        }
        add_squared_form(&mut q, &terms, -1.0, w_bal);
    }
    Ok(EncodedSelection {
        qubo: q,
        objective_weight: w_obj,
        balance_weights: vec![w_bal; nj],
        cardinality_weight: 0.0,
    })
}

/// At most `cap` rows covering as many columns as possible. Coverage
/// indicators earn a reward of 1 per covered column; balance penalties
/// tie each indicator to actual coverage, and a cardinality penalty
/// enforces the cap, both at weight |I|+|J|.
pub fn encode_max_coverage(
    m: &IndicatorMatrix,
    cap: usize,
    opts: &EncodeOptions,
) -> Result<EncodedSelection, SelectError> {
    if cap < 1 {
        return Err(SelectError::InvalidCap(cap));
    }
    let ni = m.n_rows();
    let nj = m.n_cols();
    if ni == 0 || nj == 0 {
        return Err(SelectError::EmptyMatrix);
    }
    let w_obj = 1.0;
    let w_pen = (ni + nj) as f64;

    let mut roles: Vec<VarRole> = (0..ni).map(VarRole::Decision).collect();
    let mut cov_vars: Vec<usize> = Vec::with_capacity(nj);
    let mut col_slacks: Vec<Vec<usize>> = Vec::with_capacity(nj);
    for j in 0..nj {
        roles.push(VarRole::Coverage(j));
        cov_vars.push(roles.len() - 1);
        let gamma = ceil_log2(cap.min(m.col_sum(j)) + 1);
        let slots = (0..gamma as u32)
            .map(|bit| {
                roles.push(VarRole::ColumnSlack { col: j, bit });
                roles.len() - 1
            })
            .collect();
        col_slacks.push(slots);
    }
    let mut card_slacks: Vec<usize> = Vec::new();
    if opts.keep_cardinality_slacks {
        for bit in 0..ceil_log2(cap + 1) as u32 {
            roles.push(VarRole::CardinalitySlack { bit });
            card_slacks.push(roles.len() - 1);
        }
    }

    let mut q = Qubo::new(roles);
    for &v in &cov_vars {
        q.add_linear(v, -w_obj);
    }
    for j in 0..nj {
        let mut terms: Vec<(usize, f64)> = (0..ni)
            .filter(|&i| m.bits[i][j] == 1)
            .map(|i| (i, 1.0))
            .collect();
        terms.push((cov_vars[j], -1.0));
        for (alpha, &v) in col_slacks[j].iter().enumerate() {
            terms.push((v, -((1u64 << alpha) as f64)));
        }
        add_squared_form(&mut q, &terms, 0.0, w_pen);
    }
    let mut card_terms: Vec<(usize, f64)> = (0..ni).map(|i| (i, 1.0)).collect();
    for (alpha, &v) in card_slacks.iter().enumerate() {
        card_terms.push((v, ((1u64 << alpha) as f64)));
    }
    add_squared_form(&mut q, &card_terms, -(cap as f64), w_pen);

    Ok(EncodedSelection {
        qubo: q,
        objective_weight: w_obj,
        balance_weights: vec![w_pen; nj],
        cardinality_weight: w_pen,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutsel::{MatrixKind, RowMeta};

    pub(crate) fn plain_matrix(bits: Vec<Vec<u8>>, kind: MatrixKind) -> IndicatorMatrix {
        let rows = (0..bits.len())
            .map(|i| RowMeta { cut: i, source_objective: i as f64, source_rank: i })
            .collect();
        let cols = (0..bits[0].len()).collect();
        IndicatorMatrix { kind, bits, rows, cols }
    }

    #[test]
    fn column_sum_five_gets_three_slack_bits() {
        let bits = vec![vec![1u8]; 5];
        let m = plain_matrix(bits, MatrixKind::CoverFeasibility);
        let enc = encode_set_cover(&m).unwrap();
        let slacks = enc
            .qubo
            .roles()
            .iter()
            .filter(|r| matches!(r, VarRole::ColumnSlack { .. }))
            .count();
        assert_eq!(slacks, 3);
        assert_eq!(enc.qubo.n(), 8);
    }

    #[test]
    fn unit_column_sums_need_no_slack() {
        let m = plain_matrix(vec![vec![1, 0], vec![0, 1]], MatrixKind::CoverFeasibility);
        let enc = encode_set_cover(&m).unwrap();
        assert_eq!(enc.qubo.n(), 2);
        // Both rows mandatory: energy 2 at (1,1), worse everywhere else.
        assert_eq!(enc.qubo.energy(&[1, 1]), 2.0);
        assert_eq!(enc.qubo.energy(&[1, 0]), 1.0 + 2.0);
        assert_eq!(enc.qubo.energy(&[0, 0]), 4.0);
    }

    #[test]
    fn empty_matrices_are_rejected() {
        let empty = IndicatorMatrix {
            kind: MatrixKind::CoverFeasibility,
            bits: vec![],
            rows: vec![],
            cols: vec![],
        };
        assert!(matches!(encode_set_cover(&empty), Err(SelectError::EmptyMatrix)));
        assert!(matches!(
            encode_max_coverage(&empty, 2, &EncodeOptions::default()),
            Err(SelectError::EmptyMatrix)
        ));
    }

    #[test]
    fn zero_cap_is_rejected() {
        let m = plain_matrix(vec![vec![1]], MatrixKind::CoverFeasibility);
        assert!(matches!(
            encode_max_coverage(&m, 0, &EncodeOptions::default()),
            Err(SelectError::InvalidCap(0))
        ));
    }

    #[test]
    fn equality_cardinality_drops_its_slacks() {
        let m = plain_matrix(vec![vec![1, 0], vec![0, 1]], MatrixKind::CoverFeasibility);
        let with = encode_max_coverage(&m, 2, &EncodeOptions::default()).unwrap();
        let without =
            encode_max_coverage(&m, 2, &EncodeOptions { keep_cardinality_slacks: false }).unwrap();
        let card = |e: &EncodedSelection| {
            e.qubo
                .roles()
                .iter()
                .filter(|r| matches!(r, VarRole::CardinalitySlack { .. }))
                .count()
        };
        assert_eq!(card(&with), 2);
        assert_eq!(card(&without), 0);
        // Variable order: x0, x1, phi0, slack0, phi1, slack1. Under the
        // equality form, selecting fewer than cap rows is penalized even
        // though the single row covers its column cleanly.
        let one_row = vec![1, 0, 1, 0, 0, 0];
        let both_rows = vec![1, 1, 1, 0, 1, 0];
        assert!(without.qubo.energy(&one_row) > without.qubo.energy(&both_rows));
    }
}
