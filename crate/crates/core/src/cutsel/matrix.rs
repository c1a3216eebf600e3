use super::{Cut, IndicatorMatrix, MatrixKind, RowMeta, COVER_EPS, EXCL_EPS};

/// Rows: the given feasibility cuts. Columns: the master points that
/// spawned them. Bit set when the cut excludes the point, i.e. the point
/// violates it. Each cut excludes at least its own source point, so the
/// diagonal is forced on (it can fall below tolerance numerically).
pub fn build_exclusion_matrix(
    cuts: &[Cut],
    members: &[usize],
    sources: &[Vec<f64>],
) -> IndicatorMatrix {
    assert_eq!(members.len(), sources.len());
    let n = members.len();
    let mut bits = vec![vec![0u8; n]; n];
    for (i, &ci) in members.iter().enumerate() {
        for (j, y) in sources.iter().enumerate() {
            if cuts[ci].value_at(y) > EXCL_EPS {
                bits[i][j] = 1;
            }
        }
        bits[i][i] = 1;
    }
    IndicatorMatrix {
        kind: MatrixKind::Exclusion,
        bits,
        rows: members.iter().map(|&c| row_meta(cuts, c)).collect(),
        cols: (0..n).collect(),
    }
}

/// Rows: the given cuts (all one kind). Columns: master binaries. Bit set
/// when the cut's coefficient on that binary is nonzero.
pub fn build_coverage_matrix(cuts: &[Cut], members: &[usize], master_len: usize) -> IndicatorMatrix {
    assert!(!members.is_empty(), "coverage matrix needs at least one cut");
    let kind = match cuts[members[0]].kind {
        super::CutKind::Feasibility => MatrixKind::CoverFeasibility,
        super::CutKind::Optimality => MatrixKind::CoverOptimality,
    };
    let bits = members
        .iter()
        .map(|&c| {
            assert_eq!(cuts[c].coeff_y.len(), master_len);
            debug_assert_eq!(
                std::mem::discriminant(&cuts[c].kind),
                std::mem::discriminant(&cuts[members[0]].kind),
                "coverage matrices mix cut kinds"
            );
            cuts[c].coeff_y.iter().map(|v| u8::from(v.abs() > COVER_EPS)).collect()
        })
        .collect();
    IndicatorMatrix {
        kind,
        bits,
        rows: members.iter().map(|&c| row_meta(cuts, c)).collect(),
        cols: (0..master_len).collect(),
    }
}

fn row_meta(cuts: &[Cut], c: usize) -> RowMeta {
    RowMeta {
        cut: c,
        source_objective: cuts[c].source_objective,
        source_rank: cuts[c].source_rank,
    }
}

#[derive(Clone, Debug)]
pub struct Inspection {
    pub reduced: IndicatorMatrix,
    /// A single cut (candidate-slice index) that by itself covers every
    /// remaining column; when set, no QUBO needs solving.
    pub shortcut: Option<usize>,
    /// Column targets removed because no row covered them.
    pub dropped_columns: Vec<usize>,
}

/// Cheap reductions before encoding. Rows that cover nothing (degenerate
/// duals) vanish; duplicate rows collapse to the one with the best
/// (lowest source objective, then lowest rank) provenance; columns no
/// remaining row covers are dropped, except in exclusion matrices where
/// every column is a point that must stay excluded; a row of all ones
/// wins outright. Exclusion matrices cannot have zero rows or columns
/// thanks to the forced diagonal.
pub fn inspect_matrix(m: &IndicatorMatrix) -> Inspection {
    let coverage = m.kind != MatrixKind::Exclusion;
    let mut keep: Vec<usize> = Vec::new();
    for i in 0..m.n_rows() {
        if coverage && m.bits[i].iter().all(|&b| b == 0) {
            continue;
        }
        match keep.iter().position(|&k| m.bits[k] == m.bits[i]) {
            Some(pos) => {
                let inc = &m.rows[i];
                let cur = &m.rows[keep[pos]];
                if (inc.source_objective, inc.source_rank)
                    < (cur.source_objective, cur.source_rank)
                {
                    keep[pos] = i;
                }
            }
            None => keep.push(i),
        }
    }

    let mut live_cols: Vec<usize> = Vec::new();
    let mut dropped_columns: Vec<usize> = Vec::new();
    for j in 0..m.n_cols() {
        if !coverage || keep.iter().any(|&i| m.bits[i][j] == 1) {
            live_cols.push(j);
        } else {
            dropped_columns.push(m.cols[j]);
        }
    }

    let reduced = IndicatorMatrix {
        kind: m.kind,
        bits: keep
            .iter()
            .map(|&i| live_cols.iter().map(|&j| m.bits[i][j]).collect())
            .collect(),
        rows: keep.iter().map(|&i| m.rows[i].clone()).collect(),
        cols: live_cols.iter().map(|&j| m.cols[j]).collect(),
    };

    let shortcut = reduced
        .bits
        .iter()
        .enumerate()
        .filter(|(_, row)| row.iter().all(|&b| b == 1))
        .min_by(|(a, _), (b, _)| {
            let ra = &reduced.rows[*a];
            let rb = &reduced.rows[*b];
            (ra.source_objective, ra.source_rank)
                .partial_cmp(&(rb.source_objective, rb.source_rank))
                .expect("finite objectives")
        })
        .map(|(i, _)| reduced.rows[i].cut);

    Inspection { reduced, shortcut, dropped_columns }
}
