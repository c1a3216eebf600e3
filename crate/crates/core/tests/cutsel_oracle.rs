//! Selection encodings against independent brute-force oracles: subset
//! enumeration for the covering problems, term-by-term Hamiltonian
//! evaluation for encoder exactness.

use mcbd::cutsel::{
    encode_max_coverage, encode_set_cover, decode_selection, inspect_matrix, qubit_upper_bound,
    select_cuts, Criterion, Cut, CutKind, EncodeOptions, EncodedSelection, IndicatorMatrix,
    MatrixKind, RowMeta, SelectionContext, Strategy,
};
use mcbd::qubo::{Backend, Qubo, SampleParams, VarRole};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn matrix_from_bits(bits: Vec<Vec<u8>>) -> IndicatorMatrix {
    let rows = (0..bits.len())
        .map(|i| RowMeta { cut: i, source_objective: 10.0 + i as f64, source_rank: i })
        .collect();
    let cols = (0..bits[0].len()).collect();
    IndicatorMatrix { kind: MatrixKind::CoverFeasibility, bits, rows, cols }
}

fn random_bits(rng: &mut ChaCha8Rng) -> Vec<Vec<u8>> {
    let ni = rng.random_range(1..=6);
    let nj = rng.random_range(1..=6);
    let density = [0.25, 0.5, 0.75][rng.random_range(0..3)];
    (0..ni)
        .map(|_| (0..nj).map(|_| u8::from(rng.random::<f64>() < density)).collect())
        .collect()
}

fn coverage(bits: &[Vec<u8>], subset: u32, nj: usize) -> usize {
    (0..nj)
        .filter(|&j| bits.iter().enumerate().any(|(i, r)| subset >> i & 1 == 1 && r[j] == 1))
        .count()
}

/// Smallest subset of rows covering every column, by full enumeration.
fn oracle_min_cover(bits: &[Vec<u8>]) -> Option<usize> {
    let ni = bits.len();
    let nj = bits[0].len();
    (0u32..1 << ni)
        .filter(|&s| coverage(bits, s, nj) == nj)
        .map(|s| s.count_ones() as usize)
        .min()
}

/// Most columns coverable with at most `cap` rows, by full enumeration.
fn oracle_max_coverage(bits: &[Vec<u8>], cap: usize) -> usize {
    let ni = bits.len();
    let nj = bits[0].len();
    (0u32..1 << ni)
        .filter(|s| (s.count_ones() as usize) <= cap)
        .map(|s| coverage(bits, s, nj))
        .max()
        .unwrap_or(0)
}

fn decision_rows(q: &Qubo, bits: &[u8]) -> Vec<usize> {
    q.roles()
        .iter()
        .enumerate()
        .filter_map(|(v, r)| match r {
            VarRole::Decision(i) if bits[v] == 1 => Some(*i),
            _ => None,
        })
        .collect()
}

/// Evaluate the set-cover Hamiltonian directly from its definition:
/// objective weight per selected row plus per-column balance penalties on
/// coverage minus one minus the binary-expanded surplus.
fn symbolic_set_cover(enc: &EncodedSelection, m: &IndicatorMatrix, bits: &[u8]) -> f64 {
    let mut chi = vec![0u8; m.n_rows()];
    let mut slack = vec![0.0; m.n_cols()];
    for (v, role) in enc.qubo.roles().iter().enumerate() {
        match role {
            VarRole::Decision(i) => chi[*i] = bits[v],
            VarRole::ColumnSlack { col, bit } => {
                slack[*col] += f64::from(bits[v]) * f64::from(1u32 << bit)
            }
            _ => panic!("unexpected role in a set-cover encoding"),
        }
    }
    let mut h = enc.objective_weight * chi.iter().map(|&c| f64::from(c)).sum::<f64>();
    for j in 0..m.n_cols() {
        let cover: f64 = (0..m.n_rows()).map(|i| f64::from(m.bits[i][j] * chi[i])).sum();
        h += enc.balance_weights[j] * (cover - 1.0 - slack[j]).powi(2);
    }
    h
}

/// Same for max coverage: negative reward per claimed column, balance
/// penalties tying claims to actual coverage, cardinality penalty on the
/// selection count against the cap.
fn symbolic_max_coverage(
    enc: &EncodedSelection,
    m: &IndicatorMatrix,
    cap: usize,
    bits: &[u8],
) -> f64 {
    let mut chi = vec![0u8; m.n_rows()];
    let mut phi = vec![0u8; m.n_cols()];
    let mut slack = vec![0.0; m.n_cols()];
    let mut card_slack = 0.0;
    for (v, role) in enc.qubo.roles().iter().enumerate() {
        match role {
            VarRole::Decision(i) => chi[*i] = bits[v],
            VarRole::Coverage(j) => phi[*j] = bits[v],
            VarRole::ColumnSlack { col, bit } => {
                slack[*col] += f64::from(bits[v]) * f64::from(1u32 << bit)
            }
            VarRole::CardinalitySlack { bit } => {
                card_slack += f64::from(bits[v]) * f64::from(1u32 << bit)
            }
        }
    }
    let selected: f64 = chi.iter().map(|&c| f64::from(c)).sum();
    let mut h = -enc.objective_weight * phi.iter().map(|&p| f64::from(p)).sum::<f64>();
    for j in 0..m.n_cols() {
        let cover: f64 = (0..m.n_rows()).map(|i| f64::from(m.bits[i][j] * chi[i])).sum();
        h += enc.balance_weights[j] * (cover - f64::from(phi[j]) - slack[j]).powi(2);
    }
    h += enc.cardinality_weight * (selected - cap as f64 + card_slack).powi(2);
    h
}

fn exhaustive() -> Backend {
    Backend::Exhaustive { cap: 25 }
}

#[test]
fn set_cover_ground_states_match_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e7c0fe5);
    let mut solved = 0;
    for _ in 0..400 {
        let m = matrix_from_bits(random_bits(&mut rng));
        let insp = inspect_matrix(&m);
        let r = &insp.reduced;
        if r.n_rows() == 0 || insp.shortcut.is_some() {
            continue;
        }
        let oracle = oracle_min_cover(&r.bits).expect("inspected columns are all coverable");
        let enc = encode_set_cover(r).unwrap();
        assert!(
            enc.qubo.n()
                <= qubit_upper_bound(
                    Criterion::Coverage,
                    Strategy::MinSetCover,
                    r.n_rows(),
                    r.n_cols(),
                    true
                )
        );
        let samples = exhaustive().solve(&enc.qubo, &SampleParams::default()).unwrap();
        assert_eq!(
            samples.best().energy,
            oracle as f64,
            "ground energy must equal the optimal cover size"
        );
        let (rows, diag) =
            decode_selection(&enc.qubo, &samples, r, Strategy::MinSetCover).unwrap();
        assert_eq!(diag.violations, 0, "ground state decodes to a feasible cover");
        assert_eq!(rows.len(), oracle);
        for j in 0..r.n_cols() {
            assert!(
                rows.iter().any(|&i| r.bits[i][j] == 1),
                "column {j} left uncovered by a valid selection"
            );
        }
        solved += 1;
    }
    assert!(solved >= 60, "only {solved} matrices exercised the encoder");
}

#[test]
fn max_coverage_ground_states_match_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0ffee11);
    let mut solved = 0;
    for trial in 0..400 {
        let cap = 1 + trial % 3;
        let m = matrix_from_bits(random_bits(&mut rng));
        let insp = inspect_matrix(&m);
        let r = &insp.reduced;
        if r.n_rows() == 0 || insp.shortcut.is_some() {
            continue;
        }
        let oracle = oracle_max_coverage(&r.bits, cap);
        let enc = encode_max_coverage(r, cap, &EncodeOptions::default()).unwrap();
        assert!(
            enc.qubo.n()
                <= qubit_upper_bound(
                    Criterion::Coverage,
                    Strategy::MaxCoverage { cap },
                    r.n_rows(),
                    r.n_cols(),
                    true
                )
        );
        let samples = exhaustive().solve(&enc.qubo, &SampleParams::default()).unwrap();
        assert_eq!(
            samples.best().energy,
            -(oracle as f64),
            "ground energy must equal minus the best coverage"
        );
        let (rows, diag) =
            decode_selection(&enc.qubo, &samples, r, Strategy::MaxCoverage { cap }).unwrap();
        assert_eq!(diag.violations, 0);
        assert!(rows.len() <= cap, "selection exceeded the cap");
        let covered = (0..r.n_cols())
            .filter(|&j| rows.iter().any(|&i| r.bits[i][j] == 1))
            .count();
        assert_eq!(covered, oracle, "selected rows miss the achievable coverage");
        solved += 1;
    }
    assert!(solved >= 60, "only {solved} matrices exercised the encoder");
}

#[test]
fn encodings_equal_their_hamiltonians_on_every_bitstring() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4a11);
    for trial in 0..12 {
        let ni = rng.random_range(1..=3);
        let nj = rng.random_range(1..=3);
        let bits: Vec<Vec<u8>> =
            (0..ni).map(|_| (0..nj).map(|_| rng.random_range(0..=1)).collect()).collect();
        let m = matrix_from_bits(bits);
        let insp = inspect_matrix(&m);
        let r = &insp.reduced;
        if r.n_rows() == 0 {
            continue;
        }
        let cap = 1 + trial % 3;
        let set = encode_set_cover(r).unwrap();
        let keep = trial % 2 == 0;
        let cov =
            encode_max_coverage(r, cap, &EncodeOptions { keep_cardinality_slacks: keep }).unwrap();
        for (enc, is_cover) in [(&set, false), (&cov, true)] {
            let n = enc.qubo.n();
            assert!(n <= 16, "exactness sweep should stay tiny, got {n}");
            for mask in 0u32..1 << n {
                let assignment: Vec<u8> = (0..n).map(|k| (mask >> k & 1) as u8).collect();
                let symbolic = if is_cover {
                    symbolic_max_coverage(enc, r, cap, &assignment)
                } else {
                    symbolic_set_cover(enc, r, &assignment)
                };
                let diff = (enc.qubo.energy(&assignment) - symbolic).abs();
                assert!(diff <= 1e-9, "energy drifted {diff} from the Hamiltonian");
            }
        }
    }
}

#[test]
fn frozen_three_row_example() {
    let m = matrix_from_bits(vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 0]]);

    let enc = encode_set_cover(&m).unwrap();
    let samples = exhaustive().solve(&enc.qubo, &SampleParams::default()).unwrap();
    assert_eq!(samples.best().energy, 2.0, "two rows suffice, at unit weight each");
    let picked = decision_rows(&enc.qubo, &samples.best().bits);
    assert_eq!(picked.len(), 2);
    assert!(
        picked == vec![0, 1] || picked == vec![1, 2],
        "both minimum covers contain row 1, got {picked:?}"
    );

    let enc = encode_max_coverage(&m, 1, &EncodeOptions::default()).unwrap();
    let samples = exhaustive().solve(&enc.qubo, &SampleParams::default()).unwrap();
    assert_eq!(samples.best().energy, -2.0, "one row can claim two columns");
    let picked = decision_rows(&enc.qubo, &samples.best().bits);
    assert!(picked == vec![0] || picked == vec![1], "rows 0 and 1 each cover two columns");
}

#[test]
fn inspection_is_idempotent_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d3);
    for _ in 0..200 {
        let m = matrix_from_bits(random_bits(&mut rng));
        let once = inspect_matrix(&m);
        let twice = inspect_matrix(&once.reduced);
        assert_eq!(once.reduced.bits, twice.reduced.bits);
        assert_eq!(once.reduced.cols, twice.reduced.cols);
        assert_eq!(once.shortcut, twice.shortcut);
        assert!(twice.dropped_columns.is_empty());
    }
}

fn feas_cut(coeff_y: Vec<f64>, constant: f64, rank: usize, obj: f64) -> Cut {
    Cut::new(CutKind::Feasibility, vec![], constant, coeff_y, rank, obj)
}

fn opt_cut(coeff_y: Vec<f64>, rank: usize, obj: f64) -> Cut {
    Cut::new(CutKind::Optimality, vec![], 0.0, coeff_y, rank, obj)
}

fn random_cuts(rng: &mut ChaCha8Rng, n_feas: usize, n_opt: usize, m: usize) -> Vec<Cut> {
    let mut cuts = Vec::new();
    for k in 0..n_feas + n_opt {
        let coeff: Vec<f64> = (0..m)
            .map(|_| if rng.random::<f64>() < 0.4 { rng.random_range(-3.0..3.0) } else { 0.0 })
            .collect();
        if k < n_feas {
            cuts.push(feas_cut(coeff, rng.random_range(-1.0..1.0), k, k as f64));
        } else {
            cuts.push(opt_cut(coeff, k, k as f64));
        }
    }
    cuts
}

#[test]
fn coverage_selection_respects_cap_and_opt_flag() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xabcd);
    let backend = exhaustive();
    for trial in 0..20 {
        let m = 6;
        let cuts = random_cuts(&mut rng, 7, 5, m);
        let sources: Vec<Vec<f64>> =
            (0..7).map(|_| (0..m).map(|_| f64::from(rng.random_range(0..=1))).collect()).collect();
        let opt_select = trial % 2 == 0;
        let ctx = SelectionContext {
            criterion: Criterion::Coverage,
            strategy: Strategy::MaxCoverage { cap: 3 },
            opt_select,
            backend: &backend,
            params: SampleParams::default(),
            master_len: m,
            encode: EncodeOptions::default(),
        };
        let report = select_cuts(&cuts, &sources, &ctx).unwrap();
        assert!(report.n_feas_selected <= 3, "feasibility picks over the cap");
        if opt_select {
            assert!(report.n_opt_selected <= 3, "optimality picks over the cap");
        } else {
            assert_eq!(report.n_opt_selected, 5, "selection off passes every optimality cut");
        }
        for &i in &report.selected {
            assert!(i < cuts.len());
        }
    }
}

#[test]
fn exclusion_shortcut_skips_the_sampler() {
    let backend = exhaustive();
    // First cut violated by every source point; the others only by their
    // own (the forced diagonal).
    let cuts = vec![
        feas_cut(vec![0.0, 0.0], 1.0, 0, 1.0),
        feas_cut(vec![0.0, 0.0], -1.0, 1, 2.0),
        feas_cut(vec![0.0, 0.0], -1.0, 2, 3.0),
        opt_cut(vec![1.0, 0.0], 0, 1.0),
    ];
    let sources = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
    let ctx = SelectionContext {
        criterion: Criterion::Exclusion,
        strategy: Strategy::MinSetCover,
        opt_select: false,
        backend: &backend,
        params: SampleParams::default(),
        master_len: 2,
        encode: EncodeOptions::default(),
    };
    let report = select_cuts(&cuts, &sources, &ctx).unwrap();
    assert_eq!(report.qubo_solves, 0, "an all-ones row must bypass the sampler");
    assert_eq!(report.n_feas_selected, 1);
    assert_eq!(report.n_opt_selected, 1, "exclusion never filters optimality cuts");
    assert_eq!(report.selected, vec![0, 3]);
}

#[test]
fn exclusion_selection_covers_every_point() {
    // No single cut excludes everything, so a QUBO is solved; the chosen
    // cuts together must exclude all three points.
    let backend = exhaustive();
    let cuts = vec![
        feas_cut(vec![1.0, 0.0, 0.0], 0.0, 0, 1.0),
        feas_cut(vec![0.0, 1.0, 0.0], 0.0, 1, 2.0),
        feas_cut(vec![0.0, 0.0, 1.0], 0.0, 2, 3.0),
    ];
    // Point k activates cut k and cut (k+1)%3.
    let sources = vec![
        vec![1.0, 1.0, 0.0],
        vec![0.0, 1.0, 1.0],
        vec![1.0, 0.0, 1.0],
    ];
    let ctx = SelectionContext {
        criterion: Criterion::Exclusion,
        strategy: Strategy::MinSetCover,
        opt_select: false,
        backend: &backend,
        params: SampleParams::default(),
        master_len: 3,
        encode: EncodeOptions::default(),
    };
    let report = select_cuts(&cuts, &sources, &ctx).unwrap();
    assert_eq!(report.qubo_solves, 1);
    assert_eq!(report.n_feas_selected, 2, "two cuts cover the three points pairwise");
    for (j, y) in sources.iter().enumerate() {
        assert!(
            report.selected.iter().any(|&i| cuts[i].value_at(y) > 0.0),
            "point {j} not excluded by the selection"
        );
    }
}
