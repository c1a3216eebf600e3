//! Cross-checks branch and bound against exhaustive enumeration of the
//! binary assignments, each completed by a cold LP solve.

use mcbd::dense::DenseMatrix;
use mcbd::lp::{solve_lp, LinearProgram, LpOutcome, Sense, SimplexOptions};
use mcbd::milp::{solve_milp, MilpOptions, MilpOutcome};
use proptest::prelude::*;

/// None = no assignment has a feasible completion.
fn brute_force_min(lp: &LinearProgram, binaries: &[usize]) -> Option<f64> {
    let p = binaries.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << p) {
        let mut fixed = lp.clone();
        for (k, &j) in binaries.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            fixed.lower[j] = v;
            fixed.upper[j] = v;
        }
        if let LpOutcome::Optimal(s) = solve_lp(&fixed, &SimplexOptions::default()).unwrap() {
            best = Some(match best {
                Some(b) => b.min(s.objective),
                None => s.objective,
            });
        }
    }
    best
}

fn row_feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    let ax = lp.constraints.mul_vec(x);
    (0..lp.n_rows()).all(|i| match lp.senses[i] {
        Sense::Ge => ax[i] >= lp.rhs[i] - 1e-6,
        Sense::Le => ax[i] <= lp.rhs[i] + 1e-6,
        Sense::Eq => (ax[i] - lp.rhs[i]).abs() <= 1e-6,
    })
}

#[derive(Clone, Debug)]
struct Case {
    lp: LinearProgram,
    binaries: Vec<usize>,
}

fn case_strategy() -> impl Strategy<Value = Case> {
    (1usize..=5, 0usize..=3, 1usize..=6)
        .prop_flat_map(|(p, nc, q)| {
            let n = p + nc;
            let coeff = proptest::collection::vec(-3i32..=3, n * q);
            let obj = proptest::collection::vec(-4i32..=4, n);
            let rhs = proptest::collection::vec(-4i32..=4, q);
            let senses = proptest::collection::vec(0u8..3, q);
            (Just(p), Just(nc), Just(q), coeff, obj, rhs, senses)
        })
        .prop_map(|(p, nc, q, coeff, obj, rhs, senses)| {
            let n = p + nc;
            let mut lp = LinearProgram::new(n);
            lp.objective = obj.iter().map(|&v| v as f64).collect();
            for j in 0..n {
                lp.upper[j] = if j < p { 1.0 } else { 3.0 };
            }
            lp.constraints = DenseMatrix::from_rows(
                (0..q)
                    .map(|i| coeff[i * n..(i + 1) * n].iter().map(|&v| v as f64).collect())
                    .collect(),
            );
            lp.rhs = rhs.iter().map(|&v| v as f64).collect();
            lp.senses = senses
                .iter()
                .map(|&s| match s {
                    0 => Sense::Ge,
                    1 => Sense::Le,
                    _ => Sense::Eq,
                })
                .collect();
            Case { lp, binaries: (0..p).collect() }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn pool_optimum_matches_enumeration(case in case_strategy()) {
        let Case { lp, binaries } = case;
        let opts = MilpOptions { pool_size: 6, ..MilpOptions::default() };
        let got = solve_milp(&lp, &binaries, opts).unwrap();
        let want = brute_force_min(&lp, &binaries);
        match (got, want) {
            (MilpOutcome::Feasible(r), Some(v)) => {
                prop_assert!(r.complete);
                let e0 = &r.pool[0];
                prop_assert!(
                    (e0.objective - v).abs() <= 1e-6 * (1.0 + v.abs()),
                    "pool head {} vs enumerated {v}", e0.objective
                );
                prop_assert!(e0.proven_optimal);
                // Pool invariants: exact binaries, feasibility, ordering,
                // distinct assignments, gap threshold.
                let keep = v + opts.pool_gap * v.abs().max(1.0);
                let mut prev_key: Option<Vec<u8>> = None;
                let mut prev_obj = f64::NEG_INFINITY;
                for e in &r.pool {
                    for &b in &e.binary {
                        prop_assert!(b == 0.0 || b == 1.0);
                    }
                    prop_assert!(row_feasible(&lp, &e.assignment), "pool entry violates rows");
                    prop_assert!(e.objective >= prev_obj - 1e-9, "pool out of order");
                    prop_assert!(e.objective <= keep + 1e-6, "entry beyond pool gap");
                    prev_obj = e.objective;
                    let key: Vec<u8> = e.binary.iter().map(|&b| b as u8).collect();
                    prop_assert!(prev_key.as_ref() != Some(&key), "duplicate assignment");
                    prev_key = Some(key);
                }
            }
            (MilpOutcome::Infeasible, None) => {}
            (MilpOutcome::Feasible(r), None) => {
                prop_assert!(false, "solver found {} but enumeration says infeasible",
                    r.pool[0].objective);
            }
            (MilpOutcome::Infeasible, Some(v)) => {
                prop_assert!(false, "solver says infeasible but enumeration found {v}");
            }
        }
    }
}
