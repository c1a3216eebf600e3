//! Dense linear programming with a bounded-variable simplex.
//!
//! Minimizes `c.x` subject to per-row senses (`>=`, `<=`, `=`) and box
//! bounds on the variables. Solutions carry one dual value per row;
//! infeasible outcomes carry a Farkas ray over the rows, normalized to
//! unit infinity norm. Identical inputs always produce bitwise-identical
//! outcomes: pivoting is deterministic and single-threaded.

mod simplex;

pub use simplex::Tableau;

use crate::dense::DenseMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

/// `min objective.x  s.t.  constraints x (senses) rhs,  lower <= x <= upper`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: DenseMatrix,
    pub senses: Vec<Sense>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// Empty program over `n` nonnegative variables with zero objective.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; n],
            constraints: DenseMatrix::zeros(0, n),
            senses: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn add_row(&mut self, coeffs: &[f64], sense: Sense, rhs: f64) {
        self.constraints.push_row(coeffs);
        self.senses.push(sense);
        self.rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        let q = self.n_rows();
        if self.constraints.cols() != n && q > 0 {
            return Err(LpError::Shape("constraint column count != variable count".into()));
        }
        if self.constraints.rows() != q || self.senses.len() != q {
            return Err(LpError::Shape("row/sense/rhs length mismatch".into()));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Shape("bound length mismatch".into()));
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] {
                return Err(LpError::Shape(format!("variable {j}: lower > upper")));
            }
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective) || !finite(&self.rhs) {
            return Err(LpError::Shape("objective/rhs must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub primal: Vec<f64>,
    /// One value per row. `>=` rows have nonnegative duals, `<=` rows
    /// nonpositive, `=` rows unrestricted (minimization convention).
    pub duals: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    /// `farkas` certifies infeasibility: aggregating the rows with these
    /// weights yields an inequality no point in the variable box satisfies.
    Infeasible { farkas: Vec<f64> },
    Unbounded,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    /// Absolute bound/row feasibility tolerance.
    pub tol_feas: f64,
    /// Reduced-cost optimality tolerance.
    pub tol_dual: f64,
    /// Smallest pivot element magnitude admitted in ratio tests.
    pub pivot_eps: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degen_limit: u32,
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            tol_feas: 1e-7,
            tol_dual: 1e-9,
            pivot_eps: 1e-10,
            degen_limit: 60,
            max_pivots: 400_000,
        }
    }
}

#[derive(Clone, Debug, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    Shape(String),
    #[error("numerical breakdown: {0}")]
    Numerical(String),
    #[error("pivot limit exhausted")]
    PivotLimit,
}

/// Cold solve: fresh tableau, two-phase primal simplex.
pub fn solve_lp(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let mut t = Tableau::from_program(lp, *opts);
    t.primal_solve()
}

/// Independent validity check of an outcome against the program it came
/// from. `Optimal` verifies primal feasibility, dual signs, complementary
/// slackness and objective match; `Infeasible` verifies the Farkas ray.
#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub ok: bool,
    pub worst_residual: f64,
    pub detail: String,
}

pub fn check_certificate(lp: &LinearProgram, out: &LpOutcome, tol: f64) -> CertificateReport {
    check_certificate_at(lp, &lp.rhs, out, tol)
}

/// [`check_certificate`] against an overridden right-hand side, for
/// outcomes produced by a warm tableau whose rhs was swapped after
/// construction. The program's own `rhs` field is ignored.
pub fn check_certificate_at(
    lp: &LinearProgram,
    rhs: &[f64],
    out: &LpOutcome,
    tol: f64,
) -> CertificateReport {
    match out {
        LpOutcome::Optimal(sol) => check_optimal(lp, rhs, sol, tol),
        LpOutcome::Infeasible { farkas } => check_farkas(lp, rhs, farkas, tol),
        LpOutcome::Unbounded => CertificateReport {
            ok: true,
            worst_residual: 0.0,
            detail: "unbounded outcomes carry no certificate".into(),
        },
    }
}

/// Gate for warm-restart verdicts. A basis reused across rhs changes,
/// bound edits and appended rows accumulates roundoff, and once a pivot
/// lands on an elimination residue the tableau turns into garbage while
/// still reporting confident outcomes. Every warm verdict must therefore
/// stand up against the pristine program data, with slack proportional to
/// the magnitudes involved, before anyone acts on it.
pub fn certified(lp: &LinearProgram, rhs: &[f64], out: &LpOutcome, tol_rel: f64) -> bool {
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut scale = 1.0 + inf(rhs);
    if let LpOutcome::Optimal(s) = out {
        scale += inf(&s.primal) + s.objective.abs();
    }
    check_certificate_at(lp, rhs, out, tol_rel * scale).ok
}

fn check_optimal(lp: &LinearProgram, rhs: &[f64], sol: &LpSolution, tol: f64) -> CertificateReport {
    let mut worst = 0.0f64;
    let mut detail = String::new();
    let n = lp.n_vars();
    let x = &sol.primal;
    if x.len() != n || sol.duals.len() != lp.n_rows() {
        return CertificateReport { ok: false, worst_residual: f64::INFINITY, detail: "length mismatch".into() };
    }
    for j in 0..n {
        let r = (lp.lower[j] - x[j]).max(x[j] - lp.upper[j]).max(0.0);
        if r > worst {
            worst = r;
            detail = format!("bound violation on variable {j}");
        }
    }
    let ax = lp.constraints.mul_vec(x);
    for i in 0..lp.n_rows() {
        let r = match lp.senses[i] {
            Sense::Ge => rhs[i] - ax[i],
            Sense::Le => ax[i] - rhs[i],
            Sense::Eq => (ax[i] - rhs[i]).abs(),
        }
        .max(0.0);
        if r > worst {
            worst = r;
            detail = format!("row {i} violated");
        }
        let bad_sign = match lp.senses[i] {
            Sense::Ge => (-sol.duals[i]).max(0.0),
            Sense::Le => sol.duals[i].max(0.0),
            Sense::Eq => 0.0,
        };
        if bad_sign > tol && bad_sign > worst {
            worst = bad_sign;
            detail = format!("dual sign on row {i}");
        }
    }
    // Reduced costs: z = c - A^T y. Stationarity needs z_j >= 0 at lower,
    // z_j <= 0 at upper, z_j = 0 for interior/free variables.
    let aty = lp.constraints.tr_mul_vec(&sol.duals);
    let scale: f64 = 1.0 + lp.objective.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for j in 0..n {
        let z = lp.objective[j] - aty[j];
        let at_lower = x[j] - lp.lower[j] <= tol.max(1e-6);
        let at_upper = lp.upper[j] - x[j] <= tol.max(1e-6);
        let r = if at_lower && at_upper {
            0.0
        } else if at_lower {
            (-z).max(0.0)
        } else if at_upper {
            z.max(0.0)
        } else {
            z.abs()
        } / scale;
        if r > worst {
            worst = r;
            detail = format!("reduced cost on variable {j}");
        }
    }
    let obj = crate::dense::dot(&lp.objective, x);
    let r = (obj - sol.objective).abs() / (1.0 + sol.objective.abs());
    if r > worst {
        worst = r;
        detail = "objective mismatch".into();
    }
    CertificateReport { ok: worst <= tol.max(1e-6), worst_residual: worst, detail }
}

fn check_farkas(lp: &LinearProgram, rhs: &[f64], u: &[f64], tol: f64) -> CertificateReport {
    if u.len() != lp.n_rows() {
        return CertificateReport { ok: false, worst_residual: f64::INFINITY, detail: "ray length mismatch".into() };
    }
    let norm = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if (norm - 1.0).abs() > 1e-6 {
        return CertificateReport {
            ok: false,
            worst_residual: (norm - 1.0).abs(),
            detail: "ray not unit infinity-norm".into(),
        };
    }
    for i in 0..lp.n_rows() {
        let bad = match lp.senses[i] {
            Sense::Ge => (-u[i]).max(0.0),
            Sense::Le => u[i].max(0.0),
            Sense::Eq => 0.0,
        };
        if bad > tol {
            return CertificateReport { ok: false, worst_residual: bad, detail: format!("ray sign on row {i}") };
        }
    }
    // The aggregated inequality sum_i u_i (a_i . x) vs u.rhs must be
    // unsatisfiable over the box: sup_x (A^T u).x < u.rhs.
    let z = lp.constraints.tr_mul_vec(u);
    let mut sup = 0.0f64;
    for j in 0..lp.n_vars() {
        if z[j] > tol {
            if lp.upper[j].is_infinite() {
                return CertificateReport {
                    ok: false,
                    worst_residual: z[j],
                    detail: format!("aggregated coefficient {j} escapes upward"),
                };
            }
            sup += z[j] * lp.upper[j];
        } else if z[j] < -tol {
            if lp.lower[j].is_infinite() {
                // sup contribution is -infinity; certificate trivially holds.
                return CertificateReport { ok: true, worst_residual: 0.0, detail: String::new() };
            }
            sup += z[j] * lp.lower[j];
        }
    }
    let agg_rhs = crate::dense::dot(u, rhs);
    let gap = agg_rhs - sup;
    CertificateReport {
        ok: gap > tol,
        worst_residual: if gap > tol { 0.0 } else { tol - gap },
        detail: if gap > tol { String::new() } else { "aggregated inequality is satisfiable".into() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(lp: &LinearProgram) -> LpOutcome {
        solve_lp(lp, &SimplexOptions::default()).expect("solver error")
    }

    #[test]
    fn single_variable_lower_bound_row() {
        // min x s.t. x >= 3, x >= 0: optimum 3, dual 1 on the row.
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.add_row(&[1.0], Sense::Ge, 3.0);
        match solve(&lp) {
            LpOutcome::Optimal(s) => {
                assert!((s.primal[0] - 3.0).abs() < 1e-9);
                assert!((s.duals[0] - 1.0).abs() < 1e-9);
                assert!((s.objective - 3.0).abs() < 1e-9);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_rows_yield_valid_farkas_ray() {
        // x >= 1 and x <= 0.5 cannot hold together.
        let mut lp = LinearProgram::new(1);
        lp.add_row(&[1.0], Sense::Ge, 1.0);
        lp.add_row(&[1.0], Sense::Le, 0.5);
        let out = solve(&lp);
        match &out {
            LpOutcome::Infeasible { farkas } => {
                assert_eq!(farkas.len(), 2);
                let rep = check_certificate(&lp, &out, 1e-7);
                assert!(rep.ok, "bad certificate: {}", rep.detail);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn negative_cost_free_direction_is_unbounded() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, 0.0];
        lp.add_row(&[0.0, 1.0], Sense::Le, 1.0);
        match solve(&lp) {
            LpOutcome::Unbounded => {}
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn equality_row_with_free_variable() {
        // min y s.t. y - t = 0, t = 2, t free, y >= 0.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 0.0];
        lp.lower[1] = f64::NEG_INFINITY;
        lp.add_row(&[1.0, -1.0], Sense::Eq, 0.0);
        lp.add_row(&[0.0, 1.0], Sense::Eq, 2.0);
        match solve(&lp) {
            LpOutcome::Optimal(s) => {
                assert!((s.primal[0] - 2.0).abs() < 1e-9);
                assert!((s.primal[1] - 2.0).abs() < 1e-9);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_overlapping_rows_terminate() {
        // Many redundant rows through the same vertex.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, -1.0];
        for k in 0..8 {
            let w = 1.0 + (k as f64) * 1e-9;
            lp.add_row(&[w, 1.0], Sense::Le, 1.0);
        }
        lp.add_row(&[1.0, 0.0], Sense::Le, 1.0);
        match solve(&lp) {
            LpOutcome::Optimal(s) => assert!((s.objective + 1.0).abs() < 1e-6),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn bounded_box_no_rows() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, -2.0];
        lp.lower = vec![-1.0, -1.0];
        lp.upper = vec![1.0, 1.0];
        match solve(&lp) {
            LpOutcome::Optimal(s) => {
                assert_eq!(s.primal, vec![-1.0, 1.0]);
                assert!((s.objective + 3.0).abs() < 1e-12);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }
}
