//! Subproblem side of the decomposition: one LP over the continuous
//! variables whose right-hand side depends on the binaries picked by the
//! master. One template is re-solved many times per run, warm-starting
//! every solve from the last known optimal basis.

use crate::cutsel::{Cut, CutKind};
use crate::dense::{dot, DenseMatrix};
use crate::exec::{map_indexed, ExecMode};
use crate::lp::{certified, LinearProgram, LpError, LpOutcome, LpSolution, SimplexOptions, Tableau};

/// Reduced costs and ray coefficients below this are treated as zero when
/// folding bound terms into cut constants.
const COEFF_EPS: f64 = 1e-9;

/// Relative tolerance for certifying warm-basis verdicts against the
/// pristine subproblem data; see [`crate::lp::certified`].
const CERT_REL: f64 = 1e-7;

/// One subproblem request: the binary vector of a master pool entry plus
/// the provenance the resulting cut will carry.
#[derive(Clone, Copy, Debug)]
pub struct SpRequest<'a> {
    /// Pool index of the entry (0 = pool optimum).
    pub rank: usize,
    pub y_hat: &'a [f64],
    /// Master objective of that entry.
    pub master_objective: f64,
}

#[derive(Clone, Debug)]
pub enum SpOutcome {
    /// Subproblem solved: a supporting cut, its value at the generator
    /// (equals the subproblem optimum), and the continuous solution.
    Optimality { cut: Cut, dsp_value: f64, x: Vec<f64> },
    /// Subproblem infeasible at this binary vector: a cut excluding it.
    Feasibility { cut: Cut },
    /// Subproblem unbounded below. No binary choice can repair that, so
    /// the full problem has no finite optimum.
    GlobalInfeasible,
}

/// The parametric subproblem `min c.x  s.t.  A x (senses) b - B y_hat`,
/// with the box bounds on x carried over from the owning problem.
#[derive(Clone, Debug)]
pub struct SubproblemTemplate {
    /// Program with rhs = b; every solve overwrites the rhs.
    base: LinearProgram,
    bmat: DenseMatrix,
    b: Vec<f64>,
    opts: SimplexOptions,
    /// Optimal basis of the most recent rank-0 solve. Cloning it and
    /// repairing with the dual simplex is much cheaper than a cold solve
    /// because only the rhs moves between master iterations.
    warm: Option<Tableau>,
}

impl SubproblemTemplate {
    pub(crate) fn new(
        base: LinearProgram,
        bmat: DenseMatrix,
        b: Vec<f64>,
        opts: SimplexOptions,
    ) -> Self {
        SubproblemTemplate { base, bmat, b, opts, warm: None }
    }

    pub fn program(&self) -> &LinearProgram {
        &self.base
    }

    /// `b - B y_hat`.
    pub fn rhs_for(&self, y_hat: &[f64]) -> Vec<f64> {
        let by = self.bmat.mul_vec(y_hat);
        self.b.iter().zip(&by).map(|(bi, byi)| bi - byi).collect()
    }

    /// Solve one request. Promotes the solved basis as the next warm
    /// start when the outcome is optimal.
    pub fn solve_for(&mut self, req: &SpRequest) -> Result<SpOutcome, LpError> {
        Ok(self.solve_batch(&[*req], ExecMode::Sequential)?.pop().expect("one outcome"))
    }

    /// Solve a batch of requests, fanned out per `exec` and merged back in
    /// input order, so sequential and parallel runs return identical
    /// outcomes. Every solve starts from the same warm basis; afterwards
    /// the first request's basis (when optimal) replaces it.
    pub fn solve_batch(
        &mut self,
        reqs: &[SpRequest],
        exec: ExecMode,
    ) -> Result<Vec<SpOutcome>, LpError> {
        let warm = &self.warm;
        let solved: Vec<Result<(LpOutcome, Option<Tableau>), LpError>> =
            map_indexed(exec, reqs.len(), |j| {
                let rhs = self.rhs_for(reqs[j].y_hat);
                let (out, tab) = match warm {
                    Some(basis) => {
                        let mut t = basis.clone();
                        t.set_rhs(&rhs);
                        match t.dual_reoptimize() {
                            // A dual-feasible basis exists, so the repair
                            // claiming unbounded means it drifted; and a
                            // verdict the pristine data refuses to certify
                            // is drift too. Both rebuild. A cut derived
                            // from an uncertified solution would be
                            // silently invalid, so this gate is not
                            // optional.
                            Ok(LpOutcome::Unbounded) | Err(_) => cold_solve(&self.base, &rhs, self.opts)?,
                            Ok(out) => {
                                if certified(&self.base, &rhs, &out, CERT_REL) {
                                    (out, t)
                                } else {
                                    cold_solve(&self.base, &rhs, self.opts)?
                                }
                            }
                        }
                    }
                    None => cold_solve(&self.base, &rhs, self.opts)?,
                };
                let keep = j == 0 && matches!(out, LpOutcome::Optimal(_));
                Ok((out, keep.then_some(tab)))
            });

        let mut outcomes = Vec::with_capacity(reqs.len());
        let mut promoted = None;
        for (req, item) in reqs.iter().zip(solved) {
            let (out, tab) = item?;
            if let Some(t) = tab {
                promoted = Some(t);
            }
            outcomes.push(self.classify(out, req));
        }
        if promoted.is_some() {
            self.warm = promoted;
        }
        Ok(outcomes)
    }

    fn classify(&self, out: LpOutcome, req: &SpRequest) -> SpOutcome {
        match out {
            LpOutcome::Optimal(sol) => {
                let cut = self.optimality_cut(&sol, req);
                let dsp_value = cut.value_at(req.y_hat);
                debug_assert!(
                    (dsp_value - sol.objective).abs() <= 1e-6 * (1.0 + sol.objective.abs()),
                    "cut not tight at its generator: {dsp_value} vs {}",
                    sol.objective
                );
                SpOutcome::Optimality { cut, dsp_value, x: sol.primal }
            }
            LpOutcome::Infeasible { farkas } => {
                SpOutcome::Feasibility { cut: self.feasibility_cut(&farkas, req) }
            }
            LpOutcome::Unbounded => SpOutcome::GlobalInfeasible,
        }
    }

    /// `constant + coeff_y . y <= zeta` with constant = b.v plus the
    /// bound terms of the dual objective. For every variable the reduced
    /// cost c_j - (A^T v)_j pins against a finite bound; folding those
    /// products into the constant keeps the cut a valid underestimator
    /// when x carries nonzero or finite box bounds.
    fn optimality_cut(&self, sol: &LpSolution, req: &SpRequest) -> Cut {
        let v = &sol.duals;
        let mut constant = dot(&self.b, v);
        let aty = self.base.constraints.tr_mul_vec(v);
        for j in 0..self.base.n_vars() {
            let dj = self.base.objective[j] - aty[j];
            if dj > COEFF_EPS {
                let l = self.base.lower[j];
                debug_assert!(l.is_finite(), "positive reduced cost on variable {j} with no lower bound");
                if l.is_finite() {
                    constant += l * dj;
                }
            } else if dj < -COEFF_EPS {
                let u = self.base.upper[j];
                debug_assert!(u.is_finite(), "negative reduced cost on variable {j} with no upper bound");
                if u.is_finite() {
                    constant += u * dj;
                }
            }
        }
        let coeff_y = neg_tr_mul(&self.bmat, v);
        Cut::new(CutKind::Optimality, v.clone(), constant, coeff_y, req.rank, req.master_objective)
    }

    /// `constant + coeff_y . y <= 0` from a Farkas ray u: the aggregated
    /// row u.(b - B y) <= sup_x (A^T u).x must hold for the subproblem to
    /// be feasible, and the supremum over the box is a constant.
    fn feasibility_cut(&self, ray: &[f64], req: &SpRequest) -> Cut {
        let mut constant = dot(&self.b, ray);
        let z = self.base.constraints.tr_mul_vec(ray);
        for j in 0..self.base.n_vars() {
            if z[j] > COEFF_EPS {
                let u = self.base.upper[j];
                debug_assert!(u.is_finite(), "ray escapes through unbounded variable {j}");
                if u.is_finite() {
                    constant -= z[j] * u;
                }
            } else if z[j] < -COEFF_EPS {
                let l = self.base.lower[j];
                debug_assert!(l.is_finite(), "ray escapes through unbounded variable {j}");
                if l.is_finite() {
                    constant -= z[j] * l;
                }
            }
        }
        let coeff_y = neg_tr_mul(&self.bmat, ray);
        Cut::new(CutKind::Feasibility, ray.to_vec(), constant, coeff_y, req.rank, req.master_objective)
    }
}

fn cold_solve(
    lp: &LinearProgram,
    rhs: &[f64],
    opts: SimplexOptions,
) -> Result<(LpOutcome, Tableau), LpError> {
    let mut t = Tableau::from_program(lp, opts);
    t.set_rhs(rhs);
    let out = t.primal_solve()?;
    Ok((out, t))
}

/// `-(M^T w)`.
fn neg_tr_mul(m: &DenseMatrix, w: &[f64]) -> Vec<f64> {
    let mut out = m.tr_mul_vec(w);
    for v in &mut out {
        *v = -*v;
    }
    out
}
