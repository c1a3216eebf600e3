//! Names the pieces of a generic subproblem dual vector after the
//! constraint families they price, so cut contents can be read in
//! power-system terms and checked against the closed-form subproblem
//! objective.

use super::{UcError, UcInstance};
use crate::dense::DenseMatrix;

/// Subproblem duals grouped by constraint family. Inequality groups are
/// nonnegative at an optimum; the balance and reference groups price
/// equalities and may take either sign.
#[derive(Clone, Debug)]
pub struct UcDualView {
    /// Output-ceiling prices, one per generator and period.
    pub max_output: DenseMatrix,
    /// Output-floor prices, one per generator and period.
    pub min_output: DenseMatrix,
    /// Interior ramp-up prices; column `t - 1` prices the step into `t`.
    pub ramp_up: DenseMatrix,
    /// First-period ramp-up prices, one per generator.
    pub ramp_up_start: Vec<f64>,
    pub ramp_down: DenseMatrix,
    pub ramp_down_start: Vec<f64>,
    /// Flow-limit prices; rows `2k` and `2k + 1` are the forward and
    /// reversed orientations of line `k`.
    pub flow: DenseMatrix,
    /// Reference-angle pin prices, one per period.
    pub reference_angle: Vec<f64>,
    /// Bus balance prices, one per bus and period.
    pub balance: DenseMatrix,
}

pub fn map_uc_duals(inst: &UcInstance, duals: &[f64]) -> Result<UcDualView, UcError> {
    let lay = inst.layout();
    if duals.len() != lay.n_rows() {
        return Err(UcError::DimensionMismatch(format!(
            "{} duals for a {}-row program",
            duals.len(),
            lay.n_rows()
        )));
    }
    let (gs, is, ls, ts) = (lay.n_gens, lay.n_buses, lay.n_lines, lay.horizon);
    let mut view = UcDualView {
        max_output: DenseMatrix::zeros(gs, ts),
        min_output: DenseMatrix::zeros(gs, ts),
        ramp_up: DenseMatrix::zeros(gs, ts - 1),
        ramp_up_start: vec![0.0; gs],
        ramp_down: DenseMatrix::zeros(gs, ts - 1),
        ramp_down_start: vec![0.0; gs],
        flow: DenseMatrix::zeros(2 * ls, ts),
        reference_angle: vec![0.0; ts],
        balance: DenseMatrix::zeros(is, ts),
    };
    for g in 0..gs {
        for t in 0..ts {
            view.max_output.set(g, t, duals[lay.max_output_row(g, t)]);
            view.min_output.set(g, t, duals[lay.min_output_row(g, t)]);
        }
        for t in 1..ts {
            view.ramp_up.set(g, t - 1, duals[lay.ramp_up_row(g, t)]);
            view.ramp_down.set(g, t - 1, duals[lay.ramp_down_row(g, t)]);
        }
        view.ramp_up_start[g] = duals[lay.ramp_up_start_row(g)];
        view.ramp_down_start[g] = duals[lay.ramp_down_start_row(g)];
    }
    for k in 0..ls {
        for t in 0..ts {
            view.flow.set(2 * k, t, duals[lay.flow_row(k, false, t)]);
            view.flow.set(2 * k + 1, t, duals[lay.flow_row(k, true, t)]);
        }
    }
    for t in 0..ts {
        view.reference_angle[t] = duals[lay.reference_row(t)];
    }
    for i in 0..is {
        for t in 0..ts {
            view.balance.set(i, t, duals[lay.balance_row(i, t)]);
        }
    }
    Ok(view)
}

impl UcDualView {
    /// Closed-form subproblem value at commitment `y_hat` (the full
    /// binary vector; only the on-block enters). Equals the generic
    /// subproblem objective because each term is the priced row's rhs
    /// contribution.
    pub fn dsp_objective(&self, inst: &UcInstance, y_hat: &[f64]) -> f64 {
        let lay = inst.layout();
        let mut value = 0.0;
        for (g, gen) in inst.system.generators.iter().enumerate() {
            for t in 0..lay.horizon {
                let u = y_hat[lay.on(g, t)];
                value += (self.min_output.get(g, t) * gen.p_min
                    - self.max_output.get(g, t) * gen.p_max)
                    * u;
            }
            for t in 1..lay.horizon {
                value -= self.ramp_up.get(g, t - 1) * gen.ramp_up
                    + self.ramp_down.get(g, t - 1) * gen.ramp_down;
            }
            value += self.ramp_up_start[g] * (-gen.p_initial - gen.ramp_up)
                + self.ramp_down_start[g] * (gen.p_initial - gen.ramp_down);
        }
        for (k, line) in inst.system.lines.iter().enumerate() {
            for t in 0..lay.horizon {
                value -=
                    (self.flow.get(2 * k, t) + self.flow.get(2 * k + 1, t)) * line.capacity;
            }
        }
        for (l, load) in inst.system.loads.iter().enumerate() {
            for t in 0..lay.horizon {
                value -= self.balance.get(load.bus, t) * inst.demand.get(l, t);
            }
        }
        value
    }

    /// Smallest price across the inequality groups; at an optimum it is
    /// nonnegative up to solver tolerance.
    pub fn min_inequality_dual(&self) -> f64 {
        let mats = [&self.max_output, &self.min_output, &self.ramp_up, &self.ramp_down, &self.flow];
        let mut lo = f64::INFINITY;
        for m in mats {
            for i in 0..m.rows() {
                for t in 0..m.cols() {
                    lo = lo.min(m.get(i, t));
                }
            }
        }
        for &v in self.ramp_up_start.iter().chain(&self.ramp_down_start) {
            lo = lo.min(v);
        }
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benders::{decompose, BendersConfig, SpOutcome, SpRequest};
    use crate::cutsel::CutKind;
    use crate::uc::fixtures::three_bus_system;
    use crate::uc::{build_uc_milp, generate_loads};

    fn small_instance() -> UcInstance {
        let system = three_bus_system();
        let demand = generate_loads(&system, &[0.4, 0.5]);
        UcInstance { system, horizon: 2, demand }
    }

    /// Commitment with every unit on in every period and the start/stop
    /// indicators consistent with it.
    fn all_on(inst: &UcInstance) -> Vec<f64> {
        let lay = inst.layout();
        let mut y = vec![0.0; lay.n_y()];
        for (g, gen) in inst.system.generators.iter().enumerate() {
            for t in 0..lay.horizon {
                y[lay.on(g, t)] = 1.0;
            }
            if !gen.initially_on {
                y[lay.start(g, 0)] = 1.0;
            }
        }
        y
    }

    #[test]
    fn mapped_groups_tile_the_dual_vector() {
        let inst = small_instance();
        let lay = inst.layout();
        let duals: Vec<f64> = (0..lay.n_rows()).map(|r| r as f64).collect();
        let view = map_uc_duals(&inst, &duals).unwrap();
        for g in 0..lay.n_gens {
            for t in 0..lay.horizon {
                assert_eq!(view.max_output.get(g, t), lay.max_output_row(g, t) as f64);
                assert_eq!(view.min_output.get(g, t), lay.min_output_row(g, t) as f64);
            }
            for t in 1..lay.horizon {
                assert_eq!(view.ramp_up.get(g, t - 1), lay.ramp_up_row(g, t) as f64);
                assert_eq!(view.ramp_down.get(g, t - 1), lay.ramp_down_row(g, t) as f64);
            }
            assert_eq!(view.ramp_up_start[g], lay.ramp_up_start_row(g) as f64);
            assert_eq!(view.ramp_down_start[g], lay.ramp_down_start_row(g) as f64);
        }
        for k in 0..lay.n_lines {
            for t in 0..lay.horizon {
                assert_eq!(view.flow.get(2 * k, t), lay.flow_row(k, false, t) as f64);
                assert_eq!(view.flow.get(2 * k + 1, t), lay.flow_row(k, true, t) as f64);
            }
        }
        for t in 0..lay.horizon {
            assert_eq!(view.reference_angle[t], lay.reference_row(t) as f64);
        }
        for i in 0..lay.n_buses {
            for t in 0..lay.horizon {
                assert_eq!(view.balance.get(i, t), lay.balance_row(i, t) as f64);
            }
        }
        assert!(map_uc_duals(&inst, &duals[1..]).is_err());
    }

    #[test]
    fn zero_duals_give_a_zero_objective() {
        let inst = small_instance();
        let duals = vec![0.0; inst.layout().n_rows()];
        let view = map_uc_duals(&inst, &duals).unwrap();
        assert_eq!(view.dsp_objective(&inst, &all_on(&inst)), 0.0);
    }

    #[test]
    fn named_objective_matches_the_generic_subproblem_value() {
        let inst = small_instance();
        let p = build_uc_milp(&inst).unwrap();
        let (_, mut sp) = decompose(&p, &BendersConfig::default()).unwrap();
        let y_hat = all_on(&inst);
        let req = SpRequest { rank: 0, y_hat: &y_hat, master_objective: 0.0 };
        match sp.solve_for(&req).unwrap() {
            SpOutcome::Optimality { cut, dsp_value, .. } => {
                let view = map_uc_duals(&inst, &cut.dual).unwrap();
                let named = view.dsp_objective(&inst, &y_hat);
                assert!(
                    (named - dsp_value).abs() <= 1e-6 * (1.0 + dsp_value.abs()),
                    "named {named} vs generic {dsp_value}"
                );
                assert!(view.min_inequality_dual() >= -1e-9);
                // The fixture congests the cheap-side line, so its price
                // must show up; a sign slip in the flow term would
                // otherwise pass on an uncongested network.
                let peak = (0..view.flow.cols())
                    .map(|t| view.flow.get(0, t).max(view.flow.get(1, t)))
                    .fold(0.0, f64::max);
                assert!(peak > 1e-6, "congested line priced at {peak}");
            }
            other => panic!("all-on commitment should dispatch, got {other:?}"),
        }
    }

    #[test]
    fn optimality_cut_coefficients_group_by_commitment_terms() {
        let inst = small_instance();
        let lay = inst.layout();
        let p = build_uc_milp(&inst).unwrap();
        let (_, mut sp) = decompose(&p, &BendersConfig::default()).unwrap();
        let y_hat = all_on(&inst);
        let req = SpRequest { rank: 0, y_hat: &y_hat, master_objective: 0.0 };
        let SpOutcome::Optimality { cut, .. } = sp.solve_for(&req).unwrap() else {
            panic!("all-on commitment should dispatch");
        };
        assert_eq!(cut.kind, CutKind::Optimality);
        let view = map_uc_duals(&inst, &cut.dual).unwrap();
        for (g, gen) in inst.system.generators.iter().enumerate() {
            for t in 0..lay.horizon {
                let want = view.min_output.get(g, t) * gen.p_min
                    - view.max_output.get(g, t) * gen.p_max;
                let got = cut.coeff_y[lay.on(g, t)];
                assert!(
                    (got - want).abs() <= 1e-9 * (1.0 + want.abs()),
                    "generator {g} period {t}: {got} vs {want}"
                );
                assert_eq!(cut.coeff_y[lay.start(g, t)], 0.0);
                assert_eq!(cut.coeff_y[lay.stop(g, t)], 0.0);
            }
        }
    }
}
