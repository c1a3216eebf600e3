//! Physical checks on a finished run: the returned dispatch and
//! commitment are replayed against the instance data directly, without
//! going through the row encoding, so an encoding bug cannot certify
//! itself.

use super::{UcError, UcInstance};
use crate::benders::BendersSolution;

/// Worst violation found in each constraint family, all as
/// nonnegative magnitudes.
#[derive(Clone, Copy, Debug, Default)]
pub struct ValidationReport {
    /// Bus power mismatch, including the reference-angle pin.
    pub max_balance_residual: f64,
    /// Line loading beyond capacity, in either direction.
    pub max_flow_violation: f64,
    /// Output outside `[p_min u, p_max u]`.
    pub max_output_violation: f64,
    /// Period-to-period output change beyond the ramp limits, with the
    /// first period measured against the initial output.
    pub max_ramp_violation: f64,
    /// Start/stop/on bookkeeping errors plus any fractional binary.
    pub max_commitment_violation: f64,
    /// Per-period gap between total output and total demand.
    pub max_supply_demand_mismatch: f64,
}

impl ValidationReport {
    pub fn worst(&self) -> f64 {
        [
            self.max_balance_residual,
            self.max_flow_violation,
            self.max_output_violation,
            self.max_ramp_violation,
            self.max_commitment_violation,
            self.max_supply_demand_mismatch,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

pub fn validate_dispatch(
    inst: &UcInstance,
    solution: &BendersSolution,
) -> Result<ValidationReport, UcError> {
    let lay = inst.layout();
    if solution.x.len() != lay.n_x() || solution.y.len() != lay.n_y() {
        return Err(UcError::DimensionMismatch(format!(
            "solution has {} continuous and {} binary values, layout wants {} and {}",
            solution.x.len(),
            solution.y.len(),
            lay.n_x(),
            lay.n_y()
        )));
    }
    let sys = &inst.system;
    let output = |g: usize, t: usize| solution.x[lay.output(g, t)];
    let angle = |i: usize, t: usize| solution.x[lay.angle(i, t)];
    let mut rep = ValidationReport::default();

    for t in 0..lay.horizon {
        rep.max_balance_residual = rep
            .max_balance_residual
            .max(angle(sys.reference_bus, t).abs());

        // Net injection per bus: line flows out, generation in, load out.
        let mut injection = vec![0.0; sys.buses.len()];
        for line in &sys.lines {
            let flow = (angle(line.from, t) - angle(line.to, t)) / line.reactance;
            injection[line.from] -= flow;
            injection[line.to] += flow;
            rep.max_flow_violation = rep.max_flow_violation.max(flow.abs() - line.capacity);
        }
        let mut supply = 0.0;
        for (g, gen) in sys.generators.iter().enumerate() {
            injection[gen.bus] += output(g, t);
            supply += output(g, t);
        }
        let mut demand = 0.0;
        for (l, load) in sys.loads.iter().enumerate() {
            injection[load.bus] -= inst.demand.get(l, t);
            demand += inst.demand.get(l, t);
        }
        for v in injection {
            rep.max_balance_residual = rep.max_balance_residual.max(v.abs());
        }
        rep.max_supply_demand_mismatch =
            rep.max_supply_demand_mismatch.max((supply - demand).abs());
    }

    for &v in &solution.y {
        rep.max_commitment_violation = rep
            .max_commitment_violation
            .max((v - v.round()).abs())
            .max(-v)
            .max(v - 1.0);
    }
    for (g, gen) in sys.generators.iter().enumerate() {
        let mut prev_on = f64::from(u8::from(gen.initially_on));
        let mut prev_out = gen.p_initial;
        for t in 0..lay.horizon {
            let on = solution.y[lay.on(g, t)];
            let logic = solution.y[lay.start(g, t)] - solution.y[lay.stop(g, t)] - on + prev_on;
            rep.max_commitment_violation = rep.max_commitment_violation.max(logic.abs());

            let out = output(g, t);
            rep.max_output_violation = rep
                .max_output_violation
                .max(out - gen.p_max * on)
                .max(gen.p_min * on - out);
            rep.max_ramp_violation = rep
                .max_ramp_violation
                .max(out - prev_out - gen.ramp_up)
                .max(prev_out - out - gen.ramp_down);

            prev_on = on;
            prev_out = out;
        }
    }
    rep.max_flow_violation = rep.max_flow_violation.max(0.0);
    rep.max_output_violation = rep.max_output_violation.max(0.0);
    rep.max_ramp_violation = rep.max_ramp_violation.max(0.0);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benders::{run_benders, BendersConfig};
    use crate::uc::fixtures::{single_bus_system, three_bus_system};
    use crate::uc::{build_uc_milp, generate_loads};

    fn single_bus_instance() -> UcInstance {
        let system = single_bus_system();
        let demand = generate_loads(&system, &[0.35]);
        UcInstance { system, horizon: 1, demand }
    }

    /// Hand dispatch for the one-bus case: switch the unit on and let it
    /// carry the whole load.
    fn exact_solution(inst: &UcInstance) -> BendersSolution {
        let lay = inst.layout();
        let mut x = vec![0.0; lay.n_x()];
        let mut y = vec![0.0; lay.n_y()];
        x[lay.output(0, 0)] = inst.demand.get(0, 0);
        y[lay.on(0, 0)] = 1.0;
        y[lay.start(0, 0)] = 1.0;
        BendersSolution { x, y }
    }

    #[test]
    fn balanced_hand_dispatch_passes_every_check() {
        let inst = single_bus_instance();
        let rep = validate_dispatch(&inst, &exact_solution(&inst)).unwrap();
        assert!(rep.is_valid(1e-12), "worst violation {}", rep.worst());
        assert_eq!(rep.max_supply_demand_mismatch, 0.0);
    }

    #[test]
    fn output_from_a_switched_off_unit_is_flagged() {
        let inst = single_bus_instance();
        let mut sol = exact_solution(&inst);
        sol.y[inst.layout().on(0, 0)] = 0.0;
        let rep = validate_dispatch(&inst, &sol).unwrap();
        let load = inst.demand.get(0, 0);
        assert!(
            (rep.max_output_violation - load).abs() < 1e-12,
            "output violation {} should equal the stranded load {load}",
            rep.max_output_violation
        );
        assert!(!rep.is_valid(1e-6));

        sol.x.pop();
        assert!(validate_dispatch(&inst, &sol).is_err());
    }

    #[test]
    fn converged_run_passes_validation() {
        let system = three_bus_system();
        let demand = generate_loads(&system, &[0.4, 0.5, 0.45]);
        let inst = UcInstance { system, horizon: 3, demand };
        let p = build_uc_milp(&inst).unwrap();
        let (sol, objective, _) = run_benders(&p, &BendersConfig::default()).unwrap();
        assert!(objective.is_finite());
        let rep = validate_dispatch(&inst, &sol).unwrap();
        assert!(rep.is_valid(1e-6), "worst violation {}", rep.worst());
    }
}
