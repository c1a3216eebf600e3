//! Assembles the commitment program.
//!
//! Row senses and signs follow one convention: every inequality is
//! written as >= with the binary terms moved to the left-hand matrix, so
//! a row reads `A x + B y >= b` and the subproblem at a fixed commitment
//! sees the rhs `b - B y_hat`. Angle columns are free, output columns sit
//! at zero or above.

use super::{PowerSystem, UcError, UcInstance};
use crate::benders::{LinearConstraint, MixedProblem};
use crate::dense::DenseMatrix;
use crate::lp::Sense;

/// Commitment program over outputs and angles (continuous) and the
/// on/start/stop indicators (binary). The start/stop logic couples no
/// continuous variable, so it rides in `y_constraints`.
pub fn build_uc_milp(inst: &UcInstance) -> Result<MixedProblem, UcError> {
    inst.validate().map_err(|e| UcError::InvalidInstance(e.to_string()))?;
    let sys = &inst.system;
    let lay = inst.layout();
    let periods = inst.horizon;
    let (n, m, q) = (lay.n_x(), lay.n_y(), lay.n_rows());

    let mut a = DenseMatrix::zeros(q, n);
    let mut bmat = DenseMatrix::zeros(q, m);
    let mut b = vec![0.0; q];
    let mut senses = vec![Sense::Ge; q];

    for (g, gen) in sys.generators.iter().enumerate() {
        for t in 0..periods {
            // Output ceiling: -P_gt + Pmax u_gt >= 0.
            let r = lay.max_output_row(g, t);
            a.set(r, lay.output(g, t), -1.0);
            bmat.set(r, lay.on(g, t), gen.p_max);
            // Output floor: P_gt - Pmin u_gt >= 0.
            let r = lay.min_output_row(g, t);
            a.set(r, lay.output(g, t), 1.0);
            bmat.set(r, lay.on(g, t), -gen.p_min);
        }
        for t in 1..periods {
            let r = lay.ramp_up_row(g, t);
            a.set(r, lay.output(g, t), -1.0);
            a.set(r, lay.output(g, t - 1), 1.0);
            b[r] = -gen.ramp_up;
            let r = lay.ramp_down_row(g, t);
            a.set(r, lay.output(g, t), 1.0);
            a.set(r, lay.output(g, t - 1), -1.0);
            b[r] = -gen.ramp_down;
        }
        let r = lay.ramp_up_start_row(g);
        a.set(r, lay.output(g, 0), -1.0);
        b[r] = -gen.ramp_up - gen.p_initial;
        let r = lay.ramp_down_start_row(g);
        a.set(r, lay.output(g, 0), 1.0);
        b[r] = -gen.ramp_down + gen.p_initial;
    }

    for (k, line) in sys.lines.iter().enumerate() {
        let w = 1.0 / line.reactance;
        for t in 0..periods {
            // (angle_to - angle_from) / X >= -capacity, then reversed,
            // which together box the flow inside the capacity.
            let r = lay.flow_row(k, false, t);
            a.set(r, lay.angle(line.to, t), w);
            a.set(r, lay.angle(line.from, t), -w);
            b[r] = -line.capacity;
            let r = lay.flow_row(k, true, t);
            a.set(r, lay.angle(line.from, t), w);
            a.set(r, lay.angle(line.to, t), -w);
            b[r] = -line.capacity;
        }
    }

    for t in 0..periods {
        let r = lay.reference_row(t);
        a.set(r, lay.angle(sys.reference_bus, t), 1.0);
        senses[r] = Sense::Eq;
    }

    let sus = sys.susceptance();
    for i in 0..sys.buses.len() {
        for t in 0..periods {
            let r = lay.balance_row(i, t);
            senses[r] = Sense::Eq;
            for j in 0..sys.buses.len() {
                let v = sus.get(i, j);
                if v != 0.0 {
                    a.set(r, lay.angle(j, t), v);
                }
            }
        }
    }
    for (g, gen) in sys.generators.iter().enumerate() {
        for t in 0..periods {
            a.set(lay.balance_row(gen.bus, t), lay.output(g, t), -1.0);
        }
    }
    for (l, load) in sys.loads.iter().enumerate() {
        for t in 0..periods {
            b[lay.balance_row(load.bus, t)] -= inst.demand.get(l, t);
        }
    }

    let mut c = vec![0.0; n];
    let mut d = vec![0.0; m];
    for (g, gen) in sys.generators.iter().enumerate() {
        for t in 0..periods {
            c[lay.output(g, t)] = gen.energy_cost;
            d[lay.on(g, t)] = gen.no_load_cost;
            d[lay.start(g, t)] = gen.startup_cost;
            d[lay.stop(g, t)] = gen.shutdown_cost;
        }
    }

    let mut yc = Vec::with_capacity(sys.generators.len() * periods);
    for (g, gen) in sys.generators.iter().enumerate() {
        for t in 0..periods {
            // start - stop - on_t + on_{t-1} = 0, with the pre-horizon
            // state standing in for on_{t-1} in the first period.
            let mut coeffs = vec![0.0; m];
            coeffs[lay.start(g, t)] = 1.0;
            coeffs[lay.stop(g, t)] = -1.0;
            coeffs[lay.on(g, t)] = -1.0;
            let rhs = if t == 0 {
                -f64::from(u8::from(gen.initially_on))
            } else {
                coeffs[lay.on(g, t - 1)] = 1.0;
                0.0
            };
            yc.push(LinearConstraint { coeffs, sense: Sense::Eq, rhs });
        }
    }

    let mut p = MixedProblem::new(c, d, a, bmat, b, senses);
    for i in 0..sys.buses.len() {
        for t in 0..periods {
            p.x_lower[lay.angle(i, t)] = f64::NEG_INFINITY;
        }
    }
    p.y_constraints = yc;
    Ok(p)
}

/// Demand matrix: each load takes its stored share of the system-wide
/// demand `profile_t * total_capacity`. Shares are fixed per system, so
/// the matrix is fully determined by system and profile.
pub fn generate_loads(system: &PowerSystem, profile: &[f64]) -> DenseMatrix {
    assert!(
        profile.iter().all(|&v| v > 0.0 && v <= 1.0),
        "profile values must lie in (0, 1]"
    );
    let total = system.total_capacity();
    let mut d = DenseMatrix::zeros(0, profile.len());
    for load in &system.loads {
        let row: Vec<f64> = profile.iter().map(|&f| load.share * f * total).collect();
        d.push_row(&row);
    }
    d
}

/// Synthetic 24-hour demand shape: overnight trough at 0.40 of capacity,
/// evening peak at 0.80. The day starts at the trough so a mostly-cold
/// fleet, whose first-period output is capped by its ramp rates, faces
/// the lightest load first. Stands in for measured load curves and is
/// meant to be replaced by callers with real data.
pub fn default_profile() -> [f64; 24] {
    [
        0.40, 0.42, 0.47, 0.55, 0.62, 0.67, 0.70, 0.72, 0.71, 0.69, 0.67, 0.66, 0.68, 0.74,
        0.79, 0.80, 0.77, 0.70, 0.62, 0.56, 0.52, 0.48, 0.44, 0.41,
    ]
}
