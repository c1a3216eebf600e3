//! Unit commitment as a mixed binary/continuous program.
//!
//! A [`PowerSystem`] plus a demand matrix becomes a [`MixedProblem`]
//! through [`build_uc_milp`]: generator outputs and bus angles are the
//! continuous variables, the on/start/stop indicators are the binaries,
//! and the start/stop logic lives in the binary-only constraint set so
//! the decomposition keeps it in the master. [`generate_power_system`]
//! produces seeded random systems for benchmarking, and [`UcDualView`]
//! names the pieces of a subproblem dual vector after the constraint
//! families they price.
//!
//! [`MixedProblem`]: crate::benders::MixedProblem

mod build;
mod duals;
mod gen;
mod layout;
mod validate;

pub use build::{build_uc_milp, default_profile, generate_loads};
pub use duals::{map_uc_duals, UcDualView};
pub use gen::generate_power_system;
pub use layout::UcLayout;
pub use validate::{validate_dispatch, ValidationReport};

use crate::dense::DenseMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UcError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("system generation failed: {0}")]
    GenerationFailure(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusKind {
    Load,
    Generation,
    Both,
    Transfer,
}

impl BusKind {
    pub fn hosts_generator(self) -> bool {
        matches!(self, BusKind::Generation | BusKind::Both)
    }

    pub fn hosts_load(self) -> bool {
        matches!(self, BusKind::Load | BusKind::Both)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Bus {
    pub kind: BusKind,
    /// Planar coordinates in the unit square; line lengths and hence
    /// reactances derive from them.
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    /// Per-unit reactance; contributes 1/reactance to the susceptance of
    /// both endpoints.
    pub reactance: f64,
    /// Flow limit in MW, applied in both directions.
    pub capacity: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    pub p_max: f64,
    pub p_min: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub startup_cost: f64,
    pub shutdown_cost: f64,
    /// $/MWh on produced energy.
    pub energy_cost: f64,
    /// $/h while committed, output or not.
    pub no_load_cost: f64,
    pub initially_on: bool,
    /// Output in the period before the horizon; 0 when initially off.
    pub p_initial: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Load {
    pub bus: usize,
    /// Fraction of the system demand served here; fractions sum to 1.
    pub share: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerSystem {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
    pub reference_bus: usize,
}

impl PowerSystem {
    /// Sum of generator maximum outputs in MW.
    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.p_max).sum()
    }

    /// Bus susceptance matrix: each line adds 1/reactance to both of its
    /// endpoint diagonals and subtracts it off-diagonal, so every row and
    /// column sums to zero.
    pub fn susceptance(&self) -> DenseMatrix {
        let n = self.buses.len();
        let mut b = DenseMatrix::zeros(n, n);
        for line in &self.lines {
            let w = 1.0 / line.reactance;
            let (i, j) = (line.from, line.to);
            b.set(i, i, b.get(i, i) + w);
            b.set(j, j, b.get(j, j) + w);
            b.set(i, j, b.get(i, j) - w);
            b.set(j, i, b.get(j, i) - w);
        }
        b
    }

    fn connected(&self) -> bool {
        let n = self.buses.len();
        if n == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); n];
        for line in &self.lines {
            adj[line.from].push(line.to);
            adj[line.to].push(line.from);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn validate(&self) -> Result<(), UcError> {
        let n = self.buses.len();
        let err = |msg: String| Err(UcError::InvalidInstance(msg));
        if n == 0 {
            return err("no buses".into());
        }
        if self.reference_bus >= n {
            return err(format!("reference bus {} of {n}", self.reference_bus));
        }
        for (k, line) in self.lines.iter().enumerate() {
            if line.from >= n || line.to >= n || line.from == line.to {
                return err(format!("line {k} endpoints {}-{}", line.from, line.to));
            }
            if line.reactance <= 0.0 || line.capacity <= 0.0 {
                return err(format!("line {k} needs positive reactance and capacity"));
            }
        }
        if !self.connected() {
            return err("network is not connected".into());
        }
        if self.generators.is_empty() {
            return err("no generators".into());
        }
        for (g, gen) in self.generators.iter().enumerate() {
            if gen.bus >= n {
                return err(format!("generator {g} on bus {} of {n}", gen.bus));
            }
            if !(0.0 <= gen.p_min && gen.p_min <= gen.p_max) || gen.p_max <= 0.0 {
                return err(format!("generator {g} output range [{}, {}]", gen.p_min, gen.p_max));
            }
            // A unit starting from cold must be able to reach its minimum
            // within one period, so the ramp rate may not undercut it.
            if gen.ramp_up < gen.p_min || gen.ramp_down <= 0.0 {
                return err(format!("generator {g} ramp rates {}/{}", gen.ramp_up, gen.ramp_down));
            }
            if gen.startup_cost < 0.0
                || gen.shutdown_cost < 0.0
                || gen.energy_cost < 0.0
                || gen.no_load_cost < 0.0
            {
                return err(format!("generator {g} has a negative cost"));
            }
            let ini_ok = if gen.initially_on {
                gen.p_min <= gen.p_initial && gen.p_initial <= gen.p_max
            } else {
                gen.p_initial == 0.0
            };
            if !ini_ok {
                return err(format!("generator {g} initial output {}", gen.p_initial));
            }
        }
        if self.loads.is_empty() {
            return err("no loads".into());
        }
        let mut total_share = 0.0;
        for (l, load) in self.loads.iter().enumerate() {
            if load.bus >= n {
                return err(format!("load {l} on bus {} of {n}", load.bus));
            }
            if load.share <= 0.0 {
                return err(format!("load {l} share {}", load.share));
            }
            total_share += load.share;
        }
        if (total_share - 1.0).abs() > 1e-9 {
            return err(format!("load shares sum to {total_share}"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct UcInstance {
    pub system: PowerSystem,
    pub horizon: usize,
    /// MW per load (row) and period (column).
    pub demand: DenseMatrix,
}

impl UcInstance {
    pub fn layout(&self) -> UcLayout {
        UcLayout::new(
            self.system.generators.len(),
            self.system.buses.len(),
            self.system.lines.len(),
            self.horizon,
        )
    }

    pub fn validate(&self) -> Result<(), UcError> {
        self.system.validate()?;
        let err = |msg: String| Err(UcError::InvalidInstance(msg));
        if self.horizon == 0 {
            return err("empty horizon".into());
        }
        if self.demand.rows() != self.system.loads.len() || self.demand.cols() != self.horizon {
            return err(format!(
                "demand is {}x{}, expected {}x{}",
                self.demand.rows(),
                self.demand.cols(),
                self.system.loads.len(),
                self.horizon
            ));
        }
        let capacity = self.system.total_capacity();
        for t in 0..self.horizon {
            let mut total = 0.0;
            for l in 0..self.demand.rows() {
                let v = self.demand.get(l, t);
                if v < 0.0 {
                    return err(format!("negative demand at load {l}, period {t}"));
                }
                total += v;
            }
            if total > capacity {
                return err(format!("period {t} demand {total} exceeds capacity {capacity}"));
            }
        }
        Ok(())
    }
}

/// On-disk instance: the demand matrix is reconstructed from the stored
/// profile and the system's load shares, so the document stays small and
/// the profile stays editable.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub system: PowerSystem,
    pub horizon: usize,
    pub profile: Vec<f64>,
    pub seed: u64,
}

impl InstanceDoc {
    pub fn instance(&self) -> Result<UcInstance, UcError> {
        if self.profile.len() != self.horizon {
            return Err(UcError::InvalidInstance(format!(
                "profile has {} values for a {}-period horizon",
                self.profile.len(),
                self.horizon
            )));
        }
        if self.profile.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
            return Err(UcError::InvalidInstance("profile values must lie in (0, 1]".into()));
        }
        let demand = generate_loads(&self.system, &self.profile);
        let inst =
            UcInstance { system: self.system.clone(), horizon: self.horizon, demand };
        inst.validate()?;
        Ok(inst)
    }
}
