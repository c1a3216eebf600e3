//! Row and column bookkeeping for the commitment program.
//!
//! Continuous columns hold generator outputs then bus angles, binary
//! columns hold the on, start, and stop indicators, and rows come in
//! fixed blocks: output ceilings, output floors, ramp limits (interior
//! periods then the first period), line flows in both directions, the
//! reference-angle pins, and the bus balances. Every index below is
//! generator-major or bus-major with the period innermost.

/// Shape of one commitment program; all indexing goes through here so the
/// builder, the dual view, and the validator can never disagree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UcLayout {
    pub n_gens: usize,
    pub n_buses: usize,
    pub n_lines: usize,
    pub horizon: usize,
}

impl UcLayout {
    pub fn new(n_gens: usize, n_buses: usize, n_lines: usize, horizon: usize) -> Self {
        UcLayout { n_gens, n_buses, n_lines, horizon }
    }

    pub fn n_x(&self) -> usize {
        (self.n_gens + self.n_buses) * self.horizon
    }

    pub fn n_y(&self) -> usize {
        3 * self.n_gens * self.horizon
    }

    pub fn n_rows(&self) -> usize {
        let t = self.horizon;
        4 * self.n_gens * t + 2 * self.n_lines * t + t + self.n_buses * t
    }

    /// Continuous column of generator `g`'s output in period `t`.
    pub fn output(&self, g: usize, t: usize) -> usize {
        debug_assert!(g < self.n_gens && t < self.horizon);
        g * self.horizon + t
    }

    /// Continuous column of bus `i`'s voltage angle in period `t`.
    pub fn angle(&self, i: usize, t: usize) -> usize {
        debug_assert!(i < self.n_buses && t < self.horizon);
        (self.n_gens + i) * self.horizon + t
    }

    /// Binary column: generator `g` is committed in period `t`.
    pub fn on(&self, g: usize, t: usize) -> usize {
        debug_assert!(g < self.n_gens && t < self.horizon);
        g * self.horizon + t
    }

    /// Binary column: generator `g` starts up in period `t`.
    pub fn start(&self, g: usize, t: usize) -> usize {
        self.n_gens * self.horizon + self.on(g, t)
    }

    /// Binary column: generator `g` shuts down in period `t`.
    pub fn stop(&self, g: usize, t: usize) -> usize {
        2 * self.n_gens * self.horizon + self.on(g, t)
    }

    pub fn max_output_row(&self, g: usize, t: usize) -> usize {
        debug_assert!(g < self.n_gens && t < self.horizon);
        g * self.horizon + t
    }

    pub fn min_output_row(&self, g: usize, t: usize) -> usize {
        self.n_gens * self.horizon + self.max_output_row(g, t)
    }

    /// Ramp-up limit between periods `t - 1` and `t`; interior periods
    /// only, so `t >= 1`.
    pub fn ramp_up_row(&self, g: usize, t: usize) -> usize {
        debug_assert!(g < self.n_gens && 1 <= t && t < self.horizon);
        2 * self.n_gens * self.horizon + g * (self.horizon - 1) + (t - 1)
    }

    /// Ramp-up limit from the pre-horizon output into period 0.
    pub fn ramp_up_start_row(&self, g: usize) -> usize {
        debug_assert!(g < self.n_gens);
        2 * self.n_gens * self.horizon + self.n_gens * (self.horizon - 1) + g
    }

    pub fn ramp_down_row(&self, g: usize, t: usize) -> usize {
        debug_assert!(g < self.n_gens && 1 <= t && t < self.horizon);
        2 * self.n_gens * self.horizon
            + self.n_gens * self.horizon // the whole ramp-up block
            + g * (self.horizon - 1)
            + (t - 1)
    }

    pub fn ramp_down_start_row(&self, g: usize) -> usize {
        debug_assert!(g < self.n_gens);
        3 * self.n_gens * self.horizon + self.n_gens * (self.horizon - 1) + g
    }

    /// Flow limit of line `k` in period `t`; `reversed` selects the
    /// opposite orientation, together boxing the flow at the capacity.
    pub fn flow_row(&self, k: usize, reversed: bool, t: usize) -> usize {
        debug_assert!(k < self.n_lines && t < self.horizon);
        4 * self.n_gens * self.horizon + (2 * k + usize::from(reversed)) * self.horizon + t
    }

    /// Reference-bus angle pin for period `t`.
    pub fn reference_row(&self, t: usize) -> usize {
        debug_assert!(t < self.horizon);
        (4 * self.n_gens + 2 * self.n_lines) * self.horizon + t
    }

    /// Power balance at bus `i` in period `t`.
    pub fn balance_row(&self, i: usize, t: usize) -> usize {
        debug_assert!(i < self.n_buses && t < self.horizon);
        (4 * self.n_gens + 2 * self.n_lines) * self.horizon + self.horizon + i * self.horizon + t
    }
}
