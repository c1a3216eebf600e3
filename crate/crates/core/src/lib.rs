//! Multi-cut Benders decomposition for mixed binary programs, with
//! cut selection posed as QUBO problems solved on classical or
//! annealer-style sampling backends.
//!
//! The crate is organized bottom-up:
//!
//! * [`dense`] - flat row-major matrix used everywhere.
//! * [`exec`] - parallel/sequential execution switch (rayon behind the
//!   `parallel` feature).
//! * [`lp`] - dense bounded-variable simplex with dual warm restarts,
//!   dual values and infeasibility certificates.
//! * [`milp`] - branch-and-bound over binary variables with a solution
//!   pool.
//! * [`qubo`] - QUBO/Ising types, exhaustive and simulated-annealing
//!   samplers, a remote JSON sampler client and a loopback server.
//! * [`cutsel`] - exclusion/coverage indicator matrices, set-cover and
//!   max-coverage QUBO encodings, decoding and the selection driver.
//! * [`benders`] - the decomposition loop: master with solution pool,
//!   subproblem duals to cuts, bound updates, iteration trace.
//! * [`uc`] - a DC-network unit-commitment model and a random power
//!   system generator for benchmark instances.
//! * [`cases`] - the benchmark case matrix (plain / all-cuts / random /
//!   C1..C12) and summary aggregation.

pub mod benders;
pub mod cases;
pub mod cutsel;
pub mod dense;
pub mod exec;
pub mod lp;
pub mod milp;
pub mod qubo;
pub mod uc;
