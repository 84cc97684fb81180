//! Deterministic replication of random terminal claims by optimal cash
//! deposit schedules.
//!
//! A stock price is simulated as a discretized geometric Brownian motion;
//! the engine computes the deposit/withdrawal rate u(t) that makes the
//! accumulated cash x(t) match the terminal claim — the stock price itself,
//! a basket of independent prices, or a proportion of the option-style
//! excess max(S(T) - K, 0) — and measures the discretization error left by
//! the finite grid.

pub mod analysis;
pub mod error;
pub mod io;
pub mod kernel;
pub mod model;
pub mod options;
pub mod paths;
pub mod quad;

pub use analysis::{
    bench_sweep, convergence_study, linear_fit, run_total_gap, BenchRecord, ConvergenceRecord,
    LinearFit, SweepVar,
};
pub use error::{Error, Result};
pub use kernel::{
    aggregate_totals, capital_r, capital_r_quadrature, direct_sum_oracle, replicate,
    AggregateTotals, ReplicationResult,
};
pub use model::{
    validate_scenario, AccountParams, MarketParams, Mode, OptionSpec, Scenario, TimeGrid,
};
pub use options::{bs_quote, norm_cdf, replicate_excess, BsQuote, ExcessResult};
pub use paths::{simulate_paths, wiener_increments, NormalStream, PathSet};
