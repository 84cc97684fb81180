//! Domain types shared across the engine, plus scenario validation.
//!
//! All types are immutable after validation and safe to share read-only
//! across concurrent workers.

use crate::error::{Error, Result};

/// Uniform time grid on `[0, T]` with `N` steps of size `dt = T / N`.
///
/// Grid points are `t_k = k * dt` for `k = 0..=N`, with `t_0 = 0` and
/// `t_N = T` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if horizon <= 0.0 || !horizon.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "terminal time T must be positive and finite, got {horizon}"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "number of steps N must be at least 2, got {steps}"
            )));
        }
        Ok(Self {
            horizon,
            steps,
            dt: horizon / steps as f64,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Grid time `t_k`. Returns `T` exactly at `k = N`.
    pub fn time(&self, k: usize) -> f64 {
        if k >= self.steps {
            self.horizon
        } else {
            k as f64 * self.dt
        }
    }
}

/// Per-asset market parameters for the discretized price processes.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketParams {
    /// Number of independent assets (m >= 1).
    pub assets: usize,
    /// Initial prices S(0), strictly positive, one per asset.
    pub initial_price: Vec<f64>,
    /// Constant drift per asset (1/year, may be zero).
    pub drift: Vec<f64>,
    /// Constant volatility per asset (1/sqrt(year), >= 0).
    pub sigma: Vec<f64>,
}

/// Bank-account parameters shared by all per-asset accumulation processes.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountParams {
    /// Interest rate per year for both loans and savings (>= 0).
    pub rate: f64,
    /// Starting cash per asset; negative values indicate debt.
    pub start_cash: Vec<f64>,
    /// Positive constant penalty weight for fast-growing deposit rates.
    pub gamma: f64,
}

impl AccountParams {
    /// Splits a total starting amount equally across `assets` processes.
    pub fn split_start_cash(total: f64, assets: usize) -> Vec<f64> {
        vec![total / assets as f64; assets]
    }
}

/// Strike and proportion for excess-replication mode.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionSpec {
    /// Strike price K (> 0).
    pub strike: f64,
    /// Proportion c of the excess to accumulate, in [0, 1].
    pub proportion: f64,
    /// Floor the replicated claim series at zero each step.
    pub floor_at_zero: bool,
}

impl OptionSpec {
    pub fn new(strike: f64, proportion: f64) -> Self {
        Self {
            strike,
            proportion,
            floor_at_zero: true,
        }
    }
}

/// Which terminal claim the engine replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Match the terminal stock price(s) exactly.
    AssetReplication,
    /// Match a proportion of max(S(T) - K, 0).
    ExcessReplication,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::AssetReplication => "asset_replication",
            Mode::ExcessReplication => "excess_replication",
        }
    }
}

/// Full experiment description: market, account, grid, mode, and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mode: Mode,
    pub grid: TimeGrid,
    pub market: MarketParams,
    pub account: AccountParams,
    /// Present iff `mode == ExcessReplication`.
    pub option: Option<OptionSpec>,
    pub seed: u64,
    /// Integer asset multiples; scales S(0) and every increment.
    pub quantity: Vec<u64>,
}

impl Scenario {
    pub fn assets(&self) -> usize {
        self.market.assets
    }
}

/// Checks every type invariant and returns the scenario unchanged on success.
///
/// Validation is idempotent: a validated scenario validates to an identical
/// value.
pub fn validate_scenario(scenario: Scenario) -> Result<Scenario> {
    let m = scenario.market.assets;
    if m < 1 {
        return Err(Error::InvalidMarket("asset count m must be >= 1".into()));
    }
    if scenario.market.initial_price.len() != m {
        return Err(Error::InvalidMarket(format!(
            "S0 must have exactly {m} entries, got {}",
            scenario.market.initial_price.len()
        )));
    }
    if scenario.market.drift.len() != m {
        return Err(Error::InvalidMarket(format!(
            "drift must have exactly {m} entries, got {}",
            scenario.market.drift.len()
        )));
    }
    if scenario.market.sigma.len() != m {
        return Err(Error::InvalidMarket(format!(
            "sigma must have exactly {m} entries, got {}",
            scenario.market.sigma.len()
        )));
    }
    for (i, &s0) in scenario.market.initial_price.iter().enumerate() {
        if s0 <= 0.0 || !s0.is_finite() {
            return Err(Error::InvalidMarket(format!(
                "S0[{i}] must be strictly positive, got {s0}"
            )));
        }
    }
    for (i, &sig) in scenario.market.sigma.iter().enumerate() {
        if sig < 0.0 || !sig.is_finite() {
            return Err(Error::InvalidMarket(format!(
                "sigma[{i}] must be >= 0, got {sig}"
            )));
        }
    }
    for (i, &a) in scenario.market.drift.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::InvalidMarket(format!(
                "drift[{i}] must be finite, got {a}"
            )));
        }
    }

    if scenario.account.rate < 0.0 || !scenario.account.rate.is_finite() {
        return Err(Error::InvalidAccount(format!(
            "interest rate r must be >= 0, got {}",
            scenario.account.rate
        )));
    }
    if scenario.account.start_cash.len() != m {
        return Err(Error::InvalidAccount(format!(
            "start_cash must have exactly {m} entries, got {}",
            scenario.account.start_cash.len()
        )));
    }
    for (i, &a) in scenario.account.start_cash.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::InvalidAccount(format!(
                "start_cash[{i}] must be finite, got {a}"
            )));
        }
    }
    if scenario.account.gamma <= 0.0 || !scenario.account.gamma.is_finite() {
        return Err(Error::InvalidGamma(format!(
            "gamma must be strictly positive, got {}",
            scenario.account.gamma
        )));
    }

    if scenario.quantity.len() != m {
        return Err(Error::InvalidQuantity(format!(
            "quantity must have exactly {m} entries, got {}",
            scenario.quantity.len()
        )));
    }
    for (i, &q) in scenario.quantity.iter().enumerate() {
        if q < 1 {
            return Err(Error::InvalidQuantity(format!(
                "quantity[{i}] must be >= 1, got {q}"
            )));
        }
    }

    match scenario.mode {
        Mode::AssetReplication => {
            if scenario.option.is_some() {
                return Err(Error::InvalidOption(
                    "option parameters are not applicable in asset_replication mode".into(),
                ));
            }
        }
        Mode::ExcessReplication => {
            let opt = scenario.option.as_ref().ok_or_else(|| {
                Error::InvalidOption("excess_replication mode requires option parameters".into())
            })?;
            if m != 1 {
                return Err(Error::InvalidOption(format!(
                    "excess_replication requires a single asset, got m = {m}"
                )));
            }
            if scenario.market.sigma[0] <= 0.0 {
                return Err(Error::InvalidOption(
                    "excess_replication requires sigma > 0 (d1 divides by sigma)".into(),
                ));
            }
            if opt.strike <= 0.0 || !opt.strike.is_finite() {
                return Err(Error::InvalidOption(format!(
                    "strike K must be strictly positive, got {}",
                    opt.strike
                )));
            }
            if !(0.0..=1.0).contains(&opt.proportion) {
                return Err(Error::InvalidOption(format!(
                    "proportion c must lie in [0, 1], got {}",
                    opt.proportion
                )));
            }
        }
    }

    Ok(scenario)
}
