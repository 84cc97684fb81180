//! Seed-reproducible Wiener increments and discretized price paths.
//!
//! The generator is pinned so that runs are bit-reproducible within this
//! implementation: a SplitMix64 state update (Steele, Lea & Flood 2014)
//! supplies uniforms in [0, 1), and the Box-Muller transform turns pairs of
//! uniforms into standard normal draws. Cross-implementation bit equality is
//! not a goal; statistical checks are.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::model::{Scenario, TimeGrid};

/// Deterministic standard-normal stream seeded by a 64-bit integer.
///
/// Single-owner: the stream mutates as it is consumed. Independent streams
/// (distinct seeds) may run in parallel.
#[derive(Debug, Clone)]
pub struct NormalStream {
    seed: u64,
    state: u64,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            state: seed,
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// SplitMix64 step: full 2^64 period, one output per state increment.
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw via the Box-Muller transform. Pairs are produced
    /// from two uniforms; the sine variate is cached for the next call.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u in (0, 1] keeps ln away from zero.
        let u1 = 1.0 - self.next_uniform();
        let u2 = self.next_uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Derives a child stream with a fresh seed drawn from this stream.
    ///
    /// Each asset consumes its own child so that sub-sequences stay disjoint
    /// and per-asset draws are independent of the number of assets generated
    /// before it.
    pub fn spawn(&mut self) -> NormalStream {
        NormalStream::new(self.next_u64())
    }
}

/// Draws the m x N array of Wiener increments `dW[i][k] = z * sqrt(dt)`.
///
/// Asset `i` consumes the `i`-th child stream spawned from `stream`, so rows
/// are disjoint sub-sequences.
pub fn wiener_increments(
    stream: &mut NormalStream,
    assets: usize,
    steps: usize,
    dt: f64,
) -> Vec<Vec<f64>> {
    let sqrt_dt = dt.sqrt();
    (0..assets)
        .map(|_| {
            let mut child = stream.spawn();
            (0..steps).map(|_| child.next_normal() * sqrt_dt).collect()
        })
        .collect()
}

/// Per-asset price series and increments on a shared grid.
///
/// `prices[i]` has `N + 1` entries with `prices[i][0] = S0[i]`;
/// `increments[i]` has `N` entries and `prices[i][k] = prices[i][k-1] +
/// increments[i][k-1]` holds exactly, because prices are stored as the
/// running sum of the increments as computed.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub grid: TimeGrid,
    pub prices: Vec<Vec<f64>>,
    pub increments: Vec<Vec<f64>>,
}

impl PathSet {
    /// Rebuilds a path set from initial prices and raw increments.
    ///
    /// Prices are the left-to-right running sums, matching what
    /// `simulate_paths` stores. Used by tests and by callers that need
    /// hand-crafted increments (e.g. zeroed ones).
    pub fn from_increments(
        grid: TimeGrid,
        initial: &[f64],
        increments: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if initial.len() != increments.len() {
            return Err(Error::InvalidMarket(format!(
                "initial prices ({}) and increment rows ({}) disagree",
                initial.len(),
                increments.len()
            )));
        }
        let n = grid.steps();
        let mut prices = Vec::with_capacity(initial.len());
        for (i, row) in increments.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGrid(format!(
                    "increment row {i} has {} entries, grid wants {n}",
                    row.len()
                )));
            }
            let mut series = Vec::with_capacity(n + 1);
            series.push(initial[i]);
            let mut level = initial[i];
            for &ds in row {
                level += ds;
                series.push(level);
            }
            prices.push(series);
        }
        Ok(Self {
            grid,
            prices,
            increments,
        })
    }

    pub fn assets(&self) -> usize {
        self.prices.len()
    }

    /// Extracts asset `i` as a standalone single-asset path set.
    pub fn single(&self, asset: usize) -> PathSet {
        PathSet {
            grid: self.grid.clone(),
            prices: vec![self.prices[asset].clone()],
            increments: vec![self.increments[asset].clone()],
        }
    }

    pub fn terminal_prices(&self) -> Vec<f64> {
        self.prices.iter().map(|row| row[row.len() - 1]).collect()
    }
}

/// Simulates the Euler-discretized price recursion
/// `dS(t_k) = S(t_{k-1}) * (a * dt + sigma * dW(t_k))` for every asset.
///
/// Quantity multiples scale S(0), and with it every increment, per asset.
/// Negative prices are allowed to pass through; excess mode rejects them
/// downstream where ln(S/K) is taken.
pub fn simulate_paths(scenario: &Scenario, stream: &mut NormalStream) -> PathSet {
    let grid = &scenario.grid;
    let n = grid.steps();
    let dt = grid.dt();
    let m = scenario.assets();

    let dw = wiener_increments(stream, m, n, dt);

    let mut prices = Vec::with_capacity(m);
    let mut increments = Vec::with_capacity(m);
    for (i, noise) in dw.iter().enumerate() {
        let drift = scenario.market.drift[i];
        let sigma = scenario.market.sigma[i];
        let s0 = scenario.quantity[i] as f64 * scenario.market.initial_price[i];

        let mut series = Vec::with_capacity(n + 1);
        let mut deltas = Vec::with_capacity(n);
        let mut level = s0;
        series.push(level);
        for &w in noise {
            let ds = level * (drift * dt + sigma * w);
            level += ds;
            deltas.push(ds);
            series.push(level);
        }
        prices.push(series);
        increments.push(deltas);
    }

    PathSet {
        grid: grid.clone(),
        prices,
        increments,
    }
}
