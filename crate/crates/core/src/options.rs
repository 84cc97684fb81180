//! Replication of a proportion of the equity excess max(S(T) - K, 0) by
//! accumulating Black-Scholes-delta-weighted stock increments.

use crate::error::{Error, Result};
use crate::kernel::{KernelFactors, ReplicationResult};
use crate::model::{AccountParams, OptionSpec, Scenario, TimeGrid};
use crate::paths::PathSet;

/// Cumulative standard normal distribution, accurate to better than 1e-12
/// absolute over the whole real line.
///
/// Hart-type rational expansion of the complementary tail in double
/// precision (the form given by West, "Better approximations to cumulative
/// normal functions"): a degree-6/7 rational in |z| below 7.07, a continued
/// fraction beyond, underflow to 0 past 37.
pub fn norm_cdf(z: f64) -> f64 {
    let x = z.abs();
    let tail = if x > 37.0 {
        0.0
    } else {
        let e = (-0.5 * x * x).exp();
        if x < 7.071_067_811_865_47 {
            let mut num = 3.52624965998911e-2 * x + 0.700383064443688;
            num = num * x + 6.37396220353165;
            num = num * x + 33.912866078383;
            num = num * x + 112.079291497871;
            num = num * x + 221.213596169931;
            num = num * x + 220.206867912376;
            let mut den = 8.83883476483184e-2 * x + 1.75566716318264;
            den = den * x + 16.064177579207;
            den = den * x + 86.7807322029461;
            den = den * x + 296.564248779674;
            den = den * x + 637.333633378831;
            den = den * x + 793.826512519948;
            den = den * x + 440.413735824752;
            e * num / den
        } else {
            let mut b = x + 0.65;
            b = x + 4.0 / b;
            b = x + 3.0 / b;
            b = x + 2.0 / b;
            b = x + 1.0 / b;
            e / (b * 2.506628274631)
        }
    };
    if z > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// One Black-Scholes call evaluation at (S, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsQuote {
    pub d1: f64,
    pub d2: f64,
    /// N(d1): the hedge weight applied to stock increments.
    pub delta: f64,
    /// Call price H(S, t) = N(d1) S - N(d2) K e^{-r (T - t)}.
    pub price: f64,
}

/// Black-Scholes call quote for the scenario's constant volatility.
pub fn bs_quote(
    price: f64,
    t: f64,
    spec: &OptionSpec,
    account: &AccountParams,
    grid: &TimeGrid,
    sigma: f64,
) -> Result<BsQuote> {
    let t_final = grid.horizon();
    if t >= t_final {
        return Err(Error::ExpiredOption { t, t_final });
    }
    if price <= 0.0 {
        return Err(Error::NonPositivePrice { price, step: 0 });
    }
    let tau = t_final - t;
    let vol = sigma * tau.sqrt();
    let d1 = ((price / spec.strike).ln() + (account.rate + 0.5 * sigma * sigma) * tau) / vol;
    let d2 = d1 - vol;
    let delta = norm_cdf(d1);
    let discounted_strike = spec.strike * (-account.rate * tau).exp();
    Ok(BsQuote {
        d1,
        d2,
        delta,
        price: delta * price - norm_cdf(d2) * discounted_strike,
    })
}

/// Result of one excess-replication run (single asset).
///
/// `claim` holds f(t_0)..f(t_{N-1}); the inner result's series follow the
/// same layout as asset replication, with `target = c f(t_{N-1}) e^{r dt}`
/// (the last computed claim value carried over the final accrual step, the
/// same step the cash is carried through).
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessResult {
    pub claim: Vec<f64>,
    pub inner: ReplicationResult,
}

impl ExcessResult {
    pub fn terminal_gap(&self) -> f64 {
        self.inner.terminal_gap[0]
    }

    pub fn target(&self) -> f64 {
        self.inner.target[0]
    }
}

/// Replicates f = c max(S(T) - K, 0) by feeding delta-weighted increments
/// `df_k = N(d1(t_k)) sigma dS(t_k)` through the R-weighted recursion.
///
/// The claim series starts at the Black-Scholes price H(S(0), 0) and follows
/// `f(t_k) = f(t_{k-1}) + df_k`, floored at zero when `floor_at_zero` is set.
pub fn replicate_excess(paths: &PathSet, scenario: &Scenario) -> Result<ExcessResult> {
    if paths.grid != scenario.grid {
        return Err(Error::GridMismatch {
            path_t: paths.grid.horizon(),
            path_n: paths.grid.steps(),
            scenario_t: scenario.grid.horizon(),
            scenario_n: scenario.grid.steps(),
        });
    }
    let spec = scenario
        .option
        .as_ref()
        .ok_or_else(|| Error::InvalidOption("excess replication needs option parameters".into()))?;
    let sigma = scenario.market.sigma[0];
    let grid = &scenario.grid;
    let n = grid.steps();

    // d1 takes ln(S / K); fail loudly on any non-positive price.
    for (step, &p) in paths.prices[0].iter().enumerate() {
        if p <= 0.0 {
            return Err(Error::NonPositivePrice { price: p, step });
        }
    }

    let factors = KernelFactors::new(&scenario.account, grid)?;
    let c = spec.proportion;
    let h0 = bs_quote(
        paths.prices[0][0],
        0.0,
        spec,
        &scenario.account,
        grid,
        sigma,
    )?
    .price;

    let mut claim = Vec::with_capacity(n);
    let mut m_row = Vec::with_capacity(n);
    let mut mu_row = Vec::with_capacity(n);
    let mut u_row = Vec::with_capacity(n);
    let mut x_row = Vec::with_capacity(n + 1);

    let mu0 = factors.r0_inverse * h0;
    claim.push(h0);
    m_row.push(0.0);
    mu_row.push(mu0);
    u_row.push(c * factors.gamma_inverse * factors.growth_to_horizon[0] * mu0);
    x_row.push(0.0);

    let mut f_running = h0;
    let mut m_running = 0.0;
    let mut x_running = 0.0;
    for k in 1..=n {
        x_running = (x_running + u_row[k - 1] * factors.dt) * factors.accrual;
        x_row.push(x_running);
        if k < n {
            let quote = bs_quote(
                paths.prices[0][k],
                grid.time(k),
                spec,
                &scenario.account,
                grid,
                sigma,
            )?;
            let df = quote.delta * sigma * paths.increments[0][k - 1];
            f_running += df;
            if spec.floor_at_zero {
                f_running = f_running.max(0.0);
            }
            m_running += factors.r_inverse[k - 1] * df;
            let mu_k = mu0 + m_running;
            claim.push(f_running);
            m_row.push(m_running);
            mu_row.push(mu_k);
            u_row.push(c * factors.gamma_inverse * factors.growth_to_horizon[k] * mu_k);
        }
    }

    let target = c * f_running * factors.accrual;
    let gap = x_running - target;
    Ok(ExcessResult {
        claim,
        inner: ReplicationResult {
            deposit_rate: vec![u_row],
            cash: vec![x_row],
            martingale: vec![m_row],
            mu: vec![mu_row],
            target: vec![target],
            terminal_gap: vec![gap],
        },
    })
}
