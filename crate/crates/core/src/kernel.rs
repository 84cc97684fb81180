//! Optimal cash-flow schedule that replicates the terminal stock price(s).
//!
//! For each asset the kernel computes, on the grid `t_k = k * dt`:
//!
//! ```text
//! M(t_0) = 0,          M(t_k) = M(t_{k-1}) + R(t_k)^{-1} dS(t_k)   k = 1..N-1
//! mu(t_k) = R(0)^{-1} (S(0) - e^{rT} a) + M(t_k)                   k = 0..N-1
//! u(t_k) = Gamma^{-1} e^{r (T - t_k)} mu(t_k)                      k = 0..N-1
//! x(t_0) = a,          x(t_k) = (x(t_{k-1}) + u(t_{k-1}) dt) e^{r dt}
//! ```
//!
//! The deposit over step k runs at the rate fixed at the step's left
//! endpoint, so the last rate ever needed is u(t_{N-1}) and R(t)^{-1} is
//! never evaluated at t = T, where R(T) = 0 makes the control blow up. The
//! increment driving M is the stock-price increment dS, with R taken at the
//! increment's right endpoint.

use crate::error::{Error, Result};
use crate::model::{AccountParams, Scenario, TimeGrid};
use crate::paths::PathSet;
use crate::quad::adaptive_simpson;

/// Default tolerances for the quadrature route of R(s).
pub const R_QUAD_ABS_TOL: f64 = 1e-10;
pub const R_QUAD_REL_TOL: f64 = 1e-8;

/// Closed form of `R(s) = integral_s^T e^{2r(T-t)} / Gamma dt` for constant
/// Gamma: `(e^{2r(T-s)} - 1) / (2 r Gamma)` when r > 0, `(T - s) / Gamma`
/// when r = 0.
pub fn capital_r(s: f64, account: &AccountParams, grid: &TimeGrid) -> Result<f64> {
    let t_final = grid.horizon();
    if s >= t_final {
        return Err(Error::SingularR { s, t_final });
    }
    let r = account.rate;
    let gamma = account.gamma;
    if r == 0.0 {
        Ok((t_final - s) / gamma)
    } else {
        Ok(((2.0 * r * (t_final - s)).exp() - 1.0) / (2.0 * r * gamma))
    }
}

/// Adaptive-Simpson estimate of `R(s) = integral_s^T Q(t) dt` for an
/// arbitrary positive evaluator Q. Exists as the general path and as a
/// cross-check of the closed form.
pub fn capital_r_quadrature<F>(
    s: f64,
    q_evaluator: &F,
    grid: &TimeGrid,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let t_final = grid.horizon();
    if s >= t_final {
        return Err(Error::SingularR { s, t_final });
    }
    adaptive_simpson(q_evaluator, s, t_final, abs_tol, rel_tol)
}

/// Series produced by one replication run.
///
/// Row `i` is asset `i`. `deposit_rate`, `martingale` and `mu` hold the
/// grid values at `t_0..t_{N-1}` (N entries); `cash` holds `x(t_0)..x(t_N)`
/// (N + 1 entries). `terminal_gap[i] = cash[i][N] - target[i]` is the
/// discretization error the convergence study measures.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub deposit_rate: Vec<Vec<f64>>,
    pub cash: Vec<Vec<f64>>,
    pub martingale: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub terminal_gap: Vec<f64>,
}

/// Shared per-grid factors, computed once per run and reused across assets.
pub(crate) struct KernelFactors {
    /// 1 / R(t_k) for k = 1..N-1 (index k-1).
    pub r_inverse: Vec<f64>,
    /// e^{r (T - t_k)} for k = 0..N-1.
    pub growth_to_horizon: Vec<f64>,
    /// e^{r dt}, the one-step accumulation factor.
    pub accrual: f64,
    /// 1 / R(0).
    pub r0_inverse: f64,
    /// e^{r T}.
    pub growth_total: f64,
    pub gamma_inverse: f64,
    pub dt: f64,
}

impl KernelFactors {
    pub fn new(account: &AccountParams, grid: &TimeGrid) -> Result<Self> {
        let n = grid.steps();
        let r = account.rate;
        let t_final = grid.horizon();
        let mut r_inverse = Vec::with_capacity(n - 1);
        for k in 1..n {
            r_inverse.push(1.0 / capital_r(grid.time(k), account, grid)?);
        }
        let growth_to_horizon = (0..n)
            .map(|k| (r * (t_final - grid.time(k))).exp())
            .collect();
        Ok(Self {
            r_inverse,
            growth_to_horizon,
            accrual: (r * grid.dt()).exp(),
            r0_inverse: 1.0 / capital_r(0.0, account, grid)?,
            growth_total: (r * t_final).exp(),
            gamma_inverse: 1.0 / account.gamma,
            dt: grid.dt(),
        })
    }
}

fn check_grid(paths: &PathSet, scenario: &Scenario) -> Result<()> {
    if paths.grid != scenario.grid {
        return Err(Error::GridMismatch {
            path_t: paths.grid.horizon(),
            path_n: paths.grid.steps(),
            scenario_t: scenario.grid.horizon(),
            scenario_n: scenario.grid.steps(),
        });
    }
    Ok(())
}

/// Runs the replication recursion against simulated paths.
///
/// The claim is the terminal price of each asset; `terminal_gap` reports how
/// far the accumulated cash lands from it.
pub fn replicate(paths: &PathSet, scenario: &Scenario) -> Result<ReplicationResult> {
    check_grid(paths, scenario)?;
    let n = scenario.grid.steps();
    let m = paths.assets();
    let factors = KernelFactors::new(&scenario.account, &scenario.grid)?;

    let mut deposit_rate = Vec::with_capacity(m);
    let mut cash = Vec::with_capacity(m);
    let mut martingale = Vec::with_capacity(m);
    let mut mu_series = Vec::with_capacity(m);
    let mut target = Vec::with_capacity(m);
    let mut terminal_gap = Vec::with_capacity(m);

    for i in 0..m {
        let s0 = paths.prices[i][0];
        let start = scenario.account.start_cash[i];
        let mu0 = factors.r0_inverse * (s0 - factors.growth_total * start);

        let mut m_row = Vec::with_capacity(n);
        let mut mu_row = Vec::with_capacity(n);
        let mut u_row = Vec::with_capacity(n);
        let mut x_row = Vec::with_capacity(n + 1);

        let mut m_running = 0.0;
        m_row.push(m_running);
        mu_row.push(mu0);
        u_row.push(factors.gamma_inverse * factors.growth_to_horizon[0] * mu0);
        x_row.push(start);

        let mut x_running = start;
        for k in 1..=n {
            // deposit over step k at the rate fixed at t_{k-1}
            x_running = (x_running + u_row[k - 1] * factors.dt) * factors.accrual;
            x_row.push(x_running);
            if k < n {
                m_running += factors.r_inverse[k - 1] * paths.increments[i][k - 1];
                let mu_k = mu0 + m_running;
                m_row.push(m_running);
                mu_row.push(mu_k);
                u_row.push(factors.gamma_inverse * factors.growth_to_horizon[k] * mu_k);
            }
        }

        let claim = paths.prices[i][n];
        target.push(claim);
        terminal_gap.push(x_running - claim);
        deposit_rate.push(u_row);
        cash.push(x_row);
        martingale.push(m_row);
        mu_series.push(mu_row);
    }

    Ok(ReplicationResult {
        deposit_rate,
        cash,
        martingale,
        mu: mu_series,
        target,
        terminal_gap,
    })
}

/// Terminal cash by the explicit accumulated sum
/// `e^{rT} a + sum_k u(t_k) dt e^{r (T - t_k)}`, recomputing u without the
/// cash recursion. Serves as the independent route for the recursion's
/// terminal value.
pub fn direct_sum_oracle(paths: &PathSet, scenario: &Scenario) -> Result<Vec<f64>> {
    check_grid(paths, scenario)?;
    let n = scenario.grid.steps();
    let factors = KernelFactors::new(&scenario.account, &scenario.grid)?;

    let mut terminal = Vec::with_capacity(paths.assets());
    for i in 0..paths.assets() {
        let s0 = paths.prices[i][0];
        let start = scenario.account.start_cash[i];
        let mu0 = factors.r0_inverse * (s0 - factors.growth_total * start);

        let mut m_running = 0.0;
        let mut total = factors.growth_total * start;
        for k in 0..n {
            if k > 0 {
                m_running += factors.r_inverse[k - 1] * paths.increments[i][k - 1];
            }
            let u_k = factors.gamma_inverse * factors.growth_to_horizon[k] * (mu0 + m_running);
            total += u_k * factors.dt * factors.growth_to_horizon[k];
        }
        terminal.push(total);
    }
    Ok(terminal)
}

/// Elementwise sums across assets: total cash series, total deposit-rate
/// series, total claim, and total terminal gap.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTotals {
    pub cash: Vec<f64>,
    pub deposit_rate: Vec<f64>,
    pub target: f64,
    pub terminal_gap: f64,
}

/// Sums the per-asset series; all deposits land in one bank account.
pub fn aggregate_totals(result: &ReplicationResult) -> AggregateTotals {
    let points = result.cash[0].len();
    let rate_points = result.deposit_rate[0].len();
    let mut cash = vec![0.0; points];
    let mut deposit_rate = vec![0.0; rate_points];
    for row in &result.cash {
        for (total, value) in cash.iter_mut().zip(row) {
            *total += value;
        }
    }
    for row in &result.deposit_rate {
        for (total, value) in deposit_rate.iter_mut().zip(row) {
            *total += value;
        }
    }
    AggregateTotals {
        cash,
        deposit_rate,
        target: result.target.iter().sum(),
        terminal_gap: result.terminal_gap.iter().sum(),
    }
}
