//! Ensemble convergence studies (terminal gap vs N) and runtime-scaling
//! sweeps (vs N and vs m).

use std::time::Instant;

use crate::error::{Error, Result};
use crate::kernel::{aggregate_totals, replicate};
use crate::model::{Mode, Scenario, TimeGrid};
use crate::options::replicate_excess;
use crate::paths::{simulate_paths, NormalStream};

/// Gap statistics for one grid resolution, aggregated over an ensemble of
/// seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub steps: usize,
    pub seeds: usize,
    pub mean_abs_gap: f64,
    /// Median guards against heavy-tailed gaps at high volatility.
    pub median_abs_gap: f64,
    pub mean_rel_gap: f64,
}

/// One timed point of a runtime sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub sweep_var: SweepVar,
    pub value: usize,
    pub mean_runtime: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Steps,
    Assets,
}

impl SweepVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVar::Steps => "N",
            SweepVar::Assets => "m",
        }
    }
}

/// Least-squares line through the (value, mean_runtime) points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Runs one scenario end to end and returns (total terminal gap, total
/// target). The total is the sum across assets: all cash sits in one
/// account.
pub fn run_total_gap(scenario: &Scenario) -> Result<(f64, f64)> {
    let mut stream = NormalStream::new(scenario.seed);
    let paths = simulate_paths(scenario, &mut stream);
    match scenario.mode {
        Mode::AssetReplication => {
            let result = replicate(&paths, scenario)?;
            let totals = aggregate_totals(&result);
            Ok((totals.terminal_gap, totals.target))
        }
        Mode::ExcessReplication => {
            let result = replicate_excess(&paths, scenario)?;
            Ok((result.terminal_gap(), result.target()))
        }
    }
}

/// Re-runs `base` at each grid resolution with `seeds` consecutive seeds
/// (base.seed, base.seed + 1, ...), collecting |terminal gap| statistics.
///
/// Deterministic given the seed list; ensemble members are independent runs.
pub fn convergence_study(
    base: &Scenario,
    n_values: &[usize],
    seeds: usize,
) -> Result<Vec<ConvergenceRecord>> {
    if seeds < 1 {
        return Err(Error::InvalidGrid("seed count must be >= 1".into()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) || n_values.iter().any(|&n| n < 2) {
        return Err(Error::InvalidGrid(
            "N values must be strictly increasing and >= 2".into(),
        ));
    }

    let mut records = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let mut scenario = base.clone();
        scenario.grid = TimeGrid::new(base.grid.horizon(), n)?;

        let mut abs_gaps = Vec::with_capacity(seeds);
        let mut rel_sum = 0.0;
        for j in 0..seeds {
            scenario.seed = base.seed.wrapping_add(j as u64);
            let (gap, target) = run_total_gap(&scenario)?;
            abs_gaps.push(gap.abs());
            rel_sum += if target.abs() > 1e-12 {
                gap.abs() / target.abs()
            } else {
                gap.abs()
            };
        }
        let mean_abs_gap = abs_gaps.iter().sum::<f64>() / seeds as f64;
        let mut sorted = abs_gaps;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median_abs_gap = if seeds % 2 == 1 {
            sorted[seeds / 2]
        } else {
            0.5 * (sorted[seeds / 2 - 1] + sorted[seeds / 2])
        };
        records.push(ConvergenceRecord {
            steps: n,
            seeds,
            mean_abs_gap,
            median_abs_gap,
            mean_rel_gap: rel_sum / seeds as f64,
        });
    }
    Ok(records)
}

/// Times full scenario runs while sweeping N or m. One untimed warm-up run
/// precedes the `repeats` timed runs at each value; sweeps run serially to
/// avoid contention skew. Timing wraps the kernel and never alters its
/// outputs.
pub fn bench_sweep(
    base: &Scenario,
    sweep_var: SweepVar,
    values: &[usize],
    repeats: usize,
) -> Result<(Vec<BenchRecord>, Option<LinearFit>)> {
    if repeats < 3 {
        return Err(Error::InvalidGrid("bench repeats must be >= 3".into()));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid(
            "sweep values must be strictly increasing".into(),
        ));
    }

    let mut records = Vec::with_capacity(values.len());
    for &value in values {
        let scenario = resized(base, sweep_var, value)?;
        run_total_gap(&scenario)?; // warm-up, excluded from timing
        let mut total = 0.0;
        for _ in 0..repeats {
            let started = Instant::now();
            run_total_gap(&scenario)?;
            total += started.elapsed().as_secs_f64();
        }
        records.push(BenchRecord {
            sweep_var,
            value,
            mean_runtime: total / repeats as f64,
            repeats,
        });
    }

    let fit = linear_fit(
        &records
            .iter()
            .map(|r| (r.value as f64, r.mean_runtime))
            .collect::<Vec<_>>(),
    );
    Ok((records, fit))
}

fn resized(base: &Scenario, sweep_var: SweepVar, value: usize) -> Result<Scenario> {
    let mut scenario = base.clone();
    match sweep_var {
        SweepVar::Steps => {
            scenario.grid = TimeGrid::new(base.grid.horizon(), value)?;
        }
        SweepVar::Assets => {
            if value < 1 {
                return Err(Error::InvalidMarket("asset count must be >= 1".into()));
            }
            let m = value;
            scenario.market.assets = m;
            scenario.market.initial_price = vec![base.market.initial_price[0]; m];
            scenario.market.drift = vec![base.market.drift[0]; m];
            scenario.market.sigma = vec![base.market.sigma[0]; m];
            scenario.account.start_cash = vec![base.account.start_cash[0]; m];
            scenario.quantity = vec![base.quantity[0]; m];
        }
    }
    Ok(scenario)
}

/// Returns `None` for fewer than two points or a degenerate abscissa.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
    if sxx == 0.0 {
        return None;
    }
    let sxy = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum::<f64>();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum::<f64>();
    let ss_res = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum::<f64>();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_scenario, AccountParams, MarketParams};

    fn flat_scenario(rate: f64, start: f64) -> Scenario {
        validate_scenario(Scenario {
            mode: Mode::AssetReplication,
            grid: TimeGrid::new(1.0, 100).unwrap(),
            market: MarketParams {
                assets: 1,
                initial_price: vec![150.0],
                drift: vec![0.0],
                sigma: vec![0.0],
            },
            account: AccountParams {
                rate,
                start_cash: vec![start],
                gamma: 1.0,
            },
            option: None,
            seed: 1,
            quantity: vec![1],
        })
        .unwrap()
    }

    fn example1(seed: u64) -> Scenario {
        validate_scenario(Scenario {
            mode: Mode::AssetReplication,
            grid: TimeGrid::new(1.0, 365).unwrap(),
            market: MarketParams {
                assets: 1,
                initial_price: vec![150.0],
                drift: vec![0.0],
                sigma: vec![0.5],
            },
            account: AccountParams {
                rate: 0.12,
                start_cash: vec![50.0],
                gamma: 1.0,
            },
            option: None,
            seed,
            quantity: vec![1],
        })
        .unwrap()
    }

    #[test]
    fn exact_case_has_zero_gaps() {
        let base = flat_scenario(0.0, 0.0);
        let records = convergence_study(&base, &[10, 100, 1000], 3).unwrap();
        for rec in &records {
            assert!(rec.mean_abs_gap <= 1e-12 * 150.0, "{:?}", rec);
        }
    }

    /// Closed-form deficit of the left Riemann sum of Q against R(0), the
    /// independent oracle for the flat-market bias.
    fn riemann_deficit(n: usize, t: f64, rate: f64) -> f64 {
        let dt = t / n as f64;
        if rate == 0.0 {
            return 0.0;
        }
        let top = (2.0 * rate * t).exp() - 1.0;
        let left_sum = dt * top / (1.0 - (-2.0 * rate * dt).exp());
        left_sum - top / (2.0 * rate)
    }

    #[test]
    fn first_order_bias_matches_closed_form_and_halves() {
        let base = flat_scenario(0.12, 50.0);
        let records = convergence_study(&base, &[100, 200, 400], 1).unwrap();

        let r0 = ((2.0_f64 * 0.12).exp() - 1.0) / 0.24;
        let mu0 = (150.0 - (0.12_f64).exp() * 50.0) / r0;
        for rec in &records {
            let predicted = (mu0 * riemann_deficit(rec.steps, 1.0, 0.12)).abs();
            assert!(
                (rec.mean_abs_gap - predicted).abs() <= 1e-6 * predicted,
                "N = {}: got {}, oracle {}",
                rec.steps,
                rec.mean_abs_gap,
                predicted
            );
        }
        let r1 = records[0].mean_abs_gap / records[1].mean_abs_gap;
        let r2 = records[1].mean_abs_gap / records[2].mean_abs_gap;
        assert!((1.7..=2.3).contains(&r1), "ratio {r1}");
        assert!((1.7..=2.3).contains(&r2), "ratio {r2}");
    }

    #[test]
    fn ensemble_rel_gap_decreases_with_refinement() {
        let records = convergence_study(&example1(0), &[50, 500, 5000], 200).unwrap();
        assert!(records[0].mean_rel_gap > records[1].mean_rel_gap);
        assert!(records[1].mean_rel_gap > records[2].mean_rel_gap);
    }

    #[test]
    fn study_is_reproducible() {
        let a = convergence_study(&example1(7), &[50, 100], 20).unwrap();
        let b = convergence_study(&example1(7), &[50, 100], 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_unsorted_n_values() {
        assert!(convergence_study(&example1(0), &[100, 50], 2).is_err());
    }

    #[test]
    fn single_value_sweep_has_no_fit() {
        let (records, fit) = bench_sweep(&example1(0), SweepVar::Steps, &[200], 3).unwrap();
        assert_eq!(records.len(), 1);
        assert!(fit.is_none());
    }

    #[test]
    fn bench_does_not_alter_outputs() {
        let scenario = example1(13);
        let before = run_total_gap(&scenario).unwrap();
        let _ = bench_sweep(&scenario, SweepVar::Steps, &[50, 100], 3).unwrap();
        let after = run_total_gap(&scenario).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let points = [(1.0, 3.0), (2.0, 5.0), (3.0, 7.0)];
        let fit = linear_fit(&points).unwrap();
        assert!((fit.slope - 2.0).abs() <= 1e-12);
        assert!((fit.intercept - 1.0).abs() <= 1e-12);
        assert!((fit.r_squared - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn asset_sweep_resizes_every_vector() {
        let scenario = resized(&example1(0), SweepVar::Assets, 4).unwrap();
        assert_eq!(scenario.market.assets, 4);
        assert_eq!(scenario.market.initial_price.len(), 4);
        assert_eq!(scenario.account.start_cash.len(), 4);
        assert_eq!(scenario.quantity.len(), 4);
        let (gap, target) = run_total_gap(&scenario).unwrap();
        assert!(gap.is_finite() && target.is_finite());
    }
}
