//! Scenario file parsing and deterministic CSV output.
//!
//! Scenario files are flat `key=value` text, one pair per line, `#` starts a
//! comment. Keys: `mode`, `T`, `N`, `m`, `S0` (comma list), `drift`,
//! `sigma`, `r`, `start_cash` (scalar total split equally, or comma list),
//! `gamma`, `K`, `c`, `floor_at_zero`, `seed`, `quantity` (comma list).
//! Unknown keys are rejected, as are option keys outside excess mode.

use std::collections::HashMap;
use std::io::Write;

use crate::analysis::{BenchRecord, ConvergenceRecord, LinearFit};
use crate::error::{Error, Result};
use crate::kernel::{aggregate_totals, ReplicationResult};
use crate::model::{
    validate_scenario, AccountParams, MarketParams, Mode, OptionSpec, Scenario, TimeGrid,
};
use crate::options::ExcessResult;
use crate::paths::PathSet;

const GLOBAL_KEYS: &[&str] = &[
    "mode",
    "T",
    "N",
    "m",
    "S0",
    "drift",
    "sigma",
    "r",
    "start_cash",
    "gamma",
    "seed",
    "quantity",
];
const EXCESS_KEYS: &[&str] = &["K", "c", "floor_at_zero"];

/// Parses a scenario document and validates the result.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut pairs: HashMap<&str, (usize, &str)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected key=value, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty key or value".into(),
            });
        }
        if pairs.insert(key, (line_no, value)).is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }

    let mode = match required(&pairs, "mode")? {
        "asset_replication" => Mode::AssetReplication,
        "excess_replication" => Mode::ExcessReplication,
        other => {
            return Err(Error::Parse {
                line: pairs["mode"].0,
                message: format!("unknown mode `{other}`"),
            })
        }
    };

    for (&key, &(line, _)) in &pairs {
        let known_global = GLOBAL_KEYS.contains(&key);
        let known_excess = EXCESS_KEYS.contains(&key);
        if !known_global && !known_excess {
            return Err(Error::UnknownKey {
                key: key.to_string(),
                context: format!(" at line {line}"),
            });
        }
        if known_excess && mode == Mode::AssetReplication {
            return Err(Error::UnknownKey {
                key: key.to_string(),
                context: format!(" (not applicable in asset_replication mode, line {line})"),
            });
        }
    }

    let horizon = parse_float(&pairs, "T", required(&pairs, "T")?)?;
    let steps = parse_int(&pairs, "N", required(&pairs, "N")?)? as usize;
    let assets = parse_int(&pairs, "m", required(&pairs, "m")?)? as usize;
    let grid = TimeGrid::new(horizon, steps)?;

    let initial_price = broadcast(
        parse_list(&pairs, "S0", required(&pairs, "S0")?)?,
        assets,
        "S0",
    )?;
    let sigma = broadcast(
        parse_list(&pairs, "sigma", required(&pairs, "sigma")?)?,
        assets,
        "sigma",
    )?;
    let drift = match pairs.get("drift") {
        Some(&(_, v)) => broadcast(parse_list(&pairs, "drift", v)?, assets, "drift")?,
        None => vec![0.0; assets],
    };
    let rate = parse_float(&pairs, "r", required(&pairs, "r")?)?;

    // A scalar start_cash is the total, split equally across the per-asset
    // processes; a comma list is taken per asset.
    let start_values = parse_list(&pairs, "start_cash", required(&pairs, "start_cash")?)?;
    let start_cash = if start_values.len() == 1 && assets > 1 {
        AccountParams::split_start_cash(start_values[0], assets)
    } else {
        broadcast(start_values, assets, "start_cash")?
    };

    let gamma = match pairs.get("gamma") {
        Some(&(_, v)) => parse_float(&pairs, "gamma", v)?,
        None => 1.0,
    };
    let seed = match pairs.get("seed") {
        Some(&(line, v)) => v.parse::<u64>().map_err(|_| Error::Parse {
            line,
            message: format!("seed must be a 64-bit unsigned integer, got `{v}`"),
        })?,
        None => 0,
    };
    let quantity = match pairs.get("quantity") {
        Some(&(line, v)) => {
            let parsed: std::result::Result<Vec<u64>, _> =
                v.split(',').map(|p| p.trim().parse::<u64>()).collect();
            let list = parsed.map_err(|_| Error::Parse {
                line,
                message: format!("quantity must be a comma list of integers, got `{v}`"),
            })?;
            if list.len() == 1 && assets > 1 {
                vec![list[0]; assets]
            } else {
                list
            }
        }
        None => vec![1; assets],
    };

    let option = match mode {
        Mode::AssetReplication => None,
        Mode::ExcessReplication => {
            let strike = parse_float(&pairs, "K", required(&pairs, "K")?)?;
            let proportion = parse_float(&pairs, "c", required(&pairs, "c")?)?;
            let floor_at_zero = match pairs.get("floor_at_zero") {
                Some(&(line, v)) => match v {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(Error::Parse {
                            line,
                            message: format!("floor_at_zero must be true or false, got `{other}`"),
                        })
                    }
                },
                None => true,
            };
            Some(OptionSpec {
                strike,
                proportion,
                floor_at_zero,
            })
        }
    };

    validate_scenario(Scenario {
        mode,
        grid,
        market: MarketParams {
            assets,
            initial_price,
            drift,
            sigma,
        },
        account: AccountParams {
            rate,
            start_cash,
            gamma,
        },
        option,
        seed,
        quantity,
    })
}

fn required<'a>(pairs: &HashMap<&str, (usize, &'a str)>, key: &str) -> Result<&'a str> {
    pairs
        .get(key)
        .map(|&(_, v)| v)
        .ok_or_else(|| Error::MissingKey {
            key: key.to_string(),
        })
}

fn parse_float(pairs: &HashMap<&str, (usize, &str)>, key: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::Parse {
        line: pairs.get(key).map(|&(l, _)| l).unwrap_or(0),
        message: format!("`{key}` must be a number, got `{value}`"),
    })
}

fn parse_int(pairs: &HashMap<&str, (usize, &str)>, key: &str, value: &str) -> Result<u64> {
    value.parse::<u64>().map_err(|_| Error::Parse {
        line: pairs.get(key).map(|&(l, _)| l).unwrap_or(0),
        message: format!("`{key}` must be a non-negative integer, got `{value}`"),
    })
}

fn parse_list(pairs: &HashMap<&str, (usize, &str)>, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|part| parse_float(pairs, key, part.trim()))
        .collect()
}

fn broadcast(values: Vec<f64>, assets: usize, key: &str) -> Result<Vec<f64>> {
    if values.len() == assets {
        Ok(values)
    } else if values.len() == 1 {
        Ok(vec![values[0]; assets])
    } else {
        Err(Error::Parse {
            line: 0,
            message: format!(
                "`{key}` must have 1 or {assets} entries, got {}",
                values.len()
            ),
        })
    }
}

/// Inverse of `parse_scenario`: renders a scenario as a key=value document.
pub fn render_scenario(scenario: &Scenario) -> String {
    let mut out = String::new();
    let join = |values: &[f64]| {
        values
            .iter()
            .map(|v| format!("{v:?}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    out.push_str(&format!("mode={}\n", scenario.mode.as_str()));
    out.push_str(&format!("T={:?}\n", scenario.grid.horizon()));
    out.push_str(&format!("N={}\n", scenario.grid.steps()));
    out.push_str(&format!("m={}\n", scenario.market.assets));
    out.push_str(&format!("S0={}\n", join(&scenario.market.initial_price)));
    out.push_str(&format!("drift={}\n", join(&scenario.market.drift)));
    out.push_str(&format!("sigma={}\n", join(&scenario.market.sigma)));
    out.push_str(&format!("r={:?}\n", scenario.account.rate));
    out.push_str(&format!(
        "start_cash={}\n",
        join(&scenario.account.start_cash)
    ));
    out.push_str(&format!("gamma={:?}\n", scenario.account.gamma));
    if let Some(opt) = &scenario.option {
        out.push_str(&format!("K={:?}\n", opt.strike));
        out.push_str(&format!("c={:?}\n", opt.proportion));
        out.push_str(&format!("floor_at_zero={}\n", opt.floor_at_zero));
    }
    out.push_str(&format!("seed={}\n", scenario.seed));
    out.push_str(&format!(
        "quantity={}\n",
        scenario
            .quantity
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(",")
    ));
    out
}

/// Formats a finite value with exactly 12 significant digits, plain decimal
/// within a readable magnitude range and scientific notation outside it.
pub fn fmt_sig12(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    if !(-5..12).contains(&magnitude) {
        return format!("{value:.11e}");
    }
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Writes the per-asset series behind the replication plots.
///
/// Header `time,asset_id,price,cash,u`; rows ordered by (asset_id, time);
/// `u` is empty on the final row of each asset because no deposit rate is
/// ever fixed at the singular terminal point. Multi-asset runs append a
/// `total` pseudo-asset carrying the summed price, cash and deposit series.
pub fn write_series_csv<W: Write>(
    paths: &PathSet,
    result: &ReplicationResult,
    writer: &mut W,
) -> Result<()> {
    let n = paths.grid.steps();
    writeln!(writer, "time,asset_id,price,cash,u")?;
    let mut write_block = |label: &str, prices: &dyn Fn(usize) -> f64, cash: &[f64], rate: &[f64]| -> Result<()> {
        for k in 0..=n {
            let u = if k < n {
                fmt_sig12(rate[k])
            } else {
                String::new()
            };
            writeln!(
                writer,
                "{},{},{},{},{}",
                fmt_sig12(paths.grid.time(k)),
                label,
                fmt_sig12(prices(k)),
                fmt_sig12(cash[k]),
                u
            )?;
        }
        Ok(())
    };

    for i in 0..paths.assets() {
        let label = i.to_string();
        write_block(
            &label,
            &|k| paths.prices[i][k],
            &result.cash[i],
            &result.deposit_rate[i],
        )?;
    }
    if paths.assets() > 1 {
        let totals = aggregate_totals(result);
        write_block(
            "total",
            &|k| paths.prices.iter().map(|row| row[k]).sum(),
            &totals.cash,
            &totals.deposit_rate,
        )?;
    }
    Ok(())
}

/// Writes the excess comparison series: `c f(t_k)` against the accumulated
/// cash. The final row carries the target the cash is measured against.
pub fn write_excess_csv<W: Write>(
    grid: &TimeGrid,
    result: &ExcessResult,
    proportion: f64,
    writer: &mut W,
) -> Result<()> {
    let n = grid.steps();
    writeln!(writer, "time,excess,cash")?;
    for k in 0..=n {
        let excess = if k < n {
            proportion * result.claim[k]
        } else {
            result.target()
        };
        writeln!(
            writer,
            "{},{},{}",
            fmt_sig12(grid.time(k)),
            fmt_sig12(excess),
            fmt_sig12(result.inner.cash[0][k])
        )?;
    }
    Ok(())
}

pub fn write_convergence_csv<W: Write>(
    records: &[ConvergenceRecord],
    writer: &mut W,
) -> Result<()> {
    writeln!(writer, "N,seeds,mean_abs_gap,median_abs_gap,mean_rel_gap")?;
    for rec in records {
        writeln!(
            writer,
            "{},{},{},{},{}",
            rec.steps,
            rec.seeds,
            fmt_sig12(rec.mean_abs_gap),
            fmt_sig12(rec.median_abs_gap),
            fmt_sig12(rec.mean_rel_gap)
        )?;
    }
    Ok(())
}

/// The fit column repeats the sweep-level R^2 on every row and stays empty
/// when the fit is undefined (fewer than two points).
pub fn write_bench_csv<W: Write>(
    records: &[BenchRecord],
    fit: Option<LinearFit>,
    writer: &mut W,
) -> Result<()> {
    writeln!(writer, "sweep_var,value,mean_runtime,repeats,fit_r2")?;
    let fit_text = fit
        .map(|f| fmt_sig12(f.r_squared))
        .unwrap_or_default();
    for rec in records {
        writeln!(
            writer,
            "{},{},{},{},{}",
            rec.sweep_var.as_str(),
            rec.value,
            fmt_sig12(rec.mean_runtime),
            rec.repeats,
            fit_text
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::replicate;
    use crate::paths::{simulate_paths, NormalStream};
    use proptest::prelude::*;

    const EXAMPLE1: &str = "\
# cash accumulation for one asset over a year
mode=asset_replication
T=1
N=365
m=1
S0=150
sigma=0.5
r=0.12
start_cash=50
seed=7
";

    #[test]
    fn parses_example1() {
        let s = parse_scenario(EXAMPLE1).unwrap();
        assert_eq!(s.mode, Mode::AssetReplication);
        assert_eq!(s.grid.steps(), 365);
        assert_eq!(s.market.initial_price, vec![150.0]);
        assert_eq!(s.account.start_cash, vec![50.0]);
        assert_eq!(s.account.gamma, 1.0); // default
        assert_eq!(s.market.drift, vec![0.0]); // default
        assert_eq!(s.seed, 7);
        assert_eq!(s.quantity, vec![1]);
    }

    #[test]
    fn scalar_start_cash_splits_equally() {
        let text = "\
mode=asset_replication
T=1
N=365
m=2
S0=200,400
sigma=0.5
r=0.3
start_cash=40
";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.account.start_cash, vec![20.0, 20.0]);
    }

    #[test]
    fn option_key_rejected_in_asset_mode() {
        let text = format!("{EXAMPLE1}K=30\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(matches!(err, Error::UnknownKey { ref key, .. } if key == "K"));
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{EXAMPLE1}volatility=0.5\n");
        assert!(matches!(
            parse_scenario(&text),
            Err(Error::UnknownKey { .. })
        ));
    }

    #[test]
    fn missing_key_reported() {
        let text = "mode=asset_replication\nT=1\nN=365\nm=1\nS0=150\nsigma=0.5\nr=0.12\n";
        assert!(matches!(
            parse_scenario(text),
            Err(Error::MissingKey { ref key }) if key == "start_cash"
        ));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "mode=asset_replication\nthis is not a pair\n";
        match parse_scenario(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_key_rejected() {
        let text = format!("{EXAMPLE1}T=2\n");
        assert!(matches!(parse_scenario(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn trailing_comments_are_stripped() {
        let text = EXAMPLE1.replace("r=0.12", "r=0.12   # annual rate");
        assert_eq!(parse_scenario(&text).unwrap().account.rate, 0.12);
    }

    #[test]
    fn render_round_trips_example1() {
        let s = parse_scenario(EXAMPLE1).unwrap();
        let again = parse_scenario(&render_scenario(&s)).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn fmt_sig12_shapes() {
        assert_eq!(fmt_sig12(0.0), "0");
        assert_eq!(fmt_sig12(150.0), "150.000000000");
        assert_eq!(fmt_sig12(0.0027397260274), "0.00273972602740");
        assert_eq!(fmt_sig12(-42.5), "-42.5000000000");
        assert!(fmt_sig12(1.5e14).contains('e'));
        assert!(fmt_sig12(1e-7).contains('e'));
    }

    fn series_csv_for(text: &str) -> String {
        let s = parse_scenario(text).unwrap();
        let paths = simulate_paths(&s, &mut NormalStream::new(s.seed));
        let result = replicate(&paths, &s).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&paths, &result, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn single_asset_series_has_n_plus_one_rows() {
        let csv = series_csv_for(EXAMPLE1);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "time,asset_id,price,cash,u");
        assert_eq!(lines.len(), 1 + 366);
        // u column empty only on the last row
        let empties = lines[1..]
            .iter()
            .filter(|l| l.ends_with(','))
            .count();
        assert_eq!(empties, 1);
        assert!(lines[366].ends_with(','));
    }

    #[test]
    fn multi_asset_series_appends_totals() {
        let text = "\
mode=asset_replication
T=1
N=10
m=2
S0=200,400
sigma=0.5
r=0.3
start_cash=40
seed=3
";
        let csv = series_csv_for(text);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 3 * 11);
        let totals: Vec<&&str> = lines.iter().filter(|l| l.contains(",total,")).collect();
        assert_eq!(totals.len(), 11);
        // first total row carries the summed start cash
        let fields: Vec<&str> = totals[0].split(',').collect();
        assert_eq!(fields[2], fmt_sig12(600.0)); // 200 + 400
        assert_eq!(fields[3], fmt_sig12(40.0));
    }

    #[test]
    fn series_csv_is_byte_identical_across_runs() {
        assert_eq!(series_csv_for(EXAMPLE1), series_csv_for(EXAMPLE1));
    }

    proptest! {
        // parse(render(s)) = s for valid asset-mode scenarios.
        #[test]
        fn prop_round_trip_asset_mode(
            m in 1usize..4,
            t in 0.1..5.0f64,
            n in 2usize..500,
            s0 in 1.0..1000.0f64,
            drift in -0.5..0.5f64,
            sigma in 0.0..1.5f64,
            rate in 0.0..0.5f64,
            start in -500.0..500.0f64,
            gamma in 0.1..5.0f64,
            seed: u64,
            quantity in 1u64..5,
        ) {
            let scenario = validate_scenario(Scenario {
                mode: Mode::AssetReplication,
                grid: TimeGrid::new(t, n).unwrap(),
                market: MarketParams {
                    assets: m,
                    initial_price: vec![s0; m],
                    drift: vec![drift; m],
                    sigma: vec![sigma; m],
                },
                account: AccountParams {
                    rate,
                    start_cash: vec![start; m],
                    gamma,
                },
                option: None,
                seed,
                quantity: vec![quantity; m],
            }).unwrap();
            let again = parse_scenario(&render_scenario(&scenario)).unwrap();
            prop_assert_eq!(scenario, again);
        }

        #[test]
        fn prop_round_trip_excess_mode(
            t in 0.5..4.0f64,
            n in 2usize..500,
            s0 in 10.0..500.0f64,
            sigma in 0.05..1.0f64,
            rate in 0.0..0.3f64,
            strike in 1.0..200.0f64,
            c in 0.0..1.0f64,
            floor: bool,
            seed: u64,
        ) {
            let scenario = validate_scenario(Scenario {
                mode: Mode::ExcessReplication,
                grid: TimeGrid::new(t, n).unwrap(),
                market: MarketParams {
                    assets: 1,
                    initial_price: vec![s0],
                    drift: vec![0.0],
                    sigma: vec![sigma],
                },
                account: AccountParams {
                    rate,
                    start_cash: vec![0.0],
                    gamma: 1.0,
                },
                option: Some(OptionSpec {
                    strike,
                    proportion: c,
                    floor_at_zero: floor,
                }),
                seed,
                quantity: vec![1],
            }).unwrap();
            let again = parse_scenario(&render_scenario(&scenario)).unwrap();
            prop_assert_eq!(scenario, again);
        }
    }
}
