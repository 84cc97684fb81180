//! Command-line front end: parses scenario files, dispatches runs, and
//! writes deterministic CSV output for series, convergence studies and
//! runtime benchmarks.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use cashrep::io::{
    fmt_sig12, parse_scenario, write_bench_csv, write_convergence_csv, write_excess_csv,
    write_series_csv,
};
use cashrep::{
    aggregate_totals, bench_sweep, convergence_study, replicate, replicate_excess, simulate_paths,
    Mode, NormalStream, Result, Scenario, SweepVar,
};

/// Environment variable supplying a default seed. A `--seed` flag wins over
/// it; both win over the scenario file.
const SEED_ENV: &str = "CASHREP_SEED";

const PRESET_EXAMPLE1: &str = include_str!("../../../../scenarios/example1.cfg");
const PRESET_EXAMPLE2: &str = include_str!("../../../../scenarios/example2.cfg");
const PRESET_EXAMPLE3: &str = include_str!("../../../../scenarios/example3.cfg");

#[derive(Parser)]
#[command(
    name = "cashrep",
    version,
    about = "Cash accumulation schedules that replicate random terminal claims"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Example1,
    Example2,
    Example3,
}

#[derive(Parser)]
struct ScenarioArgs {
    /// Scenario file (key=value lines), then the output CSV path. With
    /// --preset the single positional is the output path.
    #[arg(value_name = "PATH", num_args = 1..=2)]
    paths: Vec<PathBuf>,

    /// Built-in scenario preset instead of a file.
    #[arg(long, value_enum)]
    preset: Option<Preset>,

    /// Seed override; wins over the CASHREP_SEED environment variable and
    /// the scenario file.
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    /// Splits the positionals into (scenario file, output path).
    fn resolve(&self) -> Result<(Option<&PathBuf>, &PathBuf)> {
        match (self.preset, self.paths.as_slice()) {
            (Some(_), [output]) => Ok((None, output)),
            (None, [scenario, output]) => Ok((Some(scenario), output)),
            _ => Err(cashrep::Error::MissingKey {
                key: "expected <scenario> <output>, or --preset <name> <output>".into(),
            }),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate price paths and write them as CSV.
    Simulate(ScenarioArgs),

    /// Replicate the terminal price(s); write time,asset_id,price,cash,u.
    Replicate(ScenarioArgs),

    /// Replicate a proportion of the equity excess; write time,excess,cash.
    Excess(ScenarioArgs),

    /// Terminal-gap statistics across grid resolutions.
    Converge {
        #[command(flatten)]
        args: ScenarioArgs,

        /// Strictly increasing grid sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "50,500,5000")]
        n_values: Vec<usize>,

        /// Ensemble size per grid resolution.
        #[arg(long, default_value_t = 200)]
        seeds: usize,
    },

    /// Wall-clock scaling sweep over N or m.
    Bench {
        #[command(flatten)]
        args: ScenarioArgs,

        /// Which variable to sweep.
        #[arg(long, value_enum, default_value_t = SweepArg::N)]
        sweep: SweepArg,

        /// Strictly increasing sweep values, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        values: Vec<usize>,

        /// Timed repeats per value (an untimed warm-up precedes them).
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    N,
    M,
}

fn load_scenario(args: &ScenarioArgs) -> Result<(Scenario, PathBuf)> {
    let (scenario_path, output) = args.resolve()?;
    let text = match (scenario_path, args.preset) {
        (Some(path), _) => fs::read_to_string(path)?,
        (None, Some(Preset::Example1)) => PRESET_EXAMPLE1.to_string(),
        (None, Some(Preset::Example2)) => PRESET_EXAMPLE2.to_string(),
        (None, Some(Preset::Example3)) => PRESET_EXAMPLE3.to_string(),
        (None, None) => unreachable!("resolve() guarantees a source"),
    };
    let mut scenario = parse_scenario(&text)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    } else if let Ok(value) = std::env::var(SEED_ENV) {
        scenario.seed = value.parse::<u64>().map_err(|_| cashrep::Error::Parse {
            line: 0,
            message: format!("{SEED_ENV} must be a 64-bit unsigned integer, got `{value}`"),
        })?;
    }
    Ok((scenario, output.clone()))
}

/// Plain path dump: time,asset_id,price (plus a total block for m > 1).
fn write_paths_csv(paths: &cashrep::PathSet, buf: &mut Vec<u8>) -> Result<()> {
    writeln!(buf, "time,asset_id,price")?;
    let n = paths.grid.steps();
    for i in 0..paths.assets() {
        for k in 0..=n {
            writeln!(
                buf,
                "{},{},{}",
                fmt_sig12(paths.grid.time(k)),
                i,
                fmt_sig12(paths.prices[i][k])
            )?;
        }
    }
    if paths.assets() > 1 {
        for k in 0..=n {
            let total: f64 = paths.prices.iter().map(|row| row[k]).sum();
            writeln!(
                buf,
                "{},total,{}",
                fmt_sig12(paths.grid.time(k)),
                fmt_sig12(total)
            )?;
        }
    }
    Ok(())
}

fn run(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(args) => {
            let (scenario, output) = load_scenario(args)?;
            let started = Instant::now();
            let paths = simulate_paths(&scenario, &mut NormalStream::new(scenario.seed));
            let elapsed = started.elapsed().as_secs_f64();

            let mut buf = Vec::new();
            write_paths_csv(&paths, &mut buf)?;
            fs::write(&output, buf)?;
            for (i, s) in paths.terminal_prices().iter().enumerate() {
                println!("asset {i}: terminal price {}", fmt_sig12(*s));
            }
            println!("elapsed {elapsed:.6} s, wrote {}", output.display());
        }
        Command::Replicate(args) => {
            let (scenario, output) = load_scenario(args)?;
            let started = Instant::now();
            let paths = simulate_paths(&scenario, &mut NormalStream::new(scenario.seed));
            let result = replicate(&paths, &scenario)?;
            let elapsed = started.elapsed().as_secs_f64();

            let mut buf = Vec::new();
            write_series_csv(&paths, &result, &mut buf)?;
            fs::write(&output, buf)?;

            for i in 0..paths.assets() {
                println!(
                    "asset {i}: target {} terminal gap {}",
                    fmt_sig12(result.target[i]),
                    fmt_sig12(result.terminal_gap[i])
                );
            }
            if paths.assets() > 1 {
                let totals = aggregate_totals(&result);
                println!(
                    "total: target {} terminal gap {}",
                    fmt_sig12(totals.target),
                    fmt_sig12(totals.terminal_gap)
                );
            }
            println!("elapsed {elapsed:.6} s, wrote {}", output.display());
        }
        Command::Excess(args) => {
            let (scenario, output) = load_scenario(args)?;
            if scenario.mode != Mode::ExcessReplication {
                return Err(cashrep::Error::InvalidOption(
                    "the excess subcommand needs mode=excess_replication".into(),
                ));
            }
            let started = Instant::now();
            let paths = simulate_paths(&scenario, &mut NormalStream::new(scenario.seed));
            let result = replicate_excess(&paths, &scenario)?;
            let elapsed = started.elapsed().as_secs_f64();

            let proportion = scenario
                .option
                .as_ref()
                .map(|o| o.proportion)
                .unwrap_or(1.0);
            let mut buf = Vec::new();
            write_excess_csv(&scenario.grid, &result, proportion, &mut buf)?;
            fs::write(&output, buf)?;
            println!(
                "target {} terminal gap {}",
                fmt_sig12(result.target()),
                fmt_sig12(result.terminal_gap())
            );
            println!("elapsed {elapsed:.6} s, wrote {}", output.display());
        }
        Command::Converge {
            args,
            n_values,
            seeds,
        } => {
            let (scenario, output) = load_scenario(args)?;
            let started = Instant::now();
            let records = convergence_study(&scenario, n_values, *seeds)?;
            let elapsed = started.elapsed().as_secs_f64();

            let mut buf = Vec::new();
            write_convergence_csv(&records, &mut buf)?;
            fs::write(&output, buf)?;
            for rec in &records {
                println!(
                    "N {}: mean |gap| {} median |gap| {} mean rel gap {}",
                    rec.steps,
                    fmt_sig12(rec.mean_abs_gap),
                    fmt_sig12(rec.median_abs_gap),
                    fmt_sig12(rec.mean_rel_gap)
                );
            }
            println!("elapsed {elapsed:.6} s, wrote {}", output.display());
        }
        Command::Bench {
            args,
            sweep,
            values,
            repeats,
        } => {
            let (scenario, output) = load_scenario(args)?;
            let sweep_var = match sweep {
                SweepArg::N => SweepVar::Steps,
                SweepArg::M => SweepVar::Assets,
            };
            let (records, fit) = bench_sweep(&scenario, sweep_var, values, *repeats)?;

            let mut buf = Vec::new();
            write_bench_csv(&records, fit, &mut buf)?;
            fs::write(&output, buf)?;
            for rec in &records {
                println!(
                    "{} {}: mean runtime {:.6} s over {} repeats",
                    rec.sweep_var.as_str(),
                    rec.value,
                    rec.mean_runtime,
                    rec.repeats
                );
            }
            match fit {
                Some(f) => println!(
                    "linear fit: slope {:.3e} intercept {:.3e} R^2 {:.6}",
                    f.slope, f.intercept, f.r_squared
                ),
                None => println!("linear fit: undefined (single point)"),
            }
            println!("wrote {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
