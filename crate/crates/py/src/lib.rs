//! Python bindings: scenario parsing, path simulation, the replication
//! kernels and the convergence study, exposed as plain lists and floats.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cashrep::{
    aggregate_totals, convergence_study, norm_cdf as core_norm_cdf, replicate as core_replicate,
    replicate_excess as core_replicate_excess, simulate_paths, AccountParams, Mode, NormalStream,
    OptionSpec, TimeGrid,
};

fn to_py_err(err: cashrep::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

/// Validated experiment description, parsed from key=value text.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Scenario {
    inner: cashrep::Scenario,
}

#[pymethods]
impl Scenario {
    /// Parses the same flat key=value format the CLI reads.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: cashrep::io::parse_scenario(text).map_err(to_py_err)?,
        })
    }

    /// Copy of this scenario with a different seed.
    fn with_seed(&self, seed: u64) -> Self {
        let mut inner = self.inner.clone();
        inner.seed = seed;
        Self { inner }
    }

    fn render(&self) -> String {
        cashrep::io::render_scenario(&self.inner)
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode.as_str()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.grid.steps()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.grid.horizon()
    }

    #[getter]
    fn assets(&self) -> usize {
        self.inner.assets()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(mode={}, m={}, N={}, T={}, seed={})",
            self.inner.mode.as_str(),
            self.inner.assets(),
            self.inner.grid.steps(),
            self.inner.grid.horizon(),
            self.inner.seed
        )
    }
}

/// Series from one asset-replication run.
#[pyclass(frozen)]
struct Replication {
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    prices: Vec<Vec<f64>>,
    #[pyo3(get)]
    cash: Vec<Vec<f64>>,
    #[pyo3(get)]
    deposit_rate: Vec<Vec<f64>>,
    #[pyo3(get)]
    target: Vec<f64>,
    #[pyo3(get)]
    terminal_gap: Vec<f64>,
    #[pyo3(get)]
    total_cash: Vec<f64>,
    #[pyo3(get)]
    total_target: f64,
    #[pyo3(get)]
    total_terminal_gap: f64,
}

/// Series from one excess-replication run.
#[pyclass(frozen)]
struct Excess {
    #[pyo3(get)]
    times: Vec<f64>,
    /// c * f(t_k) for k < N, with the carried target at k = N.
    #[pyo3(get)]
    excess: Vec<f64>,
    #[pyo3(get)]
    cash: Vec<f64>,
    #[pyo3(get)]
    target: f64,
    #[pyo3(get)]
    terminal_gap: f64,
}

fn grid_times(grid: &TimeGrid) -> Vec<f64> {
    (0..=grid.steps()).map(|k| grid.time(k)).collect()
}

/// Simulates price paths; returns (times, per-asset price series).
#[pyfunction]
fn simulate(scenario: &Scenario) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut stream = NormalStream::new(scenario.inner.seed);
    let paths = simulate_paths(&scenario.inner, &mut stream);
    (grid_times(&paths.grid), paths.prices)
}

/// Runs asset replication end to end.
#[pyfunction]
fn replicate(scenario: &Scenario) -> PyResult<Replication> {
    if scenario.inner.mode != Mode::AssetReplication {
        return Err(PyValueError::new_err(
            "replicate() needs mode=asset_replication",
        ));
    }
    let mut stream = NormalStream::new(scenario.inner.seed);
    let paths = simulate_paths(&scenario.inner, &mut stream);
    let result = core_replicate(&paths, &scenario.inner).map_err(to_py_err)?;
    let totals = aggregate_totals(&result);
    Ok(Replication {
        times: grid_times(&paths.grid),
        prices: paths.prices,
        cash: result.cash,
        deposit_rate: result.deposit_rate,
        target: result.target,
        terminal_gap: result.terminal_gap,
        total_cash: totals.cash,
        total_target: totals.target,
        total_terminal_gap: totals.terminal_gap,
    })
}

/// Runs excess replication end to end.
#[pyfunction]
fn replicate_excess(scenario: &Scenario) -> PyResult<Excess> {
    if scenario.inner.mode != Mode::ExcessReplication {
        return Err(PyValueError::new_err(
            "replicate_excess() needs mode=excess_replication",
        ));
    }
    let mut stream = NormalStream::new(scenario.inner.seed);
    let paths = simulate_paths(&scenario.inner, &mut stream);
    let result = core_replicate_excess(&paths, &scenario.inner).map_err(to_py_err)?;
    let c = scenario
        .inner
        .option
        .as_ref()
        .map(|o| o.proportion)
        .unwrap_or(1.0);
    let target = result.target();
    let terminal_gap = result.terminal_gap();
    let mut excess: Vec<f64> = result.claim.iter().map(|f| c * f).collect();
    excess.push(target);
    Ok(Excess {
        times: grid_times(&paths.grid),
        excess,
        cash: result.inner.cash.into_iter().next().unwrap(),
        target,
        terminal_gap,
    })
}

/// Terminal-gap statistics across grid resolutions; returns rows of
/// (N, seeds, mean_abs_gap, median_abs_gap, mean_rel_gap).
#[pyfunction]
fn converge(
    scenario: &Scenario,
    n_values: Vec<usize>,
    seeds: usize,
) -> PyResult<Vec<(usize, usize, f64, f64, f64)>> {
    let records = convergence_study(&scenario.inner, &n_values, seeds).map_err(to_py_err)?;
    Ok(records
        .into_iter()
        .map(|r| {
            (
                r.steps,
                r.seeds,
                r.mean_abs_gap,
                r.median_abs_gap,
                r.mean_rel_gap,
            )
        })
        .collect())
}

/// Cumulative standard normal distribution.
#[pyfunction]
fn norm_cdf(z: f64) -> f64 {
    core_norm_cdf(z)
}

/// Black-Scholes call quote; returns (d1, d2, delta, price).
#[pyfunction]
fn bs_quote(
    spot: f64,
    t: f64,
    strike: f64,
    rate: f64,
    sigma: f64,
    horizon: f64,
) -> PyResult<(f64, f64, f64, f64)> {
    let grid = TimeGrid::new(horizon, 2).map_err(to_py_err)?;
    let spec = OptionSpec::new(strike, 1.0);
    let account = AccountParams {
        rate,
        start_cash: vec![0.0],
        gamma: 1.0,
    };
    let q = cashrep::bs_quote(spot, t, &spec, &account, &grid, sigma).map_err(to_py_err)?;
    Ok((q.d1, q.d2, q.delta, q.price))
}

/// R(s) for constant gamma: the integral of e^{2r(T-t)} / gamma from s to T.
#[pyfunction]
fn capital_r(s: f64, rate: f64, gamma: f64, horizon: f64) -> PyResult<f64> {
    let grid = TimeGrid::new(horizon, 2).map_err(to_py_err)?;
    let account = AccountParams {
        rate,
        start_cash: vec![0.0],
        gamma,
    };
    cashrep::capital_r(s, &account, &grid).map_err(to_py_err)
}

#[pymodule]
fn cashrep_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<Replication>()?;
    m.add_class::<Excess>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(replicate, m)?)?;
    m.add_function(wrap_pyfunction!(replicate_excess, m)?)?;
    m.add_function(wrap_pyfunction!(converge, m)?)?;
    m.add_function(wrap_pyfunction!(norm_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(bs_quote, m)?)?;
    m.add_function(wrap_pyfunction!(capital_r, m)?)?;
    Ok(())
}
