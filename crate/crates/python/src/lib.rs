//! Python bindings: load or build scenarios, run them, and get summary
//! statistics back as plain dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use lbsim::config::{Mode, ScenarioConfig};
use lbsim::metrics::{reliability_metric, summarize};
use lbsim::sim;

fn value_err(msg: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(msg.to_string())
}

fn summary_dict<'py>(
    py: Python<'py>,
    out: &sim::RunOutput,
    cfg: &ScenarioConfig,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let stats = summarize(&out.ledger, cfg.dl_only);
    let rel = reliability_metric(&out.ledger, cfg.deadline_us, cfg.target_reliability, cfg.dl_only);
    let d = PyDict::new(py);
    d.set_item("seed", seed)?;
    d.set_item("packets", out.pdus.len())?;
    d.set_item("pairs", stats.pairs)?;
    d.set_item("delivered", stats.delivered)?;
    d.set_item("lost", stats.lost)?;
    d.set_item("ptm_tx", out.ptm_tx_count)?;
    d.set_item("repair_tx", out.repair_tx_count)?;
    d.set_item("mean_us", stats.mean_us)?;
    d.set_item("p50_us", stats.p50_us)?;
    d.set_item("p95_us", stats.p95_us)?;
    d.set_item("p99_us", stats.p99_us)?;
    d.set_item("min_us", stats.min_us)?;
    d.set_item("max_us", stats.max_us)?;
    d.set_item("reliability", rel.achieved)?;
    d.set_item("reliability_met", rel.met)?;
    let decisions = PyDict::new(py);
    decisions.set_item("local_breakout", out.decisions.local_breakout)?;
    decisions.set_item("no_ft_entry", out.decisions.no_ft_entry)?;
    decisions.set_item("not_allowed", out.decisions.not_allowed)?;
    decisions.set_item("receivers_not_attached", out.decisions.receivers_not_attached)?;
    decisions.set_item("prb_exhausted", out.decisions.prb_exhausted)?;
    decisions.set_item("forced_core", out.decisions.forced_core)?;
    d.set_item("decisions", decisions)?;
    Ok(d)
}

/// One scenario configuration; construct from a TOML file or string, then
/// run, compare, or sweep it.
#[pyclass(name = "Scenario")]
struct PyScenario {
    cfg: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    /// Baseline configuration.
    #[staticmethod]
    fn default() -> Self {
        PyScenario { cfg: ScenarioConfig::default() }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let cfg = ScenarioConfig::from_toml_str(text, "<string>").map_err(value_err)?;
        Ok(PyScenario { cfg })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let cfg = ScenarioConfig::load(std::path::Path::new(path)).map_err(value_err)?;
        Ok(PyScenario { cfg })
    }

    fn to_toml(&self) -> String {
        self.cfg.to_toml_string()
    }

    /// Invariant violations in this configuration; empty means clean.
    fn validate(&self) -> Vec<String> {
        self.cfg.validate()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.cfg.seed
    }

    #[getter]
    fn mode(&self) -> String {
        self.cfg.mode.to_string()
    }

    /// Run the scenario on its configured path and return summary statistics.
    #[pyo3(signature = (seed=None))]
    fn run<'py>(&self, py: Python<'py>, seed: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
        self.cfg.check().map_err(value_err)?;
        if self.cfg.mode == Mode::Paired {
            return Err(value_err("paired scenarios run through compare()"));
        }
        let seed = seed.unwrap_or(self.cfg.seed);
        let out = sim::run_configured(&self.cfg, seed);
        summary_dict(py, &out, &self.cfg, seed)
    }

    /// Run both paths with identical draws; returns gap statistics and the
    /// per-pair gap list in microseconds.
    #[pyo3(signature = (seed=None))]
    fn compare<'py>(&self, py: Python<'py>, seed: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
        self.cfg.check().map_err(value_err)?;
        if self.cfg.mode != Mode::Paired {
            return Err(value_err("compare() needs mode = \"paired\""));
        }
        let seed = seed.unwrap_or(self.cfg.seed);
        let cmp = sim::compare(&self.cfg, seed);
        let d = PyDict::new(py);
        d.set_item("seed", seed)?;
        d.set_item("pairs", cmp.rows.len())?;
        d.set_item("mean_gap_us", cmp.mean_gap_us())?;
        let gaps: Vec<i64> = cmp.rows.iter().map(|r| r.gap_us()).collect();
        d.set_item("gaps_us", gaps)?;
        d.set_item("ca", summary_dict(py, &cmp.ca, &self.cfg, seed)?)?;
        d.set_item("lb", summary_dict(py, &cmp.lb, &self.cfg, seed)?)?;
        Ok(d)
    }

    /// Receiver-count sweep over both paths; one dict per size.
    #[pyo3(signature = (sizes, seeds=1, seed=None))]
    fn sweep<'py>(
        &self,
        py: Python<'py>,
        sizes: Vec<u32>,
        seeds: u32,
        seed: Option<u64>,
    ) -> PyResult<Bound<'py, PyList>> {
        if sizes.is_empty() || sizes.iter().any(|&s| s < 1 || s > 150) {
            return Err(value_err("sizes must be a non-empty list within [1, 150]"));
        }
        if seeds == 0 {
            return Err(value_err("seeds must be at least 1"));
        }
        for &size in &sizes {
            sim::sweep_config(&self.cfg, size).check().map_err(value_err)?;
        }
        let base = seed.unwrap_or(self.cfg.seed);
        let seed_list: Vec<u64> = (0..seeds as u64).map(|k| base + k).collect();
        let points = sim::sweep(&self.cfg, &sizes, &seed_list);
        let rows = PyList::empty(py);
        for p in points {
            let d = PyDict::new(py);
            d.set_item("n_receivers", p.n_receivers)?;
            d.set_item("gap_us", p.gap_us())?;
            for (tag, stats) in [("ca", p.ca), ("lb", p.lb)] {
                let pd = PyDict::new(py);
                pd.set_item("mean_us", stats.mean_us)?;
                pd.set_item("p50_us", stats.p50_us)?;
                pd.set_item("p95_us", stats.p95_us)?;
                pd.set_item("p99_us", stats.p99_us)?;
                pd.set_item("reliability", stats.reliability)?;
                d.set_item(tag, pd)?;
            }
            rows.append(d)?;
        }
        Ok(rows)
    }
}

#[pymodule]
fn lbsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    Ok(())
}
