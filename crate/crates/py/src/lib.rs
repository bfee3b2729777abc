//! Python bindings: greedy instances and their menus, the bandit reduction,
//! smooth choice models, the hard-instance generators and the experiment
//! harness. Structured results cross the boundary as JSON strings.

use incent::bandits::{cover_embeddings, embed_menu, ArmEmbedding};
use incent::general::{build_general_menu, DEFAULT_PROFILE_CAP, DEFAULT_VERTEX_ARM_CAP};
use incent::harness::verify::verify_golden;
use incent::harness::{bench, run_seeds, InstanceSource, MenuSpec, PolicySpec, Scenario};
use incent::single_arm::build_single_arm_menu;
use incent::smooth::gaussian_choice_probabilities;
use incent::{Error, IncentiveMode, IncentiveVector, InstanceDocument, Menu};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Document(_) | Error::CapExceeded { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn incentive(pi: Vec<f64>) -> PyResult<IncentiveVector> {
    let nonzero = pi.iter().filter(|x| **x != 0.0).count();
    let mode = if nonzero <= 1 {
        IncentiveMode::Single
    } else {
        IncentiveMode::General
    };
    IncentiveVector::new(pi, mode).map_err(to_py)
}

fn rows(menu: &Menu) -> Vec<Vec<f64>> {
    menu.incentives().map(|p| p.values().to_vec()).collect()
}

/// Greedy agents: `v`, `mu[j]` and 1-based `tie_priority[j]` (higher rank
/// wins ties; lowest index first when omitted).
#[pyclass(name = "GreedyInstance", module = "incent_py", from_py_object)]
#[derive(Clone)]
pub struct PyGreedyInstance {
    inner: incent::GreedyInstance,
}

#[pymethods]
impl PyGreedyInstance {
    #[new]
    #[pyo3(signature = (v, mu, tie_priority=None))]
    fn new(v: Vec<f64>, mu: Vec<Vec<f64>>, tie_priority: Option<Vec<Vec<usize>>>) -> PyResult<Self> {
        let inner = match tie_priority {
            Some(t) => incent::GreedyInstance::new(v, mu, t),
            None => incent::GreedyInstance::with_lowest_index_ties(v, mu),
        }
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn num_arms(&self) -> usize {
        self.inner.num_arms()
    }

    #[getter]
    fn num_agents(&self) -> usize {
        self.inner.num_agents()
    }

    fn best_response(&self, agent: usize, pi: Vec<f64>) -> PyResult<usize> {
        let pi = incentive(pi)?;
        Ok(self.inner.greedy_best_response(agent, &pi).map_err(to_py)?.index())
    }

    fn agent_utility(&self, agent: usize, pi: Vec<f64>) -> PyResult<f64> {
        self.inner.agent_utility(agent, &incentive(pi)?).map_err(to_py)
    }

    fn expected_utility(&self, pi: Vec<f64>, distribution: Vec<f64>) -> PyResult<f64> {
        self.inner
            .expected_greedy_utility(&incentive(pi)?, &distribution)
            .map_err(to_py)
    }

    /// Single-arm menu for horizon `T`, one incentive vector per item.
    fn single_arm_menu(&self, horizon: u64) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&build_single_arm_menu(&self.inner, horizon).map_err(to_py)?))
    }

    fn general_menu(&self, horizon: u64) -> PyResult<Vec<Vec<f64>>> {
        let m = build_general_menu(&self.inner, horizon, DEFAULT_PROFILE_CAP, DEFAULT_VERTEX_ARM_CAP).map_err(to_py)?;
        Ok(rows(&m))
    }

    /// Rows `z^pi` of the linear-bandit reduction for a list of incentives.
    fn embed(&self, menu: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let mut m = Menu::new();
        for pi in menu {
            m.push_dedup(incent::MenuItem {
                incentive: incentive(pi)?,
                provenance: incent::Provenance::Manual,
            });
        }
        Ok(embed_menu(&self.inner, &m).map_err(to_py)?.rows().to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "GreedyInstance(num_arms={}, num_agents={})",
            self.inner.num_arms(),
            self.inner.num_agents()
        )
    }
}

/// `(instance, arrival probabilities)` for the `example32` instance.
#[pyfunction]
fn example_3_2(delta: f64) -> PyResult<(PyGreedyInstance, Vec<f64>)> {
    let (inner, arr) = incent::instances::example_3_2(delta).map_err(to_py)?;
    let probs = match arr {
        incent::instances::ArrivalSpec::Iid { probabilities } => probabilities,
        _ => unreachable!("example32 arrivals are i.i.d."),
    };
    Ok((PyGreedyInstance { inner }, probs))
}

/// Instance document (JSON) for a built-in generator: `example32`,
/// `hard_b1`, `hard_b2`, `smooth_hard`, `random` or `gaussian`.
#[pyfunction]
#[pyo3(signature = (kind, horizon=1024))]
fn generate(kind: &str, horizon: u64) -> PyResult<String> {
    let src = InstanceSource::parse(kind);
    if matches!(src, InstanceSource::File { .. }) {
        return Err(PyValueError::new_err(format!("unknown instance kind '{kind}'")));
    }
    src.document(horizon).and_then(|d| d.to_json()).map_err(to_py)
}

/// Greedy instance from an instance document (JSON).
#[pyfunction]
fn load_greedy(document: &str) -> PyResult<PyGreedyInstance> {
    let doc = InstanceDocument::from_json(document).map_err(to_py)?;
    Ok(PyGreedyInstance {
        inner: doc.greedy().map_err(to_py)?,
    })
}

#[pyfunction]
fn gaussian_probabilities(preference: Vec<f64>, pi: Vec<f64>) -> PyResult<Vec<f64>> {
    gaussian_choice_probabilities(&preference, &pi).map_err(to_py)
}

/// Greedy sup-norm cover of embedding rows; returns the kept rows.
#[pyfunction]
fn cover(rows: Vec<Vec<f64>>, tol: f64) -> PyResult<Vec<Vec<f64>>> {
    let emb = ArmEmbedding::from_rows(rows).map_err(to_py)?;
    Ok(cover_embeddings(&emb, tol).map_err(to_py)?.rows().to_vec())
}

fn menu_spec(menu: &str, eps: Option<f64>, cap: Option<u128>) -> PyResult<MenuSpec> {
    let kind = serde_json::from_value(serde_json::Value::String(menu.into()))
        .map_err(|_| PyValueError::new_err(format!("unknown menu kind '{menu}'")))?;
    Ok(MenuSpec { kind, eps, cap })
}

/// Runs `policy` for every seed; returns the records as a JSON array.
/// `instance` is a built-in name or a path to an instance document.
#[pyfunction]
#[pyo3(signature = (instance, policy, horizon, seeds, menu="auto", eps=None, cap=None, keep_rounds=false))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    instance: &str,
    policy: &str,
    horizon: u64,
    seeds: Vec<u64>,
    menu: &str,
    eps: Option<f64>,
    cap: Option<u128>,
    keep_rounds: bool,
) -> PyResult<String> {
    let spec = menu_spec(menu, eps, cap)?;
    let policy = PolicySpec::parse_name(policy).map_err(to_py)?;
    let src = InstanceSource::parse(instance);
    py.detach(|| {
        let sc = Scenario::from_source(&src, &spec, horizon)?;
        let recs = run_seeds(&sc, &policy, &seeds, keep_rounds)?;
        Ok(serde_json::to_string(&recs)?)
    })
    .map_err(to_py)
}

/// Multi-horizon study; returns the summary (rows and slope) as JSON.
#[pyfunction]
#[pyo3(signature = (instance, policy, horizons, seeds, menu="auto", eps=None))]
fn bench_slope(
    py: Python<'_>,
    instance: &str,
    policy: &str,
    horizons: Vec<u64>,
    seeds: Vec<u64>,
    menu: &str,
    eps: Option<f64>,
) -> PyResult<String> {
    let spec = menu_spec(menu, eps, None)?;
    let policy = PolicySpec::parse_name(policy).map_err(to_py)?;
    let src = InstanceSource::parse(instance);
    py.detach(|| {
        let s = bench(&src, &spec, &policy, &horizons, &seeds)?;
        Ok(serde_json::to_string(&s)?)
    })
    .map_err(to_py)
}

/// `(suite, instance, passed, detail)` for every golden-instance check.
#[pyfunction]
fn verify() -> PyResult<Vec<(String, String, bool, String)>> {
    let out = verify_golden(incent::harness::verify::VERIFY_HORIZON).map_err(to_py)?;
    Ok(out
        .into_iter()
        .map(|c| (c.suite.to_string(), c.instance, c.passed, c.detail))
        .collect())
}

#[pymodule]
fn incent_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGreedyInstance>()?;
    m.add_function(wrap_pyfunction!(example_3_2, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(load_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(cover, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(bench_slope, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
