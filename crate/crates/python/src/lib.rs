//! Python bindings. Bundles cross the boundary as sorted lists of good indices.

use ordinal_mms as core;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::InvalidInstance(_)
        | core::Error::InvalidParameter(_)
        | core::Error::TooLarge { .. }
        | core::Error::GoodOutOfRange { .. }
        | core::Error::AgentOutOfRange { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn lists(bundles: &[core::Bundle]) -> Vec<Vec<usize>> {
    bundles.iter().map(|b| b.goods().to_vec()).collect()
}

/// Additive valuations: `values[i][g]` is agent `i`'s value for good `g`.
#[pyclass(frozen, module = "ordmms")]
struct Instance {
    inner: core::Instance,
}

#[pymethods]
impl Instance {
    #[new]
    fn new(values: Vec<Vec<u64>>) -> PyResult<Self> {
        core::Instance::new(values).map(|inner| Instance { inner }).map_err(err)
    }

    #[staticmethod]
    fn identical(n: usize, row: Vec<u64>) -> PyResult<Self> {
        core::Instance::identical(n, row).map(|inner| Instance { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        core::Instance::from_json(text).map(|inner| Instance { inner }).map_err(err)
    }

    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        core::fixtures::fixture(name)
            .map(|f| Instance { inner: f.instance })
            .ok_or_else(|| PyValueError::new_err(format!("unknown fixture {name:?}")))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<u64>> {
        self.inner.values().to_vec()
    }

    fn total(&self, agent: usize) -> PyResult<u64> {
        self.check(agent)?;
        Ok(self.inner.total(agent))
    }

    fn bundle_value(&self, agent: usize, bundle: Vec<usize>) -> PyResult<u64> {
        self.check(agent)?;
        if let Some(g) = bundle.iter().find(|&&g| g >= self.inner.m()) {
            return Err(PyValueError::new_err(format!("good {g} out of range")));
        }
        Ok(core::bundle_value(&self.inner, agent, &bundle.into_iter().collect()))
    }

    fn __repr__(&self) -> String {
        format!("Instance(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

impl Instance {
    fn check(&self, agent: usize) -> PyResult<()> {
        if agent < self.inner.n() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("agent {agent} out of range")))
        }
    }
}

#[pyclass(frozen, get_all, module = "ordmms")]
struct Allocation {
    bundles: Vec<Vec<usize>>,
    unallocated: Vec<usize>,
    values: Vec<u64>,
    /// Per-agent guaranteed value, when the method provides one.
    guarantees: Option<Vec<u64>>,
}

#[pymethods]
impl Allocation {
    fn __repr__(&self) -> String {
        format!("Allocation(bundles={:?}, values={:?})", self.bundles, self.values)
    }
}

impl Allocation {
    fn of(inst: &core::Instance, a: &core::Allocation, guarantees: Option<Vec<u64>>) -> Self {
        Allocation {
            bundles: lists(&a.bundles),
            unallocated: a.unallocated.goods().to_vec(),
            values: a.values(inst),
            guarantees,
        }
    }
}

/// ℓ-out-of-d maximin share of one agent, returned as `(value, partition)`.
#[pyfunction]
#[pyo3(signature = (instance, agent, ell, d, max_goods = core::mms::DEFAULT_MAX_GOODS))]
fn mms_exact(instance: &Instance, agent: usize, ell: usize, d: usize, max_goods: usize) -> PyResult<(u64, Vec<Vec<usize>>)> {
    instance.check(agent)?;
    let w = core::MmsSolver::with_max_goods(max_goods)
        .solve(instance.inner.row(agent), ell, d)
        .map_err(err)?;
    Ok((w.value, lists(&w.partition)))
}

/// An allocation giving each agent its ℓ-out-of-⌊(ℓ+½)n⌋ maximin share
/// (`method="greedy"` scales by greedy partitions instead of exact ones).
#[pyfunction]
#[pyo3(signature = (instance, ell = 1, method = "exact", max_goods = core::mms::DEFAULT_MAX_GOODS))]
fn solve_ordinal(instance: &Instance, ell: usize, method: &str, max_goods: usize) -> PyResult<Allocation> {
    let method = match method {
        "exact" => core::WitnessMethod::Exact,
        "greedy" => core::WitnessMethod::Greedy,
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    let sol = core::solve_ordinal_with(&instance.inner, ell, method, &core::MmsSolver::with_max_goods(max_goods))
        .map_err(err)?;
    Ok(Allocation::of(&instance.inner, &sol.allocation, Some(sol.guarantees)))
}

/// Bidirectional bag-filling share of one valuation row for `n` bags, returned as
/// `(share, bags)` with bags as indices into `values`.
#[pyfunction]
fn bbfs(values: Vec<u64>, n: usize) -> PyResult<(u64, Vec<Vec<usize>>)> {
    let share = core::bbfs(&values, n).map_err(err)?;
    Ok((share.value, lists(&share.partition(n))))
}

/// Bag-filling with every agent's threshold at its bidirectional share.
#[pyfunction]
fn bbfs_allocation(instance: &Instance) -> PyResult<Allocation> {
    let out = core::bbfs_allocation(&instance.inner).map_err(err)?;
    Ok(Allocation::of(&instance.inner, &out.allocation, Some(out.shares)))
}

/// Largest envy-free matching of a bipartite agent–part graph, as `(agent, part)` pairs.
#[pyfunction]
fn envy_free_matching(agents: usize, parts: usize, edges: Vec<(usize, usize)>) -> PyResult<Vec<(usize, usize)>> {
    if let Some(e) = edges.iter().find(|&&(a, p)| a >= agents || p >= parts) {
        return Err(PyValueError::new_err(format!("edge {e:?} out of range")));
    }
    Ok(core::envy_free_matching(&core::AcceptabilityGraph::from_edges(agents, parts, edges)))
}

#[pyfunction]
#[pyo3(signature = (d = 2))]
fn verify_counterexample(py: Python<'_>, d: usize) -> PyResult<bool> {
    py.detach(|| core::responsive::verify_counterexample(d)).map_err(err)
}

#[pyfunction]
fn fixtures() -> Vec<&'static str> {
    core::fixtures::FIXTURE_NAMES.to_vec()
}

#[pymodule]
fn ordmms(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Allocation>()?;
    m.add_function(wrap_pyfunction!(mms_exact, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ordinal, m)?)?;
    m.add_function(wrap_pyfunction!(bbfs, m)?)?;
    m.add_function(wrap_pyfunction!(bbfs_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(envy_free_matching, m)?)?;
    m.add_function(wrap_pyfunction!(verify_counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(fixtures, m)?)?;
    Ok(())
}
