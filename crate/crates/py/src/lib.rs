//! Python bindings. Certificates and reports cross the boundary as plain
//! dicts built from their JSON form.

use kikuchi_core::experiment::{run_refute, ExperimentConfig};
use kikuchi_core::hypergraph::{decompose as core_decompose, MatchingFamily};
use kikuchi_core::ldc::{self, NormalLdc, VerifyMode, WldcParams};
use kikuchi_core::random::{random_matching_family, SeedStream};
use kikuchi_core::refuter::{self, BMode, Pipeline, RefuteParams};
use kikuchi_core::spectral::{refute_2xor as core_refute_2xor, SpectralMode};
use kikuchi_core::verify::{run_suites, Suite};
use kikuchi_core::xor::{PartitionMode, XorInstance};
use kikuchi_core::Error;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(kikuchi, InfeasibleError, PyValueError, "Parameters admit no valid Kikuchi matrix.");
create_exception!(kikuchi, CapacityError, PyValueError, "A size cap was exceeded.");

fn err(e: Error) -> PyErr {
    match e {
        Error::Infeasible(_) => InfeasibleError::new_err(e.to_string()),
        Error::Capacity { .. } => CapacityError::new_err(e.to_string()),
        Error::ContractViolation(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn partition_mode(name: &str, seed: u64) -> PyResult<PartitionMode> {
    match name {
        "exhaustive" => Ok(PartitionMode::Exhaustive),
        "balanced" => Ok(PartitionMode::Balanced),
        _ => name
            .strip_prefix("sample:")
            .and_then(|c| c.parse().ok())
            .map(|count| PartitionMode::Sampled { count, seed })
            .ok_or_else(|| PyValueError::new_err(format!("unknown partition mode `{name}`"))),
    }
}

fn spectral_mode(name: &str) -> PyResult<SpectralMode> {
    match name {
        "dense" => Ok(SpectralMode::DenseExact),
        "product" => Ok(SpectralMode::Product),
        _ => Err(PyValueError::new_err(format!("unknown spectral mode `{name}`"))),
    }
}

fn params(ell: usize, partitions: &str, spectral: &str, seed: u64) -> PyResult<RefuteParams> {
    Ok(RefuteParams {
        ell,
        partitions: partition_mode(partitions, seed)?,
        spectral: spectral_mode(spectral)?,
        ..RefuteParams::default()
    })
}

/// `k` matchings of `q`-sets on vertices `0..n`.
#[pyclass(name = "MatchingFamily", module = "kikuchi", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFamily {
    inner: MatchingFamily,
}

#[pymethods]
impl PyFamily {
    #[new]
    fn new(n: usize, q: usize, members: Vec<Vec<Vec<u32>>>) -> PyResult<Self> {
        MatchingFamily::from_edges(n, q, members).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        MatchingFamily::from_text(text).map(|inner| Self { inner }).map_err(err)
    }

    /// Random family drawn from the `instance` stream of `seed`.
    #[staticmethod]
    #[pyo3(signature = (n, q, k, per_member, seed=0))]
    fn random(n: usize, q: usize, k: usize, per_member: usize, seed: u64) -> PyResult<Self> {
        let mut rng = SeedStream::new(seed).rng("instance");
        random_matching_family(&mut rng, n, q, k, per_member)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn members(&self) -> Vec<Vec<Vec<u32>>> {
        self.inner.members().iter().map(|h| h.edges().to_vec()).collect()
    }

    fn max_pair_degree(&self) -> usize {
        self.inner.max_pair_degree().map_or(0, |(_, d)| d)
    }

    /// Exact `val(psi_b)` as `(numerator, denominator)`.
    #[pyo3(signature = (signs, cap=20))]
    fn brute_force_val(&self, signs: Vec<i8>, cap: usize) -> PyResult<(i64, i64)> {
        let inst = XorInstance::from_family(&self.inner, &signs).map_err(err)?;
        let (v, _) = inst.brute_force_val(cap).map_err(err)?;
        Ok((*v.numer(), *v.denom()))
    }

    fn __repr__(&self) -> String {
        format!(
            "MatchingFamily(n={}, q={}, k={}, m={})",
            self.inner.n(),
            self.inner.q(),
            self.inner.k(),
            self.inner.m()
        )
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// A normal LDC fixture with its decoding matchings.
#[pyclass(name = "Ldc", module = "kikuchi", frozen)]
struct PyLdc {
    inner: NormalLdc,
}

#[pymethods]
impl PyLdc {
    /// Hadamard code on `2^k` coordinates, padded to 3 queries when asked.
    #[staticmethod]
    #[pyo3(signature = (k, padded=false))]
    fn hadamard(k: usize, padded: bool) -> PyResult<Self> {
        let base = ldc::hadamard_fixture(k).map_err(err)?;
        let inner = if padded { ldc::pad_to_qplus1(&base).map_err(err)? } else { base };
        Ok(Self { inner })
    }

    #[getter]
    fn family(&self) -> PyFamily {
        PyFamily { inner: self.inner.matchings.clone() }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn encode(&self, message: u64) -> Vec<bool> {
        self.inner.code.encode(message)
    }

    /// Exact per-clause bias report.
    fn verify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &ldc::verify_normal(&self.inner, VerifyMode::Exact).map_err(err)?)
    }

    /// Both reduced 2-query codes; only the summary fields are returned.
    #[pyo3(signature = (d=2, ell=2))]
    fn wldc_reduction<'py>(&self, py: Python<'py>, d: usize, ell: usize) -> PyResult<Bound<'py, PyAny>> {
        let r = ldc::wldc_reduction(&self.inner, &WldcParams { d, ell, ..WldcParams::default() }).map_err(err)?;
        let code = |c: &Option<ldc::ReducedCode>| {
            c.as_ref().map(|c| {
                serde_json::json!({
                    "n": c.wldc.code().n(),
                    "k": c.wldc.code().k(),
                    "left": c.left,
                    "matching_edges": c.matching_edges(),
                    "delta": c.delta(),
                    "gkst": c.gkst,
                })
            })
        };
        let summary = serde_json::json!({
            "delta": r.delta,
            "heavy_pairs": r.heavy_pairs,
            "bipartite_edges": r.bipartite_edges,
            "residual_edges": r.residual_edges,
            "c2": code(&r.c2),
            "c3": code(&r.c3),
            "guarantee_holds": r.guarantee_holds,
        });
        to_py(py, &summary)
    }
}

#[pyfunction]
fn decompose<'py>(py: Python<'py>, family: &PyFamily, d: usize) -> PyResult<Bound<'py, PyAny>> {
    let r = core_decompose(&family.inner, d).map_err(err)?;
    let residual: Vec<Vec<Vec<u32>>> = r.residual.members().iter().map(|h| h.edges().to_vec()).collect();
    to_py(
        py,
        &serde_json::json!({
            "residual": residual,
            "bipartite": r.bipartite,
            "heavy_pairs": r.heavy_pairs,
            "threshold": r.threshold,
        }),
    )
}

#[pyfunction]
#[pyo3(signature = (family, signs, ell=2, partitions="exhaustive", spectral="dense", seed=0))]
fn refute_3xor<'py>(
    py: Python<'py>,
    family: &PyFamily,
    signs: Vec<i8>,
    ell: usize,
    partitions: &str,
    spectral: &str,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = params(ell, partitions, spectral, seed)?;
    to_py(py, &refuter::refute_3xor(&family.inner, &signs, &p).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (family, signs, ell, spectral="dense"))]
fn refute_even_q<'py>(
    py: Python<'py>,
    family: &PyFamily,
    signs: Vec<i8>,
    ell: usize,
    spectral: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let p = params(ell, "exhaustive", spectral, 0)?;
    to_py(py, &refuter::refute_even_q(&family.inner, &signs, &p).map_err(err)?)
}

/// 2-XOR certificate for the bipartite part of `decompose(family, d)`.
#[pyfunction]
#[pyo3(signature = (family, signs, d, spectral="dense"))]
fn refute_2xor<'py>(
    py: Python<'py>,
    family: &PyFamily,
    signs: Vec<i8>,
    d: usize,
    spectral: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let bip = core_decompose(&family.inner, d).map_err(err)?.bipartite_family();
    to_py(py, &core_refute_2xor(&bip, &signs, spectral_mode(spectral)?).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (family, signs, d, ell=2, partitions="exhaustive", spectral="dense", seed=0))]
#[allow(clippy::too_many_arguments)]
fn combine<'py>(
    py: Python<'py>,
    family: &PyFamily,
    signs: Vec<i8>,
    d: usize,
    ell: usize,
    partitions: &str,
    spectral: &str,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = params(ell, partitions, spectral, seed)?;
    to_py(py, &refuter::combine_theorem1(&family.inner, &signs, d, &p).map_err(err)?)
}

/// Averages a pipeline's certificate over all sign vectors (or `samples`
/// random ones).
#[pyfunction]
#[pyo3(signature = (pipeline, family, d=2, ell=2, samples=None, seed=0, brute_cap=16))]
#[allow(clippy::too_many_arguments)]
fn expectation_over_b<'py>(
    py: Python<'py>,
    pipeline: &str,
    family: &PyFamily,
    d: usize,
    ell: usize,
    samples: Option<usize>,
    seed: u64,
    brute_cap: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let pipeline = match pipeline {
        "refute-2xor" => Pipeline::TwoXor { d },
        "refute-3xor" => Pipeline::ThreeXor,
        "refute-even" => Pipeline::EvenQ,
        "combine" => Pipeline::Combine { d },
        _ => return Err(PyValueError::new_err(format!("unknown pipeline `{pipeline}`"))),
    };
    let b = match samples {
        Some(count) => BMode::Sampled { count, seed },
        None => BMode::Exhaustive,
    };
    let p = params(ell, "exhaustive", "dense", seed)?;
    to_py(py, &refuter::expectation_over_b(pipeline, &family.inner, &p, b, Some(brute_cap)).map_err(err)?)
}

/// `C(n-2q, l-q) / C(n, l)` as `(numerator, denominator, sandwich_holds)`.
#[pyfunction]
fn binomial_ratio(n: usize, ell: usize, q: usize) -> PyResult<(i128, i128, bool)> {
    let r = refuter::binomial_ratio(n, ell, q).map_err(err)?;
    Ok((*r.ratio.numer(), *r.ratio.denom(), r.holds))
}

/// Runs the named property suites (all when empty).
#[pyfunction]
#[pyo3(signature = (suites=Vec::new(), seed=0, trials=None))]
fn verify<'py>(py: Python<'py>, suites: Vec<String>, seed: u64, trials: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let selected = suites.iter().map(|s| Suite::parse(s)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let results = py.detach(|| run_suites(&selected, seed, trials));
    to_py(py, &results)
}

/// Runs a refutation from a TOML experiment config and returns the report.
#[pyfunction]
fn run_config<'py>(py: Python<'py>, toml: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::from_toml(toml).map_err(err)?;
    let report = py.detach(|| run_refute(&cfg)).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn kikuchi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", kikuchi_core::experiment::TOOLKIT_VERSION)?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add("CapacityError", m.py().get_type::<CapacityError>())?;
    m.add_class::<PyFamily>()?;
    m.add_class::<PyLdc>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(refute_3xor, m)?)?;
    m.add_function(wrap_pyfunction!(refute_even_q, m)?)?;
    m.add_function(wrap_pyfunction!(refute_2xor, m)?)?;
    m.add_function(wrap_pyfunction!(combine, m)?)?;
    m.add_function(wrap_pyfunction!(expectation_over_b, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
