//! Python module `wprec`. Values come back as `fractions.Fraction`.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyString};
use pyo3::sync::PyOnceLock;

use wprec::constants::{shared, ConstantKind};
use wprec::series::shift_check;
use wprec::suites::{self, SuiteBounds, SuiteReport};
use wprec::{IdentityCheck, Rational};

fn value_error(e: wprec::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, value: &Rational) -> PyResult<Bound<'py, PyAny>> {
    static FRACTION: PyOnceLock<Py<PyAny>> = PyOnceLock::new();
    let class = FRACTION.get_or_try_init(py, || -> PyResult<Py<PyAny>> {
        Ok(py.import("fractions")?.getattr("Fraction")?.unbind())
    })?;
    class.bind(py).call1((value.numer().clone(), value.denom().clone()))
}

fn identity<'py>(py: Python<'py>, check: &IdentityCheck) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("lhs", fraction(py, &check.lhs)?)?;
    d.set_item("rhs", fraction(py, &check.rhs)?)?;
    d.set_item("holds", check.holds())?;
    Ok(d)
}

fn report<'py>(py: Python<'py>, r: &SuiteReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("suite", &r.name)?;
    d.set_item("passed", r.passed())?;
    d.set_item("cases", r.cases)?;
    d.set_item("failures", r.failures)?;
    d.set_item("first_counterexample", r.first_counterexample.clone())?;
    Ok(d)
}

/// A kappa multi-index: `b(i)` copies of `kappa_i`.
#[pyclass(name = "MultiIndex", module = "wprec", frozen, eq, ord, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct PyMultiIndex(wprec::MultiIndex);

#[pymethods]
impl PyMultiIndex {
    /// From `"1:2,3:1"` text or a `{index: multiplicity}` dict.
    #[new]
    #[pyo3(signature = (spec = None))]
    fn new(spec: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        match spec {
            None => Ok(Self(wprec::MultiIndex::zero())),
            Some(s) => kappa_arg(s).map(Self),
        }
    }

    #[getter]
    fn weight(&self) -> u32 {
        self.0.weight()
    }

    #[getter]
    fn length(&self) -> u32 {
        self.0.length()
    }

    fn to_dict(&self) -> BTreeMap<u32, u32> {
        self.0.entries().iter().copied().collect()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("MultiIndex({:?})", self.0.to_string())
    }
}

fn kappa_arg(obj: &Bound<'_, PyAny>) -> PyResult<wprec::MultiIndex> {
    if let Ok(m) = obj.cast::<PyMultiIndex>() {
        return Ok(m.get().0.clone());
    }
    if let Ok(s) = obj.cast::<PyString>() {
        return s.to_str()?.parse().map_err(value_error);
    }
    if let Ok(d) = obj.cast::<PyDict>() {
        let mut pairs = Vec::new();
        for (k, v) in d.iter() {
            pairs.push((k.extract::<u32>()?, v.extract::<u32>()?));
        }
        return wprec::MultiIndex::from_pairs(pairs).map_err(value_error);
    }
    Err(PyValueError::new_err("kappa must be a MultiIndex, an 'i:m,...' string or a dict"))
}

fn opt_kappa(obj: Option<&Bound<'_, PyAny>>) -> PyResult<wprec::MultiIndex> {
    obj.map_or_else(|| Ok(wprec::MultiIndex::zero()), kappa_arg)
}

/// Memoized evaluator of `<kappa(b) tau_{d_1} ... tau_{d_n}>_g`.
#[pyclass(name = "CorrelatorEngine", module = "wprec", frozen)]
struct PyCorrelatorEngine(wprec::CorrelatorEngine);

#[pymethods]
impl PyCorrelatorEngine {
    #[new]
    fn new() -> Self {
        Self(wprec::CorrelatorEngine::new())
    }

    #[pyo3(signature = (genus, kappa = None, psi = Vec::new()))]
    fn correlator<'py>(
        &self,
        py: Python<'py>,
        genus: u32,
        kappa: Option<&Bound<'py, PyAny>>,
        psi: Vec<u32>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let b = opt_kappa(kappa)?;
        let v = py.detach(|| self.0.correlator(genus, &b, &psi));
        fraction(py, &v)
    }

    #[pyo3(signature = (genus, kappa = None, psi = Vec::new()))]
    fn verify_kappa_subtracted<'py>(
        &self,
        py: Python<'py>,
        genus: u32,
        kappa: Option<&Bound<'py, PyAny>>,
        psi: Vec<u32>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let b = opt_kappa(kappa)?;
        let c = self.0.verify_kappa_subtracted(genus, &b, &psi).map_err(value_error)?;
        identity(py, &c)
    }

    #[pyo3(signature = (genus, kappa = None, psi = Vec::new()))]
    fn verify_string<'py>(
        &self,
        py: Python<'py>,
        genus: u32,
        kappa: Option<&Bound<'py, PyAny>>,
        psi: Vec<u32>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let b = opt_kappa(kappa)?;
        identity(py, &self.0.verify_string(genus, &b, &psi))
    }

    #[pyo3(signature = (genus, kappa = None, psi = Vec::new()))]
    fn verify_dilaton<'py>(
        &self,
        py: Python<'py>,
        genus: u32,
        kappa: Option<&Bound<'py, PyAny>>,
        psi: Vec<u32>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let b = opt_kappa(kappa)?;
        identity(py, &self.0.verify_dilaton(genus, &b, &psi))
    }

    fn memo_len(&self) -> usize {
        self.0.memo_len()
    }

    fn clear_memo(&self) {
        self.0.clear_memo()
    }
}

/// Kappa classes expanded into pure psi numbers.
#[pyclass(name = "KmzOracle", module = "wprec", frozen)]
struct PyKmzOracle(wprec::KmzOracle);

#[pymethods]
impl PyKmzOracle {
    #[new]
    fn new() -> Self {
        Self(wprec::KmzOracle::new())
    }

    fn pure_psi<'py>(&self, py: Python<'py>, genus: u32, psi: Vec<u32>) -> PyResult<Bound<'py, PyAny>> {
        let v = py.detach(|| self.0.pure_psi(genus, &psi));
        fraction(py, &v)
    }

    #[pyo3(signature = (genus, kappa = None, psi = Vec::new()))]
    fn kmz_expand<'py>(
        &self,
        py: Python<'py>,
        genus: u32,
        kappa: Option<&Bound<'py, PyAny>>,
        psi: Vec<u32>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let b = opt_kappa(kappa)?;
        let v = py.detach(|| self.0.kmz_expand(genus, &b, &psi));
        fraction(py, &v)
    }
}

/// Higher Weil-Petersson volumes `V_{g,n}(kappa(b))`.
#[pyclass(name = "VolumeEngine", module = "wprec", frozen)]
struct PyVolumeEngine(wprec::VolumeEngine);

#[pymethods]
impl PyVolumeEngine {
    #[new]
    fn new() -> Self {
        Self(wprec::VolumeEngine::new())
    }

    #[pyo3(signature = (genus, points, kappa = None))]
    fn volume<'py>(
        &self,
        py: Python<'py>,
        genus: u32,
        points: u32,
        kappa: Option<&Bound<'py, PyAny>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let b = opt_kappa(kappa)?;
        let v = py.detach(|| self.0.volume(genus, points, &b)).map_err(value_error)?;
        fraction(py, &v)
    }

    #[pyo3(signature = (genus, kappa = None))]
    fn volume_closed<'py>(
        &self,
        py: Python<'py>,
        genus: u32,
        kappa: Option<&Bound<'py, PyAny>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let b = opt_kappa(kappa)?;
        let v = py.detach(|| self.0.volume_closed(genus, &b)).map_err(value_error)?;
        fraction(py, &v)
    }

    #[pyo3(signature = (genus, points, kappa = None))]
    fn volume_expanded_check<'py>(
        &self,
        py: Python<'py>,
        genus: u32,
        points: u32,
        kappa: Option<&Bound<'py, PyAny>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let b = opt_kappa(kappa)?;
        let c = self.0.volume_expanded_check(genus, points, &b).map_err(value_error)?;
        identity(py, &c)
    }
}

/// Pairings against `lambda_g` (`"lambda_g"`) and `lambda_g lambda_{g-1}`
/// (`"lambda_g_lambda_gm1"`). `base_values` optionally maps
/// `(genus, pairing)` to the one-point value used in place of the closed
/// form.
#[pyclass(name = "HodgeEngine", module = "wprec", frozen)]
struct PyHodgeEngine(wprec::HodgeEngine<Box<dyn wprec::BaseValueProvider>>, bool);

#[pymethods]
impl PyHodgeEngine {
    #[new]
    #[pyo3(signature = (base_values = None))]
    fn new(base_values: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let provider: Box<dyn wprec::BaseValueProvider> = match base_values {
            Some(d) => {
                let mut table = wprec::TableProvider::new();
                for (k, v) in d.iter() {
                    let (genus, pairing): (u32, String) = k.extract()?;
                    let pairing = pairing.parse().map_err(value_error)?;
                    let text: String = v.str()?.extract()?;
                    let value = wprec::arith::parse_rational(&text).map_err(value_error)?;
                    table.insert(genus, pairing, value);
                }
                Box::new(table)
            }
            None => Box::new(wprec::ClosedFormProvider),
        };
        Ok(Self(wprec::HodgeEngine::new(provider), base_values.is_some()))
    }

    /// Whether the engine uses caller-supplied one-point values.
    #[getter]
    fn custom(&self) -> bool {
        self.1
    }

    #[pyo3(signature = (genus, pairing, kappa = None, psi = Vec::new(), expanded = false))]
    fn hodge<'py>(
        &self,
        py: Python<'py>,
        genus: u32,
        pairing: &str,
        kappa: Option<&Bound<'py, PyAny>>,
        psi: Vec<u32>,
        expanded: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let b = opt_kappa(kappa)?;
        let pairing = pairing.parse().map_err(value_error)?;
        let v = py
            .detach(|| {
                if expanded {
                    self.0.hodge_correlator(genus, pairing, &b, &psi)
                } else {
                    self.0.hodge_direct(genus, pairing, &b, &psi)
                }
            })
            .map_err(value_error)?;
        fraction(py, &v)
    }
}

/// Value of a constant family (`alpha`, `gamma_odd`, `gamma_fact`) at `index`.
#[pyfunction]
fn constant<'py>(py: Python<'py>, kind: &str, index: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let kind: ConstantKind = kind.parse().map_err(value_error)?;
    let b = kappa_arg(index)?;
    fraction(py, &shared(kind).get(&b))
}

/// `[(index text, value)]` for every index of weight at most `max_weight`.
#[pyfunction]
fn constant_table<'py>(py: Python<'py>, kind: &str, max_weight: u32) -> PyResult<Vec<(String, Bound<'py, PyAny>)>> {
    let kind: ConstantKind = kind.parse().map_err(value_error)?;
    shared(kind)
        .up_to_weight(max_weight)
        .iter()
        .map(|(b, v)| Ok((b.to_string(), fraction(py, v)?)))
        .collect()
}

/// Compares the kappa/psi potential with the shifted psi potential.
#[pyfunction]
#[pyo3(signature = (cutoff, s_vars = 3, t_max = 5))]
fn shift<'py>(py: Python<'py>, cutoff: u32, s_vars: usize, t_max: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .detach(|| {
            shift_check(
                &wprec::CorrelatorEngine::new(),
                &wprec::KmzOracle::new(),
                cutoff,
                s_vars,
                t_max,
            )
        })
        .map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("holds", r.holds)?;
    d.set_item("compared", r.compared)?;
    match &r.first_mismatch {
        None => d.set_item("first_mismatch", py.None())?,
        Some((m, g, f)) => d.set_item("first_mismatch", (m.to_string(), fraction(py, g)?, fraction(py, f)?))?,
    }
    Ok(d)
}

/// Runs a named identity suite.
#[pyfunction]
#[pyo3(signature = (name, max_dim = 6, cutoff = 4, max_genus = 3))]
fn run_suite<'py>(
    py: Python<'py>,
    name: &str,
    max_dim: u32,
    cutoff: u32,
    max_genus: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let bounds = SuiteBounds {
        max_dim,
        cutoff,
        max_genus,
        ..SuiteBounds::default()
    };
    let r = py
        .detach(|| suites::run_named(name, &bounds, None))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    report(py, &r)
}

/// Names accepted by `run_suite`.
#[pyfunction]
fn suite_names() -> Vec<&'static str> {
    suites::SUITE_NAMES.to_vec()
}

#[pymodule]
#[pyo3(name = "wprec")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMultiIndex>()?;
    m.add_class::<PyCorrelatorEngine>()?;
    m.add_class::<PyKmzOracle>()?;
    m.add_class::<PyVolumeEngine>()?;
    m.add_class::<PyHodgeEngine>()?;
    m.add_function(wrap_pyfunction!(constant, m)?)?;
    m.add_function(wrap_pyfunction!(constant_table, m)?)?;
    m.add_function(wrap_pyfunction!(shift, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(suite_names, m)?)?;
    Ok(())
}
