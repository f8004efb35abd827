//! Python bindings for the `tailfrac` core crate.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tailfrac::asymptotics as asy;
use tailfrac::estimators::{self as est, FractionPair};
use tailfrac::inference::{self, ConfidenceInterval};
use tailfrac::sampling::{self, RandomStream};

fn py_err(e: tailfrac::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Benchmark heavy-tailed model: `frechet:g=..`, `burr:a=..,b=..` or `pareto:g=..`.
#[pyclass(name = "TailModel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTailModel(sampling::TailModel);

#[pymethods]
impl PyTailModel {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        spec.parse().map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn frechet(gamma: f64) -> PyResult<Self> {
        sampling::TailModel::frechet(gamma).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn burr(a: f64, b: f64) -> PyResult<Self> {
        sampling::TailModel::burr(a, b).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn pareto(gamma: f64) -> PyResult<Self> {
        sampling::TailModel::pareto(gamma).map(Self).map_err(py_err)
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho()
    }

    /// `(gamma, rho, c)`; `c` is `None` when `rho` is infinite.
    fn true_params(&self) -> (f64, f64, Option<f64>) {
        let p = self.0.true_params();
        (p.gamma, p.rho, p.c)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        self.0.quantile(p).map_err(py_err)
    }

    /// `n` draws from the model with the library's portable generator.
    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        let s = sampling::sample(&self.0, n, &mut RandomStream::new(seed)).map_err(py_err)?;
        Ok(s.values().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("TailModel('{}')", self.0)
    }
}

/// Sorted sample of finite observations.
#[pyclass(name = "Sample", frozen)]
struct PySample(est::Sample);

#[pymethods]
impl PySample {
    #[new]
    fn new(values: Vec<f64>) -> PyResult<Self> {
        est::Sample::new(values).map(Self).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Ascending order statistics.
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    /// `X_{n-i}`: the `i`-th largest observation, 0-based.
    #[allow(clippy::wrong_self_convention)]
    fn from_top(&self, i: usize) -> PyResult<f64> {
        if i >= self.0.len() {
            return Err(PyValueError::new_err(format!("index {i} out of range")));
        }
        Ok(self.0.from_top(i))
    }

    fn affine(&self, scale: f64, shift: f64) -> PyResult<Self> {
        self.0.affine(scale, shift).map(Self).map_err(py_err)
    }

    fn hill(&self, k: usize) -> PyResult<f64> {
        est::hill(&self.0, k).map_err(py_err)
    }

    fn moment(&self, k: usize) -> PyResult<f64> {
        est::moment(&self.0, k).map_err(py_err)
    }

    fn m_alpha(&self, k0: usize, k: usize, alpha: f64) -> PyResult<f64> {
        est::m_alpha(&self.0, FractionPair::new(k0, k), alpha).map_err(py_err)
    }

    fn fraga_alves(&self, k0: usize, k: usize) -> PyResult<f64> {
        est::fraga_alves(&self.0, FractionPair::new(k0, k)).map_err(py_err)
    }

    fn gamma_hat(&self, k0: usize, k: usize, alpha: f64) -> PyResult<f64> {
        est::gamma_hat_value(&self.0, FractionPair::new(k0, k), alpha).map_err(py_err)
    }
}

/// Two-sided interval; `upper` is `None` when unbounded.
#[pyclass(name = "ConfidenceInterval", frozen, get_all)]
struct PyInterval {
    lower: f64,
    upper: Option<f64>,
    level: f64,
}

#[pymethods]
impl PyInterval {
    fn covers(&self, x: f64) -> bool {
        x >= self.lower && self.upper.is_none_or(|u| x <= u)
    }

    fn __repr__(&self) -> String {
        format!("ConfidenceInterval(lower={}, upper={:?}, level={})", self.lower, self.upper, self.level)
    }
}

impl From<ConfidenceInterval> for PyInterval {
    fn from(c: ConfidenceInterval) -> Self {
        Self { lower: c.lower, upper: c.upper, level: c.level }
    }
}

#[pyfunction]
fn alpha0(gamma: f64) -> PyResult<f64> {
    asy::alpha0(gamma).map_err(py_err)
}

#[pyfunction]
fn b_alpha(alpha: f64, gamma: f64) -> PyResult<f64> {
    asy::b_alpha(alpha, gamma).map_err(py_err)
}

#[pyfunction]
fn v_alpha(alpha: f64) -> PyResult<f64> {
    asy::v_alpha(alpha).map_err(py_err)
}

#[pyfunction]
fn areff(alpha: f64, gamma: f64) -> PyResult<f64> {
    asy::areff(alpha, gamma).map_err(py_err)
}

/// Asymptotically optimal `k0` for fixed `k` (the `gamma`-bias regime).
#[pyfunction]
#[pyo3(signature = (gamma, rho, c, alpha, k))]
fn k0_opt1(gamma: f64, rho: f64, c: Option<f64>, alpha: f64, k: f64) -> PyResult<f64> {
    let ctx = asy::AsymptoticContext::new(gamma, rho, c, alpha).map_err(py_err)?;
    asy::k0_opt1(&ctx, k).map_err(py_err)
}

#[pyfunction]
fn ci_fraga_alves(estimate: f64, k0: usize, level: f64) -> PyResult<PyInterval> {
    inference::ci_fraga_alves(estimate, k0, level).map(Into::into).map_err(py_err)
}

#[pyfunction]
fn ci_new(estimate: f64, k0: usize, alpha: f64, level: f64) -> PyResult<PyInterval> {
    inference::ci_new(estimate, k0, alpha, level).map(Into::into).map_err(py_err)
}

#[pymodule]
fn tailfrac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTailModel>()?;
    m.add_class::<PySample>()?;
    m.add_class::<PyInterval>()?;
    m.add_function(wrap_pyfunction!(alpha0, m)?)?;
    m.add_function(wrap_pyfunction!(b_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(v_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(areff, m)?)?;
    m.add_function(wrap_pyfunction!(k0_opt1, m)?)?;
    m.add_function(wrap_pyfunction!(ci_fraga_alves, m)?)?;
    m.add_function(wrap_pyfunction!(ci_new, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
