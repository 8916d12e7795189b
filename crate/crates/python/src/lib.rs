//! Python module `lieq`: thin wrappers over the workbench commands. Results
//! come back as plain dicts/lists/strings; rationals stay strings.

use pyo3::exceptions::{PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use lieq::enveloping::EpsMode;
use lieq::error::Error;
use lieq::workbench::{self, Command, Side, StarMethod, Target};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::DegreeOverflow { .. } | Error::SizeCap { .. } => PyOverflowError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any().unbind(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any().unbind(),
            _ => n.to_string().into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(a) => {
            let items = a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any().unbind()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

fn run(py: Python<'_>, cmd: Command) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| workbench::run(&cmd, false)).map_err(to_py_err)?;
    to_py(py, &r.results)
}

fn target(name: &str, subalgebra: Option<Vec<String>>, lambda: Option<&str>) -> PyResult<Target> {
    Ok(Target {
        target: name.to_string(),
        subalgebra,
        lambda: lambda
            .map(workbench::parse_lambda_list)
            .transpose()
            .map_err(to_py_err)?
            .unwrap_or_default(),
    })
}

fn eps_mode(eps: &str) -> PyResult<EpsMode> {
    match eps {
        "symbolic" => Ok(EpsMode::Symbolic),
        "1" => Ok(EpsMode::One),
        _ => Err(PyValueError::new_err(format!("eps must be 'symbolic' or '1', got {eps:?}"))),
    }
}

/// Names of the built-in algebras.
#[pyfunction]
fn builtin_algebras() -> Vec<&'static str> {
    lieq::corpus::NAMES.to_vec()
}

/// Validation report of an algebra file or built-in name.
#[pyfunction]
fn validate(py: Python<'_>, target: &str) -> PyResult<Py<PyAny>> {
    let ing = workbench::resolve(target).map_err(to_py_err)?;
    to_py(py, &workbench::validation_report(&ing.algebra, ing.setup.as_ref()))
}

#[pyfunction]
#[pyo3(signature = (target, n, subalgebra=None, lambda_=None, side="u", eps="symbolic"))]
fn invariants(
    py: Python<'_>,
    target: &str,
    n: u32,
    subalgebra: Option<Vec<String>>,
    lambda_: Option<&str>,
    side: &str,
    eps: &str,
) -> PyResult<Py<PyAny>> {
    let side = match side {
        "u" => Side::U,
        "s" => Side::S,
        _ => return Err(PyValueError::new_err("side must be 'u' or 's'")),
    };
    run(
        py,
        Command::Invariants {
            target: self::target(target, subalgebra, lambda_)?,
            n,
            side,
            eps: eps_mode(eps)?,
            lambda_eps_scaling: false,
        },
    )
}

#[pyfunction]
#[pyo3(signature = (target, n, eps_order=1, subalgebra=None, lambda_=None))]
fn reduce(
    py: Python<'_>,
    target: &str,
    n: u32,
    eps_order: usize,
    subalgebra: Option<Vec<String>>,
    lambda_: Option<&str>,
) -> PyResult<Py<PyAny>> {
    run(
        py,
        Command::Reduce {
            target: self::target(target, subalgebra, lambda_)?,
            n,
            eps_order,
            weights: None,
        },
    )
}

/// Truncated star product; `method` is `"gutt"` or `"kontsevich"`.
#[pyfunction]
#[pyo3(signature = (target, f, g, order, method="gutt"))]
fn star(py: Python<'_>, target: &str, f: &str, g: &str, order: usize, method: &str) -> PyResult<Py<PyAny>> {
    let method = match method {
        "gutt" => StarMethod::Gutt,
        "kontsevich" => StarMethod::Kontsevich,
        _ => return Err(PyValueError::new_err("method must be 'gutt' or 'kontsevich'")),
    };
    run(
        py,
        Command::Star {
            target: target.into(),
            method,
            order,
            f: f.into(),
            g: g.into(),
            weights: None,
        },
    )
}

#[pyfunction]
#[pyo3(signature = (n, m, up_to_iso=false))]
fn graphs_enum(py: Python<'_>, n: usize, m: usize, up_to_iso: bool) -> PyResult<Py<PyAny>> {
    run(py, Command::GraphsEnum { n, m, up_to_iso })
}

#[pyfunction]
fn weight_mc(py: Python<'_>, graph: &str, samples: u64, seed: u64) -> PyResult<Py<PyAny>> {
    run(
        py,
        Command::WeightsMc {
            graph: graph.into(),
            samples,
            seed,
        },
    )
}

#[pyfunction]
#[pyo3(signature = (target, n, eps_order=1, subalgebra=None, lambda_=None))]
fn theorem5_roundtrip(
    py: Python<'_>,
    target: &str,
    n: u32,
    eps_order: usize,
    subalgebra: Option<Vec<String>>,
    lambda_: Option<&str>,
) -> PyResult<Py<PyAny>> {
    run(
        py,
        Command::Theorem5Roundtrip {
            target: self::target(target, subalgebra, lambda_)?,
            n,
            eps_order,
        },
    )
}

#[pyfunction]
#[pyo3(signature = (target, n, eps_order=1, subalgebra=None, lambda_=None))]
fn theorem6_check(
    py: Python<'_>,
    target: &str,
    n: u32,
    eps_order: usize,
    subalgebra: Option<Vec<String>>,
    lambda_: Option<&str>,
) -> PyResult<Py<PyAny>> {
    run(
        py,
        Command::Theorem6Check {
            target: self::target(target, subalgebra, lambda_)?,
            n,
            eps_order,
        },
    )
}

#[pyfunction]
fn duflo(py: Python<'_>, target: &str, truncation: u32) -> PyResult<Py<PyAny>> {
    run(
        py,
        Command::Duflo {
            target: target.into(),
            truncation,
        },
    )
}

/// `{f, g}` in the linear Poisson structure of the algebra.
#[pyfunction]
fn poisson_bracket(target: &str, f: &str, g: &str) -> PyResult<String> {
    let alg = workbench::resolve(target).map_err(to_py_err)?.algebra;
    let names = alg.basis_names();
    let fp = lieq::poly::parse_polynomial(f, names).map_err(to_py_err)?;
    let gp = lieq::poly::parse_polynomial(g, names).map_err(to_py_err)?;
    let b = lieq::poly::poisson_bracket(&fp, &gp, &alg).map_err(to_py_err)?;
    Ok(b.format(names))
}

#[pymodule]
#[pyo3(name = "lieq")]
pub fn lieq_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", workbench::TOOL_VERSION)?;
    m.add_function(wrap_pyfunction!(builtin_algebras, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(invariants, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(star, m)?)?;
    m.add_function(wrap_pyfunction!(graphs_enum, m)?)?;
    m.add_function(wrap_pyfunction!(weight_mc, m)?)?;
    m.add_function(wrap_pyfunction!(theorem5_roundtrip, m)?)?;
    m.add_function(wrap_pyfunction!(theorem6_check, m)?)?;
    m.add_function(wrap_pyfunction!(duflo, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_bracket, m)?)?;
    Ok(())
}
