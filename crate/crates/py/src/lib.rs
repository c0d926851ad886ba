//! Python bindings for `kmoments`.

use kmoments::arith;
use kmoments::expsums::{self, ExpSumTable};
use kmoments::moments::{self, AuditParams};
use kmoments::{incomplete, lfunc, primitive_characters, character_group, DirichletCharacter as Chi};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;

fn err(e: kmoments::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_enum<T: DeserializeOwned>(what: &str, s: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
        .map_err(|_| PyValueError::new_err(format!("unknown {what}: {s}")))
}

fn modulus(q: u64) -> PyResult<arith::Modulus> {
    arith::Modulus::new(q).map_err(err)
}

fn values(t: ExpSumTable) -> Vec<Complex64> {
    t.values
}

/// Squarefree modulus q.
#[pyclass(frozen, name = "Modulus")]
struct PyModulus(arith::Modulus);

#[pymethods]
impl PyModulus {
    #[new]
    fn new(q: u64) -> PyResult<Self> {
        modulus(q).map(Self)
    }

    #[getter]
    fn q(&self) -> u64 {
        self.0.q()
    }

    #[getter]
    fn primes(&self) -> Vec<u64> {
        self.0.primes().to_vec()
    }

    fn phi(&self) -> u64 {
        self.0.phi()
    }

    fn primitive_count(&self) -> u64 {
        self.0.primitive_count()
    }

    fn divisors(&self) -> Vec<u64> {
        self.0.divisors()
    }

    fn smooth_bound(&self) -> u64 {
        self.0.smooth_bound()
    }

    #[pyo3(signature = (primitive_only = true))]
    fn characters(&self, primitive_only: bool) -> Vec<PyCharacter> {
        character_group(&self.0, primitive_only).map(PyCharacter).collect()
    }

    fn __repr__(&self) -> String {
        format!("Modulus({})", self.0.q())
    }
}

/// Dirichlet character written as "q:e1,e2,..." (one exponent per prime).
#[pyclass(frozen, eq, name = "Character")]
#[derive(PartialEq)]
struct PyCharacter(Chi);

#[pymethods]
impl PyCharacter {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        spec.parse::<Chi>().map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_exponents(q: u64, exponents: Vec<u64>) -> PyResult<Self> {
        Chi::new(&modulus(q)?, exponents).map(Self).map_err(err)
    }

    #[getter]
    fn q(&self) -> u64 {
        self.0.q()
    }

    #[getter]
    fn exponents(&self) -> Vec<u64> {
        self.0.exponents().to_vec()
    }

    fn is_primitive(&self) -> bool {
        self.0.is_primitive()
    }

    fn parity(&self) -> i32 {
        self.0.parity()
    }

    fn conj(&self) -> Self {
        Self(self.0.conj())
    }

    fn __call__(&self, n: i64) -> Complex64 {
        self.0.evaluate(n)
    }

    /// L(1/2, χ) and its error estimate.
    #[pyo3(signature = (method = "hurwitz"))]
    fn l_half(&self, method: &str) -> PyResult<(Complex64, f64)> {
        let v = lfunc::l_half(&self.0, parse_enum("method", method)?).map_err(err)?;
        Ok((v.value, v.abs_error_estimate))
    }

    /// K_χ(m) for m = 0..q.
    fn k_table(&self) -> PyResult<Vec<Complex64>> {
        expsums::k_bulk(&self.0).map(values).map_err(err)
    }

    fn k(&self, k: i64, l: i64) -> PyResult<Complex64> {
        expsums::k_chi(&self.0, k, l).map_err(err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Character('{}')", self.0)
    }
}

#[pyfunction]
fn kcirc_table(chi: &PyCharacter, chi_prime: &PyCharacter) -> PyResult<Vec<Complex64>> {
    expsums::kcirc_table(&chi.0, &chi_prime.0).map(values).map_err(err)
}

#[pyfunction]
fn fourier_complete(chi: &PyCharacter, chi_prime: &PyCharacter) -> PyResult<Vec<Complex64>> {
    expsums::fourier_complete(&chi.0, &chi_prime.0).map(values).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (chi, chi_prime, r, m, method = "completed"))]
fn incomplete_sum<'py>(
    py: Python<'py>,
    chi: &PyCharacter,
    chi_prime: &PyCharacter,
    r: i64,
    m: u64,
    method: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = incomplete::incomplete_sum(&chi.0, &chi_prime.0, r, m, parse_enum("method", method)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("value", rep.value)?;
    d.set_item("bound_pv", rep.bound_pv)?;
    d.set_item("bound_vdc", rep.bound_vdc)?;
    d.set_item("split", (rep.q1, rep.q2))?;
    d.set_item("ratio", rep.ratio)?;
    Ok(d)
}

/// (character id, L(1/2, χ)) for every primitive χ mod q.
#[pyfunction]
#[pyo3(signature = (q, method = "hurwitz"))]
fn central_values(q: u64, method: &str) -> PyResult<Vec<(String, Complex64)>> {
    let vals = lfunc::central_values(&modulus(q)?, parse_enum("method", method)?).map_err(err)?;
    Ok(vals.into_iter().map(|v| (v.chi.to_string(), v.value)).collect())
}

#[pyfunction]
#[pyo3(signature = (q, exponents = vec![4, 6, 12], method = "hurwitz"))]
fn moment_scan(q: u64, exponents: Vec<u32>, method: &str) -> PyResult<Vec<(u32, f64)>> {
    let r = moments::moment_scan(&modulus(q)?, &exponents, parse_enum("method", method)?).map_err(err)?;
    Ok(r.moments.into_iter().collect())
}

#[pyfunction]
fn large_values(q: u64, v_grid: Vec<f64>) -> PyResult<Vec<usize>> {
    let r = moments::large_value_set(&modulus(q)?, &v_grid, lfunc::LMethod::Hurwitz, false).map_err(err)?;
    Ok(r.counts)
}

#[pyfunction]
#[pyo3(signature = (q, v, delta, mode = "twelfth"))]
fn choose_factorization(q: u64, v: f64, delta: f64, mode: &str) -> PyResult<(u64, u64, u64)> {
    let f = arith::choose_factorization(&modulus(q)?, v, delta, parse_enum("mode", mode)?).map_err(err)?;
    Ok(f.parts())
}

#[pyfunction]
#[pyo3(signature = (limit, y, min_factors = 1))]
fn enumerate_smooth_squarefree(limit: u64, y: u64, min_factors: usize) -> Vec<u64> {
    arith::enumerate_smooth_squarefree(limit, y, min_factors).iter().map(arith::Modulus::q).collect()
}

#[pyfunction]
fn hurwitz_zeta(s: Complex64, a: f64) -> PyResult<Complex64> {
    lfunc::hurwitz_zeta(s, a).map_err(err)
}

/// Fitted log-log slope and intercept of (q, value) pairs.
#[pyfunction]
fn exponent_fit(points: Vec<(f64, f64)>) -> PyResult<(f64, f64)> {
    let f = moments::exponent_fit(&points).map_err(err)?;
    Ok((f.slope, f.intercept))
}

#[pyfunction]
#[pyo3(signature = (kind, moduli, theta = 0.13, delta = 0.2))]
fn audit_bound<'py>(py: Python<'py>, kind: &str, moduli: Vec<u64>, theta: f64, delta: f64) -> PyResult<Bound<'py, PyDict>> {
    let family = moduli.into_iter().map(modulus).collect::<PyResult<Vec<_>>>()?;
    let params = AuditParams { theta, delta, ..AuditParams::default() };
    let a = moments::audit_bound(&family, parse_enum("bound kind", kind)?, &params).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("predicted_exponent", a.predicted_exponent)?;
    d.set_item("fitted_exponent", a.fitted_exponent)?;
    d.set_item("rows", a.rows.iter().map(|r| (r.q, r.measured, r.predicted)).collect::<Vec<_>>())?;
    d.set_item("skipped", a.skipped.iter().map(|s| (s.q, s.reason.clone())).collect::<Vec<_>>())?;
    d.set_item("alerts", a.alerts)?;
    Ok(d)
}

#[pyfunction]
fn primitive_character_ids(q: u64) -> PyResult<Vec<String>> {
    Ok(primitive_characters(&modulus(q)?).map(|c| c.to_string()).collect())
}

#[pymodule]
fn kmoments_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModulus>()?;
    m.add_class::<PyCharacter>()?;
    m.add_function(wrap_pyfunction!(kcirc_table, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_complete, m)?)?;
    m.add_function(wrap_pyfunction!(incomplete_sum, m)?)?;
    m.add_function(wrap_pyfunction!(central_values, m)?)?;
    m.add_function(wrap_pyfunction!(moment_scan, m)?)?;
    m.add_function(wrap_pyfunction!(large_values, m)?)?;
    m.add_function(wrap_pyfunction!(choose_factorization, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_smooth_squarefree, m)?)?;
    m.add_function(wrap_pyfunction!(hurwitz_zeta, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_fit, m)?)?;
    m.add_function(wrap_pyfunction!(audit_bound, m)?)?;
    m.add_function(wrap_pyfunction!(primitive_character_ids, m)?)?;
    Ok(())
}
