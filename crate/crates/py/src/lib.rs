//! Python bindings: a `PolyMap` class plus functions returning plain dicts
//! (the same JSON documents the CLI prints).

use orbitlab_core::census::{build_census, zeta_from_counts, zeta_truncation, CensusConfig};
use orbitlab_core::classify::{classify_report, DEFAULT_ETA};
use orbitlab_core::degenerate::{
    demand_schedule, persistence_count, split as split_core, DemandSequence, NormalForm,
    SplitConfig,
};
use orbitlab_core::eliminate::{eliminate as eliminate_core, lambda0_slice, GaussianRational};
use orbitlab_core::genericity::{margin_scaling, parabolic_control, run_sampler, SampleConfig};
use orbitlab_core::solver::{self, Method, SeedPlan, SolveConfig};
use orbitlab_core::{Error, Field, C64};
use pyo3::exceptions::{PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;
use serde_json::json;

fn to_pyerr(e: Error) -> PyErr {
    match e {
        Error::InvalidConfig(_)
        | Error::InvalidMap(_)
        | Error::OffUnitCircle { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonFiniteInput { .. }
        | Error::ComplexPointOnRealMap { .. }
        | Error::Unsupported(_) => PyValueError::new_err(e.to_string()),
        Error::Overflow { .. } => PyOverflowError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for orbitlab_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_pyerr)
    }
}

/// Serialize through JSON into native Python objects.
fn to_python<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn seed_plan(lower: f64, upper: f64, resolution: usize, random: usize) -> SeedPlan {
    SeedPlan {
        lower,
        upper,
        resolution,
        random,
        complex: true,
    }
}

/// A polynomial map of N variables and degree D over R or C.
#[pyclass(frozen, skip_from_py_object, name = "PolyMap", module = "orbitlab")]
#[derive(Clone)]
struct PyPolyMap {
    inner: orbitlab_core::PolyMap,
}

#[pymethods]
impl PyPolyMap {
    /// Univariate map from ascending coefficients; real unless any is complex.
    #[staticmethod]
    fn univariate(coeffs: Vec<C64>) -> PyResult<Self> {
        let inner = if coeffs.iter().all(|z| z.im == 0.0) {
            let re: Vec<f64> = coeffs.iter().map(|z| z.re).collect();
            orbitlab_core::PolyMap::univariate_real(&re)
        } else {
            orbitlab_core::PolyMap::univariate_complex(&coeffs)
        }
        .py()?;
        Ok(PyPolyMap { inner })
    }

    /// The model map `z_i -> z_i^D` on C^N.
    #[staticmethod]
    fn power_map(n: usize, degree: u32) -> PyResult<Self> {
        let inner = orbitlab_core::PolyMap::power_map(n, degree, Field::Complex).py()?;
        Ok(PyPolyMap { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = orbitlab_core::PolyMap::from_json(text).py()?;
        Ok(PyPolyMap { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.inner.degree()
    }

    #[getter]
    fn is_real(&self) -> bool {
        self.inner.field() == Field::Real
    }

    fn hash(&self) -> String {
        self.inner.hash()
    }

    fn __call__(&self, x: Vec<C64>) -> PyResult<Vec<C64>> {
        self.inner.evaluate_complexified(&x).py()
    }

    /// `(P^k(x), d_x P^k)` with the Jacobian as a list of rows.
    fn iterate(&self, x: Vec<C64>, k: usize) -> PyResult<(Vec<C64>, Vec<Vec<C64>>)> {
        let (y, j) = self.inner.iterate_complexified(&x, k).py()?;
        let n = j.dim();
        let rows = (0..n)
            .map(|r| (0..n).map(|c| j.entry(r, c)).collect())
            .collect();
        Ok((y, rows))
    }

    fn __repr__(&self) -> String {
        format!(
            "PolyMap(n={}, degree={}, field={})",
            self.inner.dim(),
            self.inner.degree(),
            if self.is_real() { "real" } else { "complex" }
        )
    }
}

fn classified_report(
    map: &orbitlab_core::PolyMap,
    k: usize,
    seed: u64,
    seed_random: usize,
) -> PyResult<solver::SolveReport> {
    let mut config = SolveConfig::default();
    if map.dim() >= 2 {
        config.method = Method::Newton {
            plan: seed_plan(-1.5, 1.5, 7, seed_random),
            rng_seed: seed,
        };
    }
    let mut report = solver::solve(map, k, &config).py()?;
    report.orbits = classify_report(map, &report, DEFAULT_ETA).py()?;
    Ok(report)
}

/// Period-k points with orbit classification.
#[pyfunction]
#[pyo3(signature = (map, k, seed=0, seed_random=200))]
fn solve<'py>(
    py: Python<'py>,
    map: &PyPolyMap,
    k: usize,
    seed: u64,
    seed_random: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| classified_report(&map.inner, k, seed, seed_random))?;
    to_python(py, &report)
}

/// Census table P_n, Q_n for n = 1..n_max, with the zeta truncation when
/// every row is exact.
#[pyfunction]
#[pyo3(signature = (map, n_max))]
fn census<'py>(py: Python<'py>, map: &PyPolyMap, n_max: usize) -> PyResult<Bound<'py, PyAny>> {
    let mut config = CensusConfig::default();
    if map.inner.dim() >= 2 {
        config.solve.fallback_plan = Some(seed_plan(-1.5, 1.5, 7, 200));
    }
    let table = build_census(&map.inner, n_max, &config).py()?;
    let zeta = zeta_truncation(&table, n_max).ok();
    to_python(py, &json!({"table": table, "zeta": zeta}))
}

/// Zeta truncation `exp(sum P_n z^n / n)` from counts `P_1..P_M`.
#[pyfunction]
fn zeta<'py>(py: Python<'py>, counts: Vec<u64>) -> PyResult<Bound<'py, PyAny>> {
    if counts.is_empty() {
        return Err(PyValueError::new_err("counts must be non-empty"));
    }
    to_python(py, &zeta_from_counts(&counts))
}

/// Exact count and hyperbolicity check for the model map `z_i -> z_i^D`.
#[pyfunction]
#[pyo3(signature = (n, degree, period, seed=0))]
fn lemma2<'py>(
    py: Python<'py>,
    n: usize,
    degree: u32,
    period: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let map = orbitlab_core::PolyMap::power_map(n, degree, Field::Complex).py()?;
    let expected = (degree as u128).pow((n * period) as u32);
    let report = py.detach(|| classified_report(&map, period, seed, 200))?;
    let min_margin = report
        .orbits
        .iter()
        .map(|o| o.margin)
        .fold(f64::INFINITY, f64::min);
    let out = json!({
        "expected": expected.to_string(),
        "found": report.points.len().to_string(),
        "isolated": report.isolated_count().to_string(),
        "all_hyperbolic": report.orbits.iter().all(|o| o.is_hyperbolic()),
        "min_margin": min_margin,
        "report": report,
    });
    to_python(py, &out)
}

/// Split the degenerate fixed point of `x + leading x^(order+1)` into
/// `count` certified hyperbolic fixed points.
#[pyfunction]
#[pyo3(signature = (order, count, leading=1.0, window=1.0, persistence=1e-3, seed=0))]
fn split<'py>(
    py: Python<'py>,
    order: u32,
    count: usize,
    leading: f64,
    window: f64,
    persistence: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let nf = NormalForm::new(order, leading, window).py()?;
    let config = SplitConfig::default();
    let plan = split_core(&nf, count, &config).py()?;
    let kept = persistence_count(&plan, persistence, seed, &config).py()?;
    let map = PyPolyMap {
        inner: plan.map.clone(),
    };
    let dict = to_python(py, &json!({"plan": plan, "persistence_count": kept}))?;
    dict.set_item("map", map)?;
    Ok(dict)
}

/// Realize `n1 * a(n1)` hyperbolic points of period dividing `n1`, for
/// `sequence` in {"one", "linear", "self_power"}.
#[pyfunction]
#[pyo3(signature = (sequence, n1, order=1, leading=1.0))]
fn schedule<'py>(
    py: Python<'py>,
    sequence: &str,
    n1: u64,
    order: u32,
    leading: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let seq = match sequence {
        "one" => DemandSequence::One,
        "linear" => DemandSequence::Linear,
        "self_power" | "self-power" => DemandSequence::SelfPower,
        other => return Err(PyValueError::new_err(format!("unknown sequence {other:?}"))),
    };
    let nf = NormalForm::new(order, leading, 1.0).py()?;
    let outcome = demand_schedule(|n| seq.value(n), n1, &nf, &SplitConfig::default()).py()?;
    to_python(py, &outcome)
}

/// Exact resultant `R(a, lambda)` eliminating `x`, and its slice at `lambda0`
/// (given as "RE,IM" with rational parts).
#[pyfunction]
#[pyo3(signature = (degree, period, lambda0="1,0"))]
fn eliminate<'py>(
    py: Python<'py>,
    degree: u32,
    period: usize,
    lambda0: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let l0 = GaussianRational::parse(lambda0).py()?;
    let (system, result) = eliminate_core(degree, period).py()?;
    let slice = lambda0_slice(&result, &l0).py()?;
    let out = json!({
        "f1": system.f1.to_text(),
        "f2": system.f2.to_text(),
        "resultant": result.resultant.to_text(),
        "degrees": result.degrees,
        "certified": result.certificate.validates(&result.resultant),
        "slice_re": slice.re.to_text(),
        "slice_im": slice.im.to_text(),
        "slice_scale": slice.scale,
        "slice_certified": slice.validates(),
    });
    to_python(py, &out)
}

/// Random-coefficient genericity sampler for N = 1 with the parabolic control.
#[pyfunction]
#[pyo3(signature = (trials=1000, seed=0, degree=2, k_max=4))]
fn sample<'py>(
    py: Python<'py>,
    trials: usize,
    seed: u64,
    degree: u32,
    k_max: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let config = SampleConfig {
        trials,
        rng_seed: seed,
        degree,
        k_max,
        planted: vec![parabolic_control()],
        ..SampleConfig::default()
    };
    let report = py.detach(|| run_sampler(&config)).py()?;
    let fit = margin_scaling(&report);
    to_python(py, &json!({"report": report, "scaling": fit}))
}

#[pymodule]
pub fn orbitlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolyMap>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(census, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(lemma2, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(schedule, m)?)?;
    m.add_function(wrap_pyfunction!(eliminate, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    Ok(())
}
