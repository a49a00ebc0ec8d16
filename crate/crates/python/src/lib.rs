//! Python bindings. Index sets are one-based, as in kernel files.

use std::collections::BTreeMap;

use chaoslab_core::bounds::{
    dejong_bound, gamma_m, integral_bounds, kolmogorov_constants, wasserstein_constants,
};
use chaoslab_core::construct::{biased_counterexample, symmetric_counterexample, Branch};
use chaoslab_core::distance::exact_distances;
use chaoslab_core::io::{kernel_to_json, parse_kernel};
use chaoslab_core::moments::{fourth_moment as fourth, Engine};
use chaoslab_core::{ChaosError, ChaosVector, Kernel, RademacherModel};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: ChaosError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Model", frozen, module = "chaoslab")]
struct PyModel(RademacherModel);

#[pymethods]
impl PyModel {
    #[new]
    fn new(probs: Vec<f64>) -> PyResult<Self> {
        RademacherModel::new(probs).map(PyModel).map_err(err)
    }

    #[staticmethod]
    fn symmetric(n: usize) -> Self {
        PyModel(RademacherModel::symmetric(n))
    }

    #[staticmethod]
    fn homogeneous(p: f64, n: usize) -> PyResult<Self> {
        RademacherModel::homogeneous(p, n).map(PyModel).map_err(err)
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.0.horizon()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.0.probs().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Model(probs={:?})", self.0.probs())
    }
}

#[pyclass(name = "Kernel", frozen, module = "chaoslab")]
struct PyKernel(Kernel);

#[pymethods]
impl PyKernel {
    /// `entries` is a list of `(index_set, value)` with one-based indices.
    #[new]
    fn new(m: usize, n: usize, entries: Vec<(Vec<usize>, f64)>) -> PyResult<Self> {
        let mut zero_based = Vec::with_capacity(entries.len());
        for (set, v) in entries {
            if set.contains(&0) {
                return Err(PyValueError::new_err("indices are one-based"));
            }
            zero_based.push((set.into_iter().map(|i| i - 1).collect::<Vec<_>>(), v));
        }
        Kernel::from_entries(m, n, zero_based)
            .map(PyKernel)
            .map_err(err)
    }

    /// Parses a kernel file; returns the kernel and the embedded model, if any.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<(Self, Option<PyModel>)> {
        let (k, m) = parse_kernel(text).map_err(err)?;
        Ok((PyKernel(k), m.map(PyModel)))
    }

    #[pyo3(signature = (model = None))]
    fn to_json(&self, model: Option<PyRef<'_, PyModel>>) -> String {
        kernel_to_json(&self.0, model.as_ref().map(|m| &m.0), None)
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.0.horizon()
    }

    fn entries(&self) -> Vec<(Vec<usize>, f64)> {
        self.0
            .entries()
            .map(|(s, v)| (s.indices().into_iter().map(|i| i + 1).collect(), v))
            .collect()
    }

    fn second_moment(&self) -> f64 {
        self.0.second_moment()
    }

    fn influences(&self) -> Vec<f64> {
        self.0.influences()
    }

    fn sup_influence(&self) -> f64 {
        self.0.sup_influence()
    }

    fn normalized(&self) -> PyResult<Self> {
        self.0.normalized().map(PyKernel).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Kernel(m={}, n={}, support={})",
            self.0.order(),
            self.0.horizon(),
            self.0.support_len()
        )
    }
}

/// Values of `J_m(f)` on every outcome, indexed by sign bit mask.
#[pyfunction]
fn values(kernel: PyRef<'_, PyKernel>, model: PyRef<'_, PyModel>) -> PyResult<Vec<f64>> {
    let t = ChaosVector::integral(&kernel.0)
        .to_table(&model.0)
        .map_err(err)?;
    Ok(t.values().to_vec())
}

#[pyfunction]
#[pyo3(signature = (kernel, model, engine = "enumerate"))]
fn fourth_moment(
    kernel: PyRef<'_, PyKernel>,
    model: PyRef<'_, PyModel>,
    engine: &str,
) -> PyResult<f64> {
    let e = match engine {
        "enumerate" => Engine::Enumerate,
        "factorized" => Engine::Factorized,
        "symmetric-fast" => Engine::SymmetricFast,
        other => return Err(PyValueError::new_err(format!("unknown engine {other:?}"))),
    };
    fourth(&kernel.0, &model.0, e).map_err(err)
}

#[pyfunction]
fn distances(
    kernel: PyRef<'_, PyKernel>,
    model: PyRef<'_, PyModel>,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let t = ChaosVector::integral(&kernel.0)
        .to_table(&model.0)
        .map_err(err)?;
    let d = exact_distances(&t, &model.0).map_err(err)?;
    Ok(BTreeMap::from([
        ("kolmogorov", d.kolmogorov),
        ("kolmogorov_at", d.kolmogorov_at),
        ("wasserstein", d.wasserstein),
    ]))
}

/// Both bounds with their terms, keyed `wasserstein`, `kolmogorov`,
/// `wasserstein.moment_term` and so on.
#[pyfunction]
fn bounds(
    kernel: PyRef<'_, PyKernel>,
    model: PyRef<'_, PyModel>,
) -> PyResult<BTreeMap<String, f64>> {
    let (w, k) = integral_bounds(&kernel.0, &model.0).map_err(err)?;
    let mut out = BTreeMap::new();
    for (name, b) in [("wasserstein", w), ("kolmogorov", k)] {
        out.insert(name.to_string(), b.value);
        for (t, v) in b.terms {
            out.insert(format!("{name}.{t}"), v);
        }
    }
    Ok(out)
}

#[pyfunction]
fn constants(m: usize) -> BTreeMap<&'static str, f64> {
    let w = wasserstein_constants(m);
    let k = kolmogorov_constants(m);
    BTreeMap::from([
        ("gamma", gamma_m(m)),
        ("C1", w.c1),
        ("C2", w.c2),
        ("K1", k.k1),
        ("K2", k.k2),
        ("K3", k.k3),
        ("K4", k.k4),
    ])
}

#[pyfunction]
#[pyo3(signature = (m, branch = "upper"))]
fn biased(m: usize, branch: &str) -> PyResult<(PyKernel, PyModel)> {
    let b = match branch {
        "upper" => Branch::Upper,
        "lower" => Branch::Lower,
        other => return Err(PyValueError::new_err(format!("unknown branch {other:?}"))),
    };
    let (f, model) = biased_counterexample(m, b).map_err(err)?;
    Ok((PyKernel(f), PyModel(model)))
}

/// Returns the kernel, its symmetric model and the bisection parameter.
#[pyfunction]
#[pyo3(signature = (m, n, tol = 1e-13))]
fn symmetric(m: usize, n: usize, tol: f64) -> PyResult<(PyKernel, PyModel, f64)> {
    let c = symmetric_counterexample(m, n, tol).map_err(err)?;
    let model = c.model();
    Ok((PyKernel(c.kernel), PyModel(model), c.theta))
}

#[pyfunction]
#[pyo3(signature = (kernel, model, kappa = 1.0))]
fn dejong(
    kernel: PyRef<'_, PyKernel>,
    model: PyRef<'_, PyModel>,
    kappa: f64,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let t = ChaosVector::integral(&kernel.0)
        .to_table(&model.0)
        .map_err(err)?;
    let r = dejong_bound(&t, &model.0, kappa).map_err(err)?;
    Ok(BTreeMap::from([
        ("order", r.order as f64),
        ("rho_squared", r.rho_squared),
        ("fourth_moment", r.fourth_moment),
        ("moment_term", r.moment_term),
        ("rho_term", r.rho_term),
        ("bound", r.value),
    ]))
}

#[pymodule]
fn chaoslab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyKernel>()?;
    m.add_function(wrap_pyfunction!(values, m)?)?;
    m.add_function(wrap_pyfunction!(fourth_moment, m)?)?;
    m.add_function(wrap_pyfunction!(distances, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(biased, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(dejong, m)?)?;
    Ok(())
}
