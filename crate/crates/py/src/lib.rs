//! Python bindings: `accountable_py.Model` and a few module functions.

use std::collections::BTreeSet;

use accountable::causality::lookup_causes;
use accountable::checks::{check_all, Mode};
use accountable::dsl::{load_scenario, serialize};
use accountable::notions::{compare_notions, hall_accountable, lindberg_accountable, raci_accountable};
use accountable::relations::{constructed, informed, missed_by_ego, responsible};
use accountable::report::build_report;
use accountable::{EntityId, Model};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

fn names(set: &BTreeSet<EntityId>) -> Vec<String> {
    set.iter().map(|x| x.as_str().to_string()).collect()
}

fn id(name: &str) -> PyResult<EntityId> {
    EntityId::new(name).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn lookup<E: std::fmt::Display>(e: E) -> PyErr {
    PyKeyError::new_err(e.to_string())
}

fn mode(strict: bool) -> Mode {
    if strict {
        Mode::Strict
    } else {
        Mode::Lenient
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

/// A resolved scenario.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    /// Parses and resolves scenario text. Raises ValueError with all diagnostics.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        load_scenario(text.as_bytes())
            .map(|inner| PyModel { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        load_scenario(&bytes)
            .map(|inner| PyModel { inner })
            .map_err(|e| PyValueError::new_err(format!("{path}: {e}")))
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn components(&self) -> Vec<String> {
        names(self.inner.components())
    }

    #[getter]
    fn events(&self) -> Vec<String> {
        self.inner.events().keys().map(|e| e.as_str().to_string()).collect()
    }

    fn informed(&self, component: &str) -> PyResult<Vec<String>> {
        informed(&self.inner, &id(component)?).map(|s| names(&s)).map_err(lookup)
    }

    fn responsible(&self, component: &str) -> PyResult<Vec<String>> {
        responsible(&self.inner, &id(component)?).map(|s| names(&s)).map_err(lookup)
    }

    fn constructed(&self, component: &str) -> PyResult<Vec<String>> {
        constructed(&self.inner, &id(component)?).map(|s| names(&s)).map_err(lookup)
    }

    fn missed_by_ego(&self) -> PyResult<Vec<String>> {
        missed_by_ego(&self.inner).map(|s| names(&s)).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn hall(&self) -> Vec<String> {
        names(&hall_accountable(&self.inner))
    }

    fn lindberg(&self, component: &str) -> PyResult<Vec<String>> {
        lindberg_accountable(&self.inner, &id(component)?).map(|s| names(&s)).map_err(lookup)
    }

    /// RACI principals for an event. Uses `causes` when given, otherwise the
    /// explicit caused facts, then the structural model.
    #[pyo3(signature = (event, causes=None))]
    fn raci(&self, event: &str, causes: Option<Vec<String>>) -> PyResult<Vec<String>> {
        let e = id(event)?;
        let causes: BTreeSet<EntityId> = match causes {
            Some(list) => list.iter().map(|c| id(c)).collect::<PyResult<_>>()?,
            None => {
                let found = lookup_causes(&self.inner, &e).map_err(lookup)?;
                match found.effective() {
                    Some((set, _)) => set.clone(),
                    None => return Err(PyValueError::new_err(format!("no causal information for {event}"))),
                }
            }
        };
        raci_accountable(&self.inner, &e, &causes).map(|s| names(&s)).map_err(lookup)
    }

    /// Violations as a JSON array.
    #[pyo3(signature = (strict=false))]
    fn check(&self, strict: bool) -> String {
        to_json(&check_all(&self.inner, mode(strict)))
    }

    #[pyo3(signature = (strict=false))]
    fn report_json(&self, strict: bool) -> String {
        to_json(&build_report(&self.inner, mode(strict)))
    }

    fn compare_json(&self) -> String {
        to_json(&compare_notions(&self.inner))
    }

    fn serialize(&self) -> String {
        serialize(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Model({:?})", self.inner.name())
    }
}

/// Serializes the scenario text in canonical form.
#[pyfunction]
fn canonicalize(text: &str) -> PyResult<String> {
    Ok(PyModel::from_text(text)?.serialize())
}

#[pymodule]
fn accountable_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(canonicalize, m)?)?;
    Ok(())
}
