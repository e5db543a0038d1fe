//! Python bindings: load a model, then classify, count or check its
//! bounded counterexamples.

use cexclass::classify::{classify, ClassifyConfig, ClassifyError};
use cexclass::cli::trace_report;
use cexclass::corpus;
use cexclass::factgen::FactConfig;
use cexclass::kernel::{Property, Trace};
use cexclass::modelparse::{parse_constraints, parse_library, parse_model, Model as CoreModel};
use cexclass::verifier::{Bound as Limit, ConstraintSet, Verifier};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

create_exception!(cexclass_py, ParseError, PyException, "A model, library or constraint failed to parse.");
create_exception!(
    cexclass_py,
    InsufficientPredicates,
    PyException,
    "The predicates cannot characterize some counterexample; `args[1]` is that trace."
);

fn bound(n: usize, exact: bool) -> Limit {
    if exact {
        Limit::exact(n)
    } else {
        Limit::upto(n)
    }
}

/// A trace as a list of `{variable: rendered value}` dicts.
fn trace_list<'py>(py: Python<'py>, m: &CoreModel, t: &Trace) -> PyResult<Bound<'py, PyList>> {
    let r = trace_report(&m.system.sig, t);
    let states = PyList::empty(py);
    for s in r.states {
        let d = PyDict::new(py);
        for a in s {
            d.set_item(a.var, a.value)?;
        }
        states.append(d)?;
    }
    Ok(states)
}

/// A parsed model with its predicate libraries applied.
#[pyclass(name = "Model", module = "cexclass_py", frozen)]
struct Model {
    inner: CoreModel,
}

impl Model {
    fn property(&self, name: Option<&str>) -> PyResult<Property> {
        match name {
            Some(n) => self.inner.property(n).map_err(|e| PyKeyError::new_err(e.to_string())),
            None => Ok(self.inner.default_property()),
        }
    }
}

#[pymethods]
impl Model {
    /// Parses model source and applies library sources in order.
    #[new]
    #[pyo3(signature = (source, libraries = Vec::new()))]
    fn new(source: &str, libraries: Vec<String>) -> PyResult<Self> {
        let mut m = parse_model(source).map_err(|e| ParseError::new_err(e.to_string()))?;
        for lib in &libraries {
            m = parse_library(lib, &m).map_err(|e| ParseError::new_err(e.to_string()))?;
        }
        Ok(Model { inner: m })
    }

    /// A bundled model: one of `corpus_names()`.
    #[staticmethod]
    fn corpus(name: &str) -> PyResult<Self> {
        let e = corpus::load_corpus(name).map_err(|e| PyKeyError::new_err(e.to_string()))?;
        Ok(Model { inner: e.model })
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.inner.system.sig.vars.iter().map(|v| v.name.clone()).collect()
    }

    #[getter]
    fn properties(&self) -> Vec<String> {
        self.inner.properties.iter().map(|p| p.name.clone()).collect()
    }

    #[getter]
    fn predicates(&self) -> Vec<String> {
        self.inner.predicates.iter().map(|p| p.name.clone()).collect()
    }

    /// Number of traces of length at most `bound` violating the property.
    #[pyo3(signature = (bound, property = None, exact = false))]
    fn count(&self, bound: usize, property: Option<&str>, exact: bool) -> PyResult<u64> {
        let prop = self.property(property)?;
        Verifier::new(&self.inner.system)
            .count_counterexamples(&prop, self::bound(bound, exact))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// The first counterexample not matching any blocked constraint, or
    /// `None` when the property holds.
    #[pyo3(signature = (bound, property = None, block = Vec::new(), exact = false))]
    fn check<'py>(
        &self,
        py: Python<'py>,
        bound: usize,
        property: Option<&str>,
        block: Vec<String>,
        exact: bool,
    ) -> PyResult<Option<Bound<'py, PyList>>> {
        let prop = self.property(property)?;
        let mut ws = Vec::new();
        for src in &block {
            ws.extend(parse_constraints(src, &self.inner).map_err(|e| ParseError::new_err(e.to_string()))?);
        }
        let out = Verifier::new(&self.inner.system)
            .verify(&ConstraintSet::blocking(ws), &prop, self::bound(bound, exact))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        out.witness().map(|t| trace_list(py, &self.inner, &t)).transpose()
    }

    /// Classifies the bounded counterexamples. Returns one dict per class
    /// with `constraint`, `representative` and `witness` keys.
    #[pyo3(signature = (bound, preds = vec!["generic".to_string()], property = None, seed = None,
                        keep_seeded = false, exact = false, max_arity = 3, eq_window = Some(12)))]
    #[allow(clippy::too_many_arguments)]
    fn classify<'py>(
        &self,
        py: Python<'py>,
        bound: usize,
        preds: Vec<String>,
        property: Option<&str>,
        seed: Option<String>,
        keep_seeded: bool,
        exact: bool,
        max_arity: usize,
        eq_window: Option<usize>,
    ) -> PyResult<Bound<'py, PyList>> {
        let prop = self.property(property)?;
        let ps = self
            .inner
            .predicate_set(&preds)
            .map_err(|e| PyKeyError::new_err(e.to_string()))?;
        let mut cfg = ClassifyConfig::new(self::bound(bound, exact));
        cfg.seed = seed;
        cfg.keep_seeded = keep_seeded;
        cfg.facts = FactConfig { max_arity, eq_window };
        let v = Verifier::new(&self.inner.system);
        let c = match classify(&v, &prop, &ps, &cfg) {
            Ok(c) => c,
            Err(e @ ClassifyError::InsufficientPredicates { .. }) => {
                let ClassifyError::InsufficientPredicates { trace, .. } = &e else { unreachable!() };
                let t = trace_list(py, &self.inner, trace)?;
                return Err(InsufficientPredicates::new_err((e.to_string(), t.unbind())));
            }
            Err(e @ ClassifyError::UnknownSeed(_)) => return Err(PyKeyError::new_err(e.to_string())),
            Err(e @ ClassifyError::NoAcceptingTrace) => return Err(PyValueError::new_err(e.to_string())),
            Err(e) => return Err(PyRuntimeError::new_err(e.to_string())),
        };
        let sig = &self.inner.system.sig;
        let out = PyList::empty(py);
        for k in &c.classes {
            let d = PyDict::new(py);
            d.set_item("constraint", k.constraint.render(sig))?;
            d.set_item("representative", trace_list(py, &self.inner, &k.representative)?)?;
            let w = k
                .canonical_witness
                .as_ref()
                .map(|t| trace_list(py, &self.inner, t))
                .transpose()?;
            d.set_item("witness", w)?;
            out.append(d)?;
        }
        Ok(out)
    }
}

#[pyfunction]
fn corpus_names() -> Vec<&'static str> {
    corpus::NAMES.to_vec()
}

/// Runs the command line with `args` (without the program name) and
/// returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cexclass".to_string()).chain(args);
    let code = cexclass::cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

#[pymodule]
pub fn cexclass_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(corpus_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("InsufficientPredicates", m.py().get_type::<InsufficientPredicates>())?;
    Ok(())
}
