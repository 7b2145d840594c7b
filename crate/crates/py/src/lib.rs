//! Python bindings. Symbols cross the boundary as field-element indices
//! (plain ints); structured reports come back as dicts.

use frb_core::analysis::{self, Family};
use frb_core::designs::{self, Design};
use frb_core::dss::{self, StorageSystem};
use frb_core::gf::{self, FieldElement};
use frb_core::incidence::BinaryIncidenceMatrix;
use frb_core::mds::MdsCode;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializes through JSON into native Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn elements(field: &gf::Field, xs: &[u32]) -> PyResult<Vec<FieldElement>> {
    xs.iter().map(|&x| field.element(x).map_err(err)).collect()
}

fn indices(xs: &[FieldElement]) -> Vec<u32> {
    xs.iter().map(|x| x.index()).collect()
}

#[pyclass(name = "Field", module = "frbcodes", frozen)]
struct PyField(gf::Field);

#[pymethods]
impl PyField {
    #[new]
    fn new(q: u64) -> PyResult<Self> {
        gf::Field::new(q).map(PyField).map_err(err)
    }

    #[getter]
    fn order(&self) -> u32 {
        self.0.order()
    }

    #[getter]
    fn characteristic(&self) -> u32 {
        self.0.characteristic()
    }

    /// Low-order coefficients of the modulus (leading 1 omitted).
    #[getter]
    fn modulus(&self) -> Vec<u32> {
        self.0.spec().modulus.clone()
    }

    fn add(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self
            .0
            .add(
                self.0.element(a).map_err(err)?,
                self.0.element(b).map_err(err)?,
            )
            .index())
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self
            .0
            .mul(
                self.0.element(a).map_err(err)?,
                self.0.element(b).map_err(err)?,
            )
            .index())
    }

    fn inv(&self, a: u32) -> PyResult<u32> {
        Ok(self
            .0
            .inv(self.0.element(a).map_err(err)?)
            .map_err(err)?
            .index())
    }

    fn pow(&self, a: u32, e: u64) -> PyResult<u32> {
        Ok(self.0.pow(self.0.element(a).map_err(err)?, e).index())
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.0.order())
    }
}

#[pyclass(name = "IncidenceMatrix", module = "frbcodes", frozen)]
struct PyMatrix(BinaryIncidenceMatrix);

#[pymethods]
impl PyMatrix {
    /// `rows[i]` lists the symbols stored on node `i`.
    #[new]
    fn new(n: usize, theta: usize, rows: Vec<Vec<usize>>) -> PyResult<Self> {
        BinaryIncidenceMatrix::from_row_supports(n, theta, rows)
            .map(PyMatrix)
            .map_err(err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        BinaryIncidenceMatrix::read_text(text)
            .map(PyMatrix)
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        BinaryIncidenceMatrix::read_json(text)
            .map(PyMatrix)
            .map_err(err)
    }

    fn to_text(&self) -> String {
        self.0.write_text()
    }

    fn to_json(&self) -> String {
        self.0.write_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn theta(&self) -> usize {
        self.0.theta()
    }

    fn rows(&self) -> Vec<Vec<usize>> {
        self.0.row_supports().iter().map(|r| r.to_vec()).collect()
    }

    fn cols(&self) -> Vec<Vec<usize>> {
        self.0.col_supports().iter().map(|c| c.to_vec()).collect()
    }

    /// `(alpha, rho)`: the common row and column weights, or None if not uniform.
    fn weights(&self) -> (Option<usize>, Option<usize>) {
        let w = self.0.weights();
        (w.alpha, w.rho)
    }

    fn cover_rows(&self, cols: Vec<usize>) -> PyResult<Vec<usize>> {
        self.0.cover_rows(&cols).map(|s| s.to_vec()).map_err(err)
    }

    fn cover_cols(&self, rows: Vec<usize>) -> PyResult<Vec<usize>> {
        self.0.cover_cols(&rows).map(|s| s.to_vec()).map_err(err)
    }

    fn transpose(&self) -> Self {
        PyMatrix(self.0.transpose())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!(
            "IncidenceMatrix(n={}, theta={})",
            self.0.n(),
            self.0.theta()
        )
    }
}

#[pyclass(name = "Design", module = "frbcodes", frozen)]
struct PyDesign(Design);

#[pymethods]
impl PyDesign {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Design::from_json(text).map(PyDesign).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn incidence(&self) -> PyMatrix {
        PyMatrix(self.0.incidence())
    }

    /// Blocks (or lines) as lists of point ids.
    fn blocks(&self) -> Vec<Vec<usize>> {
        match &self.0 {
            Design::Td(td) => td.blocks.clone(),
            Design::Affine(ap) => ap.lines.clone(),
        }
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.validate())
    }
}

#[pyfunction]
fn transversal_design(ell: usize, h: usize) -> PyResult<PyDesign> {
    designs::build_td(ell, h)
        .map(|td| PyDesign(Design::Td(td)))
        .map_err(err)
}

#[pyfunction]
fn affine_plane(q: usize) -> PyResult<PyDesign> {
    designs::build_affine(q)
        .map(|ap| PyDesign(Design::Affine(ap)))
        .map_err(err)
}

#[pyfunction]
fn file_size(m: &PyMatrix, k: usize) -> PyResult<usize> {
    analysis::file_size(&m.0, k).map_err(err)
}

/// `{t, exact, witness}` for delta = 0.
#[pyfunction]
fn batch_t<'py>(py: Python<'py>, m: &PyMatrix) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &analysis::batch_t(&m.0).map_err(err)?)
}

#[pyfunction]
fn ecbc_t<'py>(py: Python<'py>, m: &PyMatrix, delta: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &analysis::ecbc_t(&m.0, delta).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (m, delta=0, max_size=None))]
fn batch_t_oracle<'py>(
    py: Python<'py>,
    m: &PyMatrix,
    delta: usize,
    max_size: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let max = max_size.unwrap_or(m.0.theta());
    to_py(py, &analysis::batch_t_oracle(&m.0, delta, max))
}

/// Full parameter report; `family` is one of td2, td3, tdres, affine.
#[pyfunction]
#[pyo3(signature = (m, family=None, param=None, ks=None, deltas=None))]
fn verify_code<'py>(
    py: Python<'py>,
    m: &PyMatrix,
    family: Option<&str>,
    param: Option<usize>,
    ks: Option<Vec<usize>>,
    deltas: Option<Vec<usize>>,
) -> PyResult<Bound<'py, PyAny>> {
    let family = match (family, param) {
        (None, _) => None,
        (Some(f), Some(p)) => Some((f.parse::<Family>().map_err(err)?, p)),
        (Some(_), None) => return Err(PyValueError::new_err("family needs param")),
    };
    let ks = ks.unwrap_or_else(|| (1..=m.0.n()).collect());
    let report =
        analysis::verify_code(&m.0, family, &ks, &deltas.unwrap_or_default()).map_err(err)?;
    to_py(py, &report)
}

#[pyclass(name = "MdsCode", module = "frbcodes", frozen)]
struct PyMds(MdsCode);

#[pymethods]
impl PyMds {
    /// Systematic Reed-Solomon code of length `theta` and dimension `m`.
    #[new]
    #[pyo3(signature = (theta, m, q=None))]
    fn new(theta: usize, m: usize, q: Option<u64>) -> PyResult<Self> {
        match q {
            Some(q) => MdsCode::new(theta, m, q),
            None => MdsCode::with_default_field(theta, m),
        }
        .map(PyMds)
        .map_err(err)
    }

    #[getter]
    fn theta(&self) -> usize {
        self.0.theta()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    #[getter]
    fn q(&self) -> u32 {
        self.0.field().order()
    }

    fn encode(&self, file: Vec<u32>) -> PyResult<Vec<u32>> {
        let file = elements(self.0.field(), &file)?;
        Ok(indices(&self.0.encode(&file).map_err(err)?))
    }

    /// Recovers the file from `(position, symbol)` pairs.
    fn decode(&self, known: Vec<(usize, u32)>) -> PyResult<Vec<u32>> {
        let known = known
            .into_iter()
            .map(|(j, s)| Ok((j, self.0.field().element(s).map_err(err)?)))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(indices(&self.0.decode_erasures(&known).map_err(err)?))
    }
}

#[pyfunction]
#[pyo3(signature = (q, m, seed=0))]
fn random_file(q: u64, m: usize, seed: u64) -> PyResult<Vec<u32>> {
    Ok(indices(&dss::random_file(q, m, seed).map_err(err)?))
}

#[pyclass(name = "StorageSystem", module = "frbcodes")]
struct PyStorage(StorageSystem);

#[pymethods]
impl PyStorage {
    /// Encodes `file` (field-element indices) and places it on `layout`.
    #[new]
    #[pyo3(signature = (file, layout, q=None))]
    fn new(file: Vec<u32>, layout: &PyMatrix, q: Option<u64>) -> PyResult<Self> {
        let order = q.unwrap_or_else(|| frb_core::mds::default_field_order(layout.0.theta()));
        let field = gf::Field::new(order).map_err(err)?;
        let file = elements(&field, &file)?;
        StorageSystem::store(&file, layout.0.clone(), Some(order))
            .map(PyStorage)
            .map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn codeword(&self) -> Vec<u32> {
        indices(self.0.codeword())
    }

    /// `(position, symbol)` pairs on `node`, or None while it is failed.
    fn node_contents(&self, node: usize) -> Option<Vec<(usize, u32)>> {
        self.0
            .node_contents(node)
            .map(|c| c.iter().map(|&(j, s)| (j, s.index())).collect())
    }

    fn failed(&self) -> Vec<usize> {
        self.0.failed()
    }

    fn fail_node(&mut self, node: usize) -> PyResult<()> {
        self.0.fail_node(node).map_err(err)
    }

    fn reconstruct(&self, nodes: Vec<usize>) -> PyResult<Vec<u32>> {
        Ok(indices(&self.0.reconstruct(&nodes).map_err(err)?))
    }

    fn repair<'py>(&mut self, py: Python<'py>, node: usize) -> PyResult<Bound<'py, PyAny>> {
        let plan = self.0.repair(node).map_err(err)?;
        to_py(py, &plan)
    }

    /// `{symbol: node}` for a request served one symbol per node.
    #[pyo3(signature = (request, failed=vec![]))]
    fn serve_batch<'py>(
        &self,
        py: Python<'py>,
        request: Vec<usize>,
        failed: Vec<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let a = self.0.serve_batch(&request, &failed).map_err(err)?;
        to_py(
            py,
            &a.assignment
                .into_iter()
                .collect::<std::collections::BTreeMap<_, _>>(),
        )
    }

    #[pyo3(signature = (t, delta=0, budget=None, seed=0))]
    fn failure_sweep<'py>(
        &self,
        py: Python<'py>,
        t: usize,
        delta: usize,
        budget: Option<u64>,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.failure_sweep(t, delta, budget, seed))
    }

    #[pyo3(signature = (file, k, budget=None, seed=0))]
    fn reconstruct_sweep<'py>(
        &self,
        py: Python<'py>,
        file: Vec<u32>,
        k: usize,
        budget: Option<u64>,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let file = elements(self.0.code().field(), &file)?;
        to_py(py, &self.0.reconstruct_sweep(&file, k, budget, seed))
    }

    fn repair_sweep<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.repair_sweep())
    }
}

#[pymodule]
fn frbcodes(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyDesign>()?;
    m.add_class::<PyMds>()?;
    m.add_class::<PyStorage>()?;
    m.add_function(wrap_pyfunction!(transversal_design, m)?)?;
    m.add_function(wrap_pyfunction!(affine_plane, m)?)?;
    m.add_function(wrap_pyfunction!(file_size, m)?)?;
    m.add_function(wrap_pyfunction!(batch_t, m)?)?;
    m.add_function(wrap_pyfunction!(ecbc_t, m)?)?;
    m.add_function(wrap_pyfunction!(batch_t_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(verify_code, m)?)?;
    m.add_function(wrap_pyfunction!(random_file, m)?)?;
    Ok(())
}
