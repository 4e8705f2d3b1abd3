//! Python bindings: Witt arithmetic, censuses, admissible sets and the CLI.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use wd_core::adm;
use wd_core::census::{self, CensusJson, CensusParams, StackContext};
use wd_core::display::DEFAULT_BUDGET;
use wd_core::poly::StructurePolys;
use wd_core::ring::{make_ring, BaseRing, RingDescriptor};
use wd_core::witt::{WittRing, WittVector};

create_exception!(wdisplays, WdError, PyException, "A domain error from wd-core; the message starts with its name.");

fn err(e: wd_core::Error) -> PyErr {
    WdError::new_err(e.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("outputs serialize")
}

/// W_n(R) acting on vectors given as lists of component coordinates.
#[pyclass(module = "wdisplays", frozen)]
struct Witt {
    ring: WittRing,
}

impl Witt {
    fn parse(&self, x: Vec<Vec<i64>>) -> PyResult<WittVector> {
        self.ring.from_coords(&x).map_err(err)
    }

    fn out(&self, x: &WittVector) -> Vec<Vec<u32>> {
        self.ring.to_json(x).comps
    }
}

#[pymethods]
impl Witt {
    /// W_n(F_{p^f}).
    #[new]
    #[pyo3(signature = (p, n, f = 1))]
    fn new(p: u32, n: usize, f: u32) -> PyResult<Self> {
        let k = if f == 1 { BaseRing::prime(p) } else { BaseRing::galois(p, f) }.map_err(err)?;
        Ok(Witt { ring: WittRing::new(k, n).map_err(err)? })
    }

    /// W_n(R) for R given by a JSON ring descriptor.
    #[staticmethod]
    fn from_descriptor(descriptor: &str, n: usize) -> PyResult<Self> {
        let d: RingDescriptor = serde_json::from_str(descriptor).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let r = make_ring(&d).map_err(err)?;
        Ok(Witt { ring: WittRing::new(r, n).map_err(err)? })
    }

    #[getter]
    fn length(&self) -> usize {
        self.ring.len()
    }

    #[getter]
    fn p(&self) -> u32 {
        self.ring.p()
    }

    fn add(&self, x: Vec<Vec<i64>>, y: Vec<Vec<i64>>) -> PyResult<Vec<Vec<u32>>> {
        Ok(self.out(&self.ring.add(&self.parse(x)?, &self.parse(y)?)))
    }

    fn mul(&self, x: Vec<Vec<i64>>, y: Vec<Vec<i64>>) -> PyResult<Vec<Vec<u32>>> {
        Ok(self.out(&self.ring.mul(&self.parse(x)?, &self.parse(y)?)))
    }

    fn neg(&self, x: Vec<Vec<i64>>) -> PyResult<Vec<Vec<u32>>> {
        Ok(self.out(&self.ring.neg(&self.parse(x)?)))
    }

    #[pyo3(name = "from_int")]
    fn integer(&self, k: i64) -> Vec<Vec<u32>> {
        self.out(&self.ring.from_int(k))
    }

    fn teichmuller(&self, a: Vec<i64>) -> PyResult<Vec<Vec<u32>>> {
        let r = self.ring.base().from_coords(&a).map_err(err)?;
        Ok(self.out(&self.ring.teichmuller(&r)))
    }

    /// Ghost components, as coordinates in R.
    fn ghost(&self, x: Vec<Vec<i64>>) -> PyResult<Vec<Vec<u32>>> {
        let base = self.ring.base();
        Ok(self.ring.ghost(&self.parse(x)?).iter().map(|c| base.coords(c)).collect())
    }

    /// σ into W_{n−1}.
    fn frobenius(&self, x: Vec<Vec<i64>>) -> PyResult<Vec<Vec<u32>>> {
        let target = self.ring.with_len(self.ring.len().saturating_sub(1)).map_err(err)?;
        let y = self.ring.frobenius(&self.parse(x)?, &target).map_err(err)?;
        Ok(target.to_json(&y).comps)
    }

    /// V from W_{n−1}; the input is truncated to n − 1 components.
    fn verschiebung(&self, y: Vec<Vec<i64>>) -> PyResult<Vec<Vec<u32>>> {
        Ok(self.out(&self.ring.verschiebung(&self.parse(y)?)))
    }

    /// σ^div into W_{n−1} on the augmentation ideal.
    fn divided_frobenius(&self, x: Vec<Vec<i64>>) -> PyResult<Vec<Vec<u32>>> {
        let target = self.ring.with_len(self.ring.len().saturating_sub(1)).map_err(err)?;
        let y = self.ring.divided_frobenius(&self.parse(x)?, &target).map_err(err)?;
        Ok(target.to_json(&y).comps)
    }

    fn __repr__(&self) -> String {
        format!("Witt(W_{}({}))", self.ring.len(), self.ring.base().label())
    }
}

/// Sum, product and Frobenius polynomials as JSON.
#[pyfunction]
fn witt_polys(p: u32, depth: usize) -> PyResult<String> {
    Ok(to_json(&StructurePolys::generate(p, depth).map_err(err)?.export()))
}

/// Census of (m, n)-truncated displays of type (h, d) over F_{p^f}, as JSON.
#[pyfunction]
#[pyo3(signature = (h, d, p, m, n, f = 1, budget = None))]
fn run_census(h: usize, d: usize, p: u32, m: usize, n: usize, f: u32, budget: Option<u128>) -> PyResult<String> {
    let params = CensusParams { h, d, p, f, m, n };
    let c = census::run_census(params, budget.unwrap_or(DEFAULT_BUDGET)).map_err(err)?;
    let ctx = StackContext::new(params).map_err(err)?;
    Ok(to_json(&c.to_json(&ctx)))
}

/// Whether a stored census JSON passes every check, including recomputation.
#[pyfunction]
#[pyo3(signature = (census_json, budget = None))]
fn verify_census(census_json: &str, budget: Option<u128>) -> PyResult<bool> {
    let stored: CensusJson = serde_json::from_str(census_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(census::verify_census(&stored, budget.unwrap_or(DEFAULT_BUDGET)).map_err(err)?.passed())
}

/// Adm(μ_d) for GL_h as JSON (elements and covering edges).
#[pyfunction]
fn admissible_set(h: usize, d: usize) -> PyResult<String> {
    Ok(to_json(&adm::admissible_set(h, d).map_err(err)?.to_json()))
}

/// Adm(μ_d) as a Graphviz digraph.
#[pyfunction]
fn admissible_dot(h: usize, d: usize) -> PyResult<String> {
    Ok(adm::admissible_set(h, d).map_err(err)?.to_dot())
}

/// Run the `wd` command line with these arguments; returns the exit code.
#[pyfunction]
fn cli(args: Vec<String>) -> i32 {
    wd_core::cli::run(std::iter::once("wd".to_string()).chain(args))
}

#[pymodule]
pub fn wdisplays(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("WdError", m.py().get_type::<WdError>())?;
    m.add_class::<Witt>()?;
    m.add_function(wrap_pyfunction!(witt_polys, m)?)?;
    m.add_function(wrap_pyfunction!(run_census, m)?)?;
    m.add_function(wrap_pyfunction!(verify_census, m)?)?;
    m.add_function(wrap_pyfunction!(admissible_set, m)?)?;
    m.add_function(wrap_pyfunction!(admissible_dot, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
