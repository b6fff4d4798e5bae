use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use modckt::acc0::{synth_modm_function, synth_symmetric_acc, AccParams};
use modckt::arith::factorize;
use modckt::cc0::{self, DepthdOptions, SymFnSpec};
use modckt::circuit::netlist::{parse_netlist, serialize_netlist};
use modckt::verify::{self, VerifyOptions};

fn err(e: modckt::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A symmetric Boolean function `f(x) = g[|x|]`.
#[pyclass(name = "SymFn", module = "modckt_py", frozen)]
#[derive(Clone)]
struct PySymFn {
    inner: SymFnSpec,
}

#[pymethods]
impl PySymFn {
    /// `selector` is one of maj, parity, mod:M, exact:T.
    #[new]
    fn new(selector: &str, n: usize) -> PyResult<Self> {
        Ok(PySymFn {
            inner: SymFnSpec::from_selector(selector, n).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_companion(companion: Vec<bool>) -> PyResult<Self> {
        Ok(PySymFn {
            inner: SymFnSpec::custom(companion).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn companion(&self) -> Vec<bool> {
        self.inner.companion.clone()
    }

    fn __call__(&self, x: Vec<bool>) -> PyResult<bool> {
        verify::oracle_eval(&self.inner, &x).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("SymFn({}, n={})", self.inner.name, self.inner.n)
    }
}

#[pyclass(name = "Circuit", module = "modckt_py", frozen)]
struct PyCircuit {
    inner: modckt::Circuit,
}

#[pymethods]
impl PyCircuit {
    #[staticmethod]
    fn from_netlist(text: &str) -> PyResult<Self> {
        Ok(PyCircuit {
            inner: parse_netlist(text).map_err(err)?,
        })
    }

    fn to_netlist(&self) -> String {
        serialize_netlist(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    /// `x` is a list of bools or a bitstring `x0 x1 ...`.
    fn evaluate(&self, x: &Bound<'_, PyAny>) -> PyResult<bool> {
        let bits = match x.extract::<String>() {
            Ok(s) => verify::parse_bitstring(&s).map_err(err)?,
            Err(_) => x.extract::<Vec<bool>>()?,
        };
        self.inner.evaluate(&bits).map_err(err)
    }

    fn metrics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let m = self.inner.metrics();
        let d = PyDict::new_bound(py);
        d.set_item("total_gates", m.total_gates)?;
        d.set_item("total_wires", m.total_wires)?;
        d.set_item("depth", m.depth)?;
        d.set_item("layer_shape", m.shape_string())?;
        d.set_item("max_fanin_by_layer", m.max_fanin_by_layer.clone())?;
        d.set_item("gate_count_by_kind", m.gate_count_by_kind.clone())?;
        Ok(d)
    }

    /// Exhaustive check unless `samples` is given.
    #[pyo3(signature = (spec, samples=None, seed=0, threads=1))]
    fn verify(&self, spec: &PySymFn, samples: Option<usize>, seed: u64, threads: usize) -> PyResult<(bool, String)> {
        let opts = match samples {
            Some(s) => VerifyOptions::sampled(s, seed),
            None => VerifyOptions::default(),
        }
        .with_threads(threads);
        let r = verify::check_equiv(&self.inner, &spec.inner, &opts).map_err(err)?;
        Ok((r.passed(), r.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Circuit(n={}, gates={})", self.inner.n(), self.inner.len())
    }
}

fn wrap(c: modckt::Result<modckt::Circuit>) -> PyResult<PyCircuit> {
    Ok(PyCircuit { inner: c.map_err(err)? })
}

/// `MOD_2 ∘ MOD_{m'} ∘ MOD_2` with the first `k − 1` odd primes.
#[pyfunction]
#[pyo3(signature = (spec, k=3))]
fn synth_depth3(spec: &PySymFn, k: usize) -> PyResult<PyCircuit> {
    wrap(cc0::synth_depth3(&spec.inner, k))
}

/// `MOD_5 ∘ MOD_6 ∘ MOD_5`.
#[pyfunction]
fn synth_depth3_preset31(spec: &PySymFn) -> PyResult<PyCircuit> {
    wrap(cc0::synth_depth3_preset31(&spec.inner))
}

#[pyfunction]
#[pyo3(signature = (spec, m, depth, share=false))]
fn synth_depthd(spec: &PySymFn, m: u64, depth: usize, share: bool) -> PyResult<PyCircuit> {
    wrap(cc0::synth_depthd(&spec.inner, m, depth, DepthdOptions { share }))
}

#[pyfunction]
#[pyo3(signature = (spec, m=42, depth=4))]
fn synth_acc(spec: &PySymFn, m: u64, depth: usize) -> PyResult<PyCircuit> {
    let params = AccParams::new(m, depth, spec.inner.n).map_err(err)?;
    wrap(synth_symmetric_acc(&spec.inner, &params))
}

/// `[|x| ≡ 0 mod m]` with an AND output gate.
#[pyfunction]
#[pyo3(signature = (n, m, depth=4))]
fn synth_modm(n: usize, m: u64, depth: usize) -> PyResult<PyCircuit> {
    wrap(synth_modm_function(n, &factorize(m), depth))
}

/// Exact `(gates, wires)` of `synth_depth3` without building it.
#[pyfunction]
#[pyo3(signature = (spec, k=3))]
fn count_depth3(spec: &PySymFn, k: usize) -> PyResult<(num_bigint::BigUint, num_bigint::BigUint)> {
    let c = verify::count_depth3(&spec.inner, k).map_err(err)?;
    Ok((c.gates, c.wires))
}

#[pymodule]
fn modckt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySymFn>()?;
    m.add_class::<PyCircuit>()?;
    m.add_function(wrap_pyfunction!(synth_depth3, m)?)?;
    m.add_function(wrap_pyfunction!(synth_depth3_preset31, m)?)?;
    m.add_function(wrap_pyfunction!(synth_depthd, m)?)?;
    m.add_function(wrap_pyfunction!(synth_acc, m)?)?;
    m.add_function(wrap_pyfunction!(synth_modm, m)?)?;
    m.add_function(wrap_pyfunction!(count_depth3, m)?)?;
    Ok(())
}
