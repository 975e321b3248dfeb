//! Python bindings: a thin slice of the library for notebook-side checks.
//! Kernels and measures are opaque handles; the numerics stay in Rust.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use driftlab::config::{parse_measure, DiscretizationParams};
use driftlab::field;
use driftlab::measures::{self, make_discrete};
use driftlab::specfun::{self, BesselOrder};
use driftlab::stability;
use driftlab::{DiscreteMeasure, Error, KernelSpec};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(inner) => PyIOError::new_err(inner.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A kernel family with fixed parameters and dimension.
#[pyclass(frozen)]
struct Kernel {
    spec: KernelSpec,
}

#[pymethods]
impl Kernel {
    /// Parse a kernel expression such as `laplace(tau=1)` or
    /// `matern(nu=1.5, ell=0.7, dim=2)`.
    #[new]
    #[pyo3(signature = (text, dim=1))]
    fn new(text: &str, dim: usize) -> PyResult<Self> {
        let spec = driftlab::config::parse_kernel(text, dim).map_err(to_py)?;
        Ok(Kernel { spec })
    }

    #[staticmethod]
    #[pyo3(signature = (tau=1.0, dim=1))]
    fn laplace(tau: f64, dim: usize) -> PyResult<Self> {
        Ok(Kernel {
            spec: KernelSpec::laplace(tau, dim).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (sigma=1.0, dim=1))]
    fn gaussian(sigma: f64, dim: usize) -> PyResult<Self> {
        Ok(Kernel {
            spec: KernelSpec::gaussian(sigma, dim).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (nu, ell=1.0, dim=1))]
    fn matern(nu: f64, ell: f64, dim: usize) -> PyResult<Self> {
        Ok(Kernel {
            spec: KernelSpec::matern(nu, ell, dim).map_err(to_py)?,
        })
    }

    fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Kernel value at displacement z.
    fn eval(&self, z: Vec<f64>) -> PyResult<f64> {
        self.spec.kernel_eval(&z).map_err(to_py)
    }

    /// Companion function value at displacement z.
    fn companion(&self, z: Vec<f64>) -> PyResult<f64> {
        self.spec.companion_eval(&z).map_err(to_py)
    }

    /// Spectral density at radial frequency rho.
    fn spectral_density(&self, rho: f64) -> f64 {
        self.spec.spectral_density_radial(rho)
    }

    /// The companion constants (c1, c2, lambda0, lambda1).
    fn constants(&self) -> (f64, f64, f64, f64) {
        let k = self.spec.companion_constants();
        (k.c1, k.c2, k.lambda0, k.lambda1)
    }

    fn __repr__(&self) -> String {
        format!("Kernel({:?}, dim={})", self.spec.family(), self.spec.dim())
    }
}

/// A finite nonnegative measure given by weighted atoms.
#[pyclass(frozen)]
struct Measure {
    inner: DiscreteMeasure,
}

#[pymethods]
impl Measure {
    #[new]
    #[pyo3(signature = (atoms, weights, normalize=false))]
    fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>, normalize: bool) -> PyResult<Self> {
        Ok(Measure {
            inner: make_discrete(atoms, weights, normalize).map_err(to_py)?,
        })
    }

    /// Parse a measure expression such as `dirac(x=0)`, `power_law(m=3)`,
    /// or `satellite(base=dirac(x=0), eps=0.3, z=[8])`; densities are
    /// discretized on a radial grid of `cells` cells out to `r_max`.
    #[staticmethod]
    #[pyo3(signature = (text, dim=1, r_max=40.0, cells=400, sectors=64))]
    fn parse(text: &str, dim: usize, r_max: f64, cells: usize, sectors: usize) -> PyResult<Self> {
        let params = DiscretizationParams {
            r_max,
            cells,
            sectors,
        };
        let inner = parse_measure(text)
            .and_then(|e| e.realize(dim, &params))
            .map_err(to_py)?;
        Ok(Measure { inner })
    }

    #[staticmethod]
    fn dirac(x: Vec<f64>) -> PyResult<Self> {
        Ok(Measure {
            inner: DiscreteMeasure::dirac(&x).map_err(to_py)?,
        })
    }

    /// The mixture (1 - eps) self + eps delta_z.
    fn satellite(&self, eps: f64, z: Vec<f64>) -> PyResult<Self> {
        Ok(Measure {
            inner: measures::satellite(&self.inner, eps, &z).map_err(to_py)?,
        })
    }

    /// The scalar multiple c * self (0 < c).
    fn scaled(&self, c: f64) -> PyResult<Self> {
        Ok(Measure {
            inner: self.inner.scaled(c).map_err(to_py)?,
        })
    }

    fn atoms(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len())
            .map(|i| self.inner.atom(i).to_vec())
            .collect()
    }

    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn tail_mass_beyond(&self, radius: f64) -> f64 {
        self.inner.tail_mass_beyond(radius)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Measure({} atoms, dim={}, mass={})",
            self.inner.len(),
            self.inner.dim(),
            self.inner.total_mass()
        )
    }
}

/// Modified Bessel function of the second kind K_nu(s).
#[pyfunction]
fn bessel_k(nu: f64, s: f64) -> PyResult<f64> {
    let order = BesselOrder::new(nu).map_err(to_py)?;
    specfun::bessel_k(order, s).map_err(to_py)
}

/// Gamma function on the positive half line.
#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    specfun::gamma_fn(x).map_err(to_py)
}

/// The drifting field V_{p,q}(x) between two probability measures.
#[pyfunction]
fn drift(kernel: &Kernel, p: &Measure, q: &Measure, x: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(field::drift(&kernel.spec, &p.inner, &q.inner, &x)
        .map_err(to_py)?
        .v)
}

/// Local barycenter and kernel mass of r seen from x, as (a, u).
#[pyfunction]
fn barycenter(kernel: &Kernel, r: &Measure, x: Vec<f64>) -> PyResult<(Vec<f64>, f64)> {
    let b = field::barycenter(&kernel.spec, &r.inner, &x).map_err(to_py)?;
    Ok((b.a, b.u))
}

/// Overlap scalar Z_p(mu): the double kernel integral of mu against p.
#[pyfunction]
fn overlap(kernel: &Kernel, p: &Measure, mu: &Measure) -> PyResult<f64> {
    stability::overlap_scalar(&kernel.spec, &p.inner, &mu.inner).map_err(to_py)
}

/// Defect-ray estimate of q against p as (c_hat, dispersion), read off
/// kernel-mass ratios at p's atoms and the origin.
#[pyfunction]
#[pyo3(signature = (kernel, p, q, allow_subprobability=false))]
fn defect(
    kernel: &Kernel,
    p: &Measure,
    q: &Measure,
    allow_subprobability: bool,
) -> PyResult<(f64, f64)> {
    let anchors = stability::default_anchor_points(&p.inner);
    let est = stability::defect_ray_estimate(
        &kernel.spec,
        &p.inner,
        &q.inner,
        &anchors,
        allow_subprobability,
    )
    .map_err(to_py)?;
    Ok((est.c_hat, est.dispersion))
}

#[pymodule]
fn driftlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Kernel>()?;
    m.add_class::<Measure>()?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(drift, m)?)?;
    m.add_function(wrap_pyfunction!(barycenter, m)?)?;
    m.add_function(wrap_pyfunction!(overlap, m)?)?;
    m.add_function(wrap_pyfunction!(defect, m)?)?;
    Ok(())
}
