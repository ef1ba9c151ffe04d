//! Python bindings: equations, R-domain and singular constants of motion, and the oracles.

use asymcon::oracle::{self, HandoffOptions, PhaseGrid, PreciseOptions, Thresholds};
use asymcon::{
    inversion, singular, Complex64 as C64, ComplexPoly, ConstantSeries, Contour, OdeSpec, Path, Plane, SingularSeries,
    SingularityReport, Tolerance,
};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(asymcon, AsymconError, PyException, "Failure inside the asymcon library.");

fn err(e: asymcon::Error) -> PyErr {
    AsymconError::new_err(format!("{}: {e}", e.name()))
}

fn x_path(nodes: &[C64]) -> PyResult<Path> {
    Path::polyline(Plane::X, nodes).map_err(err)
}

#[pyclass(name = "Ode", module = "asymcon", frozen)]
struct PyOde {
    inner: OdeSpec,
}

#[pymethods]
impl PyOde {
    /// `polys[k]` holds the coefficients of P_k in ascending powers of y.
    #[new]
    #[pyo3(signature = (polys, n = 1))]
    fn new(polys: Vec<Vec<C64>>, n: usize) -> PyResult<Self> {
        let polys = polys.into_iter().map(ComplexPoly::new).collect();
        Ok(PyOde { inner: OdeSpec::new(polys, n).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (n = 1))]
    fn abel(n: usize) -> PyResult<Self> {
        Ok(PyOde { inner: OdeSpec::abel(n).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (n = 1))]
    fn linear(n: usize) -> PyResult<Self> {
        Ok(PyOde { inner: OdeSpec::linear_decay(n).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (n = 1))]
    fn riccati(n: usize) -> PyResult<Self> {
        Ok(PyOde { inner: OdeSpec::riccati(n).map_err(err)? })
    }

    #[getter]
    fn roots(&self) -> Vec<C64> {
        self.inner.roots().roots().to_vec()
    }

    #[getter]
    fn simplicity_margins(&self) -> Vec<f64> {
        self.inner.roots().simplicity_margins().to_vec()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    fn rhs(&self, x: C64, y: C64) -> C64 {
        self.inner.rhs(x, y)
    }

    fn __repr__(&self) -> String {
        format!("Ode(degree={}, terms={}, n={})", self.inner.p0().degree(), self.inner.polys().len(), self.inner.order())
    }
}

#[pyclass(name = "ConstantSeries", module = "asymcon", frozen)]
struct PyConstantSeries {
    inner: ConstantSeries,
}

#[pymethods]
impl PyConstantSeries {
    /// R-domain C_n with its constants fixed on a loop winding `turns` times around `root`.
    #[new]
    #[pyo3(signature = (ode, root, base, turns = 1, n = None, rel = 1e-10, abs = 1e-12))]
    fn new(ode: &PyOde, root: usize, base: C64, turns: i32, n: Option<usize>, rel: f64, abs: f64) -> PyResult<Self> {
        let roots = ode.inner.roots();
        if root >= roots.len() {
            return Err(AsymconError::new_err(format!("root {root} out of range ({} roots)", roots.len())));
        }
        let mut winding = vec![0; roots.len()];
        winding[root] = turns;
        let contour = Contour::with_default_radii(winding, roots, 1).map_err(err)?;
        let n = n.unwrap_or(ode.inner.order());
        let inner = ConstantSeries::build(&ode.inner, &contour, base, n, &Tolerance::new(rel, abs)).map_err(err)?;
        Ok(PyConstantSeries { inner })
    }

    #[getter]
    fn a(&self) -> C64 {
        self.inner.a()
    }

    #[getter]
    fn c(&self) -> Vec<C64> {
        self.inner.c().to_vec()
    }

    #[getter]
    fn closure(&self) -> Vec<C64> {
        self.inner.closure().to_vec()
    }

    #[getter]
    fn base_y(&self) -> C64 {
        self.inner.base_y()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    /// F_0..F_n at y, continued from the base point.
    fn f_at(&self, y: C64) -> PyResult<Vec<C64>> {
        Ok(self.inner.f_at(y).map_err(err)?.values)
    }

    fn constant_from_ic(&self, x0: C64, y0: C64) -> PyResult<C64> {
        inversion::constant_from_ic(&self.inner, x0, y0).map_err(err)
    }

    fn invert(&self, k: C64, x: C64, y_guess: C64) -> PyResult<C64> {
        inversion::newton_invert(&self.inner, k, x, y_guess).map_err(err)
    }

    /// (x, y, K_check, region) along the polyline through `nodes`.
    fn trajectory(&self, k: C64, nodes: Vec<C64>, y0: C64) -> PyResult<Vec<(C64, C64, C64, String)>> {
        let path = x_path(&nodes)?;
        let traj = inversion::continue_trajectory(&self.inner, k, &path, y0).map_err(err)?;
        Ok(traj.into_iter().map(|s| (s.x, s.y, s.k_check, s.region.label())).collect())
    }
}

#[pyclass(name = "SingularSeries", module = "asymcon", frozen)]
struct PySingularSeries {
    inner: SingularSeries,
}

#[pymethods]
impl PySingularSeries {
    #[new]
    #[pyo3(signature = (ode, direction = C64::new(1.0, 0.0), n = None, y_max = singular::DEFAULT_Y_MAX))]
    fn new(ode: &PyOde, direction: C64, n: Option<usize>, y_max: f64) -> PyResult<Self> {
        let n = n.unwrap_or(ode.inner.order());
        Ok(PySingularSeries { inner: singular::build_singular(&ode.inner, direction, n, y_max).map_err(err)? })
    }

    #[getter]
    fn decay(&self) -> Vec<Option<f64>> {
        self.inner.decay().to_vec()
    }

    #[getter]
    fn expected_decay(&self) -> f64 {
        self.inner.expected_decay()
    }

    fn locate(&self, x0: C64, y0: C64) -> PyResult<C64> {
        Ok(singular::locate_singularity(&self.inner, x0, y0).map_err(err)?.x_sing)
    }

    fn array(&self, x0: C64, y0: C64, shifts: Vec<Vec<i32>>) -> PyResult<Vec<C64>> {
        let reports = singular::singularity_array(&self.inner, x0, y0, &shifts).map_err(err)?;
        Ok(reports.into_iter().map(|r| r.x_sing).collect())
    }

    /// Predicted point, blow-up point reached by shooting, and digits of agreement.
    #[pyo3(signature = (x0, y0, rel = 1e-10, abs = 1e-12))]
    fn verify(&self, x0: C64, y0: C64, rel: f64, abs: f64) -> PyResult<(C64, C64, f64)> {
        let report: SingularityReport = singular::locate_singularity(&self.inner, x0, y0).map_err(err)?;
        let checked =
            singular::verify_singularity(self.inner.ode(), &report, &Tolerance::new(rel, abs)).map_err(err)?;
        let v = checked.verified.expect("verification fills its record");
        Ok((checked.x_sing, v.x_hit, v.digits))
    }
}

/// Adaptive RK samples (x, y) along the polyline through `nodes`.
#[pyfunction]
#[pyo3(signature = (ode, nodes, y0, rel = 1e-10, abs = 1e-12, per_segment = 0))]
fn rk_integrate(
    ode: &PyOde,
    nodes: Vec<C64>,
    y0: C64,
    rel: f64,
    abs: f64,
    per_segment: usize,
) -> PyResult<Vec<(C64, C64)>> {
    let path = x_path(&nodes)?;
    let tr = oracle::rk_integrate_sampled(&ode.inner, &path, y0, &Tolerance::new(rel, abs), per_segment).map_err(err)?;
    Ok(tr.samples().iter().map(|s| (s.x, s.y)).collect())
}

/// Multiprecision Taylor samples (x, y) along the polyline through `nodes`.
#[pyfunction]
fn taylor_integrate(ode: &PyOde, nodes: Vec<C64>, y0: C64) -> PyResult<Vec<(C64, C64)>> {
    let path = x_path(&nodes)?;
    let tr = oracle::taylor_trajectory(&ode.inner, &path, y0, &PreciseOptions::default()).map_err(err)?;
    Ok(tr.iter().map(|s| (s.x, s.y)).collect())
}

#[pyfunction]
#[pyo3(signature = (ode, samples, eps_near = 0.05, band = 0.1, r0 = 10.0))]
fn detect_regions(ode: &PyOde, samples: Vec<(C64, C64)>, eps_near: f64, band: f64, r0: f64) -> Vec<String> {
    let th = Thresholds { eps_near, band, r0 };
    samples.iter().map(|&(x, y)| oracle::detect_region(&ode.inner, x, y, &th).label()).collect()
}

/// (passed, worst residual/bound, residual per sample or None outside the overlap bands).
#[pyfunction]
fn handoff(ode: &PyOde, samples: Vec<(C64, C64)>) -> PyResult<(bool, f64, Vec<Option<f64>>)> {
    let rep = oracle::handoff_check(&ode.inner, &samples, &HandoffOptions::default()).map_err(err)?;
    Ok((rep.passed(), rep.worst_ratio(), rep.residual_column()))
}

/// (y, dy/ds) over a grid, and (root, rate, stability) per equilibrium.
#[pyfunction]
#[pyo3(signature = (ode, x0, t, s = 0.0, re = (-0.8, 0.8), im = (-0.8, 0.8), n = 21))]
#[allow(clippy::type_complexity)]
fn phase_field(
    ode: &PyOde,
    x0: C64,
    t: f64,
    s: f64,
    re: (f64, f64),
    im: (f64, f64),
    n: usize,
) -> (Vec<(C64, C64)>, Vec<(C64, C64, String)>) {
    let f = oracle::phase_field(&ode.inner, x0, t, s, &PhaseGrid { re, im, n });
    let eq = f.equilibria.iter().map(|e| (e.root, e.rate, format!("{:?}", e.stability).to_lowercase())).collect();
    (f.samples, eq)
}

#[pymodule]
#[pyo3(name = "asymcon")]
fn asymcon_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("AsymconError", m.py().get_type::<AsymconError>())?;
    m.add_class::<PyOde>()?;
    m.add_class::<PyConstantSeries>()?;
    m.add_class::<PySingularSeries>()?;
    m.add_function(wrap_pyfunction!(rk_integrate, m)?)?;
    m.add_function(wrap_pyfunction!(taylor_integrate, m)?)?;
    m.add_function(wrap_pyfunction!(detect_regions, m)?)?;
    m.add_function(wrap_pyfunction!(handoff, m)?)?;
    m.add_function(wrap_pyfunction!(phase_field, m)?)?;
    Ok(())
}
