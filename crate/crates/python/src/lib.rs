//! Python bindings: parameters, reduced fields, integration, Casimirs and
//! the Type I / commutation residuals.
//!
//! States are flat float sequences in the reduced layouts `[Π, α, l]`
//! (`case="coincident"`) and `[Π, Γ, α, l]` (`case="noncoincident"`).

use std::collections::HashMap;

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;


use srotor::dynamics::{
    controlled_field, simulate_full_rk4, simulate_full_rkmk4, simulate_reduced, Control, FullState, RotorDynamics,
    StepConfig,
};
use srotor::lie::{Mat3, Rotation, Vec3};
use srotor::model::{Case, Coordinates, ReducedState, ReducedStateC, ReducedStateN};
use srotor::report::Table;

fn to_py(e: srotor::Error) -> PyErr {
    match e {
        srotor::Error::NonFinite { .. } => PyArithmeticError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_case(case: &str) -> PyResult<Case> {
    match case {
        "coincident" => Ok(Case::Coincident),
        "noncoincident" => Ok(Case::Noncoincident),
        other => Err(PyValueError::new_err(format!("unknown case {other:?}"))),
    }
}

fn parse_control(kind: &str, value: f64) -> PyResult<Control> {
    match kind {
        "none" => Ok(Control::None),
        "constant" => Ok(Control::Constant(value)),
        "linear_feedback" => Ok(Control::LinearFeedback { gain: value }),
        other => Err(PyValueError::new_err(format!("unknown control {other:?}"))),
    }
}

fn check_len(state: &[f64], n: usize) -> PyResult<()> {
    if state.len() == n {
        Ok(())
    } else {
        Err(PyValueError::new_err(format!("expected {n} state components, got {}", state.len())))
    }
}

fn parse_attitude(rows: Option<[[f64; 3]; 3]>) -> PyResult<Option<Rotation>> {
    rows.map(|r| Rotation::new(Mat3::from_fn(|i, j| r[i][j])).map_err(to_py)).transpose()
}

/// Principal augmented inertias, rotor inertia, gravity product `gh` and
/// the unit offset direction `chi`.
#[pyclass(frozen, skip_from_py_object, name = "InertiaParams")]
#[derive(Clone, Copy)]
struct PyParams(srotor::model::InertiaParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (ibar, j3, gh = 0.0, chi = [0.0, 0.0, 1.0]))]
    fn new(ibar: [f64; 3], j3: f64, gh: f64, chi: [f64; 3]) -> PyResult<Self> {
        srotor::model::InertiaParams::new(ibar, j3, gh, chi).map(PyParams).map_err(to_py)
    }

    #[getter]
    fn ibar(&self) -> [f64; 3] {
        self.0.ibar.into()
    }

    #[getter]
    fn j3(&self) -> f64 {
        self.0.j3
    }

    #[getter]
    fn gh(&self) -> f64 {
        self.0.gh
    }

    #[getter]
    fn chi(&self) -> [f64; 3] {
        self.0.chi.into()
    }

    fn __repr__(&self) -> String {
        format!(
            "InertiaParams(ibar={:?}, j3={}, gh={}, chi={:?})",
            self.ibar(),
            self.0.j3,
            self.0.gh,
            self.chi()
        )
    }
}

fn with_state<T>(
    case: &str,
    state: &[f64],
    c: impl FnOnce(ReducedStateC) -> PyResult<T>,
    n: impl FnOnce(ReducedStateN) -> PyResult<T>,
) -> PyResult<T> {
    match parse_case(case)? {
        Case::Coincident => {
            check_len(state, ReducedStateC::DIM)?;
            c(ReducedStateC::from_coords(state))
        }
        Case::Noncoincident => {
            check_len(state, ReducedStateN::DIM)?;
            n(ReducedStateN::from_coords(state))
        }
    }
}

/// Hamiltonian of the reduced state.
#[pyfunction]
fn hamiltonian(case: &str, state: Vec<f64>, params: &PyParams) -> PyResult<f64> {
    with_state(case, &state, |s| Ok(s.hamiltonian(&params.0)), |s| Ok(s.hamiltonian(&params.0)))
}

/// Reduced vector field with the rotor torque lifted onto `l̇`.
#[pyfunction]
#[pyo3(signature = (case, state, params, control = "none", control_value = 0.0, t = 0.0))]
fn vector_field(case: &str, state: Vec<f64>, params: &PyParams, control: &str, control_value: f64, t: f64) -> PyResult<Vec<f64>> {
    let u = parse_control(control, control_value)?;
    let p = &params.0;
    with_state(
        case,
        &state,
        |s| controlled_field(&s, p, &u, t).map(|v| v.coords()).map_err(to_py),
        |s| controlled_field(&s, p, &u, t).map(|v| v.coords()).map_err(to_py),
    )
}

/// `[|Π|²]` or `[Π·Γ, |Γ|²]`.
#[pyfunction]
fn casimirs(case: &str, state: Vec<f64>) -> PyResult<Vec<f64>> {
    with_state(
        case,
        &state,
        |s| Ok(srotor::reduction::casimirs(&s)),
        |s| Ok(srotor::reduction::casimirs(&s)),
    )
}

/// Two-transcription Type I residual at a reduced covector.
#[pyfunction]
fn type1_residual(gbar: Vec<f64>, params: &PyParams) -> PyResult<f64> {
    match gbar.len() {
        5 => Ok(srotor::hamilton_jacobi::type1_residual_c(&gbar[..].try_into().unwrap(), &params.0)),
        8 => Ok(srotor::hamilton_jacobi::type1_residual_n(&gbar[..].try_into().unwrap(), &params.0)),
        n => Err(PyValueError::new_err(format!("expected 5 or 8 components, got {n}"))),
    }
}

/// Gap between the projected full field and the reduced field.
#[pyfunction]
#[pyo3(signature = (case, state, attitude, params, control = "none", control_value = 0.0))]
fn commutation_residual(
    case: &str,
    state: Vec<f64>,
    attitude: [[f64; 3]; 3],
    params: &PyParams,
    control: &str,
    control_value: f64,
) -> PyResult<f64> {
    let u = parse_control(control, control_value)?;
    let a = parse_attitude(Some(attitude))?.unwrap();
    let p = &params.0;
    with_state(
        case,
        &state,
        |s| srotor::reduction::commutation_residual(&FullState::new(a, s), p, &u, 0.0).map_err(to_py),
        |s| srotor::reduction::commutation_residual(&FullState::new(a, s), p, &u, 0.0).map_err(to_py),
    )
}

/// Rodrigues exponential, returned as row-major nested lists.
#[pyfunction]
fn exp_so3(v: [f64; 3]) -> [[f64; 3]; 3] {
    let m = srotor::lie::exp_so3(&Vec3::from(v));
    std::array::from_fn(|i| std::array::from_fn(|j| m.matrix()[(i, j)]))
}

struct RunJob {
    params: srotor::model::InertiaParams,
    control: Control,
    steps: StepConfig,
    integrator: String,
    attitude: Option<Rotation>,
}

fn run<R: RotorDynamics>(s0: R, job: &RunJob) -> srotor::Result<Table> {
    let (p, u, cfg) = (&job.params, &job.control, &job.steps);
    let full = |a: Option<Rotation>| FullState::new(a.unwrap_or_else(Rotation::identity), s0);
    match (job.integrator.as_str(), job.attitude) {
        ("rk4", None) => Ok(Table::reduced(&simulate_reduced(s0, p, u, cfg)?, R::CASE)),
        ("rk4", a) => {
            let traj = simulate_full_rk4(full(a), p, u, cfg)?;
            Ok(Table::from_trajectory(&traj, R::CASE, |s| s.reduced.coords()))
        }
        (_, a) => {
            let traj = simulate_full_rkmk4(full(a), p, u, cfg)?;
            Ok(Table::from_trajectory(&traj, R::CASE, |s| s.reduced.coords()))
        }
    }
}

/// Integrates from `state` and returns the trajectory columns by name
/// (the same schema as the CLI's CSV output).
#[pyfunction]
#[pyo3(signature = (case, state, params, dt, steps, control = "none", control_value = 0.0,
                    integrator = "rk4", attitude = None, stride = 1))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    case: &str,
    state: Vec<f64>,
    params: &PyParams,
    dt: f64,
    steps: usize,
    control: &str,
    control_value: f64,
    integrator: &str,
    attitude: Option<[[f64; 3]; 3]>,
    stride: usize,
) -> PyResult<HashMap<String, Vec<f64>>> {
    if !matches!(integrator, "rk4" | "rkmk4") {
        return Err(PyValueError::new_err(format!("unknown integrator {integrator:?}")));
    }
    let job = RunJob {
        params: params.0,
        control: parse_control(control, control_value)?,
        steps: StepConfig {
            stride,
            ..StepConfig::new(dt, steps)
        },
        integrator: integrator.to_owned(),
        attitude: parse_attitude(attitude)?,
    };
    let table = with_state(
        case,
        &state,
        |s| run(s, &job).map_err(to_py),
        |s| run(s, &job).map_err(to_py),
    )?;
    Ok(table
        .columns
        .iter()
        .map(|c| (c.clone(), table.column(c).unwrap()))
        .collect())
}

#[pymodule]
#[pyo3(name = "srotor")]
fn srotor_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(vector_field, m)?)?;
    m.add_function(wrap_pyfunction!(casimirs, m)?)?;
    m.add_function(wrap_pyfunction!(type1_residual, m)?)?;
    m.add_function(wrap_pyfunction!(commutation_residual, m)?)?;
    m.add_function(wrap_pyfunction!(exp_so3, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
