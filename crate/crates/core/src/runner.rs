//! Drivers behind the `simulate` and `hj-suite` subcommands.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{Battery, HjSuiteConfig, Integrator, Scenario, ScenarioConfig};
use crate::dynamics::{
    simulate_full_rk4, simulate_full_rkmk4, simulate_reduced, FullState, RotorDynamics, StepConfig,
};
use crate::error::{Error, Result};
use crate::hamilton_jacobi::{
    closedness_residual, compose, flow_map, identity_map, poisson_map_residual, scaling_map, type1_residual_c,
    type1_residual_n, type2_residual, PointMap, ReducedOneForm,
};
use crate::lie::{Rotation, Vec3};
use crate::model::{Case, InertiaParams, ReducedStateC, ReducedStateN};
use crate::report::{analyze, Table};

/// Command-line overrides shared by both subcommands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub output_dir: PathBuf,
    pub stride: Option<usize>,
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            output_dir: PathBuf::from("."),
            stride: None,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub report_path: PathBuf,
    pub trajectory_path: Option<PathBuf>,
}

/// Process exit code: 0 pass, 1 failed check or runtime failure, 2 bad config.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(Error::Config { .. }) => 2,
        Err(_) => 1,
    }
}

fn step_config(scn: &Scenario, stride: Option<usize>) -> StepConfig {
    let c = &scn.config;
    StepConfig {
        dt: c.dt,
        steps: c.steps,
        stride: stride.or(c.stride).unwrap_or(1),
        reorthonormalize_every: c.reorthonormalize_every,
    }
}

fn run_case<R: RotorDynamics>(scn: &Scenario, s0: R, cfg: &StepConfig) -> Result<Table> {
    let p = &scn.params;
    let u = scn.config.control.law();
    if !scn.full_state() {
        return Ok(Table::reduced(&simulate_reduced(s0, p, &u, cfg)?, R::CASE));
    }
    let full = FullState::new(scn.attitude.unwrap_or_else(Rotation::identity), s0);
    let traj = match scn.config.integrator {
        Integrator::Rk4 => simulate_full_rk4(full, p, &u, cfg)?,
        Integrator::Rkmk4 => simulate_full_rkmk4(full, p, &u, cfg)?,
    };
    Ok(Table::from_trajectory(&traj, R::CASE, |s| s.reduced.coords()))
}

/// Integrates a validated scenario into a trajectory table.
pub fn simulate(scn: &Scenario, stride: Option<usize>) -> Result<Table> {
    let cfg = step_config(scn, stride);
    if cfg.stride == 0 {
        return Err(Error::config("stride", "must be at least 1"));
    }
    let init = &scn.config.initial;
    match scn.config.case {
        Case::Coincident => run_case(scn, ReducedStateC::new(init.pi, init.alpha, init.l), &cfg),
        Case::Noncoincident => {
            let gamma = init.gamma.expect("validated");
            run_case(scn, ReducedStateN::new(init.pi, gamma, init.alpha, init.l), &cfg)
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.into()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Runs a scenario config: writes the trajectory CSV and the report.
pub fn run_scenario(config: &Path, opts: &RunOptions) -> Result<Outcome> {
    let scn = ScenarioConfig::load(config)?;
    let table = simulate(&scn, opts.stride)?;

    std::fs::create_dir_all(&opts.output_dir)?;
    let trajectory_path = opts.output_dir.join(&scn.config.outputs.trajectory);
    let mut w = BufWriter::new(File::create(&trajectory_path)?);
    table.write_csv(&mut w)?;
    drop(w);

    let report = analyze(&table, scn.config.control.law().is_none(), &scn.config.tolerances)?;
    let report_path = opts.output_dir.join(&scn.config.outputs.report);
    write_json(&report_path, &report)?;
    Ok(Outcome {
        passed: report.passed,
        report_path,
        trajectory_path: Some(trajectory_path),
    })
}

/// Uniformly sampled parameters; `χ` is a random unit vector and `gh` is
/// zero in the coincident case.
pub fn random_params(rng: &mut impl Rng, case: Case, range: [f64; 2]) -> InertiaParams {
    let [lo, hi] = range;
    let ibar = [rng.random_range(lo..hi), rng.random_range(lo..hi), rng.random_range(lo..hi)];
    let j3 = rng.random_range(lo..hi);
    match case {
        Case::Coincident => InertiaParams::coincident(ibar, j3),
        Case::Noncoincident => InertiaParams::new(ibar, j3, rng.random_range(lo..hi), random_unit(rng).into()),
    }
    .expect("sampled parameters are valid")
}

pub fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_vec(rng: &mut impl Rng, r: f64) -> Vec3 {
    Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r))
}

pub fn random_state_c(rng: &mut impl Rng) -> ReducedStateC {
    ReducedStateC::new(random_vec(rng, 2.0).into(), rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0))
}

pub fn random_state_n(rng: &mut impl Rng) -> ReducedStateN {
    let c = random_state_c(rng);
    ReducedStateN::new(c.pi.into(), random_unit(rng).into(), c.alpha, c.l)
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryReport {
    pub battery: Battery,
    pub entries: Vec<serde_json::Value>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HjReport {
    pub seed: u64,
    pub points: usize,
    pub batteries: Vec<BatteryReport>,
    pub passed: bool,
}

fn below(label: &str, value: f64, tolerance: f64) -> (serde_json::Value, bool) {
    let passed = value < tolerance;
    (json!({"label": label, "value": value, "gate": "below", "tolerance": tolerance, "passed": passed}), passed)
}

fn above(label: &str, value: f64, tolerance: f64) -> (serde_json::Value, bool) {
    let passed = value > tolerance;
    (json!({"label": label, "value": value, "gate": "above", "tolerance": tolerance, "passed": passed}), passed)
}

fn finish(battery: Battery, results: Vec<(serde_json::Value, bool)>) -> BatteryReport {
    let passed = results.iter().all(|r| r.1);
    BatteryReport {
        battery,
        entries: results.into_iter().map(|r| r.0).collect(),
        passed,
    }
}

fn type1_battery(cfg: &HjSuiteConfig, rng: &mut ChaCha8Rng) -> BatteryReport {
    let (mut worst_c, mut worst_n) = (0.0f64, 0.0f64);
    for _ in 0..cfg.points {
        let p = random_params(rng, Case::Coincident, cfg.param_range);
        let g: [f64; 5] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        worst_c = worst_c.max(type1_residual_c(&g, &p));

        let p = random_params(rng, Case::Noncoincident, cfg.param_range);
        let g: [f64; 8] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        worst_n = worst_n.max(type1_residual_n(&g, &p));
    }
    let tol = cfg.tolerances.type1;
    finish(
        Battery::Type1,
        vec![below("type1_coincident_max", worst_c, tol), below("type1_noncoincident_max", worst_n, tol)],
    )
}

/// A smooth generating function on the chart `[θ, α]`.
fn generating_function(c: [f64; 5]) -> impl Fn(&[f64]) -> f64 + Send + Sync + 'static {
    move |q: &[f64]| {
        c[0] * q[0] * q[1] + c[1] * q[2].sin() * q[3] + c[2] * q[3] * q[3] + c[3] * (q[0] + q[3]).cos()
            + c[4] * q[1] * q[2] * q[3]
    }
}

fn closedness_battery(cfg: &HjSuiteConfig, rng: &mut ChaCha8Rng) -> Result<BatteryReport> {
    let tol = cfg.tolerances;
    let n = (cfg.points / 10).max(1);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let case = if k % 2 == 0 { Case::Coincident } else { Case::Noncoincident };
        let coef: [f64; 5] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let reference = crate::lie::exp_so3(&random_vec(rng, 1.0));
        let form = ReducedOneForm::from_generating_function(case, reference, Vec3::z(), generating_function(coef));
        let q = [rng.random_range(-0.55..0.55), rng.random_range(-0.55..0.55), rng.random_range(-0.55..0.55), rng.random_range(-3.0..3.0)];
        worst = worst.max(form.closedness_residual(&q)?);
    }
    let q = [0.3, -0.2, 0.5, 0.4];
    let twisted = closedness_residual(&|x: &[f64]| vec![x[1], 0.0, 0.0, 0.0], &q)?;
    let body_fixed = ReducedOneForm::new(Case::Coincident, Rotation::identity(), |x: &[f64]| vec![1.0, 2.0, 0.5, x[3], 0.0]);
    let level = ReducedOneForm::from_generating_function(Case::Coincident, Rotation::identity(), Vec3::z(), |x: &[f64]| x[3].sin());
    Ok(finish(
        Battery::Closedness,
        vec![
            below("exact_forms_max", worst, tol.closed),
            above("non_closed_witness", twisted, tol.non_closed),
            above("body_fixed_momentum", body_fixed.closedness_residual(&q)?, tol.non_closed),
            below("zero_momentum_level", level.momentum_level_residual(&q, &Vec3::zeros()), 1e-12),
        ],
    ))
}

fn eps_battery<R: RotorDynamics>(p: InertiaParams) -> Vec<(&'static str, Arc<PointMap>)> {
    vec![
        ("identity", identity_map()),
        ("flow_t0.01", flow_map::<R>(p, 0.01, 1e-4)),
        ("flow_t0.05", flow_map::<R>(p, 0.05, 1e-4)),
        ("flow_t0.1", flow_map::<R>(p, 0.1, 1e-4)),
        ("perturbed_flow", compose(flow_map::<R>(p, 0.05, 1e-4), scaling_map(1.1))),
        ("broken_scaling", scaling_map(2.0)),
    ]
}

fn type2_case<R: RotorDynamics>(
    cfg: &HjSuiteConfig,
    rng: &mut ChaCha8Rng,
    state: impl Fn(&mut ChaCha8Rng) -> R,
    out: &mut Vec<(serde_json::Value, bool)>,
) -> Result<()> {
    let gate = cfg.tolerances.type2_gate;
    let lam = identity_map();
    for k in 0..cfg.map_points {
        let p = random_params(rng, R::CASE, cfg.param_range);
        let s = state(rng);
        for (name, eps) in eps_battery::<R>(p) {
            let (lhs, rhs) = type2_residual(&*eps, &*lam, &s, &p, &crate::dynamics::Control::None)?;
            let concordant = (lhs < gate) == (rhs < gate);
            out.push((
                json!({"case": R::CASE, "map": name, "point": k, "lhs_res": lhs, "rhs_res": rhs,
                       "tolerance": gate, "concordant": concordant, "passed": concordant}),
                concordant,
            ));
        }
    }
    Ok(())
}

fn type2_battery(cfg: &HjSuiteConfig, rng: &mut ChaCha8Rng) -> Result<BatteryReport> {
    let mut out = Vec::new();
    type2_case(cfg, rng, random_state_c, &mut out)?;
    type2_case(cfg, rng, random_state_n, &mut out)?;
    Ok(finish(Battery::Type2, out))
}

fn poisson_case<R: RotorDynamics>(
    cfg: &HjSuiteConfig,
    rng: &mut ChaCha8Rng,
    state: impl Fn(&mut ChaCha8Rng) -> R,
    out: &mut Vec<(serde_json::Value, bool)>,
) -> Result<()> {
    let tol = cfg.tolerances.poisson_flow;
    for k in 0..cfg.map_points {
        let p = random_params(rng, R::CASE, cfg.param_range);
        let s = state(rng).coords();
        for (name, eps) in eps_battery::<R>(p) {
            let r = poisson_map_residual(&*eps, &s, R::CASE)?;
            let label = format!("{:?}/{name}/{k}", R::CASE).to_lowercase();
            out.push(match name {
                "identity" => below(&label, r, 1e-9),
                "perturbed_flow" | "broken_scaling" => above(&label, r, tol),
                _ => below(&label, r, tol),
            });
        }
    }
    Ok(())
}

fn poisson_battery(cfg: &HjSuiteConfig, rng: &mut ChaCha8Rng) -> Result<BatteryReport> {
    let mut out = Vec::new();
    poisson_case(cfg, rng, random_state_c, &mut out)?;
    poisson_case(cfg, rng, random_state_n, &mut out)?;
    Ok(finish(Battery::PoissonMap, out))
}

/// Executes the configured batteries with a seeded generator.
pub fn hj_suite(cfg: &HjSuiteConfig, seed: u64) -> Result<HjReport> {
    let mut batteries = Vec::new();
    for (i, b) in cfg.batteries.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        batteries.push(match b {
            Battery::Type1 => type1_battery(cfg, &mut rng),
            Battery::Closedness => closedness_battery(cfg, &mut rng)?,
            Battery::Type2 => type2_battery(cfg, &mut rng)?,
            Battery::PoissonMap => poisson_battery(cfg, &mut rng)?,
        });
    }
    let passed = batteries.iter().all(|b| b.passed);
    Ok(HjReport {
        seed,
        points: cfg.points,
        batteries,
        passed,
    })
}

pub fn run_hj_suite(config: &Path, opts: &RunOptions) -> Result<Outcome> {
    let cfg = HjSuiteConfig::load(config)?;
    let report = hj_suite(&cfg, opts.seed)?;
    std::fs::create_dir_all(&opts.output_dir)?;
    let report_path = opts.output_dir.join(&cfg.outputs.report);
    write_json(&report_path, &report)?;
    Ok(Outcome {
        passed: report.passed,
        report_path,
        trajectory_path: None,
    })
}
