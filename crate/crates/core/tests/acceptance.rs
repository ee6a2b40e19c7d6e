//! Acceptance criteria, one line per criterion.

use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use srotor::brackets::hamiltonian_vf_via_bracket;
use srotor::dynamics::{
    apply_control, simulate_full_rk4, simulate_full_rkmk4, simulate_reduced, vf_reduced_c, vf_reduced_n, Control,
    FullState, StepConfig, Trajectory,
};
use srotor::hamilton_jacobi::{
    flow_map, identity_map, scaling_map, type1_residual_c, type1_residual_n, type2_residual, PointMap,
};
use srotor::lie::{exp_so3, Rotation, Vec3};
use srotor::model::{Case, Coordinates, InertiaParams, ReducedState, ReducedStateC, ReducedStateN, Tangent};
use srotor::reduction::commutation_residual;
use srotor::runner::{random_params, random_unit};

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn reference(gh: f64) -> InertiaParams {
    InertiaParams::new([3.0, 2.0, 1.0], 1.0, gh, [0.0, 0.0, 1.0]).unwrap()
}

fn rand_vec(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
    Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r))
}

fn rand_c(rng: &mut ChaCha8Rng) -> ReducedStateC {
    ReducedStateC::new(rand_vec(rng, 3.0).into(), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
}

fn rand_n(rng: &mut ChaCha8Rng) -> ReducedStateN {
    let c = rand_c(rng);
    ReducedStateN::new(c.pi.into(), random_unit(rng).into(), c.alpha, c.l)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn drift(series: impl Iterator<Item = f64> + Clone) -> f64 {
    let first = series.clone().next().unwrap();
    let scale = if first != 0.0 { first.abs() } else { 1.0 };
    series.map(|v| (v - first).abs()).fold(0.0, f64::max) / scale
}

fn bracket_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_params(&mut rng, Case::Coincident, [0.5, 5.0]);
        let s = rand_c(&mut rng);
        let h = move |x: &[f64]| ReducedStateC::from_coords(x).hamiltonian(&p);
        let v = hamiltonian_vf_via_bracket(&h, &s.coords(), Case::Coincident).unwrap();
        worst = worst.max(max_diff(&v, &vf_reduced_c(&s, &p).coords()));

        let p = random_params(&mut rng, Case::Noncoincident, [0.5, 5.0]);
        let s = rand_n(&mut rng);
        let h = move |x: &[f64]| ReducedStateN::from_coords(x).hamiltonian(&p);
        let v = hamiltonian_vf_via_bracket(&h, &s.coords(), Case::Noncoincident).unwrap();
        worst = worst.max(max_diff(&v, &vf_reduced_n(&s, &p).coords()));
    }
    outcome(worst < 1e-6, format!("max |bracket - closed form| = {worst:.2e} (tol 1e-6)"))
}

fn conservation() -> Outcome {
    let cfg = StepConfig::new(1e-3, 10_000);
    let p = reference(0.0);
    let c0 = ReducedStateC::new([1.0, 1.0, 1.0], 0.0, 1.0);
    let tc = simulate_reduced(c0, &p, &Control::None, &cfg).unwrap();
    let h_c = drift(tc.samples.iter().map(|x| x.diagnostics.energy));
    let pi2 = drift(tc.samples.iter().map(|x| x.state.pi.norm_squared()));
    let l_c = drift(tc.samples.iter().map(|x| x.state.l));

    let pn = reference(1.0);
    let n0 = ReducedStateN::new([1.0, 1.0, 1.0], [0.0, 0.3f64.sin(), 0.3f64.cos()], 0.0, 1.0);
    let tn = simulate_reduced(n0, &pn, &Control::None, &cfg).unwrap();
    let h_n = drift(tn.samples.iter().map(|x| x.diagnostics.energy));
    let pg = drift(tn.samples.iter().map(|x| x.state.pi.dot(&x.state.gamma)));
    let g2 = drift(tn.samples.iter().map(|x| x.state.gamma.norm_squared()));
    let l_n = drift(tn.samples.iter().map(|x| x.state.l));

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let field_l = (0..1000).all(|_| {
        let s = rand_n(&mut rng);
        vf_reduced_n(&s, &pn).l_dot == 0.0 && vf_reduced_c(&s.coincident_part(), &p).l_dot == 0.0
    });

    let passed = h_c.max(h_n) < 1e-9 && pi2.max(pg).max(g2) < 1e-10 && l_c.max(l_n) < 1e-13 && field_l;
    outcome(
        passed,
        format!(
            "H {:.1e}, |Pi|^2 {pi2:.1e}, Pi.Gamma {pg:.1e}, |Gamma|^2 {g2:.1e}, l {:.1e}, field l_dot == 0: {field_l}",
            h_c.max(h_n),
            l_c.max(l_n)
        ),
    )
}

fn noether() -> Outcome {
    let cfg = StepConfig::new(1e-3, 10_000);
    let p = reference(0.0);
    let a0 = exp_so3(&Vec3::new(0.3, -0.2, 0.5));
    let sc = FullState::new(a0, ReducedStateC::new([1.0, 1.0, 1.0], 0.0, 1.0));
    let tc = simulate_full_rk4(sc, &p, &Control::None, &cfg).unwrap();
    let mu0 = tc.first().diagnostics.spatial_momentum.unwrap();
    let mu = tc
        .samples
        .iter()
        .map(|x| (x.diagnostics.spatial_momentum.unwrap() - mu0).amax())
        .fold(0.0, f64::max)
        / mu0.amax();

    let pn = reference(1.0);
    let g0 = Vec3::new(0.0, 0.3f64.sin(), 0.3f64.cos());
    let sn = FullState::new(Rotation::identity(), ReducedStateN::new([1.0, 1.0, 1.0], g0.into(), 0.0, 1.0));
    let tn = simulate_full_rk4(sn, &pn, &Control::None, &cfg).unwrap();
    let axis = drift(tn.samples.iter().map(|x| {
        let a = x.state.attitude;
        a.apply(&x.state.reduced.pi).dot(&a.apply(&x.state.reduced.gamma))
    }));
    let pg = drift(tn.samples.iter().map(|x| x.state.reduced.pi.dot(&x.state.reduced.gamma)));
    let recon = tn
        .samples
        .iter()
        .map(|x| (x.state.attitude.apply(&x.state.reduced.gamma) - g0).norm())
        .fold(0.0, f64::max);
    outcome(
        mu < 1e-9 && axis < 1e-9 && pg < 1e-9 && recon < 1e-8,
        format!("A.Pi {mu:.1e}, mu.a {axis:.1e}, Pi.Gamma {pg:.1e}, |A Gamma - g0| {recon:.1e}"),
    )
}

fn commutation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let laws = [Control::None, Control::Constant(0.3), Control::LinearFeedback { gain: 1.0 }];
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = exp_so3(&rand_vec(&mut rng, 3.0));
        let pc = random_params(&mut rng, Case::Coincident, [0.5, 5.0]);
        let pn = random_params(&mut rng, Case::Noncoincident, [0.5, 5.0]);
        let sc = FullState::new(a, rand_c(&mut rng));
        let sn = FullState::new(a, rand_n(&mut rng));
        for u in &laws {
            worst = worst.max(commutation_residual(&sc, &pc, u, 0.0).unwrap());
            worst = worst.max(commutation_residual(&sn, &pn, u, 0.0).unwrap());
        }
    }
    outcome(worst < 1e-12, format!("max residual {worst:.2e} over 6000 evaluations (tol 1e-12)"))
}

fn type1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_params(&mut rng, Case::Coincident, [0.5, 5.0]);
        let g: [f64; 5] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        worst = worst.max(type1_residual_c(&g, &p));
        let p = random_params(&mut rng, Case::Noncoincident, [0.5, 5.0]);
        let g: [f64; 8] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        worst = worst.max(type1_residual_n(&g, &p));
    }
    outcome(worst <= 1e-15, format!("max residual {worst:.1e} (tol 1e-15)"))
}

fn battery(p: InertiaParams, case: Case) -> Vec<(&'static str, std::sync::Arc<PointMap>, bool)> {
    let flow = |t| match case {
        Case::Coincident => flow_map::<ReducedStateC>(p, t, 1e-4),
        Case::Noncoincident => flow_map::<ReducedStateN>(p, t, 1e-4),
    };
    vec![
        ("identity", identity_map(), true),
        ("flow 0.01", flow(0.01), true),
        ("flow 0.05", flow(0.05), true),
        ("flow 0.1", flow(0.1), true),
        ("scale Pi by 2", scaling_map(2.0), false),
    ]
}

fn type2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let gate = 1e-4;
    let lam = identity_map();
    let (mut total, mut discordant, mut misclassified) = (0, 0, 0);
    for _ in 0..2 {
        let p = random_params(&mut rng, Case::Coincident, [0.5, 5.0]);
        let s = rand_c(&mut rng);
        for (_, eps, good) in battery(p, Case::Coincident) {
            let (l, r) = type2_residual(&*eps, &*lam, &s, &p, &Control::None).unwrap();
            total += 1;
            discordant += usize::from((l < gate) != (r < gate));
            misclassified += usize::from((l < gate) != good);
        }
        let p = random_params(&mut rng, Case::Noncoincident, [0.5, 5.0]);
        let s = rand_n(&mut rng);
        for (_, eps, good) in battery(p, Case::Noncoincident) {
            let (l, r) = type2_residual(&*eps, &*lam, &s, &p, &Control::None).unwrap();
            total += 1;
            discordant += usize::from((l < gate) != (r < gate));
            misclassified += usize::from((l < gate) != good);
        }
    }
    outcome(
        discordant == 0 && misclassified == 0,
        format!("{total} cases, {discordant} discordant, {misclassified} with unexpected verdict"),
    )
}

fn control_semantics() -> Outcome {
    let p = reference(0.0);
    let c = 0.3;
    let s0 = ReducedStateC::new([1.0, 1.0, 1.0], 0.0, 1.0);
    let traj: Trajectory<ReducedStateC> = simulate_reduced(s0, &p, &Control::Constant(c), &StepConfig::new(1e-3, 1000)).unwrap();
    let l_err = traj
        .samples
        .iter()
        .map(|x| (x.state.l - (s0.l + c * x.t)).abs())
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut exact = true;
    for _ in 0..1000 {
        let s = rand_n(&mut rng);
        let pn = random_params(&mut rng, Case::Noncoincident, [0.5, 5.0]);
        let base = vf_reduced_n(&s, &pn);
        for u in [Control::Constant(rng.random_range(-1.0..1.0)), Control::LinearFeedback { gain: 1.0 }] {
            let lifted = apply_control(&base, &u, &s, 0.0).unwrap();
            exact &= lifted.pi_dot == base.pi_dot && lifted.gamma_dot == base.gamma_dot && lifted.alpha_dot == base.alpha_dot;
            exact &= lifted.l_dot() == base.l_dot + u.torque(&s, 0.0);
        }
    }
    outcome(l_err < 1e-10 && exact, format!("|l(t) - l0 - ct| {l_err:.1e}, non-fiber components exact: {exact}"))
}

fn endpoint_error_rk4(dt: f64, t_end: f64, reference: &ReducedStateC) -> f64 {
    let p = self::reference(0.0);
    let s0 = ReducedStateC::new([1.0, 1.0, 1.0], 0.0, 1.0);
    let traj = simulate_reduced(s0, &p, &Control::None, &StepConfig::new(dt, (t_end / dt).round() as usize)).unwrap();
    max_diff(&traj.last().state.coords(), &reference.coords())
}

fn endpoint_rkmk4(dt: f64, t_end: f64) -> FullState<ReducedStateC> {
    let p = reference(0.0);
    let s0 = FullState::new(Rotation::identity(), ReducedStateC::new([1.0, 1.0, 1.0], 0.0, 1.0));
    let traj = simulate_full_rkmk4(s0, &p, &Control::None, &StepConfig::new(dt, (t_end / dt).round() as usize)).unwrap();
    traj.last().state
}

fn full_distance(a: &FullState<ReducedStateC>, b: &FullState<ReducedStateC>) -> f64 {
    (a.attitude.matrix() - b.attitude.matrix()).amax().max(max_diff(&a.reduced.coords(), &b.reduced.coords()))
}

fn integrator_order() -> Outcome {
    let (dt, t_end) = (0.04, 2.0);
    let p = reference(0.0);
    let s0 = ReducedStateC::new([1.0, 1.0, 1.0], 0.0, 1.0);
    let fine = simulate_reduced(s0, &p, &Control::None, &StepConfig::new(dt / 16.0, (16.0 * t_end / dt).round() as usize))
        .unwrap()
        .last()
        .state;
    let rk4 = (endpoint_error_rk4(dt, t_end, &fine) / endpoint_error_rk4(dt / 2.0, t_end, &fine)).log2();

    let fine = endpoint_rkmk4(dt / 16.0, t_end);
    let e1 = full_distance(&endpoint_rkmk4(dt, t_end), &fine);
    let e2 = full_distance(&endpoint_rkmk4(dt / 2.0, t_end), &fine);
    let mk = (e1 / e2).log2();

    let spin = FullState::new(Rotation::identity(), ReducedStateC::new([0.0, 0.0, p.ibar.z], 0.0, 0.0));
    let traj = simulate_full_rkmk4(spin, &p, &Control::None, &StepConfig::new(1e-3, 10_000)).unwrap();
    let orth = traj.samples.iter().map(|x| x.state.attitude.orthogonality_residual()).fold(0.0, f64::max);

    outcome(
        (rk4 - 4.0).abs() <= 0.2 && (mk - 4.0).abs() <= 0.2 && orth < 1e-12,
        format!("rk4 order {rk4:.3}, rkmk4 order {mk:.3}, max |A^T A - I| {orth:.1e}"),
    )
}

fn degeneration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_params(&mut rng, Case::Noncoincident, [0.5, 5.0]);
        let pi = rand_vec(&mut rng, 3.0);
        let gamma = random_unit(&mut rng);
        let omega = Vec3::new(pi.x / p.ibar.x, pi.y / p.ibar.y, pi.z / p.ibar.z);

        let euler = pi.cross(&omega);
        let v = vf_reduced_c(&ReducedStateC::new(pi.into(), 0.0, 0.0), &p);
        worst = worst.max((v.pi_dot - euler).amax());

        let top_pi = pi.cross(&omega) + gamma.cross(&p.chi) * p.gh;
        let top_gamma = gamma.cross(&omega);
        let v = vf_reduced_n(&ReducedStateN::new(pi.into(), gamma.into(), 0.0, 0.0), &p);
        worst = worst.max((v.pi_dot - top_pi).amax()).max((v.gamma_dot - top_gamma).amax());
    }
    outcome(worst < 1e-12, format!("max deviation from rigid body / heavy top {worst:.1e} (tol 1e-12)"))
}

fn run_cli(dir: &std::path::Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_srotor"))
        .arg("--quiet")
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

fn cli_contract() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("reference.json");
    std::fs::write(
        &config,
        r#"{"case": "coincident", "params": {"inertia": [3, 2, 1], "j3": 1},
            "initial": {"pi": [1, 1, 1], "alpha": 0, "l": 1}, "dt": 1e-3, "steps": 10000}"#,
    )
    .unwrap();
    let hj = dir.path().join("hj.json");
    std::fs::write(&hj, r#"{"points": 200, "map_points": 1}"#).unwrap();

    let mut runs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let sim = run_cli(&out, &["simulate", config.to_str().unwrap()]);
        let suite = run_cli(&out, &["--seed", "7", "hj-suite", hj.to_str().unwrap()]);
        let files: Vec<Vec<u8>> = ["trajectory.csv", "report.json", "hj_report.json"]
            .iter()
            .map(|f| std::fs::read(out.join(f)).unwrap_or_default())
            .collect();
        runs.push((sim.status.code(), suite.status.code(), files));
    }
    let csv = String::from_utf8(runs[0].2[0].clone()).unwrap();
    let h0: f64 = csv
        .lines()
        .nth(1)
        .and_then(|row| row.split(',').nth(6))
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN);
    let digits_ok = format!("{h0:.12}") == format!("{:.12}", 11.0 / 12.0);
    let identical = runs[0].2 == runs[1].2 && runs[0].2.iter().all(|f| !f.is_empty());
    let codes_ok = runs.iter().all(|r| r.0 == Some(0) && r.1 == Some(0));
    outcome(
        digits_ok && identical && codes_ok,
        format!("H(0) = {h0:.15}, repeated runs byte-identical: {identical}, exit codes 0: {codes_ok}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("bracket vs closed-form oracle", bracket_oracle),
        ("conservation suite", conservation),
        ("Noether suite", noether),
        ("reduction commutation", commutation),
        ("Type I Hamilton-Jacobi", type1),
        ("Type II equivalence", type2),
        ("control semantics", control_semantics),
        ("integrator order", integrator_order),
        ("degeneration to rigid body / heavy top", degeneration),
        ("CLI contract", cli_contract),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failures += usize::from(!o.passed);
        println!("{} [{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
