//! Release acceptance suite: one test per criterion, each checking a frozen
//! tolerance against an independently derived oracle and a wall-clock
//! budget. The tolerances are gates, not tunables — when one fails, the
//! library is wrong, not the number.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion PASS lines.

use std::time::Instant;

use lamb_core::field::{
    field_convergence, jump_residual, reconstruct, reconstruct_incoming,
    reconstruct_incoming_limit, reconstruct_limit, uniform_grid,
};
use lamb_core::model::{InitialData, OscillatorState, StringParams, DEFAULT_MATCH_TOL};
use lamb_core::oscillator::{energy_inequality_check, propagate, propagator_u, OdeProblem};
use lamb_core::poincare::{
    attractor_sample, find_bracket, fixed_point_newton_m, fixed_points_m0,
    iterate_to_fixed_point, PoincareMap, Stability,
};
use lamb_core::profile::PeriodicProfile;
use lamb_core::reduction::{build_drive, split, DalembertSplit, Drive, IncomingScenario};
use lamb_core::ForceField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

/// Assert the wall-clock budget and emit the per-criterion pass line.
fn report(n: u32, label: &str, started: Instant, budget_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < budget_s,
        "criterion {n:02} ({label}): FAIL — took {elapsed:.2}s, budget {budget_s}s"
    );
    println!("[acceptance] criterion {n:02} ({label}): PASS in {elapsed:.2}s");
}

/// Massless linear demo: unit string, F(y) = −y, flat displacement and a
/// cosine velocity hump on both half-lines, so the distilled drive profile
/// is exactly sin z and the reduced equation is ẏ = −y/2 + cos t.
fn linear_demo() -> (OdeProblem, DalembertSplit, InitialData) {
    let params = StringParams::new(1.0, 1.0, 0.0).unwrap();
    let zero = PeriodicProfile::constant(TAU, 0.0).unwrap();
    let cos = PeriodicProfile::new(TAU, 0.0, vec![1.0], vec![]).unwrap();
    let data =
        InitialData::new(zero.clone(), zero, cos.clone(), cos, 0.0, DEFAULT_MATCH_TOL).unwrap();
    let force = ForceField::from_source("-y").unwrap();
    let drive = build_drive(&params, &data).unwrap();
    let sp = split(&params, &data).unwrap();
    (OdeProblem::new(params, force, drive), sp, data)
}

/// Same string and data, but with an attached mass.
fn massive_demo(mass: f64, force_src: &str) -> (OdeProblem, DalembertSplit, InitialData) {
    let params = StringParams::new(1.0, 1.0, mass).unwrap();
    let zero = PeriodicProfile::constant(TAU, 0.0).unwrap();
    let cos = PeriodicProfile::new(TAU, 0.0, vec![1.0], vec![]).unwrap();
    let data =
        InitialData::new(zero.clone(), zero, cos.clone(), cos, 0.0, DEFAULT_MATCH_TOL).unwrap();
    let force = ForceField::from_source(force_src).unwrap();
    let drive = build_drive(&params, &data).unwrap();
    let sp = split(&params, &data).unwrap();
    (OdeProblem::new(params, force, drive), sp, data)
}

/// Incoming-wave demo: p(z) = 1 − cos z arriving on a resting string with a
/// linear spring, so the junction obeys ẏ = −y/2 + sin t and the periodic
/// response is y_p(t) = −0.8·cos t + 0.4·sin t.
fn incoming_demo() -> (OdeProblem, IncomingScenario) {
    let params = StringParams::new(1.0, 1.0, 0.0).unwrap();
    let force = ForceField::from_source("-y").unwrap();
    let p = PeriodicProfile::new(TAU, 1.0, vec![-1.0], vec![]).unwrap();
    let scenario = IncomingScenario::new(params, p, 0.0, &force, 1e-9).unwrap();
    let drive = scenario.drive();
    (OdeProblem::new(params, force, drive), scenario)
}

/// Exact solution of ẏ = −y/2 + cos t from y(0) = y0.
fn linear_oracle(t: f64, y0: f64) -> f64 {
    0.4 * t.cos() + 0.8 * t.sin() + (y0 - 0.4) * (-t / 2.0).exp()
}

/// Linear spring oracle: fixed point at 0.4, map slope e^{−π}, so one period
/// from rest lands on 0.4·(1 − e^{−π}).
#[test]
fn criterion_01_linear_fixed_point() {
    let t0 = Instant::now();
    let (prob, _, _) = linear_demo();
    let map = PoincareMap::new(&prob, None).unwrap();
    let bracket = find_bracket(&prob).unwrap();
    let set = fixed_points_m0(&map, &bracket, 512, 1e-10).unwrap();
    assert_eq!(set.points.len(), 1, "the linear map has a unique fixed point");
    let fp = &set.points[0];
    assert!(
        (fp.y - 0.4).abs() <= 1e-8,
        "fixed point {} is not within 1e-8 of 0.4",
        fp.y
    );
    let t_of_zero = map.apply_scalar(0.0).unwrap();
    let oracle = 0.4 * (1.0 - (-PI).exp());
    assert!(
        (t_of_zero - oracle).abs() <= 1e-8,
        "T(0) = {t_of_zero} is not within 1e-8 of {oracle}"
    );
    report(1, "linear fixed point", t0, 5.0);
}

/// First-order orbits are strictly monotone and land on a fixed point with
/// a tiny residual, from every seed.
#[test]
fn criterion_02_monotone_orbits() {
    let t0 = Instant::now();
    let (prob, _, _) = linear_demo();
    let map = PoincareMap::new(&prob, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..20 {
        let y0 = rng.gen_range(-5.0..5.0);
        let orbit =
            iterate_to_fixed_point(&map, &OscillatorState::spring(0.0, y0), 400, 1e-10).unwrap();
        assert!(orbit.converged, "seed {k} (y0 = {y0}) did not converge");
        assert_eq!(
            orbit.monotone,
            Some(true),
            "seed {k} (y0 = {y0}) produced a non-monotone orbit"
        );
        assert!(
            orbit.residual <= 1e-9,
            "seed {k} (y0 = {y0}) limit residual {} above 1e-9",
            orbit.residual
        );
    }
    report(2, "monotone orbits", t0, 10.0);
}

/// Undriven bistable spring: exactly the three equilibria, the middle one
/// repelling and the outer two attracting, consistent with the sign of
/// T(y) − y across the bracket.
#[test]
fn criterion_03_bistable_fixed_points() {
    let t0 = Instant::now();
    let params = StringParams::new(1.0, 1.0, 0.0).unwrap();
    let force = ForceField::from_source("y - y^3").unwrap();
    let drive = Drive::quiescent(TAU, 0.0).unwrap();
    let prob = OdeProblem::new(params, force, drive);
    let map = PoincareMap::new(&prob, None).unwrap();
    let bracket = find_bracket(&prob).unwrap();
    let set = fixed_points_m0(&map, &bracket, 512, 1e-10).unwrap();
    assert_eq!(set.points.len(), 3, "expected exactly three fixed points");
    let expected = [
        (-1.0, Stability::Attracting),
        (0.0, Stability::Repelling),
        (1.0, Stability::Attracting),
    ];
    for (fp, (y_exp, stab_exp)) in set.points.iter().zip(expected) {
        assert!(
            (fp.y - y_exp).abs() <= 1e-8,
            "fixed point {} is not within 1e-8 of {y_exp}",
            fp.y
        );
        assert_eq!(fp.stability, stab_exp, "stability of the point near {y_exp}");
    }
    // the recorded sign table must match the flow direction of the
    // autonomous equation: T(y) − y has the sign of F(y) = y − y³
    for &(y, g) in &set.sign_table {
        let f = y - y.powi(3);
        if f.abs() > 1e-3 {
            assert!(g * f > 0.0, "sign table disagrees with the flow at y = {y}");
        }
    }
    report(3, "bistable fixed points", t0, 5.0);
}

/// The reconstructed field converges to the periodic limit field uniformly
/// on |x| ≤ 5: the distance decays strictly in t and is tiny by t = 30.
#[test]
fn criterion_04_field_convergence() {
    let t0 = Instant::now();
    let (prob, sp, data) = linear_demo();
    let h = prob.default_step();
    let map = PoincareMap::new(&prob, None).unwrap();
    let bracket = find_bracket(&prob).unwrap();
    let ybar = fixed_points_m0(&map, &bracket, 512, 1e-10).unwrap().points[0].y;

    let traj = propagate(&prob, &OscillatorState::spring(0.0, data.u0_at_origin()), 36.0, h)
        .unwrap();
    let yp_traj = propagate(&prob, &OscillatorState::spring(0.0, ybar), 36.0, h).unwrap();
    let shifted = sp.shifted_to(data.u0_at_origin(), ybar);
    let grid = uniform_grid(5.0, 512).unwrap();

    let mut distances = Vec::new();
    for t in [10.0, 20.0, 30.0] {
        let frame = reconstruct(&sp, &traj, t, &grid).unwrap();
        let frame_p = reconstruct_limit(&shifted, &yp_traj, t, &grid).unwrap();
        distances.push(field_convergence(&frame, &frame_p).unwrap());
    }
    assert!(
        distances[0] > distances[1] && distances[1] > distances[2],
        "distances {distances:?} are not strictly decreasing"
    );
    assert!(
        distances[2] < 1e-4,
        "distance {} at t = 30 is not below 1e-4",
        distances[2]
    );
    report(4, "field convergence", t0, 30.0);
}

/// The limit field is periodic in time inside the light cone.
#[test]
fn criterion_05_limit_frame_periodicity() {
    let t0 = Instant::now();
    let (prob, sp, data) = linear_demo();
    let h = prob.default_step();
    let map = PoincareMap::new(&prob, None).unwrap();
    let bracket = find_bracket(&prob).unwrap();
    let ybar = fixed_points_m0(&map, &bracket, 512, 1e-10).unwrap().points[0].y;
    let yp_traj = propagate(&prob, &OscillatorState::spring(0.0, ybar), 24.0, h).unwrap();
    let shifted = sp.shifted_to(data.u0_at_origin(), ybar);

    let grid = uniform_grid(5.0, 512).unwrap();
    let t = 10.0; // a·t = 10 > 5, so the whole grid sits inside the cone
    let f1 = reconstruct_limit(&shifted, &yp_traj, t, &grid).unwrap();
    let f2 = reconstruct_limit(&shifted, &yp_traj, t + TAU, &grid).unwrap();
    let mut worst = 0.0_f64;
    for i in 0..grid.len() {
        worst = worst.max((f2.u[i] - f1.u[i]).abs());
    }
    assert!(worst <= 1e-7, "periodicity defect {worst} above 1e-7");
    report(5, "limit frame periodicity", t0, 10.0);
}

/// The oscillator never gains more energy than the incoming waves carry in:
/// E(t) − E(0) stays below the drive-work budget for 50 periods.
#[test]
fn criterion_06_energy_budget() {
    let t0 = Instant::now();
    let (prob, _, data) = massive_demo(2.0, "-y^3 - y");
    let h = prob.period() / 2048.0;
    let state = OscillatorState::oscillator(0.0, data.u0_at_origin(), data.y1);
    let traj = propagate(&prob, &state, 50.0 * prob.period(), h).unwrap();
    let check = energy_inequality_check(&prob, &traj, 1e-6).unwrap();
    assert!(
        check.pass && check.max_margin <= 1e-6,
        "energy margin {} above 1e-6",
        check.max_margin
    );
    report(6, "energy budget", t0, 10.0);
}

/// Strong damping collapses the attractor to a single point: every seed of
/// a 17×17 grid lands on it and the return map is a local contraction.
#[test]
fn criterion_07_attractor_singleton() {
    let t0 = Instant::now();
    let (prob, _, _) = massive_demo(0.25, "-y^3 - y");
    let map = PoincareMap::new(&prob, None).unwrap();
    let estimate = attractor_sample(&map, 17, 200, 100).unwrap();
    assert_eq!(estimate.seeds, 17 * 17, "all seeds must finish");
    assert!(
        estimate.diameter < 1e-6,
        "cloud diameter {} is not a singleton",
        estimate.diameter
    );
    let center = estimate.cloud[0];
    let fp = fixed_point_newton_m(&map, center, 50, 1e-10).unwrap();
    let rho = fp.spectral_radius.unwrap();
    assert!(rho < 1.0, "spectral radius {rho} is not below 1");
    assert_eq!(fp.stability, Stability::Attracting);
    // every kept point of every seed is within the cloud diameter of the
    // fixed point, i.e. all 289 orbits converged to it
    assert!(
        (center[0] - fp.y).abs() + (center[1] - fp.v.unwrap()).abs() < 1e-6,
        "cloud is not centred on the fixed point"
    );
    report(7, "attractor singleton", t0, 60.0);
}

/// The junction balance residual is small at the default step and shrinks
/// by at least 8× when the step halves.
#[test]
fn criterion_08_junction_residual_order() {
    let t0 = Instant::now();
    let (prob, sp, data) = massive_demo(0.25, "-y^3 - y");
    let state = OscillatorState::oscillator(0.0, data.u0_at_origin(), data.y1);
    let residual_at = |h: f64| -> f64 {
        let traj = propagate(&prob, &state, 12.0, h).unwrap();
        let step = traj.step();
        let count = ((12.0 / step) as usize).saturating_sub(1);
        // mid-step samples stress the dense output everywhere
        (0..64)
            .map(|k| {
                let idx = 1 + k * count / 64;
                let t = traj.t0() + (idx as f64 + 0.5) * step;
                jump_residual(&prob, &sp, &traj, t).unwrap()
            })
            .fold(0.0_f64, f64::max)
    };
    let h = prob.default_step();
    let coarse = residual_at(h);
    let fine = residual_at(h / 2.0);
    assert!(coarse <= 1e-5, "residual {coarse} above 1e-5 at the default step");
    assert!(
        coarse / fine >= 8.0,
        "residual only shrank {}× on halving ({} → {})",
        coarse / fine,
        coarse,
        fine
    );
    report(8, "junction residual order", t0, 10.0);
}

/// Two-parameter evolution identities: composition over an intermediate
/// time and invariance under a shift by one period.
#[test]
fn criterion_09_evolution_composition() {
    let t0 = Instant::now();
    let (prob, _, _) = linear_demo();
    let h = prob.default_step();
    let (r, s, t) = (0.3, 2.1, 5.7);
    let y0 = -1.3;
    let mid = propagator_u(&prob, r, s, y0, None, h).unwrap();
    let composed = propagator_u(&prob, s, t, mid.y, None, h).unwrap();
    let direct = propagator_u(&prob, r, t, y0, None, h).unwrap();
    assert!(
        (composed.y - direct.y).abs() <= 1e-8,
        "composition gap {}",
        (composed.y - direct.y).abs()
    );
    let shifted = propagator_u(&prob, r + TAU, t + TAU, y0, None, h).unwrap();
    assert!(
        (shifted.y - direct.y).abs() <= 1e-8,
        "period-shift gap {}",
        (shifted.y - direct.y).abs()
    );
    report(9, "evolution composition", t0, 5.0);
}

/// Incoming-wave limit: the periodic junction response starts at −0.8, the
/// limit profile is the rest level plus the wave swing, and the field
/// converges to the limit field monotonically.
#[test]
fn criterion_10_incoming_wave_limit() {
    let t0 = Instant::now();
    let (prob, scenario) = incoming_demo();
    let h = prob.default_step();
    let map = PoincareMap::new(&prob, None).unwrap();
    let bracket = find_bracket(&prob).unwrap();
    let set = fixed_points_m0(&map, &bracket, 512, 1e-10).unwrap();
    assert_eq!(set.points.len(), 1);
    let ybar = set.points[0].y;
    assert!(
        (ybar - (-0.8)).abs() <= 1e-6,
        "periodic junction value {ybar} is not within 1e-6 of -0.8"
    );

    let yp_traj = propagate(&prob, &OscillatorState::spring(0.0, ybar), 32.0, h).unwrap();
    let grid = uniform_grid(5.0, 256).unwrap();
    let limit0 = reconstruct_incoming_limit(&scenario, &yp_traj, 0.0, &grid).unwrap();
    let p = scenario.wave().periodic_part();
    let p0 = scenario.rest_level();
    for (i, &x) in grid.iter().enumerate() {
        if x > 0.0 {
            let q = ybar + p.eval(x) - p0;
            assert!(
                (limit0.u[i] - q).abs() <= 1e-8,
                "limit profile off by {} at x = {x}",
                (limit0.u[i] - q).abs()
            );
        }
    }

    let traj = propagate(&prob, &scenario.initial_state(), 32.0, h).unwrap();
    let mut curve = Vec::new();
    for n in 1..=4 {
        let t = n as f64 * TAU;
        let frame = reconstruct_incoming(&scenario, &traj, t, &grid).unwrap();
        let frame_p = reconstruct_incoming_limit(&scenario, &yp_traj, t, &grid).unwrap();
        curve.push(field_convergence(&frame, &frame_p).unwrap());
    }
    assert!(
        curve.windows(2).all(|w| w[1] < w[0]),
        "convergence curve {curve:?} is not decreasing"
    );
    report(10, "incoming-wave limit", t0, 30.0);
}

/// Halving the step cuts the endpoint error against the closed form by a
/// factor consistent with a fourth-order integrator.
#[test]
fn criterion_11_integrator_order() {
    let t0 = Instant::now();
    let (prob, _, _) = linear_demo();
    let y0 = 0.0;
    let exact = linear_oracle(TAU, y0);
    let err = |h: f64| -> f64 {
        (propagator_u(&prob, 0.0, TAU, y0, None, h).unwrap().y - exact).abs()
    };
    let h = TAU / 64.0;
    let ratio = err(h) / err(h / 2.0);
    assert!(
        (12.0..=20.0).contains(&ratio),
        "error ratio {ratio} outside [12, 20]"
    );
    report(11, "integrator order", t0, 5.0);
}
