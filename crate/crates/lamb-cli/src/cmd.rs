//! The five commands. Each one takes the merged configuration, the built
//! scenario, and the output directory, writes its artifacts, and returns the
//! process exit code (nonzero only for `verify` failures; everything else
//! reports failure through `Error`).

use std::path::Path;

use lamb_core::checks::{verify, VerifyScenario, VerifySettings};
use lamb_core::field::{
    field_convergence, jump_residual, jump_residual_incoming, reconstruct, reconstruct_incoming,
    reconstruct_incoming_limit, uniform_grid, wave_residual, FieldFrame,
};
use lamb_core::model::OscillatorState;
use lamb_core::oscillator::{energy_inequality_check, propagate, OdeProblem, Trajectory};
use lamb_core::poincare::{
    attractor_sample, find_bracket, fixed_point_newton_m, fixed_points_m0, iterate_to_fixed_point,
    FixedPoint, PoincareMap,
};
use lamb_core::{Error, Result};
use serde_json::json;

use crate::config::{Built, ScenarioConfig, StringScenario};
use crate::out::{write_csv, write_csv_indexed, write_json};

/// Oscillator state at t = 0 for the scenario.
fn initial_state(built: &Built) -> OscillatorState {
    match &built.scenario {
        StringScenario::Cauchy { data, .. } => {
            if built.prob.is_second_order() {
                OscillatorState::oscillator(0.0, data.u0_at_origin(), data.y1)
            } else {
                OscillatorState::spring(0.0, data.u0_at_origin())
            }
        }
        StringScenario::Incoming(sc) => sc.initial_state(),
    }
}

fn frame_at(built: &Built, traj: &Trajectory, t: f64, grid: &[f64]) -> Result<FieldFrame> {
    match &built.scenario {
        StringScenario::Cauchy { split, .. } => reconstruct(split, traj, t, grid),
        StringScenario::Incoming(sc) => reconstruct_incoming(sc, traj, t, grid),
    }
}

fn junction_residual(built: &Built, traj: &Trajectory, t: f64) -> Result<f64> {
    match &built.scenario {
        StringScenario::Cauchy { split, .. } => jump_residual(&built.prob, split, traj, t),
        StringScenario::Incoming(sc) => jump_residual_incoming(&built.prob, sc, traj, t),
    }
}

fn step(cfg: &ScenarioConfig, prob: &OdeProblem) -> f64 {
    cfg.numerics.h.unwrap_or_else(|| prob.default_step())
}

fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<f64>> {
    (0..traj.knots())
        .map(|i| {
            let s = traj.knot_state(i);
            match s.v {
                Some(v) => vec![s.t, s.y, v],
                None => vec![s.t, s.y],
            }
        })
        .collect()
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::invalid(format!("cannot serialize output: {e}")))
}

/// Integrate the junction dynamics, write the trajectory, the requested
/// field frames, and a residual summary.
pub fn simulate(cfg: &ScenarioConfig, built: &Built, out_dir: &Path) -> Result<u8> {
    let prob = &built.prob;
    let h = step(cfg, prob);
    let horizon = cfg.numerics.horizon_periods as f64 * prob.period();
    let traj = propagate(prob, &initial_state(built), horizon, h)?;

    let header = if prob.is_second_order() { "t,y,v" } else { "t,y" };
    write_csv(&out_dir.join("trajectory.csv"), header, trajectory_rows(&traj))?;

    let grid = uniform_grid(cfg.numerics.r, cfg.numerics.grid)?;
    let times = cfg.numerics.frame_times.clone().unwrap_or_else(|| {
        vec![horizon / 3.0, 2.0 * horizon / 3.0, horizon]
    });
    let mut frame_files = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let frame = frame_at(built, &traj, t, &grid)?;
        let name = format!("frame-{i:03}.csv");
        let rows = (0..grid.len())
            .map(|j| vec![frame.x_grid[j], frame.u[j], frame.u_t[j], frame.u_x[j]]);
        write_csv(&out_dir.join(&name), "x,u,u_t,u_x", rows)?;
        frame_files.push(json!({ "t": t, "file": name }));
    }

    // junction balance, sampled between knots where the dense output is
    // least accurate
    let mut jump_max = 0.0_f64;
    for k in 0..256 {
        let t = traj.t0() + (k as f64 + 0.5) / 256.0 * (traj.t1() - traj.t0());
        jump_max = jump_max.max(junction_residual(built, &traj, t)?);
    }

    let energy = if prob.is_second_order() {
        Some(energy_inequality_check(prob, &traj, 1e-6)?)
    } else {
        None
    };

    // interior wave-equation residual on three closely spaced frames; the
    // frame spacing deliberately avoids the characteristic ratio h_t = h_x/a,
    // where the difference stencil is exact for travelling waves
    let a = prob.params().wave_speed();
    let h_x = grid[1] - grid[0];
    let dt = 0.5 * h_x / a;
    let t_mid = 0.6 * horizon;
    let probe = [
        frame_at(built, &traj, t_mid - dt, &grid)?,
        frame_at(built, &traj, t_mid, &grid)?,
        frame_at(built, &traj, t_mid + dt, &grid)?,
    ];
    let wave = wave_residual(
        &[&probe[0], &probe[1], &probe[2]],
        prob.params(),
        2.0 * (h_x + a * dt),
    )?;

    let last = traj.final_state();
    let summary = json!({
        "command": "simulate",
        "h": h,
        "horizon": horizon,
        "t_final": last.t,
        "y_final": last.y,
        "v_final": last.v,
        "jump_residual_max": jump_max,
        "energy": energy.as_ref().map(to_value).transpose()?,
        "wave_residual": wave,
        "frames": frame_files,
    });
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(0)
}

/// Iterate the return map from the scenario's initial state and locate its
/// fixed points (scan + bisection for the first-order map, Newton for the
/// second-order one).
pub fn poincare(cfg: &ScenarioConfig, built: &Built, out_dir: &Path) -> Result<u8> {
    let prob = &built.prob;
    let map = PoincareMap::new(prob, cfg.numerics.h)?;
    let orbit =
        iterate_to_fixed_point(&map, &initial_state(built), cfg.numerics.n_iter, cfg.numerics.tol_fp)?;

    let header = if prob.is_second_order() { "n,y,v" } else { "n,y" };
    let rows = orbit.history.iter().enumerate().map(|(n, s)| {
        (n, match s.v {
            Some(v) => vec![s.y, v],
            None => vec![s.y],
        })
    });
    write_csv_indexed(&out_dir.join("iterates.csv"), header, rows)?;

    let orbit_json = json!({
        "converged": orbit.converged,
        "iterations": orbit.history.len() - 1,
        "limit_y": orbit.limit.y,
        "limit_v": orbit.limit.v,
        "residual": orbit.residual,
        "monotone": orbit.monotone,
    });

    let report = if prob.is_second_order() {
        let seed = [orbit.limit.y, orbit.limit.v.expect("second-order state")];
        // convergence is not guaranteed for the second-order map, so a
        // fruitless search is reported rather than treated as a failure
        let (points, note): (Vec<FixedPoint>, Option<String>) =
            match fixed_point_newton_m(&map, seed, 100, cfg.numerics.tol_fp) {
                Ok(fp) => (vec![fp], None),
                Err(Error::NoConvergence(msg)) => (vec![], Some(msg)),
                Err(other) => return Err(other),
            };
        json!({
            "command": "poincare",
            "points": to_value(&points)?,
            "bracket": null,
            "sign_table": null,
            "orbit": orbit_json,
            "note": note,
        })
    } else {
        let bracket = find_bracket(prob)?;
        let set = fixed_points_m0(&map, &bracket, cfg.numerics.fp_grid, cfg.numerics.tol_fp)?;
        if !orbit.converged {
            return Err(Error::NoConvergence(format!(
                "orbit did not settle within {} iterations although the first-order map \
                 guarantees convergence; residual {:.3e}",
                cfg.numerics.n_iter, orbit.residual
            )));
        }
        json!({
            "command": "poincare",
            "points": to_value(&set.points)?,
            "bracket": to_value(&set.bracket)?,
            "sign_table": to_value(&set.sign_table)?,
            "orbit": orbit_json,
        })
    };
    write_json(&out_dir.join("fixed_points.json"), &report)?;
    Ok(0)
}

/// Sample the invariant set of the second-order return map.
pub fn attractor(cfg: &ScenarioConfig, built: &Built, out_dir: &Path) -> Result<u8> {
    let prob = &built.prob;
    if !prob.is_second_order() {
        return Err(Error::invalid("attractor sampling needs an attached mass (m > 0)"));
    }
    let map = PoincareMap::new(prob, cfg.numerics.h)?;
    let estimate = attractor_sample(
        &map,
        cfg.numerics.seed_grid,
        cfg.numerics.burn_in,
        cfg.numerics.keep,
    )?;
    write_csv(
        &out_dir.join("cloud.csv"),
        "y,v",
        estimate.cloud.iter().map(|p| vec![p[0], p[1]]),
    )?;
    let boxed = json!({
        "command": "attractor",
        "y_bound": estimate.y_bound,
        "v_bound": estimate.v_bound,
        "diameter": estimate.diameter,
        "invariance_defect": estimate.invariance_defect,
        "seeds": estimate.seeds,
        "raw_points": estimate.raw_points,
        "cloud_points": estimate.cloud.len(),
    });
    write_json(&out_dir.join("box.json"), &boxed)?;
    Ok(0)
}

/// Compare the evolving field of an incoming-wave scenario against its
/// periodic limit: locate the periodic junction response, reconstruct both
/// fields period by period, and write the convergence curve plus the limit
/// profile.
pub fn limit_amplitude(cfg: &ScenarioConfig, built: &Built, out_dir: &Path) -> Result<u8> {
    let prob = &built.prob;
    let scenario = match &built.scenario {
        StringScenario::Incoming(sc) => sc,
        StringScenario::Cauchy { .. } => {
            return Err(Error::invalid("limit-amplitude needs an incoming_wave scenario"))
        }
    };
    let map = PoincareMap::new(prob, cfg.numerics.h)?;
    let orbit =
        iterate_to_fixed_point(&map, &scenario.initial_state(), cfg.numerics.n_iter, cfg.numerics.tol_fp)?;
    if !orbit.converged {
        return Err(Error::NoConvergence(format!(
            "junction orbit did not settle within {} iterations",
            cfg.numerics.n_iter
        )));
    }
    let periodic_state = if prob.is_second_order() {
        let seed = [orbit.limit.y, orbit.limit.v.expect("second-order state")];
        let fp = fixed_point_newton_m(&map, seed, 100, cfg.numerics.tol_fp)?;
        OscillatorState::oscillator(0.0, fp.y, fp.v.expect("second-order fixed point"))
    } else {
        let bracket = find_bracket(prob)?;
        let set = fixed_points_m0(&map, &bracket, cfg.numerics.fp_grid, cfg.numerics.tol_fp)?;
        let nearest = set
            .points
            .iter()
            .min_by(|a, b| {
                let da = (a.y - orbit.limit.y).abs();
                let db = (b.y - orbit.limit.y).abs();
                da.partial_cmp(&db).expect("finite distances")
            })
            .expect("the scan reports at least one fixed point");
        OscillatorState::spring(0.0, nearest.y)
    };

    let h = step(cfg, prob);
    let period = prob.period();
    let a = prob.params().wave_speed();
    let grid = uniform_grid(cfg.numerics.r, cfg.numerics.grid)?;
    // the first frame time whose backward characteristic stays after the
    // wave front's arrival
    let n_start = (cfg.numerics.r / (a * period)).ceil().max(1.0) as usize;
    let n_end = n_start.max(cfg.numerics.curve_periods);
    let horizon = n_end as f64 * period;
    let traj = propagate(prob, &scenario.initial_state(), horizon, h)?;
    let yp_traj = propagate(prob, &periodic_state, horizon, h)?;

    let mut curve = Vec::new();
    for n in n_start..=n_end {
        let t = n as f64 * period;
        let frame = reconstruct_incoming(scenario, &traj, t, &grid)?;
        let frame_p = reconstruct_incoming_limit(scenario, &yp_traj, t, &grid)?;
        curve.push((n, t, field_convergence(&frame, &frame_p)?));
    }
    write_csv_indexed(
        &out_dir.join("curve.csv"),
        "n,t,distance",
        curve.iter().map(|&(n, t, d)| (n, vec![t, d])),
    )?;

    let limit0 = reconstruct_incoming_limit(scenario, &yp_traj, 0.0, &grid)?;
    write_csv(
        &out_dir.join("q_profile.csv"),
        "x,q",
        (0..grid.len()).map(|i| vec![limit0.x_grid[i], limit0.u[i]]),
    )?;

    let distances: Vec<f64> = curve.iter().map(|&(_, _, d)| d).collect();
    let monotone = distances.windows(2).all(|w| w[1] < w[0]);
    let summary = json!({
        "command": "limit-amplitude",
        "y_p0": periodic_state.y,
        "v_p0": periodic_state.v,
        "rest_level": scenario.rest_level(),
        "final_distance": distances.last().copied(),
        "monotone_decreasing": monotone,
        "periods": [n_start, n_end],
    });
    write_json(&out_dir.join("limit.json"), &summary)?;
    Ok(0)
}

/// Run the structural invariant suite; print one line per check and exit
/// nonzero if any fails.
pub fn run_verify(cfg: &ScenarioConfig, built: &Built, out_dir: &Path) -> Result<u8> {
    let settings = VerifySettings {
        horizon_periods: cfg.numerics.horizon_periods,
        h_max: cfg.numerics.h,
        tol_fp: cfg.numerics.tol_fp,
    };
    let scenario = match &built.scenario {
        StringScenario::Cauchy { split, data } => VerifyScenario::Cauchy { split, data },
        StringScenario::Incoming(sc) => VerifyScenario::Incoming(sc),
    };
    let report = verify(&built.prob, &scenario, &settings)?;
    for check in &report.checks {
        let verdict = if check.pass { "pass" } else { "FAIL" };
        println!(
            "{verdict}  {:<24} measured {:.3e} against {:.3e}  ({})",
            check.name, check.measured, check.threshold, check.detail
        );
    }
    write_json(&out_dir.join("report.json"), &to_value(&report)?)?;
    Ok(if report.all_pass { 0 } else { 1 })
}
