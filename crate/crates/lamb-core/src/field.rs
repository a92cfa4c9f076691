//! Reconstruction of the space-time displacement field from the oscillator
//! trajectory and the travelling-wave components, plus the PDE-side
//! diagnostics (junction residual, frame distance, interior wave residual).
//!
//! Everything here is evaluation, not solving: off the junction the string
//! obeys the free wave equation, so the solution in each region is an exact
//! combination of travelling profiles and the (time-shifted) junction
//! trajectory. Region seams (`x = 0`, `|x| = at`) are evaluated from the
//! interaction side.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oscillator::{OdeProblem, Trajectory};
use crate::reduction::{DalembertSplit, IncomingScenario};

/// One time slice of the displacement field on a spatial grid.
#[derive(Debug, Clone, Serialize)]
pub struct FieldFrame {
    pub t: f64,
    pub x_grid: Vec<f64>,
    pub u: Vec<f64>,
    pub u_t: Vec<f64>,
    pub u_x: Vec<f64>,
}

impl FieldFrame {
    fn with_capacity(t: f64, x_grid: Vec<f64>) -> Self {
        let n = x_grid.len();
        FieldFrame {
            t,
            x_grid,
            u: Vec::with_capacity(n),
            u_t: Vec::with_capacity(n),
            u_x: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, u: f64, u_t: f64, u_x: f64) {
        self.u.push(u);
        self.u_t.push(u_t);
        self.u_x.push(u_x);
    }
}

/// Symmetric uniform grid of `cells + 1` nodes on `[−r, r]`. The node count
/// is odd and the nodes are computed so that `x = 0` and `x = ±r` are exact.
/// `cells` must be even (composite Simpson quadrature needs paired cells).
pub fn uniform_grid(r: f64, cells: usize) -> Result<Vec<f64>> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid(format!("grid half-width must be positive, got {r}")));
    }
    if cells < 2 || !cells.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "grid cell count must be even and at least 2, got {cells}"
        )));
    }
    let n = cells as f64;
    // the fraction is formed first so that it is exactly ±1 at the ends and
    // exactly 0 in the middle, making those nodes exact after scaling by r
    Ok((0..=cells).map(|i| r * ((2.0 * i as f64 - n) / n)).collect())
}

fn check_coverage(traj: &Trajectory, t: f64) -> Result<()> {
    let slack = 1e-9 * traj.step();
    if t < -slack || t > traj.t1() + slack {
        return Err(Error::OutOfSpan { t, t0: traj.t0(), t1: traj.t1() });
    }
    if traj.t0() > slack {
        return Err(Error::invalid(format!(
            "field reconstruction needs a trajectory starting at 0, got t0 = {}",
            traj.t0()
        )));
    }
    Ok(())
}

/// Evaluate the displacement field at time `t` on `x_grid`.
///
/// Regions (seams included in the interaction regions):
/// - `x > at`: free waves, `f₊(x−at) + g₊(x+at)`;
/// - `0 ≤ x ≤ at`: `y(t−x/a) + g₊(x+at) − g₊(at−x)`;
/// - `−at ≤ x < 0`: `y(t+x/a) + f₋(x−at) − f₋(−at−x)`;
/// - `x < −at`: free waves, `f₋(x−at) + g₋(x+at)`.
///
/// `u_t`/`u_x` come from the exact profile derivatives and the trajectory's
/// dense-output derivative; nothing is finite-differenced.
pub fn reconstruct(
    split: &DalembertSplit,
    traj: &Trajectory,
    t: f64,
    x_grid: &[f64],
) -> Result<FieldFrame> {
    check_coverage(traj, t)?;
    let a = split.wave_speed();
    let w = a * t;
    let mut frame = FieldFrame::with_capacity(t, x_grid.to_vec());
    for &x in x_grid {
        if x > w {
            let (fp, gp) = (&split.f_plus, &split.g_plus);
            let (df, dg) = (fp.eval_deriv(x - w), gp.eval_deriv(x + w));
            frame.push(fp.eval(x - w) + gp.eval(x + w), a * (dg - df), df + dg);
        } else if x >= 0.0 {
            let s = t - x / a;
            let (y, ydot) = (traj.y(s)?, traj.y_dot(s)?);
            let g = &split.g_plus;
            let (d_out, d_in) = (g.eval_deriv(x + w), g.eval_deriv(w - x));
            // the wave difference is grouped first so that it vanishes
            // exactly at x = 0 and u(0,t) stays y(t) bit for bit
            let wave = g.eval(x + w) - g.eval(w - x);
            frame.push(y + wave, ydot + a * (d_out - d_in), -ydot / a + d_out + d_in);
        } else if x >= -w {
            let s = t + x / a;
            let (y, ydot) = (traj.y(s)?, traj.y_dot(s)?);
            let f = &split.f_minus;
            let (d_out, d_in) = (f.eval_deriv(x - w), f.eval_deriv(-w - x));
            let wave = f.eval(x - w) - f.eval(-w - x);
            frame.push(y + wave, ydot + a * (d_in - d_out), ydot / a + d_out + d_in);
        } else {
            let (fm, gm) = (&split.f_minus, &split.g_minus);
            let (df, dg) = (fm.eval_deriv(x - w), gm.eval_deriv(x + w));
            frame.push(fm.eval(x - w) + gm.eval(x + w), a * (dg - df), df + dg);
        }
    }
    Ok(frame)
}

/// Evaluate the limit (asymptotic) field: the same region formula as
/// [`reconstruct`], applied to the split of the shifted data (origin value
/// moved to the limiting junction level) and the periodic junction
/// trajectory. Inside the light cone the shift cancels and the frame is
/// time-periodic; outside it reproduces the shifted free field.
pub fn reconstruct_limit(
    shifted_split: &DalembertSplit,
    yp_traj: &Trajectory,
    t: f64,
    x_grid: &[f64],
) -> Result<FieldFrame> {
    reconstruct(shifted_split, yp_traj, t, x_grid)
}

/// Evaluate the field for an incoming-wave scenario at time `t`.
///
/// Regions:
/// - `x > at`: the undisturbed incoming wave `p(x+at)`;
/// - `0 ≤ x ≤ at`: `y(t−x/a) − p(at−x) + p(x+at)`;
/// - `−at ≤ x < 0`: the transmitted wave `y(t+x/a)`;
/// - `x < −at`: the rest level `p₀` exactly.
pub fn reconstruct_incoming(
    scenario: &IncomingScenario,
    traj: &Trajectory,
    t: f64,
    x_grid: &[f64],
) -> Result<FieldFrame> {
    check_coverage(traj, t)?;
    let a = scenario.params().wave_speed();
    let w = a * t;
    let p = scenario.wave();
    let mut frame = FieldFrame::with_capacity(t, x_grid.to_vec());
    for &x in x_grid {
        if x > w {
            let d = p.eval_deriv(x + w);
            frame.push(p.eval(x + w), a * d, d);
        } else if x >= 0.0 {
            let s = t - x / a;
            let (y, ydot) = (traj.y(s)?, traj.y_dot(s)?);
            let (d_out, d_in) = (p.eval_deriv(x + w), p.eval_deriv(w - x));
            let wave = p.eval(x + w) - p.eval(w - x);
            frame.push(y + wave, ydot + a * (d_out - d_in), -ydot / a + d_out + d_in);
        } else if x >= -w {
            let s = t + x / a;
            let (y, ydot) = (traj.y(s)?, traj.y_dot(s)?);
            frame.push(y, ydot, ydot / a);
        } else {
            frame.push(scenario.rest_level(), 0.0, 0.0);
        }
    }
    Ok(frame)
}

/// Evaluate the limit field of an incoming-wave scenario.
///
/// Two regions only; the periodic junction trajectory is extended by its
/// initial value (with zero velocity) for negative arguments:
/// - `x ≥ 0`: `y_p(t−x/a) − p(at−x) + p(x+at)`;
/// - `x < 0`: `y_p(t+x/a)`.
///
/// At `t = 0` the right half-line carries the limiting reflected profile
/// `q(x) = y_p(0) + p(x) − p₀`.
pub fn reconstruct_incoming_limit(
    scenario: &IncomingScenario,
    yp_traj: &Trajectory,
    t: f64,
    x_grid: &[f64],
) -> Result<FieldFrame> {
    if yp_traj.t0() > 1e-9 * yp_traj.step() {
        return Err(Error::invalid(format!(
            "limit reconstruction needs a periodic trajectory starting at 0, got t0 = {}",
            yp_traj.t0()
        )));
    }
    let a = scenario.params().wave_speed();
    let w = a * t;
    let p = scenario.wave();
    let rest = (yp_traj.knot_state(0).y, 0.0);
    let yp = |s: f64| -> Result<(f64, f64)> {
        if s >= 0.0 {
            Ok((yp_traj.y(s)?, yp_traj.y_dot(s)?))
        } else {
            Ok(rest)
        }
    };
    let mut frame = FieldFrame::with_capacity(t, x_grid.to_vec());
    for &x in x_grid {
        if x >= 0.0 {
            let (y, ydot) = yp(t - x / a)?;
            let (d_out, d_in) = (p.eval_deriv(x + w), p.eval_deriv(w - x));
            let wave = p.eval(x + w) - p.eval(w - x);
            frame.push(y + wave, ydot + a * (d_out - d_in), -ydot / a + d_out + d_in);
        } else {
            let (y, ydot) = yp(t + x / a)?;
            frame.push(y, ydot, ydot / a);
        }
    }
    Ok(frame)
}

/// Residual of the junction balance law at time `t`:
/// `|m·ÿ − F(y) − κ·(u_x(0⁺) − u_x(0⁻))|` (first term absent for the
/// massless spring). The one-sided slopes come from the travelling-wave
/// components and the junction velocity:
/// `u_x(0⁺) = 2g₊'(at) − ẏ/a`, `u_x(0⁻) = 2f₋'(−at) + ẏ/a`.
pub fn jump_residual(
    prob: &OdeProblem,
    split: &DalembertSplit,
    traj: &Trajectory,
    t: f64,
) -> Result<f64> {
    let a = split.wave_speed();
    let incoming = split.g_plus.eval_deriv(a * t);
    let outgoing = split.f_minus.eval_deriv(-a * t);
    junction_balance(prob, traj, t, incoming, outgoing)
}

/// [`jump_residual`] for an incoming-wave scenario, where the role of both
/// travelling components on the driven side is played by the incoming wave.
pub fn jump_residual_incoming(
    prob: &OdeProblem,
    scenario: &IncomingScenario,
    traj: &Trajectory,
    t: f64,
) -> Result<f64> {
    let a = scenario.params().wave_speed();
    let incoming = scenario.wave().eval_deriv(a * t);
    junction_balance(prob, traj, t, incoming, 0.0)
}

fn junction_balance(
    prob: &OdeProblem,
    traj: &Trajectory,
    t: f64,
    g_plus_deriv: f64,
    f_minus_deriv: f64,
) -> Result<f64> {
    let params = prob.params();
    let a = params.wave_speed();
    let kappa = params.kappa;
    let y = traj.y(t)?;
    let ydot = traj.y_dot(t)?;
    let ux_plus = 2.0 * g_plus_deriv - ydot / a;
    let ux_minus = 2.0 * f_minus_deriv + ydot / a;
    let force = prob.force().eval(y)?;
    let balance = force + kappa * (ux_plus - ux_minus);
    if params.has_mass() {
        Ok((params.mass * traj.v_dot(t)? - balance).abs())
    } else {
        Ok(balance.abs())
    }
}

/// Distance between two frames at the same time on the same grid: Simpson
/// quadrature of `(u_t gap)² + (u_x gap)²` over the grid plus the largest
/// displacement gap.
pub fn field_convergence(frame: &FieldFrame, frame_ref: &FieldFrame) -> Result<f64> {
    let n = frame.x_grid.len();
    if frame_ref.x_grid.len() != n || n < 3 || !(n - 1).is_multiple_of(2) {
        return Err(Error::GridMismatch(format!(
            "frames must share an even-celled grid; got {} and {} nodes",
            n,
            frame_ref.x_grid.len()
        )));
    }
    for (xa, xb) in frame.x_grid.iter().zip(&frame_ref.x_grid) {
        if xa != xb {
            return Err(Error::GridMismatch("frames are on different grids".into()));
        }
    }
    if (frame.t - frame_ref.t).abs() > 1e-12 * (1.0 + frame.t.abs()) {
        return Err(Error::GridMismatch(format!(
            "frames are at different times: {} vs {}",
            frame.t, frame_ref.t
        )));
    }
    let gap_sq = |i: usize| -> f64 {
        let dt = frame.u_t[i] - frame_ref.u_t[i];
        let dx = frame.u_x[i] - frame_ref.u_x[i];
        dt * dt + dx * dx
    };
    let h = frame.x_grid[1] - frame.x_grid[0];
    let mut integral = 0.0;
    let mut i = 0;
    while i + 2 < n + 1 {
        integral += h / 3.0 * (gap_sq(i) + 4.0 * gap_sq(i + 1) + gap_sq(i + 2));
        i += 2;
    }
    let sup = frame
        .u
        .iter()
        .zip(&frame_ref.u)
        .map(|(ua, ub)| (ua - ub).abs())
        .fold(0.0, f64::max);
    Ok(integral + sup)
}

/// Largest interior residual of the wave equation `μ·u_tt = κ·u_xx`
/// over three equally spaced frames, using central second differences in
/// both variables. Grid points within `seam_margin` of the junction or of
/// the light cone (at any of the three times) are excluded.
pub fn wave_residual(
    frames: &[&FieldFrame; 3],
    params: &crate::model::StringParams,
    seam_margin: f64,
) -> Result<f64> {
    let [lo, mid, hi] = frames;
    let n = mid.x_grid.len();
    if lo.x_grid.len() != n || hi.x_grid.len() != n || n < 3 {
        return Err(Error::GridMismatch("wave residual needs three frames on one grid".into()));
    }
    for i in 0..n {
        if lo.x_grid[i] != mid.x_grid[i] || hi.x_grid[i] != mid.x_grid[i] {
            return Err(Error::GridMismatch("wave residual frames are on different grids".into()));
        }
    }
    let ht_lo = mid.t - lo.t;
    let ht_hi = hi.t - mid.t;
    if ht_lo <= 0.0 || (ht_lo - ht_hi).abs() > 1e-12 * ht_lo {
        return Err(Error::invalid(format!(
            "wave residual needs equally spaced frame times, got gaps {ht_lo} and {ht_hi}"
        )));
    }
    let h_t = ht_lo;
    let h_x = mid.x_grid[1] - mid.x_grid[0];
    let a = params.wave_speed();
    let mut residual = 0.0_f64;
    for i in 1..n - 1 {
        let x = mid.x_grid[i];
        if x.abs() < seam_margin {
            continue;
        }
        let cone_gap = [lo.t, mid.t, hi.t]
            .iter()
            .map(|&tt| (x.abs() - a * tt).abs())
            .fold(f64::INFINITY, f64::min);
        if cone_gap < seam_margin {
            continue;
        }
        let d2t = (hi.u[i] - 2.0 * mid.u[i] + lo.u[i]) / (h_t * h_t);
        let d2x = (mid.u[i + 1] - 2.0 * mid.u[i] + mid.u[i - 1]) / (h_x * h_x);
        residual = residual.max((params.mu * d2t - params.kappa * d2x).abs());
    }
    Ok(residual)
}
