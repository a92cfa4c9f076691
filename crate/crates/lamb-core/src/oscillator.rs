//! Time stepping of the reduced oscillator dynamics.
//!
//! With the string eliminated, the attachment point obeys one of two
//! non-autonomous ODEs driven by the superposition profile `p`:
//!
//! - massless spring: `ẏ = (a/2κ)·F(y) + a·p'(at)`;
//! - point mass:      `ẏ = v`, `v̇ = (1/m)·F(y) − k·v + k·a·p'(at)`
//!   with radiative damping `k = 2κ/(am)`.
//!
//! Both are integrated with the classical fixed-step RK4 scheme; the step
//! is forced to divide the requested span exactly. Dense output between
//! knots is cubic Hermite on the stored values and derivatives.

use crate::error::{Error, Result};
use crate::force::ForceField;
use crate::model::{OscillatorState, StringParams};
use crate::reduction::Drive;

/// Integration aborts once `|y| + |v|` exceeds this.
pub const BLOWUP_LIMIT: f64 = 1e12;

/// Default number of steps per drive period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 2048;

#[derive(Debug, Clone, Copy)]
enum Dynamics {
    /// `ẏ = force_scale·F(y) + drive_scale·p'(at)`
    Spring { force_scale: f64, drive_scale: f64 },
    /// `ẏ = v`, `v̇ = inv_mass·F(y) − damping·v + drive_scale·p'(at)`
    Oscillator { inv_mass: f64, damping: f64, drive_scale: f64 },
}

/// The reduced initial-value problem: parameters, force law, and drive.
#[derive(Debug, Clone)]
pub struct OdeProblem {
    params: StringParams,
    force: ForceField,
    drive: Drive,
    dynamics: Dynamics,
}

impl OdeProblem {
    pub fn new(params: StringParams, force: ForceField, drive: Drive) -> OdeProblem {
        let a = params.wave_speed();
        let dynamics = if params.has_mass() {
            let k = params.damping();
            Dynamics::Oscillator { inv_mass: params.inv_mass(), damping: k, drive_scale: k * a }
        } else {
            Dynamics::Spring {
                force_scale: a / (2.0 * params.kappa),
                drive_scale: a,
            }
        };
        OdeProblem { params, force, drive, dynamics }
    }

    pub fn params(&self) -> &StringParams {
        &self.params
    }

    pub fn force(&self) -> &ForceField {
        &self.force
    }

    pub fn drive(&self) -> &Drive {
        &self.drive
    }

    /// Whether the state carries a velocity component.
    pub fn is_second_order(&self) -> bool {
        matches!(self.dynamics, Dynamics::Oscillator { .. })
    }

    /// Temporal period of the drive, `ω₀ = ω/a`.
    pub fn period(&self) -> f64 {
        self.drive.period() / self.params.wave_speed()
    }

    /// Default step size, `ω₀ / 2048`.
    pub fn default_step(&self) -> f64 {
        self.period() / DEFAULT_STEPS_PER_PERIOD as f64
    }

    /// Scale factor in front of `F` in the first-order reduced equation.
    pub fn spring_force_scale(&self) -> f64 {
        self.params.wave_speed() / (2.0 * self.params.kappa)
    }

    /// Right-hand side; component 1 is identically zero for the spring.
    fn rhs(&self, t: f64, s: [f64; 2]) -> Result<[f64; 2]> {
        let a = self.params.wave_speed();
        let slope = self.drive.eval_deriv(a * t);
        match self.dynamics {
            Dynamics::Spring { force_scale, drive_scale } => {
                let f = self.force.eval(s[0])?;
                Ok([force_scale * f + drive_scale * slope, 0.0])
            }
            Dynamics::Oscillator { inv_mass, damping, drive_scale } => {
                let f = self.force.eval(s[0])?;
                Ok([s[1], inv_mass * f - damping * s[1] + drive_scale * slope])
            }
        }
    }

    fn pack(&self, state: &OscillatorState) -> Result<[f64; 2]> {
        state.validate()?;
        match (self.is_second_order(), state.v) {
            (true, Some(v)) => Ok([state.y, v]),
            (true, None) => Err(Error::invalid(
                "second-order dynamics need an initial velocity component",
            )),
            (false, _) => Ok([state.y, 0.0]),
        }
    }

    fn unpack(&self, t: f64, s: [f64; 2]) -> OscillatorState {
        if self.is_second_order() {
            OscillatorState::oscillator(t, s[0], s[1])
        } else {
            OscillatorState::spring(t, s[0])
        }
    }
}

/// One classical RK4 step from `t` with step `h`.
fn rk4_step(prob: &OdeProblem, t: f64, h: f64, s: [f64; 2]) -> Result<([f64; 2], [f64; 2])> {
    let k1 = prob.rhs(t, s)?;
    let k2 = prob.rhs(t + 0.5 * h, [s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]])?;
    let k3 = prob.rhs(t + 0.5 * h, [s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]])?;
    let k4 = prob.rhs(t + h, [s[0] + h * k3[0], s[1] + h * k3[1]])?;
    let next = [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ];
    Ok((next, k1))
}

/// Split `span` into steps no longer than `h_max`, preferring an exact hit.
pub(crate) fn step_count(span: f64, h_max: f64) -> Result<usize> {
    if !(h_max.is_finite() && h_max > 0.0) {
        return Err(Error::invalid(format!("step size must be positive, got {h_max}")));
    }
    if !(span.is_finite() && span > 0.0) {
        return Err(Error::invalid(format!("time span must be positive, got {span}")));
    }
    let ratio = span / h_max;
    let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    };
    Ok(n.max(1))
}

/// Walk `n` RK4 steps of size `h` from `(t0, s)`, invoking `record` with
/// `(knot index, state, derivative)` for every knot including the last.
/// Knot times are computed as `t0 + i·h` (not accumulated), so any two runs
/// over the same knots produce bitwise identical sequences.
fn integrate_raw(
    prob: &OdeProblem,
    t0: f64,
    h: f64,
    n: usize,
    mut s: [f64; 2],
    mut record: impl FnMut(usize, [f64; 2], [f64; 2]),
) -> Result<[f64; 2]> {
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let (next, k1) = rk4_step(prob, t, h, s).map_err(|e| match e {
            Error::Eval { message, .. } => Error::Integration { t, message },
            other => other,
        })?;
        record(i, s, k1);
        if !(next[0].is_finite() && next[1].is_finite())
            || next[0].abs() + next[1].abs() > BLOWUP_LIMIT
        {
            return Err(Error::Integration {
                t,
                message: format!(
                    "state exploded past |y| + |v| = {BLOWUP_LIMIT:e} (last good state y = {}, v = {})",
                    s[0], s[1]
                ),
            });
        }
        s = next;
    }
    let t_end = t0 + n as f64 * h;
    let k_end = prob.rhs(t_end, s).map_err(|e| match e {
        Error::Eval { message, .. } => Error::Integration { t: t_end, message },
        other => other,
    })?;
    record(n, s, k_end);
    Ok(s)
}

/// Integrate from `state0` to `t1`, recording every knot, with steps of at
/// most `h_max` (shrunk so they divide the span exactly).
pub fn propagate(
    prob: &OdeProblem,
    state0: &OscillatorState,
    t1: f64,
    h_max: f64,
) -> Result<Trajectory> {
    let s0 = prob.pack(state0)?;
    let n = step_count(t1 - state0.t, h_max)?;
    let h = (t1 - state0.t) / n as f64;
    let mut states = Vec::with_capacity(n + 1);
    let mut derivs = Vec::with_capacity(n + 1);
    integrate_raw(prob, state0.t, h, n, s0, |_, s, d| {
        states.push(s);
        derivs.push(d);
    })?;
    Ok(Trajectory {
        t0: state0.t,
        h,
        second_order: prob.is_second_order(),
        states,
        derivs,
    })
}

/// The two-parameter solution operator `U(t, s)`: carry a state from time
/// `s` to time `t ≥ s` and return only the endpoint. Uses the identical
/// step sequence as [`propagate`] over the same knots, so the results agree
/// bitwise.
pub fn propagator_u(
    prob: &OdeProblem,
    s: f64,
    t: f64,
    y0: f64,
    v0: Option<f64>,
    h_max: f64,
) -> Result<OscillatorState> {
    let state0 = OscillatorState { t: s, y: y0, v: v0 };
    if t == s {
        prob.pack(&state0)?; // validate shape even for the identity
        return Ok(state0);
    }
    let s0 = prob.pack(&state0)?;
    let n = step_count(t - s, h_max)?;
    let h = (t - s) / n as f64;
    let end = integrate_raw(prob, s, h, n, s0, |_, _, _| {})?;
    Ok(prob.unpack(t, end))
}

/// Endpoint of exactly `n` steps of size `h` from `(t0, s0)`; the kernel
/// behind the return map.
pub(crate) fn integrate_fixed(
    prob: &OdeProblem,
    t0: f64,
    h: f64,
    n: usize,
    s0: [f64; 2],
) -> Result<[f64; 2]> {
    integrate_raw(prob, t0, h, n, s0, |_, _, _| {})
}

/// A fixed-step solution record with cubic-Hermite dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    t0: f64,
    h: f64,
    second_order: bool,
    /// State at each knot; component 1 is zero for first-order dynamics.
    states: Vec<[f64; 2]>,
    /// Right-hand side at each knot.
    derivs: Vec<[f64; 2]>,
}

impl Trajectory {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.h * (self.states.len() - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn knots(&self) -> usize {
        self.states.len()
    }

    pub fn is_second_order(&self) -> bool {
        self.second_order
    }

    pub fn knot_time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }

    pub fn knot_state(&self, i: usize) -> OscillatorState {
        let s = self.states[i];
        if self.second_order {
            OscillatorState::oscillator(self.knot_time(i), s[0], s[1])
        } else {
            OscillatorState::spring(self.knot_time(i), s[0])
        }
    }

    pub fn final_state(&self) -> OscillatorState {
        self.knot_state(self.states.len() - 1)
    }

    /// Locate the Hermite cell containing `t`; returns (cell index, θ).
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let slack = 1e-9 * self.h;
        if t < self.t0 - slack || t > self.t1() + slack {
            return Err(Error::OutOfSpan { t, t0: self.t0, t1: self.t1() });
        }
        let cells = self.states.len() - 1;
        let raw = (t - self.t0) / self.h;
        let mut i = raw.floor() as isize;
        i = i.clamp(0, cells as isize - 1);
        let i = i as usize;
        let theta = ((t - self.knot_time(i)) / self.h).clamp(0.0, 1.0);
        Ok((i, theta))
    }

    fn hermite(&self, comp: usize, t: f64) -> Result<f64> {
        let (i, th) = self.locate(t)?;
        let (y0, d0) = (self.states[i][comp], self.derivs[i][comp]);
        let (y1, d1) = (self.states[i + 1][comp], self.derivs[i + 1][comp]);
        let th2 = th * th;
        let th3 = th2 * th;
        let h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
        let h10 = th3 - 2.0 * th2 + th;
        let h01 = -2.0 * th3 + 3.0 * th2;
        let h11 = th3 - th2;
        Ok(h00 * y0 + h10 * self.h * d0 + h01 * y1 + h11 * self.h * d1)
    }

    fn hermite_deriv(&self, comp: usize, t: f64) -> Result<f64> {
        let (i, th) = self.locate(t)?;
        let (y0, d0) = (self.states[i][comp], self.derivs[i][comp]);
        let (y1, d1) = (self.states[i + 1][comp], self.derivs[i + 1][comp]);
        let th2 = th * th;
        let h00 = 6.0 * th2 - 6.0 * th;
        let h10 = 3.0 * th2 - 4.0 * th + 1.0;
        let h01 = -6.0 * th2 + 6.0 * th;
        let h11 = 3.0 * th2 - 2.0 * th;
        Ok((h00 * y0 + h01 * y1) / self.h + h10 * d0 + h11 * d1)
    }

    /// Displacement `y(t)`.
    pub fn y(&self, t: f64) -> Result<f64> {
        self.hermite(0, t)
    }

    /// Velocity component `v(t)`; only second-order records carry one.
    pub fn v(&self, t: f64) -> Result<f64> {
        if !self.second_order {
            return Err(Error::invalid("first-order trajectory has no velocity component"));
        }
        self.hermite(1, t)
    }

    /// `ẏ(t)`: the interpolated `v` when present (the exact phase-space
    /// relation), otherwise the derivative of the Hermite interpolant.
    pub fn y_dot(&self, t: f64) -> Result<f64> {
        if self.second_order {
            self.hermite(1, t)
        } else {
            self.hermite_deriv(0, t)
        }
    }

    /// `ÿ(t)` for second-order records, from the Hermite interpolant of `v`.
    pub fn v_dot(&self, t: f64) -> Result<f64> {
        if !self.second_order {
            return Err(Error::invalid("first-order trajectory has no acceleration output"));
        }
        self.hermite_deriv(1, t)
    }

    pub fn state_at(&self, t: f64) -> Result<OscillatorState> {
        let y = self.y(t)?;
        Ok(if self.second_order {
            OscillatorState::oscillator(t, y, self.v(t)?)
        } else {
            OscillatorState::spring(t, y)
        })
    }
}

/// Oscillator energy `E = m·v²/2 + V(y)` (for the massless spring just
/// `V(y)`).
pub fn energy(prob: &OdeProblem, state: &OscillatorState) -> Result<f64> {
    let kinetic = match (prob.params().has_mass(), state.v) {
        (true, Some(v)) => 0.5 * prob.params().mass * v * v,
        (true, None) => {
            return Err(Error::invalid("energy of a massive oscillator needs a velocity"))
        }
        (false, _) => 0.0,
    };
    Ok(kinetic + prob.force().potential(state.y)?)
}

/// Result of checking the radiated-energy budget along a trajectory.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EnergyCheck {
    /// Largest excess of `E(t) − E(0)` over the drive-work budget
    /// `(aκ/2)·∫₀ᵗ p'(as)² ds`; nonpositive (up to quadrature noise) when
    /// the dynamics honour the energy inequality.
    pub max_margin: f64,
    /// The budget at the final knot.
    pub final_budget: f64,
    /// Energy at the final knot minus energy at the start.
    pub final_gain: f64,
    pub pass: bool,
}

/// Verify the energy inequality at every knot of `traj` (second-order
/// dynamics only): the oscillator can never gain more energy than the
/// incoming waves carry in.
pub fn energy_inequality_check(
    prob: &OdeProblem,
    traj: &Trajectory,
    tol: f64,
) -> Result<EnergyCheck> {
    if !prob.is_second_order() {
        return Err(Error::invalid("the energy budget applies to the second-order dynamics"));
    }
    let a = prob.params().wave_speed();
    let rate = |t: f64| -> f64 {
        let s = prob.drive().eval_deriv(a * t);
        s * s
    };
    let scale = 0.5 * a * prob.params().kappa;
    let e0 = energy(prob, &traj.knot_state(0))?;
    let mut budget = 0.0;
    let mut max_margin = f64::NEG_INFINITY;
    let mut final_gain = 0.0;
    for i in 0..traj.knots() {
        if i > 0 {
            // accumulate ∫ p'(as)² ds with per-step Simpson (the integrand
            // is smooth and exactly evaluable anywhere)
            let t_prev = traj.knot_time(i - 1);
            let t_mid = t_prev + 0.5 * traj.step();
            let t_cur = traj.knot_time(i);
            budget += traj.step() / 6.0 * (rate(t_prev) + 4.0 * rate(t_mid) + rate(t_cur));
        }
        let gain = energy(prob, &traj.knot_state(i))? - e0;
        max_margin = max_margin.max(gain - scale * budget);
        final_gain = gain;
    }
    Ok(EnergyCheck { max_margin, final_budget: scale * budget, final_gain, pass: max_margin <= tol })
}

/// Continuous-dependence ratio for the massless spring: propagate two
/// seeds and compare their separation (derivative gap in L² over `[0, τ]`
/// plus the sup of the displacement gap) against the initial gap.
pub fn lipschitz_check(
    prob: &OdeProblem,
    y0_a: f64,
    y0_b: f64,
    tau: f64,
    h_max: f64,
) -> Result<f64> {
    if prob.is_second_order() {
        return Err(Error::invalid("the continuity ratio is defined for the massless spring"));
    }
    let gap0 = (y0_a - y0_b).abs();
    if gap0 == 0.0 {
        return Err(Error::invalid("seeds must differ"));
    }
    let ta = propagate(prob, &OscillatorState::spring(0.0, y0_a), tau, h_max)?;
    let tb = propagate(prob, &OscillatorState::spring(0.0, y0_b), tau, h_max)?;
    let mut l2 = 0.0;
    let mut sup = 0.0_f64;
    let sq_gap = |t: f64| -> Result<f64> {
        let d = ta.y_dot(t)? - tb.y_dot(t)?;
        Ok(d * d)
    };
    for i in 0..ta.knots() {
        let t = ta.knot_time(i);
        sup = sup.max((ta.y(t)? - tb.y(t)?).abs());
        if i > 0 {
            let prev = ta.knot_time(i - 1);
            let mid = prev + 0.5 * ta.step();
            l2 += ta.step() / 6.0 * (sq_gap(prev)? + 4.0 * sq_gap(mid)? + sq_gap(t)?);
        }
    }
    Ok((l2.sqrt() + sup) / gap0)
}
