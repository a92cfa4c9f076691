//! Reduction of the half-line wave data to the forcing felt by the attached
//! oscillator.
//!
//! Away from the origin the string carries free waves, so the initial data
//! on each half-line splits into a right-mover `f` and a left-mover `g`:
//!
//! ```text
//! f(z) = u0(z)/2 − (1/2a)·∫₀^z u1,   g(z) = u0(z)/2 + (1/2a)·∫₀^z u1
//! ```
//!
//! (the gauge constant that can be traded between `f` and `g` is fixed to
//! zero; see [`DalembertSplit::with_gauge`] for the invariance). With a
//! velocity of nonzero mean the integral grows linearly, which is exactly
//! the [`WaveComponent`] shape: periodic part plus ramp.
//!
//! Everything the oscillator feels from the string is the superposition of
//! the waves arriving at the origin from both sides:
//!
//! ```text
//! p(z) = (u0(z) + u0(−z))/2 + (1/2a)·∫_{−z}^{z} u1
//! ```
//!
//! which is periodic precisely because the velocity means on the two
//! half-lines cancel (validated on the initial data). Its derivative drives
//! the reduced oscillator equation; see the `oscillator` module.

use crate::error::{Error, Result};
use crate::force::ForceField;
use crate::model::{InitialData, StringParams};
use crate::profile::{PeriodicProfile, SteppedProfile, WaveComponent};

/// The four travelling-wave components of the initial data, one pair per
/// half-line: `u(x, t) = f(x − at) + g(x + at)` wherever the string is free.
#[derive(Debug, Clone)]
pub struct DalembertSplit {
    pub f_plus: WaveComponent,
    pub g_plus: WaveComponent,
    pub f_minus: WaveComponent,
    pub g_minus: WaveComponent,
    wave_speed: f64,
}

impl DalembertSplit {
    pub fn wave_speed(&self) -> f64 {
        self.wave_speed
    }

    /// Shift each right-mover by `c` and the matching left-mover by `−c`
    /// (independently per half-line). The reconstructed field is invariant
    /// under this change; the constructor fixes both constants to zero.
    pub fn with_gauge(&self, c_plus: f64, c_minus: f64) -> DalembertSplit {
        DalembertSplit {
            f_plus: self.f_plus.plus_constant(c_plus),
            g_plus: self.g_plus.plus_constant(-c_plus),
            f_minus: self.f_minus.plus_constant(c_minus),
            g_minus: self.g_minus.plus_constant(-c_minus),
            wave_speed: self.wave_speed,
        }
    }

    /// The split of the shifted data `u0 − u0(0) + new_origin` (velocity
    /// unchanged), used to build the limiting field: each component absorbs
    /// half of the constant shift.
    pub fn shifted_to(&self, u0_at_origin: f64, new_origin: f64) -> DalembertSplit {
        let half = 0.5 * (new_origin - u0_at_origin);
        DalembertSplit {
            f_plus: self.f_plus.plus_constant(half),
            g_plus: self.g_plus.plus_constant(half),
            f_minus: self.f_minus.plus_constant(half),
            g_minus: self.g_minus.plus_constant(half),
            wave_speed: self.wave_speed,
        }
    }
}

/// Split the initial data into travelling waves (gauge constants zero).
pub fn split(params: &StringParams, data: &InitialData) -> Result<DalembertSplit> {
    let a = params.wave_speed();
    let component = |u0: &PeriodicProfile, u1: &PeriodicProfile, sign: f64| -> WaveComponent {
        // u0/2 + sign/(2a)·(mean·z + A(z) − A(0)) with A the periodic
        // antiderivative of the mean-free part of u1
        let anti = u1.antiderivative();
        let periodic = u0
            .scaled(0.5)
            .add(&anti.scaled(sign / (2.0 * a)))
            .expect("profiles share the data period")
            .plus_constant(-anti.eval(0.0) * sign / (2.0 * a));
        WaveComponent::new(periodic, sign * u1.mean / (2.0 * a))
    };
    Ok(DalembertSplit {
        f_plus: component(&data.u0_plus, &data.u1_plus, -1.0),
        g_plus: component(&data.u0_plus, &data.u1_plus, 1.0),
        f_minus: component(&data.u0_minus, &data.u1_minus, -1.0),
        g_minus: component(&data.u0_minus, &data.u1_minus, 1.0),
        wave_speed: a,
    })
}

/// Superposition profile `p` of the waves arriving at the origin, with its
/// exact derivative. Only arguments `z = a·t ≥ 0` are ever consumed by the
/// dynamics, and there `p` is one periodic profile.
#[derive(Debug, Clone)]
pub struct Drive {
    profile: PeriodicProfile,
    deriv: PeriodicProfile,
}

impl Drive {
    pub fn new(profile: PeriodicProfile) -> Self {
        let deriv = profile.derivative();
        Self { profile, deriv }
    }

    /// An undriven system: constant superposition profile.
    pub fn quiescent(period: f64, level: f64) -> Result<Self> {
        Ok(Self::new(PeriodicProfile::constant(period, level)?))
    }

    /// Spatial period ω of the profile.
    pub fn period(&self) -> f64 {
        self.profile.period
    }

    /// `p(z)`.
    pub fn eval(&self, z: f64) -> f64 {
        self.profile.eval(z)
    }

    /// `p'(z)`.
    pub fn eval_deriv(&self, z: f64) -> f64 {
        self.deriv.eval(z)
    }

    /// Displacement the drive imposes at time zero, `p(0) = u0(0)`.
    pub fn initial_level(&self) -> f64 {
        self.profile.eval(0.0)
    }

    /// Largest `|p'|`, the drive magnitude the trapping construction needs.
    pub fn max_abs_deriv(&self) -> f64 {
        self.deriv.max_abs()
    }

    pub fn profile(&self) -> &PeriodicProfile {
        &self.profile
    }
}

/// Build the reduced drive from the initial data.
pub fn build_drive(params: &StringParams, data: &InitialData) -> Result<Drive> {
    let a = params.wave_speed();
    // p(z) = u0₊(z)/2 + u0₋(−z)/2
    //        + (1/2a)[A₊(z) − A₊(0)] − (1/2a)[A₋(−z) − A₋(0)]
    // where A± are periodic antiderivatives of the mean-free parts of u1±;
    // the ramps cancel because the velocity means cancel (validated).
    let anti_plus = data.u1_plus.antiderivative();
    let anti_minus_reflected = data.u1_minus.antiderivative().reflected();
    let profile = data
        .u0_plus
        .scaled(0.5)
        .add(&data.u0_minus.reflected().scaled(0.5))?
        .add(&anti_plus.scaled(1.0 / (2.0 * a)))?
        .add(&anti_minus_reflected.scaled(-1.0 / (2.0 * a)))?
        .plus_constant(
            (data.u1_minus.antiderivative().eval(0.0) - anti_plus.eval(0.0)) / (2.0 * a),
        );
    Ok(Drive::new(profile))
}

/// Scenario of a prescribed wave running in from the right half-line onto a
/// system at rest: for `t ≤ 0` the field is `p_in(x + at)` with `p_in`
/// constant (= `rest`) left of the origin and periodic to the right.
///
/// Equivalent initial data: `u0 = p_in`, `u1 = a·p_in'`, oscillator at
/// `y(0) = rest` with `ẏ(0) = 0`; the split has vanishing right-movers and
/// `g± = p_in`.
#[derive(Debug, Clone)]
pub struct IncomingScenario {
    wave: SteppedProfile,
    params: StringParams,
}

/// Default tolerance for the compatibility checks of an incoming wave.
pub const DEFAULT_INCOMING_TOL: f64 = 1e-9;

impl IncomingScenario {
    /// Validate and build. Requirements, each within `tol`:
    /// - the oscillator can rest at the wave's rest level: `F(rest) = 0`,
    /// - `C¹` junction at the origin: `p_in(0) = rest`, `p_in'(0+) = 0`.
    pub fn new(
        params: StringParams,
        periodic: PeriodicProfile,
        rest: f64,
        force: &ForceField,
        tol: f64,
    ) -> Result<Self> {
        let f_rest = force.eval(rest)?;
        if f_rest.abs() > tol {
            return Err(Error::invalid(format!(
                "rest level {rest} is not an equilibrium: F(rest) = {f_rest:.3e}"
            )));
        }
        let val_gap = (periodic.eval(0.0) - rest).abs();
        if val_gap > tol {
            return Err(Error::invalid(format!(
                "incoming wave does not meet its rest level at the origin: gap {val_gap:.3e}"
            )));
        }
        let slope = periodic.derivative().eval(0.0).abs();
        if slope > tol {
            return Err(Error::invalid(format!(
                "incoming wave must be flat at the junction: p'(0+) = {slope:.3e}"
            )));
        }
        Ok(Self { wave: SteppedProfile::new(rest, periodic), params })
    }

    pub fn params(&self) -> &StringParams {
        &self.params
    }

    /// The incoming wave profile (flat left of 0, periodic right of 0).
    pub fn wave(&self) -> &SteppedProfile {
        &self.wave
    }

    pub fn rest_level(&self) -> f64 {
        self.wave.rest_value()
    }

    /// Reduced drive: the oscillator sees the periodic branch for `t > 0`.
    pub fn drive(&self) -> Drive {
        Drive::new(self.wave.periodic_part().clone())
    }

    /// Oscillator state at the moment the wave front reaches the origin.
    pub fn initial_state(&self) -> crate::model::OscillatorState {
        if self.params.has_mass() {
            crate::model::OscillatorState::oscillator(0.0, self.rest_level(), 0.0)
        } else {
            crate::model::OscillatorState::spring(0.0, self.rest_level())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_MATCH_TOL;

    const TAU: f64 = std::f64::consts::TAU;

    fn zero() -> PeriodicProfile {
        PeriodicProfile::constant(TAU, 0.0).unwrap()
    }

    fn cos_profile() -> PeriodicProfile {
        PeriodicProfile::new(TAU, 0.0, vec![1.0], vec![]).unwrap()
    }

    /// u0 ≡ 0, u1 = cos on both sides, μ = κ = 1.
    fn cos_velocity_data() -> (StringParams, InitialData) {
        let params = StringParams::new(1.0, 1.0, 0.0).unwrap();
        let data = InitialData::new(
            zero(),
            zero(),
            cos_profile(),
            cos_profile(),
            0.0,
            DEFAULT_MATCH_TOL,
        )
        .unwrap();
        (params, data)
    }

    #[test]
    fn split_of_cos_velocity_is_half_sine() {
        // f±(z) = −sin(z)/2, g±(z) = sin(z)/2
        let (params, data) = cos_velocity_data();
        let s = split(&params, &data).unwrap();
        for i in 0..60 {
            let z = -3.0 + 0.1 * i as f64;
            assert!((s.f_plus.eval(z) + 0.5 * z.sin()).abs() < 1e-12);
            assert!((s.g_plus.eval(z) - 0.5 * z.sin()).abs() < 1e-12);
            assert!((s.f_minus.eval(z) + 0.5 * z.sin()).abs() < 1e-12);
            assert!((s.g_minus.eval(z) - 0.5 * z.sin()).abs() < 1e-12);
        }
        assert_eq!(s.f_plus.slope(), 0.0);
    }

    #[test]
    fn split_reconstructs_data_on_each_half_line() {
        // f + g = u0 and a(g' − f') = u1, for generic multi-harmonic data
        let params = StringParams::new(4.0, 1.0, 0.0).unwrap(); // a = 1/2
        let u0p = PeriodicProfile::new(TAU, 0.3, vec![0.2, -0.1], vec![0.15, 0.05]).unwrap();
        // match value and slope at 0: u0m(0) = u0p(0), u0m'(0) = u0p'(0)
        // u0p(0) = 0.3 + 0.2 − 0.1 = 0.4; u0p'(0) = 0.15 + 2·0.05 = 0.25
        let u0m = PeriodicProfile::new(TAU, 0.4, vec![0.0], vec![0.25]).unwrap();
        let u1p = PeriodicProfile::new(TAU, 0.2, vec![0.4], vec![-0.3]).unwrap();
        let u1m = PeriodicProfile::new(TAU, -0.2, vec![-0.1], vec![0.6]).unwrap();
        let data = InitialData::new(u0p, u0m, u1p, u1m, 0.0, DEFAULT_MATCH_TOL).unwrap();
        let s = split(&params, &data).unwrap();
        let a = params.wave_speed();
        for i in 1..60 {
            let z = 0.1 * i as f64; // right half-line
            let u0 = data.u0_plus.eval(z);
            let u1 = data.u1_plus.eval(z);
            assert!((s.f_plus.eval(z) + s.g_plus.eval(z) - u0).abs() < 1e-12 * (1.0 + u0.abs()));
            let vel = a * (s.g_plus.eval_deriv(z) - s.f_plus.eval_deriv(z));
            assert!((vel - u1).abs() < 1e-12 * (1.0 + u1.abs()));
            // left half-line at −z
            let u0 = data.u0_minus.eval(-z);
            let u1 = data.u1_minus.eval(-z);
            assert!(
                (s.f_minus.eval(-z) + s.g_minus.eval(-z) - u0).abs() < 1e-12 * (1.0 + u0.abs())
            );
            let vel = a * (s.g_minus.eval_deriv(-z) - s.f_minus.eval_deriv(-z));
            assert!((vel - u1).abs() < 1e-12 * (1.0 + u1.abs()));
        }
    }

    #[test]
    fn nonzero_velocity_mean_produces_ramp() {
        let params = StringParams::new(1.0, 1.0, 0.0).unwrap();
        let plus = PeriodicProfile::constant(TAU, 0.3).unwrap();
        let minus = PeriodicProfile::constant(TAU, -0.3).unwrap();
        let data =
            InitialData::new(zero(), zero(), plus, minus, 0.0, DEFAULT_MATCH_TOL).unwrap();
        let s = split(&params, &data).unwrap();
        // slope = ±mean/(2a) = ±0.15
        assert!((s.g_plus.slope() - 0.15).abs() < 1e-15);
        assert!((s.f_plus.slope() + 0.15).abs() < 1e-15);
        assert!((s.g_minus.slope() + 0.15).abs() < 1e-15);
        assert!((s.f_minus.slope() - 0.15).abs() < 1e-15);
        // the drive stays periodic: ramps cancel
        let drive = build_drive(&params, &data).unwrap();
        for i in 0..50 {
            let z = 0.2 * i as f64;
            assert!(
                (drive.eval(z + TAU) - drive.eval(z)).abs() < 1e-12 * (1.0 + drive.eval(z).abs())
            );
        }
    }

    #[test]
    fn drive_of_cos_velocity_is_sine() {
        let (params, data) = cos_velocity_data();
        let drive = build_drive(&params, &data).unwrap();
        for i in 0..80 {
            let z = 0.1 * i as f64;
            assert!((drive.eval(z) - z.sin()).abs() < 1e-12);
            assert!((drive.eval_deriv(z) - z.cos()).abs() < 1e-12);
        }
        assert!((drive.max_abs_deriv() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn drive_of_pure_displacement_is_even_part() {
        // u0 = cos both sides, u1 ≡ 0: p = cos
        let params = StringParams::new(1.0, 1.0, 0.0).unwrap();
        let data = InitialData::new(
            cos_profile(),
            cos_profile(),
            zero(),
            zero(),
            0.0,
            DEFAULT_MATCH_TOL,
        )
        .unwrap();
        let drive = build_drive(&params, &data).unwrap();
        for i in 0..80 {
            let z = 0.1 * i as f64;
            assert!((drive.eval(z) - z.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn drive_anchors_to_initial_displacement() {
        let (params, data) = cos_velocity_data();
        let drive = build_drive(&params, &data).unwrap();
        assert!((drive.initial_level() - data.u0_at_origin()).abs() < 1e-12);
    }

    #[test]
    fn drive_derivative_equals_incoming_wave_slopes() {
        // p'(a t) = g₊'(a t) − f₋'(−a t): exact in the trigonometric algebra
        let params = StringParams::new(2.0, 3.0, 0.0).unwrap();
        let u0p = PeriodicProfile::new(TAU, 0.1, vec![0.3], vec![0.2]).unwrap();
        // u0p(0) = 0.4, u0p'(0) = 0.2
        let u0m = PeriodicProfile::new(TAU, 0.4, vec![0.0], vec![0.2]).unwrap();
        let u1p = PeriodicProfile::new(TAU, 0.25, vec![-0.2], vec![0.5]).unwrap();
        let u1m = PeriodicProfile::new(TAU, -0.25, vec![0.3], vec![-0.4]).unwrap();
        let data = InitialData::new(u0p, u0m, u1p, u1m, 0.0, DEFAULT_MATCH_TOL).unwrap();
        let s = split(&params, &data).unwrap();
        let drive = build_drive(&params, &data).unwrap();
        let a = params.wave_speed();
        for i in 0..100 {
            let t = 0.07 * i as f64;
            let lhs = drive.eval_deriv(a * t);
            let rhs = s.g_plus.eval_deriv(a * t) - s.f_minus.eval_deriv(-a * t);
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()), "t = {t}");
        }
    }

    #[test]
    fn gauge_shift_cancels_in_data_reconstruction() {
        let (params, data) = cos_velocity_data();
        let s = split(&params, &data).unwrap().with_gauge(0.7, -1.3);
        for i in 1..40 {
            let z = 0.15 * i as f64;
            let u0 = data.u0_plus.eval(z);
            assert!((s.f_plus.eval(z) + s.g_plus.eval(z) - u0).abs() < 1e-12);
        }
    }

    #[test]
    fn incoming_scenario_validates_junction() {
        let params = StringParams::new(1.0, 1.0, 0.0).unwrap();
        let force = ForceField::from_source("-y").unwrap();
        // 1 − cos: flat C¹ junction at 0, rest level 0 is the equilibrium
        let good = PeriodicProfile::new(TAU, 1.0, vec![-1.0], vec![]).unwrap();
        assert!(IncomingScenario::new(params, good, 0.0, &force, DEFAULT_INCOMING_TOL).is_ok());
        // sin has slope 1 at the junction: rejected
        let kinked = PeriodicProfile::new(TAU, 0.0, vec![], vec![1.0]).unwrap();
        let err = IncomingScenario::new(params, kinked, 0.0, &force, DEFAULT_INCOMING_TOL)
            .unwrap_err();
        assert!(err.to_string().contains("flat"));
    }

    #[test]
    fn incoming_scenario_rejects_non_equilibrium_rest() {
        let params = StringParams::new(1.0, 1.0, 0.0).unwrap();
        let force = ForceField::from_source("-y").unwrap();
        // rest level 1 but F(1) = −1 ≠ 0
        let wave = PeriodicProfile::new(TAU, 2.0, vec![-1.0], vec![]).unwrap();
        let err =
            IncomingScenario::new(params, wave, 1.0, &force, DEFAULT_INCOMING_TOL).unwrap_err();
        assert!(err.to_string().contains("equilibrium"));
    }

    #[test]
    fn incoming_scenario_drive_and_state() {
        let params = StringParams::new(1.0, 1.0, 0.0).unwrap();
        let force = ForceField::from_source("-y").unwrap();
        let wave = PeriodicProfile::new(TAU, 1.0, vec![-1.0], vec![]).unwrap();
        let sc = IncomingScenario::new(params, wave, 0.0, &force, DEFAULT_INCOMING_TOL).unwrap();
        // drive is the periodic branch: p(z) = 1 − cos z, p' = sin z
        let drive = sc.drive();
        assert!((drive.eval_deriv(1.3) - 1.3_f64.sin()).abs() < 1e-12);
        let state = sc.initial_state();
        assert_eq!(state.y, 0.0);
        assert_eq!(state.v, None);
        // wave profile is flat on the left
        assert_eq!(sc.wave().eval(-5.0), 0.0);
    }
}
