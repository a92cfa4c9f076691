//! Physical parameters of the string–oscillator system, the initial data
//! record, and the state of the attached oscillator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{periods_match, PeriodicProfile};

/// Default absolute tolerance for the matching conditions the initial data
/// must satisfy at the origin (value, slope, and velocity-mean balance).
pub const DEFAULT_MATCH_TOL: f64 = 1e-9;

/// String density, tension, and the attached point mass.
///
/// `mass == 0` is allowed and selects the first-order (massless spring)
/// dynamics; `mass > 0` selects the damped second-order dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StringParams {
    /// Linear density of the string (μ > 0).
    pub mu: f64,
    /// Tension of the string (κ > 0).
    pub kappa: f64,
    /// Point mass attached at the origin (m ≥ 0).
    #[serde(rename = "m")]
    pub mass: f64,
}

impl StringParams {
    pub fn new(mu: f64, kappa: f64, mass: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::invalid(format!("density must be positive, got {mu}")));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::invalid(format!("tension must be positive, got {kappa}")));
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::invalid(format!("mass must be nonnegative, got {mass}")));
        }
        Ok(Self { mu, kappa, mass })
    }

    /// Propagation speed of waves on the string, `a = sqrt(kappa/mu)`.
    pub fn wave_speed(&self) -> f64 {
        (self.kappa / self.mu).sqrt()
    }

    /// Effective damping felt by the oscillator from radiating waves into
    /// both half-lines: `2·kappa/(a·m)`. Only meaningful for `mass > 0`.
    pub fn damping(&self) -> f64 {
        debug_assert!(self.mass > 0.0, "damping is defined only for a positive mass");
        2.0 * self.kappa / (self.wave_speed() * self.mass)
    }

    /// Reciprocal mass `1/m`. Only meaningful for `mass > 0`.
    pub fn inv_mass(&self) -> f64 {
        debug_assert!(self.mass > 0.0, "inverse mass is defined only for a positive mass");
        1.0 / self.mass
    }

    pub fn has_mass(&self) -> bool {
        self.mass > 0.0
    }
}

/// Initial displacement and velocity of the string, one periodic profile per
/// half-line, plus the initial oscillator velocity (used when `mass > 0`).
///
/// Validated invariants (all with tolerance `match_tol`):
/// - all four profiles share one period,
/// - displacement is continuous at the origin and has matching one-sided
///   slopes there (the data is C¹ across the junction),
/// - the velocity means on the two half-lines cancel, which is exactly the
///   condition for the reduced forcing to be periodic.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0_plus: PeriodicProfile,
    pub u0_minus: PeriodicProfile,
    pub u1_plus: PeriodicProfile,
    pub u1_minus: PeriodicProfile,
    /// Initial oscillator velocity ẏ(0); ignored for a massless spring.
    pub y1: f64,
}

impl InitialData {
    pub fn new(
        u0_plus: PeriodicProfile,
        u0_minus: PeriodicProfile,
        u1_plus: PeriodicProfile,
        u1_minus: PeriodicProfile,
        y1: f64,
        match_tol: f64,
    ) -> Result<Self> {
        let period = u0_plus.period;
        for (name, p) in [
            ("u0_minus", &u0_minus),
            ("u1_plus", &u1_plus),
            ("u1_minus", &u1_minus),
        ] {
            if !periods_match(period, p.period) {
                return Err(Error::invalid(format!(
                    "{name} has period {} but u0_plus has period {period}",
                    p.period
                )));
            }
        }
        if !y1.is_finite() {
            return Err(Error::invalid("initial oscillator velocity must be finite"));
        }

        let val_gap = (u0_plus.eval(0.0) - u0_minus.eval(0.0)).abs();
        if val_gap > match_tol {
            return Err(Error::invalid(format!(
                "displacement mismatch at the origin: |u0(0+) − u0(0−)| = {val_gap:.3e} > {match_tol:.1e}"
            )));
        }
        let slope_gap =
            (u0_plus.derivative().eval(0.0) - u0_minus.derivative().eval(0.0)).abs();
        if slope_gap > match_tol {
            return Err(Error::invalid(format!(
                "slope mismatch at the origin: |u0'(0+) − u0'(0−)| = {slope_gap:.3e} > {match_tol:.1e}"
            )));
        }
        let mean_sum = (u1_plus.mean + u1_minus.mean).abs();
        if mean_sum > match_tol {
            return Err(Error::invalid(format!(
                "velocity means do not cancel: |mean(u1+) + mean(u1−)| = {mean_sum:.3e} > {match_tol:.1e}; \
                 the reduced forcing would drift instead of being periodic"
            )));
        }

        Ok(Self { u0_plus, u0_minus, u1_plus, u1_minus, y1 })
    }

    /// Shared spatial period ω of the data.
    pub fn period(&self) -> f64 {
        self.u0_plus.period
    }

    /// Displacement at the origin, `u0(0)`.
    pub fn u0_at_origin(&self) -> f64 {
        self.u0_plus.eval(0.0)
    }
}

/// Instantaneous state of the attached oscillator.
///
/// `v` is the oscillator velocity; it is carried only when the dynamics are
/// second order (`mass > 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorState {
    pub t: f64,
    pub y: f64,
    pub v: Option<f64>,
}

impl OscillatorState {
    /// State of the massless-spring dynamics (no velocity component).
    pub fn spring(t: f64, y: f64) -> Self {
        Self { t, y, v: None }
    }

    /// State of the second-order dynamics.
    pub fn oscillator(t: f64, y: f64, v: f64) -> Self {
        Self { t, y, v: Some(v) }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() || !self.y.is_finite() || self.v.is_some_and(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite oscillator state: {self:?}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_profile() -> PeriodicProfile {
        PeriodicProfile::new(std::f64::consts::TAU, 0.0, vec![1.0], vec![]).unwrap()
    }

    fn zero_profile() -> PeriodicProfile {
        PeriodicProfile::constant(std::f64::consts::TAU, 0.0).unwrap()
    }

    #[test]
    fn wave_speed_is_sqrt_tension_over_density() {
        let p = StringParams::new(4.0, 1.0, 0.0).unwrap();
        assert!((p.wave_speed() - 0.5).abs() < 1e-15);
        // identity a²·mu == kappa holds to rounding
        let a = p.wave_speed();
        assert!((a * a * p.mu - p.kappa).abs() <= 1e-15 * p.kappa);
    }

    #[test]
    fn derived_damping_and_inverse_mass() {
        // mu = kappa = 1, m = 0.5: a = 1, damping = 2/(1·0.5) = 4, 1/m = 2
        let p = StringParams::new(1.0, 1.0, 0.5).unwrap();
        assert!((p.damping() - 4.0).abs() < 1e-15);
        assert!((p.inv_mass() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StringParams::new(0.0, 1.0, 0.0).is_err());
        assert!(StringParams::new(1.0, -1.0, 0.0).is_err());
        assert!(StringParams::new(1.0, 1.0, -0.1).is_err());
        assert!(StringParams::new(f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn accepts_balanced_velocity_means() {
        // u1 = cos on both sides: both means are zero
        let data = InitialData::new(
            zero_profile(),
            zero_profile(),
            cos_profile(),
            cos_profile(),
            0.0,
            DEFAULT_MATCH_TOL,
        );
        assert!(data.is_ok());
    }

    #[test]
    fn accepts_opposite_nonzero_means() {
        let plus = PeriodicProfile::constant(std::f64::consts::TAU, 0.3).unwrap();
        let minus = PeriodicProfile::constant(std::f64::consts::TAU, -0.3).unwrap();
        assert!(InitialData::new(
            zero_profile(),
            zero_profile(),
            plus,
            minus,
            0.0,
            DEFAULT_MATCH_TOL
        )
        .is_ok());
    }

    #[test]
    fn rejects_unbalanced_velocity_means() {
        let plus = PeriodicProfile::constant(std::f64::consts::TAU, 0.3).unwrap();
        let minus = PeriodicProfile::constant(std::f64::consts::TAU, -0.2).unwrap();
        let err = InitialData::new(
            zero_profile(),
            zero_profile(),
            plus,
            minus,
            0.0,
            DEFAULT_MATCH_TOL,
        )
        .unwrap_err();
        assert!(err.to_string().contains("velocity means"));
    }

    #[test]
    fn rejects_displacement_jump_at_origin() {
        let shifted = PeriodicProfile::constant(std::f64::consts::TAU, 1.0).unwrap();
        assert!(InitialData::new(
            shifted,
            zero_profile(),
            zero_profile(),
            zero_profile(),
            0.0,
            DEFAULT_MATCH_TOL
        )
        .is_err());
    }

    #[test]
    fn rejects_slope_kink_at_origin() {
        // sin has slope 1 at 0; the flat side has slope 0
        let sin =
            PeriodicProfile::new(std::f64::consts::TAU, 0.0, vec![], vec![1.0]).unwrap();
        assert!(InitialData::new(
            sin,
            zero_profile(),
            zero_profile(),
            zero_profile(),
            0.0,
            DEFAULT_MATCH_TOL
        )
        .is_err());
    }

    #[test]
    fn rejects_mixed_periods() {
        let other = PeriodicProfile::constant(1.0, 0.0).unwrap();
        assert!(InitialData::new(
            zero_profile(),
            zero_profile(),
            zero_profile(),
            other,
            0.0,
            DEFAULT_MATCH_TOL
        )
        .is_err());
    }

    #[test]
    fn state_constructors() {
        let s = OscillatorState::spring(1.0, 2.0);
        assert_eq!(s.v, None);
        let o = OscillatorState::oscillator(0.0, 1.0, -1.0);
        assert_eq!(o.v, Some(-1.0));
        assert!(o.validate().is_ok());
        assert!(OscillatorState::spring(0.0, f64::INFINITY).validate().is_err());
    }
}
