//! Finite Fourier profiles and the two composite profile shapes the solver
//! needs: a periodic part plus a linear ramp (for the travelling-wave split
//! of initial data with nonzero mean velocity), and a profile that is
//! constant on one side of the origin (for an incoming wave hitting a
//! system at rest).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed when two profiles must share a period.
const PERIOD_MATCH_TOL: f64 = 1e-12;

/// A real trigonometric polynomial
/// `mean + Σ_k cos_coeffs[k-1]·cos(2πkz/period) + sin_coeffs[k-1]·sin(2πkz/period)`.
///
/// The coefficient vectors may have different lengths; missing entries are
/// zero. Evaluation, differentiation and antidifferentiation are exact
/// (term-by-term), so periodicity holds to rounding error by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicProfile {
    pub period: f64,
    pub mean: f64,
    #[serde(default)]
    pub cos_coeffs: Vec<f64>,
    #[serde(default)]
    pub sin_coeffs: Vec<f64>,
}

impl PeriodicProfile {
    pub fn new(period: f64, mean: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::invalid(format!("period must be positive, got {period}")));
        }
        if !mean.is_finite()
            || cos_coeffs.iter().any(|c| !c.is_finite())
            || sin_coeffs.iter().any(|c| !c.is_finite())
        {
            return Err(Error::invalid("profile coefficients must be finite"));
        }
        Ok(Self { period, mean, cos_coeffs, sin_coeffs })
    }

    /// The zero profile (also usable as a constant via `mean`).
    pub fn constant(period: f64, value: f64) -> Result<Self> {
        Self::new(period, value, Vec::new(), Vec::new())
    }

    /// Number of harmonics carried (highest index with a coefficient).
    pub fn harmonics(&self) -> usize {
        self.cos_coeffs.len().max(self.sin_coeffs.len())
    }

    pub fn eval(&self, z: f64) -> f64 {
        let base = 2.0 * std::f64::consts::PI / self.period;
        let mut acc = self.mean;
        for k in 0..self.harmonics() {
            let arg = base * (k + 1) as f64 * z;
            let (s, c) = arg.sin_cos();
            if let Some(&ck) = self.cos_coeffs.get(k) {
                acc += ck * c;
            }
            if let Some(&sk) = self.sin_coeffs.get(k) {
                acc += sk * s;
            }
        }
        acc
    }

    /// Exact derivative, again a trigonometric polynomial.
    pub fn derivative(&self) -> PeriodicProfile {
        let base = 2.0 * std::f64::consts::PI / self.period;
        let n = self.harmonics();
        let mut cos_coeffs = vec![0.0; n];
        let mut sin_coeffs = vec![0.0; n];
        for k in 0..n {
            let w = base * (k + 1) as f64;
            // d/dz [c·cos(wz) + s·sin(wz)] = s·w·cos(wz) − c·w·sin(wz)
            cos_coeffs[k] = self.sin_coeffs.get(k).copied().unwrap_or(0.0) * w;
            sin_coeffs[k] = -self.cos_coeffs.get(k).copied().unwrap_or(0.0) * w;
        }
        PeriodicProfile { period: self.period, mean: 0.0, cos_coeffs, sin_coeffs }
    }

    /// Exact periodic antiderivative `A` of the mean-free part, normalised to
    /// `A` having zero mean. The full integral from 0 is
    /// `∫₀^z eval = mean·z + A(z) − A(0)`.
    pub fn antiderivative(&self) -> PeriodicProfile {
        let base = 2.0 * std::f64::consts::PI / self.period;
        let n = self.harmonics();
        let mut cos_coeffs = vec![0.0; n];
        let mut sin_coeffs = vec![0.0; n];
        for k in 0..n {
            let w = base * (k + 1) as f64;
            // ∫ c·cos(wz) = c/w·sin(wz);  ∫ s·sin(wz) = −s/w·cos(wz)
            cos_coeffs[k] = -self.sin_coeffs.get(k).copied().unwrap_or(0.0) / w;
            sin_coeffs[k] = self.cos_coeffs.get(k).copied().unwrap_or(0.0) / w;
        }
        PeriodicProfile { period: self.period, mean: 0.0, cos_coeffs, sin_coeffs }
    }

    /// `∫₀^z eval(s) ds`, including the linear ramp from a nonzero mean.
    pub fn integral_from_zero(&self, z: f64) -> f64 {
        let anti = self.antiderivative();
        self.mean * z + anti.eval(z) - anti.eval(0.0)
    }

    /// The reflected profile `z ↦ eval(−z)`.
    pub fn reflected(&self) -> PeriodicProfile {
        PeriodicProfile {
            period: self.period,
            mean: self.mean,
            cos_coeffs: self.cos_coeffs.clone(),
            sin_coeffs: self.sin_coeffs.iter().map(|s| -s).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> PeriodicProfile {
        PeriodicProfile {
            period: self.period,
            mean: self.mean * factor,
            cos_coeffs: self.cos_coeffs.iter().map(|c| c * factor).collect(),
            sin_coeffs: self.sin_coeffs.iter().map(|s| s * factor).collect(),
        }
    }

    pub fn plus_constant(&self, value: f64) -> PeriodicProfile {
        let mut out = self.clone();
        out.mean += value;
        out
    }

    /// Termwise sum; both profiles must share the period.
    pub fn add(&self, other: &PeriodicProfile) -> Result<PeriodicProfile> {
        if !periods_match(self.period, other.period) {
            return Err(Error::invalid(format!(
                "cannot combine profiles with periods {} and {}",
                self.period, other.period
            )));
        }
        let n = self.harmonics().max(other.harmonics());
        let mut cos_coeffs = vec![0.0; n];
        let mut sin_coeffs = vec![0.0; n];
        for k in 0..n {
            cos_coeffs[k] = self.cos_coeffs.get(k).copied().unwrap_or(0.0)
                + other.cos_coeffs.get(k).copied().unwrap_or(0.0);
            sin_coeffs[k] = self.sin_coeffs.get(k).copied().unwrap_or(0.0)
                + other.sin_coeffs.get(k).copied().unwrap_or(0.0);
        }
        Ok(PeriodicProfile {
            period: self.period,
            mean: self.mean + other.mean,
            cos_coeffs,
            sin_coeffs,
        })
    }

    /// Largest absolute value, located by dense sampling over one period.
    /// The profile is smooth and band-limited, so 512 samples per harmonic
    /// bound the maximum well; a short golden-section refinement polishes
    /// the best bracket.
    pub fn max_abs(&self) -> f64 {
        let n_samples = 512 * self.harmonics().max(1);
        let mut best = 0.0_f64;
        let mut best_z = 0.0;
        for i in 0..n_samples {
            let z = self.period * i as f64 / n_samples as f64;
            let v = self.eval(z).abs();
            if v > best {
                best = v;
                best_z = z;
            }
        }
        // Polish inside the bracketing interval around the best sample.
        let dz = self.period / n_samples as f64;
        let (mut lo, mut hi) = (best_z - dz, best_z + dz);
        let phi = 0.5 * (3.0 - 5.0_f64.sqrt());
        for _ in 0..60 {
            let a = lo + phi * (hi - lo);
            let b = hi - phi * (hi - lo);
            if self.eval(a).abs() > self.eval(b).abs() {
                hi = b;
            } else {
                lo = a;
            }
        }
        best.max(self.eval(0.5 * (lo + hi)).abs())
    }
}

pub(crate) fn periods_match(p1: f64, p2: f64) -> bool {
    (p1 - p2).abs() <= PERIOD_MATCH_TOL * p1.abs().max(p2.abs())
}

/// A periodic profile plus a linear ramp: `eval(z) = profile(z) + slope·z`.
///
/// This is the exact shape of each travelling-wave component when the
/// initial velocity has nonzero mean on a half-line. The derivative is
/// stored once so repeated evaluation stays cheap and exact.
#[derive(Debug, Clone)]
pub struct WaveComponent {
    profile: PeriodicProfile,
    slope: f64,
    deriv: PeriodicProfile,
}

impl WaveComponent {
    pub fn new(profile: PeriodicProfile, slope: f64) -> Self {
        let deriv = profile.derivative();
        Self { profile, slope, deriv }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.profile.eval(z) + self.slope * z
    }

    pub fn eval_deriv(&self, z: f64) -> f64 {
        self.deriv.eval(z) + self.slope
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn periodic_part(&self) -> &PeriodicProfile {
        &self.profile
    }

    /// Same component shifted by an additive constant (gauge freedom).
    pub fn plus_constant(&self, value: f64) -> WaveComponent {
        WaveComponent::new(self.profile.plus_constant(value), self.slope)
    }
}

/// Profile of an incoming wave: identically `rest` for `z ≤ 0`, periodic for
/// `z > 0`. Construction does not check the junction; the scenario
/// validator does, with an explicit tolerance.
#[derive(Debug, Clone)]
pub struct SteppedProfile {
    rest: f64,
    periodic: PeriodicProfile,
    deriv: PeriodicProfile,
}

impl SteppedProfile {
    pub fn new(rest: f64, periodic: PeriodicProfile) -> Self {
        let deriv = periodic.derivative();
        Self { rest, periodic, deriv }
    }

    pub fn rest_value(&self) -> f64 {
        self.rest
    }

    pub fn periodic_part(&self) -> &PeriodicProfile {
        &self.periodic
    }

    pub fn eval(&self, z: f64) -> f64 {
        if z > 0.0 {
            self.periodic.eval(z)
        } else {
            self.rest
        }
    }

    pub fn eval_deriv(&self, z: f64) -> f64 {
        if z > 0.0 {
            self.deriv.eval(z)
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn sin_profile() -> PeriodicProfile {
        // sin(z) with period 2π
        PeriodicProfile::new(std::f64::consts::TAU, 0.0, vec![], vec![1.0]).unwrap()
    }

    #[test]
    fn eval_matches_closed_form() {
        let p = PeriodicProfile::new(std::f64::consts::TAU, 0.5, vec![2.0, 0.0], vec![0.0, -1.0])
            .unwrap();
        for i in 0..100 {
            let z = -5.0 + 0.1 * i as f64;
            let expect = 0.5 + 2.0 * z.cos() - (2.0 * z).sin();
            assert!((p.eval(z) - expect).abs() < TOL, "z = {z}");
        }
    }

    #[test]
    fn periodicity_to_rounding() {
        let p = PeriodicProfile::new(3.0, 1.0, vec![0.3, -0.2, 0.05], vec![0.7, 0.0, -0.1])
            .unwrap();
        for i in 0..200 {
            let z = -10.0 + 0.1 * i as f64;
            assert!((p.eval(z + 3.0) - p.eval(z)).abs() < 1e-12 * (1.0 + p.eval(z).abs()));
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let p = PeriodicProfile::new(2.0, -0.4, vec![1.1, -0.3], vec![0.2, 0.6]).unwrap();
        let d = p.derivative();
        let h = 1e-5;
        for i in 0..50 {
            let z = -2.0 + 0.11 * i as f64;
            let fd = (p.eval(z + h) - p.eval(z - h)) / (2.0 * h);
            // central difference is O(h²) accurate
            assert!((d.eval(z) - fd).abs() < 1e-8 * (1.0 + fd.abs()), "z = {z}");
        }
    }

    #[test]
    fn antiderivative_of_mean_free_part_is_periodic_and_exact() {
        let p = PeriodicProfile::new(std::f64::consts::TAU, 0.7, vec![0.0], vec![2.0]).unwrap();
        let a = p.antiderivative();
        // ∫ 2 sin = −2 cos, zero-mean representative
        assert!((a.eval(0.0) - (-2.0)).abs() < TOL);
        // closed over a period
        assert!((a.eval(p.period) - a.eval(0.0)).abs() < 1e-12);
        // full integral carries the ramp: ∫₀^z (0.7 + 2 sin) = 0.7 z + 2(1 − cos z)
        for i in 0..30 {
            let z = 0.37 * i as f64;
            let expect = 0.7 * z + 2.0 * (1.0 - z.cos());
            assert!((p.integral_from_zero(z) - expect).abs() < 1e-10 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn integral_of_cos_is_sin() {
        let p = PeriodicProfile::new(std::f64::consts::TAU, 0.0, vec![1.0], vec![]).unwrap();
        for i in 0..30 {
            let z = -4.0 + 0.3 * i as f64;
            assert!((p.integral_from_zero(z) - z.sin()).abs() < TOL);
        }
    }

    #[test]
    fn reflection_flips_odd_part() {
        let p = PeriodicProfile::new(std::f64::consts::TAU, 0.2, vec![0.5], vec![0.8]).unwrap();
        let r = p.reflected();
        for i in 0..50 {
            let z = -3.0 + 0.13 * i as f64;
            assert!((r.eval(z) - p.eval(-z)).abs() < TOL);
        }
    }

    #[test]
    fn add_requires_matching_periods() {
        let p = sin_profile();
        let q = PeriodicProfile::constant(1.0, 3.0).unwrap();
        assert!(p.add(&q).is_err());
    }

    #[test]
    fn max_abs_of_unit_sine_is_one() {
        let p = sin_profile();
        assert!((p.max_abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn max_abs_of_constant_is_its_value() {
        let p = PeriodicProfile::constant(2.0, -3.5).unwrap();
        assert!((p.max_abs() - 3.5).abs() < TOL);
    }

    #[test]
    fn rejects_nonpositive_period() {
        assert!(PeriodicProfile::new(0.0, 0.0, vec![], vec![]).is_err());
        assert!(PeriodicProfile::new(-1.0, 0.0, vec![], vec![]).is_err());
    }

    #[test]
    fn wave_component_ramp_and_derivative() {
        let w = WaveComponent::new(sin_profile(), 0.25);
        for i in 0..40 {
            let z = -3.0 + 0.2 * i as f64;
            assert!((w.eval(z) - (z.sin() + 0.25 * z)).abs() < TOL);
            assert!((w.eval_deriv(z) - (z.cos() + 0.25)).abs() < TOL);
        }
    }

    #[test]
    fn stepped_profile_is_flat_on_the_left() {
        // 1 − cos z for z > 0, 0 for z ≤ 0: a C¹ junction at the origin
        let periodic =
            PeriodicProfile::new(std::f64::consts::TAU, 1.0, vec![-1.0], vec![]).unwrap();
        let s = SteppedProfile::new(0.0, periodic);
        assert_eq!(s.eval(-2.0), 0.0);
        assert_eq!(s.eval_deriv(-2.0), 0.0);
        assert!((s.eval(1.0) - (1.0 - 1.0_f64.cos())).abs() < TOL);
        assert!((s.eval_deriv(1.0) - 1.0_f64.sin()).abs() < TOL);
        // junction: value and one-sided slope agree with the flat side
        assert!(s.eval(1e-9).abs() < 1e-8);
        assert!(s.eval_deriv(1e-9).abs() < 1e-8);
    }
}
