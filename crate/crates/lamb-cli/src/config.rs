//! JSON scenario configuration: schema, validation, and conversion into the
//! core problem types.
//!
//! A scenario is a single JSON document with the string parameters, the
//! restoring-force expression, the shared spatial period, exactly one of an
//! `initial_data` or an `incoming_wave` block, and optional numeric settings
//! (every setting has a sensible default). Command-line flags override the
//! corresponding numeric settings.

use std::fs;
use std::path::Path;

use lamb_core::model::{InitialData, StringParams, DEFAULT_MATCH_TOL};
use lamb_core::oscillator::OdeProblem;
use lamb_core::profile::PeriodicProfile;
use lamb_core::reduction::{build_drive, split, DalembertSplit, IncomingScenario};
use lamb_core::{Error, ForceField, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: ParamsConfig,
    /// Restoring-force expression in the variable `y`, e.g. `"-y^3 - y"`.
    pub force: String,
    /// Spatial period ω shared by every profile in the scenario.
    pub period: f64,
    #[serde(default)]
    pub initial_data: Option<InitialDataConfig>,
    #[serde(default)]
    pub incoming_wave: Option<IncomingWaveConfig>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out_dir: Option<String>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub mu: f64,
    pub kappa: f64,
    /// Attached mass; zero selects the first-order (massless spring) model.
    #[serde(default)]
    pub m: f64,
}

/// Truncated Fourier series on the shared period ω:
/// `mean + Σₖ cos[k]·cos(2π(k+1)z/ω) + sin[k]·sin(2π(k+1)z/ω)`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierConfig {
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FourierConfig {
    fn profile(&self, period: f64) -> Result<PeriodicProfile> {
        PeriodicProfile::new(period, self.mean, self.cos.clone(), self.sin.clone())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataConfig {
    pub u0_plus: FourierConfig,
    pub u0_minus: FourierConfig,
    pub u1_plus: FourierConfig,
    pub u1_minus: FourierConfig,
    /// Initial junction velocity (second-order dynamics only).
    #[serde(default)]
    pub y1: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncomingWaveConfig {
    /// Periodic branch of the incoming wave (active for z > 0).
    pub p: FourierConfig,
    /// Rest level behind the wave front; the spring must balance there.
    #[serde(default)]
    pub p0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    /// Integrator step bound (default: period/2048).
    pub h: Option<f64>,
    /// Field grid cells over `[−r, r]` (even).
    pub grid: usize,
    /// Spatial half-width R of reconstructed frames.
    pub r: f64,
    /// Trajectory horizon in drive periods.
    pub horizon_periods: usize,
    /// Times at which `simulate` writes frames (defaults to three equally
    /// spaced times ending at the horizon).
    pub frame_times: Option<Vec<f64>>,
    /// Return-map iteration budget.
    pub n_iter: usize,
    /// Fixed-point tolerance.
    pub tol_fp: f64,
    /// Scan grid for first-order fixed-point location.
    pub fp_grid: usize,
    /// Attractor seed grid dimension (grid² seeds).
    pub seed_grid: usize,
    /// Attractor burn-in iterations per seed.
    pub burn_in: usize,
    /// Attractor kept iterations per seed.
    pub keep: usize,
    /// Length of the limit-amplitude convergence curve, in periods.
    pub curve_periods: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            h: None,
            grid: 2048,
            r: 5.0,
            horizon_periods: 30,
            frame_times: None,
            n_iter: 200,
            tol_fp: 1e-10,
            fp_grid: 512,
            seed_grid: 17,
            burn_in: 200,
            keep: 100,
            curve_periods: 8,
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<ScenarioConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("cannot parse {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Re-run after flag overrides as well: a bad `--tol` is as invalid as a
    /// bad config field.
    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::invalid(format!("period must be positive, got {}", self.period)));
        }
        match (&self.initial_data, &self.incoming_wave) {
            (Some(_), Some(_)) => Err(Error::invalid(
                "scenario must carry exactly one of initial_data and incoming_wave, got both",
            )),
            (None, None) => Err(Error::invalid(
                "scenario must carry exactly one of initial_data and incoming_wave, got neither",
            )),
            _ => Ok(()),
        }?;
        let n = &self.numerics;
        if let Some(h) = n.h {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::invalid(format!("numerics.h must be positive, got {h}")));
            }
        }
        for (name, value) in [("numerics.r", n.r), ("numerics.tol_fp", n.tol_fp)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {value}")));
            }
        }
        if n.tol_fp >= 1.0 {
            return Err(Error::invalid(format!(
                "numerics.tol_fp must be below 1, got {}",
                n.tol_fp
            )));
        }
        for (name, value) in [
            ("numerics.grid", n.grid),
            ("numerics.horizon_periods", n.horizon_periods),
            ("numerics.n_iter", n.n_iter),
            ("numerics.fp_grid", n.fp_grid),
            ("numerics.seed_grid", n.seed_grid),
            ("numerics.keep", n.keep),
            ("numerics.curve_periods", n.curve_periods),
        ] {
            if value == 0 {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if let Some(times) = &n.frame_times {
            for &t in times {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(Error::invalid(format!("frame time {t} must be nonnegative")));
                }
            }
        }
        Ok(())
    }
}

/// The string-side data of a built scenario.
pub enum StringScenario {
    Cauchy { split: Box<DalembertSplit>, data: InitialData },
    Incoming(IncomingScenario),
}

/// Fully constructed problem: reduced dynamics plus the string-side data
/// needed for field reconstruction.
pub struct Built {
    pub prob: OdeProblem,
    pub scenario: StringScenario,
}

/// Convert the parsed configuration into core types, running every
/// structural validation on the way. A force with no trapping region (not
/// coercive and with a tail weaker than the drive) is rejected here with the
/// full condition report on stderr.
pub fn build(cfg: &ScenarioConfig) -> Result<Built> {
    let params = StringParams::new(cfg.params.mu, cfg.params.kappa, cfg.params.m)?;
    let force = ForceField::from_source(&cfg.force)?;

    let (drive, scenario) = if let Some(data_cfg) = &cfg.initial_data {
        let data = InitialData::new(
            data_cfg.u0_plus.profile(cfg.period)?,
            data_cfg.u0_minus.profile(cfg.period)?,
            data_cfg.u1_plus.profile(cfg.period)?,
            data_cfg.u1_minus.profile(cfg.period)?,
            data_cfg.y1,
            DEFAULT_MATCH_TOL,
        )?;
        let drive = build_drive(&params, &data)?;
        let sp = split(&params, &data)?;
        (drive, StringScenario::Cauchy { split: Box::new(sp), data })
    } else {
        let wave_cfg = cfg.incoming_wave.as_ref().expect("validated");
        let scenario = IncomingScenario::new(
            params,
            wave_cfg.p.profile(cfg.period)?,
            wave_cfg.p0,
            &force,
            DEFAULT_MATCH_TOL,
        )?;
        let drive = scenario.drive();
        (drive, StringScenario::Incoming(scenario))
    };

    screen_force(&params, &force, drive.max_abs_deriv())?;
    Ok(Built { prob: OdeProblem::new(params, force, drive), scenario })
}

/// Reject forces that cannot trap orbits: neither coercive nor strong
/// enough in the tail to beat the drive. The full report goes to stderr so
/// the caller can see which condition failed.
fn screen_force(params: &StringParams, force: &ForceField, drive_deriv_max: f64) -> Result<()> {
    let a = params.wave_speed();
    let (damping, inv_mass) = if params.has_mass() {
        (Some(params.damping()), Some(params.inv_mass()))
    } else {
        (None, None)
    };
    let (lo, hi) = force.working_interval();
    let bound = lo.abs().max(hi.abs());
    let report = force.classify(bound, bound, damping, inv_mass, a * drive_deriv_max);
    if !report.coercive && !report.tail_exceeds_drive {
        eprintln!(
            "{}",
            serde_json::to_string_pretty(&report).unwrap_or_else(|_| "<unprintable>".into())
        );
        return Err(Error::Coercivity(format!(
            "force {:?} is not coercive and its tail (margin {:.3e}) does not exceed the drive",
            force.source(),
            report.tail_margin,
        )));
    }
    Ok(())
}
