//! The period return map of the reduced dynamics and everything built on
//! it: the trapping bracket, fixed-point location, orbit iteration, and
//! attractor sampling.
//!
//! The drive is periodic with temporal period `ω₀`, so the time-`ω₀`
//! solution operator `T = U(ω₀, 0)` is a diffeomorphism of the state space
//! (an interval for the massless spring, the plane for a point mass);
//! periodic responses of the oscillator are exactly its fixed points.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::OscillatorState;
use crate::oscillator::{integrate_fixed, step_count, OdeProblem};

/// Expansion cap for the trapping-bracket search.
const BRACKET_EXPANSION_CAP: f64 = 1e9;
/// Linear scan resolution used when tightening the bracket.
const BRACKET_SCAN: usize = 4096;
/// Relative margin pushed outside the tight bracket.
const BRACKET_MARGIN: f64 = 1e-3;
/// Orbit steps smaller than this (relative) mean the orbit has collapsed
/// onto a fixed point to working precision; further map applications are
/// skipped.
const COLLAPSE_TOL: f64 = 1e-14;
/// Default tolerance for fixed-point location.
pub const DEFAULT_FP_TOL: f64 = 1e-10;
/// Default scan grid for fixed-point location on a bracket.
pub const DEFAULT_FP_GRID: usize = 512;

/// The time-`ω₀` return map with a frozen step sequence, so applications
/// are deterministic and bitwise reproducible.
#[derive(Debug, Clone)]
pub struct PoincareMap<'a> {
    prob: &'a OdeProblem,
    period: f64,
    steps: usize,
    h: f64,
}

impl<'a> PoincareMap<'a> {
    /// Build the map using steps of at most `h_max` (`None` for the
    /// problem default, period/2048).
    pub fn new(prob: &'a OdeProblem, h_max: Option<f64>) -> Result<Self> {
        let period = prob.period();
        let steps = step_count(period, h_max.unwrap_or_else(|| prob.default_step()))?;
        Ok(Self { prob, period, steps, h: period / steps as f64 })
    }

    pub fn problem(&self) -> &OdeProblem {
        self.prob
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn steps_per_period(&self) -> usize {
        self.steps
    }

    /// Apply the map to a first-order state.
    pub fn apply_scalar(&self, y: f64) -> Result<f64> {
        debug_assert!(!self.prob.is_second_order());
        Ok(integrate_fixed(self.prob, 0.0, self.h, self.steps, [y, 0.0])?[0])
    }

    /// Apply the map to a second-order state `(y, v)`.
    pub fn apply_pair(&self, s: [f64; 2]) -> Result<[f64; 2]> {
        debug_assert!(self.prob.is_second_order());
        integrate_fixed(self.prob, 0.0, self.h, self.steps, s)
    }

    /// Apply the map to either kind of state (time is reset to 0).
    pub fn apply_state(&self, state: &OscillatorState) -> Result<OscillatorState> {
        if self.prob.is_second_order() {
            let v = state.v.ok_or_else(|| {
                Error::invalid("second-order return map needs a velocity component")
            })?;
            let out = self.apply_pair([state.y, v])?;
            Ok(OscillatorState::oscillator(0.0, out[0], out[1]))
        } else {
            Ok(OscillatorState::spring(0.0, self.apply_scalar(state.y)?))
        }
    }
}

/// A trapping interval for the first-order dynamics: below `y_minus` the
/// effective force beats the drive upward, above `y_plus` downward, so
/// every orbit eventually enters `[y_minus, y_plus]` and never leaves.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Bracket {
    pub y_minus: f64,
    pub y_plus: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.y_plus - self.y_minus
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.y_minus && y <= self.y_plus
    }
}

/// Locate a trapping bracket for the massless-spring dynamics by expanding
/// outward from the force's working interval until the effective force
/// dominates the drive on the sampled tails, then tightening back to the
/// sign boundary and adding a small safety margin.
pub fn find_bracket(prob: &OdeProblem) -> Result<Bracket> {
    if prob.is_second_order() {
        return Err(Error::invalid("the trapping bracket applies to the massless spring"));
    }
    let scale = prob.spring_force_scale();
    let f_eff = |y: f64| -> Result<f64> { Ok(scale * prob.force().eval(y)?) };
    let q = prob.params().wave_speed() * prob.drive().max_abs_deriv();

    // margin that must be beaten on the upper (`sign = 1`) or lower tail
    let tail_ok = |c: f64, sign: f64| -> Result<bool> {
        // fine near the candidate …
        for i in 0..=16 {
            let y = c * (1.0 + i as f64 / 16.0) + sign * i as f64 * 1e-6;
            if sign * f_eff(y)? + q >= 0.0 {
                return Ok(false);
            }
        }
        // … then doubling out to the cap
        let mut y = 2.0 * c.abs().max(1.0) * sign;
        while y.abs() <= BRACKET_EXPANSION_CAP {
            if sign * f_eff(y)? + q >= 0.0 {
                return Ok(false);
            }
            y *= 2.0;
        }
        Ok(true)
    };

    let expand = |start: f64, sign: f64| -> Result<f64> {
        let mut c = start;
        loop {
            if tail_ok(c, sign)? {
                return Ok(c);
            }
            c *= 2.0;
            if c.abs() > BRACKET_EXPANSION_CAP {
                return Err(Error::Coercivity(format!(
                    "no trapping level found out to |y| = {BRACKET_EXPANSION_CAP:e}; \
                     the force never dominates the drive magnitude {q:.3e}"
                )));
            }
        }
    };

    let (lo0, hi0) = prob.force().working_interval();
    let outer_plus = expand(hi0.max(1e-3), 1.0)?;
    let outer_minus = expand(lo0.min(-1e-3), -1.0)?;

    // tighten each side back to the sign boundary of f_eff ± q with a linear
    // scan followed by bisection inside the straddling cell
    let tighten = |outer: f64, sign: f64| -> Result<f64> {
        let span_hi = outer;
        let span_lo = if sign > 0.0 { outer_minus } else { outer_plus };
        let g = |y: f64| -> Result<f64> { Ok(sign * f_eff(y)? + q) };
        let mut prev = span_hi;
        let mut straddle = None;
        for i in 1..=BRACKET_SCAN {
            let y = span_hi + (span_lo - span_hi) * i as f64 / BRACKET_SCAN as f64;
            if g(y)? >= 0.0 {
                straddle = Some((y, prev));
                break;
            }
            prev = y;
        }
        let (mut bad, mut good) = match straddle {
            Some(pair) => pair,
            // the force dominates over the whole scanned range
            None => return Ok(span_lo),
        };
        for _ in 0..100 {
            let mid = 0.5 * (bad + good);
            if mid == bad || mid == good {
                break;
            }
            if g(mid)? >= 0.0 {
                bad = mid;
            } else {
                good = mid;
            }
        }
        Ok(0.5 * (bad + good))
    };

    let tight_plus = tighten(outer_plus, 1.0)?;
    let tight_minus = tighten(outer_minus, -1.0)?;
    let width = (tight_plus - tight_minus).max(0.0);
    let margin = if width > 1e-6 {
        BRACKET_MARGIN * width
    } else {
        BRACKET_MARGIN * tight_plus.abs().max(1.0)
    };
    let bracket = Bracket { y_minus: tight_minus - margin, y_plus: tight_plus + margin };

    // final sanity at the bracket edges
    if f_eff(bracket.y_plus)? + q >= 0.0 || -f_eff(bracket.y_minus)? + q >= 0.0 {
        return Err(Error::Coercivity(
            "bracket edges fail the trapping inequalities after tightening".into(),
        ));
    }
    Ok(bracket)
}

/// How orbits behave near a fixed point of the return map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attracting,
    Repelling,
    /// Neither verdict is certain at the working tolerance.
    Neutral,
}

/// A fixed point of the return map.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPoint {
    pub y: f64,
    pub v: Option<f64>,
    /// `|T(point) − point|` at the reported location.
    pub residual: f64,
    pub stability: Stability,
    /// Spectral radius of the map's Jacobian (second-order dynamics only).
    pub spectral_radius: Option<f64>,
}

/// All fixed points found in a bracket, with the scan data that backs them.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointSet {
    pub points: Vec<FixedPoint>,
    pub bracket: Bracket,
    /// Coarse samples of `T(y) − y` over the bracket (subsampled from the
    /// scan grid), enough to reconstruct the sign pattern.
    pub sign_table: Vec<(f64, f64)>,
}

/// Locate every fixed point of the first-order return map inside the
/// bracket: scan `T(y) − y` on a uniform grid, bisect each sign change
/// down to `tol`, and classify stability from the sign pattern.
pub fn fixed_points_m0(
    map: &PoincareMap,
    bracket: &Bracket,
    grid: usize,
    tol: f64,
) -> Result<FixedPointSet> {
    if map.problem().is_second_order() {
        return Err(Error::invalid("the scan-and-bisect search applies to the massless spring"));
    }
    let n = grid.max(8);
    let ys: Vec<f64> = (0..=n)
        .map(|i| bracket.y_minus + bracket.width() * i as f64 / n as f64)
        .collect();
    let gs: Vec<f64> = ys
        .par_iter()
        .map(|&y| Ok(map.apply_scalar(y)? - y))
        .collect::<Result<Vec<f64>>>()?;

    let g = |y: f64| -> Result<f64> { Ok(map.apply_scalar(y)? - y) };
    let mut points: Vec<FixedPoint> = Vec::new();
    for i in 0..n {
        let (ga, gb) = (gs[i], gs[i + 1]);
        if ga == 0.0 {
            // grid node is a fixed point to the last bit (autonomous
            // equilibria behave like this); classify from the neighbours
            let stability =
                classify_from_signs(if i > 0 { gs[i - 1] } else { ga }, gs[i + 1]);
            push_unique(&mut points, ys[i], 0.0, stability, bracket, tol);
            continue;
        }
        if ga * gb < 0.0 {
            let (mut lo, mut hi) = (ys[i], ys[i + 1]);
            let (mut glo, mut ghi) = (ga, gb);
            let mut best = (lo, glo.abs());
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let gm = g(mid)?;
                if gm.abs() < best.1 {
                    best = (mid, gm.abs());
                }
                if gm.abs() <= 0.5 * tol {
                    break;
                }
                if (gm > 0.0) == (glo > 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                    ghi = gm;
                }
            }
            let _ = ghi;
            let stability = classify_from_signs(ga, gb);
            push_unique(&mut points, best.0, best.1, stability, bracket, tol);
        }
    }

    // tangencies: grid values within tol that produced no sign change
    for i in 0..=n {
        if gs[i] != 0.0 && gs[i].abs() <= tol {
            push_unique(&mut points, ys[i], gs[i].abs(), Stability::Neutral, bracket, tol);
        }
    }

    if points.is_empty() {
        return Err(Error::NoConvergence(format!(
            "no fixed point found in [{}, {}] although the trapping argument guarantees one; \
             smallest |T(y) − y| on the grid was {:.3e}",
            bracket.y_minus,
            bracket.y_plus,
            gs.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
        )));
    }
    points.sort_by(|p, q| p.y.total_cmp(&q.y));

    // keep a readable subsample of the scan as the sign table
    let stride = (n / 64).max(1);
    let sign_table = (0..=n)
        .step_by(stride)
        .map(|i| (ys[i], gs[i]))
        .collect();
    Ok(FixedPointSet { points, bracket: *bracket, sign_table })
}

fn classify_from_signs(before: f64, after: f64) -> Stability {
    if before > 0.0 && after < 0.0 {
        Stability::Attracting
    } else if before < 0.0 && after > 0.0 {
        Stability::Repelling
    } else {
        Stability::Neutral
    }
}

fn push_unique(
    points: &mut Vec<FixedPoint>,
    y: f64,
    residual: f64,
    stability: Stability,
    bracket: &Bracket,
    tol: f64,
) {
    let sep = 1e3 * tol * bracket.width().max(1.0);
    if points.iter().any(|p| (p.y - y).abs() < sep) {
        return;
    }
    points.push(FixedPoint { y, v: None, residual, stability, spectral_radius: None });
}

/// Orbit of repeated map applications.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitResult {
    /// Per-iteration states (seed first), at the map's phase (t = 0).
    pub history: Vec<OscillatorState>,
    pub limit: OscillatorState,
    pub converged: bool,
    /// `|T(limit) − limit|`.
    pub residual: f64,
    /// For the first-order map: whether the recorded history is monotone
    /// (it must be, since the map is an increasing diffeomorphism).
    pub monotone: Option<bool>,
}

/// Iterate the return map from `seed` until consecutive iterates differ by
/// at most `tol` (or `max_iter` is exhausted; `converged` says which).
pub fn iterate_to_fixed_point(
    map: &PoincareMap,
    seed: &OscillatorState,
    max_iter: usize,
    tol: f64,
) -> Result<OrbitResult> {
    if map.problem().is_second_order() && seed.v.is_none() {
        return Err(Error::invalid("second-order return map needs a velocity component"));
    }
    let mut history = vec![OscillatorState { t: 0.0, ..*seed }];
    let mut current = history[0];
    let mut converged = false;
    for _ in 0..max_iter {
        let next = map.apply_state(&current)?;
        history.push(next);
        let dy = next.y - current.y;
        let dv = next.v.unwrap_or(0.0) - current.v.unwrap_or(0.0);
        let step = (dy * dy + dv * dv).sqrt();
        current = next;
        if step <= tol {
            converged = true;
            break;
        }
    }
    let image = map.apply_state(&current)?;
    let dy = image.y - current.y;
    let dv = image.v.unwrap_or(0.0) - current.v.unwrap_or(0.0);
    let residual = (dy * dy + dv * dv).sqrt();
    let monotone = if map.problem().is_second_order() {
        None
    } else {
        let diffs: Vec<f64> =
            history.windows(2).map(|w| w[1].y - w[0].y).filter(|d| d.abs() > tol).collect();
        Some(
            diffs.windows(2).all(|w| w[0] * w[1] > 0.0),
        )
    };
    Ok(OrbitResult { history, limit: current, converged, residual, monotone })
}

/// Newton search for a fixed point of the second-order return map, with the
/// Jacobian estimated by forward differences. Also classifies stability
/// from the spectral radius of the Jacobian at the root (thresholds
/// `1 ± 1e-6`; in between the verdict is neutral).
pub fn fixed_point_newton_m(
    map: &PoincareMap,
    seed: [f64; 2],
    max_iter: usize,
    tol: f64,
) -> Result<FixedPoint> {
    if !map.problem().is_second_order() {
        return Err(Error::invalid("the Newton search applies to the second-order map"));
    }
    let mut y = seed;
    for _ in 0..max_iter {
        let ty = map.apply_pair(y)?;
        let gy = [ty[0] - y[0], ty[1] - y[1]];
        let gnorm = (gy[0] * gy[0] + gy[1] * gy[1]).sqrt();
        if gnorm <= tol {
            let jac = map_jacobian(map, y)?;
            let rho = spectral_radius(jac);
            let stability = if rho < 1.0 - 1e-6 {
                Stability::Attracting
            } else if rho > 1.0 + 1e-6 {
                Stability::Repelling
            } else {
                Stability::Neutral
            };
            return Ok(FixedPoint {
                y: y[0],
                v: Some(y[1]),
                residual: gnorm,
                stability,
                spectral_radius: Some(rho),
            });
        }
        let dt = map_jacobian(map, y)?;
        // Jacobian of G = T − id
        let j = [dt[0] - 1.0, dt[1], dt[2], dt[3] - 1.0];
        let det = j[0] * j[3] - j[1] * j[2];
        if det.abs() < 1e-14 {
            return Err(Error::NoConvergence(
                "singular Jacobian in the fixed-point Newton iteration".into(),
            ));
        }
        y = [
            y[0] - (j[3] * gy[0] - j[1] * gy[1]) / det,
            y[1] - (-j[2] * gy[0] + j[0] * gy[1]) / det,
        ];
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::NoConvergence("Newton iterate left the finite plane".into()));
        }
    }
    Err(Error::NoConvergence(format!(
        "fixed-point Newton search did not reach tolerance {tol:e} in {max_iter} iterations"
    )))
}

/// Forward-difference Jacobian of the second-order map, row-major
/// `[∂T₁/∂y, ∂T₁/∂v, ∂T₂/∂y, ∂T₂/∂v]`.
fn map_jacobian(map: &PoincareMap, at: [f64; 2]) -> Result<[f64; 4]> {
    let base = map.apply_pair(at)?;
    let eps = 1e-6 * (1.0 + at[0].abs().max(at[1].abs()));
    let ty = map.apply_pair([at[0] + eps, at[1]])?;
    let tv = map.apply_pair([at[0], at[1] + eps])?;
    Ok([
        (ty[0] - base[0]) / eps,
        (tv[0] - base[0]) / eps,
        (ty[1] - base[1]) / eps,
        (tv[1] - base[1]) / eps,
    ])
}

/// Spectral radius of a 2×2 matrix (row-major).
fn spectral_radius(m: [f64; 4]) -> f64 {
    let tr = m[0] + m[3];
    let det = m[0] * m[3] - m[1] * m[2];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        (0.5 * (tr + root)).abs().max((0.5 * (tr - root)).abs())
    } else {
        // complex pair: |λ|² = det
        det.abs().sqrt()
    }
}

/// Sampled invariant set of the second-order return map.
#[derive(Debug, Clone, Serialize)]
pub struct AttractorEstimate {
    /// Deduplicated union of the kept iterates of every seed.
    pub cloud: Vec<[f64; 2]>,
    /// Largest |y| over the cloud.
    pub y_bound: f64,
    /// Largest |v| over the cloud.
    pub v_bound: f64,
    /// Largest pairwise distance within the cloud (exact for clouds up to
    /// 4096 points, otherwise the bounding-box diagonal as an upper bound).
    pub diameter: f64,
    /// `sup over the cloud of dist(T(point), cloud)`: how far the map moves
    /// the sampled set off itself.
    pub invariance_defect: f64,
    pub seeds: usize,
    /// Kept points before deduplication.
    pub raw_points: usize,
}

/// Sample the attractor of the second-order return map: probe one orbit to
/// estimate the invariant box, seed a `grid_dim × grid_dim` grid over 1.2×
/// that box, discard `burn_in` iterates per seed, keep `keep`, and measure
/// the union cloud. Orbits that collapse onto a fixed point to working
/// precision stop early (the remaining iterates would be bitwise copies).
pub fn attractor_sample(
    map: &PoincareMap,
    grid_dim: usize,
    burn_in: usize,
    keep: usize,
) -> Result<AttractorEstimate> {
    if !map.problem().is_second_order() {
        return Err(Error::invalid("attractor sampling applies to the second-order map"));
    }
    let dissip = |e: Error| match e {
        Error::Integration { t, message } => Error::Dissipativity(format!(
            "a seed orbit blew up at t = {t} while relaxing onto the attractor: {message}"
        )),
        other => other,
    };

    // probe orbit from the origin fixes the box scale
    let mut probe = [0.0, 0.0];
    for _ in 0..burn_in {
        let next = map.apply_pair(probe).map_err(dissip)?;
        if orbit_collapsed(probe, next) {
            probe = next;
            break;
        }
        probe = next;
    }
    let mut y_box = probe[0].abs();
    let mut v_box = probe[1].abs();
    let mut walker = probe;
    for _ in 0..keep {
        walker = map.apply_pair(walker).map_err(dissip)?;
        y_box = y_box.max(walker[0].abs());
        v_box = v_box.max(walker[1].abs());
    }
    // floor so a point attractor at the origin still yields a real grid
    y_box = y_box.max(1.0);
    v_box = v_box.max(1.0);

    let gd = grid_dim.max(2);
    let seeds: Vec<[f64; 2]> = (0..gd * gd)
        .map(|idx| {
            let i = idx / gd;
            let j = idx % gd;
            [
                -1.2 * y_box + 2.4 * y_box * i as f64 / (gd - 1) as f64,
                -1.2 * v_box + 2.4 * v_box * j as f64 / (gd - 1) as f64,
            ]
        })
        .collect();

    let per_seed: Vec<Vec<[f64; 2]>> = seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<[f64; 2]>> {
            let mut s = seed;
            let mut collapsed = false;
            for _ in 0..burn_in {
                let next = map.apply_pair(s).map_err(dissip)?;
                if orbit_collapsed(s, next) {
                    s = next;
                    collapsed = true;
                    break;
                }
                s = next;
            }
            if collapsed {
                return Ok(vec![s]);
            }
            let mut kept = Vec::with_capacity(keep);
            for _ in 0..keep {
                let next = map.apply_pair(s).map_err(dissip)?;
                kept.push(next);
                if orbit_collapsed(s, next) {
                    break;
                }
                s = next;
            }
            Ok(kept)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut raw: Vec<[f64; 2]> = per_seed.into_iter().flatten().collect();
    let raw_points = raw.len();
    raw.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
    let scale = raw
        .iter()
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(1.0_f64, f64::max);
    let merge_r = 1e-12 * scale;
    let mut cloud: Vec<[f64; 2]> = Vec::new();
    'outer: for p in raw {
        for q in cloud.iter().rev() {
            if p[0] - q[0] > merge_r {
                break;
            }
            let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            if d <= merge_r {
                continue 'outer;
            }
        }
        cloud.push(p);
    }

    let y_bound = cloud.iter().map(|p| p[0].abs()).fold(0.0, f64::max);
    let v_bound = cloud.iter().map(|p| p[1].abs()).fold(0.0, f64::max);
    let diameter = cloud_diameter(&cloud);
    let defects: Vec<f64> = cloud
        .par_iter()
        .map(|&p| -> Result<f64> {
            let image = map.apply_pair(p).map_err(dissip)?;
            Ok(nearest_distance(&cloud, image))
        })
        .collect::<Result<Vec<_>>>()?;
    let invariance_defect = defects.into_iter().fold(0.0, f64::max);

    Ok(AttractorEstimate {
        cloud,
        y_bound,
        v_bound,
        diameter,
        invariance_defect,
        seeds: gd * gd,
        raw_points,
    })
}

fn orbit_collapsed(prev: [f64; 2], next: [f64; 2]) -> bool {
    let step = ((next[0] - prev[0]).powi(2) + (next[1] - prev[1]).powi(2)).sqrt();
    step <= COLLAPSE_TOL * (1.0 + prev[0].abs() + prev[1].abs())
}

fn cloud_diameter(cloud: &[[f64; 2]]) -> f64 {
    if cloud.len() <= 4096 {
        let mut d = 0.0_f64;
        for i in 0..cloud.len() {
            for j in (i + 1)..cloud.len() {
                let dd = ((cloud[i][0] - cloud[j][0]).powi(2)
                    + (cloud[i][1] - cloud[j][1]).powi(2))
                .sqrt();
                d = d.max(dd);
            }
        }
        d
    } else {
        let (mut ylo, mut yhi, mut vlo, mut vhi) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in cloud {
            ylo = ylo.min(p[0]);
            yhi = yhi.max(p[0]);
            vlo = vlo.min(p[1]);
            vhi = vhi.max(p[1]);
        }
        ((yhi - ylo).powi(2) + (vhi - vlo).powi(2)).sqrt()
    }
}

/// Distance from `point` to the nearest cloud member (cloud sorted by y).
/// Walks outward from the insertion index and stops each side as soon as the
/// y-gap alone exceeds the best distance found so far.
fn nearest_distance(cloud: &[[f64; 2]], point: [f64; 2]) -> f64 {
    let dist = |p: [f64; 2]| ((point[0] - p[0]).powi(2) + (point[1] - p[1]).powi(2)).sqrt();
    let idx = cloud.partition_point(|p| p[0] < point[0]);
    let mut best = f64::INFINITY;
    for p in &cloud[idx..] {
        if p[0] - point[0] >= best {
            break;
        }
        best = best.min(dist(*p));
    }
    for p in cloud[..idx].iter().rev() {
        if point[0] - p[0] >= best {
            break;
        }
        best = best.min(dist(*p));
    }
    best
}

/// Combined closeness of two responses over `[t, t + r]`: the L² norm of
/// the velocity gap plus the sup of the displacement gap (both sampled at
/// 2048 Simpson cells).
pub fn convergence_metric(
    traj: &crate::oscillator::Trajectory,
    traj_ref: &crate::oscillator::Trajectory,
    t: f64,
    r: f64,
) -> Result<f64> {
    let cells = 2048;
    let dt = r / cells as f64;
    let mut l2 = 0.0;
    let mut sup = 0.0_f64;
    let gap_sq = |s: f64| -> Result<f64> {
        let d = traj.y_dot(s)? - traj_ref.y_dot(s)?;
        Ok(d * d)
    };
    for i in 0..cells {
        let a = t + i as f64 * dt;
        let b = a + dt;
        l2 += dt / 6.0 * (gap_sq(a)? + 4.0 * gap_sq(0.5 * (a + b))? + gap_sq(b)?);
        sup = sup.max((traj.y(a)? - traj_ref.y(a)?).abs());
    }
    sup = sup.max((traj.y(t + r)? - traj_ref.y(t + r)?).abs());
    Ok(l2.sqrt() + sup)
}
