//! Restoring-force laws: parsing, exact differentiation, potential energy,
//! and classification of the structural conditions the convergence theory
//! needs (coercivity, linearity, secant window, monotonicity, tail margin).

pub mod expr;
pub mod parser;

use serde::Serialize;

use crate::error::{Error, Result};
pub use expr::{Expr, Func};
pub use parser::parse;

/// Default working interval for validation and the potential table.
pub const DEFAULT_WORKING_INTERVAL: (f64, f64) = (-10.0, 10.0);
/// Cells in the cached potential table.
const POTENTIAL_TABLE_CELLS: usize = 4096;
/// Sample count for the C¹ validation sweep and condition grids.
const VALIDATION_SAMPLES: usize = 512;
/// Largest amplitude probed by the tail checks.
const TAIL_CAP: f64 = 1e6;
/// A coercive force must at least double its restoring margin between the
/// working interval edge and the tail cap; bounded forces (which saturate)
/// fail this while anything with genuine growth passes easily.
const COERCIVITY_GROWTH_MIN: f64 = 2.0;
/// Grid used for the pairwise secant sweep (per axis).
const SECANT_GRID: usize = 200;

/// A force law `F(y)` with its exact first and second derivatives and a
/// cached potential `V(y) = −∫₀^y F(s) ds`, `V(0) = 0`.
#[derive(Debug, Clone)]
pub struct ForceField {
    source: String,
    expr: Expr,
    fprime: Expr,
    fsecond: Expr,
    table: PotentialTable,
}

impl ForceField {
    /// Parse and wrap a force law using the default working interval.
    pub fn from_source(src: &str) -> Result<Self> {
        Self::new(parse(src)?, DEFAULT_WORKING_INTERVAL)
    }

    /// Wrap an expression tree. Validates that the force and its derivative
    /// evaluate finitely across the working interval (the force must be C¹
    /// there) and precomputes the potential table.
    pub fn new(expr: Expr, working: (f64, f64)) -> Result<Self> {
        let (lo, hi) = working;
        if !(lo.is_finite() && hi.is_finite() && lo < 0.0 && hi > 0.0) {
            return Err(Error::invalid(format!(
                "working interval must be finite and contain 0, got [{lo}, {hi}]"
            )));
        }
        let fprime = expr.differentiate();
        let fsecond = fprime.differentiate();
        for i in 0..=VALIDATION_SAMPLES {
            let y = lo + (hi - lo) * i as f64 / VALIDATION_SAMPLES as f64;
            let fv = expr.eval(y)?;
            let dv = fprime.eval(y).map_err(|e| {
                Error::invalid(format!("force is not C¹ on [{lo}, {hi}]: {e}"))
            })?;
            if !fv.is_finite() || !dv.is_finite() {
                return Err(Error::invalid(format!(
                    "force or its derivative is non-finite at y = {y}"
                )));
            }
        }
        let table = PotentialTable::build(&expr, lo, hi)?;
        Ok(Self { source: expr.to_string(), expr, fprime, fsecond, table })
    }

    /// The canonical printed form of the force law.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn working_interval(&self) -> (f64, f64) {
        (self.table.y_lo, self.table.y_hi)
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        self.expr.eval(y)
    }

    pub fn eval_deriv(&self, y: f64) -> Result<f64> {
        self.fprime.eval(y)
    }

    pub fn eval_second(&self, y: f64) -> Result<f64> {
        self.fsecond.eval(y)
    }

    /// Potential energy `V(y) = −∫₀^y F`, from the cached table plus a local
    /// one-cell correction. Outside the working interval the remainder is
    /// integrated on the fly (pure, nothing is mutated), so calls stay valid
    /// for any finite `y` at gradually coarser quadrature resolution.
    pub fn potential(&self, y: f64) -> Result<f64> {
        self.table.potential(&self.expr, y)
    }

    /// Check the structural conditions against sampled witnesses.
    ///
    /// `m_bound`/`n_bound` are a-priori bounds on |y| and |ẏ| over the motion
    /// of interest; `damping` and `inv_mass` come from the string parameters
    /// when the attached mass is positive (pass `None` for the massless
    /// spring); `drive_max` is the maximum magnitude of the reduced forcing
    /// profile derivative.
    pub fn classify(
        &self,
        m_bound: f64,
        n_bound: f64,
        damping: Option<f64>,
        inv_mass: Option<f64>,
        drive_max: f64,
    ) -> ConditionReport {
        let coercive = self.coercivity();
        let linear = self.linearity();
        let secant = inv_mass.map(|c| self.secant_window(m_bound, damping.unwrap_or(0.0), c));
        let monotone = self.monotone_report(m_bound, n_bound, damping);
        let (tail_ok, tail_margin) = self.tail_exceeds_drive(drive_max);
        ConditionReport {
            coercive: coercive.0,
            coercive_growth: coercive.1,
            linear: linear.is_some(),
            linear_rate: linear,
            secant,
            monotone,
            tail_exceeds_drive: tail_ok,
            tail_margin,
        }
    }

    /// Coercivity: the force points back towards the origin at the working
    /// interval edges and its magnitude keeps growing out to the tail cap.
    /// Returns (verdict, growth factor of the weaker tail).
    fn coercivity(&self) -> (bool, f64) {
        let (lo, hi) = self.working_interval();
        let up = self.tail_growth(hi, -1.0);
        let down = self.tail_growth(lo, 1.0);
        match (up, down) {
            (Some(g1), Some(g2)) => {
                let g = g1.min(g2);
                (g >= COERCIVITY_GROWTH_MIN, g)
            }
            _ => (false, 0.0),
        }
    }

    /// Restoring margin `sign·F` along geometric samples from `start` out to
    /// the cap; requires the margin positive and strictly increasing, and
    /// returns total growth.
    fn tail_growth(&self, start: f64, sign: f64) -> Option<f64> {
        let first = sign * self.expr.eval(start).ok()?;
        if !(first.is_finite() && first > 0.0) {
            return None;
        }
        let mut prev = first;
        let mut y = start;
        loop {
            y *= 2.0;
            let margin = sign * self.expr.eval(y).ok()?;
            if !(margin.is_finite() && margin > prev) {
                return None;
            }
            prev = margin;
            if y.abs() >= TAIL_CAP {
                break;
            }
        }
        Some(prev / first)
    }

    /// Detect `F(y) = −r·y` with `r > 0`: zero at the origin, vanishing
    /// second derivative on the sampled working interval, negative slope.
    fn linearity(&self) -> Option<f64> {
        let f0 = self.expr.eval(0.0).ok()?;
        if f0.abs() > 1e-12 {
            return None;
        }
        let (lo, hi) = self.working_interval();
        let r = -self.fprime.eval(0.0).ok()?;
        if r.is_nan() || r <= 0.0 {
            return None;
        }
        for i in 0..=VALIDATION_SAMPLES {
            let y = lo + (hi - lo) * i as f64 / VALIDATION_SAMPLES as f64;
            if self.fsecond.eval(y).ok()?.abs() > 1e-12 * (1.0 + r) {
                return None;
            }
        }
        Some(r)
    }

    /// Pairwise secant condition: `k²/2 − 1 ≤ −c·ΔF/Δy ≤ 1` over a grid on
    /// `[−M, M]²`, plus the damping window `1 < k²/2 ≤ 2`. Grid sampling can
    /// only falsify the condition, so the verdict means "not falsified".
    fn secant_window(&self, m_bound: f64, damping: f64, inv_mass: f64) -> SecantReport {
        let n = SECANT_GRID;
        let mut ys = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut ok = true;
        for i in 0..n {
            let y = -m_bound + 2.0 * m_bound * i as f64 / (n - 1) as f64;
            ys.push(y);
            match self.expr.eval(y) {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    ok = false;
                    values.push(f64::NAN);
                }
            }
        }
        let mut secant_min = f64::INFINITY;
        let mut secant_max = f64::NEG_INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let s = -inv_mass * (values[j] - values[i]) / (ys[j] - ys[i]);
                secant_min = secant_min.min(s);
                secant_max = secant_max.max(s);
            }
        }
        let lower = 0.5 * damping * damping - 1.0;
        let k_range_ok = lower > 0.0 && lower <= 1.0;
        // rounding slack so that forces sitting exactly on the window edge
        // (the linear case) are not falsified by float noise
        let slack = 1e-12 * (1.0 + lower.abs());
        let within_window = ok && secant_min >= lower - slack && secant_max <= 1.0 + slack;
        SecantReport {
            not_falsified: within_window && k_range_ok,
            k_range_ok,
            secant_min,
            secant_max,
            lower_bound: lower,
        }
    }

    /// Strictly decreasing force with a sign margin in the tails, and (for
    /// a positive mass) damping above the curvature threshold
    /// `k > N·max|F''/F'|/2` sampled on `[−M, M]`.
    fn monotone_report(&self, m_bound: f64, n_bound: f64, damping: Option<f64>) -> MonotoneReport {
        let n = VALIDATION_SAMPLES;
        let mut fprime_negative = true;
        let mut ratio_max = 0.0_f64;
        for i in 0..=n {
            let y = -m_bound + 2.0 * m_bound * i as f64 / n as f64;
            let d = self.fprime.eval(y).unwrap_or(f64::NAN);
            let dd = self.fsecond.eval(y).unwrap_or(f64::NAN);
            if !(d.is_finite() && dd.is_finite() && d < 0.0) {
                fprime_negative = false;
                break;
            }
            ratio_max = ratio_max.max(dd.abs() / d.abs());
        }
        // sign margin β: −sign(y)·F(y) over geometric tail samples beyond M
        let mut beta = f64::INFINITY;
        let mut tail_sign_ok = true;
        for sign in [1.0, -1.0] {
            let mut y = sign * m_bound.max(1e-6);
            loop {
                match self.expr.eval(y) {
                    Ok(v) if v.is_finite() && -sign * v > 0.0 => beta = beta.min(-sign * v),
                    _ => {
                        tail_sign_ok = false;
                        break;
                    }
                }
                y *= 2.0;
                if y.abs() > TAIL_CAP {
                    break;
                }
            }
        }
        if !tail_sign_ok {
            beta = 0.0;
        }
        let damping_threshold = if fprime_negative { Some(0.5 * n_bound * ratio_max) } else { None };
        let damping_ok = match (damping, damping_threshold) {
            (Some(k), Some(th)) => Some(k > th),
            _ => None,
        };
        let satisfied = fprime_negative && tail_sign_ok && damping_ok.unwrap_or(true);
        MonotoneReport {
            satisfied,
            fprime_negative,
            tail_sign_ok,
            beta: if beta.is_finite() { beta } else { 0.0 },
            curvature_ratio_max: ratio_max,
            damping_threshold,
            damping_ok,
        }
    }

    /// Tail condition that replaces coercivity for bounded forces: the force
    /// at the tail cap must exceed the drive maximum on both sides.
    /// Returns (verdict, margin).
    fn tail_exceeds_drive(&self, drive_max: f64) -> (bool, f64) {
        let up = self.expr.eval(TAIL_CAP).map(|v| -v - drive_max).unwrap_or(f64::NEG_INFINITY);
        let down = self.expr.eval(-TAIL_CAP).map(|v| v - drive_max).unwrap_or(f64::NEG_INFINITY);
        let margin = up.min(down);
        (margin > 0.0, margin)
    }
}

/// Verdicts of the structural-condition sweep, with sampled witnesses.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    /// Force restores towards the origin with growing margin at infinity.
    pub coercive: bool,
    /// Growth factor of the restoring margin between the working-interval
    /// edge and the tail cap (the weaker of the two sides).
    pub coercive_growth: f64,
    /// The force is exactly `−r·y` for some `r > 0`.
    pub linear: bool,
    pub linear_rate: Option<f64>,
    /// Pairwise secant window (second-order dynamics only).
    pub secant: Option<SecantReport>,
    /// Strict monotonicity with damping above the curvature threshold.
    pub monotone: MonotoneReport,
    /// Saturating-force alternative: tail force exceeds the drive maximum.
    pub tail_exceeds_drive: bool,
    pub tail_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecantReport {
    pub not_falsified: bool,
    pub k_range_ok: bool,
    pub secant_min: f64,
    pub secant_max: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneReport {
    pub satisfied: bool,
    pub fprime_negative: bool,
    pub tail_sign_ok: bool,
    /// Sign margin: smallest `−sign(y)·F(y)` over the sampled tails.
    pub beta: f64,
    /// Largest `|F''|/|F'|` over the sampled amplitude interval.
    pub curvature_ratio_max: f64,
    /// `N·max|F''/F'|/2`; damping must exceed this.
    pub damping_threshold: Option<f64>,
    pub damping_ok: Option<bool>,
}

/// Uniform table of `V(y) = −∫₀^y F` values over the working interval,
/// accumulated cell-by-cell with Simpson's rule outward from the origin.
#[derive(Debug, Clone)]
struct PotentialTable {
    y_lo: f64,
    y_hi: f64,
    step: f64,
    values: Vec<f64>,
}

impl PotentialTable {
    fn build(expr: &Expr, y_lo: f64, y_hi: f64) -> Result<Self> {
        let n = POTENTIAL_TABLE_CELLS;
        let step = (y_hi - y_lo) / n as f64;
        // accumulate outward from the node nearest the origin …
        let center = (((0.0 - y_lo) / step).round() as usize).min(n);
        let mut values = vec![0.0; n + 1];
        for j in center..n {
            let a = y_lo + j as f64 * step;
            let b = a + step;
            values[j + 1] = values[j] - simpson_cell(expr, a, b)?;
        }
        for j in (0..center).rev() {
            let a = y_lo + j as f64 * step;
            let b = a + step;
            values[j] = values[j + 1] + simpson_cell(expr, a, b)?;
        }
        let mut table = Self { y_lo, y_hi, step, values };
        // … then shift so the lookup at y = 0 returns exactly 0 even when
        // the origin is not a node of an asymmetric interval
        let shift = table.potential(expr, 0.0)?;
        for v in &mut table.values {
            *v -= shift;
        }
        Ok(table)
    }

    fn potential(&self, expr: &Expr, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::invalid(format!("potential requested at non-finite y = {y}")));
        }
        if y >= self.y_lo && y <= self.y_hi {
            let mut j = ((y - self.y_lo) / self.step).floor() as usize;
            j = j.min(self.values.len() - 2);
            let anchor = self.y_lo + j as f64 * self.step;
            return Ok(self.values[j] - simpson_cell(expr, anchor, y)?);
        }
        // outside the table: integrate the remainder now, at the table's
        // resolution (capped so pathological requests stay bounded)
        let (edge, edge_val) = if y > self.y_hi {
            (self.y_hi, self.values[self.values.len() - 1])
        } else {
            (self.y_lo, self.values[0])
        };
        let span = y - edge;
        let cells = ((span.abs() / self.step).ceil() as usize).clamp(1, 65_536);
        let dy = span / cells as f64;
        let mut acc = edge_val;
        for i in 0..cells {
            let a = edge + i as f64 * dy;
            acc -= simpson_cell(expr, a, a + dy)?;
        }
        Ok(acc)
    }
}

/// Simpson's rule for `∫_a^b F` on one (possibly partial) cell.
fn simpson_cell(expr: &Expr, a: f64, b: f64) -> Result<f64> {
    let fa = expr.eval(a)?;
    let fm = expr.eval(0.5 * (a + b))?;
    let fb = expr.eval(b)?;
    Ok((b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_of_linear_spring() {
        // F = −y, V = y²/2: V(2) = 2
        let f = ForceField::from_source("-y").unwrap();
        assert!((f.potential(2.0).unwrap() - 2.0).abs() < 1e-10);
        assert!((f.potential(-3.0).unwrap() - 4.5).abs() < 1e-10);
        assert_eq!(f.potential(0.0).unwrap(), 0.0);
    }

    #[test]
    fn potential_of_cubic_spring() {
        // F = −y³ − y, V = y⁴/4 + y²/2: V(1) = 0.75
        let f = ForceField::from_source("-y^3 - y").unwrap();
        assert!((f.potential(1.0).unwrap() - 0.75).abs() < 1e-10);
    }

    #[test]
    fn potential_outside_working_interval() {
        let f = ForceField::from_source("-y").unwrap();
        // y = 15 is outside the default [−10, 10] table
        assert!((f.potential(15.0).unwrap() - 112.5).abs() < 1e-8);
    }

    #[test]
    fn negative_gradient_of_potential_recovers_force() {
        let f = ForceField::from_source("y - y^3").unwrap();
        let h = 1e-4;
        for i in 0..40 {
            let y = -2.0 + 0.1 * i as f64;
            let grad = (f.potential(y + h).unwrap() - f.potential(y - h).unwrap()) / (2.0 * h);
            let force = f.eval(y).unwrap();
            assert!((-grad - force).abs() < 1e-6 * (1.0 + force.abs()), "y = {y}");
        }
    }

    #[test]
    fn linear_force_classification() {
        let f = ForceField::from_source("-y").unwrap();
        let report = f.classify(2.0, 2.0, None, None, 1.0);
        assert!(report.coercive);
        assert!(report.linear);
        assert!((report.linear_rate.unwrap() - 1.0).abs() < 1e-12);
        // a linear restoring force is a special case of the monotone class
        assert!(report.monotone.satisfied);
        assert!(report.monotone.curvature_ratio_max < 1e-12);
    }

    #[test]
    fn bistable_force_is_coercive_but_not_monotone() {
        let f = ForceField::from_source("y - y^3").unwrap();
        let report = f.classify(2.0, 2.0, None, None, 0.0);
        assert!(report.coercive);
        assert!(!report.linear);
        assert!(!report.monotone.satisfied, "slope is positive near the origin");
    }

    #[test]
    fn saturating_force_fails_coercivity() {
        let f = ForceField::from_source("-2*atan(y)").unwrap();
        let report = f.classify(2.0, 2.0, None, None, 1.0);
        assert!(!report.coercive, "a bounded force must fail the growth check");
        // but its tails (≈ ±π) do exceed a unit drive
        assert!(report.tail_exceeds_drive);
        assert!(report.tail_margin > 2.0);
    }

    #[test]
    fn cubic_spring_curvature_ratio() {
        // |F''|/|F'| = 6|y|/(3y² + 1) peaks at √3 for y = 1/√3
        let f = ForceField::from_source("-y^3 - y").unwrap();
        let report = f.classify(2.0, 1.2, Some(8.0), Some(4.0), 1.0);
        assert!((report.monotone.curvature_ratio_max - 3.0_f64.sqrt()).abs() < 1e-4);
        assert_eq!(report.monotone.damping_ok, Some(true));
        assert!(report.monotone.satisfied);
        // threshold = 1.2·√3/2 ≈ 1.039 < 8
        assert!((report.monotone.damping_threshold.unwrap() - 0.6 * 3.0_f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn secant_window_for_linear_force() {
        // F = −y, c = 1: −c·ΔF/Δy ≡ 1; need k²/2 − 1 ≤ 1 ≤ 1, so k = 2 works
        let f = ForceField::from_source("-y").unwrap();
        let report = f.classify(3.0, 3.0, Some(2.0), Some(1.0), 0.0);
        let secant = report.secant.unwrap();
        assert!((secant.secant_min - 1.0).abs() < 1e-9);
        assert!((secant.secant_max - 1.0).abs() < 1e-9);
        assert!(secant.k_range_ok);
        assert!(secant.not_falsified);
    }

    #[test]
    fn secant_window_falsified_by_steep_force() {
        // F = −y³ − y has secants up to 1 + 3M² in magnitude; with c = 1 and
        // M = 3 the upper bound 1 is violated
        let f = ForceField::from_source("-y^3 - y").unwrap();
        let report = f.classify(3.0, 3.0, Some(2.0), Some(1.0), 0.0);
        let secant = report.secant.unwrap();
        assert!(!secant.not_falsified);
        assert!(secant.secant_max > 1.0);
    }

    #[test]
    fn singular_force_rejected_at_construction() {
        assert!(ForceField::from_source("1/y").is_err());
    }

    #[test]
    fn source_is_canonical_form() {
        let f = ForceField::from_source("-(y^3) - y").unwrap();
        assert_eq!(f.source(), "-y^3 - y");
    }
}
