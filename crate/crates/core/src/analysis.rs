//! Difference quotients of the projection along the radius-2 circle and the
//! numeric verifiers built on them.
//!
//! Limits are accepted by a monotone-tail rule: the deviation at the last
//! index is below tolerance and the deviations over the final third of the
//! range do not grow by more than 10% from one index to the next.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    arc_radius, build_boundary, midpoint_t_offset, radius_asymptotic_gap, BoundaryModel,
};
use crate::numeric::two_sin_minus_two_x;
use crate::par::Execution;
use crate::point::Point2;
use crate::projection::{arc_params, nonexpansiveness_check, param_t, ArcParams};
use crate::sequences::{AlphaSequence, Family, SequenceSpec};

/// Deviations below this are treated as converged by the tail rule.
pub const NOISE_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Allowed growth between consecutive tail deviations.
const TAIL_SLACK: f64 = 1.1;

/// `D(θ) = (Π(2e^{iθ/2}) - Π(2, 0)) / θ` at one `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientSample {
    pub theta: f64,
    pub projected: Point2,
    pub quotient: Point2,
}

fn check_safe(model: &BoundaryModel, r: &crate::ProjectionResult) -> Result<()> {
    if r.truncation_safe {
        return Ok(());
    }
    let label = model.pieces()[r.piece_index.max(0) as usize].label();
    Err(Error::TruncationUnsafe { label, depth: model.depth() })
}

/// `Π(2e^{iθ/2}) - (1, 0)`, refusing projections near the closure.
fn circle_offset(model: &BoundaryModel, theta: f64) -> Result<Point2> {
    let r = model.project_circle(theta);
    check_safe(model, &r)?;
    Ok(r.offset)
}

pub fn quotient(model: &BoundaryModel, theta: f64) -> Result<QuotientSample> {
    if !(theta > 0.0 && theta <= std::f64::consts::PI) {
        return Err(Error::OutOfDomain { what: "theta", value: theta });
    }
    let r = model.project_circle(theta);
    check_safe(model, &r)?;
    Ok(QuotientSample { theta, projected: r.point, quotient: r.offset / theta })
}

/// `‖Π(2e^{iθ/2}) - Π((2, 0) + θ(0, 1))‖ / θ` and its bound
/// `‖2e^{iθ/2} - 2 - iθ‖ / θ` from nonexpansiveness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentGap {
    pub theta: f64,
    pub gap: f64,
    pub bound: f64,
}

pub fn tangent_vs_circle_gap(model: &BoundaryModel, theta: f64) -> Result<TangentGap> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::OutOfDomain { what: "theta", value: theta });
    }
    let on_circle = circle_offset(model, theta)?;
    let r = model.project_offset(Point2::new(1.0, theta));
    check_safe(model, &r)?;
    let gap = (on_circle - r.offset).norm() / theta;
    let s = (0.25 * theta).sin();
    let bound = Point2::new(-4.0 * s * s, two_sin_minus_two_x(0.5 * theta)).norm() / theta;
    Ok(TangentGap { theta, gap, bound })
}

fn arc_index_checked(model: &BoundaryModel, n: usize) -> Result<ArcParams> {
    if !model.is_safe_label(n) {
        return Err(Error::TruncationUnsafe { label: n, depth: model.depth() });
    }
    arc_params(model.seq(), n)
}

/// `z_n = (Π(2e^{it_{n-1}/2}) - Π(2e^{is_n/2})) / (t_{n-1} - s_n)`.
pub fn chord_speed(model: &BoundaryModel, n: usize) -> Result<Point2> {
    let p = arc_index_checked(model, n)?;
    let hi = circle_offset(model, p.t_prev)?;
    let lo = circle_offset(model, p.s)?;
    Ok((hi - lo) / p.t_prev_minus_s)
}

/// `(Π(2e^{is_n/2}) - Π(2e^{it_n/2})) / (s_n - t_n)`.
pub fn arc_speed(model: &BoundaryModel, n: usize) -> Result<Point2> {
    let p = arc_index_checked(model, n)?;
    let hi = circle_offset(model, p.s)?;
    let lo = circle_offset(model, p.t)?;
    Ok((hi - lo) / p.s_minus_t)
}

/// `‖q‖ - 1` less the rounding allowance of a quotient whose numerator is
/// the difference of two projections at parameter scale `amplification`
/// times the denominator. Nonexpansiveness makes the true value negative.
fn norm_excess(q: Point2, amplification: f64) -> f64 {
    q.norm() - 1.0 - NOISE_FLOOR * amplification.max(1.0)
}

/// `2(α_n - α_{n+1}) / (α_{n-1} + 2α_n - 3α_{n+1})`, the asymptotic arc speed.
pub fn arc_speed_expression(seq: &AlphaSequence, n: usize) -> f64 {
    let b = seq.diff(seq.prev_index(n), n);
    let b_next = seq.diff(n, n + 1);
    2.0 * b_next / (b + 3.0 * b_next)
}

/// Limit of the arc speed magnitude, where it is known in closed form.
pub fn arc_speed_limit(seq: &AlphaSequence) -> f64 {
    match (seq.family(), seq.lambda()) {
        (Family::B, Some(l)) => 2.0 * l / (3.0 * l + 1.0),
        (Family::C, _) => 0.0,
        _ => 0.5,
    }
}

/// One index of a lemma sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub n: usize,
    pub value: Vec<f64>,
    pub deviation: f64,
}

/// A secondary condition checked alongside the main limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SideCheck {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }

    /// Passes when `value >= tolerance`.
    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value >= tolerance }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self { name: name.into(), value: ok as u8 as f64, tolerance: 1.0, passed: ok }
    }
}

/// Outcome of one numeric verifier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    pub sequence: SequenceSpec,
    pub range: [usize; 2],
    pub depth: usize,
    pub target: Vec<f64>,
    pub observations: Vec<Observation>,
    pub max_deviation: f64,
    pub final_deviation: f64,
    pub tolerance: f64,
    pub checks: Vec<SideCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub passed: bool,
}

impl LemmaReport {
    fn new(
        lemma: LemmaId,
        model: &BoundaryModel,
        range: [usize; 2],
        target: Vec<f64>,
        observations: Vec<Observation>,
        tolerance: f64,
    ) -> Self {
        let devs: Vec<f64> = observations.iter().map(|o| o.deviation).collect();
        Self {
            lemma,
            sequence: model.seq().spec(),
            range,
            depth: model.depth(),
            target,
            max_deviation: devs.iter().copied().fold(0.0, f64::max),
            final_deviation: devs.last().copied().unwrap_or(0.0),
            tolerance,
            passed: limit_rule(&devs, tolerance),
            observations,
            checks: Vec::new(),
            verdict: None,
        }
    }

    fn with_checks(mut self, checks: Vec<SideCheck>) -> Self {
        self.passed &= checks.iter().all(|c| c.passed);
        self.checks.extend(checks);
        self
    }

    /// Use "every deviation within tolerance" instead of the tail rule.
    fn uniform(mut self) -> Self {
        self.passed = self.max_deviation <= self.tolerance
            && self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn check(&self, name: &str) -> Option<&SideCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Monotone-tail acceptance of a limit.
pub fn limit_rule(deviations: &[f64], tolerance: f64) -> bool {
    let Some(&last) = deviations.last() else {
        return false;
    };
    if last.is_nan() || last > tolerance {
        return false;
    }
    let tail = &deviations[deviations.len() - deviations.len().div_ceil(3)..];
    tail.windows(2).all(|w| w[1] <= TAIL_SLACK * w[0] || w[1] <= NOISE_FLOOR)
}

fn point_vec(p: Point2) -> Vec<f64> {
    vec![p.x, p.y]
}

fn collect<T: Send>(
    exec: Execution,
    range: [usize; 2],
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    exec.map_range(range[0]..=range[1], f).into_iter().collect()
}

/// `|r_n - r_∞|` with `r_∞ = 1`, `2λ/(1+λ)` or `0`.
pub fn radius_limit_check(model: &BoundaryModel, range: [usize; 2], tol: f64, exec: Execution) -> Result<LemmaReport> {
    let seq = model.seq();
    let target = match (seq.family(), seq.lambda()) {
        (Family::A, _) => 1.0,
        (Family::B, Some(l)) => 2.0 * l / (1.0 + l),
        _ => 0.0,
    };
    let obs = collect(exec, range, |n| {
        let r = arc_radius(seq, n)?;
        Ok(Observation { n, value: vec![r], deviation: (r - target).abs() })
    })?;
    Ok(LemmaReport::new(LemmaId::RadiusLimit, model, range, vec![target], obs, tol))
}

/// `|r_n - 2(α_n - α_{n+1})/(α_{n-1} - α_{n+1})|`.
pub fn radius_gap_check(model: &BoundaryModel, range: [usize; 2], tol: f64, exec: Execution) -> Result<LemmaReport> {
    let seq = model.seq();
    let obs = collect(exec, range, |n| {
        let g = radius_asymptotic_gap(seq, n)?;
        Ok(Observation { n, value: vec![g], deviation: g })
    })?;
    let devs: Vec<f64> = obs.iter().map(|o| o.deviation).collect();
    let decreasing = devs.windows(2).all(|w| w[1] <= w[0] || w[1] <= NOISE_FLOOR * 1e-300);
    Ok(LemmaReport::new(LemmaId::RadiusGap, model, range, vec![0.0], obs, tol)
        .with_checks(vec![SideCheck::flag("gap decreasing", decreasing)]))
}

/// Slope `s(y_n) = (x(y_n) - x(0)) / y_n` and `x'(y_n)` at `y_n = Im T_n`.
pub fn slope_limit_check(model: &BoundaryModel, range: [usize; 2], tol: f64, exec: Execution) -> Result<LemmaReport> {
    let seq = model.seq();
    let rows = collect(exec, range, |n| {
        let y = midpoint_t_offset(seq, n)?.y;
        let slope = -model.x_deficit(y)? / y;
        let xp = model.x_prime(y)?;
        let gamma = 0.5 * (seq.alpha(n) + seq.alpha(n + 1));
        Ok((n, slope, xp, (xp + gamma.tan()).abs()))
    })?;
    let identity_err = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    // slopes are negative and increase towards 0 as y_n decreases
    let monotone = rows.windows(2).all(|w| w[1].1 >= w[0].1);
    let xp_monotone = rows.windows(2).all(|w| w[1].2 >= w[0].2);
    let obs = rows
        .iter()
        .map(|&(n, s, xp, _)| Observation { n, value: vec![s, xp], deviation: s.abs().max(xp.abs()) })
        .collect();
    Ok(LemmaReport::new(LemmaId::Smoothness, model, range, vec![0.0, 0.0], obs, tol).with_checks(vec![
        SideCheck::at_most("x' identity", identity_err, 1e-12),
        SideCheck::flag("slope monotone", monotone),
        SideCheck::flag("x' monotone", xp_monotone),
    ]))
}

/// Whether `x'` is Lipschitz near `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    /// Local bounds on `|x''|` settle: `C^{1,1}`.
    Bounded,
    /// Local bounds keep growing: not `C^{1,1}`.
    Unbounded,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzWindow {
    pub n: usize,
    /// The window is `[-y_n, y_n]` with `y_n = Im T_n`.
    pub y: f64,
    /// `sup |x''|` on `y_{n+1} <= |y| <= y_n`.
    pub bound: f64,
    /// `bound / previous bound`.
    pub growth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub windows: Vec<LipschitzWindow>,
    /// Smallest growth factor over the last three shrink steps.
    pub min_recent_growth: f64,
    pub classification: Regularity,
}

/// Local `|x''|` bounds on shrinking windows around `y = 0`. The band
/// between `y_{n+1}` and `y_n` holds the segment leaving `T_n` and the arc
/// `C_{n+1}`, whose curvature `1/(r cos³a)` peaks at the start angle.
pub fn lipschitz_diagnostics(model: &BoundaryModel, range: [usize; 2]) -> Result<LipschitzReport> {
    if range[1] + 1 > model.depth() {
        return Err(Error::TruncationUnsafe { label: range[1] + 1, depth: model.depth() });
    }
    let mut windows: Vec<LipschitzWindow> = Vec::new();
    for n in range[0]..=range[1] {
        let arc = model
            .arc(n + 1)
            .ok_or(Error::IndexOutOfRange { n: n + 1, min: model.seq().first_arc(), max: model.depth() })?;
        let c = arc.start_angle.cos();
        let bound = 1.0 / (arc.radius * c * c * c);
        let growth = windows.last().map(|w| bound / w.bound);
        windows.push(LipschitzWindow { n, y: midpoint_t_offset(model.seq(), n)?.y, bound, growth });
    }
    let growths: Vec<f64> = windows.iter().filter_map(|w| w.growth).collect();
    let recent = &growths[growths.len().saturating_sub(3)..];
    let min_recent_growth = recent.iter().copied().fold(f64::INFINITY, f64::min);
    let max_recent_growth = recent.iter().copied().fold(0.0, f64::max);
    let classification = if recent.len() < 3 {
        Regularity::Inconclusive
    } else if min_recent_growth >= 2.0 {
        Regularity::Unbounded
    } else if max_recent_growth <= 1.01 {
        Regularity::Bounded
    } else {
        Regularity::Inconclusive
    };
    Ok(LipschitzReport { windows, min_recent_growth, classification })
}

/// The classification the construction predicts for each family.
pub fn expected_regularity(family: Family) -> Regularity {
    match family {
        Family::A | Family::B => Regularity::Bounded,
        Family::C => Regularity::Unbounded,
    }
}

/// Slope limits plus the Lipschitz classification.
pub fn smoothness_check(
    model: &BoundaryModel,
    slope_range: [usize; 2],
    window_range: [usize; 2],
    tol: f64,
    exec: Execution,
) -> Result<(LemmaReport, LipschitzReport)> {
    let report = slope_limit_check(model, slope_range, tol, exec)?;
    let lip = lipschitz_diagnostics(model, window_range)?;
    let expected = expected_regularity(model.seq().family());
    let report = report.with_checks(vec![SideCheck::flag(
        "lipschitz classification",
        lip.classification == expected,
    )]);
    Ok((report, lip))
}

/// `tangent_vs_circle_gap` on `θ = 2^-k`, `k` in `range`. The gap itself
/// need not shrink monotonically (it scales like `θ²` with a constant that
/// depends on the piece being hit), so convergence is carried by the bound:
/// the gap stays under a bound that decreases to 0.
pub fn circle_tangent_check(model: &BoundaryModel, range: [usize; 2], tol: f64, exec: Execution) -> Result<LemmaReport> {
    let rows = collect(exec, range, |k| tangent_vs_circle_gap(model, (-(k as f64)).exp2()))?;
    let excess = rows.iter().map(|g| g.gap - g.bound).fold(f64::NEG_INFINITY, f64::max);
    let bound_decreasing = rows.windows(2).all(|w| w[1].bound < w[0].bound);
    let obs = (range[0]..=range[1])
        .zip(&rows)
        .map(|(k, g)| Observation { n: k, value: vec![g.theta, g.gap, g.bound], deviation: g.gap })
        .collect();
    let mut report = LemmaReport::new(LemmaId::CircleTangent, model, range, vec![0.0], obs, tol);
    report.passed = report.final_deviation <= tol;
    Ok(report.with_checks(vec![
        SideCheck::at_most("gap - bound", excess, 0.0),
        SideCheck::flag("bound decreasing", bound_decreasing),
    ]))
}

/// Smallest arc index whose `t_n` lies below `theta`.
pub fn index_below(seq: &AlphaSequence, theta: f64) -> Option<usize> {
    (seq.first_arc()..=seq.max_depth()).find(|&n| seq.alpha(n) + seq.alpha(n + 1) <= theta)
}

/// `‖z_n - i‖`, plus `arg z_n = (π + t_{n-1})/2` and `‖z_n‖ <= 1`.
pub fn chord_speed_check(model: &BoundaryModel, range: [usize; 2], tol: f64, exec: Execution) -> Result<LemmaReport> {
    let rows = collect(exec, range, |n| {
        let z = chord_speed(model, n)?;
        let p = arc_params(model.seq(), n)?;
        let arg_err = (z.arg() - 0.5 * (std::f64::consts::PI + p.t_prev)).abs();
        Ok((n, z, arg_err, norm_excess(z, p.t_prev / p.t_prev_minus_s)))
    })?;
    let arg_err = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let excess = rows.iter().map(|r| r.3).fold(f64::NEG_INFINITY, f64::max);
    let obs = rows
        .iter()
        .map(|&(n, z, _, _)| Observation { n, value: point_vec(z), deviation: (z - Point2::I).norm() })
        .collect();
    Ok(LemmaReport::new(LemmaId::ChordSpeed, model, range, vec![0.0, 1.0], obs, tol).with_checks(vec![
        SideCheck::at_most("arg identity", arg_err, 1e-10),
        SideCheck::at_most("norm excess", excess, 0.0),
    ]))
}

/// `|‖arc speed‖ - limit|`, plus the argument identity
/// `arg = π/2 + (α_n + α_{n+1})/2 + (α_{n-1} - α_{n+1})/4`.
pub fn arc_speed_check(model: &BoundaryModel, range: [usize; 2], tol: f64, exec: Execution) -> Result<LemmaReport> {
    let seq = model.seq();
    let limit = arc_speed_limit(seq);
    let rows = collect(exec, range, |n| {
        let a = arc_speed(model, n)?;
        let p = seq.prev_index(n);
        let expected_arg = FRAC_PI_2 + 0.5 * (seq.alpha(n) + seq.alpha(n + 1)) + 0.25 * seq.diff(p, n + 1);
        let expr = arc_speed_expression(seq, n);
        let params = arc_params(seq, n)?;
        let excess = norm_excess(a, params.s / params.s_minus_t);
        Ok((n, a, (a.arg() - expected_arg).abs(), (a.norm() - expr).abs(), excess))
    })?;
    let arg_err = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let excess = rows.iter().map(|r| r.4).fold(f64::NEG_INFINITY, f64::max);
    let last_expr_gap = rows.last().map_or(0.0, |r| r.3);
    let mut checks = vec![
        SideCheck::at_most("arg identity", arg_err, 1e-8),
        SideCheck::at_most("norm excess", excess, 0.0),
        SideCheck::at_most("expression gap", last_expr_gap, tol),
    ];
    if seq.family() == Family::B {
        let closed = (arc_speed_expression(seq, range[1]) - limit).abs();
        checks.push(SideCheck::at_most("closed form", closed, 1e-8));
    }
    let obs = rows
        .iter()
        .map(|&(n, a, _, _, _)| Observation { n, value: point_vec(a), deviation: (a.norm() - limit).abs() })
        .collect();
    Ok(LemmaReport::new(LemmaId::ArcSpeed, model, range, vec![0.0, limit], obs, tol).with_checks(checks))
}

/// The three terms of an asymptotic-equivalence check at one index. The
/// differences are passed separately so callers can supply them without
/// cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivTerms {
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub f_minus_g: f64,
    pub f_minus_h: f64,
}

impl EquivTerms {
    pub fn plain(f: f64, g: f64, h: f64) -> Self {
        Self { f, g, h, f_minus_g: f - g, f_minus_h: f - h }
    }

    /// `(f - g)/(f - h)`, with `0/0` read as 1.
    pub fn ratio(&self) -> f64 {
        if self.f_minus_g == 0.0 && self.f_minus_h == 0.0 {
            1.0
        } else {
            self.f_minus_g / self.f_minus_h
        }
    }

    /// `|f/h - 1|`.
    pub fn c_bound(&self) -> f64 {
        (self.f_minus_h / self.h).abs()
    }
}

/// `(f - g)/(f - h) → 1` given `g ∼ h` and `|f/h - 1| >= c`.
pub fn asympt_equiv_check(
    model: &BoundaryModel,
    range: [usize; 2],
    c: f64,
    tol: f64,
    terms: impl Fn(usize) -> Result<EquivTerms> + Sync + Send,
    exec: Execution,
) -> Result<LemmaReport> {
    let rows = collect(exec, range, |n| Ok((n, terms(n)?)))?;
    let min_c = rows.iter().map(|r| r.1.c_bound()).fold(f64::INFINITY, f64::min);
    let gh: Vec<f64> = rows.iter().map(|r| (r.1.g / r.1.h - 1.0).abs()).collect();
    let gh_shrinks = gh.first().zip(gh.last()).is_none_or(|(a, b)| b <= a);
    let obs = rows
        .iter()
        .map(|&(n, t)| Observation { n, value: vec![t.ratio()], deviation: (t.ratio() - 1.0).abs() })
        .collect();
    Ok(LemmaReport::new(LemmaId::AsymptoticHelpers, model, range, vec![1.0], obs, tol).with_checks(vec![
        SideCheck::at_least("c bound", min_c, c),
        SideCheck::flag("g ~ h", gh_shrinks),
    ]))
}

/// `f = α_{n-1} - α_{n+1}`, `g = t_{n-1} - s_n`, `h = (α_{n-1} - 2α_n + α_{n+1})/2`.
pub fn arc_gap_terms(seq: &AlphaSequence, n: usize) -> Result<EquivTerms> {
    let p = arc_params(seq, n)?;
    let b = seq.diff(seq.prev_index(n), n);
    let b_next = seq.diff(n, n + 1);
    let kink = seq.kink(n);
    Ok(EquivTerms {
        f: b + b_next,
        g: p.t_prev_minus_s,
        h: 0.5 * kink,
        f_minus_g: p.s_minus_t,
        f_minus_h: 0.5 * (b + 3.0 * b_next),
    })
}

/// Residuals of the two weighted-mean decompositions at one index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedMean {
    pub n: usize,
    /// `|D(t_{n-1}) - (w₁ z_n + w₂ a_n + w₃ D(t_n))|`
    pub three_term: f64,
    /// `|D(s_n) - (v₁ a_n + v₂ D(t_n))|`
    pub two_term: f64,
    pub three_weight_sum: f64,
    pub two_weight_sum: f64,
}

impl WeightedMean {
    pub fn residual(&self) -> f64 {
        self.three_term.max(self.two_term)
    }
}

pub fn weighted_mean(model: &BoundaryModel, n: usize) -> Result<WeightedMean> {
    let p = arc_index_checked(model, n)?;
    let (tp, sp, tn) = (
        circle_offset(model, p.t_prev)?,
        circle_offset(model, p.s)?,
        circle_offset(model, p.t)?,
    );
    let z = (tp - sp) / p.t_prev_minus_s;
    let a = (sp - tn) / p.s_minus_t;
    let d_tn = tn / p.t;
    let (w1, w2, w3) = (p.t_prev_minus_s / p.t_prev, p.s_minus_t / p.t_prev, p.t / p.t_prev);
    let (v1, v2) = (p.s_minus_t / p.s, p.t / p.s);
    let three_term = (tp / p.t_prev - (z * w1 + a * w2 + d_tn * w3)).norm();
    let two_term = (sp / p.s - (a * v1 + d_tn * v2)).norm();
    Ok(WeightedMean { n, three_term, two_term, three_weight_sum: w1 + w2 + w3, two_weight_sum: v1 + v2 })
}

pub fn weighted_mean_residual(model: &BoundaryModel, n: usize) -> Result<f64> {
    Ok(weighted_mean(model, n)?.residual())
}

pub fn weighted_mean_check(model: &BoundaryModel, range: [usize; 2], tol: f64, exec: Execution) -> Result<LemmaReport> {
    let rows = collect(exec, range, |n| weighted_mean(model, n))?;
    let w3 = rows.iter().map(|w| (w.three_weight_sum - 1.0).abs()).fold(0.0, f64::max);
    let w2 = rows.iter().map(|w| (w.two_weight_sum - 1.0).abs()).fold(0.0, f64::max);
    let obs = rows
        .iter()
        .map(|w| Observation { n: w.n, value: vec![w.three_term, w.two_term], deviation: w.residual() })
        .collect();
    Ok(LemmaReport::new(LemmaId::WeightedMean, model, range, vec![0.0], obs, tol)
        .with_checks(vec![
            SideCheck::at_most("three-term weights", w3, 1e-14),
            SideCheck::at_most("two-term weights", w2, 1e-14),
        ])
        .uniform())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Nonconvergent,
    NoGapDetected,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Nonconvergent => "nonconvergent",
            Verdict::NoGapDetected => "no gap detected",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationRow {
    pub n: usize,
    pub d_t: Point2,
    pub d_s: Point2,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub sequence: SequenceSpec,
    pub range: [usize; 2],
    pub rows: Vec<OscillationRow>,
    /// `D(t_n)` and `D(s_n)` at the last index.
    pub t_limit_estimate: Point2,
    pub s_limit_estimate: Point2,
    /// Predicted `lim |D(t_n) - D(s_n)|`, when known.
    pub derived_gap: Option<f64>,
    pub threshold: f64,
    /// Smallest gap over the final third of the range.
    pub tail_min_gap: f64,
    pub verdict: Verdict,
}

/// Predicted distance between the two cluster points of `D`.
///
/// Along `s_n`, `D(s_n)` is the mean of the arc speed and `D(t_n)` with
/// weights `(s_n - t_n)/s_n` and `t_n/s_n`. In Case B the first weight tends
/// to `ρ/(1+ρ)` with `ρ = (1-λ)(1+3λ)/(2λ(1+λ))`, and the arc speed to
/// `2λ/(3λ+1)`; in Case C the arc speed and `D(s_n)` both tend to 0.
pub fn derived_gap(seq: &AlphaSequence) -> Option<f64> {
    match (seq.family(), seq.lambda()) {
        (Family::B, Some(l)) => {
            let rho = (1.0 - l) * (1.0 + 3.0 * l) / (2.0 * l * (1.0 + l));
            Some((0.5 - arc_speed_limit(seq)) * rho / (1.0 + rho))
        }
        (Family::C, _) => Some(0.5),
        _ => None,
    }
}

/// Predicted limit of `D(s_n)`, when known.
pub fn derived_s_limit(seq: &AlphaSequence) -> Option<Point2> {
    derived_gap(seq).map(|g| Point2::new(0.0, 0.5 - g))
}

/// Threshold used when no gap is predicted.
pub const EXPLORATORY_THRESHOLD: f64 = 1e-3;

pub fn oscillation_report(model: &BoundaryModel, range: [usize; 2], exec: Execution) -> Result<OscillationReport> {
    let rows = collect(exec, range, |n| {
        let p = arc_index_checked(model, n)?;
        let d_t = circle_offset(model, p.t)? / p.t;
        let d_s = circle_offset(model, p.s)? / p.s;
        Ok(OscillationRow { n, d_t, d_s, gap: (d_t - d_s).norm() })
    })?;
    let last = *rows.last().ok_or(Error::Degenerate("empty range".into()))?;
    let derived = derived_gap(model.seq());
    let threshold = derived.map_or(EXPLORATORY_THRESHOLD, |g| 0.5 * g);
    let tail = &rows[rows.len() - rows.len().div_ceil(3)..];
    let tail_min_gap = tail.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let verdict = if tail_min_gap > threshold { Verdict::Nonconvergent } else { Verdict::NoGapDetected };
    Ok(OscillationReport {
        sequence: model.seq().spec(),
        range,
        t_limit_estimate: last.d_t,
        s_limit_estimate: last.d_s,
        derived_gap: derived,
        threshold,
        tail_min_gap,
        verdict,
        rows,
    })
}

/// Expected verdict, or `None` where the question is open (Case A).
pub fn expected_verdict(family: Family) -> Option<Verdict> {
    match family {
        Family::A => None,
        Family::B | Family::C => Some(Verdict::Nonconvergent),
    }
}

pub fn nonexistence_check(model: &BoundaryModel, range: [usize; 2], exec: Execution) -> Result<(LemmaReport, OscillationReport)> {
    let osc = oscillation_report(model, range, exec)?;
    let target = osc.derived_gap.unwrap_or(0.0);
    let obs = osc
        .rows
        .iter()
        .map(|r| Observation { n: r.n, value: vec![r.d_t.x, r.d_t.y, r.d_s.x, r.d_s.y], deviation: r.gap })
        .collect();
    let mut report = LemmaReport::new(LemmaId::Nonexistence, model, range, vec![target], obs, osc.threshold);
    report.checks.push(SideCheck::at_least("tail gap", osc.tail_min_gap, osc.threshold));
    report.passed = expected_verdict(model.seq().family()).is_none_or(|v| v == osc.verdict);
    report.verdict = Some(osc.verdict);
    Ok((report, osc))
}

/// Deterministic exterior pairs in the annulus `r0 <= |p| <= r1`.
pub fn annulus_pairs(count: usize, r0: f64, r1: f64) -> Vec<(Point2, Point2)> {
    // additive recurrences with irrational steps; no RNG state to carry around
    const STEPS: [f64; 4] = [0.618_033_988_749_895, 0.414_213_562_373_095, 0.732_050_807_568_877, 0.236_067_977_499_79];
    let point = |u: f64, v: f64| Point2::polar(r0 + (r1 - r0) * u, std::f64::consts::TAU * v);
    (1..=count)
        .map(|k| {
            let k = k as f64;
            let [a, b, c, d] = STEPS.map(|s| (k * s).fract());
            (point(a, b), point(c, d))
        })
        .collect()
}

pub fn nonexpansive_lemma(model: &BoundaryModel, pairs: usize, tol: f64, exec: Execution) -> Result<LemmaReport> {
    let pairs = annulus_pairs(pairs, 1.5, 3.0);
    let rep = nonexpansiveness_check(model, &pairs, exec);
    let obs = vec![Observation { n: rep.pairs, value: vec![rep.max_excess], deviation: rep.max_excess.max(0.0) }];
    Ok(LemmaReport::new(LemmaId::Nonexpansive, model, [1, rep.pairs], vec![0.0], obs, tol).uniform())
}

/// Registered verifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
    RadiusLimit,
    RadiusGap,
    Smoothness,
    CircleTangent,
    ChordSpeed,
    AsymptoticHelpers,
    ArcSpeed,
    WeightedMean,
    Nonexistence,
    Nonexpansive,
}

impl LemmaId {
    pub const ALL: [LemmaId; 10] = [
        LemmaId::RadiusLimit,
        LemmaId::RadiusGap,
        LemmaId::Smoothness,
        LemmaId::CircleTangent,
        LemmaId::ChordSpeed,
        LemmaId::AsymptoticHelpers,
        LemmaId::ArcSpeed,
        LemmaId::WeightedMean,
        LemmaId::Nonexistence,
        LemmaId::Nonexpansive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::RadiusLimit => "radius-limit",
            LemmaId::RadiusGap => "radius-gap",
            LemmaId::Smoothness => "smoothness",
            LemmaId::CircleTangent => "circle-tangent",
            LemmaId::ChordSpeed => "chord-speed",
            LemmaId::AsymptoticHelpers => "asymptotic-helpers",
            LemmaId::ArcSpeed => "arc-speed",
            LemmaId::WeightedMean => "weighted-mean",
            LemmaId::Nonexistence => "nonexistence",
            LemmaId::Nonexpansive => "nonexpansive",
        }
    }

    /// Index range swept when none is given. For `circle-tangent` the range
    /// holds dyadic exponents `k` of `θ = 2^-k`.
    pub fn default_range(self, family: Family) -> [usize; 2] {
        use Family::*;
        use LemmaId::*;
        match (self, family) {
            (RadiusLimit | RadiusGap | Smoothness, A) => [10, 1000],
            (Smoothness, B) => [5, 200],
            (CircleTangent, A) => [1, 11],
            (CircleTangent, _) => [1, 20],
            (Nonexistence, B) => [20, 30],
            (Nonexistence, C) => [5, 9],
            (Nonexpansive, _) => [1, 1000],
            (_, A) => [10, 500],
            (_, B) => [5, 30],
            (_, C) => [3, 10],
        }
    }

    /// Tolerances calibrated against an independent high-precision
    /// evaluation at `q = 1`, `λ = 1/2` (Case B) and `λ = 0.4` (Case C).
    pub fn default_tolerance(self, family: Family) -> f64 {
        use Family::*;
        use LemmaId::*;
        match (self, family) {
            (RadiusLimit, A) => 1.05e-3,
            (RadiusLimit, B) => 1e-8,
            (RadiusLimit, C) => 1e-3,
            (RadiusGap, A) => 1e-12,
            (RadiusGap, _) => 1e-15,
            (Smoothness, _) => 1e-2,
            (CircleTangent, A) => 2e-4,
            (CircleTangent, _) => 1e-6,
            (ChordSpeed, A) => 3.2e-3,
            (ChordSpeed, B) => 5e-9,
            (ChordSpeed, C) => 1e-12,
            (ArcSpeed, A) => 5.1e-4,
            (ArcSpeed, B) => 1e-10,
            (ArcSpeed, C) => 1e-7,
            (AsymptoticHelpers | WeightedMean, _) => 1e-12,
            (Nonexistence, _) => 0.0,
            (Nonexpansive, _) => 1e-10,
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| Error::Parse {
            what: "lemma",
            input: s.to_string(),
            reason: "unknown lemma id",
        })
    }
}

/// Options for [`verify_lemma`]; `None` fields take the per-lemma defaults.
#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub range: Option<[usize; 2]>,
    pub depth: Option<usize>,
    pub tolerance: Option<f64>,
    pub exec: Execution,
}

/// Everything one verifier produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub report: LemmaReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<LipschitzReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oscillation: Option<OscillationReport>,
}

/// Depth needed so that every index in `range` is truncation safe.
pub fn required_depth(lemma: LemmaId, seq: &AlphaSequence, range: [usize; 2]) -> Result<usize> {
    let last = match lemma {
        LemmaId::CircleTangent => {
            let theta = (-(range[1] as f64)).exp2();
            index_below(seq, theta).ok_or(Error::DepthExceedsCap { depth: usize::MAX, cap: seq.max_depth() })? + 1
        }
        _ => range[1],
    };
    Ok(last + 2)
}

fn validate_range(lemma: LemmaId, seq: &AlphaSequence, range: [usize; 2]) -> Result<()> {
    let min = match lemma {
        LemmaId::CircleTangent | LemmaId::Nonexpansive => 1,
        _ => seq.first_arc(),
    };
    if range[0] < min || range[1] < range[0] {
        return Err(Error::IndexOutOfRange { n: range[0], min, max: range[1] });
    }
    if lemma != LemmaId::CircleTangent && lemma != LemmaId::Nonexpansive {
        let cap = seq.family().index_cap();
        if range[1] > cap {
            return Err(Error::IndexOutOfRange { n: range[1], min, max: cap });
        }
    }
    Ok(())
}

/// Run one registered verifier.
pub fn verify_lemma(lemma: LemmaId, seq: &AlphaSequence, opts: VerifyOptions) -> Result<Verification> {
    let family = seq.family();
    let range = opts.range.unwrap_or_else(|| lemma.default_range(family));
    validate_range(lemma, seq, range)?;
    let needed = match lemma {
        LemmaId::Nonexpansive => seq.first_arc() + 1,
        _ => required_depth(lemma, seq, range)?,
    };
    let depth = match opts.depth {
        Some(d) if d < needed => {
            return Err(Error::TruncationUnsafe { label: needed - 2, depth: d });
        }
        Some(d) => d,
        None if lemma == LemmaId::Nonexpansive => needed.max(30).min(seq.max_depth()),
        None => needed,
    };
    let model = build_boundary(seq, depth)?;
    let tol = opts.tolerance.unwrap_or_else(|| lemma.default_tolerance(family));
    let exec = opts.exec;
    let (mut lipschitz, mut oscillation) = (None, None);
    let report = match lemma {
        LemmaId::RadiusLimit => radius_limit_check(&model, range, tol, exec)?,
        LemmaId::RadiusGap => radius_gap_check(&model, range, tol, exec)?,
        LemmaId::Smoothness => {
            let windows = [range[0], range[1].min(depth - 1)];
            let (r, lip) = smoothness_check(&model, range, windows, tol, exec)?;
            lipschitz = Some(lip);
            r
        }
        LemmaId::CircleTangent => circle_tangent_check(&model, range, tol, exec)?,
        LemmaId::ChordSpeed => chord_speed_check(&model, range, tol, exec)?,
        LemmaId::AsymptoticHelpers => {
            asympt_equiv_check(&model, range, 1.0, tol, |n| arc_gap_terms(model.seq(), n), exec)?
        }
        LemmaId::ArcSpeed => arc_speed_check(&model, range, tol, exec)?,
        LemmaId::WeightedMean => weighted_mean_check(&model, range, tol, exec)?,
        LemmaId::Nonexistence => {
            let (r, osc) = nonexistence_check(&model, range, exec)?;
            oscillation = Some(osc);
            r
        }
        LemmaId::Nonexpansive => nonexpansive_lemma(&model, range[1] - range[0] + 1, tol, exec)?,
    };
    Ok(Verification { report, lipschitz, oscillation })
}

/// Sampling grids for `D(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotientGrid {
    /// `θ = 2^-k` for `k0 <= k <= k1`.
    Dyadic(usize, usize),
    /// `θ = t_n`.
    T(usize, usize),
    /// `θ = s_n`.
    S(usize, usize),
    /// `t_n` and `s_n` interleaved, decreasing in `θ`.
    TS(usize, usize),
}

impl FromStr for QuotientGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &'static str| Error::Parse { what: "grid", input: s.into(), reason };
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let nums: Vec<usize> = parts
            .map(|p| p.parse().map_err(|_| bad("bounds must be nonnegative integers")))
            .collect::<Result<_>>()?;
        let [a, b] = nums[..] else {
            return Err(bad("expected <kind>:<from>:<to>"));
        };
        if b < a {
            return Err(bad("empty range"));
        }
        match kind {
            "dyadic" => Ok(QuotientGrid::Dyadic(a, b)),
            "tn" => Ok(QuotientGrid::T(a, b)),
            "sn" => Ok(QuotientGrid::S(a, b)),
            "ts" => Ok(QuotientGrid::TS(a, b)),
            _ => Err(bad("kind must be dyadic, tn, sn or ts")),
        }
    }
}

impl QuotientGrid {
    /// Grid abscissae with a marker of which family each point belongs to.
    pub fn thetas(&self, seq: &AlphaSequence) -> Result<Vec<(f64, GridMark)>> {
        Ok(match *self {
            QuotientGrid::Dyadic(a, b) => (a..=b).map(|k| ((-(k as f64)).exp2(), GridMark::Dyadic)).collect(),
            QuotientGrid::T(a, b) => (a..=b).map(|n| Ok((param_t(seq, n)?, GridMark::T))).collect::<Result<_>>()?,
            QuotientGrid::S(a, b) => {
                (a..=b).map(|n| Ok((arc_params(seq, n)?.s, GridMark::S))).collect::<Result<_>>()?
            }
            QuotientGrid::TS(a, b) => {
                let mut v = Vec::new();
                for n in a..=b {
                    let p = arc_params(seq, n)?;
                    v.push((p.s, GridMark::S));
                    v.push((p.t, GridMark::T));
                }
                v
            }
        })
    }

    /// Depth that keeps every grid point truncation safe.
    pub fn required_depth(&self, seq: &AlphaSequence) -> Result<usize> {
        match *self {
            QuotientGrid::Dyadic(_, b) => required_depth(LemmaId::CircleTangent, seq, [0, b]),
            QuotientGrid::T(_, b) | QuotientGrid::S(_, b) | QuotientGrid::TS(_, b) => Ok(b + 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMark {
    Dyadic,
    T,
    S,
}

pub fn quotient_grid(model: &BoundaryModel, grid: QuotientGrid, exec: Execution) -> Result<Vec<(QuotientSample, GridMark)>> {
    let thetas = grid.thetas(model.seq())?;
    exec.map(&thetas, |&(theta, mark)| Ok((quotient(model, theta)?, mark))).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(seq: AlphaSequence, depth: usize) -> BoundaryModel {
        build_boundary(&seq, depth).unwrap()
    }

    #[test]
    fn limit_rule_behaviour() {
        assert!(limit_rule(&[3.0, 2.0, 1.0, 0.5], 0.6));
        assert!(!limit_rule(&[3.0, 2.0, 1.0, 0.5], 0.4));
        assert!(!limit_rule(&[0.1, 0.1, 0.1, 0.2, 0.3, 0.35], 0.4));
        assert!(limit_rule(&[1e-15, 3e-15, 2e-15], 1e-14));
        assert!(!limit_rule(&[], 1.0));
    }

    #[test]
    fn quotient_rejects_unsafe_and_bad_theta() {
        let m = model(AlphaSequence::case_b(0.5).unwrap(), 12);
        assert!(matches!(quotient(&m, 0.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(quotient(&m, 4.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(quotient(&m, 1e-9), Err(Error::TruncationUnsafe { .. })));
        let q = quotient(&m, 0.3).unwrap();
        assert!(q.quotient.norm() <= 1.0);
    }

    #[test]
    fn tangent_gap_bound() {
        let m = model(AlphaSequence::case_b(0.5).unwrap(), 30);
        let g = tangent_vs_circle_gap(&m, 1e-3).unwrap();
        assert!(g.gap <= g.bound && g.gap <= 1e-3);
    }

    #[test]
    fn equivalence_guard() {
        let t = EquivTerms::plain(2.0, 2.0, 2.0);
        assert_eq!(t.ratio(), 1.0);
    }

    #[test]
    fn derived_gap_case_b() {
        let seq = AlphaSequence::case_b(0.5).unwrap();
        assert!((derived_gap(&seq).unwrap() - 1.0 / 22.0).abs() < 1e-16);
        assert!((derived_s_limit(&seq).unwrap().y - 5.0 / 11.0).abs() < 1e-15);
        assert!((arc_speed_limit(&seq) - 0.4).abs() < 1e-16);
    }

    #[test]
    fn chord_speed_case_b_n25() {
        let m = model(AlphaSequence::case_b(0.5).unwrap(), 27);
        let z = chord_speed(&m, 25).unwrap();
        // oracle: |z_25 - i| = 1.404e-7
        assert!(((z - Point2::I).norm() / 1.404e-7 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn lemma_ids_round_trip() {
        for id in LemmaId::ALL {
            assert_eq!(id.as_str().parse::<LemmaId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
        }
        assert!("bogus".parse::<LemmaId>().is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!("dyadic:3:20".parse::<QuotientGrid>().unwrap(), QuotientGrid::Dyadic(3, 20));
        assert_eq!("ts:5:9".parse::<QuotientGrid>().unwrap(), QuotientGrid::TS(5, 9));
        assert!("tn:9:5".parse::<QuotientGrid>().is_err());
        assert!("xx:1:2".parse::<QuotientGrid>().is_err());
        assert!("tn:1".parse::<QuotientGrid>().is_err());
    }

    #[test]
    fn annulus_pairs_in_range() {
        for (a, b) in annulus_pairs(200, 1.5, 3.0) {
            assert!((1.5..=3.0).contains(&a.norm()) && (1.5..=3.0).contains(&b.norm()));
        }
    }

    #[test]
    fn verify_rejects_short_depth() {
        let seq = AlphaSequence::case_b(0.5).unwrap();
        let opts = VerifyOptions { depth: Some(20), ..Default::default() };
        assert!(matches!(verify_lemma(LemmaId::ChordSpeed, &seq, opts), Err(Error::TruncationUnsafe { .. })));
    }
}
