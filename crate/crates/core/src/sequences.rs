//! The three angle families `α_n` that drive the construction.
//!
//! Every family is normalized so that `α_1 = π/2`. Differences and ratios of
//! terms are evaluated through factored closed forms, never by subtracting two
//! nearly equal floats: in the doubly exponential family the terms reach
//! `1e-57` by `n = 12` and every downstream quotient is a ratio of such
//! differences.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest term the construction accepts. Below this `sin²(α/2)` leaves the
/// normal range of binary64.
pub const MIN_ALPHA: f64 = 1e-150;

/// Default scan horizon for [`min_valid_index`].
pub const DEFAULT_HORIZON: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `α_n = C n^{-q}`
    A,
    /// `α_n = C λ^n`
    B,
    /// `α_n = C λ^{n²}`
    C,
}

impl Family {
    /// Largest index analyses may use in binary64.
    pub fn index_cap(self) -> usize {
        match self {
            Family::A | Family::B => 10_000,
            Family::C => 12,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            "C" | "c" => Ok(Family::C),
            other => Err(format!("unknown case {other:?}, expected A, B or C")),
        }
    }
}

/// Serialized form of a sequence. The scale `C` is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub case: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl SequenceSpec {
    pub fn a(q: f64) -> Self {
        Self { case: Family::A, lambda: None, q: Some(q) }
    }

    pub fn b(lambda: f64) -> Self {
        Self { case: Family::B, lambda: Some(lambda), q: None }
    }

    pub fn c(lambda: f64) -> Self {
        Self { case: Family::C, lambda: Some(lambda), q: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSequence {
    spec: SequenceSpec,
    /// Family exponent: `q` for A, `λ` for B and C.
    param: f64,
    ln_lambda: f64,
    c: f64,
    n_min: usize,
}

/// Build a sequence from its serialized form, solving for `C` from `α_1 = π/2`.
pub fn make_sequence(spec: SequenceSpec) -> Result<AlphaSequence> {
    AlphaSequence::new(spec)
}

impl AlphaSequence {
    pub fn new(spec: SequenceSpec) -> Result<Self> {
        let mut seq = Self::unvalidated(spec)?;
        if spec.case == Family::C && seq.param >= 0.5 {
            seq.n_min = min_valid_index(&seq, seq.default_horizon())?;
        }
        Ok(seq)
    }

    /// The raw family with `n_min = 1`, checking only the parameter ranges.
    /// Used to report where the construction condition first fails.
    pub fn unvalidated(spec: SequenceSpec) -> Result<Self> {
        let param = match spec.case {
            Family::A => {
                let q = spec.q.ok_or(Error::InvalidParameter {
                    name: "q",
                    value: f64::NAN,
                    reason: "case A requires q",
                })?;
                if !(q > 0.0 && q.is_finite()) {
                    return Err(Error::InvalidParameter { name: "q", value: q, reason: "must be positive" });
                }
                q
            }
            Family::B | Family::C => {
                let lambda = spec.lambda.ok_or(Error::InvalidParameter {
                    name: "lambda",
                    value: f64::NAN,
                    reason: "cases B and C require lambda",
                })?;
                if !(lambda > 0.0 && lambda < 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "lambda",
                        value: lambda,
                        reason: "must lie in (0, 1)",
                    });
                }
                lambda
            }
        };
        let c = match spec.case {
            Family::A => FRAC_PI_2,
            Family::B | Family::C => FRAC_PI_2 / param,
        };
        Ok(Self {
            spec,
            param,
            ln_lambda: if spec.case == Family::A { 0.0 } else { param.ln() },
            c,
            n_min: 1,
        })
    }

    /// Horizon used for the start-index search.
    pub fn default_horizon(&self) -> usize {
        DEFAULT_HORIZON.min(self.alpha_floor_index())
    }

    pub fn case_a(q: f64) -> Result<Self> {
        Self::new(SequenceSpec::a(q))
    }

    pub fn case_b(lambda: f64) -> Result<Self> {
        Self::new(SequenceSpec::b(lambda))
    }

    pub fn case_c(lambda: f64) -> Result<Self> {
        Self::new(SequenceSpec::c(lambda))
    }

    pub fn spec(&self) -> SequenceSpec {
        self.spec
    }

    pub fn family(&self) -> Family {
        self.spec.case
    }

    /// The derived scale `C`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// `λ` for cases B and C.
    pub fn lambda(&self) -> Option<f64> {
        match self.spec.case {
            Family::A => None,
            _ => Some(self.param),
        }
    }

    /// `q` for case A.
    pub fn q(&self) -> Option<f64> {
        match self.spec.case {
            Family::A => Some(self.param),
            _ => None,
        }
    }

    /// Vertices `A_2 ..= A_{n_min}` are dropped from the construction.
    pub fn n_min(&self) -> usize {
        self.n_min
    }

    /// Exponent of `α_n / α_1`, i.e. `ln(α_n) - ln(π/2)`.
    fn log_scale(&self, n: usize) -> f64 {
        let n = n as f64;
        match self.spec.case {
            Family::A => -self.param * n.ln(),
            Family::B => (n - 1.0) * self.ln_lambda,
            Family::C => (n * n - 1.0) * self.ln_lambda,
        }
    }

    pub fn alpha(&self, n: usize) -> f64 {
        assert!(n >= 1, "alpha is indexed from 1");
        let nf = n as f64;
        match self.spec.case {
            Family::A => FRAC_PI_2 * nf.powf(-self.param),
            Family::B => FRAC_PI_2 * self.param.powf(nf - 1.0),
            Family::C => FRAC_PI_2 * self.param.powf(nf * nf - 1.0),
        }
    }

    /// `ln(α_n / α_m)` in closed form.
    pub fn log_ratio(&self, m: usize, n: usize) -> f64 {
        if m == n {
            return 0.0;
        }
        let (mf, nf) = (m as f64, n as f64);
        match self.spec.case {
            Family::A => -self.param * ((nf - mf) / mf).ln_1p(),
            Family::B => (nf - mf) * self.ln_lambda,
            Family::C => (nf - mf) * (nf + mf) * self.ln_lambda,
        }
    }

    /// `α_m - α_n` to full relative precision.
    pub fn diff(&self, m: usize, n: usize) -> f64 {
        match m.cmp(&n) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => -self.diff(n, m),
            std::cmp::Ordering::Less => -self.alpha(m) * self.log_ratio(m, n).exp_m1(),
        }
    }

    /// `α_{n-1} - 2α_n + α_{n+1}` for `n >= 2`.
    pub fn second_diff(&self, n: usize) -> f64 {
        assert!(n >= 2, "second difference needs n >= 2");
        match self.spec.case {
            Family::A => {
                let h = 1.0 / n as f64;
                let q = self.param;
                let bracket = if h <= 0.25 {
                    // (1-h)^{-q} + (1+h)^{-q} - 2 = 2 Σ_{k>=1} (q)_{2k}/(2k)! h^{2k}
                    let h2 = h * h;
                    let mut coeff = q * (q + 1.0) / 2.0;
                    let mut pow = h2;
                    let mut sum = 0.0;
                    for k in 1..200 {
                        let term = coeff * pow;
                        sum += term;
                        if term.abs() <= 1e-18 * sum.abs() {
                            break;
                        }
                        let j = 2.0 * k as f64;
                        coeff *= (q + j) * (q + j + 1.0) / ((j + 1.0) * (j + 2.0));
                        pow *= h2;
                    }
                    2.0 * sum
                } else {
                    (-q * (-h).ln_1p()).exp_m1() + (-q * h.ln_1p()).exp_m1()
                };
                self.alpha(n) * bracket
            }
            Family::B => {
                let one_minus = -self.ln_lambda.exp_m1();
                self.alpha(n - 1) * one_minus * one_minus
            }
            Family::C => {
                let x = self.log_ratio(n - 1, n).exp();
                let y = self.log_ratio(n - 1, n + 1).exp();
                self.alpha(n - 1) * ((1.0 - 2.0 * x) + y)
            }
        }
    }

    /// Predecessor of vertex `A_n` in the construction (`n >= n_min + 1`).
    pub fn prev_index(&self, n: usize) -> usize {
        if self.n_min > 1 && n == self.n_min + 1 {
            1
        } else {
            n - 1
        }
    }

    /// Successor of vertex `A_n` in the construction.
    pub fn next_index(&self, n: usize) -> usize {
        if n == 1 {
            self.n_min + 1
        } else {
            n + 1
        }
    }

    /// Whether `A_n` is a vertex of the construction.
    pub fn is_vertex(&self, n: usize) -> bool {
        n == 1 || n > self.n_min
    }

    /// First vertex index after `A_1`; also the first arc index.
    pub fn first_arc(&self) -> usize {
        self.n_min + 1
    }

    /// Largest `n` with `α_n >= MIN_ALPHA`.
    pub fn alpha_floor_index(&self) -> usize {
        let limit = (MIN_ALPHA / FRAC_PI_2).ln();
        let n = match self.spec.case {
            Family::A => (-limit / self.param).exp(),
            Family::B => 1.0 + limit / self.ln_lambda,
            Family::C => (1.0 + limit / self.ln_lambda).sqrt(),
        };
        let mut n = n.floor().min(1e9) as usize;
        while n > 1 && self.log_scale(n) < limit {
            n -= 1;
        }
        n.max(1)
    }

    /// Largest construction depth: analyses stop at the index cap, the model
    /// needs two guard pieces past it, and `α_{depth+1}` must stay above
    /// [`MIN_ALPHA`].
    pub fn max_depth(&self) -> usize {
        (self.family().index_cap() + 2).min(self.alpha_floor_index().saturating_sub(1))
    }

    /// `b_n - b_{n+1}` with `b_n = α_{prev(n)} - α_n`.
    pub fn kink(&self, n: usize) -> f64 {
        let p = self.prev_index(n);
        if p == n - 1 {
            self.second_diff(n)
        } else {
            self.diff(p, n) - self.diff(n, n + 1)
        }
    }
}

/// Which part of the construction condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    NotDecreasing,
    NotMidpointConvex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionFailure {
    pub index: usize,
    pub kind: ConditionKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub n_max: usize,
    pub first_failure: Option<ConditionFailure>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

fn midpoint_holds(seq: &AlphaSequence, n: usize) -> bool {
    // 2α_{n+1} <= α_n + α_{n+2}  <=>  1 - ρ_n >= ρ_n (1 - ρ_{n+1}),  ρ_k = α_{k+1}/α_k
    let l0 = seq.log_ratio(n, n + 1);
    let l1 = seq.log_ratio(n + 1, n + 2);
    -l0.exp_m1() >= l0.exp() * -l1.exp_m1()
}

/// Check strict monotonicity and midpoint convexity of the raw family for
/// indices up to `n_max`. Works on ratios, so underflow of the terms does not
/// matter.
pub fn check_condition_c1(seq: &AlphaSequence, n_max: usize) -> ConditionReport {
    let mut first_failure = None;
    for n in 1..n_max {
        if seq.log_ratio(n, n + 1).partial_cmp(&0.0) != Some(std::cmp::Ordering::Less) {
            first_failure = Some(ConditionFailure { index: n, kind: ConditionKind::NotDecreasing });
            break;
        }
        if n + 2 <= n_max && !midpoint_holds(seq, n) {
            first_failure = Some(ConditionFailure { index: n, kind: ConditionKind::NotMidpointConvex });
            break;
        }
    }
    ConditionReport { n_max, first_failure }
}

/// Smallest `N` such that the vertex angles `π/2, α_{N+1}, α_{N+2}, ...`
/// satisfy the construction condition up to `horizon`. `N = 1` means the raw
/// family already does.
pub fn min_valid_index(seq: &AlphaSequence, horizon: usize) -> Result<usize> {
    if horizon < 4 {
        return Err(Error::NoValidIndex { horizon });
    }
    let last_failure = (1..=horizon - 2).rev().find(|&n| !midpoint_holds(seq, n));
    let Some(f) = last_failure else {
        return Ok(1);
    };
    for big_n in f.max(2)..=horizon - 3 {
        // Junction at A_{N+1} whose predecessor is A_1.
        let (a, b) = (big_n + 1, big_n + 2);
        if seq.diff(1, a) >= seq.diff(a, b) {
            return Ok(big_n);
        }
    }
    Err(Error::NoValidIndex { horizon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn first_term_is_pinned() {
        for seq in [
            AlphaSequence::case_a(1.0).unwrap(),
            AlphaSequence::case_a(2.5).unwrap(),
            AlphaSequence::case_b(0.5).unwrap(),
            AlphaSequence::case_c(0.4).unwrap(),
        ] {
            assert_eq!(seq.alpha(1), FRAC_PI_2);
        }
    }

    #[test]
    fn derived_scales() {
        assert_eq!(AlphaSequence::case_a(1.0).unwrap().c(), FRAC_PI_2);
        assert!(rel(AlphaSequence::case_b(0.5).unwrap().c(), PI) < 1e-15);
        // c = π/0.8
        assert!(rel(AlphaSequence::case_c(0.4).unwrap().c(), 3.926_990_816_987_241_5) < 1e-15);
    }

    #[test]
    fn family_values() {
        let b = AlphaSequence::case_b(0.5).unwrap();
        assert!(rel(b.alpha(3), PI / 8.0) < 1e-15);
        let a = AlphaSequence::case_a(1.0).unwrap();
        assert!(rel(a.alpha(4), PI / 8.0) < 1e-15);
        assert!(rel(a.alpha(10), PI / 20.0) < 1e-15);
        let c = AlphaSequence::case_c(0.4).unwrap();
        assert!(rel(c.alpha(2), 0.100_530_964_914_873_38) < 1e-14);
        assert!(rel(c.alpha(5), 4.421_398_595_017_775e-10) < 1e-13);
    }

    #[test]
    fn factored_differences() {
        let b = AlphaSequence::case_b(0.5).unwrap();
        assert!(rel(b.diff(3, 4), PI / 16.0) < 1e-15);
        let a = AlphaSequence::case_a(1.0).unwrap();
        assert!(rel(a.diff(99, 101), 3.141_906_844_274_220_7e-4) < 1e-14);
        let c = AlphaSequence::case_c(0.4).unwrap();
        assert!(rel(c.diff(4, 5), 1.686_187_573_205_750_6e-6) < 1e-13);
        assert_eq!(c.diff(5, 5), 0.0);
        assert_eq!(c.diff(5, 4), -c.diff(4, 5));
    }

    #[test]
    fn differences_agree_with_naive_subtraction_when_it_is_reliable() {
        for seq in [
            AlphaSequence::case_a(1.0).unwrap(),
            AlphaSequence::case_b(0.5).unwrap(),
            AlphaSequence::case_c(0.4).unwrap(),
        ] {
            let top = if seq.family() == Family::C { 12 } else { 1000 };
            for n in 2..=top {
                let d = seq.diff(n, n + 1);
                assert!(d > 0.0);
                let naive = seq.alpha(n) - seq.alpha(n + 1);
                // at least 3 significant digits survive the naive subtraction
                if naive / seq.alpha(n) > 1e-13 {
                    let tol = 1e-12_f64.max(4.0 * f64::EPSILON * seq.alpha(n) / naive);
                    assert!(rel(d, naive) <= tol, "n={n} {d} {naive}");
                }
            }
        }
    }

    #[test]
    fn second_difference_matches_difference_of_differences() {
        for seq in [
            AlphaSequence::case_a(1.0).unwrap(),
            AlphaSequence::case_a(0.3).unwrap(),
            AlphaSequence::case_b(0.5).unwrap(),
            AlphaSequence::case_c(0.4).unwrap(),
        ] {
            for n in 2..=12 {
                let sd = seq.second_diff(n);
                let dd = seq.diff(n - 1, n) - seq.diff(n, n + 1);
                assert!(rel(sd, dd) < 1e-12, "{:?} n={n}: {sd} vs {dd}", seq.family());
            }
        }
        // Case A, q = 1: exactly 2/((n-1) n (n+1)) · π/2
        let a = AlphaSequence::case_a(1.0).unwrap();
        for n in [4usize, 5, 100, 1000, 9999] {
            let nf = n as f64;
            let exact = FRAC_PI_2 * 2.0 / ((nf - 1.0) * nf * (nf + 1.0));
            assert!(rel(a.second_diff(n), exact) < 1e-13, "n={n}");
        }
    }

    #[test]
    fn conditions_hold_for_the_canonical_families() {
        for seq in [AlphaSequence::case_a(1.0).unwrap(), AlphaSequence::case_b(0.5).unwrap()] {
            assert!(check_condition_c1(&seq, 10_000).passed());
        }
        assert!(check_condition_c1(&AlphaSequence::case_c(0.4).unwrap(), 50).passed());
    }

    #[test]
    fn condition_failure_is_reported_for_large_lambda() {
        // 2λ³ > 1 + λ⁸ for λ = 0.9
        let seq = AlphaSequence::case_c(0.9).unwrap();
        let report = check_condition_c1(&seq, 50);
        assert_eq!(
            report.first_failure,
            Some(ConditionFailure { index: 1, kind: ConditionKind::NotMidpointConvex })
        );
        assert_eq!(seq.n_min(), 2);
        assert_eq!(seq.prev_index(3), 1);
        assert_eq!(seq.prev_index(4), 3);
    }

    #[test]
    fn min_valid_index_values() {
        assert_eq!(min_valid_index(&AlphaSequence::case_c(0.4).unwrap(), 60).unwrap(), 1);
        assert_eq!(min_valid_index(&AlphaSequence::case_c(0.49).unwrap(), 60).unwrap(), 1);
        assert_eq!(min_valid_index(&AlphaSequence::case_c(0.7).unwrap(), 60).unwrap(), 1);
        assert_eq!(min_valid_index(&AlphaSequence::case_c(0.9).unwrap(), 60).unwrap(), 2);
        assert!(matches!(
            min_valid_index(&AlphaSequence::case_c(0.4).unwrap(), 3),
            Err(Error::NoValidIndex { .. })
        ));
    }

    #[test]
    fn parameter_validation() {
        assert!(AlphaSequence::case_b(1.2).is_err());
        assert!(AlphaSequence::case_b(0.0).is_err());
        assert!(AlphaSequence::case_c(-0.1).is_err());
        assert!(AlphaSequence::case_a(0.0).is_err());
        assert!(AlphaSequence::new(SequenceSpec { case: Family::B, lambda: None, q: Some(1.0) }).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let json = serde_json::to_string(&SequenceSpec::b(0.5)).unwrap();
        assert_eq!(json, r#"{"case":"B","lambda":0.5}"#);
        let back: SequenceSpec = serde_json::from_str(r#"{"case":"A","q":1.0}"#).unwrap();
        assert_eq!(back, SequenceSpec::a(1.0));
    }

    #[test]
    fn index_caps() {
        assert_eq!(AlphaSequence::case_c(0.4).unwrap().max_depth(), 14);
        assert_eq!(AlphaSequence::case_a(1.0).unwrap().max_depth(), 10_002);
        let b = AlphaSequence::case_b(0.5).unwrap();
        assert!(b.alpha(b.alpha_floor_index()) >= MIN_ALPHA);
        assert!(b.alpha(b.alpha_floor_index() + 1) < MIN_ALPHA);
        assert_eq!(b.max_depth(), b.alpha_floor_index() - 1);
    }

    #[test]
    fn gaps_b_n_are_positive_and_decreasing() {
        for seq in [
            AlphaSequence::case_a(1.0).unwrap(),
            AlphaSequence::case_b(0.5).unwrap(),
            AlphaSequence::case_c(0.4).unwrap(),
        ] {
            let top = if seq.family() == Family::C { 12 } else { 1000 };
            let b: Vec<f64> = (2..=top).map(|n| seq.diff(n - 1, n)).collect();
            assert!(b.iter().all(|&x| x > 0.0));
            assert!(b.windows(2).all(|w| w[1] < w[0]));
        }
    }
}
