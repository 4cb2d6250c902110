//! Where explanations of the same model under different outcomes disagree:
//! baselines, signs, the most important feature, zero-attribution level
//! curves, and equal-importance lines for two normalized features.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GaussianLPM, Link, OutcomeKind, OutcomeSpec};
use crate::shapley::{baseline, transformed_eta_baseline, Explanation, TwoFeature};

/// Sign tolerance used when classifying closed-form explanations.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;
/// Bisection stops once the bracket is narrower than this.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;

/// The four baselines on a common probability scale, with the ordering
/// `0.5 < φ₀ᵖ < φ₀ᵈ < Φ(φ₀^η/√λ)` checked link by link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub link: Link,
    pub phi0_eta: f64,
    pub phi0_eta_transformed: f64,
    pub phi0_prob: f64,
    pub phi0_decision: f64,
    /// `0.5 < φ₀ᵖ`
    pub half_below_prob: bool,
    /// `φ₀ᵖ < φ₀ᵈ`
    pub prob_below_decision: bool,
    /// `φ₀ᵈ < Φ(φ₀^η/√λ)`
    pub decision_below_transformed: bool,
}

impl BaselineReport {
    pub fn ordering_holds(&self) -> bool {
        self.half_below_prob && self.prob_below_decision && self.decision_below_transformed
    }

    /// `(quantity, value)` rows; flags are written as 0/1.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        vec![
            ("phi0_eta", self.phi0_eta),
            ("phi0_eta_transformed", self.phi0_eta_transformed),
            ("phi0_prob", self.phi0_prob),
            ("phi0_decision", self.phi0_decision),
            ("half_below_prob", flag(self.half_below_prob)),
            ("prob_below_decision", flag(self.prob_below_decision)),
            (
                "decision_below_transformed",
                flag(self.decision_below_transformed),
            ),
        ]
    }
}

/// Baselines of the three outcomes (decision threshold at 0).
///
/// Only `E[η]` and `V[η]` enter, so any model is accepted; for a normalized
/// model these are `β₀` and `σ₁² + σ₂²`.
pub fn baseline_report(model: &GaussianLPM, link: Link) -> BaselineReport {
    let phi0_eta = model.expected_eta();
    let phi0_eta_transformed = transformed_eta_baseline(model, link);
    let phi0_prob = baseline(model, &OutcomeSpec::probability(link));
    let decision = OutcomeSpec::decision(link, 0.0).expect("zero threshold is finite");
    let phi0_decision = baseline(model, &decision);
    BaselineReport {
        link,
        phi0_eta,
        phi0_eta_transformed,
        phi0_prob,
        phi0_decision,
        half_below_prob: 0.5 < phi0_prob,
        prob_below_decision: phi0_prob < phi0_decision,
        decision_below_transformed: phi0_decision < phi0_eta_transformed,
    }
}

/// How the most important feature is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ranking {
    /// argmax |φᵢ|
    Magnitude,
    /// argmax φᵢ
    Signed,
}

/// Index of the top-ranked feature; ties go to the lower index.
pub fn top_feature(phis: &[f64], ranking: Ranking) -> usize {
    let key = |v: f64| match ranking {
        Ranking::Magnitude => v.abs(),
        Ranking::Signed => v,
    };
    let mut best = 0;
    for (i, &v) in phis.iter().enumerate().skip(1) {
        if key(v) > key(phis[best]) {
            best = i;
        }
    }
    best
}

/// Sign of `v`, with `|v| ≤ zero_tol` counted as zero.
#[inline]
pub fn sign_with_tol(v: f64, zero_tol: f64) -> i8 {
    if v.abs() <= zero_tol {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// Strictly opposite signs; a zero disagrees with nothing.
#[inline]
pub(crate) fn signs_disagree(a: f64, b: f64, zero_tol: f64) -> bool {
    sign_with_tol(a, zero_tol) * sign_with_tol(b, zero_tol) < 0
}

/// Disagreement flags between two explanations of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDisagreement {
    pub outcome_a: OutcomeSpec,
    pub outcome_b: OutcomeSpec,
    pub sign_disagree: Vec<bool>,
    pub top_feature_a: usize,
    pub top_feature_b: usize,
    pub top_feature_disagree: bool,
    /// Same comparison with features ranked by signed value.
    pub signed_top_feature_disagree: bool,
}

impl PairDisagreement {
    pub fn any_sign_disagree(&self) -> bool {
        self.sign_disagree.iter().any(|&d| d)
    }
}

pub fn classify_pair(a: &Explanation, b: &Explanation, zero_tol: f64) -> Result<PairDisagreement> {
    if a.phis.len() != b.phis.len() {
        return Err(Error::DimensionMismatch {
            what: "explanation",
            expected: a.phis.len(),
            got: b.phis.len(),
        });
    }
    if a.x != b.x {
        return Err(Error::InvalidConfig(
            "explanations describe different samples".into(),
        ));
    }
    let sign_disagree = a
        .phis
        .iter()
        .zip(&b.phis)
        .map(|(&p, &q)| signs_disagree(p, q, zero_tol))
        .collect();
    let top_feature_a = top_feature(&a.phis, Ranking::Magnitude);
    let top_feature_b = top_feature(&b.phis, Ranking::Magnitude);
    Ok(PairDisagreement {
        outcome_a: a.outcome,
        outcome_b: b.outcome,
        sign_disagree,
        top_feature_a,
        top_feature_b,
        top_feature_disagree: top_feature_a != top_feature_b,
        signed_top_feature_disagree: top_feature(&a.phis, Ranking::Signed)
            != top_feature(&b.phis, Ranking::Signed),
    })
}

/// Which equal-importance branch a line describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    /// `φ₁ = φ₂`
    SameSign,
    /// `φ₁ = −φ₂`
    OppositeSign,
}

impl LineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LineKind::SameSign => "same_sign",
            LineKind::OppositeSign => "opposite_sign",
        }
    }
}

/// The line `x₂ = intercept + slope·x₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub kind: LineKind,
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn x2_at(&self, x1: f64) -> f64 {
        self.intercept + self.slope * x1
    }

    pub fn x1_at(&self, x2: f64) -> Option<f64> {
        (self.slope != 0.0).then(|| (x2 - self.intercept) / self.slope)
    }
}

/// Zero-attribution roots over a grid of the other feature, plus optional
/// equal-importance lines for the same outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub outcome: OutcomeSpec,
    pub feature: usize,
    pub grid: Vec<f64>,
    pub roots: Vec<Option<f64>>,
    pub lines: Vec<Line>,
}

/// One CSV row of curve output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub x2: f64,
    pub root_x1: Option<f64>,
    pub outcome: &'static str,
    pub kind: &'static str,
}

impl CurveSet {
    /// Zero-curve rows followed by each line sampled on the same grid.
    pub fn rows(&self) -> Vec<CurveRow> {
        let outcome = self.outcome.kind().as_str();
        let mut rows: Vec<CurveRow> = self
            .grid
            .iter()
            .zip(&self.roots)
            .map(|(&x2, &root_x1)| CurveRow {
                x2,
                root_x1,
                outcome,
                kind: "zero_level",
            })
            .collect();
        for line in &self.lines {
            rows.extend(self.grid.iter().map(|&x2| CurveRow {
                x2,
                root_x1: line.x1_at(x2),
                outcome,
                kind: line.kind.as_str(),
            }));
        }
        rows
    }
}

fn two_feature(model: &GaussianLPM, outcome: &OutcomeSpec) -> Result<TwoFeature> {
    TwoFeature::from_model(model, outcome.link(), outcome.eta_star())
}

fn bracket_cap(model: &GaussianLPM) -> f64 {
    10.0 * model.stddevs().iter().cloned().fold(0.0, f64::max) + 10.0
}

/// Locate the point where `t ↦ f(t)` turns positive, for nondecreasing `f`.
///
/// The bracket is doubled around its centre until `f(lo) ≤ 0 < f(hi)` or it
/// reaches `±cap`.
pub(crate) fn sign_change(
    f: impl Fn(f64) -> f64,
    bracket: (f64, f64),
    cap: f64,
    tol: f64,
) -> Option<f64> {
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    loop {
        if f(lo) <= 0.0 && f(hi) > 0.0 {
            break;
        }
        let centre = 0.5 * (lo + hi);
        let width = (hi - lo).max(1e-3);
        let new_lo = (centre - width).max(-cap).min(lo);
        let new_hi = (centre + width).min(cap).max(hi);
        if new_lo == lo && new_hi == hi {
            return None;
        }
        lo = new_lo;
        hi = new_hi;
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Zero level curve of `φ_feature` for a normalized two-feature model.
///
/// For each value of the other feature in `x_other_grid`, bisection in the
/// feature's own value finds where its attribution changes sign. For the
/// decision outcome this is the sign-separating point even where the
/// attribution jumps over zero at the decision boundary.
pub fn zero_level_curve(
    model: &GaussianLPM,
    outcome: &OutcomeSpec,
    feature: usize,
    x_other_grid: &[f64],
    bracket: (f64, f64),
    tol: f64,
) -> Result<CurveSet> {
    let tf = two_feature(model, outcome)?;
    if feature > 1 {
        return Err(Error::IndexOutOfRange {
            index: feature,
            m: 2,
        });
    }
    let kind = outcome.kind();
    let cap = bracket_cap(model);
    let roots = x_other_grid
        .par_iter()
        .map(|&other| {
            let phi = |t: f64| {
                let (x1, x2) = if feature == 0 { (t, other) } else { (other, t) };
                tf.phis(kind, x1, x2)[feature]
            };
            sign_change(phi, bracket, cap, tol)
        })
        .collect();
    Ok(CurveSet {
        outcome: *outcome,
        feature,
        grid: x_other_grid.to_vec(),
        roots,
        lines: Vec::new(),
    })
}

/// Analytic equal-importance lines `[same_sign, opposite_sign]`.
///
/// For the decision outcome the opposite-sign line is the decision boundary
/// `x₁ + x₂ = η* − β₀`: the sum of attributions never vanishes there but
/// changes sign across it.
pub fn equal_importance_lines(model: &GaussianLPM, outcome: &OutcomeSpec) -> Result<[Line; 2]> {
    two_feature(model, outcome)?;
    let b0 = model.intercept();
    let (s1, s2) = (model.stddevs()[0], model.stddevs()[1]);
    let lambda = outcome.lambda();
    let (slope, offset, opposite) = match outcome.kind() {
        OutcomeKind::LogOdds => (1.0, 0.0, 0.0),
        OutcomeKind::Probability => {
            let r = ((lambda + s1 * s1) / (lambda + s2 * s2)).sqrt();
            let shrink = (lambda / (lambda + s1 * s1 + s2 * s2)).sqrt();
            (r, b0, -b0 + b0 * shrink)
        }
        OutcomeKind::Decision => {
            if s2 == 0.0 {
                return Err(Error::Degenerate(
                    "decision equal-importance slope is undefined when feature 2 has zero spread"
                        .into(),
                ));
            }
            let c = b0 - outcome.eta_star();
            (s1 / s2, c, -c)
        }
    };
    Ok([
        Line {
            kind: LineKind::SameSign,
            slope,
            intercept: offset * (slope - 1.0),
        },
        Line {
            kind: LineKind::OppositeSign,
            slope: -1.0,
            intercept: opposite,
        },
    ])
}

/// Result of checking an equal-importance line against the attributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LineCheck {
    /// Largest `|φ₁ − φ₂|` (same sign) or `|φ₁ + φ₂|` (opposite sign).
    Residual(f64),
    /// Decision opposite-sign line: points where `φ₁ + φ₂` did not go from
    /// negative below the line to positive above it.
    SignFlip { failures: usize, checked: usize },
}

impl LineCheck {
    pub fn passes(&self, tol: f64) -> bool {
        match *self {
            LineCheck::Residual(r) => r <= tol,
            LineCheck::SignFlip { failures, .. } => failures == 0,
        }
    }
}

/// Evaluate attributions at `n_points` along `line`, spread over ±3 spreads
/// around the point `(−β₀, −β₀)` where the same-sign lines meet.
pub fn verify_equal_importance(
    model: &GaussianLPM,
    outcome: &OutcomeSpec,
    line: &Line,
    n_points: usize,
) -> Result<LineCheck> {
    let tf = two_feature(model, outcome)?;
    let kind = outcome.kind();
    let half = 3.0 * model.stddevs().iter().cloned().fold(1.0, f64::max);
    let centre = -model.intercept();
    let points: Vec<(f64, f64)> = (0..n_points.max(2))
        .map(|k| {
            let x1 = centre - half + 2.0 * half * k as f64 / (n_points.max(2) - 1) as f64;
            (x1, line.x2_at(x1))
        })
        .collect();

    if kind == OutcomeKind::Decision && line.kind == LineKind::OppositeSign {
        let failures = points
            .iter()
            .filter(|&&(x1, x2)| {
                let delta = 1e-6 * (1.0 + x2.abs());
                let above = tf.phis(kind, x1, x2 + delta);
                let below = tf.phis(kind, x1, x2 - delta);
                !(above[0] + above[1] > 0.0 && below[0] + below[1] < 0.0)
            })
            .count();
        return Ok(LineCheck::SignFlip {
            failures,
            checked: points.len(),
        });
    }

    let residual = points
        .iter()
        .map(|&(x1, x2)| {
            let [p1, p2] = tf.phis(kind, x1, x2);
            match line.kind {
                LineKind::SameSign => (p1 - p2).abs(),
                LineKind::OppositeSign => (p1 + p2).abs(),
            }
        })
        .fold(0.0, f64::max);
    Ok(LineCheck::Residual(residual))
}
