//! Exact Shapley values for Gaussian linear probability models.
//!
//! With independent Gaussian features, the linear index conditioned on any
//! subset of features is again Gaussian, so every value function has a closed
//! form:
//!
//! * log-odds: `v(S) = μ_S`
//! * probability: `v(S) = Φ(μ_S / √(λ + s²_S))`
//! * decision: `v(S) = Φ((μ_S − η*) / s_S)`, or the inclusive indicator when `s_S = 0`
//!
//! where `(μ_S, s²_S)` are the conditional mean and variance of η. Shapley
//! values then follow by enumerating all subsets with the usual
//! `|S|!(m−|S|−1)!/m!` weights. For two normalized features the enumeration
//! collapses to short explicit expressions, implemented separately in
//! [`shapley_two_feature`] and checked against the enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{exceed_probability, indicator, GaussianLPM, Link, OutcomeKind, OutcomeSpec};
use crate::special::{norm_cdf, TailCdf};

/// Largest feature count handled by exact subset enumeration.
pub const MAX_EXACT_FEATURES: usize = 25;

/// Baseline plus per-feature Shapley values for one sample and one outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub outcome: OutcomeSpec,
    pub x: Vec<f64>,
    pub baseline: f64,
    pub phis: Vec<f64>,
    pub prediction: f64,
}

impl Explanation {
    /// `φ₀ + Σ φᵢ − f(x)`; zero up to rounding.
    pub fn efficiency_residual(&self) -> f64 {
        self.baseline + self.phis.iter().sum::<f64>() - self.prediction
    }
}

/// Value of a coalition: expected outcome with `subset` fixed at the sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetValue {
    pub subset: Vec<usize>,
    pub value: f64,
}

fn check_subset(model: &GaussianLPM, subset: &[usize]) -> Result<()> {
    match subset.iter().find(|&&i| i >= model.m()) {
        Some(&index) => Err(Error::IndexOutOfRange {
            index,
            m: model.m(),
        }),
        None => Ok(()),
    }
}

/// `v(S) = E[f(X) | X_S = x_S]` in closed form.
pub fn value_function(
    model: &GaussianLPM,
    outcome: &OutcomeSpec,
    subset: &[usize],
    x: &[f64],
) -> Result<f64> {
    check_subset(model, subset)?;
    let d = model.conditional_eta(subset, x)?;
    Ok(outcome.expect(d.mean, d.variance))
}

/// Every coalition value, ordered by bitmask (feature `i` is bit `i`).
pub fn subset_values(
    model: &GaussianLPM,
    outcome: &OutcomeSpec,
    x: &[f64],
) -> Result<Vec<SubsetValue>> {
    check_capacity(model.m())?;
    model.check_sample(x)?;
    let m = model.m();
    Ok((0u32..1 << m)
        .map(|mask| {
            let d = model.conditional_eta_with(|i| mask >> i & 1 == 1, x);
            SubsetValue {
                subset: (0..m).filter(|&i| mask >> i & 1 == 1).collect(),
                value: outcome.expect(d.mean, d.variance),
            }
        })
        .collect())
}

/// Unconditional expected outcome `v(∅)`.
pub fn baseline(model: &GaussianLPM, outcome: &OutcomeSpec) -> f64 {
    outcome.expect(model.expected_eta(), model.eta_variance())
}

/// The log-odds baseline mapped through the link, `Φ(E[η] / √λ)`, which puts
/// it on the probability scale for comparison with the other baselines.
pub fn transformed_eta_baseline(model: &GaussianLPM, link: Link) -> f64 {
    link.probability(model.expected_eta())
}

fn check_capacity(m: usize) -> Result<()> {
    if m > MAX_EXACT_FEATURES {
        Err(Error::TooManyFeatures {
            m,
            max: MAX_EXACT_FEATURES,
        })
    } else {
        Ok(())
    }
}

/// `w[k] = k!(m−k−1)!/m!` for `k = 0..m`, via log-factorials.
fn shapley_weights(m: usize) -> Vec<f64> {
    let mut ln_fact = vec![0.0f64; m + 1];
    for k in 1..=m {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    (0..m)
        .map(|k| (ln_fact[k] + ln_fact[m - k - 1] - ln_fact[m]).exp())
        .collect()
}

/// Exact Shapley values by enumerating all `2^m` coalitions.
pub fn shapley_exact(model: &GaussianLPM, outcome: &OutcomeSpec, x: &[f64]) -> Result<Explanation> {
    check_capacity(model.m())?;
    model.check_sample(x)?;
    let m = model.m();
    let prediction = outcome.apply(model.eta_unchecked(x));

    // Linear value function: the enumeration telescopes to βᵢ(xᵢ − μᵢ).
    if outcome.kind() == OutcomeKind::LogOdds {
        let phis = (0..m)
            .map(|i| model.coefficients()[i] * (x[i] - model.means()[i]))
            .collect();
        return Ok(Explanation {
            outcome: *outcome,
            x: x.to_vec(),
            baseline: model.expected_eta(),
            phis,
            prediction,
        });
    }

    let weights = shapley_weights(m);
    let mut phis = vec![0.0; m];
    let mut empty_value = 0.0;
    for mask in 0u32..1 << m {
        let d = model.conditional_eta_with(|i| mask >> i & 1 == 1, x);
        let v = outcome.expect(d.mean, d.variance);
        let size = mask.count_ones() as usize;
        if mask == 0 {
            empty_value = v;
        }
        for (i, phi) in phis.iter_mut().enumerate() {
            if mask >> i & 1 == 1 {
                *phi += weights[size - 1] * v;
            } else {
                *phi -= weights[size] * v;
            }
        }
    }
    Ok(Explanation {
        outcome: *outcome,
        x: x.to_vec(),
        baseline: empty_value,
        phis,
        prediction,
    })
}

/// Precomputed two-feature closed forms for a normalized model.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TwoFeature {
    intercept: f64,
    stddevs: [f64; 2],
    eta_star: f64,
    link: Link,
    // probability: √(λ + s²) for coalitions ∅, {1}, {2}, {1,2}
    prob_scale: [f64; 4],
    prob_baseline: f64,
    decision_baseline: f64,
}

impl TwoFeature {
    pub(crate) fn new(intercept: f64, stddevs: [f64; 2], link: Link, eta_star: f64) -> Self {
        let [s1, s2] = stddevs;
        let lambda = link.lambda();
        let prob_scale = [
            (lambda + (s1 * s1 + s2 * s2)).sqrt(),
            (lambda + s2 * s2).sqrt(),
            (lambda + s1 * s1).sqrt(),
            (lambda + 0.0).sqrt(),
        ];
        Self {
            intercept,
            stddevs,
            eta_star,
            link,
            prob_scale,
            prob_baseline: norm_cdf(intercept / prob_scale[0]),
            decision_baseline: exceed_probability(intercept - eta_star, (s1 * s1 + s2 * s2).sqrt()),
        }
    }

    pub(crate) fn from_model(model: &GaussianLPM, link: Link, eta_star: f64) -> Result<Self> {
        if model.m() != 2 {
            return Err(Error::FeatureCount {
                expected: 2,
                got: model.m(),
            });
        }
        if !model.is_normalized() {
            return Err(Error::NotNormalized);
        }
        let s = model.stddevs();
        Ok(Self::new(model.intercept(), [s[0], s[1]], link, eta_star))
    }

    pub(crate) fn baseline(&self, kind: OutcomeKind) -> f64 {
        match kind {
            OutcomeKind::LogOdds => self.intercept,
            OutcomeKind::Probability => self.prob_baseline,
            OutcomeKind::Decision => self.decision_baseline,
        }
    }

    pub(crate) fn prediction(&self, kind: OutcomeKind, x1: f64, x2: f64) -> f64 {
        let eta = self.intercept + x1 + x2;
        match kind {
            OutcomeKind::LogOdds => eta,
            OutcomeKind::Probability => self.link.probability(eta),
            OutcomeKind::Decision => indicator(eta >= self.eta_star),
        }
    }

    /// `(φ₁, φ₂)` from the explicit two-feature expressions.
    #[inline]
    pub(crate) fn phis(&self, kind: OutcomeKind, x1: f64, x2: f64) -> [f64; 2] {
        let b0 = self.intercept;
        match kind {
            OutcomeKind::LogOdds => [x1, x2],
            OutcomeKind::Probability => {
                let [k0, k1, k2, k12] = self.prob_scale;
                let p0 = TailCdf::new(b0 / k0);
                let p1 = TailCdf::new((b0 + x1) / k1);
                let p2 = TailCdf::new((b0 + x2) / k2);
                let p12 = TailCdf::new((b0 + x1 + x2) / k12);
                [
                    0.5 * (p1.minus(p0) + p12.minus(p2)),
                    0.5 * (p2.minus(p0) + p12.minus(p1)),
                ]
            }
            OutcomeKind::Decision => {
                let [s1, s2] = self.stddevs;
                let e = self.eta_star;
                let p0 = TailCdf::new(exceed_score(b0 - e, (s1 * s1 + s2 * s2).sqrt()));
                let p1 = TailCdf::new(exceed_score(b0 + x1 - e, s2));
                let p2 = TailCdf::new(exceed_score(b0 + x2 - e, s1));
                let p12 = TailCdf::new(exceed_score(b0 + x1 + x2 - e, 0.0));
                [
                    0.5 * (p1.minus(p0) + p12.minus(p2)),
                    0.5 * (p2.minus(p0) + p12.minus(p1)),
                ]
            }
        }
    }
}

/// Score `z` with `P(margin + sd·Z ≥ 0) = Φ(z)`; `±∞` when `sd == 0`.
#[inline]
fn exceed_score(margin: f64, sd: f64) -> f64 {
    if sd > 0.0 {
        margin / sd
    } else if margin >= 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

/// Two-feature Shapley values from the explicit closed forms.
///
/// Requires a normalized model (zero means, unit coefficients); see
/// [`GaussianLPM::normalize`].
pub fn shapley_two_feature(
    model: &GaussianLPM,
    outcome: &OutcomeSpec,
    x: [f64; 2],
) -> Result<Explanation> {
    let tf = TwoFeature::from_model(model, outcome.link(), outcome.eta_star())?;
    model.check_sample(&x)?;
    let kind = outcome.kind();
    Ok(Explanation {
        outcome: *outcome,
        x: x.to_vec(),
        baseline: tf.baseline(kind),
        phis: tf.phis(kind, x[0], x[1]).to_vec(),
        prediction: tf.prediction(kind, x[0], x[1]),
    })
}
