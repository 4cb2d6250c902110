//! Linear probability models with independent Gaussian features.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::special::{norm_cdf, LOGIT_LAMBDA};

/// Link function mapping the linear index to a probability.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    #[default]
    Logit,
    Probit,
}

impl Link {
    /// Variance offset in `E[G(Z)] = Φ(μ / √(λ + σ²))`: 1 for probit, 8/π for logit.
    pub fn lambda(self) -> f64 {
        match self {
            Link::Logit => LOGIT_LAMBDA,
            Link::Probit => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Link::Logit => "logit",
            Link::Probit => "probit",
        }
    }

    /// `G(η)`. The logit link uses its probit approximation.
    #[inline]
    pub fn probability(self, eta: f64) -> f64 {
        match self {
            Link::Probit => norm_cdf(eta),
            Link::Logit => norm_cdf(eta / LOGIT_LAMBDA.sqrt()),
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logit" => Ok(Link::Logit),
            "probit" => Ok(Link::Probit),
            other => Err(Error::InvalidConfig(format!(
                "unknown link {other:?} (expected logit or probit)"
            ))),
        }
    }
}

/// The three readings of a fitted model's output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    LogOdds,
    Probability,
    Decision,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 3] = [
        OutcomeKind::LogOdds,
        OutcomeKind::Probability,
        OutcomeKind::Decision,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::LogOdds => "log_odds",
            OutcomeKind::Probability => "probability",
            OutcomeKind::Decision => "decision",
        }
    }
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutcomeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log_odds" | "log-odds" | "eta" => Ok(OutcomeKind::LogOdds),
            "probability" | "prob" => Ok(OutcomeKind::Probability),
            "decision" => Ok(OutcomeKind::Decision),
            other => Err(Error::InvalidConfig(format!(
                "unknown outcome {other:?} (expected log_odds, probability or decision)"
            ))),
        }
    }
}

/// Which outcome to explain, with the link and decision threshold it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOutcomeSpec")]
pub struct OutcomeSpec {
    kind: OutcomeKind,
    link: Link,
    eta_star: f64,
}

#[derive(Deserialize)]
struct RawOutcomeSpec {
    kind: OutcomeKind,
    #[serde(default)]
    link: Link,
    #[serde(default)]
    eta_star: f64,
}

impl TryFrom<RawOutcomeSpec> for OutcomeSpec {
    type Error = Error;

    fn try_from(raw: RawOutcomeSpec) -> Result<Self> {
        OutcomeSpec::new(raw.kind, raw.link, raw.eta_star)
    }
}

impl OutcomeSpec {
    pub fn new(kind: OutcomeKind, link: Link, eta_star: f64) -> Result<Self> {
        ensure_finite("eta_star", eta_star)?;
        Ok(Self {
            kind,
            link,
            eta_star,
        })
    }

    pub fn log_odds(link: Link) -> Self {
        Self {
            kind: OutcomeKind::LogOdds,
            link,
            eta_star: 0.0,
        }
    }

    pub fn probability(link: Link) -> Self {
        Self {
            kind: OutcomeKind::Probability,
            link,
            eta_star: 0.0,
        }
    }

    pub fn decision(link: Link, eta_star: f64) -> Result<Self> {
        Self::new(OutcomeKind::Decision, link, eta_star)
    }

    /// All three outcomes for one link and threshold, in log-odds,
    /// probability, decision order.
    pub fn all(link: Link, eta_star: f64) -> Result<[Self; 3]> {
        Ok([
            Self::log_odds(link),
            Self::probability(link),
            Self::decision(link, eta_star)?,
        ])
    }

    pub fn kind(&self) -> OutcomeKind {
        self.kind
    }

    pub fn link(&self) -> Link {
        self.link
    }

    pub fn lambda(&self) -> f64 {
        self.link.lambda()
    }

    pub fn eta_star(&self) -> f64 {
        self.eta_star
    }

    /// Map a value of the linear index to this outcome.
    #[inline]
    pub fn apply(&self, eta: f64) -> f64 {
        match self.kind {
            OutcomeKind::LogOdds => eta,
            OutcomeKind::Probability => self.link.probability(eta),
            OutcomeKind::Decision => indicator(eta >= self.eta_star),
        }
    }

    /// Expected outcome when η ~ N(mean, variance).
    #[inline]
    pub fn expect(&self, mean: f64, variance: f64) -> f64 {
        match self.kind {
            OutcomeKind::LogOdds => mean,
            OutcomeKind::Probability => norm_cdf(mean / (self.lambda() + variance).sqrt()),
            OutcomeKind::Decision => exceed_probability(mean - self.eta_star, variance.sqrt()),
        }
    }
}

impl fmt::Display for OutcomeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OutcomeKind::LogOdds => write!(f, "log_odds"),
            OutcomeKind::Probability => write!(f, "probability[{}]", self.link),
            OutcomeKind::Decision => write!(f, "decision[eta*={}]", self.eta_star),
        }
    }
}

#[inline]
pub(crate) fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `P(margin + sd·Z ≥ 0)`; with `sd == 0` this is the inclusive indicator.
#[inline]
pub(crate) fn exceed_probability(margin: f64, sd: f64) -> f64 {
    if sd > 0.0 {
        norm_cdf(margin / sd)
    } else {
        indicator(margin >= 0.0)
    }
}

/// Gaussian law of the linear index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaDistribution {
    pub mean: f64,
    pub variance: f64,
}

/// Logit/probit model `η = β₀ + Σ βᵢ Xᵢ` with independent `Xᵢ ~ N(μᵢ, σᵢ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct GaussianLPM {
    intercept: f64,
    coefficients: Vec<f64>,
    means: Vec<f64>,
    stddevs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawModel {
    intercept: f64,
    coefficients: Vec<f64>,
    means: Vec<f64>,
    stddevs: Vec<f64>,
}

impl TryFrom<RawModel> for GaussianLPM {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        GaussianLPM::new(raw.intercept, raw.coefficients, raw.means, raw.stddevs)
    }
}

impl GaussianLPM {
    pub fn new(
        intercept: f64,
        coefficients: Vec<f64>,
        means: Vec<f64>,
        stddevs: Vec<f64>,
    ) -> Result<Self> {
        let m = coefficients.len();
        if m == 0 {
            return Err(Error::EmptyModel);
        }
        for (what, len) in [("means", means.len()), ("stddevs", stddevs.len())] {
            if len != m {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: m,
                    got: len,
                });
            }
        }
        ensure_finite("intercept", intercept)?;
        for &b in &coefficients {
            ensure_finite("coefficient", b)?;
        }
        for &mu in &means {
            ensure_finite("mean", mu)?;
        }
        for (index, &s) in stddevs.iter().enumerate() {
            ensure_finite("stddev", s)?;
            if s < 0.0 {
                return Err(Error::NegativeStddev { index, value: s });
            }
        }
        Ok(Self {
            intercept,
            coefficients,
            means,
            stddevs,
        })
    }

    /// Zero-mean, unit-coefficient model with the given intercept and spreads.
    pub fn normalized(intercept: f64, stddevs: Vec<f64>) -> Result<Self> {
        let m = stddevs.len();
        Self::new(intercept, vec![1.0; m], vec![0.0; m], stddevs)
    }

    pub fn m(&self) -> usize {
        self.coefficients.len()
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stddevs(&self) -> &[f64] {
        &self.stddevs
    }

    pub fn is_normalized(&self) -> bool {
        self.coefficients.iter().all(|&b| b == 1.0) && self.means.iter().all(|&mu| mu == 0.0)
    }

    /// `E[η] = β₀ + Σ βᵢ μᵢ`.
    pub fn expected_eta(&self) -> f64 {
        self.coefficients
            .iter()
            .zip(&self.means)
            .fold(self.intercept, |acc, (b, mu)| acc + b * mu)
    }

    /// `V[η] = Σ βᵢ² σᵢ²`.
    pub fn eta_variance(&self) -> f64 {
        self.coefficients
            .iter()
            .zip(&self.stddevs)
            .map(|(b, s)| (b * s) * (b * s))
            .sum()
    }

    pub(crate) fn check_sample(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.m() {
            return Err(Error::DimensionMismatch {
                what: "sample",
                expected: self.m(),
                got: x.len(),
            });
        }
        for &xi in x {
            ensure_finite("sample value", xi)?;
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn eta_unchecked(&self, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(x)
            .fold(self.intercept, |acc, (b, xi)| acc + b * xi)
    }

    /// Linear index `β₀ + Σ βᵢ xᵢ`.
    pub fn eta(&self, x: &[f64]) -> Result<f64> {
        self.check_sample(x)?;
        Ok(self.eta_unchecked(x))
    }

    /// Model output for `x` under the given outcome.
    pub fn predict(&self, outcome: &OutcomeSpec, x: &[f64]) -> Result<f64> {
        Ok(outcome.apply(self.eta(x)?))
    }

    /// Law of η when the features in `known` are fixed at their values in `x`
    /// and the rest keep their marginals.
    pub fn conditional_eta(&self, known: &[usize], x: &[f64]) -> Result<EtaDistribution> {
        self.check_sample(x)?;
        let mut mask = vec![false; self.m()];
        for &i in known {
            if i >= self.m() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    m: self.m(),
                });
            }
            mask[i] = true;
        }
        Ok(self.conditional_eta_with(|i| mask[i], x))
    }

    /// Same as [`conditional_eta`](Self::conditional_eta) with membership
    /// given as a predicate; inputs are assumed validated.
    #[inline]
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn conditional_eta_with(
        &self,
        known: impl Fn(usize) -> bool,
        x: &[f64],
    ) -> EtaDistribution {
        let mut mean = self.intercept;
        let mut variance = 0.0;
        for i in 0..self.m() {
            let b = self.coefficients[i];
            if known(i) {
                mean += b * x[i];
            } else {
                mean += b * self.means[i];
                let s = b * self.stddevs[i];
                variance += s * s;
            }
        }
        EtaDistribution { mean, variance }
    }

    /// Equivalent model with zero means and unit coefficients, together with
    /// the sample mapped into the new frame (`x̃ᵢ = βᵢ(xᵢ − μᵢ)`).
    ///
    /// Features with a negative coefficient have their axis flipped.
    pub fn normalize(&self, x: &[f64]) -> Result<(GaussianLPM, Vec<f64>)> {
        self.check_sample(x)?;
        if let Some(index) = self.coefficients.iter().position(|&b| b == 0.0) {
            return Err(Error::ZeroCoefficient { index });
        }
        let m = self.m();
        let stddevs = self
            .coefficients
            .iter()
            .zip(&self.stddevs)
            .map(|(b, s)| (b * s).abs())
            .collect();
        let model = GaussianLPM {
            intercept: self.expected_eta(),
            coefficients: vec![1.0; m],
            means: vec![0.0; m],
            stddevs,
        };
        let x_tilde = (0..m)
            .map(|i| self.coefficients[i] * (x[i] - self.means[i]))
            .collect();
        Ok((model, x_tilde))
    }
}
