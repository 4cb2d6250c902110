//! Seeded Monte Carlo studies over normalized two-feature models: how often
//! explanations of different outcomes disagree, and how global feature
//! importance shifts between outcomes.

use serde::{Deserialize, Serialize};

use crate::disagreement::{signs_disagree, top_feature, Ranking};
use crate::error::{Error, Result};
use crate::model::{GaussianLPM, Link, OutcomeKind, OutcomeSpec};
use crate::rng::{sharded, RngSpec};
use crate::shapley::{baseline, transformed_eta_baseline, TwoFeature};

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const MIN_STUDY_SAMPLES: u64 = 10_000;
/// Samples per independently seeded shard.
pub const SAMPLES_PER_SHARD: u64 = 1 << 15;

fn default_samples() -> u64 {
    DEFAULT_SAMPLES
}

#[derive(Deserialize)]
struct RawStudyConfig {
    expected_eta: f64,
    scaled_sigmas: [f64; 2],
    #[serde(default)]
    link: Link,
    #[serde(default)]
    eta_star: f64,
    #[serde(default = "default_samples")]
    n_samples: u64,
    #[serde(default)]
    rng: RngSpec,
}

/// Parameters of one study: `E[η]`, the scaled spreads `βᵢσᵢ`, the outcome
/// settings and the sampling budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStudyConfig")]
pub struct StudyConfig {
    pub expected_eta: f64,
    pub scaled_sigmas: [f64; 2],
    pub link: Link,
    pub eta_star: f64,
    pub n_samples: u64,
    pub rng: RngSpec,
}

impl TryFrom<RawStudyConfig> for StudyConfig {
    type Error = Error;

    fn try_from(raw: RawStudyConfig) -> Result<Self> {
        let config = StudyConfig {
            expected_eta: raw.expected_eta,
            scaled_sigmas: raw.scaled_sigmas,
            link: raw.link,
            eta_star: raw.eta_star,
            n_samples: raw.n_samples,
            rng: raw.rng,
        };
        config.validate()?;
        Ok(config)
    }
}

impl StudyConfig {
    /// Logit link, threshold 0 and the default sample count.
    pub fn new(expected_eta: f64, scaled_sigmas: [f64; 2], rng: RngSpec) -> Self {
        Self {
            expected_eta,
            scaled_sigmas,
            link: Link::Logit,
            eta_star: 0.0,
            n_samples: DEFAULT_SAMPLES,
            rng,
        }
    }

    pub fn with_samples(mut self, n_samples: u64) -> Self {
        self.n_samples = n_samples;
        self
    }

    pub fn with_link(mut self, link: Link) -> Self {
        self.link = link;
        self
    }

    pub fn with_eta_star(mut self, eta_star: f64) -> Self {
        self.eta_star = eta_star;
        self
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::ensure_finite("expected_eta", self.expected_eta)?;
        crate::error::ensure_finite("eta_star", self.eta_star)?;
        for (i, &s) in self.scaled_sigmas.iter().enumerate() {
            crate::error::ensure_finite("scaled sigma", s)?;
            if s <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "scaled sigma {} must be positive, got {s}",
                    i + 1
                )));
            }
        }
        if self.n_samples < MIN_STUDY_SAMPLES {
            return Err(Error::TooFewSamples {
                what: "study samples",
                min: MIN_STUDY_SAMPLES,
                got: self.n_samples,
            });
        }
        Ok(())
    }

    /// The normalized model with `β₀ = E[η]`, unit coefficients and
    /// `σᵢ = βᵢσᵢ`.
    pub fn model(&self) -> Result<GaussianLPM> {
        GaussianLPM::normalized(self.expected_eta, self.scaled_sigmas.to_vec())
    }
}

/// The three outcome pairs compared in the disagreement study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomePair {
    LogOddsVsProbability,
    ProbabilityVsDecision,
    LogOddsVsDecision,
}

impl OutcomePair {
    pub const ALL: [OutcomePair; 3] = [
        OutcomePair::LogOddsVsProbability,
        OutcomePair::ProbabilityVsDecision,
        OutcomePair::LogOddsVsDecision,
    ];

    pub fn kinds(self) -> (OutcomeKind, OutcomeKind) {
        match self {
            OutcomePair::LogOddsVsProbability => (OutcomeKind::LogOdds, OutcomeKind::Probability),
            OutcomePair::ProbabilityVsDecision => (OutcomeKind::Probability, OutcomeKind::Decision),
            OutcomePair::LogOddsVsDecision => (OutcomeKind::LogOdds, OutcomeKind::Decision),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomePair::LogOddsVsProbability => "log_odds_vs_probability",
            OutcomePair::ProbabilityVsDecision => "probability_vs_decision",
            OutcomePair::LogOddsVsDecision => "log_odds_vs_decision",
        }
    }

    fn involves_decision(self) -> bool {
        self.kinds().1 == OutcomeKind::Decision
    }
}

/// Percentages for one outcome pair; `None` when the pair involves a
/// constant decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub pair: OutcomePair,
    /// Samples where some feature has strictly opposite signs.
    pub sign_disagree_pct: Option<f64>,
    /// Samples whose largest |φᵢ| is on different features.
    pub top_feature_disagree_pct: Option<f64>,
    /// Samples whose largest signed φᵢ is on different features.
    pub signed_top_feature_disagree_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisagreementTable {
    pub config: StudyConfig,
    /// Every sampled decision was identical.
    pub degenerate: bool,
    pub rows: Vec<PairRow>,
}

/// Global importance for one outcome; cells are `None` for a constant
/// decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRow {
    pub outcome: OutcomeKind,
    /// `(I₁, I₂)`, sums of `|φᵢ|` over the samples.
    pub importance: Option<[f64; 2]>,
    /// `I₁ / I₂`
    pub relative: Option<f64>,
    /// `relative / relative_log_odds − 1`, as a fraction; absent for log-odds.
    pub excess_relative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTable {
    pub config: StudyConfig,
    pub degenerate: bool,
    pub rows: Vec<ImportanceRow>,
}

/// Per-shard tallies. Counts are integers and importance sums are merged in
/// shard order, so totals do not depend on scheduling.
#[derive(Debug, Clone, Default)]
struct Tally {
    sign: [u64; 3],
    top: [u64; 3],
    top_signed: [u64; 3],
    importance: [[f64; 2]; 3],
    decisions_up: u64,
}

fn kind_index(kind: OutcomeKind) -> usize {
    match kind {
        OutcomeKind::LogOdds => 0,
        OutcomeKind::Probability => 1,
        OutcomeKind::Decision => 2,
    }
}

fn sweep(config: &StudyConfig) -> Result<Tally> {
    config.validate()?;
    let [s1, s2] = config.scaled_sigmas;
    let tf = TwoFeature::new(config.expected_eta, [s1, s2], config.link, config.eta_star);
    let decides = |x1: f64, x2: f64| config.expected_eta + x1 + x2 >= config.eta_star;

    let shards = sharded(config.n_samples, SAMPLES_PER_SHARD, |shard, range| {
        let mut draws = config.rng.shard(shard);
        let mut t = Tally::default();
        for _ in range {
            let x1 = s1 * draws.standard_normal();
            let x2 = s2 * draws.standard_normal();
            let phis = OutcomeKind::ALL.map(|k| tf.phis(k, x1, x2));
            for (p, pair) in OutcomePair::ALL.iter().enumerate() {
                let (a, b) = pair.kinds();
                let (pa, pb) = (phis[kind_index(a)], phis[kind_index(b)]);
                if (0..2).any(|i| signs_disagree(pa[i], pb[i], 0.0)) {
                    t.sign[p] += 1;
                }
                if top_feature(&pa, Ranking::Magnitude) != top_feature(&pb, Ranking::Magnitude) {
                    t.top[p] += 1;
                }
                if top_feature(&pa, Ranking::Signed) != top_feature(&pb, Ranking::Signed) {
                    t.top_signed[p] += 1;
                }
            }
            for (acc, phi) in t.importance.iter_mut().zip(&phis) {
                acc[0] += phi[0].abs();
                acc[1] += phi[1].abs();
            }
            t.decisions_up += decides(x1, x2) as u64;
        }
        t
    });

    Ok(shards.into_iter().fold(Tally::default(), |mut acc, t| {
        for p in 0..3 {
            acc.sign[p] += t.sign[p];
            acc.top[p] += t.top[p];
            acc.top_signed[p] += t.top_signed[p];
            acc.importance[p][0] += t.importance[p][0];
            acc.importance[p][1] += t.importance[p][1];
        }
        acc.decisions_up += t.decisions_up;
        acc
    }))
}

fn degenerate(tally: &Tally, n: u64) -> bool {
    tally.decisions_up == 0 || tally.decisions_up == n
}

fn disagreement_table(config: &StudyConfig, tally: &Tally) -> DisagreementTable {
    let n = config.n_samples;
    let degenerate = degenerate(tally, n);
    let pct = |count: u64| 100.0 * count as f64 / n as f64;
    let rows = OutcomePair::ALL
        .iter()
        .enumerate()
        .map(|(p, &pair)| {
            let blank = degenerate && pair.involves_decision();
            let cell = |count: u64| (!blank).then(|| pct(count));
            PairRow {
                pair,
                sign_disagree_pct: cell(tally.sign[p]),
                top_feature_disagree_pct: cell(tally.top[p]),
                signed_top_feature_disagree_pct: cell(tally.top_signed[p]),
            }
        })
        .collect();
    DisagreementTable {
        config: *config,
        degenerate,
        rows,
    }
}

fn importance_table(config: &StudyConfig, tally: &Tally) -> ImportanceTable {
    let degenerate = degenerate(tally, config.n_samples);
    let ratio = |i: [f64; 2]| i[0] / i[1];
    let eta_relative = ratio(tally.importance[0]);
    let rows = OutcomeKind::ALL
        .iter()
        .map(|&outcome| {
            if degenerate && outcome == OutcomeKind::Decision {
                return ImportanceRow {
                    outcome,
                    importance: None,
                    relative: None,
                    excess_relative: None,
                };
            }
            let importance = tally.importance[kind_index(outcome)];
            let relative = ratio(importance);
            ImportanceRow {
                outcome,
                importance: Some(importance),
                relative: Some(relative),
                excess_relative: (outcome != OutcomeKind::LogOdds)
                    .then(|| relative / eta_relative - 1.0),
            }
        })
        .collect();
    ImportanceTable {
        config: *config,
        degenerate,
        rows,
    }
}

/// Sign and top-feature disagreement percentages for the three outcome
/// pairs. Signs are taken raw: a zero attribution disagrees with nothing.
pub fn run_disagreement_study(config: &StudyConfig) -> Result<DisagreementTable> {
    let tally = sweep(config)?;
    Ok(disagreement_table(config, &tally))
}

/// Global importance `Iᵢ = Σ|φᵢ|` per outcome, with ratios.
pub fn run_importance_study(config: &StudyConfig) -> Result<ImportanceTable> {
    let tally = sweep(config)?;
    Ok(importance_table(config, &tally))
}

/// Both tables from a single pass over the samples.
pub fn run_study(config: &StudyConfig) -> Result<(DisagreementTable, ImportanceTable)> {
    let tally = sweep(config)?;
    Ok((
        disagreement_table(config, &tally),
        importance_table(config, &tally),
    ))
}

/// Expected log-odds importance `βᵢσᵢ · n · √(2/π)` (mean of a folded normal).
pub fn eta_importance_closed_form(config: &StudyConfig) -> [f64; 2] {
    let folded = (2.0 / std::f64::consts::PI).sqrt();
    config
        .scaled_sigmas
        .map(|s| s * config.n_samples as f64 * folded)
}

/// Baselines at one total log-odds variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineSweepRow {
    pub variance: f64,
    pub phi0_eta: f64,
    pub phi0_eta_transformed: f64,
    pub phi0_prob: f64,
    pub phi0_decision: f64,
}

/// Baselines of every outcome (threshold 0) as `V[η]` varies at fixed `E[η]`.
pub fn baseline_sweep(
    expected_eta: f64,
    variance_grid: &[f64],
    link: Link,
) -> Result<Vec<BaselineSweepRow>> {
    crate::error::ensure_finite("expected_eta", expected_eta)?;
    let decision = OutcomeSpec::decision(link, 0.0)?;
    let probability = OutcomeSpec::probability(link);
    variance_grid
        .iter()
        .map(|&variance| {
            crate::error::ensure_finite("variance", variance)?;
            if variance <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "variance grid must be positive, got {variance}"
                )));
            }
            let model = GaussianLPM::normalized(expected_eta, vec![variance.sqrt()])?;
            Ok(BaselineSweepRow {
                variance,
                phi0_eta: expected_eta,
                phi0_eta_transformed: transformed_eta_baseline(&model, link),
                phi0_prob: baseline(&model, &probability),
                phi0_decision: baseline(&model, &decision),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disagreement::classify_pair;
    use crate::shapley::shapley_two_feature;
    use approx::assert_relative_eq;

    fn config(e: f64, s: [f64; 2], n: u64) -> StudyConfig {
        StudyConfig::new(e, s, RngSpec::new(7, 0)).with_samples(n)
    }

    #[test]
    fn config_validation() {
        assert!(config(0.0, [2.0, 1.0], 10_000).validate().is_ok());
        assert!(config(0.0, [0.0, 1.0], 10_000).validate().is_err());
        assert!(config(0.0, [2.0, 1.0], 9_999).validate().is_err());
        assert!(config(f64::NAN, [2.0, 1.0], 10_000).validate().is_err());
        let parsed: StudyConfig = serde_json::from_str(
            r#"{"expected_eta": 1.0, "scaled_sigmas": [2.0, 1.0], "rng": {"seed": 3}}"#,
        )
        .unwrap();
        assert_eq!(parsed.n_samples, DEFAULT_SAMPLES);
        assert_eq!(parsed.link, Link::Logit);
        assert_eq!(parsed.rng, RngSpec::new(3, 0));
        assert!(serde_json::from_str::<StudyConfig>(
            r#"{"expected_eta": 1.0, "scaled_sigmas": [-2.0, 1.0]}"#
        )
        .is_err());
    }

    #[test]
    fn closed_form_importance() {
        let c = config(0.0, [2.0, 1.0], 1_000_000);
        let [i1, i2] = eta_importance_closed_form(&c);
        assert_relative_eq!(i1, 1_595_769.121_605_730_7, max_relative = 1e-12);
        assert_eq!(i1 / i2, 2.0);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let c = config(0.5, [2.0, 1.0], 100_000);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_study(&c).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn matches_explicit_classification() {
        // Replay the draws through the public explanation path.
        let c = config(1.0, [2.0, 1.0], 10_000);
        let model = c.model().unwrap();
        let outcomes = OutcomeSpec::all(c.link, c.eta_star).unwrap();
        let mut draws = c.rng.shard(0);
        let mut sign = [0u64; 3];
        let mut top = [0u64; 3];
        for _ in 0..c.n_samples {
            let x = [2.0 * draws.standard_normal(), draws.standard_normal()];
            let e: Vec<_> = outcomes
                .iter()
                .map(|o| shapley_two_feature(&model, o, x).unwrap())
                .collect();
            for (p, (a, b)) in [(0, 1), (1, 2), (0, 2)].into_iter().enumerate() {
                let d = classify_pair(&e[a], &e[b], 0.0).unwrap();
                sign[p] += d.any_sign_disagree() as u64;
                top[p] += d.top_feature_disagree as u64;
            }
        }
        let table = run_disagreement_study(&c).unwrap();
        for (p, row) in table.rows.iter().enumerate() {
            assert_eq!(row.sign_disagree_pct, Some(100.0 * sign[p] as f64 / 1e4));
            assert_eq!(
                row.top_feature_disagree_pct,
                Some(100.0 * top[p] as f64 / 1e4)
            );
        }
    }

    #[test]
    fn constant_decision_blanks_cells() {
        let c = config(1.0, [0.02, 0.01], 20_000);
        let (d, i) = run_study(&c).unwrap();
        assert!(d.degenerate && i.degenerate);
        assert!(d.rows[0].sign_disagree_pct.is_some());
        assert!(d.rows[1].sign_disagree_pct.is_none());
        assert!(d.rows[2].top_feature_disagree_pct.is_none());
        assert!(i.rows[2].importance.is_none());
        assert!(i.rows[1].excess_relative.is_some());
    }

    #[test]
    fn importance_shape() {
        let (_, t) = run_study(&config(0.0, [2.0, 1.0], 50_000)).unwrap();
        assert!(!t.degenerate);
        assert_eq!(t.rows[0].excess_relative, None);
        for row in &t.rows {
            let [i1, i2] = row.importance.unwrap();
            assert!(i1 >= 0.0 && i2 > 0.0);
            assert!(row.relative.unwrap() > 0.0);
        }
        assert!((t.rows[0].relative.unwrap() - 2.0).abs() < 0.05);
    }

    #[test]
    fn sweep_limits() {
        let rows = baseline_sweep(1.0, &[1e-4, 4e4], Link::Logit).unwrap();
        let lambda = Link::Logit.lambda();
        assert!((rows[0].phi0_prob - crate::special::norm_cdf(1.0 / lambda.sqrt())).abs() < 1e-4);
        assert!((rows[1].phi0_prob - rows[1].phi0_decision).abs() < 1e-3);
        for r in baseline_sweep(0.0, &[0.01, 1.0, 100.0], Link::Probit).unwrap() {
            assert_eq!(
                [r.phi0_eta_transformed, r.phi0_prob, r.phi0_decision],
                [0.5; 3]
            );
        }
        assert!(baseline_sweep(1.0, &[0.0], Link::Logit).is_err());
    }
}
