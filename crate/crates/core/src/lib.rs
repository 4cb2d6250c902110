//! Shapley explanations of Gaussian linear predictor models (logit and probit
//! regression with independent normal features) under three outcomes: the
//! log-odds, the predicted probability and the thresholded decision.
//!
//! Exact values come from closed-form conditional expectations; Monte Carlo
//! and quadrature oracles cross-check them, and the study drivers measure how
//! often explanations of the different outcomes disagree.

pub mod disagreement;
pub mod error;
pub mod model;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod shapley;
pub mod simulation;
pub mod special;

pub use disagreement::{
    baseline_report, classify_pair, equal_importance_lines, verify_equal_importance,
    zero_level_curve, BaselineReport, CurveSet, Line, LineCheck, LineKind, PairDisagreement,
    Ranking,
};
pub use error::{Error, Result};
pub use model::{EtaDistribution, GaussianLPM, Link, OutcomeKind, OutcomeSpec};
pub use oracle::{gauss_hermite_expect_sigmoid, mc_shapley, mc_value_function, OracleEstimate};
pub use rng::RngSpec;
pub use shapley::{
    baseline, shapley_exact, shapley_two_feature, subset_values, value_function, Explanation,
    SubsetValue,
};
pub use simulation::{
    baseline_sweep, eta_importance_closed_form, run_disagreement_study, run_importance_study,
    run_study, DisagreementTable, ImportanceTable, StudyConfig,
};
