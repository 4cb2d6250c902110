use lpm_shapley::disagreement::{CurveRow, DEFAULT_ROOT_TOL};
use lpm_shapley::report::{disagreement_rows, importance_rows, Footer};
use lpm_shapley::{
    baseline_report, baseline_sweep, equal_importance_lines, mc_shapley, run_disagreement_study,
    run_importance_study, shapley_exact, zero_level_curve, Error, Explanation, GaussianLPM, Link,
    OutcomeKind, OutcomeSpec, RngSpec,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    BaselineArgs, CurvesArgs, ExplainArgs, GridArgs, OracleArgs, OutcomeArgs, RangeArgs, StudyArgs,
    SweepArgs,
};
use crate::config::{load_studies, read_json, resolve_seed, SweepConfig};
use crate::failure::{Classify, CmdResult, Failure};
use crate::output::emit;

const MAX_ORACLE_FEATURES: usize = 10;

fn load_model(path: &std::path::Path) -> CmdResult<GaussianLPM> {
    read_json(path)
}

fn outcomes(args: &OutcomeArgs) -> CmdResult<Vec<OutcomeSpec>> {
    let kinds: Vec<OutcomeKind> = if args.outcomes.is_empty() {
        OutcomeKind::ALL.to_vec()
    } else {
        args.outcomes.iter().map(|&o| o.into()).collect()
    };
    kinds
        .into_iter()
        .map(|k| OutcomeSpec::new(k, args.link.into(), args.eta_star).input_err("--eta-star"))
        .collect()
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect()
}

fn check_range(r: &RangeArgs) -> CmdResult {
    for (name, lo, hi) in [("x1", r.x1_min, r.x1_max), ("x2", r.x2_min, r.x2_max)] {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Failure::input(format!(
                "{name} range must be finite with min < max, got [{lo}, {hi}]"
            )));
        }
    }
    if r.steps < 2 {
        return Err(Failure::input(format!(
            "--steps must be at least 2, got {}",
            r.steps
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ExplainRow {
    outcome: &'static str,
    link: &'static str,
    eta_star: f64,
    feature: usize,
    x: f64,
    phi: f64,
    baseline: f64,
    prediction: f64,
    efficiency_residual: f64,
}

#[derive(Serialize)]
struct ExplainJson {
    #[serde(flatten)]
    explanation: Explanation,
    efficiency_residual: f64,
}

pub fn explain(args: &ExplainArgs) -> CmdResult {
    let model = load_model(&args.model)?;
    let mut csv = Vec::new();
    let mut json = Vec::new();
    for o in outcomes(&args.outcome)? {
        let e = shapley_exact(&model, &o, &args.x).input_err("--x")?;
        let residual = e.efficiency_residual();
        for (i, (&x, &phi)) in e.x.iter().zip(&e.phis).enumerate() {
            csv.push(ExplainRow {
                outcome: o.kind().as_str(),
                link: o.link().as_str(),
                eta_star: o.eta_star(),
                feature: i + 1,
                x,
                phi,
                baseline: e.baseline,
                prediction: e.prediction,
                efficiency_residual: residual,
            });
        }
        json.push(ExplainJson {
            explanation: e,
            efficiency_residual: residual,
        });
    }
    emit(&args.output, Footer::default(), csv, &json)
}

#[derive(Serialize)]
struct QuantityRow {
    quantity: &'static str,
    value: f64,
}

pub fn baseline(args: &BaselineArgs) -> CmdResult {
    let model = load_model(&args.model)?;
    let report = baseline_report(&model, args.link.into());
    let rows = report
        .rows()
        .into_iter()
        .map(|(quantity, value)| QuantityRow { quantity, value })
        .collect();
    emit(&args.output, Footer::default(), rows, &report)
}

pub fn curves(args: &CurvesArgs) -> CmdResult {
    check_range(&args.range)?;
    let model = load_model(&args.model)?;
    let r = &args.range;
    let grid = linspace(r.x2_min, r.x2_max, r.steps);
    let mut sets = Vec::new();
    for o in outcomes(&args.outcome)? {
        let mut set =
            zero_level_curve(&model, &o, 0, &grid, (r.x1_min, r.x1_max), DEFAULT_ROOT_TOL)
                .input_err("--model")?;
        match equal_importance_lines(&model, &o) {
            Ok(lines) => set.lines = lines.to_vec(),
            Err(Error::Degenerate(msg)) => eprintln!("{o}: no equal-importance lines ({msg})"),
            Err(e) => return Err(Failure::Input(e.into())),
        }
        sets.push(set);
    }
    let rows: Vec<CurveRow> = sets.iter().flat_map(|s| s.rows()).collect();
    emit(&args.output, Footer::default(), rows, &sets)
}

#[derive(Serialize)]
struct GridRow {
    outcome: &'static str,
    x1: f64,
    x2: f64,
    phi1: f64,
    phi2: f64,
}

pub fn grid(args: &GridArgs) -> CmdResult {
    check_range(&args.range)?;
    let model = load_model(&args.model)?;
    if model.m() != 2 {
        return Err(Failure::input(format!(
            "grid needs a two-feature model, got {} features",
            model.m()
        )));
    }
    let r = &args.range;
    let xs1 = linspace(r.x1_min, r.x1_max, r.steps);
    let xs2 = linspace(r.x2_min, r.x2_max, r.steps);
    let mut rows = Vec::new();
    for o in outcomes(&args.outcome)? {
        let block: Vec<Vec<GridRow>> = xs1
            .par_iter()
            .map(|&x1| {
                xs2.iter()
                    .map(|&x2| {
                        let e = shapley_exact(&model, &o, &[x1, x2])?;
                        Ok(GridRow {
                            outcome: o.kind().as_str(),
                            x1,
                            x2,
                            phi1: e.phis[0],
                            phi2: e.phis[1],
                        })
                    })
                    .collect::<Result<Vec<_>, Error>>()
            })
            .collect::<Result<_, Error>>()
            .input_err("grid")?;
        rows.extend(block.into_iter().flatten());
    }
    emit(
        &args.output,
        Footer::default(),
        rows.iter().collect(),
        &rows,
    )
}

pub fn disagree_study(args: &StudyArgs) -> CmdResult {
    let studies = load_studies(args)?;
    let tables = studies
        .configs
        .iter()
        .map(run_disagreement_study)
        .collect::<Result<Vec<_>, _>>()
        .input_err("study")?;
    let rows = tables.iter().flat_map(disagreement_rows).collect();
    let footer = Footer::new(Some(studies.seed), Some(studies.samples));
    emit(&args.output, footer, rows, &tables)
}

pub fn importance_study(args: &StudyArgs) -> CmdResult {
    let studies = load_studies(args)?;
    let tables = studies
        .configs
        .iter()
        .map(run_importance_study)
        .collect::<Result<Vec<_>, _>>()
        .input_err("study")?;
    let rows = tables.iter().flat_map(importance_rows).collect();
    let footer = Footer::new(Some(studies.seed), Some(studies.samples));
    emit(&args.output, footer, rows, &tables)
}

fn logspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), steps)
        .into_iter()
        .map(f64::exp)
        .collect()
}

pub fn sweep(args: &SweepArgs) -> CmdResult {
    let cfg = match &args.config {
        Some(path) => read_json::<SweepConfig>(path)?,
        None => {
            let expected_eta = args
                .expected_eta
                .ok_or_else(|| Failure::input("either --config or --expected-eta is required"))?;
            if !(args.var_min > 0.0 && args.var_min < args.var_max && args.steps >= 2) {
                return Err(Failure::input(
                    "need 0 < --var-min < --var-max and --steps of at least 2",
                ));
            }
            SweepConfig {
                expected_eta,
                link: Link::default(),
                variances: logspace(args.var_min, args.var_max, args.steps),
            }
        }
    };
    let link = args.link.map(Link::from).unwrap_or(cfg.link);
    let rows = baseline_sweep(cfg.expected_eta, &cfg.variances, link).input_err("variance grid")?;
    emit(&args.output, Footer::default(), rows.clone(), &rows)
}

#[derive(Serialize)]
struct OracleRow {
    outcome: &'static str,
    feature: usize,
    exact: f64,
    estimate: f64,
    std_error: f64,
    z_score: f64,
    pass: bool,
}

pub fn oracle_check(args: &OracleArgs) -> CmdResult {
    let model = load_model(&args.model)?;
    if model.m() > MAX_ORACLE_FEATURES {
        return Err(Failure::input(format!(
            "oracle-check supports at most {MAX_ORACLE_FEATURES} features, got {}",
            model.m()
        )));
    }
    let seed = resolve_seed(args.seed, None);
    eprintln!("seed: {seed}");
    let mut rows = Vec::new();
    for (stream, o) in outcomes(&args.outcome)?.into_iter().enumerate() {
        let exact = shapley_exact(&model, &o, &args.x).input_err("--x")?;
        let est = mc_shapley(
            &model,
            &o,
            &args.x,
            args.n,
            args.inner,
            RngSpec::new(seed, stream as u64),
        )
        .input_err("oracle")?;
        for (i, (e, &phi)) in est.iter().zip(&exact.phis).enumerate() {
            let diff = e.value - phi;
            rows.push(OracleRow {
                outcome: o.kind().as_str(),
                feature: i + 1,
                exact: phi,
                estimate: e.value,
                std_error: e.std_error,
                z_score: if e.std_error > 0.0 {
                    diff / e.std_error
                } else {
                    0.0
                },
                pass: e.agrees_with(phi, args.k),
            });
        }
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    emit(
        &args.output,
        Footer::new(Some(seed), Some(args.n)),
        rows.iter().collect(),
        &rows,
    )?;
    if failed > 0 {
        return Err(Failure::Verification(format!(
            "{failed} attribution(s) outside {} standard errors",
            args.k
        )));
    }
    eprintln!("all attributions within {} standard errors", args.k);
    Ok(())
}
