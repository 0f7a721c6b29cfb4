//! Fitting and scoring forecasters over planned windows.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use super::plan::{Span, WindowPlan};
use super::roster::{ModelSpec, Variant};
use crate::error::{Error, Result};
use crate::forecast::{Context, Forecaster, NaiveForecaster, TrainSet};
use crate::series::{Frame, Series};
use crate::task::TaskData;

/// Error of one model at one horizon over one test span.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRecord {
    pub window_date: NaiveDate,
    pub train_start: NaiveDate,
    pub train_end: NaiveDate,
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
    pub model: String,
    pub variant: Variant,
    pub horizon: usize,
    pub headline: bool,
    pub n_origins: usize,
    pub mse: Option<f64>,
    pub naive_mse: Option<f64>,
    /// `(naive_mse − mse) / naive_mse`; absent when the naive error is zero.
    pub rel_improvement: Option<f64>,
    pub failed: bool,
    pub error: String,
}

/// Squared-error sums per horizon.
#[derive(Debug, Clone)]
pub(crate) struct Scores {
    pub sse: Vec<f64>,
    pub count: usize,
}

impl Scores {
    pub fn mse(&self, h: usize) -> Option<f64> {
        (self.count > 0).then(|| self.sse[h - 1] / self.count as f64)
    }
}

/// Frame rows of a train span and the target rows usable for fitting (whole
/// horizon inside the span).
fn train_rows(task: &TaskData, span: &Span) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let rows = span.rows(task.frame.dates());
    let h = task.spec.horizon;
    let usable_end = rows.end.saturating_sub(h).max(rows.start).min(task.n_origins());
    (rows.clone(), rows.start..usable_end)
}

/// Test origins: rows in the span whose `t + H` is also inside it.
pub fn test_origins(task: &TaskData, span: &Span) -> std::ops::Range<usize> {
    let rows = span.rows(task.frame.dates());
    let h = task.spec.horizon;
    rows.start..rows.end.saturating_sub(h).max(rows.start).min(task.n_origins())
}

fn fit_on(f: &mut dyn Forecaster, task: &TaskData, span: &Span, seed: u64) -> Result<()> {
    let (rows, targets) = train_rows(task, span);
    if targets.is_empty() {
        return Err(Error::Length(format!("no complete training target in {}..{}", span.start, span.end)));
    }
    let train = TrainSet {
        frame: task.frame.view(rows.clone()),
        targets: &task.targets,
        target_rows: targets.clone(),
        origin_rows: (targets.start - rows.start..targets.end - rows.start).collect(),
        observable: &task.observable,
        seed,
    };
    f.fit(&train).map(|_| ())
}

fn score(f: &mut dyn Forecaster, task: &TaskData, observable: &Frame, origins: std::ops::Range<usize>) -> Result<Scores> {
    let h = task.spec.horizon;
    let mut sse = vec![0.0; h];
    for i in origins.clone() {
        let ctx = Context {
            history: task.frame.view(0..i + 1),
            future_observable: (observable.width() > 0).then(|| observable.view(i + 1..i + 1 + h)),
            observable: &task.observable,
        };
        let fc = f.predict(&ctx, h)?;
        if fc.values.len() != h {
            return Err(Error::Model(format!("expected {h} forecast values, got {}", fc.values.len())));
        }
        for (k, (p, y)) in fc.values.iter().zip(task.targets.row(i)).enumerate() {
            sse[k] += (p - y) * (p - y);
        }
    }
    Ok(Scores { sse, count: origins.len() })
}

/// Horizons a model is scored at.
fn scored_horizons(f: &dyn Forecaster, horizon: usize) -> Vec<usize> {
    f.meta().trained_horizons.unwrap_or_else(|| (1..=horizon).collect())
}

/// Roster entries expanded to (model, variant) pairs, in roster order.
pub fn expand_roster(roster: &[ModelSpec]) -> Vec<(&ModelSpec, Variant)> {
    roster.iter().flat_map(|m| m.variants().into_iter().map(move |v| (m, v))).collect()
}

pub(crate) struct RunOutcome {
    pub scores: Result<Scores>,
    pub horizons: Vec<usize>,
}

/// Fits (unless zero-shot or fit-free) on `train` and scores over `origins`.
pub(crate) fn run_model(
    model: &ModelSpec,
    variant: Variant,
    task: &TaskData,
    observable: &Frame,
    train: &Span,
    origins: std::ops::Range<usize>,
    seed: u64,
) -> RunOutcome {
    let all: Vec<usize> = (1..=task.spec.horizon).collect();
    let mut f = match model.instantiate(&task.spec, variant, seed) {
        Ok(f) => f,
        Err(e) => {
            let horizons = match model {
                ModelSpec::Linear { horizons } | ModelSpec::Ridge { horizons, .. } => {
                    horizons.clone().unwrap_or_else(|| task.spec.headline.clone())
                }
                _ => all,
            };
            return RunOutcome { scores: Err(e), horizons };
        }
    };
    let horizons = scored_horizons(f.as_ref(), task.spec.horizon);
    let scores = (|| {
        if f.meta().needs_fit && !variant.is_zero_shot() {
            fit_on(f.as_mut(), task, train, seed)?;
        }
        score(f.as_mut(), task, observable, origins)
    })();
    RunOutcome { scores, horizons }
}

pub(crate) fn naive_scores(task: &TaskData, observable: &Frame, origins: std::ops::Range<usize>) -> Result<Scores> {
    let mut naive = NaiveForecaster::new("naive", task.spec.naive.clone());
    score(&mut naive, task, observable, origins)
}

pub(crate) fn observable_frame(task: &TaskData) -> Result<Frame> {
    let names: Vec<&str> = task.observable.iter().map(String::as_str).collect();
    if names.is_empty() {
        return Ok(Frame::new(task.frame.dates().to_vec(), Vec::new())?);
    }
    task.frame.select(&names)
}

fn rel(naive: Option<f64>, mse: Option<f64>) -> Option<f64> {
    match (naive, mse) {
        (Some(n), Some(m)) if n > 0.0 => Some((n - m) / n),
        _ => None,
    }
}

/// Evaluates every roster entry on one window. Model failures become failed
/// records; the naive baseline failing is an error for the whole window.
pub fn evaluate_window(plan: &WindowPlan, roster: &[ModelSpec], task: &TaskData, seed: u64) -> Result<Vec<EvalRecord>> {
    let observable = observable_frame(task)?;
    let origins = test_origins(task, &plan.test);
    let naive = naive_scores(task, &observable, origins.clone())?;
    let mut out = Vec::new();
    for (model, variant) in expand_roster(roster) {
        let run = run_model(model, variant, task, &observable, &plan.train, origins.clone(), seed);
        for &h in &run.horizons {
            let base = EvalRecord {
                window_date: plan.eval_date,
                train_start: plan.train.start,
                train_end: plan.train.end,
                test_start: plan.test.start,
                test_end: plan.test.end,
                model: model.name(),
                variant,
                horizon: h,
                headline: task.spec.headline.contains(&h),
                n_origins: origins.len(),
                mse: None,
                naive_mse: naive.mse(h),
                rel_improvement: None,
                failed: false,
                error: String::new(),
            };
            out.push(match &run.scores {
                Ok(s) => {
                    let mse = s.mse(h);
                    EvalRecord { mse, rel_improvement: rel(base.naive_mse, mse), ..base }
                }
                Err(e) => EvalRecord { failed: true, error: e.to_string(), ..base },
            });
        }
    }
    Ok(out)
}

/// Evaluates all windows on `jobs` threads and returns the records sorted by
/// window date, model, variant and horizon.
pub fn evaluate(plans: &[WindowPlan], roster: &[ModelSpec], task: &TaskData, seed: u64, jobs: usize) -> Result<Vec<EvalRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let per_window: Vec<Result<Vec<EvalRecord>>> =
        pool.install(|| plans.par_iter().map(|p| evaluate_window(p, roster, task, seed)).collect());
    let mut records: Vec<EvalRecord> = per_window.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}

/// Out-of-sample forecasts at `horizon` from a model refitted on each
/// plan's training span. Each plan forecasts from its evaluation date up to
/// the next plan's; the last one covers its whole test span.
pub fn walk_forward_forecasts(
    plans: &[WindowPlan],
    model: &ModelSpec,
    variant: Variant,
    task: &TaskData,
    horizon: usize,
    seed: u64,
) -> Result<Series> {
    if horizon == 0 || horizon > task.spec.horizon {
        return Err(Error::Config(format!("forecast horizon {horizon} outside 1..={}", task.spec.horizon)));
    }
    let observable = observable_frame(task)?;
    let h = task.spec.horizon;
    let (mut dates, mut values) = (Vec::new(), Vec::new());
    for (k, plan) in plans.iter().enumerate() {
        let end = plans.get(k + 1).map_or(plan.test.end, |next| next.eval_date);
        let rows = Span { start: plan.eval_date, end }.rows(task.frame.dates());
        let rows = rows.start..rows.end.min(task.n_origins());
        let mut f = model.instantiate(&task.spec, variant, seed)?;
        if f.meta().needs_fit && !variant.is_zero_shot() {
            fit_on(f.as_mut(), task, &plan.train, seed)?;
        }
        for i in rows {
            let ctx = Context {
                history: task.frame.view(0..i + 1),
                future_observable: (observable.width() > 0).then(|| observable.view(i + 1..i + 1 + h)),
                observable: &task.observable,
            };
            let fc = f.predict(&ctx, h)?;
            dates.push(task.frame.dates()[i]);
            values.push(fc.values[horizon - 1]);
        }
    }
    Ok(Series::new(format!("{}_h{horizon}", model.name()), dates, values))
}

pub fn sort_records(records: &mut [EvalRecord]) {
    records.sort_by(|a, b| {
        (a.window_date, &a.model, a.variant, a.horizon).cmp(&(b.window_date, &b.model, b.variant, b.horizon))
    });
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub const EVAL_HEADER: [&str; 15] = [
    "window_date",
    "train_start",
    "train_end",
    "test_start",
    "test_end",
    "model",
    "variant",
    "horizon",
    "headline",
    "n_origins",
    "mse",
    "naive_mse",
    "rel_improvement",
    "failed",
    "error",
];

/// Long-format CSV of evaluation records.
pub fn records_to_csv(records: &[EvalRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EVAL_HEADER)?;
    for r in records {
        w.write_record([
            r.window_date.to_string(),
            r.train_start.to_string(),
            r.train_end.to_string(),
            r.test_start.to_string(),
            r.test_end.to_string(),
            r.model.clone(),
            r.variant.to_string(),
            r.horizon.to_string(),
            r.headline.to_string(),
            r.n_origins.to_string(),
            opt(r.mse),
            opt(r.naive_mse),
            opt(r.rel_improvement),
            r.failed.to_string(),
            r.error.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
