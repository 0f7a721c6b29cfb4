//! Learning curves of test error against years of training data.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use super::harness::{expand_roster, naive_scores, observable_frame, run_model, test_origins};
use super::plan::{plan_probe, ProbeWindow};
use super::roster::{ModelSpec, Variant};
use crate::error::{Error, Result, Warning};
use crate::task::TaskData;

/// Relative improvement over the previous training length below which the
/// curve counts as flat.
pub const ELBOW_CUTOFF: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub n_years: u32,
    pub model: String,
    pub variant: Variant,
    pub horizon: usize,
    pub n_origins: usize,
    pub mse: Option<f64>,
    pub naive_mse: Option<f64>,
    pub rel_improvement: Option<f64>,
    pub failed: bool,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Elbow {
    pub model: String,
    pub variant: Variant,
    pub horizon: usize,
    pub n_years: Option<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeCurve {
    pub reference: NaiveDate,
    pub rows: Vec<ProbeRow>,
    pub elbows: Vec<Elbow>,
    pub warnings: Vec<Warning>,
}

/// Smallest `n` whose error improves on the previous training length by less
/// than `cutoff` (relative). Points must be sorted by `n`.
pub fn elbow(points: &[(u32, f64)], cutoff: f64) -> Option<u32> {
    points.windows(2).find(|w| (w[0].1 - w[1].1) / w[0].1 < cutoff).map(|w| w[1].0)
}

fn probe_window(
    w: &ProbeWindow,
    roster: &[ModelSpec],
    task: &TaskData,
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    let observable = observable_frame(task)?;
    let origins = test_origins(task, &w.test);
    let naive = naive_scores(task, &observable, origins.clone())?;
    let naive_mse = |h: usize| (!origins.is_empty()).then(|| naive.sse[h - 1] / origins.len() as f64);
    let mut rows = Vec::new();
    for (model, variant) in expand_roster(roster) {
        let run = run_model(model, variant, task, &observable, &w.train, origins.clone(), seed);
        for &h in run.horizons.iter().filter(|h| task.spec.headline.contains(h)) {
            let n_mse = naive_mse(h);
            let (mse, failed, error) = match &run.scores {
                Ok(s) => (s.mse(h), false, String::new()),
                Err(e) => (None, true, e.to_string()),
            };
            let rel_improvement = match (n_mse, mse) {
                (Some(n), Some(m)) if n > 0.0 => Some((n - m) / n),
                _ => None,
            };
            rows.push(ProbeRow {
                n_years: w.n_years,
                model: model.name(),
                variant,
                horizon: h,
                n_origins: origins.len(),
                mse,
                naive_mse: n_mse,
                rel_improvement,
                failed,
                error,
            });
        }
    }
    Ok(rows)
}

/// Trains every roster entry on `n` years before `reference` for each `n`
/// and tests on the data from `reference` on.
pub fn sample_efficiency_probe(
    task: &TaskData,
    roster: &[ModelSpec],
    reference: NaiveDate,
    n_range: std::ops::RangeInclusive<u32>,
    seed: u64,
    jobs: usize,
) -> Result<ProbeCurve> {
    let (windows, warnings) = plan_probe(task.frame.dates(), reference, n_range)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let per: Vec<Result<Vec<ProbeRow>>> =
        pool.install(|| windows.par_iter().map(|w| probe_window(w, roster, task, seed)).collect());
    let mut rows: Vec<ProbeRow> = per.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    rows.sort_by(|a, b| (&a.model, a.variant, a.horizon, a.n_years).cmp(&(&b.model, b.variant, b.horizon, b.n_years)));

    let mut elbows = Vec::new();
    for group in rows.chunk_by(|a, b| (&a.model, a.variant, a.horizon) == (&b.model, b.variant, b.horizon)) {
        let points: Vec<(u32, f64)> = group.iter().filter_map(|r| r.mse.map(|m| (r.n_years, m))).collect();
        elbows.push(Elbow {
            model: group[0].model.clone(),
            variant: group[0].variant,
            horizon: group[0].horizon,
            n_years: elbow(&points, ELBOW_CUTOFF),
        });
    }
    Ok(ProbeCurve { reference, rows, elbows, warnings })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn probe_to_csv(curve: &ProbeCurve) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "n_years",
        "model",
        "variant",
        "horizon",
        "n_origins",
        "mse",
        "naive_mse",
        "rel_improvement",
        "elbow",
        "failed",
        "error",
    ])?;
    for r in &curve.rows {
        let is_elbow = curve
            .elbows
            .iter()
            .any(|e| e.model == r.model && e.variant == r.variant && e.horizon == r.horizon && e.n_years == Some(r.n_years));
        w.write_record([
            r.n_years.to_string(),
            r.model.clone(),
            r.variant.to_string(),
            r.horizon.to_string(),
            r.n_origins.to_string(),
            opt(r.mse),
            opt(r.naive_mse),
            opt(r.rel_improvement),
            is_elbow.to_string(),
            r.failed.to_string(),
            r.error.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elbow_is_first_small_improvement() {
        let pts = [(2, 10.0), (3, 6.0), (4, 4.0), (5, 3.9), (6, 3.8)];
        assert_eq!(elbow(&pts, 0.05), Some(5));
        let flat = [(2, 1.0), (3, 1.0), (4, 1.0)];
        assert_eq!(elbow(&flat, 0.05), Some(3));
        assert_eq!(elbow(&[(2, 5.0), (3, 2.0)], 0.05), None);
    }
}
