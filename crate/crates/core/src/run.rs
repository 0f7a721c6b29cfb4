//! Command implementations behind the `foretest` binary.
//!
//! Every command stages its files as `<name>.partial` in the output
//! directory and renames them only once all of them are written, then
//! records them in `run_manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::NaiveDate;
use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backtest::{
    benchmark_metrics, curves_to_csv, perf_metrics, run_backtest, signal_ewma, signal_rolling_mean, signal_vote,
    PerfMetrics, SignalSeries,
};
use crate::config::{RunConfig, TaskSource};
use crate::error::{Error, Result, Warning};
use crate::eval::{
    context_padding, default_roster, errors_from_runs, evaluate, plan_rolling_windows, probe_to_csv, records_to_csv,
    sample_efficiency_probe, transfer_gains, walk_forward_forecasts, ModelSpec, TransferErrors, TransferGains,
};
use crate::series::calendar::business_days;
use crate::series::transforms::pct_change;
use crate::series::Frame;
use crate::synthetic::{default_calendar, generate};
use crate::task::{TaskData, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Features,
    Probe,
    Evaluate,
    TransferGains,
    Backtest,
    Report,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Features => "features",
            Command::Probe => "probe",
            Command::Evaluate => "evaluate",
            Command::TransferGains => "transfer-gains",
            Command::Backtest => "backtest",
            Command::Report => "report",
        }
    }
}

/// Command-line overrides of the configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    /// Keep only these roster entries.
    pub models: Option<Vec<String>>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> Result<RunConfig> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(j) = self.jobs {
            cfg.jobs = Some(j);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
}

/// Files staged for one command.
struct Outputs {
    dir: PathBuf,
    staged: Vec<OutputEntry>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Outputs> {
        fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), staged: Vec::new() })
    }

    fn partial(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.partial"))
    }

    fn stage(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if let Some(parent) = self.partial(name).parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(self.partial(name), bytes)?;
        self.staged.push(OutputEntry { file: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    fn commit(self) -> Result<Vec<OutputEntry>> {
        for e in &self.staged {
            fs::rename(self.partial(&e.file), self.dir.join(&e.file))?;
        }
        Ok(self.staged)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub command: String,
    pub task: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub started: String,
    pub elapsed_ms: u128,
    pub outputs: Vec<OutputEntry>,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

/// `run_manifest.json`: the latest run of each command.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub runs: BTreeMap<String, ManifestEntry>,
}

pub const MANIFEST: &str = "run_manifest.json";
pub const CACHE_DIR: &str = "cache";
pub const RAW_CACHE: &str = "cache/raw.csv";
pub const INGEST_MANIFEST: &str = "cache/ingest.json";

fn record_manifest(out: &Path, entry: ManifestEntry) -> Result<()> {
    let path = out.join(MANIFEST);
    let mut manifest: RunManifest = match fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes)?,
        Err(_) => RunManifest::default(),
    };
    manifest.runs.insert(entry.command.clone(), entry);
    let tmp = out.join(format!("{MANIFEST}.partial"));
    fs::write(&tmp, serde_json::to_vec_pretty(&manifest)?)?;
    fs::rename(tmp, path)?;
    Ok(())
}

/// Result of one command: what was written and what went wrong along the way.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub outputs: Vec<OutputEntry>,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    /// One-line human summary.
    pub summary: String,
}

/// Runs `cmd` and records it in the run manifest.
pub fn execute(cmd: Command, cfg: &RunConfig, models: Option<&[String]>) -> Result<Report> {
    let started = chrono::Utc::now().to_rfc3339();
    let clock = Instant::now();
    fs::create_dir_all(&cfg.out)?;
    let report = match cmd {
        Command::Ingest => ingest(cfg)?,
        Command::Features => features(cfg)?,
        Command::Evaluate => cmd_evaluate(cfg, models)?,
        Command::Probe => cmd_probe(cfg, models)?,
        Command::TransferGains => cmd_transfer(cfg, models)?,
        Command::Backtest => cmd_backtest(cfg, models)?,
        Command::Report => cmd_report(cfg)?,
    };
    record_manifest(
        &cfg.out,
        ManifestEntry {
            command: cmd.as_str().into(),
            task: cfg.task.clone(),
            seed: cfg.seed,
            config: serde_json::to_value(cfg)?,
            started,
            elapsed_ms: clock.elapsed().as_millis(),
            outputs: report.outputs.clone(),
            failures: report.failures.clone(),
            warnings: report.warnings.clone(),
        },
    )?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IngestManifest {
    task: String,
    /// `path`/hash of each source file, or the generator key.
    sources: Vec<OutputEntry>,
    rows: usize,
    columns: Vec<String>,
    sha256: String,
}

fn synthetic_calendar(cfg: &RunConfig) -> Vec<NaiveDate> {
    match (cfg.data.start, cfg.data.end) {
        (None, None) => default_calendar(),
        (s, e) => {
            let cal = default_calendar();
            business_days(s.unwrap_or(cal[0]), e.unwrap_or(cal[cal.len() - 1]))
        }
    }
}

fn ingest_sources(cfg: &RunConfig) -> Result<Vec<OutputEntry>> {
    match cfg.source()? {
        TaskSource::Synthetic(id) => {
            let cal = synthetic_calendar(cfg);
            Ok(vec![OutputEntry {
                file: format!("synthetic:{id}"),
                sha256: sha256_hex(format!("{id}|{}|{}|{}", cfg.seed, cal[0], cal[cal.len() - 1]).as_bytes()),
            }])
        }
        TaskSource::Files(_) => cfg
            .data
            .files
            .iter()
            .map(|p| {
                let bytes = fs::read(p).map_err(|e| Error::Schema(format!("cannot read {}: {e}", p.display())))?;
                Ok(OutputEntry { file: p.display().to_string(), sha256: sha256_hex(&bytes) })
            })
            .collect(),
    }
}

/// Outer join of all source files' columns.
fn read_sources(cfg: &RunConfig) -> Result<Frame> {
    match cfg.source()? {
        TaskSource::Synthetic(id) => generate(&id, &synthetic_calendar(cfg), cfg.seed),
        TaskSource::Files(_) => {
            let mut series = Vec::new();
            let mut seen = std::collections::HashSet::new();
            for path in &cfg.data.files {
                let frame = Frame::read_csv_path(path)
                    .map_err(|e| Error::Schema(format!("{}: {}", path.display(), e)))?;
                for name in frame.column_names() {
                    if !seen.insert(name.to_string()) {
                        return Err(Error::Schema(format!("column `{name}` appears in more than one file")));
                    }
                    series.push(frame.series(name)?);
                }
            }
            Frame::from_series(&series)
        }
    }
}

/// Writes the canonical raw cache unless an identical one is present.
pub fn ingest(cfg: &RunConfig) -> Result<Report> {
    let sources = ingest_sources(cfg)?;
    let manifest_path = cfg.out.join(INGEST_MANIFEST);
    if let Ok(bytes) = fs::read(&manifest_path) {
        if let (Ok(old), Ok(cache)) =
            (serde_json::from_slice::<IngestManifest>(&bytes), fs::read(cfg.out.join(RAW_CACHE)))
        {
            if old.task == cfg.task && old.sources == sources && old.sha256 == sha256_hex(&cache) {
                return Ok(Report {
                    summary: format!("cache up to date ({} rows, sha256 {})", old.rows, &old.sha256[..12]),
                    ..Report::default()
                });
            }
        }
    }
    let frame = read_sources(cfg)?;
    let spec = TaskSpec::builtin(cfg.source()?.id())?;
    if let Some(missing) = spec.required_columns().into_iter().find(|c| !frame.has_column(c)) {
        return Err(Error::Schema(format!("task `{}` needs column `{missing}`, absent from the data", spec.id)));
    }
    let csv = frame.to_csv_string();
    let manifest = IngestManifest {
        task: cfg.task.clone(),
        sources,
        rows: frame.len(),
        columns: frame.column_names().iter().map(|s| s.to_string()).collect(),
        sha256: sha256_hex(csv.as_bytes()),
    };
    let mut out = Outputs::new(&cfg.out)?;
    out.stage(RAW_CACHE, csv.as_bytes())?;
    out.stage(INGEST_MANIFEST, &serde_json::to_vec_pretty(&manifest)?)?;
    let outputs = out.commit()?;
    Ok(Report {
        summary: format!("ingested {} rows x {} columns", manifest.rows, manifest.columns.len()),
        outputs,
        ..Report::default()
    })
}

/// Raw frame from the cache, ingesting first when needed.
pub fn load_raw(cfg: &RunConfig) -> Result<Frame> {
    let report = ingest(cfg)?;
    if !report.outputs.is_empty() {
        info!("{}", report.summary);
    }
    Frame::read_csv_path(cfg.out.join(RAW_CACHE))
}

pub fn load_task(cfg: &RunConfig) -> Result<(Frame, TaskData)> {
    let raw = load_raw(cfg)?;
    let spec = TaskSpec::builtin(cfg.source()?.id())?;
    let task = TaskData::build(&spec, &raw)?;
    Ok((raw, task))
}

fn warning_lines(w: &[Warning]) -> Vec<String> {
    w.iter()
        .map(|w| {
            let date = w.date.map(|d| format!(" {d}")).unwrap_or_default();
            format!("{:?} {}{}: {}", w.code, w.series, date, w.detail)
        })
        .collect()
}

#[derive(Serialize)]
struct StationarityReport<'a> {
    adf: &'a [(String, crate::features::AdfResult)],
    cointegration: &'a Option<crate::targets::CointResult>,
    warnings: &'a [Warning],
}

fn features(cfg: &RunConfig) -> Result<Report> {
    let (_, task) = load_task(cfg)?;
    let mut out = Outputs::new(&cfg.out)?;
    out.stage("features.csv", task.frame.to_csv_string().as_bytes())?;
    out.stage("targets.csv", task.targets.to_csv_string().as_bytes())?;
    let st = StationarityReport { adf: &task.adf, cointegration: &task.coint, warnings: &task.warnings };
    out.stage("stationarity.json", &serde_json::to_vec_pretty(&st)?)?;
    Ok(Report {
        summary: format!("{} rows, {} columns, {} origins", task.frame.len(), task.frame.width(), task.n_origins()),
        outputs: out.commit()?,
        warnings: warning_lines(&task.warnings),
        ..Report::default()
    })
}

/// Configured roster (or the task default), restricted to `models`.
pub fn roster(cfg: &RunConfig, spec: &TaskSpec, models: Option<&[String]>) -> Result<Vec<ModelSpec>> {
    let all = if cfg.models.is_empty() { default_roster(spec) } else { cfg.models.clone() };
    let Some(keep) = models else { return Ok(all) };
    if let Some(unknown) = keep.iter().find(|k| !all.iter().any(|m| &m.name() == *k)) {
        return Err(Error::Config(format!("--models names unknown roster entry `{unknown}`")));
    }
    Ok(all.into_iter().filter(|m| keep.contains(&m.name())).collect())
}

fn find_model(cfg: &RunConfig, spec: &TaskSpec, name: &str) -> Result<ModelSpec> {
    let mut all = roster(cfg, spec, None)?;
    all.extend(default_roster(spec));
    all.into_iter()
        .find(|m| m.name() == name)
        .ok_or_else(|| Error::Config(format!("no roster entry named `{name}`")))
}

fn jobs(cfg: &RunConfig) -> usize {
    cfg.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn context_pad(cfg: &RunConfig, roster: &[ModelSpec]) -> usize {
    roster
        .iter()
        .filter_map(|m| match m {
            ModelSpec::Adapter { context_len: Some(c), .. } => Some(context_padding(*c, cfg.evaluate.context_pad_cutoff)),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

fn failure_lines(records: &[crate::eval::EvalRecord]) -> Vec<String> {
    let mut lines: Vec<String> = records
        .iter()
        .filter(|r| r.failed)
        .map(|r| format!("{} {} {}: {}", r.window_date, r.model, r.variant, r.error))
        .collect();
    lines.dedup();
    lines
}

fn run_evaluation(cfg: &RunConfig, task: &TaskData, roster: &[ModelSpec]) -> Result<Vec<crate::eval::EvalRecord>> {
    let e = &cfg.evaluate;
    let plans =
        plan_rolling_windows(task.frame.dates(), e.k_years, e.step_months, e.test_years, context_pad(cfg, roster))?;
    info!("evaluating {} models on {} windows", roster.len(), plans.len());
    evaluate(&plans, roster, task, cfg.seed, jobs(cfg))
}

fn cmd_evaluate(cfg: &RunConfig, models: Option<&[String]>) -> Result<Report> {
    let (_, task) = load_task(cfg)?;
    let roster = roster(cfg, &task.spec, models)?;
    let records = run_evaluation(cfg, &task, &roster)?;
    let mut out = Outputs::new(&cfg.out)?;
    out.stage("eval_records.csv", records_to_csv(&records)?.as_bytes())?;
    Ok(Report {
        summary: format!("{} evaluation records", records.len()),
        outputs: out.commit()?,
        failures: failure_lines(&records),
        warnings: warning_lines(&task.warnings),
    })
}

fn run_probe(cfg: &RunConfig, task: &TaskData, roster: &[ModelSpec]) -> Result<crate::eval::ProbeCurve> {
    let p = &cfg.probe;
    sample_efficiency_probe(task, roster, p.reference, p.n_min..=p.n_max, cfg.seed, jobs(cfg))
}

fn probe_failures(curve: &crate::eval::ProbeCurve) -> Vec<String> {
    let mut lines: Vec<String> = curve
        .rows
        .iter()
        .filter(|r| r.failed)
        .map(|r| format!("n={} {} {}: {}", r.n_years, r.model, r.variant, r.error))
        .collect();
    lines.dedup();
    lines
}

fn cmd_probe(cfg: &RunConfig, models: Option<&[String]>) -> Result<Report> {
    let (_, task) = load_task(cfg)?;
    let roster = roster(cfg, &task.spec, models)?;
    let curve = run_probe(cfg, &task, &roster)?;
    let mut out = Outputs::new(&cfg.out)?;
    out.stage("probe_curve.csv", probe_to_csv(&curve)?.as_bytes())?;
    let mut warnings = warning_lines(&task.warnings);
    warnings.extend(warning_lines(&curve.warnings));
    Ok(Report {
        summary: format!("{} probe rows, {} elbows", curve.rows.len(), curve.elbows.len()),
        outputs: out.commit()?,
        failures: probe_failures(&curve),
        warnings,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferReport {
    pub model: String,
    pub horizon: usize,
    pub errors: TransferErrors,
    pub gains: TransferGains,
}

fn cmd_transfer(cfg: &RunConfig, models: Option<&[String]>) -> Result<Report> {
    let t = cfg.transfer.as_ref().ok_or_else(|| Error::Config("transfer-gains needs a [transfer] section".into()))?;
    let (_, task) = load_task(cfg)?;
    if models.is_some_and(|m| !m.contains(&t.model)) {
        return Err(Error::Config(format!("--models excludes the transfer model `{}`", t.model)));
    }
    let model = find_model(cfg, &task.spec, &t.model)?;
    let horizon = t.horizon.unwrap_or(task.spec.headline[0]);
    let roster = [model];
    let records = run_evaluation(cfg, &task, &roster)?;
    let curve = run_probe(cfg, &task, &roster)?;
    let mut out = Outputs::new(&cfg.out)?;
    out.stage("transfer_records.csv", records_to_csv(&records)?.as_bytes())?;
    out.stage("transfer_probe.csv", probe_to_csv(&curve)?.as_bytes())?;
    let errors = errors_from_runs(&records, &curve.rows, &t.model, horizon)?;
    let gains = transfer_gains(&errors, t.threshold)?;
    let report = TransferReport { model: t.model.clone(), horizon, errors, gains };
    out.stage("transfer_gains.json", &serde_json::to_vec_pretty(&report)?)?;
    let mut failures = failure_lines(&records);
    failures.extend(probe_failures(&curve));
    Ok(Report {
        summary: format!(
            "ΔZS {:.4}, ΔFT full {:.4}, ΔFT limited {:.4}",
            gains.zero_shot.delta, gains.fine_tuned_full.delta, gains.fine_tuned_limited.delta
        ),
        outputs: out.commit()?,
        failures,
        warnings: warning_lines(&curve.warnings),
    })
}

/// Signals trimmed to their common first date.
fn common_start(signals: Vec<SignalSeries>) -> Vec<SignalSeries> {
    let start = signals.iter().filter_map(|s| s.dates.first().copied()).max();
    signals
        .into_iter()
        .map(|s| {
            let k = start.map_or(0, |d| s.dates.partition_point(|x| *x < d));
            SignalSeries { name: s.name, dates: s.dates[k..].to_vec(), positions: s.positions[k..].to_vec() }
        })
        .collect()
}

fn cmd_backtest(cfg: &RunConfig, models: Option<&[String]>) -> Result<Report> {
    let b = cfg.backtest.as_ref().ok_or_else(|| Error::Config("backtest needs a [backtest] section".into()))?;
    let (raw, task) = load_task(cfg)?;
    if models.is_some_and(|m| !m.contains(&b.model)) {
        return Err(Error::Config(format!("--models excludes the backtest model `{}`", b.model)));
    }
    let model = find_model(cfg, &task.spec, &b.model)?;
    let variant = model.variants()[0];
    let horizon = b.horizon.unwrap_or(task.spec.headline[0]);
    let asset = raw
        .series(&b.asset)
        .map_err(|_| Error::Config(format!("asset column `{}` is not in the data", b.asset)))?;
    let returns = pct_change(&asset)?;
    let plans = plan_rolling_windows(task.frame.dates(), b.k_years, b.step_months, cfg.evaluate.test_years, 0)?;
    let forecasts = walk_forward_forecasts(&plans, &model, variant, &task, horizon, cfg.seed)?;
    let signals = common_start(vec![
        signal_rolling_mean(&forecasts, b.window, b.threshold)?,
        signal_ewma(&forecasts, b.span, b.threshold)?,
        signal_vote(&forecasts, b.window, b.quorum)?,
    ]);
    let curves = signals.iter().map(|s| run_backtest(s, &returns)).collect::<Result<Vec<_>>>()?;
    let mut out = Outputs::new(&cfg.out)?;
    out.stage("equity_curves.csv", curves_to_csv(&curves)?.as_bytes())?;
    let mut metrics: Vec<PerfMetrics> = vec![benchmark_metrics(&curves[0], "buy_and_hold")?];
    for c in &curves {
        metrics.push(perf_metrics(c)?);
    }
    out.stage("backtest_metrics.json", &serde_json::to_vec_pretty(&metrics)?)?;
    Ok(Report {
        summary: format!("{} strategies over {} days", curves.len(), curves[0].dates.len()),
        outputs: out.commit()?,
        ..Report::default()
    })
}

fn read_rows(path: &Path) -> Result<Option<Vec<BTreeMap<String, String>>>> {
    if !path.is_file() {
        return Ok(None);
    }
    let mut rdr = csv::Reader::from_path(path)?;
    Ok(Some(rdr.deserialize().collect::<std::result::Result<Vec<_>, _>>()?))
}

/// Mean of a numeric column over rows grouped by `keys`, skipping blanks.
fn group_mean(rows: &[BTreeMap<String, String>], keys: &[&str], value: &str) -> Vec<(Vec<String>, f64, usize)> {
    let mut acc: BTreeMap<Vec<String>, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let Some(v) = r.get(value).and_then(|v| v.parse::<f64>().ok()) else { continue };
        let key = keys.iter().map(|k| r.get(*k).cloned().unwrap_or_default()).collect();
        let e = acc.entry(key).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64, n)).collect()
}

fn cmd_report(cfg: &RunConfig) -> Result<Report> {
    let mut md = format!("# foretest report: {}\n\nseed {}\n", cfg.task, cfg.seed);
    if let Some(rows) = read_rows(&cfg.out.join("eval_records.csv"))? {
        let headline: Vec<_> = rows.iter().filter(|r| r.get("headline").map(String::as_str) == Some("true")).cloned().collect();
        md.push_str("\n## Rolling evaluation (headline horizons)\n\n| model | variant | horizon | mean MSE | mean improvement vs naive | windows |\n|---|---|---|---|---|---|\n");
        let mse = group_mean(&headline, &["model", "variant", "horizon"], "mse");
        let imp = group_mean(&headline, &["model", "variant", "horizon"], "rel_improvement");
        for (k, m, n) in &mse {
            let i = imp.iter().find(|(k2, ..)| k2 == k).map(|(_, v, _)| format!("{:.2}%", 100.0 * v)).unwrap_or_default();
            md.push_str(&format!("| {} | {} | {} | {m:.6e} | {i} | {n} |\n", k[0], k[1], k[2]));
        }
    }
    if let Some(rows) = read_rows(&cfg.out.join("probe_curve.csv"))? {
        md.push_str("\n## Sample-efficiency probe elbows\n\n| model | variant | horizon | elbow (years) |\n|---|---|---|---|\n");
        let mut groups: BTreeMap<(String, String, String), String> = BTreeMap::new();
        for r in &rows {
            let key = (r["model"].clone(), r["variant"].clone(), r["horizon"].clone());
            let e = groups.entry(key).or_insert_with(|| "none".into());
            if r["elbow"] == "true" {
                *e = r["n_years"].clone();
            }
        }
        for ((m, v, h), e) in groups {
            md.push_str(&format!("| {m} | {v} | {h} | {e} |\n"));
        }
    }
    if let Ok(bytes) = fs::read(cfg.out.join("transfer_gains.json")) {
        let t: TransferReport = serde_json::from_slice(&bytes)?;
        md.push_str(&format!(
            "\n## Transfer gains: {} at h={}\n\n| regime | Δ | transfers (Δ > {}) |\n|---|---|---|\n",
            t.model, t.horizon, t.gains.threshold
        ));
        for (name, g) in [
            ("zero-shot", t.gains.zero_shot),
            ("fine-tuned, full data", t.gains.fine_tuned_full),
            ("fine-tuned, limited data", t.gains.fine_tuned_limited),
        ] {
            md.push_str(&format!("| {name} | {:.2}% | {} |\n", 100.0 * g.delta, g.transfers));
        }
    }
    if let Ok(bytes) = fs::read(cfg.out.join("backtest_metrics.json")) {
        let rows: Vec<serde_json::Value> = serde_json::from_slice(&bytes)?;
        md.push_str("\n## Backtest\n\n| Strategy | CAGR | Sharpe | MaxDD | IR |\n|---|---|---|---|---|\n");
        let pct = |v: &serde_json::Value| v.as_f64().map(|x| format!("{:.2}%", 100.0 * x)).unwrap_or("n/a".into());
        let num = |v: &serde_json::Value| v.as_f64().map(|x| format!("{x:.2}")).unwrap_or("n/a".into());
        for r in &rows {
            md.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                r["Strategy"].as_str().unwrap_or(""),
                pct(&r["CAGR"]),
                num(&r["Sharpe"]),
                pct(&r["MaxDD"]),
                num(&r["IR"])
            ));
        }
    }
    let mut out = Outputs::new(&cfg.out)?;
    out.stage("report.md", md.as_bytes())?;
    Ok(Report { summary: "report.md written".into(), outputs: out.commit()?, ..Report::default() })
}
