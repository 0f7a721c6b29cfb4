//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Tolerances, draw counts and runtime limits are
//! pinned below.

use std::time::{Duration, Instant};

use chrono::{Datelike, Months, NaiveDate, Weekday};
use foretest::backtest::{
    benchmark_metrics, cagr, max_drawdown, perf_metrics, run_backtest, signal_vote, Position, SignalSeries,
};
use foretest::config::RunConfig;
use foretest::eval::{
    evaluate, evaluate_window, gain, plan_probe, plan_rolling_windows, EvalRecord, ModelSpec,
};
use foretest::features::volatility::{garman_klass_vol, OhlcColumns};
use foretest::features::{adf_test, AdfRegression, StationarityGate};
use foretest::forecast::ecm_fit;
use foretest::run::{execute, Command};
use foretest::series::calendar::business_days;
use foretest::series::{Frame, Series};
use foretest::synthetic::{default_calendar, generate};
use foretest::targets::{cumulative_pct_change_target, engle_granger};
use foretest::task::{TaskData, TaskSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

// Transfer gain
const GAIN_TOL: f64 = 1e-15;
const GAIN_SCALES: [f64; 3] = [1e-6, 1.0, 1e6];
// Telescoping
const TELESCOPE_SERIES: usize = 1_000;
const TELESCOPE_LEN: usize = 260;
const TELESCOPE_H: usize = 21;
const TELESCOPE_TOL: f64 = 1e-12;
// ECM
const ECM_EXACT_TOL: f64 = 1e-10;
const ECM_PHI: f64 = 0.9;
const ECM_N: usize = 2_000;
const ECM_DRAWS: usize = 200;
const ECM_BAND: (f64, f64) = (0.88, 0.92);
// ADF
const ADF_DRAWS: usize = 1_000;
const ADF_N: usize = 500;
const ADF_SIZE_BAND: (f64, f64) = (0.03, 0.07);
const ADF_MIN_POWER: f64 = 0.95;
// Engle-Granger
const EG_DRAWS: usize = 200;
const EG_N: usize = 500;
const EG_MIN_DETECT: f64 = 0.95;
const EG_MAX_FALSE: f64 = 0.10;
// Garman-Klass
const GK_SIGMA: f64 = 0.10;
const GK_DAYS: usize = 10_000;
const GK_STEPS_PER_DAY: usize = 390;
const GK_REL_TOL: f64 = 0.10;
// Backtest
const BT_FIXTURES: usize = 100;
const MAXDD_TOL: f64 = 1e-15;
const CAGR_TOL: f64 = 1e-12;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn rng(stream: u64, draw: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream.wrapping_mul(1_000_003).wrapping_add(draw as u64))
}

fn dates(n: usize) -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(1990, 1, 1).unwrap();
    let mut d = business_days(start, start + chrono::Days::new(2 * n as u64 + 7));
    d.truncate(n);
    d
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn transfer_gain_arithmetic() -> Outcome {
    let g = gain(1.0, 0.7, 0.1).map_err(|e| e.to_string())?;
    if (g.delta - 0.30).abs() > GAIN_TOL || !g.transfers {
        return Err(format!("gain(1.0, 0.7) = {:?}", g));
    }
    for c in GAIN_SCALES {
        let s = gain(c * 1.0, c * 0.7, 0.1).map_err(|e| e.to_string())?;
        if (s.delta - g.delta).abs() > GAIN_TOL * g.delta || s.transfers != g.transfers {
            return Err(format!("scale {c}: delta {} vs {}", s.delta, g.delta));
        }
    }
    let at = gain(10.0, 9.0, 0.1).map_err(|e| e.to_string())?;
    let above = gain(10.0, 8.99, 0.1).map_err(|e| e.to_string())?;
    if at.delta != 0.1 || at.transfers || !above.transfers {
        return Err(format!("threshold: Δ=0.1 -> {}, Δ=0.101 -> {}", at.transfers, above.transfers));
    }
    if gain(0.0, 0.7, 0.1).is_ok() || gain(1.0, -0.1, 0.1).is_ok() {
        return Err("non-positive errors accepted".into());
    }
    Ok(format!("Δ = {:.17}, scale-free over {GAIN_SCALES:?}, verdict strict at 0.1", g.delta))
}

fn target_telescoping() -> Outcome {
    let worst = (0..TELESCOPE_SERIES)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(1, k);
            let mut levels = vec![r.gen_range(1.0..1000.0)];
            for _ in 1..TELESCOPE_LEN {
                let last = *levels.last().unwrap();
                levels.push(last * (0.02 * normal(&mut r)).exp());
            }
            let m = cumulative_pct_change_target(&Series::new("r", dates(TELESCOPE_LEN), levels.clone()), TELESCOPE_H)
                .expect("positive levels");
            let mut worst = 0.0f64;
            for t in 0..m.len() {
                for h in 1..=TELESCOPE_H {
                    worst = worst.max((m.get(t, h) - (levels[t + h] / levels[t] - 1.0)).abs());
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    ensure(worst <= TELESCOPE_TOL, format!("max |error| {worst:.2e} over {TELESCOPE_SERIES} series, H={TELESCOPE_H}"))
}

fn ecm_is_ar1() -> Outcome {
    let z: Vec<f64> = (0..200).map(|t| 5.0 * 0.7f64.powi(t)).collect();
    let exact = ecm_fit(&z, false).map_err(|e| e.to_string())?;
    if (exact.phi - 0.7).abs() > ECM_EXACT_TOL {
        return Err(format!("noiseless φ̂ = {}", exact.phi));
    }
    let phis: Vec<f64> = (0..ECM_DRAWS)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(2, k);
            let mut z = vec![0.0; ECM_N];
            for t in 1..ECM_N {
                z[t] = ECM_PHI * z[t - 1] + normal(&mut r);
            }
            ecm_fit(&z, true).map(|m| m.phi)
        })
        .collect::<foretest::Result<_>>()
        .map_err(|e| e.to_string())?;
    let mean = phis.iter().sum::<f64>() / phis.len() as f64;
    ensure(
        mean >= ECM_BAND.0 && mean <= ECM_BAND.1,
        format!("noiseless |φ̂−φ| = {:.1e}; mean φ̂ = {mean:.4} over {ECM_DRAWS} draws", (exact.phi - 0.7).abs()),
    )
}

fn rejection_rate(stream: u64, phi: f64) -> Result<f64, String> {
    let rejects = (0..ADF_DRAWS)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(stream, k);
            let mut x = vec![0.0; ADF_N];
            for t in 1..ADF_N {
                x[t] = phi * x[t - 1] + normal(&mut r);
            }
            adf_test(&x, None, AdfRegression::Constant).map(|a| a.reject_5pct as usize)
        })
        .collect::<foretest::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    Ok(rejects.iter().sum::<usize>() as f64 / ADF_DRAWS as f64)
}

fn adf_calibration() -> Outcome {
    let size = rejection_rate(0, 1.0)?;
    let power = rejection_rate(4, 0.5)?;
    ensure(
        size >= ADF_SIZE_BAND.0 && size <= ADF_SIZE_BAND.1 && power >= ADF_MIN_POWER,
        format!("random-walk rejection {:.1}%, AR(0.5) power {:.1}% (N={ADF_N}, {ADF_DRAWS} draws)", 100.0 * size, 100.0 * power),
    )
}

fn engle_granger_detection() -> Outcome {
    let run = |stream: u64, cointegrated: bool| -> Result<f64, String> {
        let hits = (0..EG_DRAWS)
            .into_par_iter()
            .map(|k| {
                let mut r = rng(stream, k);
                let (mut x, mut y) = (vec![0.0; EG_N], vec![0.0; EG_N]);
                let mut u = 0.0;
                for t in 1..EG_N {
                    x[t] = x[t - 1] + normal(&mut r);
                    if cointegrated {
                        u = 0.5 * u + normal(&mut r);
                        y[t] = 1.0 + 2.0 * x[t] + u;
                    } else {
                        y[t] = y[t - 1] + normal(&mut r);
                    }
                }
                engle_granger(&x, &y).map(|c| c.cointegrated_5pct as usize)
            })
            .collect::<foretest::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        Ok(hits.iter().sum::<usize>() as f64 / EG_DRAWS as f64)
    };
    let detect = run(5, true)?;
    let false_pos = run(6, false)?;
    ensure(
        detect >= EG_MIN_DETECT && false_pos <= EG_MAX_FALSE,
        format!("detected {:.1}% of cointegrated pairs, {:.1}% of independent walks", 100.0 * detect, 100.0 * false_pos),
    )
}

fn garman_klass_consistency() -> Outcome {
    let dt = 1.0 / (252.0 * GK_STEPS_PER_DAY as f64);
    let step_sd = GK_SIGMA * dt.sqrt();
    let drift = -0.5 * GK_SIGMA * GK_SIGMA * dt;
    let bars: Vec<[f64; 4]> = (0..GK_DAYS)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(7, k);
            let open = 100.0;
            let (mut p, mut hi, mut lo) = (open, open, open);
            for _ in 0..GK_STEPS_PER_DAY {
                p *= (drift + step_sd * normal(&mut r)).exp();
                hi = hi.max(p);
                lo = lo.min(p);
            }
            [open, hi, lo, p]
        })
        .collect();
    let col = |j: usize| bars.iter().map(|b| b[j]).collect::<Vec<f64>>();
    let names = OhlcColumns::default();
    let frame = Frame::new(
        dates(GK_DAYS),
        vec![("open".into(), col(0)), ("high".into(), col(1)), ("low".into(), col(2)), ("close".into(), col(3))],
    )
    .map_err(|e| e.to_string())?;
    let vol = garman_klass_vol(&frame, &names, GK_DAYS).map_err(|e| e.to_string())?.values[0];
    let rel = (vol * vol - GK_SIGMA * GK_SIGMA).abs() / (GK_SIGMA * GK_SIGMA);

    let flat = Frame::new(dates(30), ["open", "high", "low", "close"].iter().map(|c| (c.to_string(), vec![42.0; 30])).collect())
        .map_err(|e| e.to_string())?;
    let flat_vol = garman_klass_vol(&flat, &names, 10).map_err(|e| e.to_string())?;
    let flat_zero = flat_vol.values.iter().all(|v| *v == 0.0);
    ensure(
        rel <= GK_REL_TOL && flat_zero,
        format!("annualised vol {vol:.4} vs {GK_SIGMA} (variance error {:.2}%), flat bars exactly 0: {flat_zero}", 100.0 * rel),
    )
}

fn max_drawdown_pairs(curve: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..curve.len() {
        for j in i..curve.len() {
            worst = worst.max((curve[i] - curve[j]) / curve[i]);
        }
    }
    worst
}

fn vote_at(values: &[f64]) -> Result<Position, String> {
    let s = Series::new("fc", dates(values.len()), values.to_vec());
    let sig = signal_vote(&s, 21, 14).map_err(|e| e.to_string())?;
    Ok(sig.positions[0])
}

fn backtest_oracles() -> Outcome {
    let mut r = rng(8, 0);
    let mut worst_dd = 0.0f64;
    for _ in 0..BT_FIXTURES {
        let n = r.gen_range(2..400);
        let returns: Vec<f64> = (0..n).map(|_| 0.02 * normal(&mut r)).collect();
        let asset = Series::new("asset", dates(n), returns);
        let long = SignalSeries::constant("long", asset.dates.clone(), Position::Long);
        let c = run_backtest(&long, &asset).map_err(|e| e.to_string())?;
        if c.strategy.iter().zip(&c.benchmark).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return Err("all-long curve differs from buy-and-hold".into());
        }
        if n > 3 {
            let m = perf_metrics(&c).map_err(|e| e.to_string())?;
            let b = benchmark_metrics(&c, "long").map_err(|e| e.to_string())?;
            if m != b {
                return Err(format!("all-long metrics {m:?} vs buy-and-hold {b:?}"));
            }
        }
        worst_dd = worst_dd.max((max_drawdown(&c.strategy) - max_drawdown_pairs(&c.strategy)).abs());
    }
    if worst_dd > MAXDD_TOL {
        return Err(format!("streaming MaxDD differs from pairwise scan by {worst_dd:.2e}"));
    }
    let doubling: Vec<f64> = (0..=504).map(|t| 2f64.powf(t as f64 / 504.0)).collect();
    let g = cagr(&doubling).map_err(|e| e.to_string())?;
    if (g - (2f64.sqrt() - 1.0)).abs() > CAGR_TOL {
        return Err(format!("CAGR of 504-day doubling = {g}"));
    }
    let window = |down: usize, up: usize| {
        let mut v = vec![-0.01; down];
        v.extend(vec![0.01; up]);
        v.extend(vec![0.0; 21 - down - up]);
        v
    };
    let cases = [
        (window(14, 7), Position::Long),
        (window(13, 8), Position::Flat),
        (window(13, 0), Position::Flat),
        (window(0, 14), Position::Short),
        (window(7, 14), Position::Short),
    ];
    for (v, want) in &cases {
        let got = vote_at(v)?;
        if got != *want {
            return Err(format!("vote on {v:?}: {got:?}, expected {want:?}"));
        }
    }
    Ok(format!(
        "{BT_FIXTURES} fixtures: all-long bitwise, MaxDD gap {worst_dd:.1e}; CAGR {g:.15}; {} quorum cases",
        cases.len()
    ))
}

const NATIVE: fn() -> Vec<ModelSpec> = || {
    vec![
        ModelSpec::Naive,
        ModelSpec::NaiveZero,
        ModelSpec::NaiveLast,
        ModelSpec::Linear { horizons: None },
        ModelSpec::Ridge { lambda: 1.0, horizons: None },
        ModelSpec::Var { p: None, max_p: 5, intercept: true, columns: None },
        ModelSpec::Ecm { intercept: true },
    ]
};

fn no_look_ahead() -> Outcome {
    let roster = NATIVE();
    let mut checked = 0usize;
    for id in ["bond_yield", "fx_vol", "equity_spread", "ar1"] {
        let mut spec = TaskSpec::builtin(id).map_err(|e| e.to_string())?;
        spec.gate = StationarityGate::Warn;
        let raw = generate(id, &default_calendar(), 21).map_err(|e| e.to_string())?;
        let full = TaskData::build(&spec, &raw).map_err(|e| e.to_string())?;
        let plans = plan_rolling_windows(full.frame.dates(), 8, 6, 2, 0).map_err(|e| e.to_string())?;
        let reference = evaluate(&plans, &roster, &full, 0, rayon::current_num_threads()).map_err(|e| e.to_string())?;
        let diffs: Vec<String> = plans
            .par_iter()
            .map(|plan| -> Result<Option<String>, String> {
                let last = *raw.dates().iter().take_while(|d| **d < plan.test.end).last().unwrap();
                let cut = TaskData::build(&spec, &raw.truncate_after(last)).map_err(|e| e.to_string())?;
                let mut got = evaluate_window(plan, &roster, &cut, 0).map_err(|e| e.to_string())?;
                foretest::eval::sort_records(&mut got);
                let want: Vec<&EvalRecord> = reference.iter().filter(|r| r.window_date == plan.eval_date).collect();
                let same = got.len() == want.len() && got.iter().zip(&want).all(|(a, b)| a == *b);
                Ok((!same).then(|| format!("{id} window {}", plan.eval_date)))
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect();
        if !diffs.is_empty() {
            return Err(format!("records changed after truncation: {}", diffs.join(", ")));
        }
        checked += plans.len();
    }
    Ok(format!("{checked} windows on 4 synthetic tasks, {} native models, records identical", roster.len()))
}

fn next_business_day(mut d: NaiveDate) -> NaiveDate {
    while matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
        d = d.succ_opt().unwrap();
    }
    d
}

fn schedule_oracle() -> Outcome {
    let cal = default_calendar();
    let (first, last) = (cal[0], *cal.last().unwrap());
    if (first, last) != (ymd(2005, 1, 3), ymd(2025, 1, 22)) {
        return Err(format!("calendar {first}..{last}"));
    }
    for k in 2..=14u32 {
        let plans = plan_rolling_windows(&cal, k, 6, 2, 0).map_err(|e| e.to_string())?;
        let mut expected = Vec::new();
        for i in 0u32.. {
            let eval = next_business_day(first + Months::new(12 * k + 6 * i));
            let end = next_business_day(eval + Months::new(24));
            if end > last {
                break;
            }
            expected.push((eval, eval - Months::new(12 * k), end));
        }
        let got: Vec<_> = plans.iter().map(|p| (p.eval_date, p.train.start, p.test.end)).collect();
        if got != expected {
            return Err(format!("k={k}: {} plans vs {} expected", got.len(), expected.len()));
        }
    }
    let k8 = plan_rolling_windows(&cal, 8, 6, 2, 0).map_err(|e| e.to_string())?;
    if k8[0].eval_date != ymd(2013, 1, 3) || k8.len() != 21 {
        return Err(format!("k=8 starts {} with {} windows", k8[0].eval_date, k8.len()));
    }
    let reference = ymd(2021, 1, 22);
    let (probe, warnings) = plan_probe(&cal, reference, 2..=14).map_err(|e| e.to_string())?;
    let ns: Vec<u32> = probe.iter().map(|w| w.n_years).collect();
    let ok = ns == (2..=14).collect::<Vec<_>>()
        && warnings.is_empty()
        && probe.iter().all(|w| {
            w.train.start == reference - Months::new(12 * w.n_years)
                && w.train.end == reference
                && w.test.start == reference
                && w.test.end > last
        });
    ensure(ok, format!("k=2..14 rolling plans match enumeration; k=8 first {}, {} windows; probe n=2..14", k8[0].eval_date, k8.len()))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0usize;
    for id in ["bond_yield", "fx_vol", "equity_spread", "ar1"] {
        let run = |tag: &str| -> Result<std::path::PathBuf, String> {
            let out = dir.path().join(format!("{id}-{tag}"));
            let text = format!(
                "task = \"synthetic:{id}\"\nseed = 5\nout = \"{}\"\n[probe]\nn_max = 6\n",
                out.display()
            );
            let cfg = RunConfig::from_toml(&text).map_err(|e| e.to_string())?;
            for cmd in [Command::Features, Command::Evaluate, Command::Probe] {
                execute(cmd, &cfg, None).map_err(|e| e.to_string())?;
            }
            Ok(out)
        };
        let (a, b) = (run("a")?, run("b")?);
        for f in ["features.csv", "targets.csv", "eval_records.csv", "probe_curve.csv", "cache/raw.csv"] {
            let (x, y) = (std::fs::read(a.join(f)).map_err(|e| e.to_string())?, std::fs::read(b.join(f)).map_err(|e| e.to_string())?);
            if x != y {
                return Err(format!("{id}: {f} differs between runs"));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} CSV files byte-identical across two runs on 4 synthetic tasks"))
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { name: "transfer-gain arithmetic", limit: Duration::from_secs(1), run: transfer_gain_arithmetic },
        Criterion { name: "target telescoping identity", limit: Duration::from_secs(10), run: target_telescoping },
        Criterion { name: "ECM equals AR(1)", limit: Duration::from_secs(30), run: ecm_is_ar1 },
        Criterion { name: "ADF calibration", limit: Duration::from_secs(120), run: adf_calibration },
        Criterion { name: "Engle-Granger detection", limit: Duration::from_secs(120), run: engle_granger_detection },
        Criterion { name: "Garman-Klass consistency", limit: Duration::from_secs(30), run: garman_klass_consistency },
        Criterion { name: "backtest oracles", limit: Duration::from_secs(30), run: backtest_oracles },
        Criterion { name: "no look-ahead", limit: Duration::from_secs(120), run: no_look_ahead },
        Criterion { name: "probe and rolling schedule", limit: Duration::from_secs(10), run: schedule_oracle },
        Criterion { name: "determinism", limit: Duration::from_secs(300), run: determinism },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.iter().any(|f| c.name.contains(f.as_str()))) {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if took <= c.limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {:?} limit", c.limit)),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {:<28} {:>8.2}s  {detail}", c.name, took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
