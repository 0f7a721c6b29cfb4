use chrono::NaiveDate;
use foretest::eval::{
    evaluate, evaluate_window, plan_rolling_windows, records_to_csv, sample_efficiency_probe, ModelSpec, Variant,
};
use foretest::features::StationarityGate;
use foretest::synthetic::{default_calendar, generate, AR1_PHI};
use foretest::task::{TaskData, TaskSpec};

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn task(id: &str, seed: u64) -> TaskData {
    let spec = TaskSpec::builtin(id).unwrap();
    TaskData::build(&spec, &generate(id, &default_calendar(), seed).unwrap()).unwrap()
}

#[test]
fn naive_against_itself_has_zero_improvement() {
    let t = task("ar1", 3);
    let plans = plan_rolling_windows(t.frame.dates(), 8, 6, 2, 0).unwrap();
    let recs = evaluate(&plans[..3], &[ModelSpec::Naive], &t, 0, 2).unwrap();
    assert_eq!(recs.len(), 3 * t.spec.horizon);
    for r in &recs {
        assert_eq!(r.rel_improvement, Some(0.0));
        assert_eq!(r.mse, r.naive_mse);
        assert_eq!(r.variant, Variant::Baseline);
    }
}

#[test]
fn ecm_beats_naive_last_by_the_ar1_ratio() {
    // Last-value error variance is 2(1 − φ^h)σ²/(1 − φ²); the conditional
    // mean φ^h z_t leaves (1 − φ^{2h})σ²/(1 − φ²). Their ratio is (1 + φ^h)/2.
    let t = task("ar1", 17);
    let plans = plan_rolling_windows(t.frame.dates(), 8, 6, 2, 0).unwrap();
    let roster = [ModelSpec::NaiveLast, ModelSpec::Ecm { intercept: false }];
    let recs = evaluate(&plans, &roster, &t, 0, 4).unwrap();
    let h = 10;
    let mean_mse = |m: &str| {
        let v: Vec<f64> = recs.iter().filter(|r| r.model == m && r.horizon == h).map(|r| r.mse.unwrap()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let ratio = mean_mse("ecm") / mean_mse("naive_last");
    let expected = (1.0 + AR1_PHI.powi(h as i32)) / 2.0;
    assert!((ratio - expected).abs() < 0.06, "ratio {ratio}, expected {expected}");
}

#[test]
fn zero_target_with_naive_zero_scores_zero() {
    let cal = &default_calendar()[..3000];
    let mut raw = generate("ar1", cal, 1).unwrap();
    raw = foretest::series::Frame::new(raw.dates().to_vec(), vec![("z".into(), vec![0.0; cal.len()])]).unwrap();
    let mut spec = TaskSpec::builtin("ar1").unwrap();
    spec.naive = foretest::forecast::NaiveRule::Zero;
    spec.gate = StationarityGate::Warn;
    let t = TaskData::build(&spec, &raw).unwrap();
    let plans = plan_rolling_windows(t.frame.dates(), 4, 6, 2, 0).unwrap();
    let recs = evaluate_window(&plans[0], &[ModelSpec::NaiveZero], &t, 0).unwrap();
    assert!(recs.iter().all(|r| r.mse == Some(0.0)));
    assert!(recs.iter().all(|r| r.rel_improvement.is_none()));
}

#[test]
fn per_horizon_means_aggregate_consistently() {
    let t = task("ar1", 5);
    let plans = plan_rolling_windows(t.frame.dates(), 8, 6, 2, 0).unwrap();
    let recs = evaluate_window(&plans[0], &[ModelSpec::NaiveLast], &t, 0).unwrap();
    let origins = foretest::eval::test_origins(&t, &plans[0].test);
    for r in &recs {
        let sse: f64 = origins
            .clone()
            .map(|i| {
                let e = t.frame.column("target").unwrap()[i] - t.targets.get(i, r.horizon);
                e * e
            })
            .sum();
        let mse = sse / origins.len() as f64;
        assert!((r.mse.unwrap() - mse).abs() <= 1e-12 * mse.max(1.0));
    }
}

#[test]
fn failed_model_yields_failed_rows_and_run_continues() {
    let t = task("bond_yield", 2);
    let plans = plan_rolling_windows(t.frame.dates(), 8, 6, 2, 0).unwrap();
    // ECM needs a level target; the change task rejects it at fit time.
    let roster = [ModelSpec::Naive, ModelSpec::Ecm { intercept: false }];
    let recs = evaluate_window(&plans[0], &roster, &t, 0).unwrap();
    let ecm: Vec<_> = recs.iter().filter(|r| r.model == "ecm").collect();
    assert_eq!(ecm.len(), t.spec.horizon);
    assert!(ecm.iter().all(|r| r.failed && r.mse.is_none() && !r.error.is_empty()));
    assert!(recs.iter().filter(|r| r.model == "naive").all(|r| !r.failed));
}

#[test]
fn shifted_regressions_are_scored_at_trained_horizons_only() {
    let t = task("equity_spread", 4);
    let plans = plan_rolling_windows(t.frame.dates(), 8, 6, 2, 0).unwrap();
    let recs = evaluate_window(&plans[0], &[ModelSpec::Ridge { lambda: 1.0, horizons: None }], &t, 0).unwrap();
    let hs: Vec<usize> = recs.iter().map(|r| r.horizon).collect();
    assert_eq!(hs, vec![5, 10]);
    assert!(recs.iter().all(|r| r.headline && !r.failed));
}

#[test]
fn probe_cardinality_and_flat_naive_curve() {
    let t = task("ar1", 8);
    let roster = [ModelSpec::Naive, ModelSpec::Ecm { intercept: false }];
    let curve = sample_efficiency_probe(&t, &roster, ymd(2021, 1, 22), 2..=3, 0, 2).unwrap();
    assert!(curve.warnings.is_empty());
    assert_eq!(curve.rows.len(), 2 * roster.len());
    let naive: Vec<f64> = curve.rows.iter().filter(|r| r.model == "naive").map(|r| r.mse.unwrap()).collect();
    assert_eq!(naive[0], naive[1]);
    let full = sample_efficiency_probe(&t, &[ModelSpec::Naive], ymd(2021, 1, 22), 2..=14, 0, 2).unwrap();
    // 2005-01-03 start leaves room for at most 16 years before the reference.
    assert_eq!(full.rows.len(), 13);
    assert_eq!(full.elbows[0].n_years, Some(3));
}

#[test]
fn records_csv_is_reproducible() {
    let t = task("equity_spread", 9);
    let plans = plan_rolling_windows(t.frame.dates(), 8, 6, 2, 0).unwrap();
    let roster = foretest::eval::default_roster(&t.spec);
    let a = records_to_csv(&evaluate(&plans[..2], &roster, &t, 1, 1).unwrap()).unwrap();
    let b = records_to_csv(&evaluate(&plans[..2], &roster, &t, 1, 4).unwrap()).unwrap();
    assert_eq!(a, b);
}
