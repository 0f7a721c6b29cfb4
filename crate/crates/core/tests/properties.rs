use chrono::NaiveDate;
use foretest::adapter::protocol::{decode_f64, encode_f64};
use foretest::backtest::{max_drawdown, run_backtest, Position, SignalSeries};
use foretest::eval::gain;
use foretest::forecast::{ecm_fit, ecm_forecast, ridge_fit};
use foretest::series::calendar::business_days;
use foretest::series::transforms::rolling_zscore;
use foretest::series::Series;
use foretest::targets::cumulative_pct_change_target;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn dates(n: usize) -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(2010, 1, 4).unwrap();
    let mut d = business_days(start, start + chrono::Days::new(2 * n as u64 + 7));
    d.truncate(n);
    d
}

fn series(values: Vec<f64>) -> Series {
    Series::new("x", dates(values.len()), values)
}

/// Peak-to-trough drawdown by checking every pair `i ≤ j`.
fn max_drawdown_exhaustive(curve: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..curve.len() {
        for j in i..curve.len() {
            if curve[i] > 0.0 {
                worst = worst.max((curve[i] - curve[j]) / curve[i]);
            }
        }
    }
    worst
}

fn flip(p: Position) -> Position {
    match p {
        Position::Long => Position::Short,
        Position::Short => Position::Long,
        Position::Flat => Position::Flat,
    }
}

fn position() -> impl Strategy<Value = Position> {
    prop_oneof![Just(Position::Short), Just(Position::Flat), Just(Position::Long)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rolling_zscore_matches_brute_force(
        x in prop::collection::vec(-100.0f64..100.0, 3..80),
        w in 2usize..12,
    ) {
        prop_assume!(w <= x.len());
        let (z, _) = rolling_zscore(&series(x.clone()), w).unwrap();
        prop_assert_eq!(z.len(), x.len() - w + 1);
        for (k, t) in (w - 1..x.len()).enumerate() {
            let win = &x[t + 1 - w..=t];
            let m = win.iter().sum::<f64>() / w as f64;
            let sd = (win.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (w as f64 - 1.0)).sqrt();
            let scale = win.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if sd <= 1e-9 * scale.max(1.0) {
                continue;
            }
            let want = (x[t] - m) / sd;
            prop_assert!((z.values[k] - want).abs() <= 1e-9 * want.abs().max(1.0), "t={} {} vs {}", t, z.values[k], want);
        }
    }

    #[test]
    fn constant_windows_give_zero_scores(c in -1e6f64..1e6, n in 5usize..40) {
        let (z, warnings) = rolling_zscore(&series(vec![c; n]), 5).unwrap();
        prop_assert!(z.values.iter().all(|v| *v == 0.0));
        prop_assert_eq!(warnings.len(), n - 4);
    }

    #[test]
    fn cumulative_target_telescopes(
        steps in prop::collection::vec(-0.05f64..0.05, 10..120),
        h in 1usize..10,
    ) {
        let mut levels = vec![100.0];
        for s in &steps {
            let last = *levels.last().unwrap();
            levels.push(last * (1.0 + s));
        }
        prop_assume!(h < levels.len());
        let m = cumulative_pct_change_target(&series(levels.clone()), h).unwrap();
        prop_assert_eq!(m.len(), levels.len() - h);
        for t in 0..m.len() {
            for k in 1..=h {
                let direct = levels[t + k] / levels[t] - 1.0;
                prop_assert!((m.get(t, k) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn streaming_drawdown_equals_pairwise_scan(
        r in prop::collection::vec(-0.2f64..0.2, 1..150),
    ) {
        let curve: Vec<f64> = r.iter().scan(1.0, |c, x| { *c *= 1.0 + x; Some(*c) }).collect();
        let dd = max_drawdown(&curve);
        prop_assert!((0.0..1.0).contains(&dd));
        prop_assert!((dd - max_drawdown_exhaustive(&curve)).abs() <= 1e-15);
    }

    #[test]
    fn negating_signal_and_returns_keeps_strategy_returns(
        pos in prop::collection::vec(position(), 2..60),
        seed_r in prop::collection::vec(-0.05f64..0.05, 61),
    ) {
        let n = pos.len();
        let d = dates(n + 1);
        let r = Series::new("asset", d.clone(), seed_r[..n + 1].to_vec());
        let neg_r = r.map(|v| -v);
        let sig = SignalSeries { name: "s".into(), dates: d[..n].to_vec(), positions: pos.clone() };
        let neg = SignalSeries { name: "s".into(), dates: d[..n].to_vec(), positions: pos.iter().copied().map(flip).collect() };
        let a = run_backtest(&sig, &r).unwrap();
        let b = run_backtest(&neg, &neg_r).unwrap();
        prop_assert_eq!(a.strategy_returns, b.strategy_returns);
    }

    #[test]
    fn all_long_is_buy_and_hold(r in prop::collection::vec(-0.05f64..0.05, 2..200)) {
        let s = series(r.clone());
        let sig = SignalSeries::constant("long", s.dates.clone(), Position::Long);
        let c = run_backtest(&sig, &s).unwrap();
        prop_assert_eq!(&c.strategy, &c.benchmark);
        prop_assert_eq!(&c.strategy_returns, &c.benchmark_returns);
    }

    #[test]
    fn ridge_solution_satisfies_normal_equations(
        rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 8..40),
        beta in prop::collection::vec(-2.0f64..2.0, 3),
        lambda in 0.01f64..10.0,
    ) {
        let n = rows.len();
        let x = DMatrix::from_fn(n, 3, |i, j| rows[i][j]);
        let y: Vec<f64> = rows.iter().enumerate()
            .map(|(i, r)| 0.5 + r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + ((i * 7 % 5) as f64 - 2.0) * 0.1)
            .collect();
        let m = ridge_fit(&x, &y, lambda).unwrap();
        let resid: Vec<f64> = (0..n).map(|i| y[i] - m.predict(&rows[i])).collect();
        let scale = 1.0 + y.iter().map(|v| v.abs()).sum::<f64>();
        // d/db: Σ e = 0; d/dβ_j: Σ e·x_j = λ β_j.
        prop_assert!(resid.iter().sum::<f64>().abs() < 1e-9 * scale);
        for j in 0..3 {
            let g: f64 = (0..n).map(|i| resid[i] * rows[i][j]).sum();
            prop_assert!((g - lambda * m.coef[j]).abs() < 1e-8 * scale, "j={} {} vs {}", j, g, lambda * m.coef[j]);
        }
    }

    #[test]
    fn noiseless_ar1_is_recovered(phi in -0.95f64..0.95, z0 in 1.0f64..10.0) {
        prop_assume!(phi.abs() > 0.05);
        let z: Vec<f64> = (0..60).map(|t| z0 * phi.powi(t)).collect();
        let m = ecm_fit(&z, false).unwrap();
        prop_assert!((m.phi - phi).abs() < 1e-10);
        let f = ecm_forecast(&m, 2.0, 5);
        for (k, v) in f.iter().enumerate() {
            prop_assert!((v - 2.0 * m.phi.powi(k as i32 + 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn transfer_gain_is_scale_free(u in 1e-3f64..1e3, ratio in 0.01f64..3.0, c in prop_oneof![Just(1e-6), Just(1.0), Just(1e6)]) {
        let p = u * ratio;
        let base = gain(u, p, 0.1).unwrap();
        let scaled = gain(c * u, c * p, 0.1).unwrap();
        prop_assert!((base.delta - (1.0 - ratio)).abs() < 1e-12);
        prop_assert!((scaled.delta - base.delta).abs() <= 1e-12 * base.delta.abs().max(1.0));
        prop_assert_eq!(base.transfers, base.delta > 0.1);
    }

    #[test]
    fn wire_numbers_round_trip_bitwise(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        prop_assert_eq!(decode_f64(&encode_f64(v)).unwrap().to_bits(), v.to_bits());
    }
}
