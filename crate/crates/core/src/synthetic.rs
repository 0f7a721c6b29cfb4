//! Seeded generators producing raw frames with the columns each built-in task
//! reads, so every pipeline runs without external data.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::series::calendar::business_days;
use crate::series::Frame;
use crate::task::{FX_OHLC, GROWTH_MACRO, SPREAD_MACRO_RAW};

/// Business days from 2005-01-03 to 2025-01-22.
pub fn default_calendar() -> Vec<NaiveDate> {
    let d = |y, m, d| NaiveDate::from_ymd_opt(y, m, d).expect("valid date");
    business_days(d(2005, 1, 3), d(2025, 1, 22))
}

struct Gen {
    rng: ChaCha8Rng,
    n: usize,
}

impl Gen {
    fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    fn noise(&mut self, sigma: f64) -> Vec<f64> {
        (0..self.n).map(|_| sigma * self.normal()).collect()
    }

    /// Stationary AR(1) started from its stationary distribution.
    fn ar1(&mut self, phi: f64, sigma: f64, mean: f64) -> Vec<f64> {
        let mut x = sigma / (1.0 - phi * phi).sqrt() * self.normal();
        (0..self.n)
            .map(|_| {
                let out = mean + x;
                x = phi * x + sigma * self.normal();
                out
            })
            .collect()
    }

    fn random_walk(&mut self, start: f64, drift: f64, sigma: f64) -> Vec<f64> {
        let mut x = start;
        (0..self.n)
            .map(|_| {
                let out = x;
                x += drift + sigma * self.normal();
                out
            })
            .collect()
    }

    fn log_ou(&mut self, level: f64, phi: f64, sigma: f64) -> Vec<f64> {
        self.ar1(phi, sigma, level.ln()).into_iter().map(f64::exp).collect()
    }

    fn gbm(&mut self, start: f64, drift: f64, sigma: f64) -> Vec<f64> {
        self.random_walk(start.ln(), drift, sigma).into_iter().map(f64::exp).collect()
    }
}

fn growth_macro(g: &mut Gen, cols: &mut Vec<(String, Vec<f64>)>) {
    for name in GROWTH_MACRO {
        cols.push((name.into(), g.ar1(0.995, 0.05, 0.0)));
    }
}

fn bond_yield(g: &mut Gen) -> Vec<(String, Vec<f64>)> {
    let mut cols = Vec::new();
    growth_macro(g, &mut cols);
    cols.push(("infl_exp_1y".into(), g.ar1(0.995, 0.03, 2.0)));
    cols.push(("infl_exp_5y".into(), g.ar1(0.995, 0.02, 2.2)));
    cols.push(("m2".into(), g.gbm(6000.0, 0.0002, 0.001)));
    cols.push(("vix".into(), g.log_ou(18.0, 0.98, 0.06)));
    cols.push(("move".into(), g.log_ou(90.0, 0.98, 0.04)));
    cols.push(("spx".into(), g.gbm(1200.0, 0.0003, 0.011)));
    let level = g.ar1(0.999, 0.012, 3.0f64.ln());
    let slope = g.ar1(0.995, 0.03, 0.0);
    let ten: Vec<f64> = level.iter().map(|l| l.exp()).collect();
    for (name, offset, loading) in [("ust_5y", 0.15, 0.4), ("ust_2y", 0.45, 1.0), ("ust_1m", 0.8, 1.3)] {
        let e = g.noise(0.01);
        cols.push((
            name.into(),
            ten.iter().zip(&slope).zip(&e).map(|((t, s), e)| t * (-offset - loading * s + e).exp()).collect(),
        ));
    }
    // 7-10y Treasury ETF: carry minus duration times the yield change
    let mut ief = vec![100.0];
    for w in ten.windows(2) {
        let r = w[0] / 100.0 / 252.0 - IEF_DURATION * (w[1] - w[0]) / 100.0;
        ief.push(ief[ief.len() - 1] * (1.0 + r));
    }
    cols.push(("ust_10y".into(), ten));
    cols.push(("ief".into(), ief));
    cols
}

/// Modified duration of the synthetic bond ETF.
pub const IEF_DURATION: f64 = 7.5;

fn fx_vol(g: &mut Gen) -> Vec<(String, Vec<f64>)> {
    let daily_vol: Vec<f64> = g.ar1(0.98, 0.1, (0.08 / 252f64.sqrt()).ln()).into_iter().map(f64::exp).collect();
    let (mut open, mut high, mut low, mut close) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut prev = 1.25f64;
    for s in &daily_vol {
        let o = prev * (0.05 * s * g.normal()).exp();
        let c = o * (s * g.normal()).exp();
        let h = o.max(c) * (0.5 * s * g.normal().abs()).exp();
        let l = o.min(c) * (-0.5 * s * g.normal().abs()).exp();
        open.push(o);
        high.push(h);
        low.push(l);
        close.push(c);
        prev = c;
    }
    let mut cols: Vec<(String, Vec<f64>)> =
        FX_OHLC.iter().map(|s| s.to_string()).zip([open, high, low, close]).collect();
    cols.push(("vix".into(), g.log_ou(18.0, 0.98, 0.06)));
    cols.push(("move".into(), g.log_ou(90.0, 0.98, 0.04)));
    for (ccy, base) in [("usd", 2.0), ("eur", 1.0)] {
        let level = g.random_walk(base, 0.0, 0.03);
        let slope = g.ar1(0.995, 0.02, 0.0);
        for (m, offset, loading) in [("3m", -0.8, -1.0), ("2y", -0.3, -0.4), ("10y", 0.0, 0.0)] {
            let e = g.noise(0.01);
            let v = level.iter().zip(&slope).zip(&e).map(|((l, s), e)| l + offset + loading * s + e).collect();
            cols.push((format!("{ccy}_{m}"), v));
        }
    }
    // about 16 scheduled policy decisions a year
    let meetings = (0..g.n).map(|_| if g.rng.gen_bool(16.0 / 252.0) { 1.0 } else { 0.0 }).collect();
    cols.push(("meetings".into(), meetings));
    cols
}

fn equity_spread(g: &mut Gen) -> Vec<(String, Vec<f64>)> {
    let mut cols = Vec::new();
    growth_macro(g, &mut cols);
    cols.push(("hh_infl_exp".into(), g.ar1(0.99, 0.05, 0.0)));
    for name in SPREAD_MACRO_RAW {
        cols.push((name.into(), g.ar1(0.97, 0.05, 0.0)));
    }
    let ewc = g.gbm(20.0, 0.0002, 0.012);
    let z = g.ar1(0.95, 0.006, 0.0);
    let ewa = ewc.iter().zip(&z).map(|(c, z)| (0.1 + c.ln() + z).exp()).collect();
    cols.push(("ewa".into(), ewa));
    cols.push(("ewc".into(), ewc));
    cols
}

/// Persistence of the `ar1` task's series.
pub const AR1_PHI: f64 = 0.9;

fn ar1(g: &mut Gen) -> Vec<(String, Vec<f64>)> {
    vec![("z".into(), g.ar1(AR1_PHI, 1.0, 0.0))]
}

/// Raw frame for a built-in task on `calendar`, reproducible from `seed`.
pub fn generate(task: &str, calendar: &[NaiveDate], seed: u64) -> Result<Frame> {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), n: calendar.len() };
    let cols = match task {
        "bond_yield" => bond_yield(&mut g),
        "fx_vol" => fx_vol(&mut g),
        "equity_spread" => equity_spread(&mut g),
        "ar1" => ar1(&mut g),
        other => return Err(Error::Config(format!("no synthetic generator for task `{other}`"))),
    };
    Frame::new(calendar.to_vec(), cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{TaskData, TaskSpec};

    #[test]
    fn same_seed_same_frame() {
        let cal = &default_calendar()[..300];
        let a = generate("fx_vol", cal, 11).unwrap();
        let b = generate("fx_vol", cal, 11).unwrap();
        let c = generate("fx_vol", cal, 12).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
        assert_ne!(a.to_csv_string(), c.to_csv_string());
    }

    #[test]
    fn every_builtin_task_builds_on_synthetic_data() {
        let cal = default_calendar();
        for id in ["bond_yield", "fx_vol", "equity_spread", "ar1"] {
            let spec = TaskSpec::builtin(id).unwrap();
            let raw = generate(id, &cal, 42).unwrap();
            let task = TaskData::build(&spec, &raw).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert_eq!(task.frame.width(), spec.features.len() + 1, "{id}");
            assert!(!task.frame.has_missing());
            assert!(task.n_origins() + spec.horizon == task.frame.len(), "{id}");
            if id == "equity_spread" {
                assert!(task.coint.as_ref().unwrap().cointegrated_5pct);
            }
        }
    }
}
