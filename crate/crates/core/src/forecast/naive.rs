use serde::{Deserialize, Serialize};

use super::{Context, FitReport, ForecastSet, Forecaster, ForecasterMeta, TrainSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonAction {
    Last,
    Zero,
}

/// Horizons `from..=to` (open-ended when `to` is absent) map to one action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleEntry {
    pub from: usize,
    #[serde(default)]
    pub to: Option<usize>,
    pub action: HorizonAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "entries", rename_all = "snake_case")]
pub enum NaiveRule {
    Zero,
    Last,
    ByHorizon(Vec<RuleEntry>),
}

impl NaiveRule {
    /// Last value up to `last_until`, zero afterwards.
    pub fn switch_to_zero_after(last_until: usize) -> Self {
        NaiveRule::ByHorizon(vec![
            RuleEntry { from: 1, to: Some(last_until), action: HorizonAction::Last },
            RuleEntry { from: last_until + 1, to: None, action: HorizonAction::Zero },
        ])
    }

    pub fn action(&self, h: usize) -> Result<HorizonAction> {
        match self {
            NaiveRule::Zero => Ok(HorizonAction::Zero),
            NaiveRule::Last => Ok(HorizonAction::Last),
            NaiveRule::ByHorizon(entries) => entries
                .iter()
                .find(|e| h >= e.from && e.to.map_or(true, |to| h <= to))
                .map(|e| e.action)
                .ok_or_else(|| Error::Config(format!("naive rule does not cover horizon {h}"))),
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        (1..=horizon).try_for_each(|h| self.action(h).map(|_| ()))
    }
}

fn last_target(ctx: &Context<'_>) -> Result<f64> {
    ctx.target()?.last().copied().ok_or_else(|| Error::Length("empty context for naive_last".into()))
}

pub fn naive_zero(ctx: &Context<'_>, horizon: usize) -> Result<ForecastSet> {
    ForecastSet::new(ctx.origin()?, "naive_zero", vec![0.0; horizon])
}

pub fn naive_last(ctx: &Context<'_>, horizon: usize) -> Result<ForecastSet> {
    let last = last_target(ctx)?;
    ForecastSet::new(ctx.origin()?, "naive_last", vec![last; horizon])
}

pub fn naive_horizon_rule(ctx: &Context<'_>, horizon: usize, rule: &NaiveRule) -> Result<ForecastSet> {
    let origin = ctx.origin()?;
    let mut values = Vec::with_capacity(horizon);
    for h in 1..=horizon {
        values.push(match rule.action(h)? {
            HorizonAction::Zero => 0.0,
            HorizonAction::Last => last_target(ctx)?,
        });
    }
    ForecastSet::new(origin, "naive", values)
}

/// Data-independent baseline following a [`NaiveRule`].
#[derive(Debug, Clone)]
pub struct NaiveForecaster {
    name: String,
    rule: NaiveRule,
}

impl NaiveForecaster {
    pub fn new(name: impl Into<String>, rule: NaiveRule) -> Self {
        NaiveForecaster { name: name.into(), rule }
    }

    pub fn rule(&self) -> &NaiveRule {
        &self.rule
    }
}

impl Forecaster for NaiveForecaster {
    fn meta(&self) -> ForecasterMeta {
        ForecasterMeta { name: self.name.clone(), is_sequential: true, needs_fit: false, trained_horizons: None }
    }

    fn fit(&mut self, _train: &TrainSet<'_>) -> Result<FitReport> {
        Ok(FitReport::default())
    }

    fn predict(&mut self, ctx: &Context<'_>, horizon: usize) -> Result<ForecastSet> {
        let mut f = naive_horizon_rule(ctx, horizon, &self.rule)?;
        f.model = self.name.clone();
        Ok(f)
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({ "model": self.name, "rule": self.rule })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::TARGET_COLUMN;
    use crate::series::calendar::business_days;
    use crate::series::Frame;
    use chrono::NaiveDate;

    fn frame(target: Vec<f64>) -> Frame {
        let start = NaiveDate::from_ymd_opt(2022, 3, 1).unwrap();
        let dates = business_days(start, start + chrono::Duration::days(60))[..target.len()].to_vec();
        Frame::new(dates, vec![(TARGET_COLUMN.into(), target)]).unwrap()
    }

    fn ctx(f: &Frame) -> Context<'_> {
        Context { history: f.view(0..f.len()), future_observable: None, observable: &[] }
    }

    #[test]
    fn zero_and_last() {
        let f = frame(vec![0.3, 1.23]);
        assert_eq!(naive_zero(&ctx(&f), 21).unwrap().values, vec![0.0; 21]);
        assert_eq!(naive_zero(&ctx(&f), 1).unwrap().values, vec![0.0]);
        assert_eq!(naive_last(&ctx(&f), 5).unwrap().values, vec![1.23; 5]);
        let empty = frame(vec![]);
        assert!(naive_last(&ctx(&empty), 5).is_err());
    }

    #[test]
    fn horizon_rule() {
        let f = frame(vec![0.1, 0.8]);
        let rule = NaiveRule::ByHorizon(vec![
            RuleEntry { from: 1, to: Some(5), action: HorizonAction::Last },
            RuleEntry { from: 10, to: None, action: HorizonAction::Zero },
        ]);
        assert_eq!(rule.action(5).unwrap(), HorizonAction::Last);
        assert_eq!(rule.action(10).unwrap(), HorizonAction::Zero);
        assert!(matches!(naive_horizon_rule(&ctx(&f), 10, &rule), Err(Error::Config(_))));
        let full = NaiveRule::switch_to_zero_after(5);
        let out = naive_horizon_rule(&ctx(&f), 10, &full).unwrap();
        assert_eq!(out.values[4], 0.8);
        assert_eq!(out.values[9], 0.0);
        let all_zero = NaiveRule::ByHorizon(vec![RuleEntry { from: 1, to: None, action: HorizonAction::Zero }]);
        assert_eq!(naive_horizon_rule(&ctx(&f), 7, &all_zero).unwrap().values, naive_zero(&ctx(&f), 7).unwrap().values);
    }
}
