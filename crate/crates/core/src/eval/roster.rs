//! Model roster: declarative model entries and their instantiation.

use serde::{Deserialize, Serialize};

use crate::adapter::{AdapterForecaster, AdapterSpec};
use crate::error::{Error, Result};
use crate::forecast::{EcmForecaster, Forecaster, LagSelection, NaiveForecaster, NaiveRule, ShiftedRegression, VarForecaster};
use crate::task::TaskSpec;

/// Initialisation and adaptation regime of an evaluated model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    PretrainedFt,
    UntrainedFt,
    PretrainedZs,
    UntrainedZs,
    Baseline,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::PretrainedFt => "pretrained_ft",
            Variant::UntrainedFt => "untrained_ft",
            Variant::PretrainedZs => "pretrained_zs",
            Variant::UntrainedZs => "untrained_zs",
            Variant::Baseline => "baseline",
        }
    }

    pub fn is_zero_shot(self) -> bool {
        matches!(self, Variant::PretrainedZs | Variant::UntrainedZs)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn one() -> f64 {
    1.0
}

fn max_p() -> usize {
    5
}

fn yes() -> bool {
    true
}

fn timeout() -> u64 {
    600
}

fn ft_variants() -> Vec<Variant> {
    vec![Variant::PretrainedFt]
}

/// One roster entry as written in the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// The task's own naive rule.
    Naive,
    NaiveZero,
    NaiveLast,
    /// OLS on the shifted target, one model per trained horizon.
    Linear {
        #[serde(default)]
        horizons: Option<Vec<usize>>,
    },
    Ridge {
        #[serde(default = "one")]
        lambda: f64,
        #[serde(default)]
        horizons: Option<Vec<usize>>,
    },
    Var {
        /// Fixed lag order; AIC selection up to `max_p` when absent.
        #[serde(default)]
        p: Option<usize>,
        #[serde(default = "max_p")]
        max_p: usize,
        #[serde(default = "yes")]
        intercept: bool,
        #[serde(default)]
        columns: Option<Vec<String>>,
    },
    Ecm {
        #[serde(default)]
        intercept: bool,
    },
    Adapter {
        name: String,
        command: String,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default = "timeout")]
        timeout_secs: u64,
        #[serde(default)]
        context_len: Option<usize>,
        #[serde(default)]
        hyperparams: serde_json::Value,
        #[serde(default = "ft_variants")]
        variants: Vec<Variant>,
    },
}

impl ModelSpec {
    pub fn name(&self) -> String {
        match self {
            ModelSpec::Naive => "naive".into(),
            ModelSpec::NaiveZero => "naive_zero".into(),
            ModelSpec::NaiveLast => "naive_last".into(),
            ModelSpec::Linear { .. } => "linear".into(),
            ModelSpec::Ridge { .. } => "ridge".into(),
            ModelSpec::Var { .. } => "var".into(),
            ModelSpec::Ecm { .. } => "ecm".into(),
            ModelSpec::Adapter { name, .. } => name.clone(),
        }
    }

    pub fn variants(&self) -> Vec<Variant> {
        match self {
            ModelSpec::Adapter { variants, .. } => variants.clone(),
            _ => vec![Variant::Baseline],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Ridge { lambda, .. } if !(*lambda >= 0.0) => {
                Err(Error::Config(format!("ridge lambda must be >= 0, got {lambda}")))
            }
            ModelSpec::Var { p: Some(0), .. } | ModelSpec::Var { max_p: 0, .. } => {
                Err(Error::Config("VAR lag order must be >= 1".into()))
            }
            ModelSpec::Adapter { variants, .. } if variants.is_empty() || variants.contains(&Variant::Baseline) => {
                Err(Error::Config(format!("adapter `{}` needs pretrained/untrained variants", self.name())))
            }
            _ => Ok(()),
        }
    }

    pub fn adapter_spec(&self) -> Option<AdapterSpec> {
        match self {
            ModelSpec::Adapter { name, command, args, timeout_secs, context_len, hyperparams, .. } => Some(AdapterSpec {
                name: name.clone(),
                command: command.clone(),
                args: args.clone(),
                timeout_secs: *timeout_secs,
                context_len: *context_len,
                hyperparams: hyperparams.clone(),
            }),
            _ => None,
        }
    }

    /// A fresh forecaster for one evaluation window.
    pub fn instantiate(&self, task: &TaskSpec, variant: Variant, seed: u64) -> Result<Box<dyn Forecaster>> {
        let horizons = |h: &Option<Vec<usize>>| h.clone().unwrap_or_else(|| task.headline.clone());
        Ok(match self {
            ModelSpec::Naive => Box::new(NaiveForecaster::new("naive", task.naive.clone())),
            ModelSpec::NaiveZero => Box::new(NaiveForecaster::new("naive_zero", NaiveRule::Zero)),
            ModelSpec::NaiveLast => Box::new(NaiveForecaster::new("naive_last", NaiveRule::Last)),
            ModelSpec::Linear { horizons: h } => Box::new(ShiftedRegression::new("linear", 0.0, horizons(h))?),
            ModelSpec::Ridge { lambda, horizons: h } => Box::new(ShiftedRegression::new("ridge", *lambda, horizons(h))?),
            ModelSpec::Var { p, max_p, intercept, columns } => {
                let sel = match p {
                    Some(p) => LagSelection::Fixed { p: *p },
                    None => LagSelection::Aic { max_p: *max_p },
                };
                Box::new(VarForecaster::new("var", sel, *intercept, columns.clone()))
            }
            ModelSpec::Ecm { intercept } => Box::new(EcmForecaster::new("ecm", *intercept)),
            ModelSpec::Adapter { .. } => {
                let spec = self.adapter_spec().expect("adapter entry");
                Box::new(AdapterForecaster::connect(&spec, &task.id, variant.as_str(), variant.is_zero_shot(), seed)?)
            }
        })
    }
}

/// Default native roster for a task.
pub fn default_roster(task: &TaskSpec) -> Vec<ModelSpec> {
    let mut roster = vec![
        ModelSpec::Naive,
        ModelSpec::Linear { horizons: None },
        ModelSpec::Ridge { lambda: 1.0, horizons: None },
        ModelSpec::Var { p: None, max_p: 5, intercept: true, columns: None },
    ];
    if matches!(task.target, crate::task::TargetRecipe::StandardizedSpread { .. } | crate::task::TargetRecipe::Level { .. }) {
        roster.push(ModelSpec::Ecm { intercept: false });
    }
    roster
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adapter_entry_parses_flat() {
        let text = r#"
            kind = "adapter"
            name = "ttm"
            command = "python"
            args = ["-m", "zoo", "--model", "ttm"]
            variants = ["pretrained_ft", "untrained_ft"]
        "#;
        let m: ModelSpec = toml::from_str(text).unwrap();
        assert_eq!(m.name(), "ttm");
        assert_eq!(m.variants().len(), 2);
        m.validate().unwrap();
        let bad: std::result::Result<ModelSpec, _> = toml::from_str("kind = \"ridge\"\nlambda = 1.0\nalpha = 2");
        assert!(bad.is_err());
    }
}
