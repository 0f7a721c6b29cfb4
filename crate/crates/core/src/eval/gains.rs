//! Relative error reduction of pretrained over untrained initialisation.

use serde::{Deserialize, Serialize};

use super::harness::EvalRecord;
use super::probe::ProbeRow;
use super::roster::Variant;
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.1;
/// Probe training lengths below this many years count as limited data.
pub const LIMITED_YEARS: u32 = 10;

/// Test errors of the same architecture under each initialisation and regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferErrors {
    pub untrained_zs: f64,
    pub pretrained_zs: f64,
    pub untrained_ft_full: f64,
    pub pretrained_ft_full: f64,
    pub untrained_ft_limited: f64,
    pub pretrained_ft_limited: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gain {
    pub delta: f64,
    /// `delta > threshold`.
    pub transfers: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferGains {
    pub threshold: f64,
    pub zero_shot: Gain,
    pub fine_tuned_full: Gain,
    pub fine_tuned_limited: Gain,
}

/// `(untrained − pretrained) / untrained` with its verdict.
pub fn gain(untrained: f64, pretrained: f64, threshold: f64) -> Result<Gain> {
    for (name, v) in [("untrained", untrained), ("pretrained", pretrained)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} error must be positive and finite, got {v}")));
        }
    }
    let delta = (untrained - pretrained) / untrained;
    Ok(Gain { delta, transfers: delta > threshold })
}

pub fn transfer_gains(e: &TransferErrors, threshold: f64) -> Result<TransferGains> {
    Ok(TransferGains {
        threshold,
        zero_shot: gain(e.untrained_zs, e.pretrained_zs, threshold)?,
        fine_tuned_full: gain(e.untrained_ft_full, e.pretrained_ft_full, threshold)?,
        fine_tuned_limited: gain(e.untrained_ft_limited, e.pretrained_ft_limited, threshold)?,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Collects the six errors for `model` at `horizon`: zero-shot and full-data
/// fine-tuned errors average the rolling-window records, limited-data errors
/// average the probe rows with fewer than [`LIMITED_YEARS`] training years.
pub fn errors_from_runs(records: &[EvalRecord], probe: &[ProbeRow], model: &str, horizon: usize) -> Result<TransferErrors> {
    let from_records = |v: Variant| {
        mean(
            records
                .iter()
                .filter(|r| r.model == model && r.variant == v && r.horizon == horizon && !r.failed)
                .filter_map(|r| r.mse),
        )
        .ok_or_else(|| Error::Config(format!("no {v} records for `{model}` at horizon {horizon}")))
    };
    let from_probe = |v: Variant| {
        mean(
            probe
                .iter()
                .filter(|r| r.model == model && r.variant == v && r.horizon == horizon && r.n_years < LIMITED_YEARS)
                .filter_map(|r| r.mse),
        )
        .ok_or_else(|| Error::Config(format!("no limited-data {v} probe rows for `{model}` at horizon {horizon}")))
    };
    Ok(TransferErrors {
        untrained_zs: from_records(Variant::UntrainedZs)?,
        pretrained_zs: from_records(Variant::PretrainedZs)?,
        untrained_ft_full: from_records(Variant::UntrainedFt)?,
        pretrained_ft_full: from_records(Variant::PretrainedFt)?,
        untrained_ft_limited: from_probe(Variant::UntrainedFt)?,
        pretrained_ft_limited: from_probe(Variant::PretrainedFt)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_threshold() {
        let g = gain(1.0, 0.7, DEFAULT_THRESHOLD).unwrap();
        assert!((g.delta - 0.3).abs() < 1e-15);
        assert!(g.transfers);
        let eq = gain(2.0, 2.0, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(eq.delta, 0.0);
        assert!(!eq.transfers);
        assert!(!gain(1.0, 0.9, 0.1).unwrap().transfers);
        assert!(matches!(gain(0.0, 1.0, 0.1), Err(Error::Domain(_))));
        assert!(matches!(gain(1.0, -1.0, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn limited_data_ratio() {
        let g = gain(1.0, 0.4910, DEFAULT_THRESHOLD).unwrap();
        assert!((100.0 * g.delta - 50.90).abs() < 1e-9);
    }
}
