use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alignment failed: {0}")]
    Alignment(String),

    #[error("column `{column}` still missing at {date} after forward fill")]
    Gap { column: String, date: NaiveDate },

    #[error("zero denominator in `{series}` at {date}")]
    Division { series: String, date: NaiveDate },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient length: {0}")]
    Length(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid data at {date}: {reason}")]
    Data { date: NaiveDate, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("features failed the 5% ADF stationarity gate: {}", .offenders.join(", "))]
    Stationarity { offenders: Vec<String> },

    #[error("empty window plan: {0}")]
    Plan(String),

    #[error("metric `{0}` is undefined (zero variance)")]
    MetricUndefined(&'static str),

    #[error("adapter error: {0}")]
    Adapter(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by user input (config, schema) rather than a run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Schema(_) | Error::Csv(_) | Error::Gap { .. } | Error::Alignment(_)
        )
    }
}

/// Non-fatal condition recorded while transforming data.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Warning {
    pub code: WarningCode,
    pub series: String,
    pub date: Option<NaiveDate>,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningCode {
    ZeroVariance,
    NotCointegrated,
    NonReversion,
    NonStationary,
    ProbeTruncated,
}

impl Warning {
    pub fn new(code: WarningCode, series: impl Into<String>, date: Option<NaiveDate>, detail: impl Into<String>) -> Self {
        Warning { code, series: series.into(), date, detail: detail.into() }
    }
}
