//! Walk-forward evaluation of multivariate financial forecasters.
//!
//! The crate covers the full pipeline: CSV ingestion and alignment
//! ([`series`]), stationarity-gated feature recipes ([`features`]), forecast
//! targets ([`targets`]), native baselines ([`forecast`]), external models
//! over a line-delimited JSON protocol ([`adapter`]), the rolling and
//! sample-efficiency evaluation protocols ([`eval`]) and a signal backtester
//! ([`backtest`]). The `foretest` binary wires these together from a TOML run
//! configuration.

pub mod adapter;
pub mod backtest;
pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod forecast;
pub mod linalg;
pub mod run;
pub mod series;
pub mod synthetic;
pub mod targets;
pub mod task;

pub use error::{Error, Result, Warning, WarningCode};
