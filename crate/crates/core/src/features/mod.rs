//! Feature engineering: volatility estimators, technical indicators, yield
//! curve factors, the ADF stationarity test and recipe-driven construction.

pub mod adf;
pub mod pca;
mod recipe;
pub mod technical;
pub mod volatility;

pub use adf::{adf_test, AdfRegression, AdfResult, PValueBand};
pub use recipe::{build_features, FeatureRecipe, FeatureSet, FeatureSource, Observability, SeriesRef, StationarityGate};
