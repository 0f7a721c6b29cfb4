//! External forecasters attached over newline-delimited JSON on a child
//! process's standard input and output.

mod client;
pub mod protocol;
pub mod reference;

pub use client::{AdapterForecaster, AdapterProcess, AdapterSpec};
pub use protocol::{Capabilities, ErrorCode, PROTOCOL_VERSION, VERSION_ENV};
