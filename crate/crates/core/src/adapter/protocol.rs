//! Wire types of the adapter protocol: one JSON envelope per line.
//!
//! Every floating-point number travels as a decimal string with 17
//! significant digits, which round-trips any finite `f64` exactly.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::FrameView;

pub const PROTOCOL_VERSION: u32 = 1;

/// Environment variable carrying the protocol version to the child.
pub const VERSION_ENV: &str = "FORETEST_PROTOCOL_VERSION";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Handshake,
    Fit,
    Predict,
    Shutdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub op: Op,
    #[serde(default)]
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    ModelError,
    Timeout,
    VersionMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: u64,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl Response {
    pub fn ok(id: u64, payload: serde_json::Value) -> Self {
        Response { id, ok: true, payload: Some(payload), error: None }
    }

    pub fn err(id: u64, code: ErrorCode, message: impl Into<String>) -> Self {
        Response { id, ok: false, payload: None, error: Some(ErrorBody { code, message: message.into() }) }
    }
}

pub fn encode_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn decode_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Protocol(format!("`{s}` is not a decimal number")))
}

pub fn encode_all(v: &[f64]) -> Vec<String> {
    v.iter().copied().map(encode_f64).collect()
}

pub fn decode_all(v: &[String]) -> Result<Vec<f64>> {
    v.iter().map(|s| decode_f64(s)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandshakeRequest {
    pub protocol_version: u32,
    pub task: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capabilities {
    pub name: String,
    pub protocol_version: u32,
    pub max_context: usize,
    /// Horizons the model can produce natively; empty means any.
    #[serde(default)]
    pub horizons: Vec<usize>,
    pub needs_fit: bool,
    #[serde(default)]
    pub supports_observable: bool,
    #[serde(default)]
    pub supports_zero_shot: bool,
}

/// Column-major frame encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireFrame {
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<String>,
    pub values: Vec<Vec<String>>,
}

impl WireFrame {
    pub fn encode(view: &FrameView<'_>) -> Self {
        WireFrame {
            dates: view.dates().to_vec(),
            columns: view.column_names().iter().map(|s| s.to_string()).collect(),
            values: (0..view.width()).map(|j| encode_all(view.column_at(j))).collect(),
        }
    }

    pub fn decode(&self) -> Result<(Vec<NaiveDate>, Vec<(String, Vec<f64>)>)> {
        if self.columns.len() != self.values.len() {
            return Err(Error::Protocol("frame has mismatched column names and values".into()));
        }
        let cols = self
            .columns
            .iter()
            .zip(&self.values)
            .map(|(n, v)| {
                if v.len() != self.dates.len() {
                    return Err(Error::Protocol(format!("column `{n}` length differs from the date index")));
                }
                Ok((n.clone(), decode_all(v)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((self.dates.clone(), cols))
    }

    pub fn column(&self, name: &str) -> Option<&[String]> {
        self.columns.iter().position(|c| c == name).map(|i| self.values[i].as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireTargets {
    pub origins: Vec<NaiveDate>,
    pub horizon: usize,
    /// One row of `horizon` values per origin.
    pub values: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRequest {
    pub variant: String,
    pub seed: u64,
    pub frame: WireFrame,
    pub observable: Vec<String>,
    pub targets: WireTargets,
    #[serde(default)]
    pub hyperparams: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResponse {
    #[serde(default)]
    pub loss_trace: Vec<String>,
    #[serde(default)]
    pub detail: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    pub variant: String,
    pub origin: NaiveDate,
    pub horizon: usize,
    pub context: WireFrame,
    #[serde(default)]
    pub future_observable: Option<WireFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub values: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn envelope_shapes() {
        let r = Response::err(4, ErrorCode::BadRequest, "nope");
        let line = serde_json::to_string(&r).unwrap();
        assert_eq!(line, r#"{"id":4,"ok":false,"error":{"code":"bad_request","message":"nope"}}"#);
        let req: Request = serde_json::from_str(r#"{"id":1,"op":"handshake","payload":{}}"#).unwrap();
        assert_eq!(req.op, Op::Handshake);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(encode_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(decode_f64(&encode_f64(f64::MIN_POSITIVE)).unwrap(), f64::MIN_POSITIVE);
        assert!(decode_f64("abc").is_err());
    }

    proptest! {
        #[test]
        fn finite_doubles_round_trip(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            prop_assert_eq!(decode_f64(&encode_f64(v)).unwrap().to_bits(), v.to_bits());
        }
    }
}
