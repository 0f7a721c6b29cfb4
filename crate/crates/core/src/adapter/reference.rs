//! Reference adapter: data-independent models that speak the protocol, used
//! to check the boundary end to end.

use std::io::{BufRead, Write};

use chrono::NaiveDate;

use super::protocol::*;
use crate::forecast::TARGET_COLUMN;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceModel {
    /// Repeats the last target value.
    Echo,
    /// Forecasts zero.
    Zeros,
    /// Never answers predict requests.
    Hang,
}

impl std::str::FromStr for ReferenceModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "echo" => Ok(ReferenceModel::Echo),
            "zeros" => Ok(ReferenceModel::Zeros),
            "hang" => Ok(ReferenceModel::Hang),
            other => Err(format!("unknown reference model `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceAdapter {
    pub model: ReferenceModel,
    /// Exit abruptly when asked to predict at this origin.
    pub crash_on: Option<NaiveDate>,
    /// Protocol version found in the environment.
    pub env_version: Option<String>,
}

/// What the serve loop should do after a request.
enum Flow {
    Continue,
    Stop,
    Crash,
}

impl ReferenceAdapter {
    fn name(&self) -> &'static str {
        match self.model {
            ReferenceModel::Echo => "echo",
            ReferenceModel::Zeros => "zeros",
            ReferenceModel::Hang => "hang",
        }
    }

    fn handle(&self, line: &str) -> (Option<Response>, Flow) {
        let req: Request = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(serde_json::Value::as_u64))
                    .unwrap_or(0);
                return (Some(Response::err(id, ErrorCode::BadRequest, format!("malformed request: {e}"))), Flow::Continue);
            }
        };
        let id = req.id;
        match req.op {
            Op::Handshake => {
                let expected = PROTOCOL_VERSION.to_string();
                if self.env_version.as_deref() != Some(expected.as_str()) {
                    let msg = format!(
                        "adapter speaks {PROTOCOL_VERSION}, environment declares {}",
                        self.env_version.as_deref().unwrap_or("nothing")
                    );
                    return (Some(Response::err(id, ErrorCode::VersionMismatch, msg)), Flow::Continue);
                }
                match serde_json::from_value::<HandshakeRequest>(req.payload) {
                    Ok(h) if h.protocol_version != PROTOCOL_VERSION => {
                        let msg = format!("adapter speaks {PROTOCOL_VERSION}, harness speaks {}", h.protocol_version);
                        (Some(Response::err(id, ErrorCode::VersionMismatch, msg)), Flow::Continue)
                    }
                    Ok(_) => {
                        let caps = Capabilities {
                            name: self.name().into(),
                            protocol_version: PROTOCOL_VERSION,
                            max_context: 4096,
                            horizons: Vec::new(),
                            needs_fit: false,
                            supports_observable: false,
                            supports_zero_shot: true,
                        };
                        (Some(Response::ok(id, serde_json::to_value(caps).expect("serialisable"))), Flow::Continue)
                    }
                    Err(e) => (Some(Response::err(id, ErrorCode::BadRequest, e.to_string())), Flow::Continue),
                }
            }
            Op::Fit => match serde_json::from_value::<FitRequest>(req.payload) {
                Ok(_) => {
                    let ack = FitResponse { loss_trace: Vec::new(), detail: serde_json::Value::Null };
                    (Some(Response::ok(id, serde_json::to_value(ack).expect("serialisable"))), Flow::Continue)
                }
                Err(e) => (Some(Response::err(id, ErrorCode::BadRequest, e.to_string())), Flow::Continue),
            },
            Op::Predict => {
                let p = match serde_json::from_value::<PredictRequest>(req.payload) {
                    Ok(p) => p,
                    Err(e) => return (Some(Response::err(id, ErrorCode::BadRequest, e.to_string())), Flow::Continue),
                };
                if self.crash_on == Some(p.origin) {
                    return (None, Flow::Crash);
                }
                let values = match self.model {
                    ReferenceModel::Hang => {
                        std::thread::sleep(std::time::Duration::from_secs(3600));
                        return (None, Flow::Stop);
                    }
                    ReferenceModel::Zeros => vec![encode_f64(0.0); p.horizon],
                    ReferenceModel::Echo => match p.context.column(TARGET_COLUMN).and_then(|c| c.last()) {
                        // the decimal string is passed through untouched
                        Some(last) => vec![last.clone(); p.horizon],
                        None => {
                            let msg = format!("context has no `{TARGET_COLUMN}` values");
                            return (Some(Response::err(id, ErrorCode::BadRequest, msg)), Flow::Continue);
                        }
                    },
                };
                let resp = PredictResponse { values };
                (Some(Response::ok(id, serde_json::to_value(resp).expect("serialisable"))), Flow::Continue)
            }
            Op::Shutdown => (Some(Response::ok(id, serde_json::json!({}))), Flow::Stop),
        }
    }

    /// Serves requests until shutdown or end of input. Returns the process
    /// exit code.
    pub fn serve<R: BufRead, W: Write>(&self, input: R, mut output: W) -> i32 {
        for line in input.lines() {
            let Ok(line) = line else { return 1 };
            if line.trim().is_empty() {
                continue;
            }
            let (resp, flow) = self.handle(&line);
            if let Some(r) = resp {
                let text = serde_json::to_string(&r).expect("serialisable");
                if writeln!(output, "{text}").and_then(|_| output.flush()).is_err() {
                    return 1;
                }
            }
            match flow {
                Flow::Continue => {}
                Flow::Stop => return 0,
                Flow::Crash => return 101,
            }
        }
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(adapter: &ReferenceAdapter, input: &str) -> Vec<Response> {
        let mut out = Vec::new();
        adapter.serve(input.as_bytes(), &mut out);
        String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
    }

    fn echo() -> ReferenceAdapter {
        ReferenceAdapter { model: ReferenceModel::Echo, crash_on: None, env_version: Some("1".into()) }
    }

    #[test]
    fn handshake_and_unknown_op() {
        let r = run(
            &echo(),
            "{\"id\":1,\"op\":\"handshake\",\"payload\":{\"protocol_version\":1,\"task\":\"t\"}}\n{\"id\":2,\"op\":\"dance\"}\n",
        );
        assert!(r[0].ok);
        assert_eq!(r[0].payload.as_ref().unwrap()["name"], "echo");
        assert_eq!(r[0].payload.as_ref().unwrap()["needs_fit"], false);
        assert_eq!(r[1].id, 2);
        assert_eq!(r[1].error.as_ref().unwrap().code, ErrorCode::BadRequest);
    }

    #[test]
    fn version_mismatch_names_both_versions() {
        let a = ReferenceAdapter { env_version: Some("7".into()), ..echo() };
        let r = run(&a, "{\"id\":1,\"op\":\"handshake\",\"payload\":{\"protocol_version\":1,\"task\":\"t\"}}\n");
        let e = r[0].error.as_ref().unwrap();
        assert_eq!(e.code, ErrorCode::VersionMismatch);
        assert!(e.message.contains('7') && e.message.contains('1'));
    }

    #[test]
    fn malformed_fit_is_bad_request() {
        let r = run(&echo(), "{\"id\":3,\"op\":\"fit\",\"payload\":{\"x\":1}}\n");
        assert_eq!(r[0].error.as_ref().unwrap().code, ErrorCode::BadRequest);
    }
}
