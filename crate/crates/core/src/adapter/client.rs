//! Child-process side of the harness: spawning an adapter, serialising
//! requests and enforcing per-request timeouts.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::protocol::*;
use crate::error::{Error, Result};
use crate::forecast::{Context, FitReport, ForecastSet, Forecaster, ForecasterMeta, TrainSet};

fn default_timeout() -> u64 {
    600
}

/// How to launch an external model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterSpec {
    pub name: String,
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Context rows sent with each predict request (capped by the adapter's
    /// declared maximum).
    #[serde(default)]
    pub context_len: Option<usize>,
    #[serde(default)]
    pub hyperparams: serde_json::Value,
}

/// A running adapter process with strictly serialised requests.
pub struct AdapterProcess {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    next_id: u64,
    transcript: Vec<String>,
}

impl AdapterProcess {
    pub fn spawn(spec: &AdapterSpec) -> Result<Self> {
        let mut child = Command::new(&spec.command)
            .args(&spec.args)
            .env(VERSION_ENV, PROTOCOL_VERSION.to_string())
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Adapter(format!("cannot start `{}`: {e}", spec.command)))?;
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(AdapterProcess {
            stdin: child.stdin.take(),
            child,
            lines: rx,
            timeout: Duration::from_secs(spec.timeout_secs),
            next_id: 1,
            transcript: Vec::new(),
        })
    }

    pub fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }

    /// Every line written and read so far, in order.
    pub fn transcript(&self) -> &[String] {
        &self.transcript
    }

    /// Sends one request and waits for its response payload.
    pub fn call(&mut self, op: Op, payload: serde_json::Value) -> Result<serde_json::Value> {
        let id = self.next_id;
        self.next_id += 1;
        let line = serde_json::to_string(&Request { id, op, payload })?;
        let stdin = self.stdin.as_mut().ok_or_else(|| Error::Adapter("adapter stdin is closed".into()))?;
        writeln!(stdin, "{line}")
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::Adapter(format!("adapter stopped accepting requests: {e}")))?;
        self.transcript.push(line);

        let reply = match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(l)) => l,
            Ok(Err(e)) => return Err(Error::Adapter(format!("reading adapter output failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                self.kill();
                return Err(Error::Adapter(format!("timeout: no response to `{op:?}` within {:?}", self.timeout)));
            }
            Err(RecvTimeoutError::Disconnected) => {
                let status = self.child.wait().map(|s| s.to_string()).unwrap_or_else(|e| e.to_string());
                return Err(Error::Adapter(format!("adapter exited during `{op:?}` ({status})")));
            }
        };
        self.transcript.push(reply.clone());
        let resp: Response = serde_json::from_str(&reply)
            .map_err(|e| Error::Protocol(format!("malformed response envelope: {e}")))?;
        if resp.id != id {
            return Err(Error::Protocol(format!("response id {} does not match request id {id}", resp.id)));
        }
        match (resp.ok, resp.payload, resp.error) {
            (true, Some(p), _) => Ok(p),
            (true, None, _) => Ok(serde_json::Value::Null),
            (false, _, Some(e)) => Err(Error::Adapter(format!("{}: {}", code_name(e.code), e.message))),
            (false, _, None) => Err(Error::Protocol("error response without an error body".into())),
        }
    }

    pub fn handshake(&mut self, task: &str) -> Result<Capabilities> {
        let req = HandshakeRequest { protocol_version: PROTOCOL_VERSION, task: task.into() };
        let caps: Capabilities = serde_json::from_value(self.call(Op::Handshake, serde_json::to_value(req)?)?)
            .map_err(|e| Error::Protocol(format!("bad handshake payload: {e}")))?;
        if caps.protocol_version != PROTOCOL_VERSION {
            return Err(Error::Adapter(format!(
                "version_mismatch: harness speaks {PROTOCOL_VERSION}, adapter speaks {}",
                caps.protocol_version
            )));
        }
        Ok(caps)
    }

    pub fn shutdown(&mut self) -> Result<()> {
        let r = self.call(Op::Shutdown, serde_json::json!({})).map(|_| ());
        self.stdin.take();
        let _ = self.child.wait();
        r
    }

    fn kill(&mut self) {
        self.stdin.take();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for AdapterProcess {
    fn drop(&mut self) {
        if matches!(self.child.try_wait(), Ok(None)) {
            self.kill();
        }
    }
}

fn code_name(c: ErrorCode) -> &'static str {
    match c {
        ErrorCode::BadRequest => "bad_request",
        ErrorCode::ModelError => "model_error",
        ErrorCode::Timeout => "timeout",
        ErrorCode::VersionMismatch => "version_mismatch",
    }
}

/// An external model behind the forecaster contract. `variant` is passed
/// through so one adapter can serve pretrained and untrained initialisations.
pub struct AdapterForecaster {
    spec: AdapterSpec,
    variant: String,
    zero_shot: bool,
    seed: u64,
    process: AdapterProcess,
    caps: Capabilities,
    fitted: bool,
}

impl AdapterForecaster {
    pub fn connect(spec: &AdapterSpec, task: &str, variant: &str, zero_shot: bool, seed: u64) -> Result<Self> {
        let mut process = AdapterProcess::spawn(spec)?;
        let caps = process.handshake(task)?;
        if zero_shot && caps.needs_fit && !caps.supports_zero_shot {
            return Err(Error::Adapter(format!("`{}` cannot forecast without fitting", caps.name)));
        }
        Ok(AdapterForecaster {
            spec: spec.clone(),
            variant: variant.into(),
            zero_shot,
            seed,
            process,
            caps,
            fitted: false,
        })
    }

    pub fn capabilities(&self) -> &Capabilities {
        &self.caps
    }

    pub fn transcript(&self) -> &[String] {
        self.process.transcript()
    }

    fn context_len(&self) -> usize {
        self.spec.context_len.map_or(self.caps.max_context, |c| c.min(self.caps.max_context))
    }
}

impl Forecaster for AdapterForecaster {
    fn meta(&self) -> ForecasterMeta {
        ForecasterMeta {
            name: self.spec.name.clone(),
            is_sequential: true,
            needs_fit: self.caps.needs_fit && !self.zero_shot,
            trained_horizons: None,
        }
    }

    fn fit(&mut self, train: &TrainSet<'_>) -> Result<FitReport> {
        let rows = train.target_rows.clone();
        let targets = WireTargets {
            origins: train.targets.origins()[rows.clone()].to_vec(),
            horizon: train.horizon(),
            values: rows.map(|i| encode_all(train.targets.row(i))).collect(),
        };
        let req = FitRequest {
            variant: self.variant.clone(),
            seed: self.seed,
            frame: WireFrame::encode(&train.frame),
            observable: train.observable.to_vec(),
            targets,
            hyperparams: self.spec.hyperparams.clone(),
        };
        let resp: FitResponse = serde_json::from_value(self.process.call(Op::Fit, serde_json::to_value(req)?)?)
            .map_err(|e| Error::Protocol(format!("bad fit payload: {e}")))?;
        self.fitted = true;
        Ok(FitReport { loss_trace: decode_all(&resp.loss_trace)?, detail: resp.detail })
    }

    fn predict(&mut self, ctx: &Context<'_>, horizon: usize) -> Result<ForecastSet> {
        if self.meta().needs_fit && !self.fitted {
            return Err(crate::forecast::not_fitted(&self.spec.name));
        }
        let origin = ctx.origin()?;
        let context = ctx.history.tail(self.context_len());
        let future_observable = if self.caps.supports_observable { ctx.future_observable.as_ref() } else { None };
        let req = PredictRequest {
            variant: self.variant.clone(),
            origin,
            horizon,
            context: WireFrame::encode(&context),
            future_observable: future_observable.map(WireFrame::encode),
        };
        let resp: PredictResponse = serde_json::from_value(self.process.call(Op::Predict, serde_json::to_value(req)?)?)
            .map_err(|e| Error::Protocol(format!("bad predict payload: {e}")))?;
        if resp.values.len() != horizon {
            return Err(Error::Protocol(format!("expected {horizon} forecast values, got {}", resp.values.len())));
        }
        let values = decode_all(&resp.values)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Adapter(format!("`{}` returned a non-finite forecast", self.spec.name)));
        }
        ForecastSet::new(origin, self.spec.name.clone(), values)
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({ "model": self.spec.name, "variant": self.variant, "capabilities": self.caps })
    }
}

impl Drop for AdapterForecaster {
    fn drop(&mut self) {
        let _ = self.process.shutdown();
    }
}
