//! Walk-forward evaluation, the sample-efficiency probe and transfer gains.

mod gains;
mod harness;
mod plan;
mod probe;
mod roster;

pub use gains::{errors_from_runs, gain, transfer_gains, Gain, TransferErrors, TransferGains, DEFAULT_THRESHOLD, LIMITED_YEARS};
pub use harness::{evaluate, evaluate_window, expand_roster, records_to_csv, sort_records, test_origins, walk_forward_forecasts, EvalRecord, EVAL_HEADER};
pub use plan::{context_padding, plan_probe, plan_rolling_windows, ProbeWindow, Span, WindowPlan};
pub use probe::{elbow, probe_to_csv, sample_efficiency_probe, Elbow, ProbeCurve, ProbeRow, ELBOW_CUTOFF};
pub use roster::{default_roster, ModelSpec, Variant};
