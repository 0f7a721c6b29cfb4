//! C ABI over the foretest numerics.
//!
//! Every function returns an [`FtStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and read back with
//! [`ft_last_error_message`]. Frames are opaque handles released with
//! [`ft_frame_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use foretest::backtest::{cagr, information_ratio, max_drawdown, sharpe};
use foretest::eval::{gain, transfer_gains, TransferErrors};
use foretest::features::{adf_test, AdfRegression};
use foretest::features::volatility::garman_klass_variance;
use foretest::forecast::ecm_fit;
use foretest::series::calendar::business_days;
use foretest::series::{Frame, Series};
use foretest::targets::{cumulative_pct_change_target, engle_granger};
use foretest::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Length = 4,
    Singular = 5,
    MetricUndefined = 6,
    Schema = 7,
    BufferTooSmall = 8,
    Panic = 9,
    Other = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> FtStatus {
    match e {
        Error::Domain(_) | Error::Division { .. } | Error::Degenerate(_) | Error::Data { .. } => FtStatus::Domain,
        Error::Length(_) => FtStatus::Length,
        Error::Singular(_) => FtStatus::Singular,
        Error::MetricUndefined(_) => FtStatus::MetricUndefined,
        Error::Schema(_) | Error::Csv(_) | Error::Io(_) => FtStatus::Schema,
        Error::Config(_) => FtStatus::InvalidArgument,
        _ => FtStatus::Other,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (FtStatus, String)>) -> FtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FtStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FtStatus::Panic
        }
    }
}

fn core(e: Error) -> (FtStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FtStatus, String) {
    (FtStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `ptr` must be null or point to `len` readable values.
unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], (FtStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or valid for one write.
unsafe fn write<T>(ptr: *mut T, v: T, what: &str) -> Result<(), (FtStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    ptr.write(v);
    Ok(())
}

/// Dummy business-day index for array inputs.
fn indexed(name: &str, values: &[f64]) -> Series {
    let start = chrono::NaiveDate::from_ymd_opt(1990, 1, 1).expect("valid date");
    let mut dates = business_days(start, start + chrono::Days::new(values.len() as u64 * 2 + 7));
    dates.truncate(values.len());
    Series::new(name, dates, values.to_vec())
}

/// Length of the last error message on this thread, excluding the NUL.
/// Zero when the last call succeeded.
#[no_mangle]
pub extern "C" fn ft_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |s| s.as_bytes().len()))
}

/// Copies the last error message (NUL-terminated, truncated to `len`) into
/// `buf`. Returns the number of bytes written, excluding the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ft_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&b""[..], |s| s.as_bytes());
        let n = bytes.len().min(len - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Static version string.
#[no_mangle]
pub extern "C" fn ft_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Relative error reduction `(untrained − pretrained) / untrained` and its
/// verdict `delta > threshold`.
///
/// # Safety
/// Out-pointers must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ft_transfer_gain(
    untrained: f64,
    pretrained: f64,
    threshold: f64,
    out_delta: *mut f64,
    out_transfers: *mut bool,
) -> FtStatus {
    guard(|| {
        let g = gain(untrained, pretrained, threshold).map_err(core)?;
        write(out_delta, g.delta, "out_delta")?;
        write(out_transfers, g.transfers, "out_transfers")
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FtTransferErrors {
    pub untrained_zs: f64,
    pub pretrained_zs: f64,
    pub untrained_ft_full: f64,
    pub pretrained_ft_full: f64,
    pub untrained_ft_limited: f64,
    pub pretrained_ft_limited: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FtTransferGains {
    pub delta_zs: f64,
    pub delta_ft_full: f64,
    pub delta_ft_limited: f64,
    pub transfers_zs: bool,
    pub transfers_ft_full: bool,
    pub transfers_ft_limited: bool,
}

/// The three transfer gains from the six regime errors.
///
/// # Safety
/// `errors` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ft_transfer_gains(
    errors: *const FtTransferErrors,
    threshold: f64,
    out: *mut FtTransferGains,
) -> FtStatus {
    guard(|| {
        let e = errors.as_ref().ok_or_else(|| null("errors"))?;
        let g = transfer_gains(
            &TransferErrors {
                untrained_zs: e.untrained_zs,
                pretrained_zs: e.pretrained_zs,
                untrained_ft_full: e.untrained_ft_full,
                pretrained_ft_full: e.pretrained_ft_full,
                untrained_ft_limited: e.untrained_ft_limited,
                pretrained_ft_limited: e.pretrained_ft_limited,
            },
            threshold,
        )
        .map_err(core)?;
        write(
            out,
            FtTransferGains {
                delta_zs: g.zero_shot.delta,
                delta_ft_full: g.fine_tuned_full.delta,
                delta_ft_limited: g.fine_tuned_limited.delta,
                transfers_zs: g.zero_shot.transfers,
                transfers_ft_full: g.fine_tuned_full.transfers,
                transfers_ft_limited: g.fine_tuned_limited.transfers,
            },
            "out",
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtAdfRegression {
    NoConstant = 0,
    Constant = 1,
    ConstantTrend = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FtAdfResult {
    pub statistic: f64,
    pub lags: usize,
    pub nobs: usize,
    /// 1%, 5% and 10% critical values.
    pub critical_values: [f64; 3],
    pub reject_5pct: bool,
}

/// Augmented Dickey–Fuller test. `max_lag < 0` selects the Schwert maximum.
///
/// # Safety
/// `x` must hold `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_adf(
    x: *const f64,
    n: usize,
    regression: FtAdfRegression,
    max_lag: i64,
    out: *mut FtAdfResult,
) -> FtStatus {
    guard(|| {
        let x = slice(x, n, "x")?;
        let reg = match regression {
            FtAdfRegression::NoConstant => AdfRegression::NoConstant,
            FtAdfRegression::Constant => AdfRegression::Constant,
            FtAdfRegression::ConstantTrend => AdfRegression::ConstantTrend,
        };
        let lag = usize::try_from(max_lag).ok();
        let r = adf_test(x, lag, reg).map_err(core)?;
        write(
            out,
            FtAdfResult {
                statistic: r.statistic,
                lags: r.lags,
                nobs: r.nobs,
                critical_values: r.critical_values,
                reject_5pct: r.reject_5pct,
            },
            "out",
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FtCointResult {
    pub beta: f64,
    pub intercept: f64,
    pub statistic: f64,
    pub lags: usize,
    pub critical_values: [f64; 3],
    pub cointegrated_5pct: bool,
}

/// Engle–Granger test of `y = a + βx + z`.
///
/// # Safety
/// `x` and `y` must hold `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_engle_granger(x: *const f64, y: *const f64, n: usize, out: *mut FtCointResult) -> FtStatus {
    guard(|| {
        let r = engle_granger(slice(x, n, "x")?, slice(y, n, "y")?).map_err(core)?;
        write(
            out,
            FtCointResult {
                beta: r.beta,
                intercept: r.intercept,
                statistic: r.statistic,
                lags: r.lags,
                critical_values: r.critical_values,
                cointegrated_5pct: r.cointegrated_5pct,
            },
            "out",
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FtEcmModel {
    pub phi: f64,
    pub alpha: f64,
    pub intercept: f64,
    /// NaN unless `0 < phi < 1`.
    pub half_life: f64,
}

/// Error-correction (AR(1)) fit of a spread.
///
/// # Safety
/// `spread` must hold `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_ecm_fit(spread: *const f64, n: usize, intercept: bool, out: *mut FtEcmModel) -> FtStatus {
    guard(|| {
        let m = ecm_fit(slice(spread, n, "spread")?, intercept).map_err(core)?;
        write(
            out,
            FtEcmModel { phi: m.phi, alpha: m.alpha, intercept: m.intercept, half_life: m.half_life().unwrap_or(f64::NAN) },
            "out",
        )
    })
}

/// Per-bar Garman–Klass variance into `out[0..n]`.
///
/// # Safety
/// All four inputs and `out` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn ft_garman_klass_variance(
    open: *const f64,
    high: *const f64,
    low: *const f64,
    close: *const f64,
    n: usize,
    out: *mut f64,
) -> FtStatus {
    guard(|| {
        let (o, h, l, c) = (slice(open, n, "open")?, slice(high, n, "high")?, slice(low, n, "low")?, slice(close, n, "close")?);
        if n > 0 && out.is_null() {
            return Err(null("out"));
        }
        for i in 0..n {
            let valid = o[i] > 0.0 && h[i] > 0.0 && l[i] > 0.0 && c[i] > 0.0 && h[i] >= o[i].max(c[i]) && l[i] <= o[i].min(c[i]);
            if !valid {
                return Err((FtStatus::Domain, format!("invalid OHLC bar at index {i}")));
            }
            out.add(i).write(garman_klass_variance(o[i], h[i], l[i], c[i]).max(0.0));
        }
        Ok(())
    })
}

/// Cumulative percentage-change targets, row-major `(n − h) × h`:
/// `out[t·h + k − 1] = levels[t+k] / levels[t] − 1` up to rounding.
///
/// # Safety
/// `levels` must hold `n` values and `out` `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn ft_cumulative_pct_change(
    levels: *const f64,
    n: usize,
    horizon: usize,
    out: *mut f64,
    out_len: usize,
) -> FtStatus {
    guard(|| {
        let x = slice(levels, n, "levels")?;
        let m = cumulative_pct_change_target(&indexed("levels", x), horizon).map_err(core)?;
        let need = m.len() * horizon;
        if out_len < need {
            return Err((FtStatus::BufferTooSmall, format!("need {need} values, buffer holds {out_len}")));
        }
        if need > 0 && out.is_null() {
            return Err(null("out"));
        }
        for t in 0..m.len() {
            ptr::copy_nonoverlapping(m.row(t).as_ptr(), out.add(t * horizon), horizon);
        }
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtMetric {
    /// On a cumulative curve.
    Cagr = 0,
    /// On a cumulative curve.
    MaxDrawdown = 1,
    /// On daily returns.
    Sharpe = 2,
}

/// One performance metric of `x`. Zero-variance Sharpe ratios return
/// `MetricUndefined`.
///
/// # Safety
/// `x` must hold `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_metric(metric: FtMetric, x: *const f64, n: usize, out: *mut f64) -> FtStatus {
    guard(|| {
        let x = slice(x, n, "x")?;
        let v = match metric {
            FtMetric::Cagr => cagr(x).map_err(core)?,
            FtMetric::MaxDrawdown => max_drawdown(x),
            FtMetric::Sharpe => sharpe(x).map_err(core)?,
        };
        write(out, v, "out")
    })
}

/// Information ratio of `strategy` against `benchmark` daily returns.
///
/// # Safety
/// Both inputs must hold `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_information_ratio(
    strategy: *const f64,
    benchmark: *const f64,
    n: usize,
    out: *mut f64,
) -> FtStatus {
    guard(|| {
        let v = information_ratio(slice(strategy, n, "strategy")?, slice(benchmark, n, "benchmark")?).map_err(core)?;
        write(out, v, "out")
    })
}

/// Opaque date-indexed frame.
pub struct FtFrame {
    inner: Frame,
}

/// Reads a CSV with a leading `date` column.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ft_frame_read_csv(path: *const c_char, out: *mut *mut FtFrame) -> FtStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|e| (FtStatus::InvalidArgument, e.to_string()))?;
        let frame = Frame::read_csv_path(path).map_err(core)?;
        write(out, Box::into_raw(Box::new(FtFrame { inner: frame })), "out")
    })
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `frame` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_frame_rows(frame: *const FtFrame) -> usize {
    frame.as_ref().map_or(0, |f| f.inner.len())
}

/// Number of value columns, or 0 for a null handle.
///
/// # Safety
/// `frame` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_frame_columns(frame: *const FtFrame) -> usize {
    frame.as_ref().map_or(0, |f| f.inner.width())
}

/// Copies column `name` into `out` (missing cells are NaN).
///
/// # Safety
/// `frame` must be a live handle, `name` NUL-terminated, `out` valid for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ft_frame_column(frame: *const FtFrame, name: *const c_char, out: *mut f64, len: usize) -> FtStatus {
    guard(|| {
        let f = frame.as_ref().ok_or_else(|| null("frame"))?;
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|e| (FtStatus::InvalidArgument, e.to_string()))?;
        let col = f.inner.require(name).map_err(core)?;
        if len < col.len() {
            return Err((FtStatus::BufferTooSmall, format!("need {} values, buffer holds {len}", col.len())));
        }
        if !col.is_empty() && out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(col.as_ptr(), out, col.len());
        Ok(())
    })
}

/// Releases a frame. Null is ignored.
///
/// # Safety
/// `frame` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ft_frame_free(frame: *mut FtFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}
