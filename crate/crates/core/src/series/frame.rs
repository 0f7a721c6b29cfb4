use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

use chrono::NaiveDate;

use super::calendar::{business_days_between, is_business_day, lower_bound};
use crate::error::{Error, Result};

/// A named, dated sequence of values. Transforms drop undefined head values
/// rather than padding them.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Self {
        assert_eq!(dates.len(), values.len(), "series dates/values length mismatch");
        Series { name: name.into(), dates, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Drop the first `n` observations.
    pub fn skip(&self, n: usize) -> Series {
        let n = n.min(self.len());
        Series::new(self.name.clone(), self.dates[n..].to_vec(), self.values[n..].to_vec())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Series {
        Series::new(self.name.clone(), self.dates.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Elementwise combination on the intersection of both date indices.
    pub fn zip_with(&self, other: &Series, name: impl Into<String>, f: impl Fn(f64, f64) -> f64) -> Series {
        let (mut i, mut j) = (0, 0);
        let (mut dates, mut values) = (Vec::new(), Vec::new());
        while i < self.len() && j < other.len() {
            match self.dates[i].cmp(&other.dates[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dates.push(self.dates[i]);
                    values.push(f(self.values[i], other.values[j]));
                    i += 1;
                    j += 1;
                }
            }
        }
        Series::new(name, dates, values)
    }

    pub fn last(&self) -> Option<(NaiveDate, f64)> {
        Some((*self.dates.last()?, *self.values.last()?))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Column {
    name: String,
    values: Vec<f64>,
}

/// Date-indexed panel of `f64` columns sharing one business-day index.
/// Missing cells are `NaN`; after [`align`](super::align) none remain.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame {
    dates: Vec<NaiveDate>,
    columns: Vec<Column>,
}

impl Frame {
    pub fn new(dates: Vec<NaiveDate>, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Data { date: w[1], reason: "dates must be strictly increasing".into() });
            }
        }
        if let Some(d) = dates.iter().find(|d| !is_business_day(**d)) {
            return Err(Error::Data { date: *d, reason: "weekend date in business-day index".into() });
        }
        let mut frame = Frame { dates, columns: Vec::with_capacity(columns.len()) };
        for (name, values) in columns {
            frame.push_column(name, values)?;
        }
        Ok(frame)
    }

    pub fn empty() -> Self {
        Frame::default()
    }

    /// Outer join of several series on their dates; absent cells become `NaN`.
    pub fn from_series(series: &[Series]) -> Result<Self> {
        let mut dates: Vec<NaiveDate> = series.iter().flat_map(|s| s.dates.iter().copied()).collect();
        dates.sort_unstable();
        dates.dedup();
        let columns = series
            .iter()
            .map(|s| {
                let mut values = vec![f64::NAN; dates.len()];
                for (d, v) in s.dates.iter().zip(&s.values) {
                    let idx = lower_bound(&dates, *d);
                    values[idx] = *v;
                }
                (s.name.clone(), values)
            })
            .collect();
        Frame::new(dates, columns)
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.dates.len() {
            return Err(Error::Length(format!(
                "column `{name}` has {} values for {} dates",
                values.len(),
                self.dates.len()
            )));
        }
        if self.columns.iter().any(|c| c.name == name) {
            return Err(Error::Config(format!("duplicate column `{name}`")));
        }
        self.columns.push(Column { name, values });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn column_at(&self, idx: usize) -> &[f64] {
        &self.columns[idx].values
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&[f64]> {
        self.column(name).ok_or_else(|| Error::Config(format!("missing column `{name}`")))
    }

    /// The column as a series, skipping missing cells.
    pub fn series(&self, name: &str) -> Result<Series> {
        let values = self.require(name)?;
        let (dates, values): (Vec<_>, Vec<_>) =
            self.dates.iter().zip(values).filter(|(_, v)| !v.is_nan()).map(|(d, v)| (*d, *v)).unzip();
        Ok(Series::new(name, dates, values))
    }

    pub fn slice_rows(&self, range: Range<usize>) -> Frame {
        Frame {
            dates: self.dates[range.clone()].to_vec(),
            columns: self
                .columns
                .iter()
                .map(|c| Column { name: c.name.clone(), values: c.values[range.clone()].to_vec() })
                .collect(),
        }
    }

    /// Rows with `start <= date < end`.
    pub fn slice_dates(&self, start: NaiveDate, end: NaiveDate) -> Frame {
        let a = lower_bound(&self.dates, start);
        let b = lower_bound(&self.dates, end).max(a);
        self.slice_rows(a..b)
    }

    /// Rows dated on or before `last`.
    pub fn truncate_after(&self, last: NaiveDate) -> Frame {
        let b = self.dates.partition_point(|d| *d <= last);
        self.slice_rows(0..b)
    }

    pub fn select(&self, names: &[&str]) -> Result<Frame> {
        let mut out = Frame { dates: self.dates.clone(), columns: Vec::new() };
        for n in names {
            out.push_column(*n, self.require(n)?.to_vec())?;
        }
        Ok(out)
    }

    pub fn view(&self, rows: Range<usize>) -> FrameView<'_> {
        assert!(rows.end <= self.len() && rows.start <= rows.end);
        FrameView { frame: self, rows }
    }

    pub fn row(&self, idx: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[idx]).collect()
    }

    pub fn has_missing(&self) -> bool {
        self.columns.iter().any(|c| c.values.iter().any(|v| v.is_nan()))
    }

    /// Reads the ingestion schema: header row with `date` first, ISO dates,
    /// numeric cells, empty cells missing.
    pub fn read_csv<R: Read>(reader: R) -> Result<Frame> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0).map(str::trim) != Some("date") {
            return Err(Error::Schema(format!(
                "first header must be `date`, found `{}`",
                headers.get(0).unwrap_or("")
            )));
        }
        let names: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
        let mut dates = Vec::new();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for (row_idx, record) in rdr.records().enumerate() {
            let record = record?;
            let line = row_idx + 2;
            let raw_date = record.get(0).unwrap_or("").trim();
            let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
                .map_err(|_| Error::Schema(format!("line {line}: invalid date `{raw_date}`")))?;
            dates.push(date);
            for (j, name) in names.iter().enumerate() {
                let cell = record.get(j + 1).unwrap_or("").trim();
                let v = if cell.is_empty() {
                    f64::NAN
                } else {
                    match cell.parse::<f64>() {
                        Ok(v) if v.is_finite() => v,
                        _ => {
                            return Err(Error::Schema(format!(
                                "line {line}, column `{name}`: non-numeric value `{cell}`"
                            )))
                        }
                    }
                };
                columns[j].push(v);
            }
        }
        Frame::new(dates, names.into_iter().zip(columns).collect()).map_err(|e| match e {
            Error::Data { date, reason } => Error::Schema(format!("{date}: {reason}")),
            other => other,
        })
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Frame> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Schema(format!("cannot open {}: {e}", path.display())))?;
        Frame::read_csv(std::io::BufReader::new(file))
    }

    /// Canonical CSV: shortest round-trip decimal for every value, empty for missing.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        w.write_record(&header)?;
        for (i, d) in self.dates.iter().enumerate() {
            let mut rec = vec![d.format("%Y-%m-%d").to_string()];
            rec.extend(self.columns.iter().map(|c| fmt_cell(c.values[i])));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

pub(crate) fn fmt_cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Borrowed row range of a frame. Forecasters receive context through this so
/// they cannot see rows past the forecast origin.
#[derive(Debug, Clone)]
pub struct FrameView<'a> {
    frame: &'a Frame,
    rows: Range<usize>,
}

impl<'a> FrameView<'a> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dates(&self) -> &'a [NaiveDate] {
        &self.frame.dates[self.rows.clone()]
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.dates().last().copied()
    }

    pub fn column(&self, name: &str) -> Option<&'a [f64]> {
        self.frame.column(name).map(|c| &c[self.rows.clone()])
    }

    pub fn column_at(&self, idx: usize) -> &'a [f64] {
        &self.frame.column_at(idx)[self.rows.clone()]
    }

    pub fn column_names(&self) -> Vec<&'a str> {
        self.frame.column_names()
    }

    pub fn width(&self) -> usize {
        self.frame.width()
    }

    pub fn row(&self, idx: usize) -> Vec<f64> {
        self.frame.row(self.rows.start + idx)
    }

    /// The last `n` rows (or all of them when shorter).
    pub fn tail(&self, n: usize) -> FrameView<'a> {
        let start = self.rows.end.saturating_sub(n).max(self.rows.start);
        FrameView { frame: self.frame, rows: start..self.rows.end }
    }

    pub fn to_frame(&self) -> Frame {
        self.frame.slice_rows(self.rows.clone())
    }
}

/// Joins frames onto the calendar of the first (target-bearing) frame.
///
/// Each column is forward-filled from its last observation for at most
/// `ffill_limit` business days. Leading rows that still hold a missing value
/// are dropped; a missing value after the first complete row is a
/// [`Error::Gap`].
pub fn align(frames: &[Frame], ffill_limit: usize) -> Result<Frame> {
    if frames.iter().all(Frame::is_empty) {
        return Err(Error::Alignment("no non-empty frame to align".into()));
    }
    let target_dates = frames[0].dates().to_vec();
    if target_dates.is_empty() {
        return Err(Error::Alignment("target-bearing frame is empty".into()));
    }

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for frame in frames {
        for col in &frame.columns {
            let filled = reindex_ffill(&frame.dates, &col.values, &target_dates, ffill_limit as i64);
            columns.push((col.name.clone(), filled));
        }
    }

    let first_complete = (0..target_dates.len()).find(|&i| columns.iter().all(|(_, v)| !v[i].is_nan()));
    let Some(start) = first_complete else {
        return Err(Error::Alignment("no date where every column is observed".into()));
    };
    for i in start..target_dates.len() {
        if let Some((name, _)) = columns.iter().find(|(_, v)| v[i].is_nan()) {
            return Err(Error::Gap { column: name.clone(), date: target_dates[i] });
        }
    }
    let dates = target_dates[start..].to_vec();
    let columns = columns.into_iter().map(|(n, v)| (n, v[start..].to_vec())).collect();
    Frame::new(dates, columns)
}

fn reindex_ffill(src_dates: &[NaiveDate], src: &[f64], target: &[NaiveDate], limit: i64) -> Vec<f64> {
    let mut out = Vec::with_capacity(target.len());
    let mut j = 0;
    let mut last: Option<(NaiveDate, f64)> = None;
    for &d in target {
        while j < src_dates.len() && src_dates[j] <= d {
            if !src[j].is_nan() {
                last = Some((src_dates[j], src[j]));
            }
            j += 1;
        }
        let v = match last {
            Some((obs, v)) if business_days_between(obs, d) <= limit => v,
            _ => f64::NAN,
        };
        out.push(v);
    }
    out
}
