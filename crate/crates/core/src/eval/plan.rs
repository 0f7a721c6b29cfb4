//! Rolling and probe window schedules on a business-day calendar.

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result, Warning, WarningCode};
use crate::series::calendar::{add_months, add_years, lower_bound};

/// Half-open date span `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Span {
    pub fn contains(&self, d: NaiveDate) -> bool {
        d >= self.start && d < self.end
    }

    /// Index range of `dates` inside the span.
    pub fn rows(&self, dates: &[NaiveDate]) -> std::ops::Range<usize> {
        lower_bound(dates, self.start)..lower_bound(dates, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WindowPlan {
    pub eval_date: NaiveDate,
    pub train: Span,
    pub test: Span,
    pub k_years: u32,
    /// Extra business days appended to the test span for long-context models.
    pub context_pad: usize,
}

/// Context padding applied to the test span: the context length when it
/// exceeds `cutoff`, otherwise none.
pub fn context_padding(context_len: usize, cutoff: usize) -> usize {
    if context_len > cutoff {
        context_len
    } else {
        0
    }
}

/// Evaluation dates every `step_months` from the first date with `k_years`
/// of history, each snapped to the next calendar date; train on the `k_years`
/// before, test on the `test_years` after (plus `context_pad` rows). Only
/// windows whose whole test span lies inside the calendar are kept.
pub fn plan_rolling_windows(
    calendar: &[NaiveDate],
    k_years: u32,
    step_months: u32,
    test_years: u32,
    context_pad: usize,
) -> Result<Vec<WindowPlan>> {
    if k_years == 0 || step_months == 0 || test_years == 0 {
        return Err(Error::Plan("k_years, step_months and test_years must be positive".into()));
    }
    let Some(&first) = calendar.first() else {
        return Err(Error::Plan("empty calendar".into()));
    };
    let anchor = add_years(first, k_years as i32);
    let mut plans = Vec::new();
    for i in 0.. {
        let nominal = add_months(anchor, (i * step_months) as i32);
        let idx = lower_bound(calendar, nominal);
        if idx >= calendar.len() {
            break;
        }
        let eval_date = calendar[idx];
        let end_idx = lower_bound(calendar, add_years(eval_date, test_years as i32)) + context_pad;
        if end_idx >= calendar.len() {
            break;
        }
        plans.push(WindowPlan {
            eval_date,
            train: Span { start: add_years(eval_date, -(k_years as i32)), end: eval_date },
            test: Span { start: eval_date, end: calendar[end_idx] },
            k_years,
            context_pad,
        });
    }
    if plans.is_empty() {
        return Err(Error::Plan(format!(
            "calendar {}..{} cannot hold {k_years} training years plus {test_years} test years",
            first,
            calendar[calendar.len() - 1]
        )));
    }
    Ok(plans)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProbeWindow {
    pub n_years: u32,
    pub train: Span,
    /// From the reference date to the end of the data.
    pub test: Span,
}

/// One window per `n`: train on the `n` years before `reference`, test on
/// everything from `reference` on. Values of `n` reaching before the start of
/// the calendar are dropped with a warning.
pub fn plan_probe(
    calendar: &[NaiveDate],
    reference: NaiveDate,
    n_range: std::ops::RangeInclusive<u32>,
) -> Result<(Vec<ProbeWindow>, Vec<Warning>)> {
    let (Some(&first), Some(&last)) = (calendar.first(), calendar.last()) else {
        return Err(Error::Plan("empty calendar".into()));
    };
    if reference <= first || reference > last {
        return Err(Error::Plan(format!("reference date {reference} is outside {first}..{last}")));
    }
    let test = Span { start: reference, end: last.succ_opt().expect("date in range") };
    let mut windows = Vec::new();
    let mut dropped = Vec::new();
    for n in n_range {
        let start = add_years(reference, -(n as i32));
        if start < first {
            dropped.push(n);
            continue;
        }
        windows.push(ProbeWindow { n_years: n, train: Span { start, end: reference }, test });
    }
    let warnings = if dropped.is_empty() {
        Vec::new()
    } else {
        vec![Warning::new(
            WarningCode::ProbeTruncated,
            "probe",
            Some(reference),
            format!("data starts {first}; training lengths {dropped:?} years do not fit"),
        )]
    };
    if windows.is_empty() {
        return Err(Error::Plan("no probe training length fits the data".into()));
    }
    Ok((windows, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::calendar::business_days;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn first_window_and_spacing() {
        let cal = business_days(ymd(2005, 1, 3), ymd(2025, 1, 22));
        let plans = plan_rolling_windows(&cal, 8, 6, 2, 0).unwrap();
        assert_eq!(plans[0].eval_date, ymd(2013, 1, 3));
        assert_eq!(plans[1].eval_date, ymd(2013, 7, 3));
        assert_eq!(plans[0].train, Span { start: ymd(2005, 1, 3), end: ymd(2013, 1, 3) });
        assert_eq!(plans[0].test.end, ymd(2015, 1, 5));
        assert!(plans.last().unwrap().test.end <= *cal.last().unwrap());
        let yearly = plan_rolling_windows(&cal, 8, 12, 2, 0).unwrap();
        let every_other: Vec<_> = plans.iter().step_by(2).map(|p| p.eval_date).collect();
        assert_eq!(yearly.iter().map(|p| p.eval_date).collect::<Vec<_>>(), every_other);
    }

    #[test]
    fn full_span_training_is_a_plan_error() {
        let cal = business_days(ymd(2005, 1, 3), ymd(2025, 1, 22));
        assert!(matches!(plan_rolling_windows(&cal, 20, 6, 2, 0), Err(Error::Plan(_))));
    }

    #[test]
    fn probe_truncates_with_warning() {
        let cal = business_days(ymd(2010, 1, 4), ymd(2025, 1, 22));
        let (w, warn) = plan_probe(&cal, ymd(2021, 1, 22), 2..=14).unwrap();
        assert_eq!(w.first().unwrap().n_years, 2);
        assert_eq!(w.last().unwrap().n_years, 11);
        assert_eq!(warn.len(), 1);
        assert_eq!(w[0].train.start, ymd(2019, 1, 22));
    }
}
