//! Monday–Friday business calendar. No holiday table: the input files decide
//! which weekdays are usable.

use chrono::{Datelike, Months, NaiveDate, Weekday};

pub fn is_business_day(d: NaiveDate) -> bool {
    !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

/// First business day on or after `d`.
pub fn roll_forward(mut d: NaiveDate) -> NaiveDate {
    while !is_business_day(d) {
        d = d.succ_opt().expect("date overflow");
    }
    d
}

/// Number of business days in the half-open interval `(from, to]`.
pub fn business_days_between(from: NaiveDate, to: NaiveDate) -> i64 {
    if to <= from {
        return 0;
    }
    let days = (to - from).num_days();
    let full_weeks = days / 7;
    let mut count = full_weeks * 5;
    let mut d = from + chrono::Duration::days(full_weeks * 7);
    while d < to {
        d = d.succ_opt().expect("date overflow");
        if is_business_day(d) {
            count += 1;
        }
    }
    count
}

/// Monday–Friday dates in `[start, end]`.
pub fn business_days(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    start
        .iter_days()
        .take_while(|d| *d <= end)
        .filter(|d| is_business_day(*d))
        .collect()
}

/// Calendar-month arithmetic, clamping to the month end (Jan 31 + 1M = Feb 28/29).
pub fn add_months(d: NaiveDate, months: i32) -> NaiveDate {
    if months >= 0 {
        d.checked_add_months(Months::new(months as u32))
    } else {
        d.checked_sub_months(Months::new(months.unsigned_abs()))
    }
    .expect("date overflow")
}

pub fn add_years(d: NaiveDate, years: i32) -> NaiveDate {
    add_months(d, years * 12)
}

/// Index of the first element of sorted `dates` that is `>= d`.
pub fn lower_bound(dates: &[NaiveDate], d: NaiveDate) -> usize {
    dates.partition_point(|x| *x < d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn counts_match_enumeration() {
        let a = ymd(2020, 1, 1);
        for span in 0..60 {
            let b = a + chrono::Duration::days(span);
            let brute = a.iter_days().skip(1).take_while(|d| *d <= b).filter(|d| is_business_day(*d)).count();
            assert_eq!(business_days_between(a, b), brute as i64, "span {span}");
        }
    }

    #[test]
    fn month_end_clamps() {
        assert_eq!(add_months(ymd(2021, 1, 31), 1), ymd(2021, 2, 28));
        assert_eq!(add_years(ymd(2020, 2, 29), 1), ymd(2021, 2, 28));
        assert_eq!(roll_forward(ymd(2021, 1, 23)), ymd(2021, 1, 25));
    }
}
