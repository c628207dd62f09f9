use std::fmt;

use chrono::{Datelike, Days, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use super::TimeFrameError;

/// Calendar granularity, finest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeUnit {
    Day,
    Week,
    Month,
    Quarter,
    Year,
}

impl TimeUnit {
    pub const ALL: [TimeUnit; 5] = [TimeUnit::Day, TimeUnit::Week, TimeUnit::Month, TimeUnit::Quarter, TimeUnit::Year];

    /// Length in days for fixed units, length in months for calendar units.
    pub(crate) fn step(self) -> Step {
        match self {
            TimeUnit::Day => Step::Days(1),
            TimeUnit::Week => Step::Days(7),
            TimeUnit::Month => Step::Months(1),
            TimeUnit::Quarter => Step::Months(3),
            TimeUnit::Year => Step::Months(12),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeUnit::Day => "day",
            TimeUnit::Week => "week",
            TimeUnit::Month => "month",
            TimeUnit::Quarter => "quarter",
            TimeUnit::Year => "year",
        }
    }

    pub fn plural(self, n: usize) -> String {
        if n == 1 {
            self.name().to_owned()
        } else {
            format!("{}s", self.name())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Step {
    Days(u64),
    Months(u32),
}

/// A positive number of units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub count: u32,
    pub unit: TimeUnit,
}

impl Span {
    pub const fn new(count: u32, unit: TimeUnit) -> Self {
        Self { count, unit }
    }

    pub fn validate(&self) -> Result<(), TimeFrameError> {
        if self.count == 0 {
            return Err(TimeFrameError::Invalid("span count must be at least 1".to_owned()));
        }
        Ok(())
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.count, self.unit.plural(self.count as usize))
    }
}

/// `date` moved by `n` units (negative moves back).
///
/// Month arithmetic clamps to the end of the target month, so
/// 2023-01-31 + 1 month = 2023-02-28.
pub fn add_span(date: NaiveDate, n: i64, unit: TimeUnit) -> NaiveDate {
    match unit.step() {
        Step::Days(d) => {
            let days = Days::new(n.unsigned_abs() * d);
            if n >= 0 { date + days } else { date - days }
        }
        Step::Months(m) => {
            let months = Months::new(u32::try_from(n.unsigned_abs()).expect("month offset fits u32") * m);
            if n >= 0 { date + months } else { date - months }
        }
    }
}

/// Half-open `[start, end)` range of calendar dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRange")]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Deserialize)]
struct RawRange {
    start: NaiveDate,
    end: NaiveDate,
}

impl TryFrom<RawRange> for DateRange {
    type Error = TimeFrameError;

    fn try_from(r: RawRange) -> Result<Self, Self::Error> {
        DateRange::new(r.start, r.end)
    }
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self, TimeFrameError> {
        if start >= end {
            return Err(TimeFrameError::EmptyRange { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d < self.end
    }

    pub fn days(&self) -> i64 {
        (self.end - self.start).num_days()
    }

    pub fn iter_days(&self) -> impl Iterator<Item = NaiveDate> {
        self.start.iter_days().take_while(|d| *d < self.end).collect::<Vec<_>>().into_iter()
    }
}

impl fmt::Display for DateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    pub range: DateRange,
    pub label: String,
}

/// How buckets line up inside a range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BucketPolicy {
    /// Step from the range start; the last bucket is clipped.
    #[default]
    AnchorAligned,
    /// ISO weeks (Monday start), calendar months, quarters and years, clipped to the range.
    CalendarAligned,
}

impl BucketPolicy {
    pub fn is_default(&self) -> bool {
        *self == BucketPolicy::AnchorAligned
    }
}

/// Splits `range` into disjoint chronological buckets covering it exactly.
pub fn bucketize(range: DateRange, unit: TimeUnit, policy: BucketPolicy) -> Result<Vec<Bucket>, TimeFrameError> {
    if add_span(range.start, 1, unit) > range.end {
        return Err(TimeFrameError::UnitTooCoarse { unit, start: range.start, end: range.end });
    }
    let mut out = Vec::new();
    match policy {
        BucketPolicy::AnchorAligned => {
            let mut i = 0;
            loop {
                let start = add_span(range.start, i, unit);
                if start >= range.end {
                    break;
                }
                let end = add_span(range.start, i + 1, unit).min(range.end);
                out.push(Bucket { range: DateRange { start, end }, label: start.to_string() });
                i += 1;
            }
        }
        BucketPolicy::CalendarAligned => {
            let origin = calendar_floor(range.start, unit);
            let mut i = 0;
            loop {
                let period_start = add_span(origin, i, unit);
                if period_start >= range.end {
                    break;
                }
                let start = period_start.max(range.start);
                let end = add_span(origin, i + 1, unit).min(range.end);
                out.push(Bucket { range: DateRange { start, end }, label: calendar_label(period_start, unit) });
                i += 1;
            }
        }
    }
    Ok(out)
}

/// Start of the calendar period containing `d`.
pub(crate) fn calendar_floor(d: NaiveDate, unit: TimeUnit) -> NaiveDate {
    let ymd = |y, m| NaiveDate::from_ymd_opt(y, m, 1).expect("first of month exists");
    match unit {
        TimeUnit::Day => d,
        TimeUnit::Week => d - Days::new(u64::from(d.weekday().num_days_from_monday())),
        TimeUnit::Month => ymd(d.year(), d.month()),
        TimeUnit::Quarter => ymd(d.year(), (d.month0() / 3) * 3 + 1),
        TimeUnit::Year => ymd(d.year(), 1),
    }
}

fn calendar_label(start: NaiveDate, unit: TimeUnit) -> String {
    match unit {
        TimeUnit::Day => start.to_string(),
        TimeUnit::Week => {
            let w = start.iso_week();
            format!("{}-W{:02}", w.year(), w.week())
        }
        TimeUnit::Month => format!("{}-{:02}", start.year(), start.month()),
        TimeUnit::Quarter => format!("{}-Q{}", start.year(), start.month0() / 3 + 1),
        TimeUnit::Year => start.year().to_string(),
    }
}
