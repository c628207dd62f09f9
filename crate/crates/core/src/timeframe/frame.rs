use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::calendar::{add_span, bucketize, Bucket, BucketPolicy, DateRange, Span, Step, TimeUnit};
use super::TimeFrameError;
use crate::data::{DataError, Dataset, ResolvedTable, Weekday};
use crate::scalar::Scalar;

/// "`span` from `anchor`", bucketed by `bucket_unit`, optionally restricted to
/// some weekdays.
///
/// After an update the frame remembers the date its period grid was seeded at
/// (`origin`) whenever month-end clamping would otherwise shift the grid, so
/// that a frame seeded on Jan 31 keeps ending on month ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "RawTimeFrame")]
pub struct TimeFrame {
    pub temporal_field: String,
    pub anchor: NaiveDate,
    pub span: Span,
    pub bucket_unit: TimeUnit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weekday_subset: Option<BTreeSet<Weekday>>,
    #[serde(default, skip_serializing_if = "BucketPolicy::is_default")]
    pub bucket_policy: BucketPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<NaiveDate>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawTimeFrame {
    temporal_field: String,
    anchor: NaiveDate,
    span: Span,
    bucket_unit: TimeUnit,
    #[serde(default)]
    weekday_subset: Option<BTreeSet<Weekday>>,
    #[serde(default)]
    bucket_policy: BucketPolicy,
    #[serde(default)]
    origin: Option<NaiveDate>,
}

impl TryFrom<RawTimeFrame> for TimeFrame {
    type Error = TimeFrameError;

    fn try_from(r: RawTimeFrame) -> Result<Self, Self::Error> {
        let tf = TimeFrame {
            temporal_field: r.temporal_field,
            anchor: r.anchor,
            span: r.span,
            bucket_unit: r.bucket_unit,
            weekday_subset: r.weekday_subset,
            bucket_policy: r.bucket_policy,
            origin: r.origin,
        };
        tf.validate()?;
        Ok(tf)
    }
}

impl TimeFrame {
    pub fn new(
        temporal_field: impl Into<String>,
        anchor: NaiveDate,
        span: Span,
        bucket_unit: TimeUnit,
    ) -> Result<Self, TimeFrameError> {
        let tf = TimeFrame {
            temporal_field: temporal_field.into(),
            anchor,
            span,
            bucket_unit,
            weekday_subset: None,
            bucket_policy: BucketPolicy::AnchorAligned,
            origin: None,
        };
        tf.validate()?;
        Ok(tf)
    }

    pub fn with_weekdays(mut self, days: impl IntoIterator<Item = Weekday>) -> Result<Self, TimeFrameError> {
        self.weekday_subset = Some(days.into_iter().collect());
        self.validate()?;
        Ok(self)
    }

    pub fn with_policy(mut self, policy: BucketPolicy) -> Self {
        self.bucket_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<(), TimeFrameError> {
        self.span.validate()?;
        if self.bucket_unit > self.span.unit {
            return Err(TimeFrameError::Invalid(format!(
                "bucket unit {} is coarser than span unit {}",
                self.bucket_unit.name(),
                self.span.unit.name()
            )));
        }
        if self.weekday_subset.as_ref().is_some_and(BTreeSet::is_empty) {
            return Err(TimeFrameError::Invalid("weekday subset is empty".to_owned()));
        }
        if let Some(origin) = self.origin {
            let on_grid = origin <= self.anchor && self.boundary(origin, self.grid_index(origin, self.anchor)) == self.anchor;
            if !on_grid {
                return Err(TimeFrameError::Invalid(format!("anchor {} is not on the grid seeded at {origin}", self.anchor)));
            }
        }
        Ok(())
    }

    /// Date the period grid was seeded at.
    pub fn seed(&self) -> NaiveDate {
        self.origin.unwrap_or(self.anchor)
    }

    /// The `k`-th grid boundary from `seed`.
    fn boundary(&self, seed: NaiveDate, k: i64) -> NaiveDate {
        add_span(seed, k * i64::from(self.span.count), self.span.unit)
    }

    /// Largest `k` with `boundary(seed, k) <= date`, for `date >= seed`.
    fn grid_index(&self, seed: NaiveDate, date: NaiveDate) -> i64 {
        let count = i64::from(self.span.count);
        let mut k = match self.span.unit.step() {
            Step::Days(d) => (date - seed).num_days() / (count * d as i64),
            Step::Months(m) => {
                let months = i64::from(date.year() - seed.year()) * 12 + i64::from(date.month()) - i64::from(seed.month());
                months.max(0) / (count * i64::from(m))
            }
        };
        while k > 0 && self.boundary(seed, k) > date {
            k -= 1;
        }
        while self.boundary(seed, k + 1) <= date {
            k += 1;
        }
        k
    }

    /// `[anchor, anchor + span)` on the frame's grid.
    pub fn resolve_range(&self) -> DateRange {
        let seed = self.seed();
        let k = self.grid_index(seed, self.anchor);
        DateRange { start: self.anchor, end: self.boundary(seed, k + 1) }
    }

    /// Moves the frame to the latest fully elapsed period ending at or before `now`.
    ///
    /// Returns the frame unchanged when no full new period has elapsed.
    pub fn advance(&self, now: NaiveDate) -> TimeFrame {
        let seed = self.seed();
        let current = self.grid_index(seed, self.anchor);
        if now < seed {
            return self.clone();
        }
        let latest_end = self.grid_index(seed, now);
        if latest_end <= current + 1 {
            return self.clone();
        }
        let anchor = self.boundary(seed, latest_end - 1);
        let mut next = TimeFrame { anchor, origin: None, ..self.clone() };
        if next.needs_origin(seed) {
            next.origin = Some(seed);
        }
        next
    }

    /// Whether re-seeding the grid at `anchor` would drift from the grid seeded at `seed`.
    fn needs_origin(&self, seed: NaiveDate) -> bool {
        match self.span.unit.step() {
            Step::Days(_) => false,
            Step::Months(_) => self.anchor.day() != seed.day(),
        }
    }

    /// The same frame moved back by `offset`, for period-over-period comparison.
    pub fn shifted_back(&self, offset: Span) -> TimeFrame {
        let anchor = add_span(self.anchor, -i64::from(offset.count), offset.unit);
        TimeFrame { anchor, origin: None, ..self.clone() }
    }

    /// `max(range end, first grid boundary after as_of)`.
    pub fn valid_until(&self, as_of: NaiveDate) -> NaiveDate {
        let end = self.resolve_range().end;
        let seed = self.seed();
        if as_of < end || as_of < seed {
            return end;
        }
        self.boundary(seed, self.grid_index(seed, as_of) + 1).max(end)
    }

    pub fn allows(&self, d: NaiveDate) -> bool {
        self.weekday_subset.as_ref().is_none_or(|s| s.contains(&Weekday::of(d)))
    }

    /// Buckets of the resolved range.
    pub fn buckets(&self) -> Vec<Bucket> {
        bucketize(self.resolve_range(), self.bucket_unit, self.bucket_policy)
            .expect("bucket unit never coarser than span")
    }
}

/// Keeps rows whose date falls on one of the frame's weekdays.
pub fn restrict_weekdays(ds: &Dataset, rows: &[usize], tf: &TimeFrame) -> Result<Vec<usize>, DataError> {
    let col = ds.column(&tf.temporal_field)?;
    if tf.weekday_subset.is_none() {
        return Ok(rows.to_vec());
    }
    Ok(rows.iter().copied().filter(|&i| ds.rows[i][col].as_date().is_some_and(|d| tf.allows(d))).collect())
}

/// Buckets of the frame that should hold data but have no source rows in `table`.
///
/// Buckets made up only of excluded weekdays are not expected to hold data.
pub fn detect_gaps<T: Scalar>(table: &ResolvedTable<T>, tf: &TimeFrame) -> Vec<Bucket> {
    let present: BTreeSet<NaiveDate> = table.rows.iter().filter(|r| r.rows > 0).filter_map(|r| r.bucket).collect();
    tf.buckets()
        .into_iter()
        .filter(|b| b.range.iter_days().any(|d| tf.allows(d)))
        .filter(|b| !present.contains(&b.range.start))
        .collect()
}

/// Best-before date of content resolved on `as_of` from the given frames.
///
/// Each frame stays valid until its range ends or, for a range that had already
/// ended on `as_of`, until the next period on its grid completes. The result
/// is the latest such date; `None` when there are no frames.
pub fn infer_freshness<'a>(
    frames: impl IntoIterator<Item = Option<&'a TimeFrame>>,
    as_of: NaiveDate,
) -> Option<NaiveDate> {
    frames.into_iter().flatten().map(|tf| tf.valid_until(as_of)).max()
}
