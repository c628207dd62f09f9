//! Relative time frames.
//!
//! A [`TimeFrame`] is "N units from an anchor date". It resolves to a half-open
//! [`DateRange`], splits into [`Bucket`]s, and advances along a grid seeded at
//! its original anchor when a snapshot is updated.

mod calendar;
mod frame;

pub use calendar::{add_span, bucketize, Bucket, BucketPolicy, DateRange, Span, TimeUnit};
pub use frame::{detect_gaps, infer_freshness, restrict_weekdays, TimeFrame};

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeFrameError {
    #[error("bucket unit {unit:?} is coarser than the range {start}..{end}")]
    UnitTooCoarse { unit: TimeUnit, start: NaiveDate, end: NaiveDate },
    #[error("empty date range {start}..{end}")]
    EmptyRange { start: NaiveDate, end: NaiveDate },
    #[error("invalid time frame: {0}")]
    Invalid(String),
}
