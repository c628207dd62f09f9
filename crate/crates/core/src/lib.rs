//! Retargeting dashboard selections into live, versioned snapshots.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`] typed datasets, dashboards, filters, group-by aggregation and
//!   selection resolution.
//! * [`timeframe`] relative time frames: range resolution, bucketing, weekday
//!   restriction, advancement and gap detection.
//! * [`template`] chart specifications and captions for each template kind.
//! * [`snapshot`] components, curation, immutable versions, status and updates.
//! * [`collab`] the emulated collaboration platform.
//! * [`telemetry`] the engagement log, summaries and propagation graphs.
//!
//! Numeric code that does not need to know the concrete float type is generic
//! over [`Scalar`]; the aliases below fix it to `f64` for the rest of the system.

pub mod canon;
pub mod collab;
pub mod data;
pub mod scalar;
pub mod snapshot;
pub mod telemetry;
pub mod template;
pub mod timeframe;

pub use scalar::Scalar;

/// Resolved selection with `f64` values, the representation stored in snapshots.
pub type Table = data::ResolvedTable<f64>;
/// Single-precision resolved table.
pub type TableF32 = data::ResolvedTable<f32>;
/// Resolved row with `f64` values.
pub type Row = data::ResolvedRow<f64>;

/// Calendar date used throughout the model. There is no time-of-day.
pub type Date = chrono::NaiveDate;
