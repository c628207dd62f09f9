//! Typed tabular data, dashboard definitions, filtering, aggregation and
//! selection resolution.

mod aggregate;
mod catalog;
mod dashboard;
mod dataset;
mod filter;
mod selection;
mod value;

pub use aggregate::{aggregate, Aggregate, BucketSpec, Comparison, ResolvedRow, ResolvedTable, TableMeta};
pub use catalog::Catalog;
pub use dashboard::{ChartKind, Dashboard, Widget};
pub use dataset::{load_dataset, Dataset, SchemaHint, SourceFormat};
pub use filter::{apply_filters, FilterOp, FilterPredicate};
pub use selection::{extract_selection, resolve_selection, resolve_selection_totals, Selection, SelectionOverrides};
pub use value::{Field, FieldKind, Value, ValueType, Weekday};

use thiserror::Error;

use crate::timeframe::TimeFrameError;

/// Errors raised while loading, filtering, aggregating or resolving data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("source is empty")]
    EmptySource,
    #[error("malformed row at line {0}")]
    MalformedRow(usize),
    #[error("field `{field}` has an unparseable date at line {line}")]
    UnparseableDate { field: String, line: usize },
    #[error("duplicate field name `{0}`")]
    DuplicateFieldName(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("operator `{op}` is not compatible with field `{field}`")]
    KindMismatch { field: String, op: String },
    #[error("measure `{0}` is not numeric")]
    NonNumericMeasure(String),
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("unknown dashboard `{0}`")]
    UnknownDashboard(String),
    #[error("unknown widget `{0}`")]
    UnknownWidget(String),
    #[error("invalid override: {0}")]
    InvalidOverride(String),
    #[error("invalid dashboard: {0}")]
    InvalidDashboard(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error(transparent)]
    TimeFrame(#[from] TimeFrameError),
}
