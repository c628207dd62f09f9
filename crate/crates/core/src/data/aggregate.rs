use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::value::{Value, ValueType};
use super::DataError;
use crate::scalar::Scalar;
use crate::timeframe::{Bucket, DateRange, Span, TimeUnit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregate {
    #[default]
    Sum,
    Mean,
    Count,
    Min,
    Max,
}

/// One group of a resolved selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct ResolvedRow<T> {
    /// Dimension values, in the table's `dimensions` order.
    pub keys: Vec<Value>,
    /// Start of the time bucket, for bucketed tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bucket: Option<NaiveDate>,
    pub value: T,
    /// Second measure over the same group, when the table is paired.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paired: Option<T>,
    /// Source rows folded into this group.
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TableMeta {
    pub row_count_consumed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<DateRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<TimeUnit>,
}

/// Rows of an earlier period used by time-over-time comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct Comparison<T> {
    pub offset: Span,
    pub rows: Vec<ResolvedRow<T>>,
    pub meta: TableMeta,
}

/// Aggregated selection: one row per distinct group key tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct ResolvedTable<T> {
    pub measure: String,
    pub aggregate: Aggregate,
    pub dimensions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paired_measure: Option<String>,
    pub rows: Vec<ResolvedRow<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison<T>>,
    pub meta: TableMeta,
}

impl<T: Scalar> ResolvedTable<T> {
    pub fn is_bucketed(&self) -> bool {
        self.meta.unit.is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Joins a second aggregation over the same groups as paired values.
    ///
    /// Groups missing from `other` are dropped so every row carries a pair.
    pub fn with_paired(mut self, other: &ResolvedTable<T>) -> Self {
        let lookup: BTreeMap<(&[Value], Option<NaiveDate>), T> =
            other.rows.iter().map(|r| ((r.keys.as_slice(), r.bucket), r.value)).collect();
        self.rows.retain_mut(|r| match lookup.get(&(r.keys.as_slice(), r.bucket)) {
            Some(v) => {
                r.paired = Some(*v);
                true
            }
            None => false,
        });
        self.paired_measure = Some(other.measure.clone());
        self
    }

    /// Converts the value type, e.g. to `f64` for presentation.
    pub fn cast<U: Scalar>(&self) -> ResolvedTable<U> {
        let rows = |rows: &[ResolvedRow<T>]| {
            rows.iter()
                .map(|r| ResolvedRow {
                    keys: r.keys.clone(),
                    bucket: r.bucket,
                    value: U::from_f64_lossy(r.value.to_f64_lossy()),
                    paired: r.paired.map(|p| U::from_f64_lossy(p.to_f64_lossy())),
                    rows: r.rows,
                })
                .collect()
        };
        ResolvedTable {
            measure: self.measure.clone(),
            aggregate: self.aggregate,
            dimensions: self.dimensions.clone(),
            paired_measure: self.paired_measure.clone(),
            rows: rows(&self.rows),
            comparison: self.comparison.as_ref().map(|c| Comparison {
                offset: c.offset,
                rows: rows(&c.rows),
                meta: c.meta.clone(),
            }),
            meta: self.meta.clone(),
        }
    }
}

/// Time bucketing for [`aggregate`].
#[derive(Debug, Clone, Copy)]
pub struct BucketSpec<'a> {
    pub field: &'a str,
    pub buckets: &'a [Bucket],
    pub unit: TimeUnit,
}

struct Acc<T> {
    sum: T,
    count: usize,
    min: T,
    max: T,
}

impl<T: Scalar> Acc<T> {
    fn new() -> Self {
        Self { sum: T::zero(), count: 0, min: T::infinity(), max: T::neg_infinity() }
    }

    fn push(&mut self, v: T) {
        self.sum = self.sum + v;
        self.count += 1;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    fn finish(&self, agg: Aggregate) -> T {
        match agg {
            Aggregate::Sum => self.sum,
            Aggregate::Mean => self.sum / T::from_count(self.count),
            Aggregate::Count => T::from_count(self.count),
            Aggregate::Min => self.min,
            Aggregate::Max => self.max,
        }
    }
}

/// Groups `rows` by `group_by` (and by time bucket when given) and folds `measure`.
///
/// Output groups are exactly the observed key tuples, ordered by dimension values
/// and then chronologically by bucket. Rows whose date falls outside every bucket
/// are not consumed. Zero input rows yield zero output rows.
pub fn aggregate<T: Scalar>(
    ds: &Dataset,
    rows: &[usize],
    measure: &str,
    agg: Aggregate,
    group_by: &[String],
    buckets: Option<BucketSpec<'_>>,
) -> Result<ResolvedTable<T>, DataError> {
    let measure_col = ds.column(measure)?;
    if ds.schema[measure_col].value_type != ValueType::Number {
        return Err(DataError::NonNumericMeasure(measure.to_owned()));
    }
    let key_cols = group_by.iter().map(|g| ds.column(g)).collect::<Result<Vec<_>, _>>()?;
    let bucket_col = buckets.map(|b| ds.column(b.field)).transpose()?;

    let mut groups: BTreeMap<(Vec<Value>, Option<NaiveDate>), Acc<T>> = BTreeMap::new();
    let mut consumed = 0;
    for &i in rows {
        let row = &ds.rows[i];
        let bucket = match (buckets, bucket_col) {
            (Some(spec), Some(col)) => {
                let Some(date) = row[col].as_date() else { continue };
                match locate(spec.buckets, date) {
                    Some(start) => Some(start),
                    None => continue,
                }
            }
            _ => None,
        };
        let Some(v) = row[measure_col].as_number() else { continue };
        let keys = key_cols.iter().map(|&c| row[c].clone()).collect();
        groups.entry((keys, bucket)).or_insert_with(Acc::new).push(T::from_f64_lossy(v));
        consumed += 1;
    }

    Ok(ResolvedTable {
        measure: measure.to_owned(),
        aggregate: agg,
        dimensions: group_by.to_vec(),
        paired_measure: None,
        rows: groups
            .into_iter()
            .map(|((keys, bucket), acc)| ResolvedRow {
                keys,
                bucket,
                value: acc.finish(agg),
                paired: None,
                rows: acc.count,
            })
            .collect(),
        comparison: None,
        meta: TableMeta { row_count_consumed: consumed, range: None, unit: buckets.map(|b| b.unit) },
    })
}

/// Start of the bucket containing `date`. Buckets are disjoint and chronological.
fn locate(buckets: &[Bucket], date: NaiveDate) -> Option<NaiveDate> {
    let idx = buckets.partition_point(|b| b.range.start <= date);
    let b = buckets.get(idx.checked_sub(1)?)?;
    b.range.contains(date).then_some(b.range.start)
}
