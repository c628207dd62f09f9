use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate, Aggregate, BucketSpec, ResolvedTable};
use super::catalog::Catalog;
use super::dashboard::Dashboard;
use super::dataset::Dataset;
use super::filter::{apply_filters, FilterPredicate};
use super::value::{FieldKind, ValueType};
use super::DataError;
use crate::scalar::Scalar;
use crate::timeframe::{bucketize, restrict_weekdays, TimeFrame};

/// What the creator picked from a dashboard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Selection {
    pub dashboard_id: String,
    pub dataset_id: String,
    pub widget_ids: Vec<String>,
    pub measure: String,
    pub aggregate: Aggregate,
    #[serde(default)]
    pub dimensions: Vec<String>,
    #[serde(default)]
    pub filters: Vec<FilterPredicate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_frame: Option<TimeFrame>,
}

impl Selection {
    /// Replaces every filter on the fields of `overrides` with `overrides`.
    pub fn override_filters(&mut self, overrides: &[FilterPredicate]) {
        self.filters.retain(|f| !overrides.iter().any(|o| o.field == f.field));
        self.filters.extend(overrides.iter().cloned());
    }

    /// Checks every field reference against the backing dataset.
    pub fn validate(&self, ds: &Dataset) -> Result<(), DataError> {
        let bad = |msg: String| Err(DataError::InvalidOverride(msg));
        match ds.field(&self.measure) {
            Some(f) if f.value_type == ValueType::Number => {}
            Some(_) => return bad(format!("measure `{}` is not numeric", self.measure)),
            None => return bad(format!("measure `{}` is not in dataset `{}`", self.measure, ds.id)),
        }
        if self.dimensions.len() > 2 {
            return bad("at most two dimensions can be selected".to_owned());
        }
        for d in &self.dimensions {
            if ds.field(d).is_none() {
                return bad(format!("dimension `{d}` is not in dataset `{}`", ds.id));
            }
        }
        for f in &self.filters {
            if ds.field(&f.field).is_none() {
                return bad(format!("filter field `{}` is not in dataset `{}`", f.field, ds.id));
            }
            f.validate(ds).map_err(|e| DataError::InvalidOverride(e.to_string()))?;
        }
        if let Some(tf) = &self.time_frame {
            match ds.field(&tf.temporal_field) {
                Some(f) if f.kind == FieldKind::Temporal => {}
                _ => return bad(format!("`{}` is not a temporal field of `{}`", tf.temporal_field, ds.id)),
            }
        }
        Ok(())
    }
}

/// Creator adjustments applied on top of a widget's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectionOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Aggregate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filters: Option<Vec<FilterPredicate>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_frame: Option<TimeFrame>,
}

/// Builds a selection from a widget's defaults and the creator's overrides.
///
/// Filters are the dashboard's global filters that apply to the widget's
/// dataset, then the widget's own filters; an override filter replaces every
/// inherited filter on the same field.
pub fn extract_selection(
    dashboard: &Dashboard,
    widget_id: &str,
    overrides: &SelectionOverrides,
    catalog: &Catalog,
) -> Result<Selection, DataError> {
    let widget = dashboard.widget(widget_id)?;
    let ds = catalog.dataset(&widget.dataset_id)?;
    let mut filters: Vec<FilterPredicate> =
        dashboard.global_filters.iter().filter(|g| ds.field(&g.field).is_some()).cloned().collect();
    filters.extend(widget.filters.iter().cloned());

    let mut sel = Selection {
        dashboard_id: dashboard.id.clone(),
        dataset_id: widget.dataset_id.clone(),
        widget_ids: vec![widget.id.clone()],
        measure: overrides.measure.clone().unwrap_or_else(|| widget.measures[0].clone()),
        aggregate: overrides.aggregate.unwrap_or(widget.aggregate),
        dimensions: overrides.dimensions.clone().unwrap_or_else(|| widget.dimensions.clone()),
        filters,
        time_frame: overrides.time_frame.clone(),
    };
    if let Some(o) = &overrides.filters {
        sel.override_filters(o);
    }
    sel.validate(ds)?;
    Ok(sel)
}

/// Filters, restricts to the time frame, buckets and aggregates.
///
/// Pure: the same selection over the same catalog always yields the same table.
pub fn resolve_selection<T: Scalar>(sel: &Selection, catalog: &Catalog) -> Result<ResolvedTable<T>, DataError> {
    resolve(sel, catalog, true)
}

/// Like [`resolve_selection`] but with one row per group over the whole
/// time-frame range instead of one per bucket.
pub fn resolve_selection_totals<T: Scalar>(sel: &Selection, catalog: &Catalog) -> Result<ResolvedTable<T>, DataError> {
    resolve(sel, catalog, false)
}

fn resolve<T: Scalar>(sel: &Selection, catalog: &Catalog, bucketed: bool) -> Result<ResolvedTable<T>, DataError> {
    let ds = catalog.dataset(&sel.dataset_id)?;
    let mut rows = apply_filters(ds, &sel.filters)?;
    let Some(tf) = &sel.time_frame else {
        return aggregate(ds, &rows, &sel.measure, sel.aggregate, &sel.dimensions, None);
    };
    let col = ds.column(&tf.temporal_field)?;
    let range = tf.resolve_range();
    rows.retain(|&i| ds.rows[i][col].as_date().is_some_and(|d| range.contains(d)));
    let rows = restrict_weekdays(ds, &rows, tf)?;
    if !bucketed {
        let mut table = aggregate(ds, &rows, &sel.measure, sel.aggregate, &sel.dimensions, None)?;
        table.meta.range = Some(range);
        return Ok(table);
    }
    let buckets = bucketize(range, tf.bucket_unit, tf.bucket_policy)?;
    let spec = BucketSpec { field: &tf.temporal_field, buckets: &buckets, unit: tf.bucket_unit };
    let mut table = aggregate(ds, &rows, &sel.measure, sel.aggregate, &sel.dimensions, Some(spec))?;
    table.meta.range = Some(range);
    Ok(table)
}
