use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::aggregate::Aggregate;
use super::catalog::Catalog;
use super::filter::FilterPredicate;
use super::value::{FieldKind, ValueType};
use super::DataError;
use crate::template::ColorScale;

/// Chart type of a dashboard widget.
///
/// Unknown kinds survive deserialization as [`ChartKind::Other`] so that a
/// dashboard authored elsewhere can still be loaded; they just cannot be
/// preserved as-is in a snapshot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum ChartKind {
    Bar,
    Line,
    Area,
    Heatmap,
    Table,
    SingleValue,
    Other(String),
}

impl From<String> for ChartKind {
    fn from(s: String) -> Self {
        match s.as_str() {
            "bar" => ChartKind::Bar,
            "line" => ChartKind::Line,
            "area" => ChartKind::Area,
            "heatmap" => ChartKind::Heatmap,
            "table" => ChartKind::Table,
            "single-value" => ChartKind::SingleValue,
            _ => ChartKind::Other(s),
        }
    }
}

impl From<ChartKind> for String {
    fn from(k: ChartKind) -> Self {
        k.to_string()
    }
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChartKind::Bar => "bar",
            ChartKind::Line => "line",
            ChartKind::Area => "area",
            ChartKind::Heatmap => "heatmap",
            ChartKind::Table => "table",
            ChartKind::SingleValue => "single-value",
            ChartKind::Other(s) => s,
        })
    }
}

/// One dashboard cell bound to a single dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Widget {
    pub id: String,
    pub title: String,
    pub chart_kind: ChartKind,
    pub dataset_id: String,
    pub measures: Vec<String>,
    #[serde(default)]
    pub dimensions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temporal_field: Option<String>,
    #[serde(default)]
    pub filters: Vec<FilterPredicate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_scale: Option<String>,
    #[serde(default)]
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Dashboard {
    pub id: String,
    pub title: String,
    pub widgets: Vec<Widget>,
    #[serde(default)]
    pub global_filters: Vec<FilterPredicate>,
    #[serde(default)]
    pub color_scales: BTreeMap<String, ColorScale>,
}

impl Dashboard {
    pub fn widget(&self, id: &str) -> Result<&Widget, DataError> {
        self.widgets.iter().find(|w| w.id == id).ok_or_else(|| DataError::UnknownWidget(id.to_owned()))
    }

    pub fn color_scale(&self, name: &str) -> Option<&ColorScale> {
        self.color_scales.get(name)
    }

    /// Checks references against the datasets in `catalog`.
    pub fn validate(&self, catalog: &Catalog) -> Result<(), DataError> {
        let invalid = |msg: String| Err(DataError::InvalidDashboard(msg));
        let mut ids = BTreeSet::new();
        let mut datasets = BTreeSet::new();
        for w in &self.widgets {
            if !ids.insert(w.id.as_str()) {
                return invalid(format!("duplicate widget id `{}`", w.id));
            }
            let ds = catalog.dataset(&w.dataset_id)?;
            datasets.insert(w.dataset_id.as_str());
            if w.measures.is_empty() {
                return invalid(format!("widget `{}` has no measure", w.id));
            }
            for m in &w.measures {
                match ds.field(m) {
                    Some(f) if f.value_type == ValueType::Number => {}
                    Some(_) => return Err(DataError::NonNumericMeasure(m.clone())),
                    None => return Err(DataError::UnknownField(m.clone())),
                }
            }
            if w.dimensions.len() > 2 {
                return invalid(format!("widget `{}` has more than two dimensions", w.id));
            }
            for d in &w.dimensions {
                ds.field(d).ok_or_else(|| DataError::UnknownField(d.clone()))?;
            }
            if let Some(t) = &w.temporal_field {
                match ds.field(t) {
                    Some(f) if f.kind == FieldKind::Temporal => {}
                    Some(_) => return invalid(format!("`{t}` is not a temporal field")),
                    None => return Err(DataError::UnknownField(t.clone())),
                }
            }
            for f in &w.filters {
                f.validate(ds)?;
            }
            if let Some(s) = &w.color_scale {
                if !self.color_scales.contains_key(s) {
                    return invalid(format!("widget `{}` references unknown color scale `{s}`", w.id));
                }
            }
        }
        for g in &self.global_filters {
            let mut applies = false;
            for id in &datasets {
                let ds = catalog.dataset(id)?;
                if ds.field(&g.field).is_some() {
                    g.validate(ds)?;
                    applies = true;
                }
            }
            if !applies {
                return invalid(format!("global filter on `{}` matches no widget dataset", g.field));
            }
        }
        Ok(())
    }
}
