//! Templated chart specifications and captions.
//!
//! [`instantiate`] turns a resolved table into a [`ChartSpec`] and a one
//! sentence [`Caption`] for one of eight presentation tasks.
//! [`preserve_original`] mirrors a dashboard widget instead.

mod color;
pub mod format;
mod kinds;
mod original;
mod spec;
pub mod stats;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use color::{apply_color_scale, ColorScale, ColorScaleKind, ScaleBinding, FALLBACK_PALETTE};
pub use original::preserve_original;
pub use spec::{
    default_variants, responsive_variant, Axis, Channel, ChannelType, ChartSpec, DataRow, Encoding, Layer, Mark,
    SizeClass, SizeVariant,
};

use crate::data::ResolvedTable;
use crate::scalar::Scalar;
use crate::timeframe::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemplateKind {
    CategoricalBreakdown,
    GoalBreakdown,
    RatioBreakdown,
    TimeSeries,
    ValueVsThreshold,
    SeriesVsThreshold,
    TimeOverTime,
    TrendCorrelation,
    PreserveOriginal,
}

impl TemplateKind {
    pub const TEMPLATED: [TemplateKind; 8] = [
        TemplateKind::CategoricalBreakdown,
        TemplateKind::GoalBreakdown,
        TemplateKind::RatioBreakdown,
        TemplateKind::TimeSeries,
        TemplateKind::ValueVsThreshold,
        TemplateKind::SeriesVsThreshold,
        TemplateKind::TimeOverTime,
        TemplateKind::TrendCorrelation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateKind::CategoricalBreakdown => "categorical-breakdown",
            TemplateKind::GoalBreakdown => "goal-breakdown",
            TemplateKind::RatioBreakdown => "ratio-breakdown",
            TemplateKind::TimeSeries => "time-series",
            TemplateKind::ValueVsThreshold => "value-vs-threshold",
            TemplateKind::SeriesVsThreshold => "series-vs-threshold",
            TemplateKind::TimeOverTime => "time-over-time",
            TemplateKind::TrendCorrelation => "trend-correlation",
            TemplateKind::PreserveOriginal => "preserve-original",
        }
    }

    /// Whether the kind reads one row per time bucket rather than per group.
    pub fn wants_buckets(self) -> bool {
        matches!(
            self,
            TemplateKind::TimeSeries
                | TemplateKind::SeriesVsThreshold
                | TemplateKind::TimeOverTime
                | TemplateKind::TrendCorrelation
        )
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TemplateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateKind::TEMPLATED
            .into_iter()
            .chain([TemplateKind::PreserveOriginal])
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown template kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TemplateParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<f64>,
    /// `[low, high]`, inclusive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison_offset: Option<Span>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakdown_dimension: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_measure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_n: Option<usize>,
    #[serde(default = "yes")]
    pub include_chart: bool,
    #[serde(default = "yes")]
    pub include_caption: bool,
}

fn yes() -> bool {
    true
}

impl Default for TemplateParams {
    fn default() -> Self {
        Self {
            goal: None,
            threshold: None,
            comparison_offset: None,
            breakdown_dimension: None,
            second_measure: None,
            top_n: None,
            include_chart: true,
            include_caption: true,
        }
    }
}

impl TemplateParams {
    pub fn validate(&self, kind: TemplateKind) -> Result<(), TemplateError> {
        let invalid = |m: &str| Err(TemplateError::InvalidParam(m.to_owned()));
        if !self.include_chart && !self.include_caption {
            return invalid("at least one of includeChart and includeCaption must be set");
        }
        if self.top_n == Some(0) {
            return invalid("topN must be positive");
        }
        if let Some([low, high]) = self.threshold {
            if !(low.is_finite() && high.is_finite()) || low > high {
                return invalid("threshold must be a finite [low, high] with low <= high");
            }
        }
        if let Some(g) = self.goal {
            if !g.is_finite() || g <= 0.0 {
                return invalid("goal must be a positive number");
            }
        }
        if let Some(o) = &self.comparison_offset {
            o.validate().map_err(|e| TemplateError::InvalidParam(e.to_string()))?;
        }
        let missing = |name: &'static str| Err(TemplateError::MissingParam(name));
        match kind {
            TemplateKind::GoalBreakdown if self.goal.is_none() => missing("goal"),
            TemplateKind::ValueVsThreshold | TemplateKind::SeriesVsThreshold if self.threshold.is_none() => {
                missing("threshold")
            }
            TemplateKind::TimeOverTime if self.comparison_offset.is_none() => missing("comparisonOffset"),
            _ => Ok(()),
        }
    }
}

/// A named number or label behind a caption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StatValue {
    Number(f64),
    Text(String),
}

impl StatValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            StatValue::Number(n) => Some(*n),
            StatValue::Text(_) => None,
        }
    }
}

impl From<f64> for StatValue {
    fn from(n: f64) -> Self {
        StatValue::Number(n)
    }
}

impl From<usize> for StatValue {
    fn from(n: usize) -> Self {
        StatValue::Number(n as f64)
    }
}

impl From<String> for StatValue {
    fn from(s: String) -> Self {
        StatValue::Text(s)
    }
}

impl From<&str> for StatValue {
    fn from(s: &str) -> Self {
        StatValue::Text(s.to_owned())
    }
}

pub type Stats = BTreeMap<String, StatValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Caption {
    pub text: String,
    pub stats: Stats,
}

/// Output of a template: either part may be switched off by the params.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rendering {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<Caption>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemplateError {
    #[error("table shape does not fit {kind}: {reason}")]
    ShapeMismatch { kind: TemplateKind, reason: String },
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("{0} needs at least one row")]
    EmptyTable(TemplateKind),
    #[error("a {scale:?} color scale cannot color a {channel:?} encoding")]
    IncompatibleScaleKind { scale: ColorScaleKind, channel: ChannelType },
    #[error("chart kind `{0}` cannot be preserved")]
    UnsupportedChartKind(String),
    #[error("preserve-original is not a template")]
    NotTemplated,
}

/// Builds the chart and caption for `kind`. Deterministic in its inputs.
pub fn instantiate<T: Scalar>(
    kind: TemplateKind,
    table: &ResolvedTable<T>,
    params: &TemplateParams,
    scale: Option<&ColorScale>,
) -> Result<Rendering, TemplateError> {
    params.validate(kind)?;
    let built = kinds::build(kind, &table.cast::<f64>(), params)?;
    let chart = if params.include_chart {
        let mut spec = ChartSpec::new(kind, built.title, built.layers, built.data, false);
        if let Some(scale) = scale {
            if spec.color_channel().is_some() {
                spec = apply_color_scale(&spec, scale)?.0;
            }
        }
        Some(spec)
    } else {
        None
    };
    let caption = params.include_caption.then_some(Caption { text: built.text, stats: built.stats });
    Ok(Rendering { chart, caption })
}

/// The unformatted numbers and labels a caption is built from.
pub fn render_caption_stats<T: Scalar>(
    kind: TemplateKind,
    table: &ResolvedTable<T>,
    params: &TemplateParams,
) -> Result<Stats, TemplateError> {
    params.validate(kind)?;
    Ok(kinds::build(kind, &table.cast::<f64>(), params)?.stats)
}
