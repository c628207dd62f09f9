//! Declarative chart specification and its responsive size variants.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::color::ScaleBinding;
use super::TemplateKind;

/// Inline data row, keyed by field name.
pub type DataRow = BTreeMap<String, serde_json::Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mark {
    Bar,
    Line,
    Area,
    Point,
    Band,
    Text,
    Table,
    Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelType {
    Nominal,
    Ordinal,
    Quantitative,
    Temporal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Axis {
    pub tick_count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Channel {
    pub field: String,
    #[serde(rename = "type")]
    pub kind: ChannelType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub legend: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleBinding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stack: Option<String>,
}

impl Channel {
    pub fn new(field: impl Into<String>, kind: ChannelType) -> Self {
        Self { field: field.into(), kind, axis: None, legend: None, scale: None, sort: None, stack: None }
    }

    pub fn with_axis(mut self, tick_count: usize) -> Self {
        self.axis = Some(Axis { tick_count: tick_count as u32, labels: None });
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        let ticks = labels.len() as u32;
        self.axis = Some(Axis { tick_count: ticks, labels: Some(labels) });
        self
    }

    pub fn with_legend(mut self) -> Self {
        self.legend = Some(true);
        self
    }

    pub fn sorted(mut self, sort: &str) -> Self {
        self.sort = Some(sort.to_owned());
        self
    }

    pub fn stacked(mut self, stack: &str) -> Self {
        self.stack = Some(stack.to_owned());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Channel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Channel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y2: Option<Channel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Channel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<Channel>,
}

impl Encoding {
    pub fn channels(&self) -> impl Iterator<Item = &Channel> {
        [&self.x, &self.y, &self.y2, &self.color, &self.text].into_iter().flatten()
    }

    pub fn channels_mut(&mut self) -> impl Iterator<Item = &mut Channel> {
        [&mut self.x, &mut self.y, &mut self.y2, &mut self.color, &mut self.text].into_iter().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub mark: Mark,
    pub encoding: Encoding,
}

/// Rendering context width class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    /// Below 320 px.
    Narrow,
    /// 320 to 599 px.
    Medium,
    /// 600 px and up.
    Wide,
}

impl SizeClass {
    pub const ALL: [SizeClass; 3] = [SizeClass::Narrow, SizeClass::Medium, SizeClass::Wide];

    pub fn from_width(px: u32) -> Self {
        match px {
            0..=319 => SizeClass::Narrow,
            320..=599 => SizeClass::Medium,
            _ => SizeClass::Wide,
        }
    }
}

impl std::str::FromStr for SizeClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "narrow" => Ok(SizeClass::Narrow),
            "medium" => Ok(SizeClass::Medium),
            "wide" => Ok(SizeClass::Wide),
            other => other
                .parse::<u32>()
                .map(SizeClass::from_width)
                .map_err(|_| format!("unknown size class `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SizeVariant {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ticks: Option<u32>,
    pub show_legend: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub best_effort: bool,
}

/// Overrides for each size class.
pub fn default_variants(best_effort: bool) -> BTreeMap<SizeClass, SizeVariant> {
    BTreeMap::from([
        (SizeClass::Narrow, SizeVariant { max_ticks: Some(4), show_legend: false, label_limit: Some(8), best_effort }),
        (SizeClass::Medium, SizeVariant { max_ticks: Some(7), show_legend: true, label_limit: None, best_effort }),
        (SizeClass::Wide, SizeVariant { max_ticks: None, show_legend: true, label_limit: None, best_effort }),
    ])
}

/// A layered chart with its data inlined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChartSpec {
    pub template: TemplateKind,
    pub title: String,
    /// Mark of the first layer.
    pub mark: Mark,
    pub layers: Vec<Layer>,
    pub inline_data: Vec<DataRow>,
    pub size_variants: BTreeMap<SizeClass, SizeVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_scale: Option<String>,
    /// Set once a narrow or medium variant has been applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<SizeClass>,
    /// Replaces the legend when it is hidden.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub legend_note: Option<String>,
}

impl ChartSpec {
    pub fn new(template: TemplateKind, title: String, layers: Vec<Layer>, data: Vec<DataRow>, best_effort: bool) -> Self {
        Self {
            template,
            title,
            mark: layers.first().map_or(Mark::Text, |l| l.mark),
            layers,
            inline_data: data,
            size_variants: default_variants(best_effort),
            color_scale: None,
            size: None,
            legend_note: None,
        }
    }

    pub fn channels(&self) -> impl Iterator<Item = &Channel> {
        self.layers.iter().flat_map(|l| l.encoding.channels())
    }

    /// Color channel of the first layer that has one.
    pub fn color_channel(&self) -> Option<&Channel> {
        self.layers.iter().find_map(|l| l.encoding.color.as_ref())
    }

    /// Every encoded field is present in every data row, and all size classes have overrides.
    pub fn check_invariants(&self) -> Result<(), String> {
        for c in self.channels() {
            if let Some(row) = self.inline_data.iter().find(|r| !r.contains_key(&c.field)) {
                return Err(format!("field `{}` missing from data row {row:?}", c.field));
            }
        }
        let classes: BTreeSet<_> = self.size_variants.keys().collect();
        if classes.len() != SizeClass::ALL.len() {
            return Err("size variants incomplete".to_owned());
        }
        Ok(())
    }

    /// Largest tick count over all axes.
    pub fn max_tick_count(&self) -> u32 {
        self.channels().filter_map(|c| c.axis.as_ref()).map(|a| a.tick_count).max().unwrap_or(0)
    }

    pub fn shows_legend(&self) -> bool {
        self.channels().any(|c| c.legend == Some(true))
    }
}

/// Applies the narrow or medium overrides. Wide is the spec itself.
pub fn responsive_variant(spec: &ChartSpec, size: SizeClass) -> ChartSpec {
    if size == SizeClass::Wide {
        return spec.clone();
    }
    let variant = spec
        .size_variants
        .get(&size)
        .cloned()
        .unwrap_or_else(|| default_variants(false).remove(&size).expect("defaults cover every class"));
    let mut out = spec.clone();
    out.size = Some(size);
    let mut hid_color = None;
    for layer in &mut out.layers {
        for channel in layer.encoding.channels_mut() {
            if let Some(axis) = &mut channel.axis {
                if let Some(max) = variant.max_ticks {
                    axis.tick_count = axis.tick_count.min(max);
                }
                if let (Some(limit), Some(labels)) = (variant.label_limit, &mut axis.labels) {
                    for l in labels.iter_mut() {
                        *l = elide(l, limit);
                    }
                }
            }
        }
        if let Some(color) = &mut layer.encoding.color {
            if !variant.show_legend && color.legend == Some(true) {
                color.legend = Some(false);
                hid_color.get_or_insert_with(|| color.field.clone());
            }
        }
    }
    if let Some(field) = hid_color {
        out.legend_note = Some(format!("Color encodes {field}"));
    }
    out
}

/// Shortens to at most `limit` characters, ending in an ellipsis when cut.
fn elide(label: &str, limit: usize) -> String {
    if label.chars().count() <= limit {
        return label.to_owned();
    }
    let mut s: String = label.chars().take(limit.saturating_sub(1)).collect();
    s.push('…');
    s
}
