//! Named color scales carried over from dashboards.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::spec::{ChannelType, ChartSpec};
use super::TemplateError;

/// Assigned in order to categories the scale does not map.
pub const FALLBACK_PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorScaleKind {
    Categorical,
    Sequential,
    Diverging,
}

impl ColorScaleKind {
    fn fits(self, channel: ChannelType) -> bool {
        match self {
            ColorScaleKind::Categorical => matches!(channel, ChannelType::Nominal | ChannelType::Ordinal),
            ColorScaleKind::Sequential | ColorScaleKind::Diverging => channel == ChannelType::Quantitative,
        }
    }
}

/// Value-to-color mapping. Sequential and diverging scales map stop positions
/// (`"0"`, `"0.5"`, `"1"`) rather than category values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorScale {
    pub name: String,
    pub kind: ColorScaleKind,
    pub mapping: BTreeMap<String, String>,
}

/// A color scale resolved against the values it colors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleBinding {
    pub name: String,
    pub kind: ColorScaleKind,
    pub domain: Vec<String>,
    pub range: Vec<String>,
    /// Categories that got a palette color because the scale lacks them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fallbacks: Vec<String>,
}

/// Binds every color encoding of `spec` to `scale`.
///
/// Returns the bound spec and the categories that fell back to the default
/// palette. A spec without a color encoding only records the scale name.
pub fn apply_color_scale(spec: &ChartSpec, scale: &ColorScale) -> Result<(ChartSpec, Vec<String>), TemplateError> {
    let mut out = spec.clone();
    out.color_scale = Some(scale.name.clone());
    let mut all_fallbacks = Vec::new();
    let data = spec.inline_data.clone();
    for layer in &mut out.layers {
        let Some(color) = &mut layer.encoding.color else { continue };
        if !scale.kind.fits(color.kind) {
            return Err(TemplateError::IncompatibleScaleKind { scale: scale.kind, channel: color.kind });
        }
        let binding = match scale.kind {
            ColorScaleKind::Categorical => {
                let mut domain: Vec<String> = Vec::new();
                for row in &data {
                    if let Some(v) = row.get(&color.field) {
                        let s = display(v);
                        if !domain.contains(&s) {
                            domain.push(s);
                        }
                    }
                }
                let mut fallbacks = Vec::new();
                let range = domain
                    .iter()
                    .map(|v| match scale.mapping.get(v) {
                        Some(c) => c.clone(),
                        None => {
                            let c = FALLBACK_PALETTE[fallbacks.len() % FALLBACK_PALETTE.len()].to_owned();
                            fallbacks.push(v.clone());
                            c
                        }
                    })
                    .collect();
                ScaleBinding { name: scale.name.clone(), kind: scale.kind, domain, range, fallbacks }
            }
            ColorScaleKind::Sequential | ColorScaleKind::Diverging => {
                let mut stops: Vec<(f64, &String)> =
                    scale.mapping.iter().filter_map(|(k, c)| k.parse::<f64>().ok().map(|p| (p, c))).collect();
                stops.sort_by(|a, b| a.0.total_cmp(&b.0));
                ScaleBinding {
                    name: scale.name.clone(),
                    kind: scale.kind,
                    domain: stops.iter().map(|(p, _)| p.to_string()).collect(),
                    range: stops.iter().map(|(_, c)| (*c).clone()).collect(),
                    fallbacks: Vec::new(),
                }
            }
        };
        for f in &binding.fallbacks {
            if !all_fallbacks.contains(f) {
                all_fallbacks.push(f.clone());
            }
        }
        color.scale = Some(binding);
    }
    Ok((out, all_fallbacks))
}

fn display(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
