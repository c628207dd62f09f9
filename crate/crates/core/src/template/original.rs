//! Mirrors a dashboard widget as-is.

use super::color::{apply_color_scale, ColorScale};
use super::kinds::{display_name, label};
use super::spec::{Channel, ChannelType, ChartSpec, DataRow, Encoding, Layer, Mark};
use super::{TemplateError, TemplateKind};
use crate::data::{ChartKind, ResolvedTable, Widget};
use crate::scalar::Scalar;

/// A chart with the widget's mark, encodings and color scale.
///
/// Size variants are still attached but marked best-effort, since the
/// original chart was not designed for them.
pub fn preserve_original<T: Scalar>(
    widget: &Widget,
    table: &ResolvedTable<T>,
    scale: Option<&ColorScale>,
) -> Result<ChartSpec, TemplateError> {
    let t = table.cast::<f64>();
    let dims = &t.dimensions;
    let buckets: Vec<_> = {
        let mut b: Vec<_> = t.rows.iter().filter_map(|r| r.bucket).collect();
        b.sort();
        b.dedup();
        b
    };
    let categories = |i: usize| -> Vec<String> {
        let mut c: Vec<String> = t.rows.iter().map(|r| r.keys[i].to_string()).collect();
        c.sort();
        c.dedup();
        c
    };
    let measure = || Channel::new(t.measure.as_str(), ChannelType::Quantitative).with_axis(5);
    let period = || Channel::new("period", ChannelType::Temporal).with_axis(buckets.len().min(12));
    let nominal = |i: usize| Channel::new(dims[i].as_str(), ChannelType::Nominal).with_labels(categories(i));
    let legend = |i: usize| Channel::new(dims[i].as_str(), ChannelType::Nominal).with_legend();

    let (mark, encoding) = match &widget.chart_kind {
        ChartKind::Bar => {
            let x = if !dims.is_empty() { Some(nominal(0)) } else if t.is_bucketed() { Some(period()) } else { None };
            let color = match dims.len() {
                0 => None,
                1 => Some(legend(0)),
                _ => Some(legend(1)),
            };
            (Mark::Bar, Encoding { x, y: Some(measure()), color, ..Default::default() })
        }
        ChartKind::Line | ChartKind::Area => {
            let x = if t.is_bucketed() { Some(period()) } else { dims.first().map(|_| nominal(0)) };
            let color = if t.is_bucketed() && !dims.is_empty() { Some(legend(0)) } else { None };
            let mark = if widget.chart_kind == ChartKind::Line { Mark::Line } else { Mark::Area };
            (mark, Encoding { x, y: Some(measure()), color, ..Default::default() })
        }
        ChartKind::Heatmap => {
            let (x, y) = match (t.is_bucketed(), dims.len()) {
                (true, n) if n >= 1 => (period(), nominal(0)),
                (false, 2) => (nominal(0), nominal(1)),
                _ => {
                    return Err(TemplateError::ShapeMismatch {
                        kind: TemplateKind::PreserveOriginal,
                        reason: "a heatmap needs two axes of categories or periods".into(),
                    })
                }
            };
            let color = Channel::new(t.measure.as_str(), ChannelType::Quantitative).with_legend();
            (Mark::Rect, Encoding { x: Some(x), y: Some(y), color: Some(color), ..Default::default() })
        }
        ChartKind::Table => {
            let x = if !dims.is_empty() { Some(nominal(0)) } else if t.is_bucketed() { Some(period()) } else { None };
            let text = Channel::new(t.measure.as_str(), ChannelType::Quantitative);
            (Mark::Table, Encoding { x, text: Some(text), ..Default::default() })
        }
        ChartKind::SingleValue => {
            let text = Channel::new(t.measure.as_str(), ChannelType::Quantitative);
            (Mark::Text, Encoding { text: Some(text), ..Default::default() })
        }
        ChartKind::Other(k) => return Err(TemplateError::UnsupportedChartKind(k.clone())),
    };

    let mut rows: Vec<_> = t.rows.iter().collect();
    rows.sort_by(|a, b| a.bucket.cmp(&b.bucket).then_with(|| a.keys.cmp(&b.keys)));
    let data: Vec<DataRow> = rows
        .iter()
        .map(|r| {
            let mut d = DataRow::new();
            for (dim, k) in dims.iter().zip(&r.keys) {
                d.insert(dim.clone(), serde_json::Value::String(k.to_string()));
            }
            if let Some(b) = r.bucket {
                d.insert("period".into(), serde_json::Value::String(b.format("%Y-%m-%d").to_string()));
            }
            d.insert(
                t.measure.clone(),
                serde_json::Number::from_f64(r.value).map_or(serde_json::Value::Null, serde_json::Value::Number),
            );
            if !dims.is_empty() {
                d.insert("label".into(), serde_json::Value::String(label(r)));
            }
            d
        })
        .collect();
    let title = if widget.title.is_empty() { display_name(&t.measure) } else { widget.title.clone() };
    let spec = ChartSpec::new(TemplateKind::PreserveOriginal, title, vec![Layer { mark, encoding }], data, true);
    match scale {
        Some(s) => Ok(apply_color_scale(&spec, s)?.0),
        None => Ok(spec),
    }
}
