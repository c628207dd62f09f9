use super::SnapshotError;
use crate::data::{resolve_selection, resolve_selection_totals, Catalog, ChartKind, Comparison, Selection, Widget};
use crate::template::{instantiate, preserve_original, Caption, ChartSpec, ColorScale, TemplateKind, TemplateParams};
use crate::timeframe::{detect_gaps, Bucket};
use crate::Table;

/// Chart, caption and gap list for one selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub chart: Option<ChartSpec>,
    pub caption: Option<Caption>,
    pub gaps: Vec<Bucket>,
}

fn wants_buckets(kind: TemplateKind, widget: &Widget) -> bool {
    match kind {
        TemplateKind::PreserveOriginal => {
            matches!(widget.chart_kind, ChartKind::Line | ChartKind::Area | ChartKind::Heatmap)
        }
        k => k.wants_buckets(),
    }
}

fn resolve(sel: &Selection, catalog: &Catalog, bucketed: bool) -> Result<Table, SnapshotError> {
    Ok(if bucketed { resolve_selection(sel, catalog)? } else { resolve_selection_totals(sel, catalog)? })
}

/// Resolves `sel` and runs it through the template (or mirrors the widget).
pub fn render_component(
    sel: &Selection,
    kind: TemplateKind,
    params: &TemplateParams,
    widget: &Widget,
    scale: Option<&ColorScale>,
    catalog: &Catalog,
) -> Result<Rendered, SnapshotError> {
    let bucketed = wants_buckets(kind, widget);
    let mut table = resolve(sel, catalog, bucketed)?;
    if let Some(second) = &params.second_measure {
        let other = Selection { measure: second.clone(), ..sel.clone() };
        other.validate(catalog.dataset(&sel.dataset_id)?)?;
        table = table.with_paired(&resolve(&other, catalog, bucketed)?);
    }
    if let (TemplateKind::TimeOverTime, Some(offset), Some(tf)) = (kind, params.comparison_offset, &sel.time_frame) {
        let prior = Selection { time_frame: Some(tf.shifted_back(offset)), ..sel.clone() };
        let t = resolve(&prior, catalog, true)?;
        table.comparison = Some(Comparison { offset, rows: t.rows, meta: t.meta });
    }
    let gaps = match &sel.time_frame {
        Some(tf) if bucketed => detect_gaps(&table, tf),
        Some(tf) => detect_gaps(&resolve_selection::<f64>(sel, catalog)?, tf),
        None => Vec::new(),
    };
    if kind == TemplateKind::PreserveOriginal {
        let chart = preserve_original(widget, &table, scale)?;
        return Ok(Rendered { chart: Some(chart), caption: None, gaps });
    }
    let r = instantiate(kind, &table, params, scale)?;
    Ok(Rendered { chart: r.chart, caption: r.caption, gaps })
}
