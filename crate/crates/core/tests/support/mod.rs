#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use snapshot_hub_core::data::{
    extract_selection, load_dataset, Catalog, Dashboard, SelectionOverrides, SourceFormat,
};
use snapshot_hub_core::snapshot::{render_component, Rendered};
use snapshot_hub_core::template::{TemplateKind, TemplateParams};
use snapshot_hub_core::timeframe::{Span, TimeFrame, TimeUnit};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

pub fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join(name)).unwrap()
}

/// Sales and tickets datasets plus the demo dashboard.
pub fn catalog() -> Catalog {
    let mut c = Catalog::default();
    for (id, name) in [("sales", "Sales"), ("tickets", "Support tickets")] {
        let src = fixture_text(&format!("{id}.csv"));
        c.insert_dataset(load_dataset(id, name, src.as_bytes(), SourceFormat::Csv, None).unwrap());
    }
    let dashboard: Dashboard = serde_json::from_str(&fixture_text("demo-dashboard.json")).unwrap();
    c.insert_dashboard(dashboard).unwrap();
    c
}

pub fn april(field: &str, bucket: TimeUnit) -> TimeFrame {
    TimeFrame::new(field, date("2022-04-01"), Span::new(1, TimeUnit::Month), bucket).unwrap()
}

/// One instantiation per templated kind on the sales fixture.
pub struct Case {
    pub name: &'static str,
    pub kind: TemplateKind,
    pub widget: &'static str,
    pub overrides: SelectionOverrides,
    pub params: TemplateParams,
}

pub fn cases() -> Vec<Case> {
    let frame = |unit| SelectionOverrides { time_frame: Some(april("order_date", unit)), ..Default::default() };
    let by = |dim: &str, unit| SelectionOverrides { dimensions: Some(vec![dim.to_owned()]), ..frame(unit) };
    vec![
        Case {
            name: "categorical-breakdown",
            kind: TemplateKind::CategoricalBreakdown,
            widget: "sales-by-region",
            overrides: frame(TimeUnit::Week),
            params: TemplateParams::default(),
        },
        Case {
            name: "goal-breakdown",
            kind: TemplateKind::GoalBreakdown,
            widget: "sales-by-region",
            overrides: frame(TimeUnit::Week),
            params: TemplateParams { goal: Some(40_000.0), ..Default::default() },
        },
        Case {
            name: "ratio-breakdown",
            kind: TemplateKind::RatioBreakdown,
            widget: "sales-by-region",
            overrides: by("product", TimeUnit::Week),
            params: TemplateParams::default(),
        },
        Case {
            name: "time-series",
            kind: TemplateKind::TimeSeries,
            widget: "sales-trend",
            overrides: frame(TimeUnit::Week),
            params: TemplateParams::default(),
        },
        Case {
            name: "value-vs-threshold",
            kind: TemplateKind::ValueVsThreshold,
            widget: "sales-trend",
            overrides: frame(TimeUnit::Week),
            params: TemplateParams { threshold: Some([120_000.0, 160_000.0]), ..Default::default() },
        },
        Case {
            name: "series-vs-threshold",
            kind: TemplateKind::SeriesVsThreshold,
            widget: "sales-trend",
            overrides: frame(TimeUnit::Week),
            params: TemplateParams { threshold: Some([25_000.0, 40_000.0]), ..Default::default() },
        },
        Case {
            name: "time-over-time",
            kind: TemplateKind::TimeOverTime,
            widget: "sales-trend",
            overrides: frame(TimeUnit::Week),
            params: TemplateParams { comparison_offset: Some(Span::new(1, TimeUnit::Month)), ..Default::default() },
        },
        Case {
            name: "trend-correlation",
            kind: TemplateKind::TrendCorrelation,
            widget: "sales-trend",
            overrides: frame(TimeUnit::Day),
            params: TemplateParams { second_measure: Some("profit".into()), ..Default::default() },
        },
    ]
}

pub fn render(c: &Case, catalog: &Catalog) -> Rendered {
    let dashboard = catalog.dashboard("ops").unwrap();
    let sel = extract_selection(dashboard, c.widget, &c.overrides, catalog).unwrap();
    let widget = dashboard.widget(c.widget).unwrap();
    let scale = widget.color_scale.as_deref().and_then(|n| dashboard.color_scale(n));
    render_component(&sel, c.kind, &c.params, widget, scale, catalog).unwrap()
}

/// The serialized form pinned by the golden files.
pub fn golden_text(r: &Rendered) -> String {
    let doc = serde_json::json!({ "chartSpec": r.chart, "caption": r.caption });
    let mut s = snapshot_hub_core::canon::to_canonical_pretty(&doc);
    s.push('\n');
    s
}

/// Compares against `tests/golden/<name>.json`; `BLESS=1` rewrites the file.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_dir().join(format!("{name}.json"));
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        let line = expected.lines().zip(actual.lines()).position(|(a, b)| a != b).map_or(0, |i| i + 1);
        Err(format!("{name}: differs from golden at line {line}"))
    }
}

/// Boundary `k` of the period grid seeded at `seed`, computed with chrono's
/// own month arithmetic (which clamps to month end).
pub fn grid_boundary(seed: NaiveDate, span: Span, k: u32) -> NaiveDate {
    let n = span.count * k;
    match span.unit {
        TimeUnit::Day => seed + chrono::Days::new(n as u64),
        TimeUnit::Week => seed + chrono::Days::new(7 * n as u64),
        TimeUnit::Month => seed.checked_add_months(chrono::Months::new(n)).unwrap(),
        TimeUnit::Quarter => seed.checked_add_months(chrono::Months::new(3 * n)).unwrap(),
        TimeUnit::Year => seed.checked_add_months(chrono::Months::new(12 * n)).unwrap(),
    }
}

/// Anchor `advance` should pick: the start of the last grid period that ends
/// on or before `now`, if that period ends after the current range.
pub fn grid_walk_anchor(tf: &TimeFrame, now: NaiveDate) -> NaiveDate {
    let seed = tf.origin.unwrap_or(tf.anchor);
    let current_end = tf.resolve_range().end;
    let mut best = None;
    let mut k = 0;
    while grid_boundary(seed, tf.span, k + 1) <= now {
        best = Some((grid_boundary(seed, tf.span, k), grid_boundary(seed, tf.span, k + 1)));
        k += 1;
    }
    match best {
        Some((start, end)) if end > current_end => start,
        _ => tf.anchor,
    }
}

pub mod agg_oracle {
    use std::collections::BTreeMap;

    use chrono::NaiveDate;
    use rand::Rng;
    use snapshot_hub_core::data::{aggregate, Aggregate, BucketSpec, Dataset, Field, ResolvedTable, Value};
    use snapshot_hub_core::timeframe::{bucketize, Bucket, BucketPolicy, DateRange, TimeUnit};

    pub struct Case {
        pub ds: Dataset,
        pub group_by: Vec<String>,
        pub agg: Aggregate,
        pub buckets: Option<(TimeUnit, Vec<Bucket>)>,
    }

    const AGGS: [Aggregate; 5] = [Aggregate::Sum, Aggregate::Mean, Aggregate::Count, Aggregate::Min, Aggregate::Max];
    const UNITS: [TimeUnit; 3] = [TimeUnit::Day, TimeUnit::Week, TimeUnit::Month];

    /// Up to 1000 rows, 4 dimensions and one of 3 bucket units.
    pub fn random_case(rng: &mut impl Rng) -> Case {
        let dims = rng.gen_range(0..=4);
        let n = rng.gen_range(0..=1000);
        let mut schema: Vec<Field> = (0..dims).map(|d| Field::dimension(format!("d{d}"))).collect();
        schema.push(Field::measure("m"));
        schema.push(Field::temporal("t"));
        let start = NaiveDate::from_ymd_opt(2022, 1, 1).unwrap();
        let domain: Vec<usize> = (0..dims).map(|_| rng.gen_range(1..=5)).collect();
        let rows: Vec<Vec<Value>> = (0..n)
            .map(|_| {
                let mut r: Vec<Value> =
                    domain.iter().map(|&k| Value::Text(format!("v{}", rng.gen_range(0..k)))).collect();
                let m = if rng.gen_bool(0.1) { rng.gen_range(-5..5) as f64 } else { rng.gen_range(-1e6..1e6) };
                r.push(Value::Number(m));
                r.push(Value::Date(start + chrono::Days::new(rng.gen_range(0..200))));
                r
            })
            .collect();
        let ds = Dataset::new("r", "random", schema, rows).unwrap();
        let group_by = (0..dims).filter(|_| rng.gen_bool(0.6)).map(|d| format!("d{d}")).collect();
        let agg = AGGS[rng.gen_range(0..AGGS.len())];
        let buckets = rng.gen_bool(0.5).then(|| {
            let unit = UNITS[rng.gen_range(0..UNITS.len())];
            let lo = start + chrono::Days::new(rng.gen_range(0..60));
            let hi = lo + chrono::Days::new(rng.gen_range(31..160));
            let policy = if rng.gen_bool(0.5) { BucketPolicy::AnchorAligned } else { BucketPolicy::CalendarAligned };
            (unit, bucketize(DateRange::new(lo, hi).unwrap(), unit, policy).unwrap())
        });
        Case { ds, group_by, agg, buckets }
    }

    pub fn run(c: &Case) -> ResolvedTable<f64> {
        let all: Vec<usize> = (0..c.ds.len()).collect();
        let spec = c.buckets.as_ref().map(|(unit, b)| BucketSpec { field: "t", buckets: b, unit: *unit });
        aggregate(&c.ds, &all, "m", c.agg, &c.group_by, spec).unwrap()
    }

    pub type Key = (Vec<String>, Option<NaiveDate>);
    pub type Groups = BTreeMap<Key, f64>;

    fn text(v: &Value) -> String {
        match v {
            Value::Text(s) => s.clone(),
            other => panic!("dimension value {other:?}"),
        }
    }

    /// Nested-loop group-by: every row is compared against every known group.
    pub fn brute_force(c: &Case) -> Groups {
        let cols: Vec<usize> = c.group_by.iter().map(|g| c.ds.schema.iter().position(|f| &f.name == g).unwrap()).collect();
        let m = c.ds.schema.iter().position(|f| f.name == "m").unwrap();
        let t = c.ds.schema.iter().position(|f| f.name == "t").unwrap();
        let mut groups: Vec<(Key, Vec<f64>)> = Vec::new();
        for row in &c.ds.rows {
            let bucket = match &c.buckets {
                None => None,
                Some((_, bs)) => {
                    let Value::Date(d) = row[t] else { unreachable!() };
                    match bs.iter().find(|b| b.range.start <= d && d < b.range.end) {
                        Some(b) => Some(b.range.start),
                        None => continue,
                    }
                }
            };
            let key = (cols.iter().map(|&i| text(&row[i])).collect::<Vec<_>>(), bucket);
            let Value::Number(v) = row[m] else { unreachable!() };
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, vs)) => vs.push(v),
                None => groups.push((key, vec![v])),
            }
        }
        groups
            .into_iter()
            .map(|(k, vs)| {
                let v = match c.agg {
                    Aggregate::Sum => vs.iter().sum(),
                    Aggregate::Mean => vs.iter().sum::<f64>() / vs.len() as f64,
                    Aggregate::Count => vs.len() as f64,
                    Aggregate::Min => vs.iter().cloned().fold(f64::INFINITY, f64::min),
                    Aggregate::Max => vs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                };
                (k, v)
            })
            .collect()
    }

    pub fn groups_of(t: &ResolvedTable<f64>) -> Groups {
        t.rows.iter().map(|r| ((r.keys.iter().map(text).collect(), r.bucket), r.value)).collect()
    }

    /// Same group set and every value within 1e-9 relative.
    pub fn agrees(actual: &Groups, expected: &Groups) -> Result<(), String> {
        if actual.keys().ne(expected.keys()) {
            return Err(format!("group sets differ: {} vs {} groups", actual.len(), expected.len()));
        }
        for (k, e) in expected {
            let a = actual[k];
            if (a - e).abs() > 1e-9 * e.abs().max(1.0) {
                return Err(format!("{k:?}: {a} vs {e}"));
            }
        }
        Ok(())
    }
}

/// A small collaboration setup: ana (sales), bo (sales and tickets), cy (no
/// grants), dee (tickets); channels sales-team (ana, bo, cy), exec (ana, bo)
/// and ops (bo, dee).
pub mod world {
    use chrono::NaiveDate;
    use snapshot_hub_core::collab::{Channel, Ctx, Platform, User, Visibility};
    use snapshot_hub_core::data::{Catalog, SelectionOverrides, Value};
    use snapshot_hub_core::snapshot::{
        Anchor, Annotation, AnnotationKind, AnnotationTarget, ComponentRequest, ComposeRequest,
        CurationMethod, InteractivityControl, SnapshotStore, UpdatePolicy,
    };
    use snapshot_hub_core::telemetry::TelemetryLog;
    use snapshot_hub_core::template::{TemplateKind, TemplateParams};
    use snapshot_hub_core::timeframe::{Span, TimeUnit};

    pub struct World {
        pub catalog: Catalog,
        pub store: SnapshotStore,
        pub platform: Platform,
        pub log: TelemetryLog,
    }

    fn user(id: &str, grants: &[&str]) -> User {
        User { id: id.into(), display_name: id.to_uppercase(), dataset_grants: grants.iter().map(|s| s.to_string()).collect() }
    }

    fn channel(id: &str, visibility: Visibility, members: &[&str]) -> Channel {
        Channel { id: id.into(), name: id.into(), visibility, members: members.iter().map(|s| s.to_string()).collect() }
    }

    impl World {
        pub fn new() -> Self {
            let catalog = super::catalog();
            let mut platform = Platform::default();
            for u in [user("ana", &["sales"]), user("bo", &["sales", "tickets"]), user("cy", &[]), user("dee", &["tickets"])] {
                platform.add_user(u, &catalog).unwrap();
            }
            platform.add_channel(channel("sales-team", Visibility::Public, &["ana", "bo", "cy"])).unwrap();
            platform.add_channel(channel("exec", Visibility::Private, &["ana", "bo"])).unwrap();
            platform.add_channel(channel("ops", Visibility::Public, &["bo", "dee"])).unwrap();
            Self { catalog, store: SnapshotStore::default(), platform, log: TelemetryLog::default() }
        }

        pub fn ctx(&self) -> Ctx<'_> {
            Ctx { catalog: &self.catalog, snapshots: &self.store }
        }

        /// Composes a one-component snapshot of `widget` over April, with a
        /// call-to-action region control on breakdowns.
        pub fn snapshot(&mut self, creator: &str, widget: &str, reshareable: bool, now: NaiveDate) -> String {
            let (kind, field) = match widget {
                "tickets-by-team" => (TemplateKind::CategoricalBreakdown, "opened"),
                "sales-trend" => (TemplateKind::TimeSeries, "order_date"),
                _ => (TemplateKind::CategoricalBreakdown, "order_date"),
            };
            let req = ComponentRequest {
                dashboard_id: "ops".into(),
                widget_id: widget.into(),
                overrides: SelectionOverrides { time_frame: Some(super::april(field, TimeUnit::Week)), ..Default::default() },
                template_kind: kind,
                params: TemplateParams::default(),
                creator_caption: None,
            };
            let c = self.store.create_component(&req, creator, &self.catalog).unwrap();
            if widget == "sales-by-region" {
                let control = InteractivityControl {
                    id: "region".into(),
                    field: "region".into(),
                    allowed_values: ["Atlantis", "Borealis", "Cascadia"].iter().map(|s| Value::Text(s.to_string())).collect(),
                    default_value: Value::Text("Atlantis".into()),
                    is_call_to_action: true,
                };
                self.store.add_control(&c.id, control, &self.catalog).unwrap();
                let circle = Annotation {
                    kind: AnnotationKind::Circle,
                    anchor: Anchor::Data { x: serde_json::json!("Atlantis"), y: 70038.5 },
                    text: None,
                    author_id: creator.into(),
                };
                self.store.annotate(&AnnotationTarget::Draft { component_id: c.id.clone() }, circle).unwrap();
            }
            let req = ComposeRequest {
                component_ids: vec![c.id],
                curation: CurationMethod::Stack,
                target_channel_id: "sales-team".into(),
                policy: UpdatePolicy::every(Span::new(1, TimeUnit::Month)),
                reshareable,
                completeness_note: None,
            };
            self.store.compose(&req, creator, now).unwrap().snapshot_id.clone()
        }
    }
}
