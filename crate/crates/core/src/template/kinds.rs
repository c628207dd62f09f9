//! Per-kind chart layers, inline data and caption skeletons.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;

use super::format::{magnitude, percent, ratio, signed_percent};
use super::spec::{Channel, ChannelType, DataRow, Encoding, Layer, Mark};
use super::stats::{least_squares, pearson, relative_change, shares};
use super::{Stats, TemplateError, TemplateKind, TemplateParams};
use crate::data::{ResolvedRow, ResolvedTable};
use crate::timeframe::TimeUnit;

/// Correlations inside `(-TREND_THRESHOLD, TREND_THRESHOLD)` read as flat.
pub const TREND_THRESHOLD: f64 = 0.1;

pub(super) struct Built {
    pub title: String,
    pub layers: Vec<Layer>,
    pub data: Vec<DataRow>,
    pub text: String,
    pub stats: Stats,
}

type Table = ResolvedTable<f64>;

pub(super) fn build(kind: TemplateKind, t: &Table, p: &TemplateParams) -> Result<Built, TemplateError> {
    if kind == TemplateKind::PreserveOriginal {
        return Err(TemplateError::NotTemplated);
    }
    if let Some(d) = &p.breakdown_dimension {
        if t.dimensions.as_slice() != [d.clone()] {
            return Err(shape(kind, format!("expected a breakdown by `{d}`, table is by {:?}", t.dimensions)));
        }
    }
    if t.rows.is_empty() {
        return Err(TemplateError::EmptyTable(kind));
    }
    match kind {
        TemplateKind::CategoricalBreakdown => categorical(t, p),
        TemplateKind::GoalBreakdown => goal(t, p),
        TemplateKind::RatioBreakdown => ratio_breakdown(t, p),
        TemplateKind::TimeSeries => time_series(t),
        TemplateKind::ValueVsThreshold => value_threshold(t, p),
        TemplateKind::SeriesVsThreshold => series_threshold(t, p),
        TemplateKind::TimeOverTime => time_over_time(t, p),
        TemplateKind::TrendCorrelation => trend(t, p),
        TemplateKind::PreserveOriginal => unreachable!(),
    }
}

fn shape(kind: TemplateKind, reason: impl Into<String>) -> TemplateError {
    TemplateError::ShapeMismatch { kind, reason: reason.into() }
}

fn require(kind: TemplateKind, t: &Table, dims: &[usize], bucketed: bool) -> Result<(), TemplateError> {
    if !dims.contains(&t.dimensions.len()) {
        let want = dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" or ");
        return Err(shape(kind, format!("needs {want} dimension(s), table has {}", t.dimensions.len())));
    }
    if bucketed && !t.is_bucketed() {
        return Err(shape(kind, "needs time buckets"));
    }
    if !bucketed && t.is_bucketed() {
        return Err(shape(kind, "needs one row per group, table has time buckets"));
    }
    Ok(())
}

/// `order_date` → `Order date`.
pub(super) fn display_name(field: &str) -> String {
    let s = field.replace('_', " ");
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => s,
    }
}

fn lower_name(field: &str) -> String {
    field.replace('_', " ")
}

pub(super) fn label(row: &ResolvedRow<f64>) -> String {
    row.keys.iter().map(ToString::to_string).collect::<Vec<_>>().join(" / ")
}

/// `A`, `A and B`, `A, B and C`.
fn join_names(names: &[String]) -> String {
    match names {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

fn jtext(s: impl Into<String>) -> serde_json::Value {
    serde_json::Value::String(s.into())
}

fn date(d: NaiveDate) -> serde_json::Value {
    jtext(d.format("%Y-%m-%d").to_string())
}

fn row(pairs: impl IntoIterator<Item = (String, serde_json::Value)>) -> DataRow {
    pairs.into_iter().collect()
}

fn quantitative(field: &str) -> Channel {
    Channel::new(field, ChannelType::Quantitative).with_axis(5)
}

fn temporal(field: &str, buckets: usize) -> Channel {
    Channel::new(field, ChannelType::Temporal).with_axis(buckets.min(12))
}

fn unit_of(t: &Table) -> TimeUnit {
    t.meta.unit.unwrap_or(TimeUnit::Day)
}

/// Groups sorted by value descending, ties by label.
fn ranked(t: &Table) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = t.rows.iter().map(|r| (label(r), r.value)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

fn leaders(ranked: &[(String, f64)]) -> Vec<String> {
    let top = ranked[0].1;
    ranked.iter().take_while(|(_, v)| *v == top).map(|(l, _)| l.clone()).collect()
}

fn insert_shares(stats: &mut Stats, ranked: &[(String, f64)], s: &[f64]) {
    for ((l, _), share) in ranked.iter().zip(s) {
        stats.insert(format!("share.{l}"), (*share).into());
    }
}

fn categorical(t: &Table, p: &TemplateParams) -> Result<Built, TemplateError> {
    let kind = TemplateKind::CategoricalBreakdown;
    require(kind, t, &[1], false)?;
    let dim = &t.dimensions[0];
    let ranked = ranked(t);
    let lead = leaders(&ranked);
    let top = ranked[0].1;
    let total: f64 = ranked.iter().map(|r| r.1).sum();
    let values: Vec<f64> = ranked.iter().map(|r| r.1).collect();
    let share_list = shares(&values).filter(|_| values.iter().all(|v| *v >= 0.0));

    let mut stats = Stats::new();
    stats.insert("leader".into(), join_names(&lead).into());
    stats.insert("value".into(), top.into());
    stats.insert("total".into(), total.into());
    stats.insert("count".into(), ranked.len().into());
    if let Some(s) = &share_list {
        stats.insert("share".into(), s[0].into());
        insert_shares(&mut stats, &ranked, s);
    }
    let (names, v, total_s) = (join_names(&lead), magnitude(top), magnitude(total));
    let text = match (&share_list, lead.len()) {
        (Some(s), 1) => format!("{names} leads with {v} ({} of {total_s}).", percent(s[0])),
        (Some(s), _) => format!("{names} lead jointly with {v} each ({} of {total_s} each).", percent(s[0])),
        (None, 1) => format!("{names} leads with {v} (total {total_s})."),
        (None, _) => format!("{names} lead jointly with {v} each (total {total_s})."),
    };

    let shown: Vec<&(String, f64)> = ranked.iter().take(p.top_n.unwrap_or(usize::MAX)).collect();
    let data = shown
        .iter()
        .enumerate()
        .map(|(i, (l, v))| {
            let mut r = row([(dim.clone(), jtext(l.clone())), (t.measure.clone(), num(*v))]);
            if let Some(s) = &share_list {
                r.insert("share".into(), num(s[i]));
            }
            r
        })
        .collect();
    let labels: Vec<String> = shown.iter().map(|(l, _)| l.clone()).collect();
    let encoding = Encoding {
        x: Some(Channel::new(dim.as_str(), ChannelType::Nominal).with_labels(labels).sorted("-y")),
        y: Some(quantitative(&t.measure)),
        color: Some(Channel::new(dim.as_str(), ChannelType::Nominal).with_legend()),
        ..Default::default()
    };
    Ok(Built {
        title: format!("{} by {}", display_name(&t.measure), lower_name(dim)),
        layers: vec![Layer { mark: Mark::Bar, encoding }],
        data,
        text,
        stats,
    })
}

fn goal(t: &Table, p: &TemplateParams) -> Result<Built, TemplateError> {
    let kind = TemplateKind::GoalBreakdown;
    require(kind, t, &[0, 1], false)?;
    let goal = p.goal.ok_or(TemplateError::MissingParam("goal"))?;
    let measure = display_name(&t.measure);
    let total: f64 = t.rows.iter().map(|r| r.value).sum();
    let progress = total / goal;
    let mut stats = Stats::new();
    stats.insert("value".into(), total.into());
    stats.insert("goal".into(), goal.into());
    stats.insert("progress".into(), progress.into());

    let mut bar = Encoding {
        x: Some(quantitative(&t.measure)),
        ..Default::default()
    };
    let track = Encoding { x: Some(quantitative("goal")), ..Default::default() };
    let (text, data) = if t.dimensions.is_empty() {
        let text = format!("{measure} is at {}, {} of goal {}.", magnitude(total), percent(progress), magnitude(goal));
        let data = vec![row([
            ("label".to_owned(), jtext(&measure)),
            (t.measure.clone(), num(total)),
            ("goal".to_owned(), num(goal)),
        ])];
        (text, data)
    } else {
        let dim = &t.dimensions[0];
        let ranked = ranked(t);
        let lead = leaders(&ranked);
        stats.insert("leader".into(), join_names(&lead).into());
        bar.x = Some(quantitative(&t.measure).stacked("zero"));
        bar.color = Some(Channel::new(dim.as_str(), ChannelType::Nominal).with_legend());
        let text = format!(
            "{measure} totals {}, {} of goal {}, led by {}.",
            magnitude(total),
            percent(progress),
            magnitude(goal),
            join_names(&lead)
        );
        let data = ranked
            .iter()
            .map(|(l, v)| row([(dim.clone(), jtext(l)), (t.measure.clone(), num(*v)), ("goal".to_owned(), num(goal))]))
            .collect();
        (text, data)
    };
    Ok(Built {
        title: format!("{measure} against goal"),
        layers: vec![Layer { mark: Mark::Bar, encoding: track }, Layer { mark: Mark::Bar, encoding: bar }],
        data,
        text,
        stats,
    })
}

fn ratio_breakdown(t: &Table, p: &TemplateParams) -> Result<Built, TemplateError> {
    let kind = TemplateKind::RatioBreakdown;
    require(kind, t, &[1], false)?;
    let dim = &t.dimensions[0];
    let ranked = ranked(t);
    let values: Vec<f64> = ranked.iter().map(|r| r.1).collect();
    let total: f64 = values.iter().sum();
    if values.iter().any(|v| *v < 0.0) || total <= 0.0 {
        return Err(shape(kind, "shares need non-negative values with a positive total"));
    }
    let s = shares(&values).ok_or_else(|| shape(kind, "total is zero"))?;
    let lead = leaders(&ranked);
    let mut stats = Stats::new();
    stats.insert("leader".into(), join_names(&lead).into());
    stats.insert("share".into(), s[0].into());
    stats.insert("total".into(), total.into());
    stats.insert("count".into(), ranked.len().into());
    insert_shares(&mut stats, &ranked, &s);
    let text = if lead.len() == 1 {
        format!("{} accounts for the largest share at {} of {}.", lead[0], percent(s[0]), magnitude(total))
    } else {
        format!(
            "{} account for the largest share at {} each of {}.",
            join_names(&lead),
            percent(s[0]),
            magnitude(total)
        )
    };
    let data = ranked
        .iter()
        .zip(&s)
        .take(p.top_n.unwrap_or(usize::MAX))
        .map(|((l, v), sh)| row([(dim.clone(), jtext(l.clone())), (t.measure.clone(), num(*v)), ("share".to_owned(), num(*sh))]))
        .collect();
    let encoding = Encoding {
        x: Some(Channel::new("share", ChannelType::Quantitative).with_axis(5).stacked("normalize")),
        color: Some(Channel::new(dim.as_str(), ChannelType::Nominal).with_legend().sorted("-x")),
        ..Default::default()
    };
    Ok(Built {
        title: format!("Share of {} by {}", lower_name(&t.measure), lower_name(dim)),
        layers: vec![Layer { mark: Mark::Bar, encoding }],
        data,
        text,
        stats,
    })
}

/// Rows ordered by bucket, then key.
fn by_bucket(t: &Table) -> Vec<&ResolvedRow<f64>> {
    let mut rows: Vec<&ResolvedRow<f64>> = t.rows.iter().collect();
    rows.sort_by(|a, b| a.bucket.cmp(&b.bucket).then_with(|| a.keys.cmp(&b.keys)));
    rows
}

fn distinct_buckets(t: &Table) -> Vec<NaiveDate> {
    t.rows.iter().filter_map(|r| r.bucket).collect::<BTreeSet<_>>().into_iter().collect()
}

fn series_row(t: &Table, r: &ResolvedRow<f64>) -> DataRow {
    let mut out = row([
        ("period".to_owned(), r.bucket.map_or(serde_json::Value::Null, date)),
        (t.measure.clone(), num(r.value)),
    ]);
    for (d, k) in t.dimensions.iter().zip(&r.keys) {
        out.insert(d.clone(), jtext(k.to_string()));
    }
    out
}

fn time_series(t: &Table) -> Result<Built, TemplateError> {
    let kind = TemplateKind::TimeSeries;
    require(kind, t, &[0, 1], true)?;
    let measure = display_name(&t.measure);
    let unit = unit_of(t);
    let buckets = distinct_buckets(t);
    let n = buckets.len();
    let rows = by_bucket(t);
    let mut stats = Stats::new();
    stats.insert("count".into(), n.into());
    let mut encoding = Encoding {
        x: Some(temporal("period", n)),
        y: Some(quantitative(&t.measure)),
        ..Default::default()
    };
    let text = if t.dimensions.is_empty() {
        let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let last = *values.last().expect("table is non-empty");
        stats.insert("min".into(), min.into());
        stats.insert("max".into(), max.into());
        stats.insert("last".into(), last.into());
        if n == 1 {
            format!("{measure} is {} over 1 {}.", magnitude(last), unit.name())
        } else {
            format!(
                "{measure} ranges from {} to {} over {n} {}, ending at {}.",
                magnitude(min),
                magnitude(max),
                unit.plural(n),
                magnitude(last)
            )
        }
    } else {
        let dim = &t.dimensions[0];
        let final_bucket = *buckets.last().expect("table is non-empty");
        let mut at_end: Vec<(String, f64)> =
            rows.iter().filter(|r| r.bucket == Some(final_bucket)).map(|r| (label(r), r.value)).collect();
        at_end.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let lead = leaders(&at_end);
        let series: BTreeSet<String> = rows.iter().map(|r| label(r)).collect();
        stats.insert("series".into(), series.len().into());
        stats.insert("leader".into(), join_names(&lead).into());
        stats.insert("last".into(), at_end[0].1.into());
        encoding.color = Some(Channel::new(dim.as_str(), ChannelType::Nominal).with_legend());
        format!(
            "{measure} covers {} {} series over {n} {}; {} ends highest at {}.",
            series.len(),
            lower_name(dim),
            unit.plural(n),
            join_names(&lead),
            magnitude(at_end[0].1)
        )
    };
    Ok(Built {
        title: format!("{measure} by {}", unit.name()),
        layers: vec![Layer { mark: Mark::Line, encoding }],
        data: rows.iter().map(|r| series_row(t, r)).collect(),
        text,
        stats,
    })
}

fn position(v: f64, low: f64, high: f64) -> &'static str {
    if v < low {
        "below"
    } else if v > high {
        "above"
    } else {
        "within"
    }
}

fn threshold_stats(stats: &mut Stats, low: f64, high: f64) {
    stats.insert("low".into(), low.into());
    stats.insert("high".into(), high.into());
}

fn value_threshold(t: &Table, p: &TemplateParams) -> Result<Built, TemplateError> {
    let kind = TemplateKind::ValueVsThreshold;
    require(kind, t, &[0, 1], false)?;
    let [low, high] = p.threshold.ok_or(TemplateError::MissingParam("threshold"))?;
    let measure = display_name(&t.measure);
    let mut stats = Stats::new();
    threshold_stats(&mut stats, low, high);
    let band_row = |mut r: DataRow| {
        r.insert("low".into(), num(low));
        r.insert("high".into(), num(high));
        r
    };
    if t.dimensions.is_empty() {
        let v = t.rows[0].value;
        let pos = position(v, low, high);
        stats.insert("value".into(), v.into());
        stats.insert("position".into(), pos.into());
        let text = format!("{measure} is {}, {pos} the range {} to {}.", magnitude(v), magnitude(low), magnitude(high));
        let band = Encoding {
            y: Some(Channel::new("low", ChannelType::Quantitative)),
            y2: Some(Channel::new("high", ChannelType::Quantitative)),
            ..Default::default()
        };
        let number = Encoding { text: Some(Channel::new(t.measure.as_str(), ChannelType::Quantitative)), ..Default::default() };
        return Ok(Built {
            title: format!("{measure} against range"),
            layers: vec![Layer { mark: Mark::Band, encoding: band }, Layer { mark: Mark::Text, encoding: number }],
            data: vec![band_row(row([(t.measure.clone(), num(v))]))],
            text,
            stats,
        });
    }
    let dim = &t.dimensions[0];
    let ranked = ranked(t);
    let inside = ranked.iter().filter(|(_, v)| position(*v, low, high) == "within").count();
    stats.insert("inside".into(), inside.into());
    stats.insert("count".into(), ranked.len().into());
    let text = format!(
        "{inside} of {} {} values are within the range {} to {}.",
        ranked.len(),
        lower_name(dim),
        magnitude(low),
        magnitude(high)
    );
    let labels: Vec<String> = ranked.iter().map(|(l, _)| l.clone()).collect();
    let band = Encoding {
        y: Some(Channel::new("low", ChannelType::Quantitative)),
        y2: Some(Channel::new("high", ChannelType::Quantitative)),
        ..Default::default()
    };
    let bars = Encoding {
        x: Some(Channel::new(dim.as_str(), ChannelType::Nominal).with_labels(labels)),
        y: Some(quantitative(&t.measure)),
        ..Default::default()
    };
    Ok(Built {
        title: format!("{measure} by {} against range", lower_name(dim)),
        layers: vec![Layer { mark: Mark::Band, encoding: band }, Layer { mark: Mark::Bar, encoding: bars }],
        data: ranked.iter().map(|(l, v)| band_row(row([(dim.clone(), jtext(l.clone())), (t.measure.clone(), num(*v))]))).collect(),
        text,
        stats,
    })
}

fn series_threshold(t: &Table, p: &TemplateParams) -> Result<Built, TemplateError> {
    let kind = TemplateKind::SeriesVsThreshold;
    require(kind, t, &[0], true)?;
    let [low, high] = p.threshold.ok_or(TemplateError::MissingParam("threshold"))?;
    let measure = display_name(&t.measure);
    let unit = unit_of(t);
    let rows = by_bucket(t);
    let n = rows.len();
    let inside = rows.iter().filter(|r| position(r.value, low, high) == "within").count();
    let mut stats = Stats::new();
    threshold_stats(&mut stats, low, high);
    stats.insert("inside".into(), inside.into());
    stats.insert("count".into(), n.into());
    let text = format!(
        "{measure} stays within the range {} to {} in {inside} of {n} {}.",
        magnitude(low),
        magnitude(high),
        unit.plural(n)
    );
    let band = Encoding {
        x: Some(temporal("period", n)),
        y: Some(Channel::new("low", ChannelType::Quantitative)),
        y2: Some(Channel::new("high", ChannelType::Quantitative)),
        ..Default::default()
    };
    let line = Encoding { x: Some(temporal("period", n)), y: Some(quantitative(&t.measure)), ..Default::default() };
    let data = rows
        .iter()
        .map(|r| {
            let mut d = series_row(t, r);
            d.insert("low".into(), num(low));
            d.insert("high".into(), num(high));
            d
        })
        .collect();
    Ok(Built {
        title: format!("{measure} against range by {}", unit.name()),
        layers: vec![Layer { mark: Mark::Band, encoding: band }, Layer { mark: Mark::Line, encoding: line }],
        data,
        text,
        stats,
    })
}

/// Values per bucket, summed over groups, in bucket order.
fn per_bucket(rows: &[ResolvedRow<f64>]) -> Vec<(NaiveDate, f64)> {
    let mut m: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    for r in rows {
        if let Some(b) = r.bucket {
            *m.entry(b).or_default() += r.value;
        }
    }
    m.into_iter().collect()
}

fn time_over_time(t: &Table, p: &TemplateParams) -> Result<Built, TemplateError> {
    let kind = TemplateKind::TimeOverTime;
    require(kind, t, &[0], true)?;
    let offset = p.comparison_offset.ok_or(TemplateError::MissingParam("comparisonOffset"))?;
    let cmp = t.comparison.as_ref().ok_or_else(|| shape(kind, "table has no comparison period"))?;
    if cmp.offset != offset {
        return Err(shape(kind, format!("comparison period is offset by {}, expected {offset}", cmp.offset)));
    }
    let measure = display_name(&t.measure);
    let current = per_bucket(&t.rows);
    let prior = per_bucket(&cmp.rows);
    let cur: f64 = current.iter().map(|c| c.1).sum();
    let prev: f64 = prior.iter().map(|c| c.1).sum();
    let mut stats = Stats::new();
    stats.insert("current".into(), cur.into());
    stats.insert("previous".into(), prev.into());
    let text = match relative_change(cur, prev) {
        Some(delta) => {
            stats.insert("delta".into(), delta.into());
            format!("{measure} totals {}, {} versus the prior period ({}).", magnitude(cur), signed_percent(delta), magnitude(prev))
        }
        None => format!("{measure} totals {} versus {} in the prior period.", magnitude(cur), magnitude(prev)),
    };
    let mut data = Vec::new();
    for (series, points) in [("current", &current), ("prior", &prior)] {
        for (i, (b, v)) in points.iter().enumerate() {
            data.push(row([
                ("index".to_owned(), num(i as f64)),
                ("period".to_owned(), date(*b)),
                ("series".to_owned(), jtext(series)),
                (t.measure.clone(), num(*v)),
            ]));
        }
    }
    let n = current.len().max(prior.len());
    let encoding = Encoding {
        x: Some(Channel::new("index", ChannelType::Ordinal).with_axis(n.min(12))),
        y: Some(quantitative(&t.measure)),
        color: Some(Channel::new("series", ChannelType::Nominal).with_legend()),
        ..Default::default()
    };
    Ok(Built {
        title: format!("{measure}, current versus prior period"),
        layers: vec![Layer { mark: Mark::Line, encoding }],
        data,
        text,
        stats,
    })
}

fn direction(r: f64) -> i8 {
    if r > TREND_THRESHOLD {
        1
    } else if r < -TREND_THRESHOLD {
        -1
    } else {
        0
    }
}

fn trend(t: &Table, p: &TemplateParams) -> Result<Built, TemplateError> {
    let kind = TemplateKind::TrendCorrelation;
    let measure = display_name(&t.measure);
    let paired = t.paired_measure.as_ref();
    let (xs, ys, x_field, rows): (Vec<f64>, Vec<f64>, String, Vec<&ResolvedRow<f64>>) = match (paired, &p.second_measure) {
        (Some(pm), Some(sm)) if pm != sm => {
            return Err(shape(kind, format!("table is paired with `{pm}`, expected `{sm}`")));
        }
        (Some(pm), _) => {
            let rows = by_bucket(t);
            let xs = rows.iter().map(|r| r.paired.unwrap_or(f64::NAN)).collect();
            let ys = rows.iter().map(|r| r.value).collect();
            (xs, ys, pm.clone(), rows)
        }
        (None, Some(sm)) => return Err(shape(kind, format!("table has no paired measure `{sm}`"))),
        (None, None) => {
            require(kind, t, &[0], true)?;
            let rows = by_bucket(t);
            let xs = (0..rows.len()).map(|i| i as f64).collect();
            let ys = rows.iter().map(|r| r.value).collect();
            (xs, ys, "index".to_owned(), rows)
        }
    };
    if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
        return Err(shape(kind, "every group needs both measures"));
    }
    let r = pearson(&xs, &ys).unwrap_or(0.0);
    let (slope, intercept) = least_squares(&xs, &ys);
    let dir = direction(r);
    let mut stats = Stats::new();
    stats.insert("r".into(), r.into());
    stats.insert("slope".into(), slope.into());
    stats.insert("intercept".into(), intercept.into());
    stats.insert("count".into(), xs.len().into());
    let word = ["decreasing", "flat", "increasing"][(dir + 1) as usize];
    stats.insert("direction".into(), word.into());
    let rs = ratio(r);
    let text = match paired {
        Some(pm) => {
            let second = lower_name(pm);
            match dir {
                1 => format!("{measure} increases with {second} (r = {rs})."),
                -1 => format!("{measure} decreases as {second} increases (r = {rs})."),
                _ => format!("{measure} shows no clear relationship with {second} (r = {rs})."),
            }
        }
        None => match dir {
            1 => format!("{measure} is increasing over time (r = {rs})."),
            -1 => format!("{measure} is decreasing over time (r = {rs})."),
            _ => format!("{measure} shows no clear trend over time (r = {rs})."),
        },
    };
    let data = rows
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(r, (&x, &y))| {
            let mut d = row([
                (x_field.clone(), num(x)),
                (t.measure.clone(), num(y)),
                ("fit".to_owned(), num(slope * x + intercept)),
            ]);
            if let Some(b) = r.bucket {
                d.insert("period".into(), date(b));
            }
            for (dim, k) in t.dimensions.iter().zip(&r.keys) {
                d.insert(dim.clone(), jtext(k.to_string()));
            }
            d
        })
        .collect();
    let points = Encoding { x: Some(quantitative(&x_field)), y: Some(quantitative(&t.measure)), ..Default::default() };
    let fit = Encoding { x: Some(quantitative(&x_field)), y: Some(quantitative("fit")), ..Default::default() };
    Ok(Built {
        title: match paired {
            Some(pm) => format!("{measure} versus {}", lower_name(pm)),
            None => format!("{measure} trend"),
        },
        layers: vec![Layer { mark: Mark::Point, encoding: points }, Layer { mark: Mark::Line, encoding: fit }],
        data,
        text,
        stats,
    })
}
