use std::cmp::Ordering;
use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

/// Role of a column in a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Dimension,
    Measure,
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueType {
    Text,
    Number,
    Date,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Field {
    pub name: String,
    pub kind: FieldKind,
    pub value_type: ValueType,
}

impl Field {
    pub fn new(name: impl Into<String>, kind: FieldKind, value_type: ValueType) -> Self {
        Self { name: name.into(), kind, value_type }
    }

    pub fn dimension(name: impl Into<String>) -> Self {
        Self::new(name, FieldKind::Dimension, ValueType::Text)
    }

    pub fn measure(name: impl Into<String>) -> Self {
        Self::new(name, FieldKind::Measure, ValueType::Number)
    }

    pub fn temporal(name: impl Into<String>) -> Self {
        Self::new(name, FieldKind::Temporal, ValueType::Date)
    }

    /// Measures are numbers and temporal fields are dates.
    pub fn is_consistent(&self) -> bool {
        match self.kind {
            FieldKind::Measure => self.value_type == ValueType::Number,
            FieldKind::Temporal => self.value_type == ValueType::Date,
            FieldKind::Dimension => true,
        }
    }
}

/// A single cell.
///
/// Untagged on the wire: JSON numbers are numbers, `YYYY-MM-DD` strings are
/// dates, everything else is text. Values are coerced to the field's
/// [`ValueType`] wherever a field is known.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Date(NaiveDate),
    Text(String),
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_date(&self) -> Option<NaiveDate> {
        match self {
            Value::Date(d) => Some(*d),
            _ => None,
        }
    }

    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Number(_) => ValueType::Number,
            Value::Date(_) => ValueType::Date,
            Value::Text(_) => ValueType::Text,
        }
    }

    /// Converts to `target`, parsing text where that makes sense.
    pub fn coerce(&self, target: ValueType) -> Option<Value> {
        match (self, target) {
            (v, t) if v.value_type() == t => Some(v.clone()),
            (Value::Text(s), ValueType::Number) => s.trim().parse::<f64>().ok().filter(|n| n.is_finite()).map(Value::Number),
            (Value::Text(s), ValueType::Date) => parse_date(s).map(Value::Date),
            (Value::Date(d), ValueType::Text) => Some(Value::Text(d.to_string())),
            (Value::Number(n), ValueType::Text) => Some(Value::Text(n.to_string())),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Number(_) => 0,
            Value::Date(_) => 1,
            Value::Text(_) => 2,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.total_cmp(b),
            (Value::Date(a), Value::Date(b)) => a.cmp(b),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => write!(f, "{n}"),
            Value::Date(d) => write!(f, "{d}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_owned())
    }
}

impl From<f64> for Value {
    fn from(n: f64) -> Self {
        Value::Number(n)
    }
}

impl From<NaiveDate> for Value {
    fn from(d: NaiveDate) -> Self {
        Value::Date(d)
    }
}

/// Accepts `YYYY-MM-DD`, optionally followed by a time-of-day which is dropped.
pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    if !looks_like_date(s) {
        return None;
    }
    NaiveDate::parse_from_str(&s[..10], "%Y-%m-%d").ok()
}

/// `dddd-dd-dd` with nothing after it except a `T`/space separated time part.
pub(crate) fn looks_like_date(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() < 10 {
        return false;
    }
    let digits = [0, 1, 2, 3, 5, 6, 8, 9];
    if !digits.iter().all(|&i| b[i].is_ascii_digit()) || b[4] != b'-' || b[7] != b'-' {
        return false;
    }
    b.len() == 10 || b[10] == b'T' || b[10] == b' '
}

/// Day of week. Ordered Monday first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Weekday {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
    Sat,
    Sun,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
        Weekday::Sun,
    ];

    pub fn of(date: NaiveDate) -> Self {
        Self::ALL[date.weekday().num_days_from_monday() as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn date_parsing_truncates_time_of_day() {
        let d = NaiveDate::from_ymd_opt(2022, 4, 1).unwrap();
        assert_eq!(parse_date("2022-04-01"), Some(d));
        assert_eq!(parse_date("2022-04-01T13:45:00Z"), Some(d));
        assert_eq!(parse_date("2022-04-01 08:00"), Some(d));
        assert_eq!(parse_date("2022-13-40"), None);
        assert!(looks_like_date("2022-13-40"));
        assert!(!looks_like_date("Atlantis"));
        assert!(!looks_like_date("2022-04-01x"));
    }

    #[test]
    fn untagged_values_prefer_dates_over_text() {
        let v: Value = serde_json::from_str("\"2022-04-01\"").unwrap();
        assert_eq!(v.value_type(), ValueType::Date);
        let v: Value = serde_json::from_str("\"East\"").unwrap();
        assert_eq!(v, Value::from("East"));
        let v: Value = serde_json::from_str("12.5").unwrap();
        assert_eq!(v, Value::Number(12.5));
    }

    #[test]
    fn weekday_of_known_dates() {
        // 2022-04-01 was a Friday, 2022-04-04 a Monday.
        assert_eq!(Weekday::of(NaiveDate::from_ymd_opt(2022, 4, 1).unwrap()), Weekday::Fri);
        assert_eq!(Weekday::of(NaiveDate::from_ymd_opt(2022, 4, 4).unwrap()), Weekday::Mon);
    }

    #[test]
    fn coercion() {
        assert_eq!(Value::from("3.5").coerce(ValueType::Number), Some(Value::Number(3.5)));
        assert_eq!(Value::from("abc").coerce(ValueType::Number), None);
        assert_eq!(Value::Number(1.0).coerce(ValueType::Date), None);
    }
}
