use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::value::{FieldKind, Value, ValueType, Weekday};
use super::DataError;

/// Predicate operator. `range` bounds are inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum FilterOp {
    Eq { value: Value },
    In { values: Vec<Value> },
    Range { lo: Value, hi: Value },
    WeekdayIn { days: BTreeSet<Weekday> },
}

impl FilterOp {
    fn name(&self) -> &'static str {
        match self {
            FilterOp::Eq { .. } => "eq",
            FilterOp::In { .. } => "in",
            FilterOp::Range { .. } => "range",
            FilterOp::WeekdayIn { .. } => "weekday-in",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterPredicate {
    pub field: String,
    #[serde(flatten)]
    pub op: FilterOp,
}

impl FilterPredicate {
    pub fn eq(field: impl Into<String>, value: impl Into<Value>) -> Self {
        Self { field: field.into(), op: FilterOp::Eq { value: value.into() } }
    }

    pub fn one_of(field: impl Into<String>, values: impl IntoIterator<Item = Value>) -> Self {
        Self { field: field.into(), op: FilterOp::In { values: values.into_iter().collect() } }
    }

    pub fn range(field: impl Into<String>, lo: impl Into<Value>, hi: impl Into<Value>) -> Self {
        Self { field: field.into(), op: FilterOp::Range { lo: lo.into(), hi: hi.into() } }
    }

    pub fn weekday_in(field: impl Into<String>, days: impl IntoIterator<Item = Weekday>) -> Self {
        Self { field: field.into(), op: FilterOp::WeekdayIn { days: days.into_iter().collect() } }
    }

    /// Checks the predicate against a dataset's schema.
    pub fn validate(&self, ds: &Dataset) -> Result<(), DataError> {
        self.compile(ds).map(|_| ())
    }

    fn compile(&self, ds: &Dataset) -> Result<Compiled, DataError> {
        let col = ds.column(&self.field)?;
        let field = &ds.schema[col];
        let mismatch = || DataError::KindMismatch { field: self.field.clone(), op: self.op.name().to_owned() };
        let coerce = |v: &Value| v.coerce(field.value_type).ok_or_else(mismatch);
        let test = match &self.op {
            FilterOp::Eq { value } => Test::Eq(coerce(value)?),
            FilterOp::In { values } => Test::In(values.iter().map(coerce).collect::<Result<_, _>>()?),
            FilterOp::Range { lo, hi } => {
                if field.value_type == ValueType::Text {
                    return Err(mismatch());
                }
                Test::Range(coerce(lo)?, coerce(hi)?)
            }
            FilterOp::WeekdayIn { days } => {
                if field.kind != FieldKind::Temporal {
                    return Err(mismatch());
                }
                Test::Weekday(days.clone())
            }
        };
        Ok(Compiled { col, test })
    }
}

struct Compiled {
    col: usize,
    test: Test,
}

enum Test {
    Eq(Value),
    In(BTreeSet<Value>),
    Range(Value, Value),
    Weekday(BTreeSet<Weekday>),
}

impl Compiled {
    fn matches(&self, row: &[Value]) -> bool {
        let cell = &row[self.col];
        match &self.test {
            Test::Eq(v) => cell == v,
            Test::In(set) => set.contains(cell),
            Test::Range(lo, hi) => lo <= cell && cell <= hi,
            Test::Weekday(days) => cell.as_date().is_some_and(|d| days.contains(&Weekday::of(d))),
        }
    }
}

/// Indices of the rows satisfying every predicate, in dataset order.
pub fn apply_filters(ds: &Dataset, preds: &[FilterPredicate]) -> Result<Vec<usize>, DataError> {
    let compiled = preds.iter().map(|p| p.compile(ds)).collect::<Result<Vec<_>, _>>()?;
    Ok(ds
        .rows
        .iter()
        .enumerate()
        .filter(|(_, row)| compiled.iter().all(|c| c.matches(row)))
        .map(|(i, _)| i)
        .collect())
}
