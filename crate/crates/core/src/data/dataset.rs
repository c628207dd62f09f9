use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::value::{looks_like_date, parse_date, Field, Value, ValueType};
use super::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceFormat {
    Csv,
    JsonRecords,
}

/// Explicit field declarations that override inference.
///
/// Fields not listed are inferred from the data. A zero-row source can only be
/// loaded with a hint, and then the hint is the whole schema.
pub type SchemaHint = Vec<Field>;

/// An immutable typed table. Rows are stored positionally in schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: String,
    pub name: String,
    pub schema: Vec<Field>,
    pub rows: Vec<Vec<Value>>,
}

impl Dataset {
    pub fn field(&self, name: &str) -> Option<&Field> {
        self.schema.iter().find(|f| f.name == name)
    }

    pub fn column(&self, name: &str) -> Result<usize, DataError> {
        self.schema
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| DataError::UnknownField(name.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct values of a column, sorted.
    pub fn domain(&self, name: &str) -> Result<BTreeSet<Value>, DataError> {
        let col = self.column(name)?;
        Ok(self.rows.iter().map(|r| r[col].clone()).collect())
    }

    /// Builds a dataset from already typed rows, checking every invariant.
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        schema: Vec<Field>,
        rows: Vec<Vec<Value>>,
    ) -> Result<Self, DataError> {
        check_schema(&schema)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(DataError::MalformedRow(i + 1));
            }
            for (cell, field) in row.iter().zip(&schema) {
                if cell.value_type() != field.value_type {
                    return Err(DataError::MalformedRow(i + 1));
                }
            }
        }
        Ok(Self { id: id.into(), name: name.into(), schema, rows })
    }
}

fn check_schema(schema: &[Field]) -> Result<(), DataError> {
    let mut seen = BTreeSet::new();
    for f in schema {
        if !seen.insert(f.name.as_str()) {
            return Err(DataError::DuplicateFieldName(f.name.clone()));
        }
        if !f.is_consistent() {
            return Err(DataError::InvalidSchema(format!(
                "field `{}` has kind {:?} but value type {:?}",
                f.name, f.kind, f.value_type
            )));
        }
    }
    Ok(())
}

/// Raw, untyped cells with the source line each row came from.
struct RawTable {
    names: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

/// Parses a CSV or JSON-records source into a typed dataset.
///
/// Columns whose every cell parses as a finite number become measures, columns
/// whose every cell looks like an ISO date become temporal, the rest become text
/// dimensions. A date-shaped cell that is not a real calendar date is an error
/// rather than a reason to fall back to text.
pub fn load_dataset(
    id: &str,
    name: &str,
    source: &[u8],
    format: SourceFormat,
    hint: Option<&SchemaHint>,
) -> Result<Dataset, DataError> {
    if source.iter().all(u8::is_ascii_whitespace) {
        return Err(DataError::EmptySource);
    }
    let raw = match format {
        SourceFormat::Csv => read_csv(source)?,
        SourceFormat::JsonRecords => read_json(source)?,
    };
    if raw.rows.is_empty() && hint.is_none() {
        return Err(DataError::EmptySource);
    }
    if let Some(hint) = hint {
        check_schema(hint)?;
    }

    let names = if raw.names.is_empty() {
        hint.map(|h| h.iter().map(|f| f.name.clone()).collect()).unwrap_or_default()
    } else {
        raw.names.clone()
    };
    {
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(DataError::DuplicateFieldName(n.clone()));
            }
        }
    }
    if let Some(hint) = hint {
        if let Some(extra) = hint.iter().find(|f| !names.contains(&f.name)) {
            return Err(DataError::InvalidSchema(format!(
                "hinted field `{}` is not in the source",
                extra.name
            )));
        }
    }

    let schema: Vec<Field> = names
        .iter()
        .enumerate()
        .map(|(col, n)| {
            hint.and_then(|h| h.iter().find(|f| &f.name == n).cloned())
                .unwrap_or_else(|| infer_field(n, raw.rows.iter().map(|(_, r)| r[col].as_str())))
        })
        .collect();
    check_schema(&schema)?;

    let mut rows = Vec::with_capacity(raw.rows.len());
    for (line, cells) in &raw.rows {
        let mut row = Vec::with_capacity(schema.len());
        for (cell, field) in cells.iter().zip(&schema) {
            row.push(parse_cell(cell, field, *line)?);
        }
        rows.push(row);
    }
    Ok(Dataset { id: id.to_owned(), name: name.to_owned(), schema, rows })
}

fn infer_field<'a>(name: &str, mut cells: impl Iterator<Item = &'a str> + Clone) -> Field {
    if cells.clone().all(|c| c.trim().parse::<f64>().is_ok_and(f64::is_finite)) {
        Field::measure(name)
    } else if cells.all(|c| looks_like_date(c.trim())) {
        Field::temporal(name)
    } else {
        Field::dimension(name)
    }
}

fn parse_cell(cell: &str, field: &Field, line: usize) -> Result<Value, DataError> {
    match field.value_type {
        ValueType::Text => Ok(Value::Text(cell.to_owned())),
        ValueType::Number => cell
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|n| n.is_finite())
            .map(Value::Number)
            .ok_or(DataError::MalformedRow(line)),
        ValueType::Date => parse_date(cell).map(Value::Date).ok_or_else(|| DataError::UnparseableDate {
            field: field.name.clone(),
            line,
        }),
    }
}

fn read_csv(source: &[u8]) -> Result<RawTable, DataError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(source);
    let names: Vec<String> = reader
        .headers()
        .map_err(|_| DataError::MalformedRow(1))?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(DataError::EmptySource);
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let fallback_line = i + 2;
        let record = record.map_err(|e| {
            DataError::MalformedRow(e.position().map_or(fallback_line, |p| p.line() as usize))
        })?;
        let line = record.position().map_or(fallback_line, |p| p.line() as usize);
        if record.len() != names.len() {
            return Err(DataError::MalformedRow(line));
        }
        rows.push((line, record.iter().map(str::to_owned).collect()));
    }
    Ok(RawTable { names, rows })
}

fn read_json(source: &[u8]) -> Result<RawTable, DataError> {
    let parsed: serde_json::Value = serde_json::from_slice(source).map_err(|e| DataError::MalformedRow(e.line()))?;
    let serde_json::Value::Array(records) = parsed else {
        return Err(DataError::MalformedRow(1));
    };
    let mut names: Vec<String> = Vec::new();
    let mut rows = Vec::with_capacity(records.len());
    for (i, record) in records.iter().enumerate() {
        let line = i + 1;
        let serde_json::Value::Object(obj) = record else {
            return Err(DataError::MalformedRow(line));
        };
        if i == 0 {
            names = obj.keys().cloned().collect();
        } else if obj.len() != names.len() || names.iter().any(|n| !obj.contains_key(n)) {
            return Err(DataError::MalformedRow(line));
        }
        let mut cells = Vec::with_capacity(names.len());
        for n in &names {
            cells.push(match &obj[n] {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(x) => x.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                serde_json::Value::Null => String::new(),
                _ => return Err(DataError::MalformedRow(line)),
            });
        }
        rows.push((line, cells));
    }
    Ok(RawTable { names, rows })
}
