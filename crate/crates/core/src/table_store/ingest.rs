use serde_json::Value;

use super::{Column, Dataset, TableError};
use crate::value::{parse_number, parse_timestamp};

#[derive(Debug, Clone, Copy)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: true,
        }
    }
}

/// Parses RFC 4180 CSV. Every column's storage kind is chosen by scanning
/// all of its non-empty cells; empty cells become nulls.
pub fn load_csv(name: &str, bytes: &[u8], options: CsvOptions) -> Result<Dataset, TableError> {
    if bytes.is_empty() {
        return Err(TableError::EmptyInput);
    }
    let text = std::str::from_utf8(bytes).map_err(|e| TableError::EncodingError(e.to_string()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut header: Option<Vec<String>> = None;
    let mut cells: Vec<Vec<Option<String>>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| TableError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if header.is_none() {
            let names = if options.has_header {
                record.iter().map(str::to_string).collect()
            } else {
                (1..=record.len()).map(|i| format!("column_{i}")).collect()
            };
            header = Some(names);
            cells = vec![Vec::new(); record.len()];
            if options.has_header {
                continue;
            }
        }
        let expected = cells.len();
        if record.len() != expected {
            return Err(TableError::RaggedRow {
                line,
                expected,
                found: record.len(),
            });
        }
        for (col, field) in cells.iter_mut().zip(record.iter()) {
            col.push((!field.is_empty()).then(|| field.to_string()));
        }
    }

    let header = header.ok_or(TableError::EmptyInput)?;
    if header.is_empty() {
        return Err(TableError::EmptyInput);
    }
    let columns = header
        .into_iter()
        .zip(cells)
        .map(|(name, values)| typed_column(name, values))
        .collect();
    Dataset::new(name, columns)
}

/// Builds a dataset from an array of flat objects. The union of keys, in
/// first-seen order, becomes the column list; absent keys are nulls.
pub fn load_json_rows(name: &str, rows: &Value) -> Result<Dataset, TableError> {
    let rows = rows
        .as_array()
        .ok_or_else(|| TableError::NotRows("top-level value is not an array".into()))?;
    let mut names: Vec<String> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (i, row) in rows.iter().enumerate() {
        let object = row
            .as_object()
            .ok_or_else(|| TableError::NotRows(format!("element {i} is not an object")))?;
        for (key, value) in object {
            if value.is_array() || value.is_object() {
                return Err(TableError::NestedValue {
                    row: i,
                    key: key.clone(),
                });
            }
            if !index.contains_key(key) {
                index.insert(key.clone(), names.len());
                names.push(key.clone());
            }
        }
    }
    if names.is_empty() {
        return Err(TableError::EmptyInput);
    }

    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::with_capacity(rows.len()); names.len()];
    for row in rows {
        let object = row.as_object().expect("checked above");
        for (col, name) in names.iter().enumerate() {
            let cell = match object.get(name) {
                None | Some(Value::Null) => None,
                Some(Value::String(s)) if s.is_empty() => None,
                Some(Value::String(s)) => Some(s.clone()),
                Some(other) => Some(other.to_string()),
            };
            cells[col].push(cell);
        }
    }
    let columns = names
        .into_iter()
        .zip(cells)
        .map(|(name, values)| typed_column(name, values))
        .collect();
    Dataset::new(name, columns)
}

fn typed_column(name: String, values: Vec<Option<String>>) -> Column {
    let present = || values.iter().flatten();
    if present().all(|v| parse_number(v).is_some()) {
        let parsed = values.iter().map(|v| v.as_deref().and_then(parse_number)).collect();
        return Column::from_f64(name, parsed);
    }
    if present().all(|v| parse_timestamp(v).is_some()) {
        let parsed = values.iter().map(|v| v.as_deref().and_then(parse_timestamp)).collect();
        return Column::from_timestamps(name, parsed);
    }
    Column::from_text(name, values)
}
