//! Immutable columnar tables, ingestion and field-type inference.

mod infer;
mod ingest;
mod registry;

pub use infer::{field_ids, infer_fields, sanitize_fid, AnalyticType, FieldMeta, SemanticType, ORDINAL_MAX_DISTINCT};
pub use ingest::{load_csv, load_json_rows, CsvOptions};
pub use registry::{DatasetRegistry, RegisteredDataset};

use std::collections::HashSet;

use thiserror::Error;

use crate::value::{Scalar, StorageKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("empty input: no columns")]
    EmptyInput,
    #[error("ragged row at line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("input is not valid UTF-8: {0}")]
    EncodingError(String),
    #[error("nested value in row {row} under key {key:?}")]
    NestedValue { row: usize, key: String },
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("column {column:?} has {found} values, expected {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("expected a JSON array of objects: {0}")]
    NotRows(String),
}

impl TableError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            TableError::EmptyInput => "EmptyInput",
            TableError::RaggedRow { .. } => "RaggedRow",
            TableError::EncodingError(_) => "EncodingError",
            TableError::NestedValue { .. } => "NestedValue",
            TableError::DuplicateColumn(_) => "DuplicateColumn",
            TableError::LengthMismatch { .. } => "LengthMismatch",
            TableError::Csv(_) => "Csv",
            TableError::NotRows(_) => "NotRows",
        }
    }
}

/// Typed values of one column. Slots flagged null hold a default value.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Float64(Vec<f64>),
    Utf8(Vec<String>),
    Timestamp(Vec<i64>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Float64(v) => v.len(),
            ColumnData::Utf8(v) => v.len(),
            ColumnData::Timestamp(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> StorageKind {
        match self {
            ColumnData::Float64(_) => StorageKind::Float64,
            ColumnData::Utf8(_) => StorageKind::Utf8,
            ColumnData::Timestamp(_) => StorageKind::Timestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    name: String,
    data: ColumnData,
    nulls: Vec<bool>,
}

impl Column {
    /// `nulls[i]` marks row `i` as null. Panics when the lengths differ.
    pub fn new(name: impl Into<String>, data: ColumnData, nulls: Vec<bool>) -> Column {
        assert_eq!(data.len(), nulls.len(), "null mask length must match values");
        Column {
            name: name.into(),
            data,
            nulls,
        }
    }

    pub fn from_f64(name: impl Into<String>, values: Vec<Option<f64>>) -> Column {
        let nulls = values.iter().map(Option::is_none).collect();
        let data = values
            .into_iter()
            .map(|v| v.map_or(0.0, crate::value::normalize_zero))
            .collect();
        Column::new(name, ColumnData::Float64(data), nulls)
    }

    pub fn from_text(name: impl Into<String>, values: Vec<Option<String>>) -> Column {
        let nulls = values.iter().map(Option::is_none).collect();
        let data = values.into_iter().map(Option::unwrap_or_default).collect();
        Column::new(name, ColumnData::Utf8(data), nulls)
    }

    pub fn from_timestamps(name: impl Into<String>, values: Vec<Option<i64>>) -> Column {
        let nulls = values.iter().map(Option::is_none).collect();
        let data = values.into_iter().map(Option::unwrap_or_default).collect();
        Column::new(name, ColumnData::Timestamp(data), nulls)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn null_mask(&self) -> &[bool] {
        &self.nulls
    }

    pub fn kind(&self) -> StorageKind {
        self.data.kind()
    }

    pub fn len(&self) -> usize {
        self.nulls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nulls.is_empty()
    }

    pub fn is_null(&self, row: usize) -> bool {
        self.nulls[row]
    }

    pub fn value(&self, row: usize) -> Scalar {
        if self.nulls[row] {
            return Scalar::Null;
        }
        match &self.data {
            ColumnData::Float64(v) => Scalar::Number(v[row]),
            ColumnData::Utf8(v) => Scalar::Text(v[row].clone()),
            ColumnData::Timestamp(v) => Scalar::Timestamp(v[row]),
        }
    }

    /// Numeric view of a row: floats as-is, timestamps as epoch millis.
    pub fn f64_at(&self, row: usize) -> Option<f64> {
        if self.nulls[row] {
            return None;
        }
        match &self.data {
            ColumnData::Float64(v) => Some(v[row]),
            ColumnData::Timestamp(v) => Some(v[row] as f64),
            ColumnData::Utf8(_) => None,
        }
    }
}

/// An immutable, named table of equally long columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    id: String,
    name: String,
    columns: Vec<Column>,
    row_count: usize,
}

impl Dataset {
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Result<Dataset, TableError> {
        if columns.is_empty() {
            return Err(TableError::EmptyInput);
        }
        let row_count = columns[0].len();
        let mut seen = HashSet::new();
        for column in &columns {
            if !seen.insert(column.name()) {
                return Err(TableError::DuplicateColumn(column.name().to_string()));
            }
            if column.len() != row_count {
                return Err(TableError::LengthMismatch {
                    column: column.name().to_string(),
                    expected: row_count,
                    found: column.len(),
                });
            }
        }
        Ok(Dataset {
            id: String::new(),
            name: name.into(),
            columns,
            row_count,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Dataset {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name() == name)
    }

    pub fn row(&self, row: usize) -> Vec<Scalar> {
        self.columns.iter().map(|c| c.value(row)).collect()
    }
}
