use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Column, ColumnData, Dataset};
use crate::value::StorageKind;

/// Integral numeric columns with at most this many distinct values are
/// treated as ordinal dimensions (years, ratings, quantities).
pub const ORDINAL_MAX_DISTINCT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticType {
    Nominal,
    Ordinal,
    Quantitative,
    Temporal,
}

impl SemanticType {
    pub fn as_str(self) -> &'static str {
        match self {
            SemanticType::Nominal => "nominal",
            SemanticType::Ordinal => "ordinal",
            SemanticType::Quantitative => "quantitative",
            SemanticType::Temporal => "temporal",
        }
    }

    /// Storage kind implied by the inference rules.
    pub fn storage(self) -> StorageKind {
        match self {
            SemanticType::Nominal => StorageKind::Utf8,
            SemanticType::Ordinal | SemanticType::Quantitative => StorageKind::Float64,
            SemanticType::Temporal => StorageKind::Timestamp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticType {
    Dimension,
    Measure,
}

impl AnalyticType {
    pub fn as_str(self) -> &'static str {
        match self {
            AnalyticType::Dimension => "dimension",
            AnalyticType::Measure => "measure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub fid: String,
    pub name: String,
    pub semantic_type: SemanticType,
    pub analytic_type: AnalyticType,
    pub distinct_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl FieldMeta {
    pub fn is_measure(&self) -> bool {
        self.analytic_type == AnalyticType::Measure
    }
}

/// Lowercases and replaces every non-ASCII-alphanumeric character with `_`.
pub fn sanitize_fid(name: &str) -> String {
    let fid: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect();
    if fid.is_empty() {
        "field".to_string()
    } else {
        fid
    }
}

/// Stable field ids for a dataset's columns: sanitized names, made unique
/// with `_2`, `_3`, ... suffixes in column order.
pub fn field_ids(dataset: &Dataset) -> Vec<String> {
    let mut taken = HashSet::new();
    dataset
        .columns()
        .iter()
        .map(|column| {
            let base = sanitize_fid(column.name());
            let mut fid = base.clone();
            let mut suffix = 2;
            while !taken.insert(fid.clone()) {
                fid = format!("{base}_{suffix}");
                suffix += 1;
            }
            fid
        })
        .collect()
}

/// One [`FieldMeta`] per column, in column order.
pub fn infer_fields(dataset: &Dataset) -> Vec<FieldMeta> {
    field_ids(dataset)
        .into_iter()
        .zip(dataset.columns())
        .map(|(fid, column)| classify(fid, column))
        .collect()
}

fn classify(fid: String, column: &Column) -> FieldMeta {
    let present = || (0..column.len()).filter(|&i| !column.is_null(i));
    let distinct_count = match column.data() {
        ColumnData::Float64(v) => present().map(|i| v[i].to_bits()).collect::<HashSet<_>>().len(),
        ColumnData::Utf8(v) => present().map(|i| v[i].as_str()).collect::<HashSet<_>>().len(),
        ColumnData::Timestamp(v) => present().map(|i| v[i]).collect::<HashSet<_>>().len(),
    };
    let bounds = || {
        let values: Vec<f64> = present().filter_map(|i| column.f64_at(i)).collect();
        let min = values.iter().copied().reduce(f64::min);
        let max = values.iter().copied().reduce(f64::max);
        (min, max)
    };

    let (semantic_type, analytic_type, (min, max)) = match column.data() {
        ColumnData::Float64(v) => {
            let integral = present().all(|i| v[i].fract() == 0.0);
            if integral && distinct_count <= ORDINAL_MAX_DISTINCT {
                (SemanticType::Ordinal, AnalyticType::Dimension, (None, None))
            } else {
                (SemanticType::Quantitative, AnalyticType::Measure, bounds())
            }
        }
        ColumnData::Timestamp(_) => (SemanticType::Temporal, AnalyticType::Dimension, bounds()),
        ColumnData::Utf8(_) => (SemanticType::Nominal, AnalyticType::Dimension, (None, None)),
    };

    FieldMeta {
        fid,
        name: column.name().to_string(),
        semantic_type,
        analytic_type,
        distinct_count,
        min,
        max,
    }
}
