use super::ExecError;
use crate::spec_model::TransformKind;
use crate::table_store::{Column, ColumnData};

/// Bounds of a column's non-null values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats {
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl ColumnStats {
    pub fn of(column: &Column) -> ColumnStats {
        let mut min: Option<f64> = None;
        let mut max: Option<f64> = None;
        for i in 0..column.len() {
            if let Some(v) = column.f64_at(i) {
                min = Some(min.map_or(v, |m| m.min(v)));
                max = Some(max.map_or(v, |m| m.max(v)));
            }
        }
        ColumnStats { min, max }
    }

    /// Width of one of `k` equal bins, when the bounds are known.
    pub fn bin_width(&self, k: u32) -> Option<f64> {
        Some((self.max? - self.min?) / k as f64)
    }
}

/// Lower bound of the bin holding `value`; the maximum clamps into the last
/// bin and a zero-width range maps everything to `min`.
pub fn bin_lower_bound(value: f64, min: f64, max: f64, k: u32) -> f64 {
    let width = (max - min) / k as f64;
    if width == 0.0 {
        return min;
    }
    let index = ((value - min) / width).floor().min((k - 1) as f64);
    min + index * width
}

/// Derives a new column from a quantitative source. Logs of non-positive
/// values and nulls produce nulls.
pub fn apply_transform(
    column: &Column,
    out_name: &str,
    kind: TransformKind,
    stats: ColumnStats,
) -> Result<Column, ExecError> {
    let ColumnData::Float64(_) = column.data() else {
        return Err(ExecError::NonQuantitativeSource(column.name().to_string()));
    };
    let values = (0..column.len())
        .map(|i| {
            let v = column.f64_at(i)?;
            match kind {
                TransformKind::Log2 => (v > 0.0).then(|| v.ln() / 2f64.ln()),
                TransformKind::Log10 => (v > 0.0).then(|| v.ln() / 10f64.ln()),
                TransformKind::Bin(k) => Some(bin_lower_bound(v, stats.min?, stats.max?, k)),
            }
        })
        .collect();
    Ok(Column::from_f64(out_name, values))
}
