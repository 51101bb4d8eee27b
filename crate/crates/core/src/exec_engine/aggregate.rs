use std::collections::HashSet;

use crate::spec_model::Aggregation;
use crate::value::Scalar;

/// Applies one aggregation to a group. `values` holds the group's measure
/// column (nulls as `None`); `count` ignores the values and counts rows.
pub fn aggregate(aggregation: Aggregation, values: &[Option<f64>]) -> Scalar {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let result = match aggregation {
        Aggregation::None => None,
        Aggregation::Count => Some(values.len() as f64),
        Aggregation::CountDistinct => Some(
            present
                .iter()
                .map(|v| v.to_bits())
                .collect::<HashSet<_>>()
                .len() as f64,
        ),
        Aggregation::Sum => (!present.is_empty()).then(|| present.iter().sum()),
        Aggregation::Mean => mean(&present),
        Aggregation::Min => present.iter().copied().reduce(f64::min),
        Aggregation::Max => present.iter().copied().reduce(f64::max),
        Aggregation::Median => median(present),
        Aggregation::Variance => sample_variance(&present),
        Aggregation::Stddev => sample_variance(&present).map(f64::sqrt),
    };
    result.map_or(Scalar::Null, Scalar::number)
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Linear interpolation between the two middle order statistics.
fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let position = (values.len() - 1) as f64 * 0.5;
    let lo = position.floor() as usize;
    let hi = position.ceil() as usize;
    Some(values[lo] + (values[hi] - values[lo]) * (position - lo as f64))
}

/// Sample variance (n - 1); undefined below two values.
fn sample_variance(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some(ss / (values.len() - 1) as f64)
}
