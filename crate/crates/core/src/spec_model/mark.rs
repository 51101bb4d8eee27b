use super::{FieldCatalog, GraphicSpec, MarkType, Role};
use crate::table_store::{FieldMeta, SemanticType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AxisClass {
    Empty,
    Measure,
    Sequential,
    Categorical,
}

/// Resolves `auto` to a concrete mark; concrete marks pass through.
///
/// | innermost x / y                          | mark  |
/// |------------------------------------------|-------|
/// | temporal or ordinal dimension + measure   | line  |
/// | nominal dimension + measure               | bar   |
/// | measure on both axes                      | point |
/// | measures only, no dimensions on the axes  | tick  |
/// | no measures at all                        | table |
///
/// The x axis decides when both axes carry a dimension. A spec with no
/// fields at all resolves to point, an empty chart.
pub fn default_mark(spec: &GraphicSpec, fields: &[FieldMeta]) -> MarkType {
    if spec.mark != MarkType::Auto {
        return spec.mark;
    }
    let catalog = FieldCatalog::new(fields, &spec.computed);
    let aggregated = spec.aggregated;
    let measure_count = spec
        .channels
        .iter()
        .filter(|(_, r)| catalog.role(r, aggregated) == Role::Measure)
        .count();
    let class = |refs: &[super::FieldRef]| match refs.last() {
        None => AxisClass::Empty,
        Some(r) if catalog.role(r, aggregated) == Role::Measure => AxisClass::Measure,
        Some(r) => match catalog.semantic(&r.fid) {
            SemanticType::Temporal | SemanticType::Ordinal => AxisClass::Sequential,
            _ => AxisClass::Categorical,
        },
    };
    let x = class(&spec.channels.x);
    let y = class(&spec.channels.y);

    if spec.channels.iter().next().is_none() {
        return MarkType::Point;
    }
    if measure_count == 0 {
        return MarkType::Table;
    }
    if x == AxisClass::Measure && y == AxisClass::Measure {
        return MarkType::Point;
    }
    let dim = if matches!(x, AxisClass::Sequential | AxisClass::Categorical) {
        x
    } else {
        y
    };
    match dim {
        AxisClass::Sequential => MarkType::Line,
        AxisClass::Categorical => MarkType::Bar,
        _ => MarkType::Tick,
    }
}
