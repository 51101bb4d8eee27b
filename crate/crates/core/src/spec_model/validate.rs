use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::{
    default_mark, Aggregation, Channel, ComputedField, FieldRef, FilterRule, GraphicSpec,
    MarkType, TransformKind,
};
use crate::table_store::{AnalyticType, FieldMeta, SemanticType};
use crate::value::{parse_timestamp, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOrigin {
    Dataset,
    Computed(TransformKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldInfo {
    pub fid: String,
    pub semantic_type: SemanticType,
    pub analytic_type: AnalyticType,
    pub origin: FieldOrigin,
}

/// How a field reference participates in the view data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Dimension,
    Measure,
}

/// Dataset fields plus the outputs of a spec's computed fields.
#[derive(Debug, Clone, Default)]
pub struct FieldCatalog {
    fields: Vec<FieldInfo>,
    index: HashMap<String, usize>,
}

impl FieldCatalog {
    pub fn new(metas: &[FieldMeta], computed: &[ComputedField]) -> FieldCatalog {
        let mut catalog = FieldCatalog::default();
        for meta in metas {
            catalog.insert(FieldInfo {
                fid: meta.fid.clone(),
                semantic_type: meta.semantic_type,
                analytic_type: meta.analytic_type,
                origin: FieldOrigin::Dataset,
            });
        }
        for c in computed {
            catalog.insert(computed_info(c));
        }
        catalog
    }

    /// A best-effort catalog for specs compiled without access to the data:
    /// aggregated or range-filtered fields are quantitative, fields filtered
    /// by numbers are ordinal, everything else nominal.
    pub fn from_spec_usage(spec: &GraphicSpec) -> FieldCatalog {
        let mut quantitative = HashSet::new();
        let mut numeric_dims = HashSet::new();
        let mut mentioned = Vec::new();
        let refs = spec
            .channels
            .iter()
            .map(|(_, r)| r.clone())
            .chain(spec.table_values());
        for r in refs {
            if !r.aggregation.is_none() && r.aggregation != Aggregation::Count {
                quantitative.insert(r.fid.clone());
            }
            mentioned.push(r.fid);
        }
        for c in &spec.computed {
            quantitative.insert(c.source_fid.clone());
            mentioned.push(c.source_fid.clone());
        }
        for f in &spec.filters {
            match &f.rule {
                FilterRule::Range { .. } => {
                    quantitative.insert(f.fid.clone());
                }
                FilterRule::OneOf(values) => {
                    if values.iter().any(|v| matches!(v, Scalar::Number(_))) {
                        numeric_dims.insert(f.fid.clone());
                    }
                }
            }
            mentioned.push(f.fid.clone());
        }
        if let Some(sort) = &spec.sort {
            mentioned.push(sort.fid.clone());
        }
        let outputs: HashSet<&str> = spec.computed.iter().map(|c| c.out_fid.as_str()).collect();
        let mut metas = Vec::new();
        let mut seen = HashSet::new();
        for fid in mentioned {
            if outputs.contains(fid.as_str()) || !seen.insert(fid.clone()) {
                continue;
            }
            let (semantic_type, analytic_type) = if quantitative.contains(&fid) {
                (SemanticType::Quantitative, AnalyticType::Measure)
            } else if numeric_dims.contains(&fid) {
                (SemanticType::Ordinal, AnalyticType::Dimension)
            } else {
                (SemanticType::Nominal, AnalyticType::Dimension)
            };
            metas.push(FieldMeta {
                fid: fid.clone(),
                name: fid,
                semantic_type,
                analytic_type,
                distinct_count: 0,
                min: None,
                max: None,
            });
        }
        FieldCatalog::new(&metas, &spec.computed)
    }

    fn insert(&mut self, info: FieldInfo) {
        if self.index.contains_key(&info.fid) {
            return;
        }
        self.index.insert(info.fid.clone(), self.fields.len());
        self.fields.push(info);
    }

    pub fn get(&self, fid: &str) -> Option<&FieldInfo> {
        self.index.get(fid).map(|&i| &self.fields[i])
    }

    pub fn fields(&self) -> &[FieldInfo] {
        &self.fields
    }

    /// Role of a reference: aggregated references are measures; otherwise the
    /// field's analytic type decides. Unknown fields count as dimensions.
    pub fn role(&self, r: &FieldRef, aggregated: bool) -> Role {
        if aggregated && !r.aggregation.is_none() {
            return Role::Measure;
        }
        match self.get(&r.fid).map(|f| f.analytic_type) {
            Some(AnalyticType::Measure) => Role::Measure,
            _ => Role::Dimension,
        }
    }

    pub fn semantic(&self, fid: &str) -> SemanticType {
        self.get(fid).map_or(SemanticType::Nominal, |f| f.semantic_type)
    }
}

fn computed_info(c: &ComputedField) -> FieldInfo {
    let (semantic_type, analytic_type) = match c.kind {
        TransformKind::Log2 | TransformKind::Log10 => {
            (SemanticType::Quantitative, AnalyticType::Measure)
        }
        TransformKind::Bin(_) => (SemanticType::Ordinal, AnalyticType::Dimension),
    };
    FieldInfo {
        fid: c.out_fid.clone(),
        semantic_type,
        analytic_type,
        origin: FieldOrigin::Computed(c.kind),
    }
}

/// A semantic problem with a spec relative to a dataset's fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code")]
pub enum Violation {
    UnresolvedField { fid: String, path: String },
    IllegalAggregation { fid: String, aggregation: Aggregation, path: String },
    MissingAggregation { fid: String, path: String },
    NonQuantitativeSource { out_fid: String, source_fid: String },
    ComputedFromComputed { out_fid: String, source_fid: String },
    DuplicateComputedField { out_fid: String },
    ComputedShadowsField { out_fid: String },
    FilterOnComputedField { fid: String },
    FilterTypeMismatch { fid: String, reason: String },
    ShapeNotAllowed { mark: MarkType },
    MeasureOnTableAxis { fid: String, path: String },
    SortFieldNotInView { fid: String },
    OutputCollision { out_fid: String },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::UnresolvedField { .. } => "UnresolvedField",
            Violation::IllegalAggregation { .. } => "IllegalAggregation",
            Violation::MissingAggregation { .. } => "MissingAggregation",
            Violation::NonQuantitativeSource { .. } => "NonQuantitativeSource",
            Violation::ComputedFromComputed { .. } => "ComputedFromComputed",
            Violation::DuplicateComputedField { .. } => "DuplicateComputedField",
            Violation::ComputedShadowsField { .. } => "ComputedShadowsField",
            Violation::FilterOnComputedField { .. } => "FilterOnComputedField",
            Violation::FilterTypeMismatch { .. } => "FilterTypeMismatch",
            Violation::ShapeNotAllowed { .. } => "ShapeNotAllowed",
            Violation::MeasureOnTableAxis { .. } => "MeasureOnTableAxis",
            Violation::SortFieldNotInView { .. } => "SortFieldNotInView",
            Violation::OutputCollision { .. } => "OutputCollision",
        }
    }
}

/// Checks a parsed spec against a dataset's fields. Violations are data:
/// an empty list means the spec can be derived and executed.
pub fn validate_against(spec: &GraphicSpec, fields: &[FieldMeta]) -> Vec<Violation> {
    let catalog = FieldCatalog::new(fields, &spec.computed);
    let dataset: HashMap<&str, &FieldMeta> = fields.iter().map(|f| (f.fid.as_str(), f)).collect();
    let mut out = Vec::new();

    let mut outputs = HashSet::new();
    for c in &spec.computed {
        if !outputs.insert(c.out_fid.as_str()) {
            out.push(Violation::DuplicateComputedField {
                out_fid: c.out_fid.clone(),
            });
        }
        if dataset.contains_key(c.out_fid.as_str()) {
            out.push(Violation::ComputedShadowsField {
                out_fid: c.out_fid.clone(),
            });
        }
        match dataset.get(c.source_fid.as_str()) {
            Some(meta) if meta.semantic_type != SemanticType::Quantitative => {
                out.push(Violation::NonQuantitativeSource {
                    out_fid: c.out_fid.clone(),
                    source_fid: c.source_fid.clone(),
                });
            }
            Some(_) => {}
            None if spec.computed.iter().any(|o| o.out_fid == c.source_fid) => {
                out.push(Violation::ComputedFromComputed {
                    out_fid: c.out_fid.clone(),
                    source_fid: c.source_fid.clone(),
                });
            }
            None => out.push(Violation::UnresolvedField {
                fid: c.source_fid.clone(),
                path: "computed".into(),
            }),
        }
    }

    let mark = default_mark(spec, fields);
    let is_table = mark == MarkType::Table;

    for channel in Channel::ORDER {
        for (i, r) in spec.channels.get(channel).iter().enumerate() {
            let path = format!("channels.{}[{i}]", channel.as_str());
            check_ref(&catalog, r, &path, spec.aggregated || is_table, &mut out);
            if is_table
                && matches!(channel, Channel::X | Channel::Y)
                && catalog.get(&r.fid).is_some()
                && (!r.aggregation.is_none() || catalog.role(r, false) == Role::Measure)
            {
                out.push(Violation::MeasureOnTableAxis {
                    fid: r.fid.clone(),
                    path,
                });
            }
        }
    }
    if is_table {
        for (i, r) in spec.table_values().iter().enumerate() {
            let path = format!("config.style.table_values[{i}]");
            check_ref(&catalog, r, &path, true, &mut out);
            if r.aggregation.is_none() && catalog.get(&r.fid).is_some() {
                out.push(Violation::MissingAggregation {
                    fid: r.fid.clone(),
                    path,
                });
            }
        }
    }

    for filter in &spec.filters {
        match dataset.get(filter.fid.as_str()) {
            Some(meta) => {
                if let Some(reason) = filter_type_problem(meta.semantic_type, &filter.rule) {
                    out.push(Violation::FilterTypeMismatch {
                        fid: filter.fid.clone(),
                        reason,
                    });
                }
            }
            None if catalog.get(&filter.fid).is_some() => {
                out.push(Violation::FilterOnComputedField {
                    fid: filter.fid.clone(),
                })
            }
            None => out.push(Violation::UnresolvedField {
                fid: filter.fid.clone(),
                path: "filters".into(),
            }),
        }
    }

    if !spec.channels.shape.is_empty() && !matches!(mark, MarkType::Point | MarkType::Circle) {
        out.push(Violation::ShapeNotAllowed { mark });
    }

    if let Some(sort) = &spec.sort {
        if catalog.get(&sort.fid).is_none() {
            out.push(Violation::UnresolvedField {
                fid: sort.fid.clone(),
                path: "sort".into(),
            });
        } else if spec.aggregated && !is_table {
            let displayed = spec.channels.iter().any(|(_, r)| r.fid == sort.fid);
            if !displayed {
                out.push(Violation::SortFieldNotInView {
                    fid: sort.fid.clone(),
                });
            }
        }
    }

    if spec.aggregated || is_table {
        let measures = spec
            .channels
            .iter()
            .map(|(_, r)| r.clone())
            .chain(if is_table { spec.table_values() } else { Vec::new() });
        let mut reported = HashSet::new();
        for r in measures.filter(|r| !r.aggregation.is_none()) {
            let out_fid = format!("{}_{}", r.fid, r.aggregation.as_str());
            if catalog.get(&out_fid).is_some() && reported.insert(out_fid.clone()) {
                out.push(Violation::OutputCollision { out_fid });
            }
        }
    }

    out
}

fn check_ref(
    catalog: &FieldCatalog,
    r: &FieldRef,
    path: &str,
    aggregated: bool,
    out: &mut Vec<Violation>,
) {
    let Some(info) = catalog.get(&r.fid) else {
        out.push(Violation::UnresolvedField {
            fid: r.fid.clone(),
            path: path.to_string(),
        });
        return;
    };
    if !aggregated {
        return;
    }
    match r.aggregation {
        Aggregation::None => {
            if info.analytic_type == AnalyticType::Measure {
                out.push(Violation::MissingAggregation {
                    fid: r.fid.clone(),
                    path: path.to_string(),
                });
            }
        }
        Aggregation::Count => {}
        agg if info.semantic_type != SemanticType::Quantitative => {
            out.push(Violation::IllegalAggregation {
                fid: r.fid.clone(),
                aggregation: agg,
                path: path.to_string(),
            });
        }
        _ => {}
    }
}

fn filter_type_problem(semantic: SemanticType, rule: &FilterRule) -> Option<String> {
    match (semantic, rule) {
        (SemanticType::Nominal, FilterRule::Range { .. }) => {
            Some("range filter on a text field".into())
        }
        (_, FilterRule::Range { .. }) => None,
        (semantic, FilterRule::OneOf(values)) => values.iter().find_map(|v| {
            let fits = match (semantic, v) {
                (_, Scalar::Null) => true,
                (SemanticType::Nominal, Scalar::Text(_)) => true,
                (SemanticType::Ordinal | SemanticType::Quantitative, Scalar::Number(_)) => true,
                (SemanticType::Temporal, Scalar::Number(_) | Scalar::Timestamp(_)) => true,
                (SemanticType::Temporal, Scalar::Text(s)) => parse_timestamp(s).is_some(),
                _ => false,
            };
            (!fits).then(|| format!("value {v} does not fit a {} field", semantic.as_str()))
        }),
    }
}
