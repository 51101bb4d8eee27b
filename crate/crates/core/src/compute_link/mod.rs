//! Derivation of computation workflows from chart specs.
//!
//! A [`Workflow`] is the ordered list of steps needed to turn raw rows into
//! the view data of one chart: filter, transform, view (aggregate or raw
//! projection) and sort. It carries everything an executor needs, so it
//! can be shipped to another backend without the spec or the dataset's
//! field metadata.
//!
//! Axis algebra:
//! - *nest*: an ordered dimension path on one axis (facet nesting, pivot
//!   header hierarchy);
//! - *cross*: the pairing of x-outer and y-outer dimensions into a facet grid;
//! - *blend*: several measures sharing one axis, one panel per measure.

mod facet;
mod pivot;

pub use facet::{derive_facets, FacetPlan, MeasureAxis};
pub use pivot::{derive_pivot, PivotPlan};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spec_model::{
    default_mark, Aggregation, ComputedField, FieldCatalog, FieldRef, FilterRule, GraphicSpec,
    MarkType, Role, SortDirection,
};
use crate::table_store::FieldMeta;
use crate::value::{parse_timestamp, Scalar, StorageKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeriveError {
    #[error("cannot derive workflow: {0}")]
    DerivationError(String),
    #[error("cannot derive facets: {0}")]
    FacetError(String),
    #[error("cannot derive pivot: {0}")]
    PivotError(String),
    #[error("invalid workflow: {0}")]
    InvalidWorkflow(String),
}

impl DeriveError {
    pub fn code(&self) -> &'static str {
        match self {
            DeriveError::DerivationError(_) => "DerivationError",
            DeriveError::FacetError(_) => "FacetError",
            DeriveError::PivotError(_) => "PivotError",
            DeriveError::InvalidWorkflow(_) => "InvalidWorkflow",
        }
    }
}

/// A filter resolved against the column's storage kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterPredicate {
    pub fid: String,
    pub kind: StorageKind,
    pub rule: FilterRule,
}

impl FilterPredicate {
    /// Converts temporal set members given as ISO text or epoch millis into
    /// timestamps so that comparisons are exact.
    fn normalized(mut self) -> Result<FilterPredicate, DeriveError> {
        if self.kind != StorageKind::Timestamp {
            return Ok(self);
        }
        if let FilterRule::OneOf(values) = &mut self.rule {
            for v in values.iter_mut() {
                *v = match std::mem::replace(v, Scalar::Null) {
                    Scalar::Text(s) => parse_timestamp(&s).map(Scalar::Timestamp).ok_or_else(|| {
                        DeriveError::InvalidWorkflow(format!("{s:?} is not an ISO-8601 date"))
                    })?,
                    Scalar::Number(ms) => Scalar::Timestamp(ms as i64),
                    other => other,
                };
            }
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub fid: String,
    pub aggregation: Aggregation,
    pub out_fid: String,
}

impl MeasureSpec {
    pub fn new(fid: &str, aggregation: Aggregation) -> MeasureSpec {
        MeasureSpec {
            fid: fid.to_string(),
            aggregation,
            out_fid: format!("{fid}_{}", aggregation.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ViewStep {
    Aggregate {
        group_by: Vec<String>,
        measures: Vec<MeasureSpec>,
    },
    Raw {
        fids: Vec<String>,
    },
}

impl ViewStep {
    /// Output column ids in SELECT order.
    pub fn output_fids(&self) -> Vec<String> {
        match self {
            ViewStep::Aggregate { group_by, measures } => group_by
                .iter()
                .cloned()
                .chain(measures.iter().map(|m| m.out_fid.clone()))
                .collect(),
            ViewStep::Raw { fids } => fids.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SortStep {
    /// Output column of the view step.
    pub by: String,
    pub direction: SortDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Step {
    Filter { filters: Vec<FilterPredicate> },
    Transform { computed: Vec<ComputedField> },
    View(ViewStep),
    Sort(SortStep),
}

impl Step {
    fn rank(&self) -> u8 {
        match self {
            Step::Filter { .. } => 0,
            Step::Transform { .. } => 1,
            Step::View(_) => 2,
            Step::Sort(_) => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workflow {
    pub steps: Vec<Step>,
}

impl Workflow {
    /// Builds a workflow, checking step order and the mandatory view step.
    pub fn new(steps: Vec<Step>) -> Result<Workflow, DeriveError> {
        let ranks: Vec<u8> = steps.iter().map(Step::rank).collect();
        if ranks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DeriveError::InvalidWorkflow(
                "steps must appear once each, in the order filter, transform, view, sort".into(),
            ));
        }
        if !ranks.contains(&2) {
            return Err(DeriveError::InvalidWorkflow("a view step is required".into()));
        }
        let steps = steps
            .into_iter()
            .map(|step| match step {
                Step::Filter { filters } => Ok(Step::Filter {
                    filters: filters
                        .into_iter()
                        .map(FilterPredicate::normalized)
                        .collect::<Result<_, _>>()?,
                }),
                other => Ok(other),
            })
            .collect::<Result<_, DeriveError>>()?;
        let workflow = Workflow { steps };
        if let Some(sort) = workflow.sort() {
            if !workflow.view().output_fids().contains(&sort.by) {
                return Err(DeriveError::InvalidWorkflow(format!(
                    "sort key {:?} is not a view output",
                    sort.by
                )));
            }
        }
        Ok(workflow)
    }

    /// Parses the JSON wire format.
    pub fn from_json(value: serde_json::Value) -> Result<Workflow, DeriveError> {
        let raw: Workflow = serde_json::from_value(value)
            .map_err(|e| DeriveError::InvalidWorkflow(e.to_string()))?;
        Workflow::new(raw.steps)
    }

    pub fn filters(&self) -> &[FilterPredicate] {
        self.steps
            .iter()
            .find_map(|s| match s {
                Step::Filter { filters } => Some(filters.as_slice()),
                _ => None,
            })
            .unwrap_or(&[])
    }

    pub fn computed(&self) -> &[ComputedField] {
        self.steps
            .iter()
            .find_map(|s| match s {
                Step::Transform { computed } => Some(computed.as_slice()),
                _ => None,
            })
            .unwrap_or(&[])
    }

    pub fn view(&self) -> &ViewStep {
        self.steps
            .iter()
            .find_map(|s| match s {
                Step::View(v) => Some(v),
                _ => None,
            })
            .expect("constructed workflows always contain a view step")
    }

    pub fn sort(&self) -> Option<&SortStep> {
        self.steps.iter().find_map(|s| match s {
            Step::Sort(s) => Some(s),
            _ => None,
        })
    }

    /// Column ids of the final result, in order.
    pub fn output_fids(&self) -> Vec<String> {
        self.view().output_fids()
    }
}

/// Derives the workflow that computes a chart's view data.
pub fn derive_workflow(spec: &GraphicSpec, fields: &[FieldMeta]) -> Result<Workflow, DeriveError> {
    let catalog = FieldCatalog::new(fields, &spec.computed);
    let is_table = default_mark(spec, fields) == MarkType::Table;
    derive_with_catalog(spec, &catalog, is_table)
}

/// Derivation without dataset metadata, for compiling SQL against tables the
/// engine has never seen. Roles are taken from how the spec uses each field.
pub fn derive_workflow_from_usage(spec: &GraphicSpec) -> Result<Workflow, DeriveError> {
    let catalog = FieldCatalog::from_spec_usage(spec);
    derive_with_catalog(spec, &catalog, spec.mark == MarkType::Table)
}

pub(crate) fn derive_with_catalog(
    spec: &GraphicSpec,
    catalog: &FieldCatalog,
    is_table: bool,
) -> Result<Workflow, DeriveError> {
    let mut steps = Vec::new();
    if let Some(step) = filter_step(spec, catalog)? {
        steps.push(step);
    }
    if !spec.computed.is_empty() {
        steps.push(Step::Transform {
            computed: spec.computed.clone(),
        });
    }
    let aggregated = spec.aggregated || is_table;
    let view = if aggregated {
        let mut extra = Vec::new();
        if is_table {
            extra = spec.table_values();
        }
        aggregate_view(spec, catalog, &extra, |_| true)?
    } else {
        let mut fids = Vec::new();
        let mut seen = HashSet::new();
        let sort_fid = spec.sort.as_ref().map(|s| s.fid.clone());
        for fid in spec.channels.iter().map(|(_, r)| r.fid.clone()).chain(sort_fid) {
            require(catalog, &fid)?;
            if seen.insert(fid.clone()) {
                fids.push(fid);
            }
        }
        ViewStep::Raw { fids }
    };
    if let (Some(sort), false) = (&spec.sort, is_table) {
        let by = match &view {
            ViewStep::Raw { .. } => sort.fid.clone(),
            ViewStep::Aggregate { group_by, measures } => {
                if group_by.contains(&sort.fid) {
                    sort.fid.clone()
                } else {
                    measures
                        .iter()
                        .find(|m| m.fid == sort.fid)
                        .map(|m| m.out_fid.clone())
                        .ok_or_else(|| {
                            DeriveError::DerivationError(format!(
                                "sort field {:?} is not part of the view",
                                sort.fid
                            ))
                        })?
                }
            }
        };
        steps.push(Step::View(view));
        steps.push(Step::Sort(SortStep {
            by,
            direction: sort.direction,
        }));
    } else {
        steps.push(Step::View(view));
    }
    Workflow::new(steps)
}

/// Aggregate view over the spec's channels (restricted by `keep`) plus
/// `extra` measures.
pub(crate) fn aggregate_view(
    spec: &GraphicSpec,
    catalog: &FieldCatalog,
    extra: &[FieldRef],
    keep: impl Fn(&FieldRef) -> bool,
) -> Result<ViewStep, DeriveError> {
    let mut group_by = Vec::new();
    let mut measures: Vec<MeasureSpec> = Vec::new();
    let refs = spec
        .channels
        .iter()
        .map(|(_, r)| r)
        .filter(|r| keep(r))
        .chain(extra.iter());
    for r in refs {
        require(catalog, &r.fid)?;
        match catalog.role(r, true) {
            Role::Measure if !r.aggregation.is_none() => {
                let m = MeasureSpec::new(&r.fid, r.aggregation);
                if !measures.contains(&m) {
                    measures.push(m);
                }
            }
            Role::Measure => {
                return Err(DeriveError::DerivationError(format!(
                    "measure {:?} has no aggregation",
                    r.fid
                )))
            }
            Role::Dimension => {
                if !group_by.contains(&r.fid) {
                    group_by.push(r.fid.clone());
                }
            }
        }
    }
    Ok(ViewStep::Aggregate { group_by, measures })
}

pub(crate) fn filter_step(
    spec: &GraphicSpec,
    catalog: &FieldCatalog,
) -> Result<Option<Step>, DeriveError> {
    if spec.filters.is_empty() {
        return Ok(None);
    }
    let mut filters = spec
        .filters
        .iter()
        .map(|f| {
            require(catalog, &f.fid)?;
            FilterPredicate {
                fid: f.fid.clone(),
                kind: catalog.semantic(&f.fid).storage(),
                rule: f.rule.clone(),
            }
            .normalized()
        })
        .collect::<Result<Vec<_>, _>>()?;
    // Canonical order makes derivation independent of filter declaration order.
    filters.sort_by_cached_key(|f| {
        (
            f.fid.clone(),
            serde_json::to_string(&f.rule).unwrap_or_default(),
        )
    });
    Ok(Some(Step::Filter { filters }))
}

fn require(catalog: &FieldCatalog, fid: &str) -> Result<(), DeriveError> {
    match catalog.get(fid) {
        Some(_) => Ok(()),
        None => Err(DeriveError::DerivationError(format!("unresolved field {fid:?}"))),
    }
}
