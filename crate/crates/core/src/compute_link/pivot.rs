use serde::{Deserialize, Serialize};

use super::{aggregate_view, filter_step, DeriveError, MeasureSpec, Step, ViewStep, Workflow};
use crate::spec_model::{FieldCatalog, GraphicSpec, Role};
use crate::table_store::FieldMeta;

/// Header paths and one roll-up workflow per prefix pair. Roll-up `(i, j)`
/// groups by `col_path[..i] ++ row_path[..j]` and sits at index
/// `i * (row_path.len() + 1) + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotPlan {
    pub col_path: Vec<String>,
    pub row_path: Vec<String>,
    pub measures: Vec<MeasureSpec>,
    pub rollups: Vec<Workflow>,
}

impl PivotPlan {
    pub fn rollup_index(&self, col_depth: usize, row_depth: usize) -> usize {
        col_depth * (self.row_path.len() + 1) + row_depth
    }

    pub fn rollup(&self, col_depth: usize, row_depth: usize) -> &Workflow {
        &self.rollups[self.rollup_index(col_depth, row_depth)]
    }

    /// All `(col_depth, row_depth)` pairs in plan order.
    pub fn prefix_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let rows = self.row_path.len();
        (0..=self.col_path.len()).flat_map(move |i| (0..=rows).map(move |j| (i, j)))
    }
}

pub fn derive_pivot(spec: &GraphicSpec, fields: &[FieldMeta]) -> Result<PivotPlan, DeriveError> {
    let catalog = FieldCatalog::new(fields, &spec.computed);
    pivot_with_catalog(spec, &catalog)
}

pub(crate) fn pivot_with_catalog(
    spec: &GraphicSpec,
    catalog: &FieldCatalog,
) -> Result<PivotPlan, DeriveError> {
    let axis_path = |refs: &[crate::spec_model::FieldRef]| -> Result<Vec<String>, DeriveError> {
        let mut path = Vec::new();
        for r in refs {
            if !r.aggregation.is_none() || catalog.role(r, false) == Role::Measure {
                return Err(DeriveError::PivotError(format!(
                    "measure {:?} on a pivot axis",
                    r.fid
                )));
            }
            if catalog.get(&r.fid).is_none() {
                return Err(DeriveError::DerivationError(format!("unresolved field {:?}", r.fid)));
            }
            if !path.contains(&r.fid) {
                path.push(r.fid.clone());
            }
        }
        Ok(path)
    };
    let col_path = axis_path(&spec.channels.x)?;
    let row_path = axis_path(&spec.channels.y)?;

    let values = spec.table_values();
    let measures = match aggregate_view(spec, catalog, &values, |_| false)? {
        ViewStep::Aggregate { measures, .. } => measures,
        ViewStep::Raw { .. } => unreachable!("aggregate_view returns aggregates"),
    };

    let mut prefix = Vec::new();
    if let Some(step) = filter_step(spec, catalog)? {
        prefix.push(step);
    }
    if !spec.computed.is_empty() {
        prefix.push(Step::Transform {
            computed: spec.computed.clone(),
        });
    }

    let mut rollups = Vec::new();
    for i in 0..=col_path.len() {
        for j in 0..=row_path.len() {
            let group_by = col_path[..i].iter().chain(&row_path[..j]).cloned().collect();
            let mut steps = prefix.clone();
            steps.push(Step::View(ViewStep::Aggregate {
                group_by,
                measures: measures.clone(),
            }));
            rollups.push(Workflow::new(steps)?);
        }
    }
    Ok(PivotPlan {
        col_path,
        row_path,
        measures,
        rollups,
    })
}
