use serde::{Deserialize, Serialize};

use super::{DeriveError, MeasureSpec};
use crate::spec_model::{FieldCatalog, FieldRef, GraphicSpec, Role};
use crate::table_store::FieldMeta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureAxis {
    X,
    Y,
    None,
}

/// Placement of view fields on a chart: inner axis fields, facet paths
/// (outer to inner) and blended measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetPlan {
    pub x_inner: Option<String>,
    pub y_inner: Option<String>,
    pub col_facets: Vec<String>,
    pub row_facets: Vec<String>,
    pub measure_axis: MeasureAxis,
    /// View output ids of the measures sharing `measure_axis`.
    pub measures: Vec<String>,
}

impl FacetPlan {
    /// Every view column placed by the plan.
    pub fn fields(&self) -> Vec<String> {
        self.col_facets
            .iter()
            .chain(&self.row_facets)
            .chain(self.x_inner.iter())
            .chain(self.y_inner.iter())
            .chain(&self.measures)
            .cloned()
            .collect()
    }
}

struct AxisSplit {
    dims: Vec<String>,
    measures: Vec<String>,
}

fn split_axis(
    name: &str,
    refs: &[FieldRef],
    catalog: &FieldCatalog,
    aggregated: bool,
) -> Result<AxisSplit, DeriveError> {
    let mut split = AxisSplit {
        dims: Vec::new(),
        measures: Vec::new(),
    };
    for r in refs {
        match catalog.role(r, aggregated) {
            Role::Dimension => {
                if !split.measures.is_empty() {
                    return Err(DeriveError::FacetError(format!(
                        "dimension {:?} follows a measure on the {name} axis",
                        r.fid
                    )));
                }
                split.dims.push(r.fid.clone());
            }
            Role::Measure => {
                let out = if aggregated && !r.aggregation.is_none() {
                    MeasureSpec::new(&r.fid, r.aggregation).out_fid
                } else {
                    r.fid.clone()
                };
                if !split.measures.contains(&out) {
                    split.measures.push(out);
                }
            }
        }
    }
    Ok(split)
}

/// Nesting on each axis: the last dimension is the axis field and earlier
/// ones become facets. Measures on one axis blend; measures on both axes
/// make a scatter of the innermost measure of each.
pub fn derive_facets(spec: &GraphicSpec, fields: &[FieldMeta]) -> Result<FacetPlan, DeriveError> {
    let catalog = FieldCatalog::new(fields, &spec.computed);
    facets_with_catalog(spec, &catalog)
}

pub(crate) fn facets_with_catalog(
    spec: &GraphicSpec,
    catalog: &FieldCatalog,
) -> Result<FacetPlan, DeriveError> {
    let x = split_axis("x", &spec.channels.x, catalog, spec.aggregated)?;
    let y = split_axis("y", &spec.channels.y, catalog, spec.aggregated)?;

    let inner_dim = |mut dims: Vec<String>| {
        let inner = dims.pop();
        (inner, dims)
    };

    match (x.measures.is_empty(), y.measures.is_empty()) {
        (false, false) => {
            if x.measures.len() > 1 || y.measures.len() > 1 {
                return Err(DeriveError::FacetError(
                    "measures on both axes must be single fields".into(),
                ));
            }
            Ok(FacetPlan {
                x_inner: x.measures.into_iter().next(),
                y_inner: y.measures.into_iter().next(),
                col_facets: x.dims,
                row_facets: y.dims,
                measure_axis: MeasureAxis::None,
                measures: Vec::new(),
            })
        }
        (true, false) => {
            let (x_inner, col_facets) = inner_dim(x.dims);
            Ok(FacetPlan {
                x_inner,
                y_inner: None,
                col_facets,
                row_facets: y.dims,
                measure_axis: MeasureAxis::Y,
                measures: y.measures,
            })
        }
        (false, true) => {
            let (y_inner, row_facets) = inner_dim(y.dims);
            Ok(FacetPlan {
                x_inner: None,
                y_inner,
                col_facets: x.dims,
                row_facets,
                measure_axis: MeasureAxis::X,
                measures: x.measures,
            })
        }
        (true, true) => {
            let (x_inner, col_facets) = inner_dim(x.dims);
            let (y_inner, row_facets) = inner_dim(y.dims);
            Ok(FacetPlan {
                x_inner,
                y_inner,
                col_facets,
                row_facets,
                measure_axis: MeasureAxis::None,
                measures: Vec::new(),
            })
        }
    }
}
