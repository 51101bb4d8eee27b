//! Spec to result in one call: validate, derive, execute and render.

use serde::Serialize;
use thiserror::Error;

use crate::compute_link::{
    derive_facets, derive_pivot, derive_workflow, derive_workflow_from_usage, DeriveError,
    PivotPlan, Workflow,
};
use crate::exec_engine::{execute, execute_pivot, ExecError, ViewTable};
use crate::renderer::{to_chart, to_pivot, RenderArtifact, RenderError};
use crate::spec_model::{default_mark, validate_against, GraphicSpec, MarkType, Violation};
use crate::sql_compiler::{compile_sql, Dialect, SqlError, SqlQuery};
use crate::table_store::{Dataset, FieldMeta};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("spec is invalid for this dataset ({} violations)", .0.len())]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Sql(#[from] SqlError),
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Invalid(_) => "ValidationFailed",
            PipelineError::Derive(e) => e.code(),
            PipelineError::Exec(e) => e.code(),
            PipelineError::Render(e) => e.code(),
            PipelineError::Sql(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum QueryResult {
    View {
        #[serde(flatten)]
        view: ViewTable,
        workflow: Workflow,
    },
    Pivot {
        rollups: Vec<ViewTable>,
        plan: PivotPlan,
    },
}

fn validated(spec: &GraphicSpec, fields: &[FieldMeta]) -> Result<(), PipelineError> {
    let violations = validate_against(spec, fields);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(PipelineError::Invalid(violations))
    }
}

pub fn query(
    spec: &GraphicSpec,
    dataset: &Dataset,
    fields: &[FieldMeta],
) -> Result<QueryResult, PipelineError> {
    validated(spec, fields)?;
    if default_mark(spec, fields) == MarkType::Table {
        let plan = derive_pivot(spec, fields)?;
        let rollups = execute_pivot(&plan, dataset)?;
        return Ok(QueryResult::Pivot { rollups, plan });
    }
    let workflow = derive_workflow(spec, fields)?;
    let view = execute(&workflow, dataset)?;
    Ok(QueryResult::View { view, workflow })
}

pub fn render(
    spec: &GraphicSpec,
    dataset: &Dataset,
    fields: &[FieldMeta],
) -> Result<RenderArtifact, PipelineError> {
    match query(spec, dataset, fields)? {
        QueryResult::Pivot { rollups, plan } => Ok(RenderArtifact::Pivot(to_pivot(&plan, &rollups)?)),
        QueryResult::View { view, .. } => {
            let plan = derive_facets(spec, fields)?;
            Ok(RenderArtifact::Chart(to_chart(spec, fields, &plan, &view)?))
        }
    }
}

/// SQL for a spec. Without dataset fields, roles are inferred from usage.
pub fn spec_sql(
    spec: &GraphicSpec,
    fields: Option<&[FieldMeta]>,
    table: &str,
    dialect: Dialect,
) -> Result<SqlQuery, PipelineError> {
    let workflow = match fields {
        Some(fields) => {
            validated(spec, fields)?;
            derive_workflow(spec, fields)?
        }
        None => derive_workflow_from_usage(spec)?,
    };
    Ok(compile_sql(&workflow, table, dialect)?)
}
