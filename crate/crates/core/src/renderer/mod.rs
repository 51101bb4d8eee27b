//! Render artifacts: Vega-Lite documents for charts, pivot models for
//! table marks, and a self-contained HTML export of several tabs.

mod chart;
mod html;
mod pivot;

pub use chart::{to_chart, ChartDoc, VEGA_LITE_SCHEMA};
pub use html::{export_html, Tab};
pub use pivot::{to_pivot, HeaderNode, PivotCell, PivotModel};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("field {0:?} is not in the view data")]
    MissingField(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("inconsistent roll-ups: {0}")]
    InconsistentRollups(String),
}

impl RenderError {
    pub fn code(&self) -> &'static str {
        match self {
            RenderError::MissingField(_) | RenderError::Unsupported(_) => "RenderError",
            RenderError::InconsistentRollups(_) => "InconsistentRollups",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "document", rename_all = "snake_case")]
pub enum RenderArtifact {
    Chart(ChartDoc),
    Pivot(PivotModel),
}
