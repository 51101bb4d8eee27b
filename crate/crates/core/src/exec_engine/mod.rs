//! In-process execution of workflows over columnar datasets.

mod aggregate;
mod transform;

pub use aggregate::aggregate;
pub use transform::{apply_transform, bin_lower_bound, ColumnStats};

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compute_link::{FilterPredicate, PivotPlan, ViewStep, Workflow};
use crate::spec_model::{Aggregation, FilterRule, SortDirection, TransformKind};
use crate::table_store::{field_ids, Column, Dataset};
use crate::value::{Scalar, StorageKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecError {
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("transform source {0:?} is not quantitative")]
    NonQuantitativeSource(String),
    #[error("numeric overflow: {0}")]
    OverflowDomain(String),
}

impl ExecError {
    pub fn code(&self) -> &'static str {
        match self {
            ExecError::UnknownField(_) => "UnknownField",
            ExecError::TypeMismatch(_) => "TypeMismatch",
            ExecError::NonQuantitativeSource(_) => "NonQuantitativeSource",
            ExecError::OverflowDomain(_) => "OverflowDomain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewField {
    pub fid: String,
    #[serde(rename = "type")]
    pub kind: StorageKind,
    /// Bin width for binned fields, used for range labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_width: Option<f64>,
}

/// The rows a chart displays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewTable {
    pub fields: Vec<ViewField>,
    pub rows: Vec<Vec<Scalar>>,
}

impl ViewTable {
    pub fn column_index(&self, fid: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.fid == fid)
    }

    pub fn field(&self, fid: &str) -> Option<&ViewField> {
        self.fields.iter().find(|f| f.fid == fid)
    }

    pub fn column_values(&self, fid: &str) -> Option<Vec<Scalar>> {
        let i = self.column_index(fid)?;
        Some(self.rows.iter().map(|r| r[i].clone()).collect())
    }

    /// Rows as objects keyed by fid, the shape charting runtimes consume.
    pub fn records(&self) -> Vec<serde_json::Value> {
        self.rows
            .iter()
            .map(|row| {
                let map = self
                    .fields
                    .iter()
                    .zip(row)
                    .map(|(f, v)| (f.fid.clone(), v.to_json()))
                    .collect();
                serde_json::Value::Object(map)
            })
            .collect()
    }
}

enum FrameColumn<'a> {
    Base(&'a Column),
    Derived(Column, Option<f64>),
}

/// Filtered rows of a dataset plus derived columns, addressed by position.
struct Frame<'a> {
    selection: Vec<usize>,
    columns: HashMap<String, FrameColumn<'a>>,
}

impl<'a> Frame<'a> {
    fn new(dataset: &'a Dataset) -> Frame<'a> {
        let columns = field_ids(dataset)
            .into_iter()
            .zip(dataset.columns())
            .map(|(fid, c)| (fid, FrameColumn::Base(c)))
            .collect();
        Frame {
            selection: (0..dataset.row_count()).collect(),
            columns,
        }
    }

    fn len(&self) -> usize {
        self.selection.len()
    }

    fn column(&self, fid: &str) -> Result<(&Column, bool), ExecError> {
        match self.columns.get(fid) {
            Some(FrameColumn::Base(c)) => Ok((c, true)),
            Some(FrameColumn::Derived(c, _)) => Ok((c, false)),
            None => Err(ExecError::UnknownField(fid.to_string())),
        }
    }

    fn bin_width(&self, fid: &str) -> Option<f64> {
        match self.columns.get(fid) {
            Some(FrameColumn::Derived(_, w)) => *w,
            _ => None,
        }
    }

    fn accessor(&self, fid: &str) -> Result<impl Fn(usize) -> Scalar + '_, ExecError> {
        let (column, base) = self.column(fid)?;
        let selection = &self.selection;
        Ok(move |pos: usize| column.value(if base { selection[pos] } else { pos }))
    }

    fn f64_accessor(&self, fid: &str) -> Result<impl Fn(usize) -> Option<f64> + '_, ExecError> {
        let (column, base) = self.column(fid)?;
        let selection = &self.selection;
        Ok(move |pos: usize| column.f64_at(if base { selection[pos] } else { pos }))
    }

    fn kind(&self, fid: &str) -> Result<StorageKind, ExecError> {
        Ok(self.column(fid)?.0.kind())
    }

    /// Materializes the selected rows of a column.
    fn gather(&self, fid: &str) -> Result<Column, ExecError> {
        let (column, base) = self.column(fid)?;
        if !base {
            return Ok(column.clone());
        }
        let values = self.selection.iter().map(|&row| column.f64_at(row)).collect();
        match column.kind() {
            StorageKind::Float64 => Ok(Column::from_f64(column.name(), values)),
            _ => Err(ExecError::NonQuantitativeSource(fid.to_string())),
        }
    }
}

/// Runs a workflow against a dataset.
pub fn execute(workflow: &Workflow, dataset: &Dataset) -> Result<ViewTable, ExecError> {
    let mut frame = Frame::new(dataset);

    for predicate in workflow.filters() {
        apply_filter(&mut frame, predicate)?;
    }

    for computed in workflow.computed() {
        let source = frame.gather(&computed.source_fid)?;
        let stats = ColumnStats::of(&source);
        let column = apply_transform(&source, &computed.out_fid, computed.kind, stats)?;
        let width = match computed.kind {
            TransformKind::Bin(k) => stats.bin_width(k),
            _ => None,
        };
        frame
            .columns
            .insert(computed.out_fid.clone(), FrameColumn::Derived(column, width));
    }

    let mut table = match workflow.view() {
        ViewStep::Aggregate { group_by, measures } => {
            let keys = group_by
                .iter()
                .map(|fid| frame.accessor(fid))
                .collect::<Result<Vec<_>, _>>()?;
            let mut index: HashMap<Vec<Scalar>, usize> = HashMap::new();
            let mut groups: Vec<(Vec<Scalar>, Vec<usize>)> = Vec::new();
            if group_by.is_empty() {
                groups.push((Vec::new(), (0..frame.len()).collect()));
            } else {
                for pos in 0..frame.len() {
                    let key: Vec<Scalar> = keys.iter().map(|k| k(pos)).collect();
                    let slot = *index.entry(key.clone()).or_insert_with(|| {
                        groups.push((key, Vec::new()));
                        groups.len() - 1
                    });
                    groups[slot].1.push(pos);
                }
            }
            groups.sort_by(|a, b| compare_tuples(&a.0, &b.0));

            let mut fields = Vec::new();
            for fid in group_by {
                fields.push(ViewField {
                    fid: fid.clone(),
                    kind: frame.kind(fid)?,
                    bin_width: frame.bin_width(fid),
                });
            }
            let mut measure_values = Vec::new();
            for m in measures {
                if m.aggregation != Aggregation::Count && frame.kind(&m.fid)? != StorageKind::Float64 {
                    return Err(ExecError::TypeMismatch(format!(
                        "{} of non-numeric field {:?}",
                        m.aggregation.as_str(),
                        m.fid
                    )));
                }
                measure_values.push(frame.f64_accessor(&m.fid)?);
                fields.push(ViewField {
                    fid: m.out_fid.clone(),
                    kind: StorageKind::Float64,
                    bin_width: None,
                });
            }
            let rows = groups
                .into_iter()
                .map(|(mut key, positions)| {
                    for (m, values) in measures.iter().zip(&measure_values) {
                        let column: Vec<Option<f64>> = positions.iter().map(|&p| values(p)).collect();
                        key.push(aggregate(m.aggregation, &column));
                    }
                    key
                })
                .collect();
            ViewTable { fields, rows }
        }
        ViewStep::Raw { fids } => {
            let accessors = fids
                .iter()
                .map(|fid| frame.accessor(fid))
                .collect::<Result<Vec<_>, _>>()?;
            let fields = fids
                .iter()
                .map(|fid| {
                    Ok(ViewField {
                        fid: fid.clone(),
                        kind: frame.kind(fid)?,
                        bin_width: frame.bin_width(fid),
                    })
                })
                .collect::<Result<_, ExecError>>()?;
            let rows = (0..frame.len())
                .map(|pos| accessors.iter().map(|a| a(pos)).collect())
                .collect();
            ViewTable { fields, rows }
        }
    };

    if let Some(sort) = workflow.sort() {
        let i = table
            .column_index(&sort.by)
            .ok_or_else(|| ExecError::UnknownField(sort.by.clone()))?;
        let descending = sort.direction == SortDirection::Desc;
        table.rows.sort_by(|a, b| {
            let ord = a[i].total_cmp(&b[i]);
            if descending {
                ord.reverse()
            } else {
                ord
            }
        });
    }
    Ok(table)
}

fn compare_tuples(a: &[Scalar], b: &[Scalar]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn apply_filter(frame: &mut Frame<'_>, predicate: &FilterPredicate) -> Result<(), ExecError> {
    let (column, base) = frame.column(&predicate.fid)?;
    if !base {
        return Err(ExecError::UnknownField(predicate.fid.clone()));
    }
    if column.kind() != predicate.kind {
        return Err(ExecError::TypeMismatch(format!(
            "filter on {:?} expects {}, column holds {}",
            predicate.fid,
            predicate.kind.as_str(),
            column.kind().as_str()
        )));
    }
    let keep: Vec<usize> = match &predicate.rule {
        FilterRule::OneOf(values) => {
            let set: HashSet<&Scalar> = values.iter().collect();
            frame
                .selection
                .iter()
                .copied()
                .filter(|&row| set.contains(&column.value(row)))
                .collect()
        }
        FilterRule::Range { lo, hi } => {
            if column.kind() == StorageKind::Utf8 {
                return Err(ExecError::TypeMismatch(format!(
                    "range filter on text field {:?}",
                    predicate.fid
                )));
            }
            frame
                .selection
                .iter()
                .copied()
                .filter(|&row| column.f64_at(row).is_some_and(|v| *lo <= v && v <= *hi))
                .collect()
        }
    };
    frame.selection = keep;
    Ok(())
}

/// Executes every roll-up of a pivot plan, in plan order.
pub fn execute_pivot(plan: &PivotPlan, dataset: &Dataset) -> Result<Vec<ViewTable>, ExecError> {
    plan.rollups.iter().map(|wf| execute(wf, dataset)).collect()
}
