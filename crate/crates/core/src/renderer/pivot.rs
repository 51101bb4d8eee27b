use std::collections::HashSet;

use serde::Serialize;

use super::RenderError;
use crate::compute_link::PivotPlan;
use crate::exec_engine::ViewTable;
use crate::value::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeaderNode {
    pub value: Scalar,
    /// Length of the header path ending at this node; the root is 0.
    pub depth: usize,
    pub children: Vec<HeaderNode>,
    pub leaf_span: usize,
}

impl HeaderNode {
    fn root() -> HeaderNode {
        HeaderNode {
            value: Scalar::Null,
            depth: 0,
            children: Vec::new(),
            leaf_span: 1,
        }
    }

    fn insert(&mut self, path: &[Scalar]) {
        let Some((head, rest)) = path.split_first() else {
            return;
        };
        let pos = match self.children.iter().position(|c| &c.value == head) {
            Some(pos) => pos,
            None => {
                self.children.push(HeaderNode {
                    value: head.clone(),
                    depth: self.depth + 1,
                    children: Vec::new(),
                    leaf_span: 1,
                });
                self.children.len() - 1
            }
        };
        self.children[pos].insert(rest);
    }

    fn finish(&mut self) {
        self.children.sort_by(|a, b| a.value.total_cmp(&b.value));
        for child in &mut self.children {
            child.finish();
        }
        self.leaf_span = if self.children.is_empty() {
            1
        } else {
            self.children.iter().map(|c| c.leaf_span).sum()
        };
    }

    /// Header paths of the leaves, left to right.
    pub fn leaf_paths(&self) -> Vec<Vec<Scalar>> {
        if self.children.is_empty() {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for child in &self.children {
            for mut tail in child.leaf_paths() {
                tail.insert(0, child.value.clone());
                out.push(tail);
            }
        }
        out
    }
}

/// Aggregated values of one (column prefix, row prefix) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PivotCell {
    pub col: Vec<Scalar>,
    pub row: Vec<Scalar>,
    pub values: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PivotModel {
    pub col_path: Vec<String>,
    pub row_path: Vec<String>,
    pub col_tree: HeaderNode,
    pub row_tree: HeaderNode,
    pub measures: Vec<String>,
    /// Every prefix pair of every roll-up, so any expansion state can be
    /// shown without further queries.
    pub cells: Vec<PivotCell>,
}

impl PivotModel {
    pub fn cell(&self, col: &[Scalar], row: &[Scalar]) -> Option<&PivotCell> {
        self.cells.iter().find(|c| c.col == col && c.row == row)
    }
}

fn keys(table: &ViewTable, width: usize) -> Vec<Vec<Scalar>> {
    table.rows.iter().map(|r| r[..width].to_vec()).collect()
}

pub fn to_pivot(plan: &PivotPlan, rollups: &[ViewTable]) -> Result<PivotModel, RenderError> {
    let (c, r) = (plan.col_path.len(), plan.row_path.len());
    if rollups.len() != (c + 1) * (r + 1) {
        return Err(RenderError::InconsistentRollups(format!(
            "expected {} roll-ups, got {}",
            (c + 1) * (r + 1),
            rollups.len()
        )));
    }
    let table = |i: usize, j: usize| &rollups[plan.rollup_index(i, j)];
    for (i, j) in plan.prefix_pairs() {
        let width = i + j;
        let t = table(i, j);
        if t.fields.len() < width + plan.measures.len() || t.rows.iter().any(|row| row.len() != t.fields.len()) {
            return Err(RenderError::InconsistentRollups(format!("roll-up ({i}, {j}) has the wrong shape")));
        }
        let present: HashSet<Vec<Scalar>> = keys(t, width).into_iter().collect();
        let check = |finer: &ViewTable, project: &dyn Fn(&[Scalar]) -> Vec<Scalar>| {
            for row in &finer.rows {
                let key = project(row);
                if !present.contains(&key) {
                    let shown: Vec<String> = key.iter().map(Scalar::to_text).collect();
                    return Err(RenderError::InconsistentRollups(format!(
                        "path [{}] is missing from roll-up ({i}, {j})",
                        shown.join(", ")
                    )));
                }
            }
            Ok(())
        };
        if i < c {
            // Finer by one column level: drop the extra column value.
            check(table(i + 1, j), &|row| {
                row[..i].iter().chain(&row[i + 1..i + 1 + j]).cloned().collect()
            })?;
        }
        if j < r {
            check(table(i, j + 1), &|row| row[..i + j].to_vec())?;
        }
    }

    let mut col_tree = HeaderNode::root();
    for key in keys(table(c, 0), c) {
        col_tree.insert(&key);
    }
    col_tree.finish();
    let mut row_tree = HeaderNode::root();
    for key in keys(table(0, r), r) {
        row_tree.insert(&key);
    }
    row_tree.finish();

    let mut cells = Vec::new();
    for (i, j) in plan.prefix_pairs() {
        for row in &table(i, j).rows {
            cells.push(PivotCell {
                col: row[..i].to_vec(),
                row: row[i..i + j].to_vec(),
                values: row[i + j..].to_vec(),
            });
        }
    }
    Ok(PivotModel {
        col_path: plan.col_path.clone(),
        row_path: plan.row_path.clone(),
        col_tree,
        row_tree,
        measures: plan.measures.iter().map(|m| m.out_fid.clone()).collect(),
        cells,
    })
}
