//! Brute-force reference semantics for workflows: one pass per step over
//! row records, linear-search grouping, textbook aggregate formulas.

use std::collections::HashMap;

use walkd_core::compute_link::{ViewStep, Workflow};
use walkd_core::spec_model::{Aggregation, FilterRule, SortDirection, TransformKind};
use walkd_core::table_store::{field_ids, Dataset};
use walkd_core::value::Scalar;

type Record = HashMap<String, Scalar>;

fn num(v: f64) -> Scalar {
    Scalar::number(v)
}

pub fn bin(v: f64, min: f64, max: f64, k: u32) -> f64 {
    let w = (max - min) / k as f64;
    if w == 0.0 {
        return min;
    }
    let mut j = ((v - min) / w).floor();
    if j > (k - 1) as f64 {
        j = (k - 1) as f64;
    }
    min + j * w
}

fn aggregate(agg: Aggregation, rows: &[&Record], fid: &str) -> Scalar {
    let xs: Vec<f64> = rows
        .iter()
        .filter_map(|r| match r.get(fid) {
            Some(Scalar::Number(v)) => Some(*v),
            _ => None,
        })
        .collect();
    let n = xs.len() as f64;
    match agg {
        Aggregation::None => Scalar::Null,
        Aggregation::Count => num(rows.len() as f64),
        Aggregation::CountDistinct => {
            let mut seen: Vec<f64> = Vec::new();
            for x in &xs {
                if !seen.contains(x) {
                    seen.push(*x);
                }
            }
            num(seen.len() as f64)
        }
        _ if xs.is_empty() => Scalar::Null,
        Aggregation::Sum => num(xs.iter().sum()),
        Aggregation::Mean => num(xs.iter().sum::<f64>() / n),
        Aggregation::Min => num(xs.iter().cloned().fold(f64::INFINITY, f64::min)),
        Aggregation::Max => num(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        Aggregation::Median => {
            let mut s = xs.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let m = s.len() / 2;
            if s.len() % 2 == 1 {
                num(s[m])
            } else {
                num((s[m - 1] + s[m]) / 2.0)
            }
        }
        Aggregation::Variance | Aggregation::Stddev => {
            if xs.len() < 2 {
                return Scalar::Null;
            }
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            if agg == Aggregation::Variance {
                num(var)
            } else {
                num(var.sqrt())
            }
        }
    }
}

pub fn run(workflow: &Workflow, dataset: &Dataset) -> Vec<Vec<Scalar>> {
    let fids = field_ids(dataset);
    let mut records: Vec<Record> = (0..dataset.row_count())
        .map(|i| fids.iter().cloned().zip(dataset.row(i)).collect())
        .collect();

    records.retain(|r| {
        workflow.filters().iter().all(|p| {
            let v = &r[&p.fid];
            match &p.rule {
                FilterRule::OneOf(values) => values.iter().any(|x| x == v),
                FilterRule::Range { lo, hi } => match v.as_f64() {
                    Some(x) => *lo <= x && x <= *hi,
                    None => false,
                },
            }
        })
    });

    for c in workflow.computed() {
        let present: Vec<f64> = records
            .iter()
            .filter_map(|r| match &r[&c.source_fid] {
                Scalar::Number(v) => Some(*v),
                _ => None,
            })
            .collect();
        let min = present.iter().cloned().reduce(f64::min);
        let max = present.iter().cloned().reduce(f64::max);
        for r in records.iter_mut() {
            let out = match (&r[&c.source_fid], c.kind) {
                (Scalar::Number(v), TransformKind::Log2) if *v > 0.0 => num(v.log2()),
                (Scalar::Number(v), TransformKind::Log10) if *v > 0.0 => num(v.log10()),
                (Scalar::Number(v), TransformKind::Bin(k)) => num(bin(*v, min.unwrap(), max.unwrap(), k)),
                _ => Scalar::Null,
            };
            r.insert(c.out_fid.clone(), out);
        }
    }

    let mut rows: Vec<Vec<Scalar>> = match workflow.view() {
        ViewStep::Raw { fids } => records
            .iter()
            .map(|r| fids.iter().map(|f| r[f].clone()).collect())
            .collect(),
        ViewStep::Aggregate { group_by, measures } => {
            let mut groups: Vec<(Vec<Scalar>, Vec<&Record>)> = Vec::new();
            if group_by.is_empty() {
                groups.push((vec![], records.iter().collect()));
            } else {
                for r in &records {
                    let key: Vec<Scalar> = group_by.iter().map(|f| r[f].clone()).collect();
                    match groups.iter_mut().find(|(k, _)| *k == key) {
                        Some((_, members)) => members.push(r),
                        None => groups.push((key, vec![r])),
                    }
                }
            }
            groups
                .into_iter()
                .map(|(mut key, members)| {
                    for m in measures {
                        key.push(aggregate(m.aggregation, &members, &m.fid));
                    }
                    key
                })
                .collect()
        }
    };

    if let Some(sort) = workflow.sort() {
        let i = workflow.output_fids().iter().position(|f| *f == sort.by).unwrap();
        // Ties keep group-key order, as the SQL path appends the keys.
        rows = super::canonical(rows);
        rows.sort_by(|a, b| {
            let o = a[i].total_cmp(&b[i]);
            if sort.direction == SortDirection::Desc {
                o.reverse()
            } else {
                o
            }
        });
    }
    rows
}
