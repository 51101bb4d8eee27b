//! Compilation of workflows into a single analytical SQL statement.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compute_link::{FilterPredicate, MeasureSpec, ViewStep, Workflow};
use crate::spec_model::{Aggregation, ComputedField, FilterRule, SortDirection, TransformKind};
use crate::value::{format_number, Scalar, StorageKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SqlError {
    #[error("invalid identifier {0:?}")]
    InvalidIdentifier(String),
    #[error("{0} is not supported by the {1} dialect")]
    UnsupportedInDialect(String, Dialect),
    #[error("unknown dialect {0:?}, expected ansi or duckdb")]
    UnknownDialect(String),
}

impl SqlError {
    pub fn code(&self) -> &'static str {
        match self {
            SqlError::InvalidIdentifier(_) => "InvalidIdentifier",
            SqlError::UnsupportedInDialect(..) => "UnsupportedInDialect",
            SqlError::UnknownDialect(_) => "UnknownDialect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    Ansi,
    Duckdb,
}

impl Dialect {
    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::Ansi => "ansi",
            Dialect::Duckdb => "duckdb",
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dialect {
    type Err = SqlError;

    fn from_str(s: &str) -> Result<Dialect, SqlError> {
        match s {
            "ansi" => Ok(Dialect::Ansi),
            "duckdb" => Ok(Dialect::Duckdb),
            other => Err(SqlError::UnknownDialect(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqlQuery {
    pub dialect: Dialect,
    pub text: String,
    /// Column ids in SELECT order.
    pub output_fields: Vec<String>,
}

pub fn quote_ident(name: &str) -> Result<String, SqlError> {
    if name.is_empty() || name.contains('\0') {
        return Err(SqlError::InvalidIdentifier(name.to_string()));
    }
    Ok(format!("\"{}\"", name.replace('"', "\"\"")))
}

pub fn quote_literal(value: &Scalar) -> String {
    match value {
        Scalar::Null => "NULL".to_string(),
        Scalar::Number(v) => number_literal(*v),
        Scalar::Text(s) => format!("'{}'", s.replace('\'', "''")),
        Scalar::Timestamp(ms) => timestamp_literal(*ms),
    }
}

fn number_literal(v: f64) -> String {
    let magnitude = v.abs();
    if v == 0.0 || (1e-6..1e21).contains(&magnitude) {
        format_number(v)
    } else {
        format!("{v:e}")
    }
}

fn timestamp_literal(ms: i64) -> String {
    match chrono::DateTime::from_timestamp_millis(ms) {
        Some(dt) => format!("TIMESTAMP '{}'", dt.naive_utc().format("%Y-%m-%d %H:%M:%S%.3f")),
        None => "NULL".to_string(),
    }
}

/// SQL expression for one computed field, aliased to its output id. Bins
/// read the global bounds of the source through window functions, so the
/// expression must be evaluated over the filtered rows.
pub fn compile_transform_sql(computed: &ComputedField, _dialect: Dialect) -> Result<String, SqlError> {
    let x = quote_ident(&computed.source_fid)?;
    let out = quote_ident(&computed.out_fid)?;
    let expr = match computed.kind {
        TransformKind::Log2 => format!("CASE WHEN {x} > 0 THEN LN({x})/LN(2) END"),
        TransformKind::Log10 => format!("CASE WHEN {x} > 0 THEN LN({x})/LN(10) END"),
        TransformKind::Bin(k) => {
            let min = format!("MIN({x}) OVER ()");
            let w = format!("((MAX({x}) OVER () - {min}) / {k})");
            format!(
                "CASE WHEN {x} IS NULL THEN NULL WHEN {w} = 0 THEN {min} \
                 ELSE {min} + LEAST(FLOOR(({x} - {min}) / {w}), {}) * {w} END",
                k.saturating_sub(1)
            )
        }
    };
    Ok(format!("{expr} AS {out}"))
}

fn compile_predicate(p: &FilterPredicate) -> Result<String, SqlError> {
    let x = quote_ident(&p.fid)?;
    Ok(match &p.rule {
        FilterRule::OneOf(values) => {
            let has_null = values.iter().any(Scalar::is_null);
            let listed: Vec<String> = values
                .iter()
                .filter(|v| !v.is_null())
                .map(quote_literal)
                .collect();
            match (listed.is_empty(), has_null) {
                (true, false) => "FALSE".to_string(),
                (true, true) => format!("{x} IS NULL"),
                (false, false) => format!("{x} IN ({})", listed.join(", ")),
                (false, true) => format!("({x} IN ({}) OR {x} IS NULL)", listed.join(", ")),
            }
        }
        FilterRule::Range { lo, hi } => {
            let (lo, hi) = if p.kind == StorageKind::Timestamp {
                (
                    timestamp_literal(lo.ceil() as i64),
                    timestamp_literal(hi.floor() as i64),
                )
            } else {
                (number_literal(*lo), number_literal(*hi))
            };
            format!("{x} BETWEEN {lo} AND {hi}")
        }
    })
}

fn compile_measure(m: &MeasureSpec, dialect: Dialect) -> Result<String, SqlError> {
    let x = quote_ident(&m.fid)?;
    let expr = match (m.aggregation, dialect) {
        (Aggregation::None, _) => "CAST(NULL AS DOUBLE PRECISION)".to_string(),
        (Aggregation::Count, _) => "COUNT(*)".to_string(),
        (Aggregation::CountDistinct, _) => format!("COUNT(DISTINCT {x})"),
        (Aggregation::Sum, _) => format!("SUM({x})"),
        (Aggregation::Mean, _) => format!("AVG({x})"),
        (Aggregation::Min, _) => format!("MIN({x})"),
        (Aggregation::Max, _) => format!("MAX({x})"),
        (Aggregation::Median, Dialect::Ansi) => {
            format!("PERCENTILE_CONT(0.5) WITHIN GROUP (ORDER BY {x})")
        }
        (Aggregation::Median, Dialect::Duckdb) => format!("MEDIAN({x})"),
        (Aggregation::Variance, Dialect::Ansi) => format!("VAR_SAMP({x})"),
        (Aggregation::Variance, Dialect::Duckdb) => format!("VARIANCE({x})"),
        (Aggregation::Stddev, Dialect::Ansi) => format!("STDDEV_SAMP({x})"),
        (Aggregation::Stddev, Dialect::Duckdb) => format!("STDDEV({x})"),
    };
    Ok(format!("{expr} AS {}", quote_ident(&m.out_fid)?))
}

/// Compiles a workflow into `WITH filtered AS (...), transformed AS (...)
/// SELECT ...`. Absent steps drop their CTE. With a sort step the group
/// keys follow the sort key in ORDER BY, matching the engine's tie order.
pub fn compile_sql(workflow: &Workflow, table: &str, dialect: Dialect) -> Result<SqlQuery, SqlError> {
    let mut ctes = Vec::new();
    let mut source = quote_ident(table)?;

    if !workflow.filters().is_empty() {
        let conditions = workflow
            .filters()
            .iter()
            .map(compile_predicate)
            .collect::<Result<Vec<_>, _>>()?;
        ctes.push(format!(
            "filtered AS (SELECT * FROM {source} WHERE {})",
            conditions.join(" AND ")
        ));
        source = "filtered".to_string();
    }
    if !workflow.computed().is_empty() {
        let exprs = workflow
            .computed()
            .iter()
            .map(|c| compile_transform_sql(c, dialect))
            .collect::<Result<Vec<_>, _>>()?;
        ctes.push(format!(
            "transformed AS (SELECT *, {} FROM {source})",
            exprs.join(", ")
        ));
        source = "transformed".to_string();
    }

    let mut sql = String::new();
    if !ctes.is_empty() {
        sql.push_str("WITH ");
        sql.push_str(&ctes.join(", "));
        sql.push(' ');
    }

    let mut group_keys = Vec::new();
    match workflow.view() {
        ViewStep::Aggregate { group_by, measures } => {
            group_keys = group_by.iter().map(|f| quote_ident(f)).collect::<Result<Vec<_>, _>>()?;
            let mut select = group_keys.clone();
            for m in measures {
                select.push(compile_measure(m, dialect)?);
            }
            if select.is_empty() {
                select.push("COUNT(*) AS \"__rows\"".to_string());
            }
            sql.push_str(&format!("SELECT {} FROM {source}", select.join(", ")));
            if !group_keys.is_empty() {
                sql.push_str(&format!(" GROUP BY {}", group_keys.join(", ")));
            }
        }
        ViewStep::Raw { fids } => {
            let select = fids.iter().map(|f| quote_ident(f)).collect::<Result<Vec<_>, _>>()?;
            let select = if select.is_empty() { "*".to_string() } else { select.join(", ") };
            sql.push_str(&format!("SELECT {select} FROM {source}"));
        }
    }

    if let Some(sort) = workflow.sort() {
        let direction = match sort.direction {
            SortDirection::Asc => "ASC NULLS FIRST",
            SortDirection::Desc => "DESC NULLS LAST",
        };
        let by = quote_ident(&sort.by)?;
        let mut keys = vec![format!("{by} {direction}")];
        keys.extend(
            group_keys
                .iter()
                .filter(|k| **k != by)
                .map(|k| format!("{k} ASC NULLS FIRST")),
        );
        sql.push_str(&format!(" ORDER BY {}", keys.join(", ")));
    }

    Ok(SqlQuery {
        dialect,
        text: sql,
        output_fields: workflow.output_fids(),
    })
}
