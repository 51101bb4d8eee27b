use serde_json::{json, Map, Value};

use super::RenderError;
use crate::compute_link::{FacetPlan, MeasureAxis, MeasureSpec};
use crate::exec_engine::ViewTable;
use crate::spec_model::{
    default_mark, Channel, Coord, FieldCatalog, FieldRef, GraphicSpec, Layout, MarkType, Role,
    StackMode,
};
use crate::table_store::FieldMeta;
use crate::value::{format_number, Scalar};

pub const VEGA_LITE_SCHEMA: &str = "https://vega.github.io/schema/vega-lite/v5.json";

/// A Vega-Lite v5 document with the view data inlined.
pub type ChartDoc = Value;

struct Ctx<'a> {
    spec: &'a GraphicSpec,
    catalog: FieldCatalog,
    view: &'a ViewTable,
    mark: MarkType,
    sorted: bool,
}

impl Ctx<'_> {
    fn require(&self, fid: &str) -> Result<(), RenderError> {
        match self.view.column_index(fid) {
            Some(_) => Ok(()),
            None => Err(RenderError::MissingField(fid.to_string())),
        }
    }

    /// Measure outputs are not catalog fields and are always quantitative.
    fn vl_type(&self, fid: &str) -> &'static str {
        self.catalog
            .get(fid)
            .map_or("quantitative", |f| f.semantic_type.as_str())
    }

    fn view_fid(&self, r: &FieldRef) -> String {
        if self.spec.aggregated && self.catalog.role(r, true) == Role::Measure && !r.aggregation.is_none() {
            MeasureSpec::new(&r.fid, r.aggregation).out_fid
        } else {
            r.fid.clone()
        }
    }

    /// `guide` is where bin range labels go: `axis`, `legend` or `header`.
    fn field_def(&self, fid: &str, guide: &str) -> Result<Map<String, Value>, RenderError> {
        self.require(fid)?;
        let mut def = Map::new();
        def.insert("field".into(), json!(escape_field(fid)));
        def.insert("type".into(), json!(self.vl_type(fid)));
        if let Some(width) = self.view.field(fid).and_then(|f| f.bin_width) {
            let w = format_number(width);
            def.insert(
                guide.into(),
                json!({
                    "labelExpr": format!(
                        "format(datum.value, '~g') + '–' + format(datum.value + {w}, '~g')"
                    )
                }),
            );
        }
        Ok(def)
    }

    fn axis_def(&self, fid: &str, is_measure: bool) -> Result<Value, RenderError> {
        let mut def = self.field_def(fid, "axis")?;
        if is_measure {
            let stack = match self.spec.stack {
                StackMode::Stack => json!("zero"),
                StackMode::Normalize => json!("normalize"),
                StackMode::None => Value::Null,
            };
            def.insert("stack".into(), stack);
        } else if self.sorted {
            def.insert("sort".into(), Value::Null);
        }
        Ok(Value::Object(def))
    }

    fn unit(&self, plan: &FacetPlan, measure: Option<&str>) -> Result<Value, RenderError> {
        let mut encoding = Map::new();
        let (x, x_measure) = match (plan.measure_axis, measure) {
            (MeasureAxis::X, Some(m)) => (Some(m), true),
            _ => (plan.x_inner.as_deref(), false),
        };
        let (y, y_measure) = match (plan.measure_axis, measure) {
            (MeasureAxis::Y, Some(m)) => (Some(m), true),
            _ => (plan.y_inner.as_deref(), false),
        };
        if let Some(x) = x {
            encoding.insert("x".into(), self.axis_def(x, x_measure)?);
        }
        if let Some(y) = y {
            encoding.insert("y".into(), self.axis_def(y, y_measure)?);
        }
        for channel in [Channel::Color, Channel::Size, Channel::Shape, Channel::Opacity] {
            if let Some(r) = self.spec.channels.get(channel).first() {
                let mut def = self.field_def(&self.view_fid(r), "legend")?;
                if channel == Channel::Color && self.spec.config.palette != "default" {
                    def.insert("scale".into(), json!({ "scheme": self.spec.config.palette }));
                }
                encoding.insert(channel.as_str().into(), Value::Object(def));
            }
        }
        let tooltip: Vec<Value> = self
            .view
            .fields
            .iter()
            .map(|f| json!({"field": escape_field(&f.fid), "type": self.vl_type(&f.fid)}))
            .collect();
        if !tooltip.is_empty() {
            encoding.insert("tooltip".into(), Value::Array(tooltip));
        }
        let mut unit = Map::new();
        if let Layout::Fixed { w, h } = self.spec.config.layout {
            unit.insert("width".into(), json!(w));
            unit.insert("height".into(), json!(h));
        }
        unit.insert("mark".into(), json!({ "type": self.mark.as_str() }));
        unit.insert("encoding".into(), Value::Object(encoding));
        Ok(Value::Object(unit))
    }

    fn records(&self, rows: &[&Vec<Scalar>]) -> Value {
        let values = rows
            .iter()
            .map(|row| {
                let map = self
                    .view
                    .fields
                    .iter()
                    .zip(row.iter())
                    .map(|(f, v)| (f.fid.clone(), v.to_json()))
                    .collect();
                Value::Object(map)
            })
            .collect();
        json!({ "values": Value::Array(values) })
    }

    fn facet_def(&self, fid: &str) -> Result<Value, RenderError> {
        Ok(Value::Object(self.field_def(fid, "header")?))
    }

    /// Outer facet levels become concatenations of per-value subcharts; the
    /// innermost row and column levels use the facet operator.
    fn compose(
        &self,
        rows: &[&Vec<Scalar>],
        row_levels: &[String],
        col_levels: &[String],
        unit: &Value,
    ) -> Result<Value, RenderError> {
        let split = if row_levels.len() > 1 {
            Some(("vconcat", &row_levels[0], &row_levels[1..], col_levels))
        } else if col_levels.len() > 1 {
            Some(("hconcat", &col_levels[0], row_levels, &col_levels[1..]))
        } else {
            None
        };
        if let Some((op, fid, rest_rows, rest_cols)) = split {
            self.require(fid)?;
            if !rows.is_empty() {
                let i = self.view.column_index(fid).unwrap_or_default();
                let mut keys: Vec<&Scalar> = rows.iter().map(|r| &r[i]).collect();
                keys.sort_by(|a, b| a.total_cmp(b));
                keys.dedup();
                let mut panels = Vec::new();
                for key in keys {
                    let subset: Vec<&Vec<Scalar>> = rows.iter().copied().filter(|r| &r[i] == key).collect();
                    let mut panel = self.compose(&subset, rest_rows, rest_cols, unit)?;
                    if let Value::Object(map) = &mut panel {
                        map.insert("title".into(), json!(format!("{fid} = {}", key.to_text())));
                    }
                    panels.push(panel);
                }
                return Ok(json!({ op: panels }));
            }
            return self.compose(rows, &row_levels[row_levels.len().saturating_sub(1)..], &col_levels[col_levels.len().saturating_sub(1)..], unit);
        }

        let mut doc = Map::new();
        doc.insert("data".into(), self.records(rows));
        if row_levels.is_empty() && col_levels.is_empty() {
            if let Value::Object(u) = unit {
                doc.extend(u.clone());
            }
            return Ok(Value::Object(doc));
        }
        let mut facet = Map::new();
        if let Some(fid) = row_levels.first() {
            facet.insert("row".into(), self.facet_def(fid)?);
        }
        if let Some(fid) = col_levels.first() {
            facet.insert("column".into(), self.facet_def(fid)?);
        }
        doc.insert("facet".into(), Value::Object(facet));
        doc.insert("spec".into(), unit.clone());
        Ok(Value::Object(doc))
    }
}

/// Backslash-escapes characters Vega-Lite reads as nested field access.
fn escape_field(fid: &str) -> String {
    let mut out = String::with_capacity(fid.len());
    for c in fid.chars() {
        if matches!(c, '.' | '[' | ']' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Builds the Vega-Lite document for a chart from its already aggregated view
/// data. Vega-Lite's own aggregation is never used.
pub fn to_chart(
    spec: &GraphicSpec,
    fields: &[FieldMeta],
    plan: &FacetPlan,
    view: &ViewTable,
) -> Result<ChartDoc, RenderError> {
    if spec.config.coord == Coord::Geographic {
        return Err(RenderError::Unsupported("geographic rendering unsupported".into()));
    }
    let mark = default_mark(spec, fields);
    if mark == MarkType::Table {
        return Err(RenderError::Unsupported("table marks render as pivot tables".into()));
    }
    let ctx = Ctx {
        spec,
        catalog: FieldCatalog::new(fields, &spec.computed),
        view,
        mark,
        sorted: spec.sort.is_some(),
    };
    let rows: Vec<&Vec<Scalar>> = view.rows.iter().collect();

    let body = if plan.measures.len() > 1 {
        let panels = plan
            .measures
            .iter()
            .map(|m| {
                let unit = ctx.unit(plan, Some(m))?;
                ctx.compose(&rows, &plan.row_facets, &plan.col_facets, &unit)
            })
            .collect::<Result<Vec<_>, _>>()?;
        json!({ "vconcat": panels })
    } else {
        let unit = ctx.unit(plan, plan.measures.first().map(String::as_str))?;
        ctx.compose(&rows, &plan.row_facets, &plan.col_facets, &unit)?
    };

    let mut doc = Map::new();
    doc.insert("$schema".into(), json!(VEGA_LITE_SCHEMA));
    doc.insert("title".into(), json!(spec.name));
    if let Value::Object(body) = body {
        doc.extend(body);
    }
    Ok(Value::Object(doc))
}
