//! Seeded random tables and specs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use walkd_core::compute_link::{derive_workflow, Workflow};
use walkd_core::spec_model::{
    validate_against, Aggregation, ComputedField, FieldRef, Filter, FilterRule, GraphicSpec,
    Layout, MarkType, SortDirection, SortSpec, StackMode, TransformKind,
};
use walkd_core::table_store::{infer_fields, Column, Dataset, FieldMeta, SemanticType};
use walkd_core::value::{format_timestamp, Scalar};

pub type Rng8 = ChaCha8Rng;

fn maybe_null<T>(rng: &mut Rng8, p: f64, v: T) -> Option<T> {
    if rng.gen_bool(p) {
        None
    } else {
        Some(v)
    }
}

/// Multiples of 0.25 keep sums exact whatever the summation order.
fn quarter(rng: &mut Rng8, lo: i32, hi: i32) -> f64 {
    rng.gen_range(lo * 4..=hi * 4) as f64 / 4.0
}

/// Up to 50 rows and 6 columns: two nominal, one ordinal, two quantitative
/// and one temporal, all nullable.
pub fn table(rng: &mut Rng8) -> Dataset {
    let n = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..=50) };
    let cats = ["a", "b", "c", "O'Hare", "x\"y"];
    let grps = ["north", "south", "east"];
    let text = |rng: &mut Rng8, pool: &[&str], p: f64| -> Vec<Option<String>> {
        (0..n)
            .map(|_| {
                let v = pool.choose(rng).unwrap().to_string();
                maybe_null(rng, p, v)
            })
            .collect()
    };
    let cat = text(rng, &cats, 0.1);
    let grp = text(rng, &grps, 0.05);
    let rank = (0..n)
        .map(|_| {
            let v = rng.gen_range(1..=5) as f64;
            maybe_null(rng, 0.1, v)
        })
        .collect();
    let m1 = (0..n)
        .map(|_| {
            let v = quarter(rng, -40, 40) + 0.25;
            maybe_null(rng, 0.1, v)
        })
        .collect();
    let m2 = (0..n)
        .map(|_| {
            let v = quarter(rng, 0, 100) + 0.5;
            maybe_null(rng, 0.15, v)
        })
        .collect();
    let day = (0..n)
        .map(|_| {
            let v = 1_577_836_800_000 + rng.gen_range(0..8) * 86_400_000;
            maybe_null(rng, 0.1, v)
        })
        .collect();
    Dataset::new(
        "random",
        vec![
            Column::from_text("Cat Name", cat),
            Column::from_text("grp", grp),
            Column::from_f64("Rank", rank),
            Column::from_f64("m1", m1),
            Column::from_f64("m2", m2),
            Column::from_timestamps("day", day),
        ],
    )
    .unwrap()
}

const AGGS: [Aggregation; 10] = [
    Aggregation::Count,
    Aggregation::CountDistinct,
    Aggregation::Sum,
    Aggregation::Mean,
    Aggregation::Min,
    Aggregation::Max,
    Aggregation::Median,
    Aggregation::Variance,
    Aggregation::Stddev,
    Aggregation::Sum,
];
pub const DECOMPOSABLE: [Aggregation; 4] =
    [Aggregation::Sum, Aggregation::Count, Aggregation::Min, Aggregation::Max];

fn values_of(dataset: &Dataset, fid: &str, fields: &[FieldMeta]) -> Vec<Scalar> {
    let idx = fields.iter().position(|f| f.fid == fid).unwrap();
    (0..dataset.row_count()).map(|i| dataset.columns()[idx].value(i)).collect()
}

fn random_filter(rng: &mut Rng8, dataset: &Dataset, fields: &[FieldMeta]) -> Filter {
    let f = fields.choose(rng).unwrap();
    let values = values_of(dataset, &f.fid, fields);
    if f.semantic_type == SemanticType::Quantitative && rng.gen_bool(0.7) {
        let a = rng.gen_range(-40.0..60.0f64).round();
        let b = a + rng.gen_range(0.0..60.0f64).round();
        return Filter {
            fid: f.fid.clone(),
            rule: FilterRule::Range { lo: a, hi: b },
        };
    }
    let mut set = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let v = if values.is_empty() || rng.gen_bool(0.1) {
            Scalar::Text("missing".into())
        } else {
            values.choose(rng).unwrap().clone()
        };
        // Temporal values travel as ISO text, as in spec JSON.
        let v = match v {
            Scalar::Timestamp(ms) => Scalar::Text(format_timestamp(ms)),
            Scalar::Text(_) if f.semantic_type != SemanticType::Nominal => continue,
            other => other,
        };
        if !set.contains(&v) {
            set.push(v);
        }
    }
    if set.is_empty() {
        set.push(Scalar::Null);
    }
    Filter {
        fid: f.fid.clone(),
        rule: FilterRule::OneOf(set),
    }
}

/// A chart spec valid for `fields`, with its derived workflow.
pub fn chart_spec(rng: &mut Rng8, dataset: &Dataset, fields: &[FieldMeta]) -> Option<(GraphicSpec, Workflow)> {
    let mut spec = GraphicSpec::empty("random");
    spec.aggregated = rng.gen_bool(0.8);
    let measures: Vec<&FieldMeta> = fields.iter().filter(|f| f.is_measure()).collect();
    let mut dims: Vec<String> = fields.iter().filter(|f| !f.is_measure()).map(|f| f.fid.clone()).collect();
    let mut quantitative: Vec<String> = measures.iter().map(|f| f.fid.clone()).collect();

    if !measures.is_empty() && rng.gen_bool(0.35) {
        let src = measures.choose(rng).unwrap().fid.clone();
        let k = *[2u32, 3, 5, 10].choose(rng).unwrap();
        spec.computed.push(ComputedField {
            out_fid: format!("{src}_bin"),
            source_fid: src.clone(),
            kind: TransformKind::Bin(k),
        });
        dims.push(format!("{src}_bin"));
    }
    if !measures.is_empty() && rng.gen_bool(0.25) {
        let src = measures.choose(rng).unwrap().fid.clone();
        let kind = *[TransformKind::Log2, TransformKind::Log10].choose(rng).unwrap();
        spec.computed.push(ComputedField {
            out_fid: format!("{src}_log"),
            source_fid: src,
            kind,
        });
        quantitative.push(format!("{}_log", spec.computed.last().unwrap().source_fid));
    }

    let measure_ref = |rng: &mut Rng8, aggregated: bool| {
        let fid = quantitative.choose(rng).unwrap().clone();
        if aggregated {
            FieldRef::agg(fid, *AGGS.choose(rng).unwrap())
        } else {
            FieldRef::new(fid)
        }
    };
    dims.shuffle(rng);
    let n_dims = rng.gen_range(0..=dims.len().min(3));
    for (i, d) in dims[..n_dims].iter().enumerate() {
        let r = FieldRef::new(d.clone());
        if i % 2 == 0 {
            spec.channels.x.push(r);
        } else {
            spec.channels.y.push(r);
        }
    }
    if !quantitative.is_empty() {
        for _ in 0..rng.gen_range(1..=2) {
            let r = measure_ref(rng, spec.aggregated);
            if !spec.channels.y.contains(&r) {
                spec.channels.y.push(r);
            }
        }
        if rng.gen_bool(0.2) {
            spec.channels.size.push(measure_ref(rng, spec.aggregated));
        }
    }
    if rng.gen_bool(0.3) && n_dims < dims.len() {
        spec.channels.color.push(FieldRef::new(dims[n_dims].clone()));
    }
    for _ in 0..rng.gen_range(0..=2) {
        spec.filters.push(random_filter(rng, dataset, fields));
    }
    if rng.gen_bool(0.35) {
        let refs: Vec<FieldRef> = spec.channels.iter().map(|(_, r)| r.clone()).collect();
        if let Some(r) = refs.choose(rng) {
            spec.sort = Some(SortSpec {
                fid: r.fid.clone(),
                direction: if rng.gen_bool(0.5) { SortDirection::Asc } else { SortDirection::Desc },
            });
        }
    }
    spec.mark = *[MarkType::Auto, MarkType::Bar, MarkType::Line, MarkType::Point]
        .choose(rng)
        .unwrap();
    spec.stack = *[StackMode::Stack, StackMode::Normalize, StackMode::None].choose(rng).unwrap();
    if rng.gen_bool(0.2) {
        spec.config.layout = Layout::Fixed { w: 320, h: 240 };
    }

    if !validate_against(&spec, fields).is_empty() {
        return None;
    }
    let workflow = derive_workflow(&spec, fields).ok()?;
    Some((spec, workflow))
}

/// A table-mark spec whose measures are all decomposable.
pub fn pivot_spec(rng: &mut Rng8, dataset: &Dataset, fields: &[FieldMeta]) -> GraphicSpec {
    let mut spec = GraphicSpec::empty("pivot");
    spec.mark = MarkType::Table;
    let mut dims: Vec<String> = fields.iter().filter(|f| !f.is_measure()).map(|f| f.fid.clone()).collect();
    dims.shuffle(rng);
    let nx = rng.gen_range(0..=2.min(dims.len()));
    let ny = rng.gen_range(0..=2.min(dims.len() - nx));
    spec.channels.x = dims[..nx].iter().map(FieldRef::new).collect();
    spec.channels.y = dims[nx..nx + ny].iter().map(FieldRef::new).collect();
    let measures: Vec<&FieldMeta> = fields.iter().filter(|f| f.is_measure()).collect();
    let mut values = vec![FieldRef::agg("m1", Aggregation::Count)];
    for _ in 0..rng.gen_range(1..=3) {
        let m = measures.choose(rng).map_or("m1".to_string(), |f| f.fid.clone());
        let r = FieldRef::agg(m, *DECOMPOSABLE.choose(rng).unwrap());
        if !values.contains(&r) {
            values.push(r);
        }
    }
    spec.set_table_values(&values);
    if rng.gen_bool(0.4) {
        spec.filters.push(random_filter(rng, dataset, fields));
    }
    spec
}

pub fn fields_of(dataset: &Dataset) -> Vec<FieldMeta> {
    infer_fields(dataset)
}

fn ident(rng: &mut Rng8) -> String {
    let len = rng.gen_range(1..=8);
    let mut s = String::new();
    s.push(rng.gen_range(b'a'..=b'z') as char);
    for _ in 1..len {
        let c = *b"abcdefghijklmnopqrstuvwxyz0123456789_".choose(rng).unwrap();
        s.push(c as char);
    }
    s
}

fn any_scalar(rng: &mut Rng8) -> Scalar {
    match rng.gen_range(0..4) {
        0 => Scalar::Null,
        1 => Scalar::number(rng.gen_range(-4_000_000..4_000_000) as f64 / 4.0),
        2 => Scalar::Text(ident(rng)),
        _ => Scalar::Text(["North Asia", "O'Hare", "ünïcode", "a\"b", ""].choose(rng).unwrap().to_string()),
    }
}

/// Structurally valid but otherwise arbitrary spec, for serialization tests.
pub fn any_spec(rng: &mut Rng8) -> GraphicSpec {
    let mut spec = GraphicSpec::empty(format!("Chart {}", rng.gen_range(1..100)));
    spec.mark = *MarkType::ALL.choose(rng).unwrap();
    spec.aggregated = rng.gen_bool(0.5);
    let aggs = Aggregation::ALL;
    let fref = |rng: &mut Rng8| FieldRef::agg(ident(rng), *aggs.choose(rng).unwrap());
    for _ in 0..rng.gen_range(0..4) {
        spec.channels.x.push(fref(rng));
    }
    for _ in 0..rng.gen_range(0..4) {
        spec.channels.y.push(fref(rng));
    }
    for slot in [
        &mut spec.channels.color,
        &mut spec.channels.size,
        &mut spec.channels.shape,
        &mut spec.channels.opacity,
    ] {
        if rng.gen_bool(0.3) {
            slot.push(fref(rng));
        }
    }
    for _ in 0..rng.gen_range(0..3) {
        let kind = match rng.gen_range(0..3) {
            0 => TransformKind::Log2,
            1 => TransformKind::Log10,
            _ => TransformKind::Bin(rng.gen_range(1..50)),
        };
        spec.computed.push(ComputedField {
            out_fid: ident(rng),
            source_fid: ident(rng),
            kind,
        });
    }
    for _ in 0..rng.gen_range(0..3) {
        let rule = if rng.gen_bool(0.5) {
            FilterRule::OneOf((0..rng.gen_range(1..4)).map(|_| any_scalar(rng)).collect())
        } else {
            let lo = rng.gen_range(-1000..1000) as f64 / 8.0;
            FilterRule::Range { lo, hi: lo + rng.gen_range(0..1000) as f64 / 8.0 }
        };
        spec.filters.push(Filter { fid: ident(rng), rule });
    }
    if rng.gen_bool(0.4) {
        spec.sort = Some(SortSpec {
            fid: ident(rng),
            direction: if rng.gen_bool(0.5) { SortDirection::Asc } else { SortDirection::Desc },
        });
    }
    spec.stack = *[StackMode::Stack, StackMode::Normalize, StackMode::None].choose(rng).unwrap();
    if rng.gen_bool(0.3) {
        spec.config.layout = Layout::Fixed { w: rng.gen_range(1..2000), h: rng.gen_range(1..2000) };
    }
    if rng.gen_bool(0.3) {
        spec.config.palette = ident(rng);
    }
    if rng.gen_bool(0.3) {
        spec.config.style.insert(ident(rng), serde_json::json!(rng.gen_range(0..100)));
        spec.config.style.insert("theme".into(), serde_json::json!("dark"));
    }
    if rng.gen_bool(0.3) {
        spec.set_table_values(&[FieldRef::agg(ident(rng), Aggregation::Sum)]);
    }
    spec
}
