//! Acceptance checks shared by the acceptance target and the topical tests.
//! Each returns a one-line summary on success.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use walkd_core::compute_link::{derive_pivot, PivotPlan, Step, ViewStep, Workflow};
use walkd_core::exec_engine::{apply_transform, execute, execute_pivot, ColumnStats, ViewTable};
use walkd_core::pipeline::{self, QueryResult};
use walkd_core::renderer::RenderArtifact;
use walkd_core::spec_model::{
    parse_spec, serialize_spec, validate_against, Aggregation, ComputedField, GraphicSpec,
    TransformKind,
};
use walkd_core::sql_compiler::{compile_sql, Dialect};
use walkd_core::table_store::{AnalyticType, Column, Dataset, SemanticType};
use walkd_core::value::Scalar;

use super::gen::{self, Rng8};
use super::oracle;
use super::sqlref::RefEngine;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn text(s: &str) -> Scalar {
    Scalar::Text(s.into())
}

pub fn scenario() -> Check {
    let start = Instant::now();
    let (ds, fields) = super::fixture();

    let line = super::scenario_spec("01");
    let doc = match pipeline::render(&line, &ds, &fields).map_err(|e| e.to_string())? {
        RenderArtifact::Chart(doc) => doc,
        RenderArtifact::Pivot(_) => return Err("line spec rendered as pivot".into()),
    };
    ensure(doc["facet"]["row"]["field"] == "region", || "line chart is not row-faceted by region".into())?;
    let mut regions: Vec<String> = doc["data"]["values"]
        .as_array()
        .ok_or("no inline data")?
        .iter()
        .map(|r| r["region"].as_str().unwrap_or_default().to_string())
        .collect();
    regions.sort();
    regions.dedup();
    ensure(regions.len() == 4, || format!("expected 4 region panels, got {regions:?}"))?;

    let bar = super::scenario_spec("02");
    let view = match pipeline::query(&bar, &ds, &fields).map_err(|e| e.to_string())? {
        QueryResult::View { view, .. } => view,
        QueryResult::Pivot { .. } => return Err("bar spec produced a pivot".into()),
    };
    let (yi, ci, si) = (
        view.column_index("year").ok_or("no year")?,
        view.column_index("category").ok_or("no category")?,
        view.column_index("sales_sum").ok_or("no sales_sum")?,
    );
    let furniture: BTreeMap<i64, f64> = view
        .rows
        .iter()
        .filter(|r| r[ci] == text("Furniture"))
        .map(|r| (r[yi].as_f64().unwrap() as i64, r[si].as_f64().unwrap()))
        .collect();
    let min_year = furniture
        .iter()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(y, _)| *y)
        .ok_or("no furniture rows")?;
    ensure(min_year == 2012 && furniture.len() == 4, || {
        format!("furniture sums by year {furniture:?}")
    })?;

    let pivot = super::scenario_spec("03");
    let (rollups, plan) = match pipeline::query(&pivot, &ds, &fields).map_err(|e| e.to_string())? {
        QueryResult::Pivot { rollups, plan } => (rollups, plan),
        QueryResult::View { .. } => return Err("table spec produced a view".into()),
    };
    let expected = (plan.col_path.len() + 1) * (plan.row_path.len() + 1);
    ensure(rollups.len() == expected && expected == 6, || {
        format!("{} roll-ups, expected {expected}", rollups.len())
    })?;
    for j in 0..=plan.row_path.len() {
        let countries = &rollups[plan.rollup_index(1, j)];
        let cities = &rollups[plan.rollup_index(2, j)];
        let mut summed: BTreeMap<Vec<String>, f64> = BTreeMap::new();
        for r in &cities.rows {
            let mut key = vec![r[0].to_text()];
            key.extend(r[2..2 + j].iter().map(Scalar::to_text));
            *summed.entry(key).or_default() += r[2 + j].as_f64().unwrap_or(0.0);
        }
        for r in &countries.rows {
            let mut key = vec![r[0].to_text()];
            key.extend(r[1..1 + j].iter().map(Scalar::to_text));
            let total = r[1 + j].as_f64().unwrap_or(0.0);
            ensure(summed.get(&key) == Some(&total), || {
                format!("country {key:?}: {total} != sum of cities {:?}", summed.get(&key))
            })?;
        }
        ensure(countries.rows.len() == summed.len(), || "country/city key sets differ".into())?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "4 region panels; furniture minimum in 2012; {expected} roll-ups with exact country sums; {:.0} ms",
        elapsed.as_secs_f64() * 1e3
    ))
}

fn sort_col(wf: &Workflow) -> Option<usize> {
    wf.sort().and_then(|s| wf.output_fids().iter().position(|f| *f == s.by))
}

pub fn differential(cases: usize) -> Check {
    let start = Instant::now();
    let mut rng = Rng8::seed_from_u64(7);
    let mut done = 0;
    let mut attempts = 0;
    let mut sorted = 0;
    let reference = RefEngine::new();
    while done < cases {
        attempts += 1;
        ensure(attempts < cases * 30, || format!("only {done} valid cases generated"))?;
        let ds = gen::table(&mut rng);
        let fields = gen::fields_of(&ds);
        let Some((spec, wf)) = gen::chart_spec(&mut rng, &ds, &fields) else {
            continue;
        };
        let ctx = || format!("case {done}: {}\n{:?}", serialize_spec(&spec), wf);
        let engine = execute(&wf, &ds).map_err(|e| format!("engine error {e} in {}", ctx()))?;
        let expected = oracle::run(&wf, &ds);
        let sc = sort_col(&wf);
        super::rows_match(&expected, &engine.rows, sc).map_err(|e| format!("engine vs oracle: {e}; {}", ctx()))?;
        reference.replace(&ds, "t");
        for dialect in [Dialect::Ansi, Dialect::Duckdb] {
            let sql = compile_sql(&wf, "t", dialect).map_err(|e| e.to_string())?;
            let rows = reference.query(&sql.text, sql.output_fields.len())?;
            super::rows_match(&expected, &rows, sc)
                .map_err(|e| format!("{dialect} SQL vs oracle: {e}; {}\n{}", ctx(), sql.text))?;
        }
        sorted += usize::from(sc.is_some());
        done += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 30.0, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{done} cases ({sorted} sorted, {attempts} drawn) agree across engine, oracle and SQL; {:.1} s",
        elapsed.as_secs_f64()
    ))
}

/// Re-aggregates a finer roll-up onto the key positions in `keep`.
fn reaggregate(finer: &ViewTable, width: usize, keep: &[usize], aggs: &[Aggregation]) -> Vec<Vec<Scalar>> {
    let mut groups: Vec<(Vec<Scalar>, Vec<&Vec<Scalar>>)> = Vec::new();
    if keep.is_empty() {
        groups.push((vec![], finer.rows.iter().collect()));
    } else {
        for row in &finer.rows {
            let key: Vec<Scalar> = keep.iter().map(|&i| row[i].clone()).collect();
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, rows)) => rows.push(row),
                None => groups.push((key, vec![row])),
            }
        }
    }
    groups
        .into_iter()
        .map(|(mut key, rows)| {
            for (m, agg) in aggs.iter().enumerate() {
                let xs: Vec<f64> = rows.iter().filter_map(|r| r[width + m].as_f64()).collect();
                key.push(match (agg, xs.is_empty()) {
                    (Aggregation::Count, _) => Scalar::number(xs.iter().sum()),
                    (_, true) => Scalar::Null,
                    (Aggregation::Sum, _) => Scalar::number(xs.iter().sum()),
                    (Aggregation::Min, _) => Scalar::number(xs.iter().cloned().fold(f64::INFINITY, f64::min)),
                    (Aggregation::Max, _) => Scalar::number(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
                    (other, _) => panic!("{other:?} is not decomposable"),
                });
            }
            key
        })
        .collect()
}

fn check_plan(plan: &PivotPlan, rollups: &[ViewTable]) -> Result<usize, String> {
    let aggs: Vec<Aggregation> = plan.measures.iter().map(|m| m.aggregation).collect();
    let (c, r) = (plan.col_path.len(), plan.row_path.len());
    let mut comparisons = 0;
    for (i, j) in plan.prefix_pairs() {
        let coarse = super::canonical(rollups[plan.rollup_index(i, j)].rows.clone());
        let mut finer_views = Vec::new();
        if i < c {
            let keep: Vec<usize> = (0..i).chain(i + 1..i + 1 + j).collect();
            finer_views.push((plan.rollup_index(i + 1, j), i + j + 1, keep));
        }
        if j < r {
            finer_views.push((plan.rollup_index(i, j + 1), i + j + 1, (0..i + j).collect()));
        }
        for (idx, width, keep) in finer_views {
            let re = super::canonical(reaggregate(&rollups[idx], width, &keep, &aggs));
            ensure(re == coarse, || format!("roll-up ({i},{j}) {coarse:?} != re-aggregated {re:?}"))?;
            comparisons += 1;
        }
    }
    Ok(comparisons)
}

pub fn rollups(plans: usize) -> Check {
    let mut rng = Rng8::seed_from_u64(11);
    let mut done = 0;
    let mut comparisons = 0;
    let mut attempts = 0;
    while done < plans {
        attempts += 1;
        ensure(attempts < plans * 20, || "too few valid pivot specs".into())?;
        let ds = gen::table(&mut rng);
        let fields = gen::fields_of(&ds);
        let spec = gen::pivot_spec(&mut rng, &ds, &fields);
        if !validate_against(&spec, &fields).is_empty() {
            continue;
        }
        let plan = derive_pivot(&spec, &fields).map_err(|e| e.to_string())?;
        let tables = execute_pivot(&plan, &ds).map_err(|e| e.to_string())?;
        comparisons += check_plan(&plan, &tables).map_err(|e| format!("{e}\n{}", serialize_spec(&spec)))?;
        done += 1;
    }
    Ok(format!("{done} pivot plans, {comparisons} prefix roll-ups equal re-aggregation exactly"))
}

fn scenario_sql() -> String {
    let mut out = String::new();
    for (name, _, spec) in super::scenario_specs() {
        for dialect in [Dialect::Ansi, Dialect::Duckdb] {
            let q = pipeline::spec_sql(&spec, None, "superstore", dialect).expect("scenario SQL compiles");
            out.push_str(&format!("-- {name} ({dialect})\n{}\n", q.text));
        }
    }
    out
}

pub fn roundtrip(specs: usize) -> Check {
    let mut rng = Rng8::seed_from_u64(3);
    for i in 0..specs {
        let spec = gen::any_spec(&mut rng);
        let text = serialize_spec(&spec);
        let back = parse_spec(&text).map_err(|e| format!("spec {i} does not parse: {e}\n{text}"))?;
        ensure(back == spec, || format!("spec {i} changed in a round trip\n{text}"))?;
        ensure(serialize_spec(&back) == text, || format!("spec {i} serialization unstable"))?;
    }
    super::golden("empty_spec.json", &(serialize_spec(&GraphicSpec::empty("Chart 1")) + "\n"))?;
    let scenario = super::scenario_specs();
    for (name, text, spec) in &scenario {
        ensure(serialize_spec(spec) + "\n" == *text, || format!("{name} is not in canonical form"))?;
    }
    super::golden("scenario.sql", &scenario_sql())?;
    Ok(format!(
        "{specs} random specs round-trip; {} scenario specs canonical; SQL golden stable",
        scenario.len()
    ))
}

pub fn chart_validity(random: usize) -> Check {
    let (ds, fields) = super::fixture();
    let mut fixture_charts = 0;
    for (name, _, spec) in super::scenario_specs() {
        if let RenderArtifact::Chart(doc) = pipeline::render(&spec, &ds, &fields).map_err(|e| e.to_string())? {
            let errors = super::schema_errors(&doc);
            ensure(errors.is_empty(), || format!("{name}: {errors:?}"))?;
            if name.starts_with("01") {
                let text = serde_json::to_string_pretty(&doc).unwrap() + "\n";
                super::golden("scenario_line_chart.json", &text)?;
            }
            fixture_charts += 1;
        }
    }
    let mut rng = Rng8::seed_from_u64(5);
    let mut done = 0;
    let mut attempts = 0;
    while done < random {
        attempts += 1;
        ensure(attempts < random * 30, || "too few random charts".into())?;
        let table = gen::table(&mut rng);
        let fields = gen::fields_of(&table);
        let Some((spec, _)) = gen::chart_spec(&mut rng, &table, &fields) else {
            continue;
        };
        match pipeline::render(&spec, &table, &fields) {
            Ok(RenderArtifact::Chart(doc)) => {
                let errors = super::schema_errors(&doc);
                ensure(errors.is_empty(), || {
                    format!("{errors:?}\n{}\n{}", serialize_spec(&spec), serde_json::to_string(&doc).unwrap())
                })?;
                done += 1;
            }
            Ok(RenderArtifact::Pivot(_)) => {}
            Err(e) if e.code() == "FacetError" => {}
            Err(e) => return Err(format!("{e}\n{}", serialize_spec(&spec))),
        }
    }
    Ok(format!("{fixture_charts} fixture charts and {done} random charts validate against Vega-Lite v5"))
}

fn transform_column(values: &[Option<f64>], kind: TransformKind) -> Vec<Option<f64>> {
    let col = Column::from_f64("v", values.to_vec());
    let out = apply_transform(&col, "o", kind, ColumnStats::of(&col)).unwrap();
    (0..out.len()).map(|i| out.f64_at(i)).collect()
}

pub fn bins() -> Check {
    let mut rng = Rng8::seed_from_u64(13);
    let values: Vec<Option<f64>> = (0..1000)
        .map(|i| if i % 97 == 0 { None } else { Some(rng.gen_range(-1.0e3..1.0e3)) })
        .collect();
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let min = present.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = present.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ds = Dataset::new("bins", vec![Column::from_f64("v", values.clone())]).unwrap();
    let reference = RefEngine::load(&ds, "t");

    for k in [2u32, 5, 10] {
        let w = (max - min) / k as f64;
        let out = transform_column(&values, TransformKind::Bin(k));
        for (v, b) in values.iter().zip(&out) {
            let (Some(v), Some(b)) = (v, b) else {
                ensure(v.is_none() && b.is_none(), || "null mismatch".into())?;
                continue;
            };
            let j = ((b - min) / w).round();
            ensure((0.0..k as f64).contains(&j) && super::close(min + j * w, *b), || {
                format!("{b} is not a bin lower bound for k={k}")
            })?;
            let upper_ok = *v < b + w || j == (k - 1) as f64;
            ensure(*b <= *v && upper_ok, || format!("{v} outside its bin [{b}, {})", b + w))?;
            ensure(super::close(*b, oracle::bin(*v, min, max, k)), || format!("{v}: {b} vs oracle"))?;
        }
        let at = |x: f64| transform_column(&[Some(min), Some(max), Some(x)], TransformKind::Bin(k));
        let edges = at(min);
        ensure(edges[0] == Some(min) && edges[1] == Some(min + (k - 1) as f64 * w), || {
            format!("min/max not in first/last bin for k={k}: {edges:?}")
        })?;

        let wf = Workflow::new(vec![
            Step::Transform {
                computed: vec![ComputedField {
                    out_fid: "v_bin".into(),
                    source_fid: "v".into(),
                    kind: TransformKind::Bin(k),
                }],
            },
            Step::View(ViewStep::Raw {
                fids: vec!["v".into(), "v_bin".into()],
            }),
        ])
        .unwrap();
        let engine = execute(&wf, &ds).map_err(|e| e.to_string())?;
        let sql = compile_sql(&wf, "t", Dialect::Ansi).unwrap();
        let rows = reference.query(&sql.text, 2)?;
        super::rows_match(&engine.rows, &rows, None).map_err(|e| format!("SQL bin k={k}: {e}"))?;
    }

    let logs_in = [Some(-2.0), Some(0.0), Some(-0.0), None, Some(8.0), Some(1000.0)];
    let l2 = transform_column(&logs_in, TransformKind::Log2);
    let l10 = transform_column(&logs_in, TransformKind::Log10);
    ensure(l2[..4].iter().chain(&l10[..4]).all(Option::is_none), || "log of non-positive is not null".into())?;
    ensure(l2[4] == Some(3.0) && super::close(l10[5].unwrap(), 3.0), || "log values wrong".into())?;
    Ok("1000 values each in exactly one bin for k=2,5,10; edges pinned; SQL bins equal engine bins; non-positive logs null".into())
}

pub fn inference() -> Check {
    let (_, fields) = super::fixture();
    let expect = [
        ("year", SemanticType::Ordinal, AnalyticType::Dimension),
        ("sales", SemanticType::Quantitative, AnalyticType::Measure),
        ("order_date", SemanticType::Temporal, AnalyticType::Dimension),
        ("region", SemanticType::Nominal, AnalyticType::Dimension),
    ];
    for (fid, semantic, analytic) in expect {
        let f = fields.iter().find(|f| f.fid == fid).ok_or_else(|| format!("no field {fid}"))?;
        ensure(f.semantic_type == semantic && f.analytic_type == analytic, || {
            format!("{fid}: {:?}/{:?}", f.semantic_type, f.analytic_type)
        })?;
    }
    ensure(fields.len() == 21, || format!("{} fields", fields.len()))?;
    Ok("Year ordinal dimension, Sales quantitative measure, Order Date temporal dimension, Region nominal dimension".into())
}
