#![allow(dead_code)]

pub mod criteria;
pub mod gen;
pub mod oracle;

use std::path::PathBuf;
use std::sync::OnceLock;

use walkd_core::spec_model::{parse_spec, GraphicSpec};
use walkd_core::table_store::{infer_fields, load_csv, CsvOptions, Dataset, FieldMeta};
use walkd_core::value::Scalar;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture() -> (Dataset, Vec<FieldMeta>) {
    let bytes = std::fs::read(manifest_dir().join("fixtures/superstore.csv")).expect("fixture csv");
    let ds = load_csv("superstore", &bytes, CsvOptions::default()).expect("fixture parses");
    let fields = infer_fields(&ds);
    (ds, fields)
}

/// Scenario specs in tab order: (file name, file text, parsed spec).
pub fn scenario_specs() -> Vec<(String, String, GraphicSpec)> {
    let dir = manifest_dir().join("fixtures/specs");
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .expect("spec dir")
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let text = std::fs::read_to_string(dir.join(&n)).unwrap();
            let spec = parse_spec(&text).unwrap_or_else(|e| panic!("{n}: {e}"));
            (n, text, spec)
        })
        .collect()
}

pub fn scenario_spec(prefix: &str) -> GraphicSpec {
    scenario_specs()
        .into_iter()
        .find(|(n, _, _)| n.starts_with(prefix))
        .unwrap_or_else(|| panic!("no scenario spec {prefix}"))
        .2
}

/// Compares a golden file, rewriting it when `UPDATE_GOLDEN` is set.
pub fn golden(name: &str, actual: &str) -> Result<(), String> {
    let path = manifest_dir().join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{name} differs from golden file"))
    }
}

pub fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-3)
}

fn scalar_close(a: &Scalar, b: &Scalar) -> bool {
    match (a, b) {
        (Scalar::Number(x), Scalar::Number(y)) => close(*x, *y),
        _ => a == b,
    }
}

fn tuple_cmp(a: &[Scalar], b: &[Scalar]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

pub fn canonical(mut rows: Vec<Vec<Scalar>>) -> Vec<Vec<Scalar>> {
    rows.sort_by(|a, b| tuple_cmp(a, b));
    rows
}

/// Row multisets equal under canonical ordering, floats within tolerance.
/// With `sort_col`, that column must also match in output order.
pub fn rows_match(
    expected: &[Vec<Scalar>],
    actual: &[Vec<Scalar>],
    sort_col: Option<usize>,
) -> Result<(), String> {
    if expected.len() != actual.len() {
        return Err(format!("row count {} != {}", expected.len(), actual.len()));
    }
    if let Some(c) = sort_col {
        for (i, (e, a)) in expected.iter().zip(actual).enumerate() {
            if !scalar_close(&e[c], &a[c]) {
                return Err(format!("sort key differs at row {i}: {:?} vs {:?}", e[c], a[c]));
            }
        }
    }
    let e = canonical(expected.to_vec());
    let a = canonical(actual.to_vec());
    for (x, y) in e.iter().zip(&a) {
        if x.len() != y.len() || !x.iter().zip(y).all(|(p, q)| scalar_close(p, q)) {
            return Err(format!("row {x:?} vs {y:?}"));
        }
    }
    Ok(())
}

pub fn vl_validator() -> &'static jsonschema::Validator {
    static VALIDATOR: OnceLock<jsonschema::Validator> = OnceLock::new();
    VALIDATOR.get_or_init(|| {
        let text = std::fs::read_to_string(manifest_dir().join("schema/vega-lite-v5.json")).unwrap();
        let mut schema: serde_json::Value = serde_json::from_str(&text).unwrap();
        encode_refs(&mut schema);
        jsonschema::validator_for(&schema).expect("schema compiles")
    })
}

/// The published schema has `$ref` fragments with characters such as `<`
/// and `|` that fail the meta-schema's uri-reference check; percent-encode
/// them so the resolver decodes back to the same definition names.
fn encode_refs(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            for (key, v) in map.iter_mut() {
                match v {
                    serde_json::Value::String(s) if key == "$ref" => {
                        let mut out = String::with_capacity(s.len());
                        for c in s.chars() {
                            if c.is_ascii_alphanumeric() || "-._~!$&'()*+,;=:@/?#%".contains(c) {
                                out.push(c);
                            } else {
                                let mut buf = [0u8; 4];
                                for b in c.encode_utf8(&mut buf).bytes() {
                                    out.push_str(&format!("%{b:02X}"));
                                }
                            }
                        }
                        *s = out;
                    }
                    _ => encode_refs(v),
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(encode_refs),
        _ => {}
    }
}

pub fn schema_errors(doc: &serde_json::Value) -> Vec<String> {
    vl_validator()
        .iter_errors(doc)
        .take(5)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect()
}
