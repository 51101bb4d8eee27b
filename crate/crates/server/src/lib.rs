//! HTTP API: dataset upload, spec query and render, SQL compilation, saved
//! specs and HTML export.

mod error;
mod state;

use std::path::Path as FsPath;
use std::sync::Arc;

use axum::body::{to_bytes, Body, Bytes};
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use walkd_core::compute_link::Workflow;
use walkd_core::pipeline;
use walkd_core::renderer::{export_html, Tab};
use walkd_core::spec_model::{parse_spec, spec_from_value, GraphicSpec};
use walkd_core::sql_compiler::{compile_sql, Dialect};
use walkd_core::table_store::{load_csv, load_json_rows, CsvOptions, Dataset, RegisteredDataset, TableError};

pub use error::ApiError;
pub use state::{valid_spec_name, AppState, Config, PutError, SpecStore, DEFAULT_DATA_CAP_BYTES, DEFAULT_ROW_CAP};

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    /// `.json` files are row arrays; anything else is read as CSV.
    pub fn from_path(path: &FsPath) -> DataFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => DataFormat::Json,
            _ => DataFormat::Csv,
        }
    }

    fn from_content_type(content_type: &str) -> Option<DataFormat> {
        let mime = content_type.split(';').next()?.trim().to_ascii_lowercase();
        if mime == "application/json" || mime.ends_with("+json") {
            Some(DataFormat::Json)
        } else if mime == "text/csv" || mime == "text/plain" {
            Some(DataFormat::Csv)
        } else {
            None
        }
    }
}

pub fn load_dataset(name: &str, bytes: &[u8], format: DataFormat) -> Result<Dataset, TableError> {
    match format {
        DataFormat::Csv => load_csv(name, bytes, CsvOptions::default()),
        DataFormat::Json => {
            let rows: Value =
                serde_json::from_slice(bytes).map_err(|e| TableError::NotRows(e.to_string()))?;
            load_json_rows(name, &rows)
        }
    }
}

/// Reads a data file, picking the format from its extension. The dataset
/// is named after the file stem.
pub fn load_dataset_file(path: &FsPath) -> Result<Dataset, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    load_dataset(name, &bytes, DataFormat::from_path(path))
        .map_err(|e| format!("{}: {} ({})", path.display(), e, e.code()))
}

pub fn app(state: Arc<AppState>) -> Router {
    let cap = state.config.data_cap_bytes;
    Router::new()
        .route("/api/datasets", post(upload_dataset).get(list_datasets))
        .route("/api/datasets/{id}", get(dataset_info))
        .route("/api/datasets/{id}/query", post(query_spec))
        .route("/api/datasets/{id}/render", post(render_spec))
        .route("/api/compile/sql", post(compile))
        .route("/api/specs", get(list_specs))
        .route("/api/specs/{name}", get(get_spec).put(put_spec))
        .route("/api/export/html", get(export))
        .layer(DefaultBodyLimit::max(cap))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, app(state)).await
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
}

fn dataset_summary(entry: &RegisteredDataset) -> Value {
    json!({
        "id": entry.dataset.id(),
        "name": entry.dataset.name(),
        "rows": entry.dataset.row_count(),
        "fields": entry.fields,
    })
}

fn lookup(state: &AppState, id: &str) -> ApiResult<Arc<RegisteredDataset>> {
    state.registry.get(id).ok_or_else(|| ApiError::not_found("dataset", id))
}

fn spec_body(body: &Bytes) -> ApiResult<GraphicSpec> {
    let text = std::str::from_utf8(body).map_err(|e| ApiError::bad_request("EncodingError", e.to_string()))?;
    Ok(parse_spec(text)?)
}

#[derive(Debug, Deserialize)]
struct UploadParams {
    name: Option<String>,
}

async fn upload_dataset(
    State(state): State<Arc<AppState>>,
    Query(params): Query<UploadParams>,
    request: Request,
) -> ApiResult<Json<Value>> {
    let cap = state.config.data_cap_bytes;
    let (parts, body) = request.into_parts();
    let content_type = parts
        .headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("text/csv")
        .to_string();
    let bytes = to_bytes(body, cap).await.map_err(|_| {
        ApiError::too_large("PayloadTooLarge", format!("upload exceeds {cap} bytes; use the SQL path"))
    })?;

    let (file_name, format, data) = if content_type.starts_with("multipart/form-data") {
        let request = Request::from_parts(parts, Body::from(bytes));
        let mut multipart = Multipart::from_request(request, &())
            .await
            .map_err(|e| ApiError::bad_request("Multipart", e.body_text()))?;
        let field = multipart
            .next_field()
            .await
            .map_err(|e| ApiError::bad_request("Multipart", e.body_text()))?
            .ok_or_else(|| ApiError::bad_request("Multipart", "no file part in the upload"))?;
        let file_name = field.file_name().map(str::to_string);
        let format = file_name
            .as_deref()
            .map(|f| DataFormat::from_path(FsPath::new(f)))
            .or_else(|| field.content_type().and_then(DataFormat::from_content_type))
            .unwrap_or(DataFormat::Csv);
        let data = field
            .bytes()
            .await
            .map_err(|e| ApiError::bad_request("Multipart", e.body_text()))?;
        (file_name, format, data)
    } else {
        let format = DataFormat::from_content_type(&content_type).unwrap_or(DataFormat::Csv);
        (None, format, bytes)
    };

    let name = params
        .name
        .or_else(|| {
            file_name
                .as_deref()
                .and_then(|f| FsPath::new(f).file_stem())
                .and_then(|s| s.to_str())
                .map(str::to_string)
        })
        .unwrap_or_else(|| "dataset".to_string());
    let row_cap = state.config.row_cap;
    let entry = blocking(move || {
        let dataset = load_dataset(&name, &data, format)?;
        if dataset.row_count() > row_cap {
            return Err(ApiError::too_large(
                "RowCapExceeded",
                format!("{} rows exceed the cap of {row_cap}; use the SQL path", dataset.row_count()),
            ));
        }
        Ok(state.registry.register(dataset))
    })
    .await?;
    Ok(Json(json!({"id": entry.dataset.id(), "fields": entry.fields})))
}

async fn list_datasets(State(state): State<Arc<AppState>>) -> Json<Value> {
    let list: Vec<Value> = state
        .registry
        .ids()
        .iter()
        .filter_map(|id| state.registry.get(id))
        .map(|e| dataset_summary(&e))
        .collect();
    Json(json!({ "datasets": list }))
}

async fn dataset_info(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let entry = lookup(&state, &id)?;
    Ok(Json(dataset_summary(&entry)))
}

async fn query_spec(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let entry = lookup(&state, &id)?;
    let spec = spec_body(&body)?;
    blocking(move || {
        let result = pipeline::query(&spec, &entry.dataset, &entry.fields)?;
        Ok(Json(serde_json::to_value(result).expect("results serialize")))
    })
    .await
}

async fn render_spec(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let entry = lookup(&state, &id)?;
    let spec = spec_body(&body)?;
    blocking(move || {
        let artifact = pipeline::render(&spec, &entry.dataset, &entry.fields)?;
        Ok(Json(serde_json::to_value(artifact).expect("artifacts serialize")))
    })
    .await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompileRequest {
    spec: Option<Value>,
    workflow: Option<Value>,
    table: String,
    #[serde(default)]
    dialect: Option<String>,
    /// Registered dataset whose fields resolve roles; usage-based otherwise.
    #[serde(default)]
    dataset: Option<String>,
}

async fn compile(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<Value>> {
    let request: CompileRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("BadRequest", e.to_string()))?;
    let dialect: Dialect = request
        .dialect
        .as_deref()
        .unwrap_or("ansi")
        .parse()
        .map_err(|e: walkd_core::sql_compiler::SqlError| ApiError::bad_request(e.code(), e.to_string()))?;
    let query = match (request.spec, request.workflow) {
        (Some(spec), None) => {
            let spec = spec_from_value(spec)?;
            let entry = request.dataset.as_deref().map(|id| lookup(&state, id)).transpose()?;
            let fields = entry.as_ref().map(|e| e.fields.as_slice());
            pipeline::spec_sql(&spec, fields, &request.table, dialect)?
        }
        (None, Some(workflow)) => {
            let workflow: Workflow = serde_json::from_value(workflow)
                .map_err(|e| ApiError::bad_request("InvalidWorkflow", e.to_string()))?;
            let workflow = Workflow::new(workflow.steps)
                .map_err(|e| ApiError::bad_request(e.code(), e.to_string()))?;
            compile_sql(&workflow, &request.table, dialect).map_err(pipeline::PipelineError::from)?
        }
        _ => return Err(ApiError::bad_request("BadRequest", "send exactly one of spec or workflow")),
    };
    Ok(Json(json!({
        "sql": query.text,
        "dialect": query.dialect,
        "output_fields": query.output_fields,
    })))
}

async fn list_specs(State(state): State<Arc<AppState>>) -> Json<Value> {
    Json(json!({ "specs": state.specs.names() }))
}

fn json_text(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

async fn get_spec(State(state): State<Arc<AppState>>, Path(name): Path<String>) -> ApiResult<Response> {
    let text = state.specs.get(&name).ok_or_else(|| ApiError::not_found("spec", &name))?;
    Ok(json_text(text))
}

async fn put_spec(
    State(state): State<Arc<AppState>>,
    Path(name): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    if !valid_spec_name(&name) {
        return Err(ApiError::bad_request("InvalidName", format!("invalid spec name {name:?}")));
    }
    let text = std::str::from_utf8(&body).map_err(|e| ApiError::bad_request("EncodingError", e.to_string()))?;
    match state.specs.put(&name, text) {
        Ok(canonical) => Ok(json_text(canonical)),
        Err(PutError::Spec(e)) => Err(e.into()),
        Err(PutError::Io(e)) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Io", e.to_string())),
    }
}

#[derive(Debug, Deserialize)]
struct ExportParams {
    #[serde(default)]
    specs: String,
    dataset: Option<String>,
}

async fn export(State(state): State<Arc<AppState>>, Query(params): Query<ExportParams>) -> ApiResult<Html<String>> {
    let names: Vec<&str> = params.specs.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let specs = names
        .iter()
        .map(|n| state.specs.get_spec(n).ok_or_else(|| ApiError::not_found("spec", n)))
        .collect::<ApiResult<Vec<GraphicSpec>>>()?;
    let entry = match (&params.dataset, specs.is_empty()) {
        (Some(id), _) => Some(lookup(&state, id)?),
        (None, true) => None,
        (None, false) => return Err(ApiError::bad_request("BadRequest", "dataset is required to export specs")),
    };
    blocking(move || {
        let mut tabs = Vec::with_capacity(specs.len());
        for spec in specs {
            let entry = entry.as_ref().expect("checked above");
            let artifact = pipeline::render(&spec, &entry.dataset, &entry.fields)?;
            tabs.push(Tab {
                title: spec.name.clone(),
                artifact,
            });
        }
        Ok(Html(export_html(&tabs)))
    })
    .await
}
