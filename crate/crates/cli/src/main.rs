//! `walkd`: serve the API, run specs headlessly, compile SQL, inspect
//! inference. Exit codes: 0 ok, 1 usage error, 2 data or spec error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::json;

use walkd_core::compute_link::Workflow;
use walkd_core::pipeline::{self, PipelineError};
use walkd_core::renderer::RenderArtifact;
use walkd_core::spec_model::{parse_spec, GraphicSpec};
use walkd_core::sql_compiler::{compile_sql, Dialect};
use walkd_core::table_store::{infer_fields, Dataset, FieldMeta};
use walkd_server::{load_dataset_file, AppState, Config};

#[derive(Debug, Parser)]
#[command(name = "walkd", version, about = "Exploratory visual analysis engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Serve the HTTP API, optionally preloading datasets.
    Serve {
        #[arg(long, env = "WALKD_PORT", default_value_t = 8787)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// CSV or JSON-rows files to register at startup.
        #[arg(long, num_args = 1..)]
        data: Vec<PathBuf>,
        #[arg(long, env = "WALKD_SPEC_DIR")]
        spec_dir: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Execute a spec against a data file and write the result.
    Run {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Chart)]
        format: Format,
    },
    /// Compile a spec or workflow to SQL.
    #[command(group(ArgGroup::new("input").required(true).args(["spec", "workflow"])))]
    Sql {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        workflow: Option<PathBuf>,
        #[arg(long)]
        table: String,
        #[arg(long, value_parser = parse_dialect, default_value = "ansi")]
        dialect: Dialect,
        /// Resolve field roles from this data file instead of usage.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Print the inferred field types of a data file.
    Infer {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    View,
    Chart,
}

fn parse_dialect(s: &str) -> Result<Dialect, String> {
    s.parse().map_err(|e: walkd_core::sql_compiler::SqlError| e.to_string())
}

/// A data or spec problem; reported on stderr with exit code 2.
struct Failure(String);

impl From<String> for Failure {
    fn from(message: String) -> Failure {
        Failure(message)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Failure {
        let mut message = format!("{}: {e}", e.code());
        if let PipelineError::Invalid(violations) = &e {
            for v in violations {
                let detail = serde_json::to_string(v).expect("violations serialize");
                message.push_str(&format!("\n  {}: {detail}", v.code()));
            }
        }
        Failure(message)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Serve {
            port,
            host,
            data,
            spec_dir,
            json,
        } => serve(port, &host, &data, spec_dir, json),
        Command::Run {
            data,
            spec,
            out,
            format,
        } => run(&data, &spec, out.as_deref(), format),
        Command::Sql {
            spec,
            workflow,
            table,
            dialect,
            data,
            json,
        } => sql(spec.as_deref(), workflow.as_deref(), &table, dialect, data.as_deref(), json),
        Command::Infer { data, json } => infer(&data, json),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn read_spec(path: &Path) -> Result<GraphicSpec, Failure> {
    parse_spec(&read_text(path)?).map_err(|e| Failure(format!("{}: {} ({})", path.display(), e, e.code())))
}

fn load(path: &Path) -> Result<(Dataset, Vec<FieldMeta>), Failure> {
    let dataset = load_dataset_file(path)?;
    let fields = infer_fields(&dataset);
    Ok((dataset, fields))
}

fn pretty(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("outputs serialize") + "\n"
}

fn serve(port: u16, host: &str, data: &[PathBuf], spec_dir: Option<PathBuf>, json: bool) -> Outcome {
    let mut config = Config::from_env();
    if spec_dir.is_some() {
        config.spec_dir = spec_dir;
    }
    let state = AppState::new(config).map_err(|e| Failure(format!("spec directory: {e}")))?;
    let state = Arc::new(state);
    let mut stdout = std::io::stdout();
    for path in data {
        let dataset = load_dataset_file(path)?;
        let entry = state.registry.register(dataset);
        let (name, id, fields) = (entry.dataset.name(), entry.dataset.id(), entry.fields.len());
        if json {
            let _ = writeln!(stdout, "{}", json!({"dataset": name, "id": id, "fields": fields}));
        } else {
            let _ = writeln!(stdout, "dataset {name} id={id} fields={fields}");
        }
    }

    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| Failure(format!("cannot listen on {host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| Failure(e.to_string()))?;
        if json {
            let _ = writeln!(stdout, "{}", json!({"listening": format!("http://{addr}")}));
        } else {
            let _ = writeln!(stdout, "listening on http://{addr}");
        }
        let _ = stdout.flush();
        walkd_server::serve(listener, state).await.map_err(|e| Failure(e.to_string()))
    })
}

fn run(data: &Path, spec: &Path, out: Option<&Path>, format: Format) -> Outcome {
    let spec = read_spec(spec)?;
    let (dataset, fields) = load(data)?;
    let text = match format {
        Format::View => pretty(&pipeline::query(&spec, &dataset, &fields)?),
        Format::Chart => match pipeline::render(&spec, &dataset, &fields)? {
            RenderArtifact::Chart(doc) => pretty(&doc),
            RenderArtifact::Pivot(model) => pretty(&model),
        },
    };
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sql(
    spec: Option<&Path>,
    workflow: Option<&Path>,
    table: &str,
    dialect: Dialect,
    data: Option<&Path>,
    json: bool,
) -> Outcome {
    let query = match (spec, workflow) {
        (Some(path), _) => {
            let spec = read_spec(path)?;
            let loaded = data.map(load).transpose()?;
            let fields = loaded.as_ref().map(|(_, f)| f.as_slice());
            pipeline::spec_sql(&spec, fields, table, dialect)?
        }
        (None, Some(path)) => {
            let parsed: Workflow = serde_json::from_str(&read_text(path)?)
                .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            let workflow = Workflow::new(parsed.steps).map_err(|e| Failure(format!("{}: {e}", e.code())))?;
            compile_sql(&workflow, table, dialect).map_err(PipelineError::from)?
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    if json {
        let out = json!({"sql": query.text, "dialect": query.dialect, "output_fields": query.output_fields});
        print!("{}", pretty(&out));
    } else {
        println!("{}", query.text);
    }
    Ok(())
}

fn infer(data: &Path, json: bool) -> Outcome {
    let (_, fields) = load(data)?;
    if json {
        print!("{}", pretty(&fields));
        return Ok(());
    }
    let fmt_num = |v: Option<f64>| v.map(walkd_core::value::format_number).unwrap_or_default();
    let rows: Vec<[String; 7]> = fields
        .iter()
        .map(|f| {
            [
                f.fid.clone(),
                f.name.clone(),
                f.semantic_type.as_str().to_string(),
                f.analytic_type.as_str().to_string(),
                f.distinct_count.to_string(),
                fmt_num(f.min),
                fmt_num(f.max),
            ]
        })
        .collect();
    let header = ["FID", "NAME", "SEMANTIC", "ANALYTIC", "DISTINCT", "MIN", "MAX"].map(String::from);
    let mut widths = header.clone().map(|h| h.len());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    for row in std::iter::once(&header).chain(&rows) {
        let line: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        println!("{}", line.join("  ").trim_end());
    }
    Ok(())
}
