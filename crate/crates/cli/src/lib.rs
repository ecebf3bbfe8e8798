//! `yeargraph` subcommands. Each command is a single batch invocation except
//! `serve`, which runs until interrupted.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use yeargraph_core::graphstore::{exchange_paths, export_pg, import_pg, ExchangeError};
use yeargraph_core::ingest::{ingest_files, IngestError, IngestReport};
use yeargraph_core::synth::{SynthError, SyntheticSpec};
use yeargraph_core::{IngestConfig, PropertyGraph};
use yeargraph_server::dataset::ingest_dataset;
use yeargraph_server::{DatasetError, Registry, ServerConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Ingest(#[from] IngestError),

    #[error(transparent)]
    Exchange(#[from] ExchangeError),

    #[error(transparent)]
    Synth(#[from] SynthError),

    #[error(transparent)]
    Dataset(#[from] DatasetError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for usage errors, 2 for anything wrong with the data or the environment.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "yeargraph", version, about = "Year-by-year applicant attribute graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest yearly CSV files into exchange-format graph files.
    Ingest(IngestArgs),
    /// Write a synthetic dataset (one CSV per year plus ingest.toml).
    Generate(GenerateArgs),
    /// Run the HTTP/JSON service.
    Serve(ServeArgs),
    /// Write a graph in exchange format.
    Export(ExportArgs),
    /// Validate exchange-format files and print a summary.
    Import(ImportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Ingest config (TOML).
    #[arg(long, env = "YEARGRAPH_CONFIG")]
    pub config: PathBuf,
    /// Output base path; writes `<out>.nodes.tsv` and `<out>.edges.tsv`.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV files to ingest. Defaults to the files listed in the config.
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Synthetic dataset spec (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the spec.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "YEARGRAPH_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// Directory of datasets: `<id>.nodes.tsv`/`<id>.edges.tsv` pairs and
    /// `<id>/ingest.toml` subdirectories.
    #[arg(long, env = "YEARGRAPH_DATASET_DIR")]
    pub dataset_dir: Option<PathBuf>,
    /// Exchange base path of a dataset; the id is the file name. Repeatable.
    #[arg(long)]
    pub dataset: Vec<PathBuf>,
    /// Ingest config whose files are ingested at startup; the id is the
    /// config's directory name. Repeatable.
    #[arg(long)]
    pub config: Vec<PathBuf>,
    /// Idle session lifetime in seconds.
    #[arg(long, env = "YEARGRAPH_SESSION_TTL", default_value_t = 1800)]
    pub session_ttl: u64,
    /// Static files served for paths outside `/api`.
    #[arg(long, env = "YEARGRAPH_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Exchange base path to re-serialize.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub dataset: Option<PathBuf>,
    /// Ingest config to build the graph from instead.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output base path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    /// Exchange base path.
    #[arg(long)]
    pub dataset: PathBuf,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(args) => ingest(args, out),
        Command::Generate(args) => generate(args, out),
        Command::Serve(args) => serve(args, out),
        Command::Export(args) => export(args, out),
        Command::Import(args) => import(args, out),
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

fn summary(out: &mut dyn Write, graph: &PropertyGraph) -> Result<(), CliError> {
    let years = graph.list_years();
    let span = match (years.first(), years.last()) {
        (Some(a), Some(b)) => format!("{a}-{b} ({} years)", years.len()),
        _ => "none".to_string(),
    };
    writeln!(
        out,
        "nodes: {} ({} applicants, {} attributes)\nedges: {}\nyears: {span}",
        graph.node_count(),
        graph.applicant_count(),
        graph.attribute_count(),
        graph.edge_count()
    )
    .map_err(io_err("stdout"))
}

fn ingest_config(path: &Path, inputs: Vec<PathBuf>) -> Result<(PropertyGraph, IngestReport), CliError> {
    let config = IngestConfig::load(path)?;
    let files = if inputs.is_empty() {
        config.year_assignment.keys().cloned().collect()
    } else {
        inputs
    };
    Ok(ingest_files(&files, &config)?)
}

fn write_paths(out: &mut dyn Write, base: &Path) -> Result<(), CliError> {
    let (nodes, edges) = exchange_paths(base);
    writeln!(out, "wrote {}\nwrote {}", nodes.display(), edges.display()).map_err(io_err("stdout"))
}

fn ingest(args: IngestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (graph, report) = ingest_config(&args.config, args.inputs)?;
    export_pg(&graph, &args.out)?;
    writeln!(out, "rows: {}", report.rows).map_err(io_err("stdout"))?;
    summary(out, &graph)?;
    writeln!(out, "warnings: {}", report.warnings.len()).map_err(io_err("stdout"))?;
    for w in &report.warnings {
        writeln!(out, "warning: {w}").map_err(io_err("stdout"))?;
    }
    write_paths(out, &args.out)
}

fn generate(args: GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut spec = SyntheticSpec::load(&args.config)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let written = spec.write_dataset(&args.out)?;
    for f in written.files.iter().chain([&written.config_path]) {
        writeln!(out, "wrote {}", f.display()).map_err(io_err("stdout"))?;
    }
    Ok(())
}

fn export(args: ExportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let graph = match (args.dataset, args.config) {
        (Some(base), _) => import_pg(&base)?,
        (None, Some(config)) => ingest_config(&config, Vec::new())?.0,
        (None, None) => return Err(CliError::Usage("pass --dataset or --config".into())),
    };
    export_pg(&graph, &args.out)?;
    summary(out, &graph)?;
    write_paths(out, &args.out)
}

fn import(args: ImportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let graph = import_pg(&args.dataset)?;
    summary(out, &graph)
}

fn config_id(path: &Path) -> String {
    let dir = path.parent().and_then(|p| p.file_name()).and_then(|n| n.to_str());
    let stem = path.file_stem().and_then(|n| n.to_str()).unwrap_or("dataset");
    dir.filter(|d| !d.is_empty()).unwrap_or(stem).to_string()
}

/// Loads every dataset named by the serve flags.
pub fn load_datasets(args: &ServeArgs) -> Result<Registry, CliError> {
    let mut registry = match &args.dataset_dir {
        Some(dir) => Registry::load_dir(dir)?,
        None => Registry::new(),
    };
    for base in &args.dataset {
        let id = base
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| CliError::Usage(format!("bad dataset path {}", base.display())))?;
        registry.insert(id, import_pg(base)?)?;
    }
    for config in &args.config {
        let id = config_id(config);
        let graph = ingest_dataset(&id, config)?;
        registry.insert(id, graph)?;
    }
    if registry.is_empty() {
        return Err(CliError::Usage(
            "no datasets: pass --dataset-dir, --dataset or --config".into(),
        ));
    }
    Ok(registry)
}

fn serve(args: ServeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let datasets = load_datasets(&args)?;
    let config = ServerConfig {
        listen: args.listen,
        session_ttl: Duration::from_secs(args.session_ttl),
        static_dir: args.static_dir,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(io_err("tokio runtime"))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(config.listen)
            .await
            .map_err(io_err(format!("bind {}", config.listen)))?;
        let addr = listener.local_addr().map_err(io_err("local address"))?;
        let ids: Vec<&str> = datasets.iter().map(|d| d.id.as_str()).collect();
        writeln!(out, "datasets: {}\nlistening on http://{addr}", ids.join(", ")).map_err(io_err("stdout"))?;
        out.flush().map_err(io_err("stdout"))?;
        yeargraph_server::serve_on(listener, config, datasets)
            .await
            .map_err(io_err("server"))
    })
}
