//! `nextview` command line: one-shot `recommend` and the `serve` daemon.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use nextview_core::{
    load_csv, recommend, CorrelationMetric, Dataset, Execution, LoadOptions, Mode, RecommendConfig, SchemaOverride,
    SortOrder, SpecInput,
};

use crate::session::Event;
use crate::store::{EventLog, Store};

#[derive(Debug, Parser)]
#[command(name = "nextview", version, about = "Categorized visualization recommendations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print recommendations for a CSV file as JSON.
    Recommend(RecommendArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Spearman,
    Mi,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrderArg {
    Similar,
    Different,
}

#[derive(Debug, clap::Args)]
pub struct RecommendArgs {
    /// CSV file with a header row.
    pub dataset: PathBuf,
    /// JSON file with `{"attrs": [...], "filters": [{"attr": .., "value": ..}]}`.
    /// Without it the view is empty.
    #[arg(long)]
    pub view: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// One shuffled, unlabeled list instead of categories.
    #[arg(long)]
    pub baseline: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MetricArg::Spearman)]
    pub metric: MetricArg,
    #[arg(long, default_value_t = 50)]
    pub cardinality_cap: usize,
    /// JSON file overriding inferred column types.
    #[arg(long)]
    pub schema_override: Option<PathBuf>,
    /// Sort direction of the Similarity category.
    #[arg(long, value_enum, default_value_t = OrderArg::Similar)]
    pub similarity_order: OrderArg,
    /// Show categories in a seeded random order.
    #[arg(long)]
    pub category_order_seed: Option<u64>,
    /// Disable data parallelism.
    #[arg(long)]
    pub sequential: bool,
    /// Append a JSON-lines event to this file.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ServeArgs {
    #[arg(long, env = "RECSVC_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// JSON-lines interaction log.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Write all sessions to this file on shutdown.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// An input file or flag could not be read or parsed.
    pub const PARSE: i32 = 1;
    /// The view is not valid for the dataset.
    pub const INVALID_SPEC: i32 = 2;
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn parse_failure(what: &Path, e: impl std::fmt::Display) -> Failure {
    Failure { code: exit::PARSE, message: format!("{}: {e}", what.display()) }
}

impl RecommendArgs {
    pub fn config(&self) -> RecommendConfig {
        RecommendConfig {
            k: self.k,
            mode: if self.baseline { Mode::Baseline } else { Mode::Categorized },
            seed: self.seed,
            category_order_seed: self.category_order_seed,
            cardinality_cap: self.cardinality_cap,
            similarity_order: match self.similarity_order {
                OrderArg::Similar => SortOrder::Ascending,
                OrderArg::Different => SortOrder::Descending,
            },
            scoring: nextview_core::ScoringOptions {
                metric: match self.metric {
                    MetricArg::Spearman => CorrelationMetric::Spearman,
                    MetricArg::Mi => CorrelationMetric::MutualInformation,
                },
                ..Default::default()
            },
            execution: if self.sequential { Execution::Sequential } else { Execution::Parallel },
            ..RecommendConfig::default()
        }
    }

    fn load(&self) -> Result<Dataset, Failure> {
        let schema_override = match &self.schema_override {
            None => None,
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| parse_failure(p, e))?;
                Some(serde_json::from_str::<SchemaOverride>(&text).map_err(|e| parse_failure(p, e))?)
            }
        };
        let file = std::fs::File::open(&self.dataset).map_err(|e| parse_failure(&self.dataset, e))?;
        load_csv(file, &LoadOptions { schema_override }).map_err(|e| parse_failure(&self.dataset, e))
    }
}

/// Runs `recommend` and returns the JSON document to print.
pub fn run_recommend(args: &RecommendArgs) -> Result<String, Failure> {
    let ds = args.load()?;
    let input = match &args.view {
        None => SpecInput::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| parse_failure(p, e))?;
            serde_json::from_str(&text).map_err(|e| parse_failure(p, e))?
        }
    };
    let view = input
        .resolve(ds.schema())
        .map_err(|e| Failure { code: exit::INVALID_SPEC, message: format!("invalid view: {e}") })?;
    let set = recommend(view.as_ref(), &ds, &args.config());
    if let Some(path) = &args.log {
        let log = EventLog::open(path).map_err(|e| parse_failure(path, e))?;
        log.append(&Event::now(
            "cli",
            "recommend",
            json!({
                "dataset": args.dataset.display().to_string(),
                "view": view.as_ref().map(|v| v.key()),
                "items": set.items().count(),
            }),
        ));
    }
    let mut out = serde_json::to_string(&set).expect("recommendations serialize");
    out.push('\n');
    Ok(out)
}

pub async fn serve(args: &ServeArgs) -> std::io::Result<()> {
    let log = args.log.as_deref().map(EventLog::open).transpose()?;
    let store = Arc::new(Store::new(log, args.snapshot.clone()));
    let app = crate::http::router(store.clone());
    let addr = SocketAddr::new(args.host, args.port);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    store.save_snapshot().await
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::PARSE } else { exit::OK };
        }
    };
    match cli.command {
        Command::Recommend(args) => match run_recommend(&args) {
            Ok(out) => {
                let mut stdout = std::io::stdout().lock();
                let _ = stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush());
                exit::OK
            }
            Err(f) => {
                eprintln!("error: {}", f.message);
                f.code
            }
        },
        Command::Serve(args) => {
            let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
            match rt.block_on(serve(&args)) {
                Ok(()) => exit::OK,
                Err(e) => {
                    eprintln!("error: {e}");
                    exit::PARSE
                }
            }
        }
    }
}
