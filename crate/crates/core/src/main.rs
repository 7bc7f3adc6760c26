use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use chrono::NaiveDateTime;
use clap::{Parser, Subcommand};

use plainsql::service::http;
use plainsql::{
    explain, parse, parse_unresolved, Engine, EngineConfig, FixtureTranslator, OnboardingConfig,
    RemoteTranslator, ServiceError, Source, Translator,
};

#[derive(Parser)]
#[command(name = "plainsql", version, about = "Ask questions of a database in plain English")]
struct Cli {
    /// Directory holding onboarded databases and history.
    #[arg(long, global = true, default_value = "plainsql-data", env = "PLAINSQL_DATA_DIR")]
    data_dir: PathBuf,
    /// JSON file of {"pattern", "sql"} pairs used as the translator.
    #[arg(long, global = true, env = "PLAINSQL_FIXTURES")]
    fixtures: Option<PathBuf>,
    /// Base URL of a remote translation service (takes precedence over fixtures).
    #[arg(long, global = true, env = "PLAINSQL_BACKEND")]
    backend: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Register a csv or SQLite file.
    Onboard {
        file: PathBuf,
        /// Onboarding config: a JSON file path or inline JSON.
        #[arg(long)]
        config: Option<String>,
    },
    /// List onboarded databases.
    Databases,
    /// Answer a question against an onboarded database.
    Query {
        database: String,
        text: String,
        /// Resolve relative dates against this time (YYYY-MM-DDTHH:MM:SS).
        #[arg(long)]
        reference_time: Option<NaiveDateTime>,
    },
    /// Describe a SQL statement in English.
    Explain {
        sql: String,
        /// Resolve column names against this database first.
        #[arg(long)]
        database: Option<String>,
    },
    /// Show recent questions for a database.
    History {
        database: String,
        #[arg(long, default_value_t = 1)]
        page: usize,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn translator(cli: &Cli) -> Result<Arc<dyn Translator>, CliError> {
    if let Some(url) = &cli.backend {
        return Ok(Arc::new(RemoteTranslator::new(url)));
    }
    match &cli.fixtures {
        Some(path) => Ok(Arc::new(FixtureTranslator::from_file(path)?)),
        None => Ok(Arc::new(FixtureTranslator::default())),
    }
}

fn onboarding_config(arg: Option<&str>) -> Result<OnboardingConfig, CliError> {
    let Some(arg) = arg else { return Ok(OnboardingConfig::default()) };
    let text = if arg.trim_start().starts_with('{') { arg.to_string() } else { std::fs::read_to_string(arg)? };
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid onboarding config: {e}")))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn run(cli: Cli) -> Result<(), CliError> {
    let open = || -> Result<Engine, CliError> {
        Ok(Engine::open(EngineConfig::new(&cli.data_dir), translator(&cli)?)?)
    };
    match &cli.command {
        Command::Onboard { file, config } => {
            let config = onboarding_config(config.as_deref())?;
            let source = Source::detect(file).map_err(ServiceError::from)?;
            let db = open()?.onboard(&source, &config)?;
            print_json(&db);
        }
        Command::Databases => {
            let engine = open()?;
            let dbs: Vec<_> = engine.databases().iter().map(|d| (**d).clone()).collect();
            print_json(&dbs);
        }
        Command::Query { database, text, reference_time } => {
            let response = open()?.query(database, text, *reference_time)?;
            print_json(&response);
        }
        Command::Explain { sql, database } => {
            let parsed = match database {
                Some(id) => {
                    let db = open()?.database(id)?;
                    parse(sql, &db)
                }
                None => parse_unresolved(sql),
            }
            .map_err(ServiceError::from)?;
            println!("{}", explain(&parsed));
        }
        Command::History { database, page } => {
            print_json(&open()?.history(database, *page)?);
        }
        Command::Serve { port, host } => {
            let engine = Arc::new(open()?);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(http::serve(engine, SocketAddr::new(*host, *port)))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
