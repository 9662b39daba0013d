//! The `vocalis` command line: batch analyses of recorded sessions, expert
//! reference building and the live feedback service.
//!
//! Exit codes are 0 on success, 1 for input problems (unreadable files,
//! bad arguments or configuration) and 2 when a computation fails. Errors and
//! warnings go to standard error as JSON lines; each command prints a one-line
//! JSON result to standard output.

pub mod analyze;
pub mod compare;
pub mod config;
pub mod correlate;
pub mod error;
pub mod pca;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;
use vocalis_core::dataset::{load_session, Metric};
use vocalis_engine::build_reference;

use crate::config::{Config, Overrides, CONFIG_ENV};
use crate::error::{CliError, Diagnostics};

#[derive(Debug, Parser)]
#[command(name = "vocalis", version, about = "Vocal EMG, ultrasound and audio analyses and live feedback")]
pub struct Cli {
    /// JSON configuration file; falls back to $VOCALIS_CONFIG.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Analysis grid in milliseconds.
    #[arg(long, global = true)]
    pub grid_ms: Option<f64>,
    /// RMS window in milliseconds.
    #[arg(long, global = true)]
    pub window_ms: Option<f64>,
    /// Bootstrap seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-pitch stability, length, SPR and RMS tables for each session.
    Analyze {
        #[arg(required = true)]
        sessions: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Paired pre/post tests per pitch with FDR correction.
    Compare {
        pre: PathBuf,
        post: PathBuf,
        /// Comma-separated pitches; all pitches present when omitted.
        #[arg(long, value_delimiter = ',')]
        pitches: Vec<String>,
        /// stability, length, rms or spr.
        #[arg(long, default_value = "stability")]
        metric: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pearson correlation of MVC-normalized RMS and SPR on the grid.
    Correlate {
        session: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Standardized PCA of a wide feature CSV.
    Pca {
        features: PathBuf,
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        /// Row labels to leave out.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
        /// Center only, without scaling to unit variance.
        #[arg(long)]
        no_standardize: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serialize an expert session's grid metrics as a reference.
    BuildReference {
        session: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the feedback service.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        reference_dir: Option<PathBuf>,
        #[arg(long)]
        tick_hz: Option<f64>,
    },
}

impl Cli {
    fn overrides(&self) -> Overrides {
        let mut o = Overrides { grid_ms: self.grid_ms, window_ms: self.window_ms, seed: self.seed, ..Default::default() };
        if let Command::Serve { bind, port, reference_dir, tick_hz } = &self.command {
            o.bind = bind.clone();
            o.port = *port;
            o.reference_dir = reference_dir.clone();
            o.tick_hz = *tick_hz;
        }
        o
    }
}

/// Entry point used by the binary; reads `VOCALIS_CONFIG` from the environment.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    run_with_env(args, env.as_deref(), stdout, stderr)
}

pub fn run_with_env<I, T>(args: I, env_config: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let line = json!({ "level": "error", "kind": "usage", "file": null, "message": e.kind().to_string(), "detail": e.to_string() });
            let _ = writeln!(stderr, "{line}");
            return 1;
        }
    };
    let mut diag = Diagnostics::new(stderr);
    match dispatch(&cli, env_config, &mut diag) {
        Ok(result) => {
            let _ = writeln!(stdout, "{result}");
            0
        }
        Err(e) => {
            diag.error(&e);
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, env_config: Option<&Path>, diag: &mut Diagnostics) -> Result<serde_json::Value, CliError> {
    let cfg = Config::resolve(cli.config.as_deref(), env_config, &cli.overrides())?;
    match &cli.command {
        Command::Analyze { sessions, out } => {
            let outcome = analyze::cmd_analyze(sessions, out, &cfg, diag)?;
            Ok(json!({ "command": "analyze", "sessions": outcome.analyzed.len(), "out": out }))
        }
        Command::Compare { pre, post, pitches, metric, out } => {
            let metric: Metric = metric.parse().map_err(|e: vocalis_core::Error| CliError::input(e.to_string()))?;
            let pitches = compare::parse_pitches(pitches)?;
            let report = compare::cmd_compare(pre, post, &pitches, metric, out, &cfg, diag)?;
            Ok(json!({ "command": "compare", "pitches": report.comparisons.len(), "participants": report.participants.len(), "out": out }))
        }
        Command::Correlate { session, out } => {
            let report = correlate::cmd_correlate(session, out, &cfg)?;
            Ok(json!({ "command": "correlate", "r": report.overall.r, "p": report.overall.p, "n": report.overall.n, "out": out }))
        }
        Command::Pca { features, columns, exclude, no_standardize, out } => {
            let report = pca::cmd_pca(features, columns, exclude, !no_standardize, out)?;
            Ok(json!({ "command": "pca", "explained_variance_ratio": report.result.explained_variance_ratio, "out": out }))
        }
        Command::BuildReference { session, out } => {
            let loaded = load_session(session).map_err(|e| CliError::from(e).in_file(session))?;
            for w in loaded.warnings() {
                diag.warning(Some(session), w);
            }
            let trace = build_reference(&loaded, &cfg.metrics(), &cfg.protocol()).map_err(|e| CliError::from(e).in_file(session))?;
            trace.write(out).map_err(|e| CliError::from(e).in_file(out))?;
            Ok(json!({ "command": "build-reference", "id": trace.id, "bins": trace.bins.len(), "out": out }))
        }
        Command::Serve { .. } => {
            let server = cfg.server();
            let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            runtime.block_on(vocalis_engine::serve(server))?;
            Ok(json!({ "command": "serve" }))
        }
    }
}
