//! Command-line front end.
//!
//! Each subcommand reads one JSON object (unknown keys rejected), writes its
//! artifacts into `--out`, and finishes with `manifest.json`.

mod commands;
mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{
    BerSection, BlerSection, DefendConfig, PssSection, RotatingSection, SimulateConfig, ThreatConfig,
    ThresholdSection, ThresholdTarget,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nr-threat", version, about = "5G NR physical-layer jamming and spoofing assessment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// JSON config; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config trial count.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resource-grid occupancy map and per-channel sparsity.
    Grid(CommonArgs),
    /// Efficiency/complexity table and ranking scatter data.
    Threat(CommonArgs),
    /// Monte-Carlo BER, BLER, PSS detection and DoS-threshold sweeps.
    Simulate(CommonArgs),
    /// Cell search under PSS spoofing, mitigation off and on.
    Defend(CommonArgs),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the resolved config as serialized JSON.
    pub config_digest: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// RFC 3339; taken from `SOURCE_DATE_EPOCH` when set.
    pub timestamp: String,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .map_or_else(SystemTime::now, |secs| SystemTime::UNIX_EPOCH + Duration::from_secs(secs));
    humantime::format_rfc3339_seconds(now).to_string()
}

pub(crate) fn digest<T: Serialize>(config: &T) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(config).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Collects artifact names as they are written.
pub(crate) struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Runtime(format!("{}: {e}", root.display())))?;
        Ok(OutDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub(crate) fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub(crate) fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub(crate) fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let runtime = |e: csv::Error| CliError::Runtime(format!("{name}: {e}"));
        w.write_record(header).map_err(runtime)?;
        for row in rows {
            w.write_record(row).map_err(runtime)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
        self.write(name, &bytes)
    }

    pub(crate) fn finish(mut self, mut manifest: RunManifest) -> Result<(), CliError> {
        manifest.outputs = std::mem::take(&mut self.written);
        self.write_json("manifest.json", &manifest)
    }
}

/// Reads `path` as JSON into `T`, or returns `T::default()` without a path.
pub(crate) fn load_config<T>(path: Option<&Path>) -> Result<T, CliError>
where
    T: Default + for<'de> Deserialize<'de>,
{
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub(crate) fn manifest(command: &str, config_digest: String, seed: Option<u64>, notes: Vec<String>) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        config_digest,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: timestamp(),
        outputs: Vec::new(),
        notes,
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Grid(args) => commands::grid(&args),
        Command::Threat(args) => commands::threat(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Defend(args) => commands::defend(&args),
    }
}

/// Parses `args`, runs the command, prints any error to stderr and returns
/// the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("nr-threat: {e}");
            e.exit_code()
        }
    }
}
