//! Command-line front end: one subcommand per experiment, TOML configs,
//! deterministic CSV/JSON outputs and a `summary.json` per run.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or
//! input file, 3 an oracle check failed.

mod commands;
pub mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{NqsError, Result};

#[derive(Debug, Parser)]
#[command(name = "nqs", version, about = "Neural-network quantum state experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Variational ground state of a spin chain.
    Gs(CommonArgs),
    /// Simulate a circuit by Boltzmann-machine growth.
    Circuit(CommonArgs),
    /// Reconstruct a state from Pauli-basis measurements.
    Tomo(CommonArgs),
    /// Renyi and von Neumann entropies across bipartitions.
    Entropy(CommonArgs),
    /// Convert an RBM to a matrix product state.
    Convert(CommonArgs),
    /// Exact diagonalization.
    Ed(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Compare against the brute-force reference (default).
    #[arg(long, overrides_with = "no_oracle")]
    pub oracle: bool,
    #[arg(long, overrides_with = "oracle")]
    pub no_oracle: bool,
}

impl CommonArgs {
    pub fn oracle_enabled(&self) -> bool {
        !self.no_oracle
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

/// Exit code for an error.
pub fn exit_code(e: &NqsError) -> i32 {
    match e {
        NqsError::Config(_) | NqsError::Parse { .. } => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

/// Machine-readable record of one run.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: String,
    /// SHA-256 over the config bytes, the effective seed and every input file.
    pub inputs_hash: String,
    pub seed: u64,
    pub oracle: bool,
    pub metrics: BTreeMap<String, serde_json::Value>,
    /// Outcome of the oracle checks; absent when none ran.
    pub pass: Option<bool>,
}

impl Summary {
    fn new(command: &str, seed: u64, oracle: bool, hasher: Sha256) -> Self {
        let inputs_hash = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Summary { command: command.into(), inputs_hash, seed, oracle, metrics: BTreeMap::new(), pass: None }
    }

    fn metric<T: Serialize>(&mut self, key: &str, value: T) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.metrics.insert(key.into(), v);
    }

    fn check(&mut self, ok: bool) {
        self.pass = Some(self.pass.unwrap_or(true) && ok);
    }
}

pub(crate) fn input_hasher(config_bytes: &[u8], seed: u64) -> Sha256 {
    let mut h = Sha256::new();
    h.update(config_bytes);
    h.update(seed.to_le_bytes());
    h
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".nqs-write-test");
    fs::write(&probe, b"")?;
    fs::remove_file(&probe)?;
    Ok(())
}

pub(crate) fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

/// Runs one parsed command; returns the summary written to `summary.json`.
pub fn execute(cli: &Cli) -> Result<Summary> {
    let (name, args) = match &cli.command {
        Command::Gs(a) => ("gs", a),
        Command::Circuit(a) => ("circuit", a),
        Command::Tomo(a) => ("tomo", a),
        Command::Entropy(a) => ("entropy", a),
        Command::Convert(a) => ("convert", a),
        Command::Ed(a) => ("ed", a),
    };
    prepare_out(&args.out)?;
    let summary = match &cli.command {
        Command::Gs(a) => commands::gs(a)?,
        Command::Circuit(a) => commands::circuit(a)?,
        Command::Tomo(a) => commands::tomo(a)?,
        Command::Entropy(a) => commands::entropy(a)?,
        Command::Convert(a) => commands::convert(a)?,
        Command::Ed(a) => commands::ed(a)?,
    };
    debug_assert_eq!(summary.command, name);
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    write_file(&args.out, "summary.json", text.as_bytes())?;
    Ok(summary)
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(s) => {
            if s.pass == Some(false) {
                eprintln!("nqs {}: oracle check failed", s.command);
                EXIT_CHECK
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
