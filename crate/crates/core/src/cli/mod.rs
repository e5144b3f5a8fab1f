//! Command-line front end.
//!
//! Exit codes: `0` all checks pass, `1` usage or configuration error,
//! `2` a scientific check failed.

mod commands;
pub mod csv;
pub mod manifest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::SkError;
use manifest::{manifest_path, sha256_hex, unix_now, OutputDigest, RunManifest};

pub use csv::{parse_csv, Cell, CsvTable, ParsedCsv, SCHEMAS};

#[derive(Parser, Debug)]
#[command(name = "skfluct", version, about = "Free-energy fluctuations of the SK spin glass")]
pub struct Cli {
    /// Worker threads (default: all cores); output does not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// File of `key = value` lines supplying defaults for subcommand flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// CSV destination; a `<out>.manifest.json` sidecar is written next to it
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Variance of F against its interpolation integral
    VarRep(VarRepArgs),
    /// Ensemble statistics along a critical-window schedule
    WindowScan(WindowScanArgs),
    /// Per-sample identities, cavity expansion and integration by parts
    Identities(IdentitiesArgs),
    /// Normality of the standardized free energy and the Stein bound
    Clt(CltArgs),
    /// Thermodynamic integration against exact free energies
    McF(McFArgs),
    /// Overlap residual scan over system sizes
    PropScan(PropScanArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VarRep(_) => "var-rep",
            Command::WindowScan(_) => "window-scan",
            Command::Identities(_) => "identities",
            Command::Clt(_) => "clt",
            Command::McF(_) => "mc-f",
            Command::PropScan(_) => "prop-scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    /// β² = 1 − c·N^(−1/3)
    BetaSq,
    /// β = 1 − c·N^(−1/3)
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineArg {
    Exact,
    Mc,
}

#[derive(Args, Debug, Serialize)]
pub struct VarRepArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 5000)]
    pub m: usize,
    #[arg(long, default_value_t = 16)]
    pub t_nodes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct WindowScanArgs {
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = WindowKind::BetaSq)]
    pub kind: WindowKind,
    #[arg(long, value_delimiter = ',', default_value = "8,12,16,20")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = EngineArg::Exact)]
    pub engine: EngineArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    /// Report E⟨(N(1−β²)R²)^k⟩, k = 1..3 (exact engine)
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub moments: bool,
    /// Sweeps per disorder (mc engine)
    #[arg(long, default_value_t = 20_000)]
    pub sweeps: usize,
    /// Quadrature nodes in β (mc engine)
    #[arg(long, default_value_t = 8)]
    pub grid_size: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct IdentitiesArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.7)]
    pub t: f64,
    #[arg(long, default_value_t = 4000)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    /// Finite-difference step in s
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct CltArgs {
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 5000)]
    pub m: usize,
    /// Disorder draws for the Stein bound integral
    #[arg(long, default_value_t = 1000)]
    pub stein_m: usize,
    #[arg(long, default_value_t = 16)]
    pub t_nodes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct McFArgs {
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 10)]
    pub disorders: usize,
    #[arg(long, default_value_t = 8)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 20_000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct PropScanArgs {
    #[arg(long, value_delimiter = ',', default_value = "6,8,10,12")]
    pub n_list: Vec<usize>,
    /// Fixed inverse temperature (ignored when --c is given)
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub beta: f64,
    /// Window constant; switches to the window schedule of --kind
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, value_enum, default_value_t = WindowKind::BetaSq)]
    pub kind: WindowKind,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
}

/// Result of one command before it is written out.
pub struct Outcome {
    pub table: CsvTable,
    pub passed: bool,
    pub seed: u64,
    pub config: serde_json::Value,
    /// lines for the diagnostic stream
    pub report: Vec<String>,
}

enum Failure {
    Clap(clap::Error),
    Usage(String),
}

impl From<clap::Error> for Failure {
    fn from(e: clap::Error) -> Self {
        Failure::Clap(e)
    }
}

impl From<SkError> for Failure {
    fn from(e: SkError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn config_key(raw: &str) -> String {
    let k = raw.trim().to_ascii_lowercase().replace('_', "-");
    match k.as_str() {
        "master-seed" => "seed".into(),
        "bootstrap-resamples" => "resamples".into(),
        _ => k,
    }
}

/// Append `--key=value` for every config entry the command line left unset.
fn merge_config(mut argv: Vec<OsString>, matches: &clap::ArgMatches, path: &Path) -> Result<Vec<OsString>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let (name, sub) = matches
        .subcommand()
        .ok_or_else(|| Failure::Usage("missing subcommand".into()))?;
    let cmd = Cli::command();
    let sub_cmd = cmd.find_subcommand(name).expect("parsed subcommand exists");
    let mut seen = std::collections::BTreeSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("config line {}: expected `key = value`", lineno + 1)))?;
        let key = config_key(k);
        let arg = sub_cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && !a.is_global_set())
            .ok_or_else(|| {
                Failure::Usage(format!(
                    "config line {}: unknown key `{}` for {name}",
                    lineno + 1,
                    k.trim()
                ))
            })?;
        if !seen.insert(key.clone()) {
            return Err(Failure::Usage(format!(
                "config line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
        if sub.value_source(arg.get_id().as_str()) != Some(clap::parser::ValueSource::CommandLine) {
            argv.push(format!("--{key}={}", v.trim()).into());
        }
    }
    Ok(argv)
}

fn write_outputs(cli: &Cli, outcome: &Outcome, started: f64) -> Result<(), Failure> {
    let text = outcome.table.render();
    let Some(out) = &cli.out else {
        print!("{text}");
        return Ok(());
    };
    let io = |e: std::io::Error| Failure::Usage(format!("cannot write {}: {e}", out.display()));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(out, text.as_bytes()).map_err(io)?;
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        config: outcome.config.clone(),
        master_seed: outcome.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: started,
        finished_unix: unix_now(),
        outputs: vec![OutputDigest {
            path: out.display().to_string(),
            sha256: sha256_hex(text.as_bytes()),
        }],
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(manifest_path(out), json).map_err(io)?;
    Ok(())
}

fn execute(argv: Vec<OsString>) -> Result<i32, Failure> {
    let started = unix_now();
    let mut matches = Cli::command().try_get_matches_from(&argv)?;
    if let Some(path) = matches.get_one::<PathBuf>("config").cloned() {
        let merged = merge_config(argv, &matches, &path)?;
        matches = Cli::command().try_get_matches_from(&merged)?;
    }
    let cli = Cli::from_arg_matches(&matches)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start worker pool: {e}")))?;
    let outcome = pool.install(|| commands::dispatch(&cli))?;
    for line in &outcome.report {
        eprintln!("{line}");
    }
    write_outputs(&cli, &outcome, started)?;
    Ok(if outcome.passed { 0 } else { 2 })
}

/// Run the command line `args` (program name first) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    match execute(argv) {
        Ok(code) => code,
        Err(Failure::Clap(e)) => {
            let _ = e.print();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_keys_are_normalized() {
        assert_eq!(config_key(" N_List "), "n-list");
        assert_eq!(config_key("master_seed"), "seed");
        assert_eq!(config_key("bootstrap_resamples"), "resamples");
    }
}
