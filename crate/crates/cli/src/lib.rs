//! Command-line front end for the `hormander` library.
//!
//! Every subcommand prints one JSON (or key/value CSV) report. Exit codes:
//! 0 success, 2 precondition or input errors, 3 numeric failures, 64 usage.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

mod commands;
pub mod output;

pub use output::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable naming a JSON file with default [`RunConfig`] values.
pub const CONFIG_ENV: &str = "HORMANDER_CONFIG";

/// Library operation → subcommand that exposes it.
pub const OPERATIONS: &[(&str, &str)] = &[
    ("eval_weight", "ro check"),
    ("check_ro_membership", "ro check"),
    ("analytic_indices", "ro index"),
    ("estimate_indices", "ro index"),
    ("embed_criterion", "ro embed"),
    ("classical_solution_criterion", "ro classical"),
    ("smoothed_modulus", "norm"),
    ("hnorm", "norm"),
    ("analyze_circle", "norm"),
    ("embedding_ratio", "norm"),
    ("derivative_multiplier_bound", "norm"),
    ("build_psi", "interp psi"),
    ("check_pseudoconcavity", "interp psi"),
    ("interp_norm", "interp verify"),
    ("check_direct_sum", "interp verify"),
    ("kernel_basis", "bvp fredholm"),
    ("adjoint_kernel_basis", "bvp fredholm"),
    ("fredholm_report", "bvp fredholm"),
    ("solve_mode", "bvp solve"),
    ("apply_operator", "bvp solve"),
    ("solvability_residuals", "bvp solve"),
    ("solve", "bvp solve"),
    ("apriori_probe", "bvp apriori"),
    ("regularity_probe", "bvp regularity"),
    ("green_residual", "green verify"),
    ("adjoint_system_residual", "green verify"),
    ("green_pairing_check", "green verify"),
];

pub const SUBCOMMANDS: &[&str] = &[
    "ro index",
    "ro check",
    "ro embed",
    "ro classical",
    "norm",
    "interp verify",
    "interp psi",
    "bvp solve",
    "bvp fredholm",
    "bvp apriori",
    "bvp regularity",
    "green verify",
];

#[derive(Debug, Parser)]
#[command(name = "hormander", version, about = "Hörmander spaces and a Fredholm analyzer on the unit disk")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for mode-parallel solves.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file with default settings (overrides $HORMANDER_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// RO-varying weights.
    #[command(subcommand)]
    Ro(RoCommand),
    /// Hörmander norms and spectral checks on the circle.
    Norm(commands::NormArgs),
    /// Interpolation with a function parameter.
    #[command(subcommand)]
    Interp(InterpCommand),
    /// The disk boundary problem.
    #[command(subcommand)]
    Bvp(BvpCommand),
    /// Green formula checks.
    #[command(subcommand)]
    Green(GreenCommand),
}

#[derive(Debug, Subcommand)]
pub enum RoCommand {
    /// Matuszewska indices: closed form and estimate.
    Index(commands::RoIndexArgs),
    /// Evaluate a weight and sample the RO bound.
    Check(commands::RoCheckArgs),
    /// Convergence of the embedding integral.
    Embed(commands::RoEmbedArgs),
    /// Sufficient conditions for classical solutions.
    Classical(commands::RoClassicalArgs),
}

#[derive(Debug, Subcommand)]
pub enum InterpCommand {
    /// Compare interpolation and Hörmander norms; direct-sum identity.
    Verify(commands::InterpVerifyArgs),
    /// Tabulate the interpolation parameter and test pseudo-concavity.
    Psi(commands::InterpPsiArgs),
}

#[derive(Debug, Subcommand)]
pub enum BvpCommand {
    /// Solve a problem, or apply the operator to a field.
    Solve(commands::BvpSolveArgs),
    /// Kernel, cokernel and index.
    Fredholm(commands::BvpFredholmArgs),
    /// A priori estimate probe over random fields.
    Apriori(commands::BvpAprioriArgs),
    /// Boundary-trace norms of solutions with decaying data.
    Regularity(commands::BvpRegularityArgs),
}

#[derive(Debug, Subcommand)]
pub enum GreenCommand {
    /// Green formula residuals and adjoint-system checks.
    Verify(commands::GreenVerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ro(RoCommand::Index(_)) => "ro index",
            Command::Ro(RoCommand::Check(_)) => "ro check",
            Command::Ro(RoCommand::Embed(_)) => "ro embed",
            Command::Ro(RoCommand::Classical(_)) => "ro classical",
            Command::Norm(_) => "norm",
            Command::Interp(InterpCommand::Verify(_)) => "interp verify",
            Command::Interp(InterpCommand::Psi(_)) => "interp psi",
            Command::Bvp(BvpCommand::Solve(_)) => "bvp solve",
            Command::Bvp(BvpCommand::Fredholm(_)) => "bvp fredholm",
            Command::Bvp(BvpCommand::Apriori(_)) => "bvp apriori",
            Command::Bvp(BvpCommand::Regularity(_)) => "bvp regularity",
            Command::Green(GreenCommand::Verify(_)) => "green verify",
        }
    }
}

/// Thresholds used to set `ok` flags in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Green formula residual.
    pub green: f64,
    /// Operator residual after a solve, relative to the data norm.
    pub operator: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            green: 1e-8,
            operator: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Truncations {
    #[serde(rename = "K")]
    pub k_max: usize,
    #[serde(rename = "R")]
    pub radial_points: usize,
}

impl Default for Truncations {
    fn default() -> Self {
        Truncations {
            k_max: 32,
            radial_points: 16,
        }
    }
}

/// Resolved run settings: built-in defaults, then the config file, then flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,
    pub input_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
    pub tolerances: Tolerances,
    pub truncations: Truncations,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            input_path: None,
            output_path: None,
            seed: 0,
            threads: 1,
            tolerances: Tolerances::default(),
            truncations: Truncations::default(),
            format: Format::Json,
        }
    }
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PRECONDITION,
            message: message.into(),
        }
    }
}

impl From<hormander::Error> for CliError {
    fn from(e: hormander::Error) -> Self {
        CliError {
            code: if e.is_numeric() { EXIT_NUMERIC } else { EXIT_PRECONDITION },
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(&p).map_err(|e| CliError::input(format!("config {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::input(format!("config {}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    cfg.command = cli.command.name().to_string();
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(o) = &cli.output {
        cfg.output_path = Some(o.clone());
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t.max(1);
    }
    Ok(cfg)
}

/// Run with explicit arguments (including the program name) and return the
/// exit code. Reports go to `stdout` or to the configured output path.
pub fn run<I, T>(argv: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let sink: &mut dyn std::io::Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli) {
        Ok((cfg, report)) => {
            let text = output::render(&report, cfg.format);
            match &cfg.output_path {
                Some(p) => {
                    if let Err(e) = fs::write(p, text) {
                        let _ = writeln!(stderr, "error: cannot write {}: {e}", p.display());
                        return EXIT_PRECONDITION;
                    }
                }
                None => {
                    let _ = stdout.write_all(text.as_bytes());
                }
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn execute(cli: &Cli) -> CliResult<(RunConfig, Value)> {
    let mut cfg = load_config(cli)?;
    let body = commands::dispatch(&cli.command, &mut cfg)?;
    let mut report = json!({
        "command": cfg.command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut report, body) {
        dst.extend(src);
    }
    Ok((cfg, report))
}
