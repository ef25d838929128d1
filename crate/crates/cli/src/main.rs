//! `phigamma` command-line driver. Every subcommand writes a JSON report
//! and exits with 0 (pass), 1 (check failure), 2 (input error) or
//! 3 (budget exceeded).

mod commands;
mod jobs;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use report::{Failure, Outcome, Report};

#[derive(Parser, Debug)]
#[command(
    name = "phigamma",
    version,
    about = "Exact checks for multivariable (phi, Gamma)-modules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent checks.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Primitive idempotents of a tensor product of finite fields and the
    /// transitivity of the partial Frobenii on them.
    Idempotents {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        p: Option<u64>,
        /// Comma-separated degrees, e.g. `2,2`.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
    },
    /// Étaleness and relation checks for a module file.
    CheckModule {
        #[arg(long)]
        config: Option<PathBuf>,
        module: Option<PathBuf>,
        /// Random elements per ring-map commutation check.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Frobenius fixed points of a truncated system.
    FixedPoints {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        expect_dim: Option<usize>,
    },
    /// Certified D++ lattice and membership of elements.
    Dplusplus {
        #[arg(long)]
        config: Option<PathBuf>,
        module: Option<PathBuf>,
        /// Generator matrix of the lattice (defaults to the standard one).
        #[arg(long)]
        lattice: Option<PathBuf>,
        /// JSON list of module elements, each a list of series.
        #[arg(long)]
        elements: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        k_max: usize,
    },
    /// Builds D(eta) for a rank-one character and recovers eta from it.
    Roundtrip {
        #[arg(long)]
        config: Option<PathBuf>,
        character: Option<PathBuf>,
    },
    /// Evaluates an operator word on a series.
    ApplyOp {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the word in the config, e.g. `phi(a)^2 * gamma(a; 1+p)`.
        #[arg(long)]
        word: Option<String>,
    },
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: malformed JSON: {e}", path.display())))
}

fn typed<T: DeserializeOwned>(v: &Value, what: &str) -> Result<T, Failure> {
    serde_json::from_value(v.clone()).map_err(|e| Failure::input(format!("invalid {what}: {e}")))
}

fn input_path(
    config: &Option<PathBuf>,
    positional: &Option<PathBuf>,
    what: &str,
) -> Result<PathBuf, Failure> {
    config
        .clone()
        .or_else(|| positional.clone())
        .ok_or_else(|| Failure::input(format!("missing {what} file")))
}

/// Reads the inputs, runs the command and returns `(inputs, outcome)`; the
/// inputs feed the config hash.
fn run(cmd: &Command, g: &Global) -> (Vec<Value>, Result<Outcome, Failure>) {
    let mut inputs = Vec::new();
    let outcome = (|| match cmd {
        Command::Idempotents { config, p, n } => {
            let v = match (config, p) {
                (Some(path), _) => read_json(path)?,
                (None, Some(p)) => json!({ "p": p, "n": n }),
                (None, None) => return Err(Failure::input("give --config or --p/--n")),
            };
            inputs.push(v.clone());
            commands::idempotents(&typed(&v, "idempotents config")?, g.jobs)
        }
        Command::CheckModule {
            config,
            module,
            trials,
        } => {
            let v = read_json(&input_path(config, module, "module")?)?;
            inputs.push(v.clone());
            inputs.push(json!({ "trials": trials }));
            commands::check_module(&typed(&v, "module")?, g.jobs, g.seed, *trials)
        }
        Command::FixedPoints { config, expect_dim } => {
            let v = read_json(config)?;
            inputs.push(v.clone());
            inputs.push(json!({ "expect_dim": expect_dim }));
            commands::fixed_points(&typed(&v, "fixed-point config")?, *expect_dim)
        }
        Command::Dplusplus {
            config,
            module,
            lattice,
            elements,
            k_max,
        } => {
            let mv = read_json(&input_path(config, module, "module")?)?;
            inputs.push(mv.clone());
            let lattice = match lattice {
                Some(path) => {
                    let v = read_json(path)?;
                    inputs.push(v.clone());
                    Some(typed(&v, "lattice")?)
                }
                None => None,
            };
            let elements = match elements {
                Some(path) => {
                    let v = read_json(path)?;
                    inputs.push(v.clone());
                    typed(&v, "element list")?
                }
                None => Vec::new(),
            };
            inputs.push(json!({ "k_max": k_max }));
            commands::dplusplus(&typed(&mv, "module")?, lattice.as_ref(), &elements, *k_max)
        }
        Command::Roundtrip { config, character } => {
            let v = read_json(&input_path(config, character, "character")?)?;
            inputs.push(v.clone());
            commands::roundtrip(&typed(&v, "character")?)
        }
        Command::ApplyOp { config, word } => {
            let v = read_json(config)?;
            inputs.push(v.clone());
            inputs.push(json!({ "word": word }));
            commands::apply_op(&typed(&v, "apply-op config")?, word.as_deref())
        }
    })();
    (inputs, outcome)
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Idempotents { .. } => "idempotents",
        Command::CheckModule { .. } => "check-module",
        Command::FixedPoints { .. } => "fixed-points",
        Command::Dplusplus { .. } => "dplusplus",
        Command::Roundtrip { .. } => "roundtrip",
        Command::ApplyOp { .. } => "apply-op",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (inputs, outcome) = run(&cli.command, &cli.global);
    let report = Report::new(
        command_name(&cli.command),
        report::config_hash(&inputs),
        cli.global.seed,
    )
    .finish(outcome);
    let body = match cli.global.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Text => {
            let detail = report
                .summary
                .as_deref()
                .or(report.error.as_deref())
                .unwrap_or("");
            let status = serde_json::to_value(report.status).expect("status serializes");
            format!(
                "{}: {} ({detail})\n",
                report.command,
                status.as_str().unwrap_or_default()
            )
        }
    };
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    ExitCode::from(report.exit_code as u8)
}
