//! The `adfd` command: validate specifications and models, check rule
//! catalogs and run threat analysis.
//!
//! Exit codes: 0 success, 1 usage or I/O failure (including malformed
//! JSON), 2 validation failure, 3 matches found under `--fail-on-match`.

mod render;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use adfd_core::catalog::{load_catalog, CatalogError, Rule};
use adfd_core::io::{self, LoadError};
use adfd_core::{analyze, AnalyzeError, AnalyzeOptions, ContentSpecification, Diagram, Uniqueness};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use render::CheckedRule;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_MATCHED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "adfd", version, about = "Threat analysis on advanced data-flow diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlowUniqueness {
    Elements,
    Connectors,
}

impl From<FlowUniqueness> for Uniqueness {
    fn from(u: FlowUniqueness) -> Self {
        match u {
            FlowUniqueness::Elements => Uniqueness::Elements,
            FlowUniqueness::Connectors => Uniqueness::Connectors,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a content specification is well formed.
    ValidateSpec {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Check that a model conforms to a specification.
    ValidateModel {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Parse and statically check every rule of a catalog.
    CheckRules {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        rules: PathBuf,
    },
    /// Evaluate a rule catalog on a model and report the threats found.
    Analyze {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long, value_enum, default_value_t = FlowUniqueness::Elements)]
        flow_uniqueness: FlowUniqueness,
        /// Exit with status 3 when any rule matched.
        #[arg(long)]
        fail_on_match: bool,
        /// Worker threads for rule evaluation.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Why a command stopped early.
#[derive(Debug)]
enum Failure {
    Io(String),
    Invalid(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => EXIT_IO,
            Failure::Invalid(_) => EXIT_INVALID,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Invalid(m) => m,
        }
    }
}

/// An input file's text together with its digest.
struct Input {
    text: String,
    digest: String,
}

fn read(path: &Path) -> Result<Input, Failure> {
    let bytes =
        fs::read(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let digest: String = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::Io(format!("{} is not valid UTF-8", path.display())))?;
    Ok(Input {
        text,
        digest: format!("sha256:{digest}"),
    })
}

fn load_error(path: &Path, e: LoadError) -> Failure {
    let m = format!("{}: {e}", path.display());
    match e {
        LoadError::Syntax(_) => Failure::Io(m),
        LoadError::Model(_) => Failure::Invalid(m),
    }
}

fn load_spec(path: &Path) -> Result<(ContentSpecification, Input), Failure> {
    let input = read(path)?;
    let spec = io::parse_spec(&input.text).map_err(|e| load_error(path, e))?;
    Ok((spec, input))
}

fn load_model(path: &Path) -> Result<(Diagram, Input), Failure> {
    let input = read(path)?;
    let diagram = io::parse_model(&input.text).map_err(|e| load_error(path, e))?;
    Ok((diagram, input))
}

fn load_rules(path: &Path) -> Result<(Vec<Rule>, Input), Failure> {
    let input = read(path)?;
    let rules = load_catalog(&input.text).map_err(|e| {
        let m = format!("{}: {}: {e}", path.display(), e.code());
        match e {
            CatalogError::Syntax(_) => Failure::Io(m),
            _ => Failure::Invalid(m),
        }
    })?;
    Ok((rules, input))
}

/// Structured result of the validation commands.
#[derive(Debug, Serialize)]
struct ValidationOutput<'a> {
    command: &'a str,
    valid: bool,
    violations: Vec<adfd_core::Violation>,
    warnings: Vec<adfd_core::Violation>,
}

/// Structured result of `check-rules`.
#[derive(Debug, Serialize)]
struct CheckOutput {
    command: &'static str,
    valid: bool,
    rules: Vec<CheckedRule>,
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Output goes to `stdout` unless `--out` names a file; diagnostics
/// go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok((text, code)) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, &text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(m) => {
                    let _ = writeln!(stderr, "error: {m}");
                    EXIT_IO
                }
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.exit_code()
        }
    }
}

/// The rendered output and exit code of a command.
fn execute(cli: &Cli) -> Result<(String, i32), Failure> {
    let structured = cli.format == Format::Structured;
    match &cli.command {
        Command::ValidateSpec { spec } => {
            let (spec, _) = load_spec(spec)?;
            let text = if structured {
                io::to_json(&ValidationOutput {
                    command: "validate-spec",
                    valid: true,
                    violations: Vec::new(),
                    warnings: Vec::new(),
                })
            } else {
                render::spec_summary(&spec)
            };
            Ok((text, EXIT_OK))
        }
        Command::ValidateModel { spec, model } => {
            let (spec, _) = load_spec(spec)?;
            let (diagram, _) = load_model(model)?;
            let violations = adfd_core::validate_diagram(&diagram, &spec);
            let warnings = adfd_core::conformance::unheld_assets(&diagram);
            let code = if violations.is_empty() { EXIT_OK } else { EXIT_INVALID };
            let text = if structured {
                io::to_json(&ValidationOutput {
                    command: "validate-model",
                    valid: violations.is_empty(),
                    violations,
                    warnings,
                })
            } else {
                render::model_findings(&diagram, &violations, &warnings)
            };
            Ok((text, code))
        }
        Command::CheckRules { spec, rules } => {
            let (spec, _) = load_spec(spec)?;
            let (rules, _) = load_rules(rules)?;
            let checked: Vec<CheckedRule> =
                rules.iter().map(|r| CheckedRule::check(r, &spec)).collect();
            let valid = checked.iter().all(|r| r.passed);
            let text = if structured {
                io::to_json(&CheckOutput {
                    command: "check-rules",
                    valid,
                    rules: checked,
                })
            } else {
                render::check_results(&checked)
            };
            Ok((text, if valid { EXIT_OK } else { EXIT_INVALID }))
        }
        Command::Analyze {
            spec,
            model,
            rules,
            flow_uniqueness,
            fail_on_match,
            jobs,
        } => {
            let (spec, spec_in) = load_spec(spec)?;
            let (diagram, model_in) = load_model(model)?;
            let (rules, rules_in) = load_rules(rules)?;
            let options = AnalyzeOptions {
                uniqueness: (*flow_uniqueness).into(),
                jobs: *jobs,
            };
            let mut report = analyze(&diagram, &spec, &rules, &options).map_err(|e| match e {
                AnalyzeError::ModelNotConforming(ref vs) => Failure::Invalid(
                    std::iter::once(e.to_string())
                        .chain(vs.iter().map(|v| format!("  {v}")))
                        .collect::<Vec<_>>()
                        .join("\n"),
                ),
                AnalyzeError::ThreadPool(m) => Failure::Io(m),
            })?;
            report.metadata.inputs = [
                ("spec", spec_in.digest),
                ("model", model_in.digest),
                ("rules", rules_in.digest),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v))
            .collect();
            let matched = report.matched().next().is_some();
            let text = if structured {
                io::to_json(&report)
            } else {
                render::report(&report)
            };
            let code = if *fail_on_match && matched {
                EXIT_MATCHED
            } else {
                EXIT_OK
            };
            Ok((text, code))
        }
    }
}
