//! `marklab` experiment runner.
//!
//! Exit codes: 0 success, 1 failed check, 2 budget exhausted, 3 invalid
//! configuration or arguments.

pub mod args;
pub mod artifact;
pub mod commands;
pub mod config;
pub mod fixtures;
pub mod sequence;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use serde_json::json;

use crate::args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] marklab::Error),
    #[error("check failed: {0}")]
    Check(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use marklab::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Check(_) => EXIT_CHECK_FAILED,
            CliError::Core(e) => match e {
                E::BudgetExceeded { .. } => EXIT_BUDGET,
                E::NotAQuotient { .. }
                | E::Certificate(_)
                | E::ZeroMass
                | E::RadiusExceeded { .. }
                | E::DepthMismatch { .. }
                | E::VertexTooDeep { .. } => EXIT_CHECK_FAILED,
                _ => EXIT_CONFIG,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        use marklab::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Check(_) => "check",
            CliError::Core(e) => match e {
                E::BudgetExceeded { .. } => "budget",
                E::NotAQuotient { .. } => "not_a_quotient",
                E::Certificate(_) => "certificate",
                E::LiftHypothesis { .. } => "lift_hypothesis",
                E::Parse(_) | E::GeneratorOutOfRange { .. } => "parse",
                E::InvalidMeasure(_) | E::Degenerate { .. } | E::AsymmetricMeasure(_) => "measure",
                _ => "invalid",
            },
        }
    }
}

fn report_error(e: &CliError, command: Option<&str>, as_json: bool, err: &mut dyn Write) -> i32 {
    let code = e.exit_code();
    let _ = if as_json {
        let doc = json!({ "error": { "kind": e.kind(), "exit_code": code, "command": command, "message": e.to_string() } });
        writeln!(err, "{doc}")
    } else {
        writeln!(err, "error: {e}")
    };
    code
}

fn dispatch(command: &Command) -> Result<(artifact::Artifact, bool, &args::OutputArgs), CliError> {
    Ok(match command {
        Command::Fixtures(a) => {
            let (art, ok) = commands::fixtures(a)?;
            (art, ok, &a.output)
        }
        Command::Ball(a) => (commands::ball(a)?, true, &a.output),
        Command::Agreement(a) => (commands::agreement(a)?, true, &a.output),
        Command::Schreier(a) => (commands::schreier(a)?, true, &a.output),
        Command::SearchMarkings(a) => (commands::search(a)?, true, &a.output),
        Command::Lift(a) => (commands::lift(a)?, true, &a.output),
        Command::Profile(a) => (commands::profile(a)?, true, &a.output),
        Command::Compare(a) => {
            let (art, ok) = commands::compare(a)?;
            (art, ok, &a.output)
        }
        Command::Sequence(a) => (commands::sequence(a)?, true, &a.output),
    })
}

/// Parses `argv` (program name first), merges any config file, runs the
/// command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let json_errors = argv.iter().any(|a| a == "--json-errors");
    let argv = match config::merge_config(argv) {
        Ok(a) => a,
        Err(e) => return report_error(&e, None, json_errors, err),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            if json_errors {
                return report_error(&CliError::Config(e.to_string().trim().to_string()), None, true, err);
            }
            let _ = write!(err, "{}", e.render());
            return EXIT_CONFIG;
        }
    };
    let name = cli.command.name();
    let result = match cli.threads {
        Some(0) => Err(CliError::Config("threads must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(CliError::Config(format!("cannot build thread pool: {e}"))),
        },
        None => dispatch(&cli.command),
    };
    let emitted = result.and_then(|(artifact, ok, output)| {
        for w in &artifact.warnings {
            let _ = writeln!(err, "warning: {w}");
        }
        artifact.emit(output, out)?;
        Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
    });
    match emitted {
        Ok(code) => code,
        Err(e) => report_error(&e, Some(name), cli.json_errors, err),
    }
}
