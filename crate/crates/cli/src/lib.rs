//! The `elo` command line: argument parsing, dispatch and serialization.

pub mod args;
mod commands;
pub mod envelope;

use std::fmt;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command, Format};
use crate::envelope::Output;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Why a command failed.
#[derive(Debug)]
pub enum Failure {
    /// Bad flag value; names the flag.
    Usage { flag: &'static str, message: String },
    Computation(String),
}

impl Failure {
    pub fn usage(flag: &'static str, message: impl fmt::Display) -> Self {
        Failure::Usage {
            flag,
            message: message.to_string(),
        }
    }

    /// A library error blamed on `flag`.
    pub fn flag(flag: &'static str, e: elo_core::Error) -> Self {
        match e {
            elo_core::Error::InvalidArgument { reason, .. } => Failure::usage(flag, reason),
            other => Failure::usage(flag, other),
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage { .. } => EXIT_USAGE,
            Failure::Computation(_) => EXIT_COMPUTATION,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage { flag, message } => write!(f, "invalid value for --{flag}: {message}"),
            Failure::Computation(message) => f.write_str(message),
        }
    }
}

impl From<elo_core::Error> for Failure {
    fn from(e: elo_core::Error) -> Self {
        use elo_core::Error as E;
        match &e {
            E::InvalidArgument { name, reason } => Failure::usage(name, reason),
            E::ProbabilityOutOfRange(_) | E::Parse { .. } => Failure::usage("p", &e),
            E::GuardExceeded { .. } => Failure::usage("n", &e),
            _ => Failure::Computation(e.to_string()),
        }
    }
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs `elo` on `argv` (program name first).
pub fn run<I, S>(argv: I) -> RunResult
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let (stdout, stderr) = if code == EXIT_OK { (text, String::new()) } else { (String::new(), text) };
            return RunResult { code, stdout, stderr };
        }
    };
    if cli.threads > 0 {
        // Fails only if a pool was already installed by an earlier call.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let (name, result) = dispatch(&cli.command);
    let output = match result {
        Ok(o) => o,
        Err(f) => {
            return RunResult {
                code: f.exit_code(),
                stdout: String::new(),
                stderr: format!("error: {f}\n"),
            }
        }
    };
    match render(&output, cli.format, name, &argv[1.min(argv.len())..]) {
        Ok(stdout) => RunResult {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(f) => RunResult {
            code: f.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {f}\n"),
        },
    }
}

fn dispatch(command: &Command) -> (&'static str, Result<Output, Failure>) {
    match command {
        Command::Bound(a) => ("bound", commands::bound(a)),
        Command::Verify(a) => ("verify", commands::verify(a)),
        Command::Decompose(a) => ("decompose", commands::decompose(a)),
        Command::FourierCheck(a) => ("fourier-check", commands::fourier_check(a)),
        Command::Lstar(a) => ("lstar", commands::lstar(a)),
        Command::Scan(a) => ("scan", commands::scan_cmd(a)),
        Command::ProbePeriodicity(a) => ("probe-periodicity", commands::probe(a)),
    }
}

fn render(output: &Output, format: Format, name: &str, argv: &[String]) -> Result<String, Failure> {
    match format {
        Format::Json => {
            let envelope = output.envelope(name, argv);
            let mut text = serde_json::to_string_pretty(&envelope).map_err(|e| Failure::Computation(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => {
            let table = output
                .table
                .as_ref()
                .ok_or_else(|| Failure::usage("format", format!("csv output is not available for `{name}`")))?;
            let mut writer = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Failure::Computation(e.to_string());
            writer.write_record(&table.header).map_err(io)?;
            for row in &table.rows {
                writer.write_record(row).map_err(io)?;
            }
            let bytes = writer.into_inner().map_err(|e| Failure::Computation(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Failure::Computation(e.to_string()))
        }
    }
}
