mod commands;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairpipe::io::OutputFormat;
use fairpipe::Execution;

/// Audit and simulate multi-stage decision pipelines for equal opportunity.
#[derive(Debug, Parser)]
#[command(name = "fairpipe", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Root seed for all randomness [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Machine,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Slack of every protected group at every stage of recorded outcomes or a distribution.
    Audit(commands::AuditArgs),
    /// Expected counts, Monte Carlo statistics, and feasibility for a hiring scenario.
    Simulate(commands::SimulateArgs),
    /// Check the composition bound on a distribution, or search for counterexamples.
    Compose(commands::ComposeArgs),
    /// Iterate the participation feedback loop, or scan power-law rules.
    Feedback(commands::FeedbackArgs),
}

/// Exit statuses shared by all subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Input = 1,
    Verdict = 2,
}

fn write_report(global: &Global, doc: &fairpipe::io::Document) -> io::Result<()> {
    let format = match global.format {
        Format::Plain => OutputFormat::Plain,
        Format::Machine => OutputFormat::Machine,
    };
    let mut out: Box<dyn Write> = match &global.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    doc.write(&mut out, format).map_err(io::Error::other)?;
    out.flush()
}

fn run(cli: &Cli) -> Status {
    let exec = if cli.global.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let outcome = match &cli.command {
        Command::Audit(args) => commands::audit(args, &cli.global),
        Command::Simulate(args) => commands::simulate(args, &cli.global, exec),
        Command::Compose(args) => commands::compose(args, &cli.global, exec),
        Command::Feedback(args) => commands::feedback(args, exec),
    };
    let report = match outcome {
        Ok(report) => report,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            return failure.status;
        }
    };
    if let Some(doc) = &report.doc {
        if let Err(e) = write_report(&cli.global, doc) {
            eprintln!("error: writing report: {e}");
            return Status::Input;
        }
    }
    for note in &report.notes {
        eprintln!("{note}");
    }
    report.status
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                Status::Input as u8
            } else {
                0
            });
        }
    };
    let status = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build()
    {
        Ok(pool) => pool.install(|| run(&cli)),
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            Status::Input
        }
    };
    ExitCode::from(status as u8)
}
