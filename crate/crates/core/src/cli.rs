//! Command-line front end: one subcommand per experiment.

use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, ExperimentKind};
use crate::error::Result;
use crate::output::{emit_record, EmittedFiles};
use crate::record::RunRecord;

#[derive(Parser, Debug)]
#[command(name = "zrlab", version, about = "Zakharov-Rubenchik spectral laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Config file with [grid], [params], [stepper], [experiment], [output] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set stepper.dt=1e-3`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Only print the verdict line.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plain evolution with conserved quantities and norms recorded.
    Simulate(RunArgs),
    /// Conservation audit at dt and dt/2.
    Conserve(RunArgs),
    /// Norm-inflation sweep over N.
    Inflate(RunArgs),
    /// Growth of the bilinear Duhamel term in N.
    C2probe(RunArgs),
    /// Two nearby solutions whose phases separate.
    Decohere(RunArgs),
    /// Long-time growth of Sobolev norms.
    Growth(RunArgs),
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::Simulate(a) => (ExperimentKind::Simulate, a),
            Command::Conserve(a) => (ExperimentKind::Conserve, a),
            Command::Inflate(a) => (ExperimentKind::Inflate, a),
            Command::C2probe(a) => (ExperimentKind::C2probe, a),
            Command::Decohere(a) => (ExperimentKind::Decohere, a),
            Command::Growth(a) => (ExperimentKind::Growth, a),
        }
    }
}

/// Loads the spec, runs the experiment and writes its files.
pub fn run_kind(
    kind: ExperimentKind,
    config: Option<&std::path::Path>,
    overrides: &[String],
) -> Result<(RunRecord, EmittedFiles)> {
    let spec = load_config(config, overrides, Some(kind))?;
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let record = crate::experiments::run(&spec)?;
    let files = emit_record(&spec, &record, clock.elapsed().as_secs_f64(), started)?;
    Ok((record, files))
}

fn report(kind: ExperimentKind, record: &RunRecord, files: &EmittedFiles, quiet: bool) {
    println!("{}: {:?}", kind.name(), record.verdict);
    if quiet {
        return;
    }
    for (k, v) in &record.scalars {
        println!("  {k} = {v}");
    }
    for n in &record.notes {
        println!("  note: {n}");
    }
    println!("  wrote {}", files.csv.display());
    for f in &files.fits {
        println!("  wrote {}", f.display());
    }
    println!("  wrote {}", files.manifest.display());
}

/// Parses `argv` (program name first) and returns the process exit code:
/// 0 pass/complete, 2 inconclusive, 1 failure or error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (kind, args) = cli.command.split();
    match run_kind(kind, args.config.as_deref(), &args.set) {
        Ok((record, files)) => {
            report(kind, &record, &files, args.quiet);
            record.verdict.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
