//! `envsim`: runs one experiment from a JSON config and writes its CSV.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use envsim::error::Error;
use envsim::evolution::Execution;
use envsim::experiment::{run_experiment, ExperimentConfig, ExperimentKind};

/// Exit code for a run that completed but whose own check failed
/// (minspace-check only).
const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "envsim", version, about = "Minimal environment encodings and open-system trajectory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wavepacket absorption on the ring.
    Wavepackage(Common),
    /// Qubit thermalisation in an ohmic bath.
    Thermalise(Common),
    /// Full versus minimal correlations on random environments.
    MinspaceCheck(Common),
    /// Qubit count, Trotter steps and gate count.
    Resources(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `run.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; falls back to `output.path`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores, or ENVSIM_THREADS). Never changes results.
    #[arg(long)]
    threads: Option<usize>,
    /// Print the effective config as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

fn load_config(kind: ExperimentKind, args: &Common) -> Result<ExperimentConfig, Error> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let config = ExperimentConfig::from_json(&text)?;
            if config.experiment != kind {
                return Err(Error::Config {
                    field: "experiment".into(),
                    reason: format!("config is for `{}`, subcommand is `{}`", config.experiment.name(), kind.name()),
                });
            }
            config
        }
        None => ExperimentConfig::default_for(kind),
    };
    if let Some(seed) = args.seed {
        config.run.master_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn thread_count(args: &Common) -> Result<Option<usize>, Error> {
    let n = match args.threads {
        Some(n) => Some(n),
        None => match std::env::var("ENVSIM_THREADS") {
            Ok(v) => Some(v.parse().map_err(|_| Error::Config {
                field: "ENVSIM_THREADS".into(),
                reason: format!("not a thread count: {v}"),
            })?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(Error::Config { field: "threads".into(), reason: "must be at least 1".into() });
    }
    Ok(n)
}

fn run(kind: ExperimentKind, args: &Common) -> Result<bool, Error> {
    let config = load_config(kind, args)?;
    if args.print_config {
        let text = config.to_json() + "\n";
        std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Io(format!("stdout: {e}")))?;
        return Ok(true);
    }
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_count(args)? {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Error::Internal(format!("thread pool: {e}")))?
    };
    let output = pool.install(|| run_experiment(&config, Execution::Parallel))?;
    let csv = output.render_csv(&config);

    let dest = args.out.clone().or_else(|| config.output.path.as_ref().map(PathBuf::from));
    match dest {
        Some(path) => fs::write(&path, csv).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| Error::Io(format!("stdout: {e}")))?,
    }
    for line in &output.summary {
        eprintln!("{line}");
    }
    Ok(output.passed.unwrap_or(true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Wavepackage(a) => (ExperimentKind::Wavepackage, a),
        Command::Thermalise(a) => (ExperimentKind::Thermalise, a),
        Command::MinspaceCheck(a) => (ExperimentKind::MinspaceCheck, a),
        Command::Resources(a) => (ExperimentKind::Resources, a),
    };
    match run(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            // single line, newlines in the message flattened
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: kind={} message={msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}
