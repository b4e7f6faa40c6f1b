use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use topopump::harness::{execute, load_config, Experiment, HarnessError};

/// Run a topological-pumping experiment and write its CSV tables.
#[derive(Debug, Parser)]
#[command(name = "topopump", version)]
struct Cli {
    /// spectrum | evolve | sweep-time | sweep-size | reduced-compare | area-report
    experiment: Experiment,

    /// TOML config file, or the name of a shipped preset (fig2, fig3, ...).
    #[arg(long)]
    config: PathBuf,

    /// Output directory [default: config's output.dir, else ./out].
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the integration step.
    #[arg(long)]
    dt: Option<f64>,

    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,

    /// Also render SVG plots.
    #[arg(long)]
    plot: bool,
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let mut config = load_config(&cli.config)?;
    if cli.dt.is_some() {
        config.numerics.dt = cli.dt;
    }
    if cli.workers.is_some() {
        config.numerics.workers = cli.workers;
    }
    let plot = cli.plot || config.output.plot;
    let dir = cli
        .out
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let report = execute(&config, cli.experiment)?;
    for path in report.write(&dir, plot)? {
        println!("{}", path.display());
    }
    match (report.meta.converged, report.meta.convergence_delta) {
        (Some(false), Some(delta)) => Err(HarnessError::NotConverged { delta }),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("topopump: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
