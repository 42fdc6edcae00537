use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quasiwalk::config::{parse_config, ExperimentKind, RunConfig};
use quasiwalk::run::run;
use quasiwalk::{Error, Result};

#[derive(Parser)]
#[command(name = "quasiwalk", version, about = "Light-driven lattice walks: simulate, discretize, analyse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single trajectory with its discrete walk.
    Trajectory(RunArgs),
    /// Ensemble of walks and their statistics.
    Ensemble(RunArgs),
    /// Damped particle under correlated noise.
    Langevin(RunArgs),
    /// Kicked-rotor growth-rate scan.
    CombScan(RunArgs),
    /// Force decomposition on a (θ, t) grid.
    ForceProfile(RunArgs),
    /// Validate a config and print it fully resolved.
    Check {
        #[arg(short, long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(short, long)]
    config: PathBuf,
    /// Overrides master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory (takes precedence over the environment).
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn load(path: &PathBuf) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn execute(kind: ExperimentKind, args: RunArgs) -> Result<()> {
    let mut config = load(&args.config)?;
    if config.kind != kind {
        return Err(Error::Config(format!(
            "config describes a {} run, not {}",
            config.kind.label(),
            kind.label()
        )));
    }
    if let Some(seed) = args.seed {
        if seed > i64::MAX as u64 {
            return Err(Error::Config("--seed must fit in a signed 64-bit integer".into()));
        }
        config.master_seed = seed;
        if let Some(l) = config.langevin.as_mut() {
            l.master_seed = seed;
        }
    }
    config.apply_env_override();
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    if args.verbose > 0 {
        eprintln!("{}", config.to_toml());
    }
    let manifest = run(&config)?;
    if args.verbose > 0 {
        for (k, v) in &manifest.summary {
            eprintln!("{k} = {v}");
        }
        for n in &manifest.notes {
            eprintln!("note: {n}");
        }
    }
    println!(
        "wrote {} files to {} in {:.1} s",
        manifest.files.len(),
        manifest.output_dir,
        manifest.wall_clock_seconds
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Trajectory(a) => execute(ExperimentKind::Trajectory, a),
        Command::Ensemble(a) => execute(ExperimentKind::Ensemble, a),
        Command::Langevin(a) => execute(ExperimentKind::Langevin, a),
        Command::CombScan(a) => execute(ExperimentKind::CombScan, a),
        Command::ForceProfile(a) => execute(ExperimentKind::ForceProfile, a),
        Command::Check { config } => load(&config).map(|c| print!("{}", c.to_toml())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
