use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use propensity_cli::config::DEMO_CONFIG;
use propensity_cli::pipeline::resolve_out;
use propensity_cli::{CliError, Pipeline, PipelineConfig, Stage};

#[derive(Parser)]
#[command(name = "propensity", version, about = "Rare-event propensity pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Shared {
    /// Pipeline config (TOML). Defaults to the bundled demo config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the master seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    Generate(Shared),
    Balance(Shared),
    Tune(Shared),
    Train(Shared),
    Evaluate(Shared),
    Explain(Shared),
    RunAll(Shared),
    /// Print the bundled demo config.
    DemoConfig,
}

fn run(cmd: Command) -> Result<(), CliError> {
    let (shared, stage) = match cmd {
        Command::DemoConfig => {
            print!("{DEMO_CONFIG}");
            return Ok(());
        }
        Command::Generate(s) => (s, Some(Stage::Generate)),
        Command::Balance(s) => (s, Some(Stage::Balance)),
        Command::Tune(s) => (s, Some(Stage::Tune)),
        Command::Train(s) => (s, Some(Stage::Train)),
        Command::Evaluate(s) => (s, Some(Stage::Evaluate)),
        Command::Explain(s) => (s, Some(Stage::Explain)),
        Command::RunAll(s) => (s, None),
    };
    if let Some(n) = shared.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let mut cfg = match &shared.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::from_toml(DEMO_CONFIG)?,
    };
    if let Some(seed) = shared.seed {
        cfg.seed = seed;
    }
    let out = resolve_out(shared.out.as_deref(), &cfg);
    let pipeline = Pipeline::new(cfg, out)?;
    match stage {
        Some(s) => pipeline.run(s),
        None => pipeline.run_all(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
