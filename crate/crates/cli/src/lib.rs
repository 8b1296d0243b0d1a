//! Front end of the `relaxwave` binary: configuration, the five
//! subcommands and reproducible run directories.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use error::CliError;
use output::RunDir;

#[derive(Debug, Parser)]
#[command(name = "relaxwave", version, about = "Relaxation shock and contact wave experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Traveling-wave profiles of the shock fields.
    Profile(RunArgs),
    /// Diffusive contact wave samples and decay fits.
    Contact(RunArgs),
    /// Wave fan of the configured Riemann data or design.
    Riemann(RunArgs),
    /// Perturbed Jin-Xin run with the stability verdict.
    Simulate(RunArgs),
    /// Property suite over the ansatz, without time integration.
    Check(RunArgs),
    /// Prints the default configuration.
    DefaultConfig,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Config file; repeat to run several experiments concurrently.
    #[arg(long = "config", value_name = "PATH")]
    pub configs: Vec<PathBuf>,
    /// Override a config key, e.g. `--set solver.cells=4000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Profile(_) => "profile",
            Command::Contact(_) => "contact",
            Command::Riemann(_) => "riemann",
            Command::Simulate(_) => "simulate",
            Command::Check(_) => "check",
            Command::DefaultConfig => "default-config",
        }
    }
}

/// Result of one experiment, ready to print.
pub struct RunResult {
    pub exit_code: u8,
    pub stdout: String,
    pub stderr: String,
}

fn load(args: &RunArgs, path: Option<&PathBuf>) -> Result<ExperimentConfig, CliError> {
    let mut overrides = args.overrides.clone();
    if let Some(dir) = &args.output_dir {
        overrides.push(format!("output_dir={}", serde_json::Value::String(dir.display().to_string())));
    }
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    config::load(path.map(|p| p.as_path()), &overrides)
}

fn run_one(command: &Command, args: &RunArgs, path: Option<&PathBuf>) -> RunResult {
    let fail = |e: &CliError| RunResult {
        exit_code: e.exit_code,
        stdout: String::new(),
        stderr: e.to_json(),
    };
    let config = match load(args, path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let mut dir = match RunDir::create(command.name(), &config) {
        Ok(d) => d,
        Err(e) => return fail(&e),
    };
    let result = match command {
        Command::Profile(_) => commands::profile(&config, &mut dir),
        Command::Contact(_) => commands::contact(&config, &mut dir),
        Command::Riemann(_) => commands::riemann(&config, &mut dir),
        Command::Simulate(_) => commands::simulate(&config, &mut dir),
        Command::Check(_) => commands::check(&config, &mut dir),
        Command::DefaultConfig => unreachable!("handled before dispatch"),
    };
    let (exit_code, stdout, stderr) = match result {
        Ok(o) => (o.exit_code, o.summary, String::new()),
        Err(e) => {
            let text = e.to_json();
            if let Err(io) = dir.write_text("error.json", &text) {
                return fail(&io);
            }
            (e.exit_code, String::new(), text)
        }
    };
    match dir.finish(exit_code) {
        Ok(path) => RunResult {
            exit_code,
            stdout: if stdout.is_empty() {
                format!("{}: {}\n", command.name(), path.display())
            } else {
                format!("{stdout}\n  -> {}\n", path.display())
            },
            stderr,
        },
        Err(e) => fail(&e),
    }
}

/// Runs every configured experiment, concurrently when more than one
/// config is given. Results come back in argument order.
pub fn execute(cli: &Cli) -> Vec<RunResult> {
    let args = match &cli.command {
        Command::DefaultConfig => {
            return vec![RunResult {
                exit_code: 0,
                stdout: ExperimentConfig::default().canonical_json(),
                stderr: String::new(),
            }]
        }
        Command::Profile(a) | Command::Contact(a) | Command::Riemann(a) | Command::Simulate(a) | Command::Check(a) => a,
    };
    if args.configs.len() <= 1 {
        return vec![run_one(&cli.command, args, args.configs.first())];
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = args
            .configs
            .iter()
            .map(|p| s.spawn(move || run_one(&cli.command, args, Some(p))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    })
}
