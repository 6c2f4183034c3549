use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use saddlekit::experiment::{self, apply_override, parse_config_value, ExperimentConfig};
use saddlekit::Error;

#[derive(Parser)]
#[command(name = "saddlekit", version, about = "Saddle-point dynamics experiments")]
struct Cli {
    /// JSON experiment description.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Seed for randomly drawn problems.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override a configuration key, e.g. `--set method.gamma=0.1`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Exit with status 3 when a run trips the divergence guard.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a discrete method or integrate a continuous model.
    Run,
    /// Compare all methods on a seeded 1x1 bilinear game.
    FigureBg {
        #[arg(long, default_value_t = 0.05)]
        gamma: f64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long, default_value = "figure_bg.svg")]
        svg: String,
        #[arg(long, default_value = "figure_bg.csv")]
        csv: String,
    },
    /// Linear stability of the continuous models on a bilinear game.
    Stability,
    /// Check that Lyapunov functionals decrease along a run.
    Lyapunov,
    /// Convergence-rate diagnostics for a run.
    Rates,
    /// List problems, methods and functionals.
    Catalog,
}

enum Failure {
    Config(String),
    Diverged(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Config(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut doc = match &cli.config {
        None => serde_json::Value::Object(Default::default()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: cannot read config: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Config(format!("{}: invalid JSON: {e}", path.display())))?
        }
    };
    for item in &cli.overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("--set {item}: expected KEY=VALUE")))?;
        apply_override(&mut doc, key.trim(), value)?;
    }
    let mut cfg = parse_config_value(doc)?;
    if let Some(seed) = cli.seed {
        cfg.reseed(seed);
    }
    Ok(cfg)
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

fn check_divergence(strict: bool, diverged: bool, what: &str) -> Result<(), Failure> {
    if strict && diverged {
        Err(Failure::Diverged(format!("{what} tripped the divergence guard")))
    } else {
        Ok(())
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let out: &Path = &cli.out;
    match &cli.command {
        Command::Catalog => {
            print!("{}", experiment::catalog_listing());
        }
        Command::FigureBg { gamma, steps, svg, csv } => {
            let seed = cli.seed.unwrap_or(0);
            let fig = experiment::cmd_figure_bg(*gamma, *steps, seed, out, svg, csv)?;
            print_files(&fig.files);
            for (label, traj) in &fig.curves {
                check_divergence(cli.strict, traj.diverged(), label)?;
            }
        }
        Command::Run => {
            let cfg = load_config(cli)?;
            let outcome = experiment::cmd_run(&cfg, out)?;
            print_files(&outcome.files);
            check_divergence(cli.strict, outcome.summary.diverged, &outcome.summary.method)?;
        }
        Command::Stability => {
            let cfg = load_config(cli)?;
            let (_, files) = experiment::cmd_stability(&cfg, out)?;
            print_files(&files);
        }
        Command::Lyapunov | Command::Rates => {
            let cfg = load_config(cli)?;
            let (report, files) = if matches!(cli.command, Command::Lyapunov) {
                experiment::cmd_lyapunov(&cfg, out)?
            } else {
                experiment::cmd_rates(&cfg, out)?
            };
            print_files(&files);
            let diverged = report["diverged"].as_bool().unwrap_or(false);
            check_divergence(cli.strict, diverged, report["method"].as_str().unwrap_or("run"))?;
        }
    }
    Ok(())
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", one_line(first.trim_start_matches("error:")));
            return ExitCode::from(2);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            ExitCode::from(2)
        }
        Err(Failure::Diverged(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            ExitCode::from(1)
        }
    }
}
