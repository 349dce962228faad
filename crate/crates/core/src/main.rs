use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kolmo::cli::{error_exit_code, run};
use kolmo::config::{Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "kolmo", version, about = "Tug-of-war experiments for Kolmogorov p-Laplace equations")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Config file (`key = value` with `[command]` sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    MvCheck,
    Solve,
    Play,
    Sweep,
    CrossValidate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::MvCheck => Command::MvCheck,
            Cmd::Solve => Command::Solve,
            Cmd::Play => Command::Play,
            Cmd::Sweep => Command::Sweep,
            Cmd::CrossValidate => Command::CrossValidate,
        }
    }
}

fn load(args: &Args) -> kolmo::Result<ExperimentConfig> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut pairs = Vec::new();
    if let Some(seed) = args.seed {
        pairs.push(format!("seed = {seed}"));
    }
    if let Some(out) = &args.out {
        pairs.push(format!("out = {}", out.display()));
    }
    let command: Command = args.command.into();
    // overrides are appended to the selected section so they win
    let text = if pairs.is_empty() {
        text
    } else {
        format!("{text}\n[{}]\n{}\n", command.name(), pairs.join("\n"))
    };
    ExperimentConfig::from_text(&text, command)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(error_exit_code(&e) as u8);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(3);
        }
    };
    match pool.install(|| run(&cfg, &cfg.out)) {
        Ok(report) => {
            for line in &report.summaries {
                println!("{line}");
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
