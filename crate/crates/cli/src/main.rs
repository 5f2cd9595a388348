use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qhlab::{acceptance, validate, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "qhlab", version, about = "Quasihyperbolic potential theory experiments")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON configuration.
    Run {
        config: PathBuf,
        /// Write outputs here instead of the configured directory.
        #[arg(long, env = OUTPUT_DIR_ENV)]
        output_dir: Option<PathBuf>,
    },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
    /// Run the acceptance suite.
    Accept {
        /// Skip the slowest criteria.
        #[arg(long)]
        quick: bool,
        /// Also write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn read(path: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match cli.command {
        Command::Validate { config } => {
            let text = match read(&config) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let v = validate(&text);
            for w in &v.warnings {
                eprintln!("warning: {w}");
            }
            for e in &v.errors {
                eprintln!("error: {e}");
            }
            if v.is_ok() {
                println!("{}: ok", config.display());
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Run { config, output_dir } => {
            let text = match read(&config) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let v = validate(&text);
            for w in &v.warnings {
                eprintln!("warning: {w}");
            }
            let Some(cfg) = v.config else {
                for e in &v.errors {
                    eprintln!("error: {e}");
                }
                return ExitCode::FAILURE;
            };
            let result = match output_dir {
                Some(dir) => qhlab::run_in(&cfg, &dir),
                None => qhlab::run(&cfg),
            };
            match result {
                Ok(outcome) => {
                    for s in &outcome.manifest.stages.0 {
                        log::info!("{:<24} {:>9.3}s", s.stage, s.seconds);
                    }
                    println!("{}", outcome.output_dir.display());
                    if outcome.manifest.passed == Some(false) {
                        ExitCode::FAILURE
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Accept { quick, json } => {
            let report = acceptance::run(quick);
            for c in &report.criteria {
                println!("{}", c.line());
            }
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&report).expect("report serializes");
                if let Err(e) = std::fs::write(&path, text) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
