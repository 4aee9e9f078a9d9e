use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lplab_cli::{list_scenarios, run, RunOptions};

#[derive(Parser)]
#[command(name = "lplab", version, about = "Run Lax-Phillips evolution scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a configuration file.
    Run {
        config: PathBuf,
        /// Output directory (default: out/<scenario>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the `seed` key of the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplies the documented tolerances.
        #[arg(long)]
        tolerance_scale: Option<f64>,
    },
    /// List built-in scenarios.
    List,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::List => {
            print!("{}", list_scenarios());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            out,
            seed,
            tolerance_scale,
        } => {
            let opts = RunOptions {
                out,
                seed,
                tolerance_scale,
            };
            match run(&config, &opts) {
                Ok(summary) => {
                    print!("{}", summary.report);
                    println!("wrote {}", summary.out_dir.display());
                    ExitCode::from(summary.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
