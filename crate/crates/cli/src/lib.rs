//! Scenario runner: reads a configuration, runs one built-in scenario and
//! writes CSV tables plus `report.txt` into the output directory.

pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::Config;
pub use error::CliError;
use output::write_all;
use scenarios::Context;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub scenario: String,
    pub out_dir: PathBuf,
    pub report: String,
    pub passed: bool,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// One line per scenario: name and description.
pub fn list_scenarios() -> String {
    let width = scenarios::SCENARIOS.iter().map(|s| s.name.len()).max().unwrap_or(0);
    scenarios::SCENARIOS
        .iter()
        .map(|s| format!("{:width$}  {}\n", s.name, s.description))
        .collect()
}

pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let cfg = Config::load(config_path)?;
    run_config(&cfg, opts)
}

pub fn run_config(cfg: &Config, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let name = cfg.string("scenario")?;
    let scenario = scenarios::find(&name).ok_or_else(|| {
        let names: Vec<&str> = scenarios::SCENARIOS.iter().map(|s| s.name).collect();
        cfg.invalid("scenario", format!("unknown scenario `{name}`; valid names: {}", names.join(", ")))
    })?;
    let config_seed: u64 = cfg.get("seed")?;
    let seed = opts.seed.unwrap_or(config_seed);
    let tolerance_scale = opts.tolerance_scale.unwrap_or(1.0);
    if !(tolerance_scale.is_finite() && tolerance_scale > 0.0) {
        return Err(CliError::Config {
            origin: "--tolerance-scale".into(),
            line: None,
            message: "must be a positive number".into(),
        });
    }
    let ctx = Context { seed, tolerance_scale };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    log::info!("running {} with seed {}", scenario.name, ctx.seed);
    let outcome = (scenario.run)(cfg, &ctx, &mut rng)?;
    let out_dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("out").join(scenario.name));
    let report = outcome.report.render(scenario.name, ctx.seed);
    write_all(&out_dir, &outcome.tables, &report)?;
    Ok(RunSummary {
        scenario: scenario.name.to_string(),
        out_dir,
        report,
        passed: outcome.report.passed(),
    })
}
