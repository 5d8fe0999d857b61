use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use infogain_bandit::harness::{self, ExperimentConfig};
use infogain_bandit::Result;

#[derive(Parser)]
#[command(version, about = "Bandit selection over RL agents with an information-gain surrogate reward")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every arm in isolation and report the best and worst arms.
    Calibrate(Common),
    /// Run all strategies for all runs and write logs.
    Run(Common),
    /// Build frequency, curve and correlation tables from existing logs.
    Aggregate {
        /// Output directory of a previous `run`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Quick correctness checks.
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    /// Comma-separated, e.g. `ucb1,uniform,best,fixed:2`.
    #[arg(long)]
    strategies: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        if let Some(n) = self.runs {
            cfg.n_runs = n;
        }
        if let Some(list) = &self.strategies {
            cfg.strategies = ExperimentConfig::parse_strategies(list)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Calibrate(common) => {
            let cfg = common.resolve()?;
            let cal = harness::calibrate(&cfg)?;
            let dir = cfg.output_dir.join("calibration");
            harness::experiment::write_calibration(&dir, &cfg, &cal)?;
            for (a, arm) in cfg.arms.iter().enumerate() {
                println!(
                    "{a} {:<12} mean {:>10.4} final quarter {:>10.4}",
                    arm.label, cal.mean_returns[a], cal.final_quarter_returns[a]
                );
            }
            println!("best {} worst {}", cal.best, cal.worst);
            let mut pinned = cfg.clone();
            cal.pin(&mut pinned);
            std::fs::write(dir.join("config.pinned.toml"), pinned.to_toml_string())?;
            println!("wrote {}", dir.display());
        }
        Command::Run(common) => {
            let cfg = common.resolve()?;
            let report = harness::run_experiment(&cfg)?;
            println!("oracle {} worst {}", report.config.oracle_arm, report.config.worst_arm);
            println!("wrote {} summary rows to {}", report.summary.len(), cfg.output_dir.display());
        }
        Command::Aggregate { out } => {
            let agg = harness::aggregate(&out)?;
            for c in &agg.correlation {
                let r = c.pearson_r.map_or("undefined".to_string(), |r| format!("{r:.3}"));
                println!("{} {} r = {r}", c.source, c.arm_label);
            }
            println!("wrote {}", out.join("aggregate").display());
        }
        Command::Selftest { seed } => {
            let checks = harness::selftest::run_all(seed)?;
            let mut ok = true;
            for c in &checks {
                println!("{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    }
    Ok(ExitCode::SUCCESS)
}
