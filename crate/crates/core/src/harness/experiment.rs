//! Multi-run experiments, oracle calibration and their output files.
//!
//! Output layout under `output_dir`:
//!
//! ```text
//! config.resolved.toml          config with calibrated arms pinned
//! summary.csv                   one row per (run, strategy)
//! runs/run000_ucb1.csv          window log per (run, strategy)
//! runs/run000_ucb1.episodes.csv per-episode gains and certainty scores
//! calibration/calibration.csv   per-arm isolated-training statistics
//! calibration/run000_isolated.csv ...
//! ```

use std::path::Path;

use super::config::{ArmChoice, ExperimentConfig};
use super::logs::{self, SummaryRow, CALIBRATION_HEADER};
use super::run::{EpisodeRecord, RunState, WindowRecord};
use crate::bandit::{self, BanditState, PullRecord, Strategy, StrategyName};
use crate::error::Result;
use crate::rng;
use crate::stats;

pub const ISOLATED: &str = "isolated";

/// Everything one (run, strategy) pair produced.
#[derive(Debug, Clone)]
pub struct StrategyRun {
    pub windows: Vec<WindowRecord>,
    pub episodes: Vec<EpisodeRecord>,
    pub history: Vec<PullRecord<f64>>,
    pub recommended: Option<usize>,
    pub counts: Vec<u64>,
}

/// Runs the window loop for one strategy:
/// select → run window → normalize → composite → bandit update.
pub fn run_strategy(config: &ExperimentConfig, run_id: usize, name: &str, strategy: Strategy) -> Result<StrategyRun> {
    let mut state = RunState::new(config, run_id)?;
    let seed = rng::derive_seed(config.master_seed, &format!("bandit:{name}"), &[run_id as u64]);
    let mut bandit = BanditState::<f64>::new(strategy, state.arm_count(), seed)?;
    let mut windows = Vec::with_capacity(config.total_windows);
    let mut episodes = Vec::new();
    for w in 0..config.total_windows {
        let arm = bandit.select();
        let mut rec = state.run_window(arm, w, name, &mut episodes)?;
        state.score(&mut rec);
        bandit.update(arm, rec.composite_reward)?;
        windows.push(rec);
    }
    Ok(StrategyRun {
        windows,
        episodes,
        history: bandit.history().to_vec(),
        recommended: bandit.recommend().ok(),
        counts: bandit.counts().to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub best: usize,
    pub worst: usize,
    /// Mean episode return over all isolated-training episodes, per arm.
    pub mean_returns: Vec<f64>,
    /// Mean episode return over the final quarter of training, per arm.
    pub final_quarter_returns: Vec<f64>,
    pub windows: Vec<WindowRecord>,
    pub episodes: Vec<EpisodeRecord>,
}

impl Calibration {
    pub fn pin(&self, config: &mut ExperimentConfig) {
        config.oracle_arm = ArmChoice::Arm(self.best);
        config.worst_arm = ArmChoice::Arm(self.worst);
        config.arm_mean_returns = Some(self.mean_returns.clone());
    }
}

/// `(argmax, argmin)` with ties to the lowest index.
pub fn extremes(values: &[f64]) -> (usize, usize) {
    let mut best = 0;
    let mut worst = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
        if v < values[worst] {
            worst = i;
        }
    }
    (best, worst)
}

/// Trains every arm in isolation for `total_windows × window_episodes`
/// episodes in each of `n_runs` runs. Arms take turns window by window and
/// share only the run's reward normalizer, so the recorded composite rewards
/// are on a common scale while each arm's learning is unaffected by the
/// others.
pub fn calibrate(config: &ExperimentConfig) -> Result<Calibration> {
    config.validate()?;
    let k = config.arms.len();
    let per_arm = config.total_windows * config.window_episodes;
    let quarter = per_arm.div_ceil(4);
    let mut run_means = vec![Vec::with_capacity(config.n_runs); k];
    let mut run_final = vec![Vec::with_capacity(config.n_runs); k];
    let mut windows = Vec::new();
    let mut episodes = Vec::new();
    for run in 0..config.n_runs {
        let mut state = RunState::new(config, run)?;
        let first_episode = episodes.len();
        for w in 0..config.total_windows {
            for arm in 0..k {
                let mut rec = state.run_window(arm, w, ISOLATED, &mut episodes)?;
                state.score(&mut rec);
                windows.push(rec);
            }
        }
        for arm in 0..k {
            let returns: Vec<f64> =
                episodes[first_episode..].iter().filter(|e| e.arm == arm).map(|e| e.episode_return).collect();
            run_means[arm].push(stats::mean(&returns));
            run_final[arm].push(stats::mean(&returns[returns.len() - quarter..]));
        }
    }
    let mean_returns: Vec<f64> = run_means.iter().map(|v| stats::mean(v)).collect();
    let final_quarter_returns: Vec<f64> = run_final.iter().map(|v| stats::mean(v)).collect();
    let (best, worst) = extremes(&final_quarter_returns);
    Ok(Calibration { best, worst, mean_returns, final_quarter_returns, windows, episodes })
}

pub fn write_calibration(dir: &Path, config: &ExperimentConfig, cal: &Calibration) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..config.arms.len())
        .map(|a| {
            let role = match (a == cal.best, a == cal.worst) {
                (true, true) => "best;worst",
                (true, false) => "best",
                (false, true) => "worst",
                _ => "",
            };
            vec![
                a.to_string(),
                config.arms[a].label.clone(),
                logs::fmt_f64(cal.mean_returns[a]),
                logs::fmt_f64(cal.final_quarter_returns[a]),
                role.to_string(),
            ]
        })
        .collect();
    logs::write_table(&dir.join("calibration.csv"), &CALIBRATION_HEADER, &rows)?;
    for run in 0..config.n_runs {
        let stem = logs::run_file_stem(run, ISOLATED);
        let w: Vec<WindowRecord> = cal.windows.iter().filter(|r| r.run_id == run).cloned().collect();
        let e: Vec<EpisodeRecord> = cal.episodes.iter().filter(|r| r.run_id == run).cloned().collect();
        logs::write_windows(&dir.join(format!("{stem}.csv")), &w)?;
        logs::write_episodes(&dir.join(format!("{stem}.episodes.csv")), &e)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub calibration: Option<Calibration>,
    pub summary: Vec<SummaryRow>,
}

/// Calibrates if requested, then runs every strategy in every run and
/// writes all logs under `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let out = config.output_dir.clone();
    std::fs::create_dir_all(out.join("runs"))?;
    let mut resolved = config.clone();
    let mut calibration = None;
    if config.oracle_arm == ArmChoice::Calibrate || config.worst_arm == ArmChoice::Calibrate {
        let cal = calibrate(config)?;
        write_calibration(&out.join("calibration"), config, &cal)?;
        if config.oracle_arm == ArmChoice::Calibrate {
            resolved.oracle_arm = ArmChoice::Arm(cal.best);
        }
        if config.worst_arm == ArmChoice::Calibrate {
            resolved.worst_arm = ArmChoice::Arm(cal.worst);
        }
        if resolved.arm_mean_returns.is_none() {
            resolved.arm_mean_returns = Some(cal.mean_returns.clone());
        }
        calibration = Some(cal);
    }
    std::fs::write(out.join("config.resolved.toml"), resolved.to_toml_string())?;

    let arm = |c: ArmChoice| match c {
        ArmChoice::Arm(i) => Some(i),
        ArmChoice::Calibrate => None,
    };
    let (best, worst) = (arm(resolved.oracle_arm), arm(resolved.worst_arm));
    let strategies: Vec<(StrategyName, Strategy)> = resolved
        .strategies
        .iter()
        .map(|s| Ok((*s, s.bind(&resolved.bandit, best, worst)?)))
        .collect::<Result<_>>()?;

    let mut summary = Vec::with_capacity(resolved.n_runs * strategies.len());
    for run in 0..resolved.n_runs {
        for (name, strategy) in &strategies {
            let label = name.to_string();
            let result = run_strategy(&resolved, run, &label, *strategy)?;
            let stem = logs::run_file_stem(run, &label);
            logs::write_windows(&out.join("runs").join(format!("{stem}.csv")), &result.windows)?;
            logs::write_episodes(&out.join("runs").join(format!("{stem}.episodes.csv")), &result.episodes)?;
            summary.push(summarize(&resolved, run, &label, &result));
        }
    }
    logs::write_summary(&out.join("summary.csv"), &summary)?;
    Ok(ExperimentReport { config: resolved, calibration, summary })
}

fn summarize(config: &ExperimentConfig, run_id: usize, strategy: &str, r: &StrategyRun) -> SummaryRow {
    let cumulative_regret = match &config.arm_mean_returns {
        Some(means) => bandit::regret(&r.history, means),
        None => f64::NAN,
    };
    SummaryRow {
        run_id,
        strategy: strategy.to_string(),
        recommended_arm: r.recommended,
        recommended_label: r.recommended.map(|a| config.arms[a].label.clone()).unwrap_or_default(),
        windows: r.windows.len(),
        total_episodes: r.episodes.len(),
        cumulative_true_reward: r.episodes.iter().map(|e| e.episode_return).sum(),
        cumulative_composite_reward: r.windows.iter().map(|w| w.composite_reward).sum(),
        cumulative_regret,
    }
}
