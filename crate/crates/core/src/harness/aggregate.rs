//! Cross-run summary tables written to `<output_dir>/aggregate/`.
//!
//! | file                     | columns |
//! |--------------------------|---------|
//! | `frequency.csv`          | strategy, arm, arm_label, runs, recommended, frequency |
//! | `curves.csv`             | strategy, window_index, runs, mean_cumulative_true_reward, stderr_cumulative_true_reward, scaled_cumulative_true_reward, mean_cumulative_composite_reward |
//! | `correlation.csv`        | source, arm, arm_label, n_windows, pearson_r |
//! | `correlation_series.csv` | source, arm, arm_label, pull_index, runs, mean_true_reward, mean_certainty, smoothed_true_reward, smoothed_certainty |
//!
//! Correlation series are indexed by the arm's own pull count: the i-th
//! point averages, over runs, the i-th window in which that arm was chosen.
//! `source` is the strategy name, or `isolated` for calibration logs.

use std::collections::BTreeMap;
use std::path::Path;

use super::config::ExperimentConfig;
use super::logs::{self, fmt_f64};
use super::run::WindowRecord;
use crate::error::{Error, Result};
use crate::stats;

pub const FREQUENCY_HEADER: [&str; 6] = ["strategy", "arm", "arm_label", "runs", "recommended", "frequency"];
pub const CURVES_HEADER: [&str; 7] = [
    "strategy",
    "window_index",
    "runs",
    "mean_cumulative_true_reward",
    "stderr_cumulative_true_reward",
    "scaled_cumulative_true_reward",
    "mean_cumulative_composite_reward",
];
pub const CORRELATION_HEADER: [&str; 5] = ["source", "arm", "arm_label", "n_windows", "pearson_r"];
pub const SERIES_HEADER: [&str; 9] = [
    "source",
    "arm",
    "arm_label",
    "pull_index",
    "runs",
    "mean_true_reward",
    "mean_certainty",
    "smoothed_true_reward",
    "smoothed_certainty",
];

pub const SMOOTHING_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub strategy: String,
    pub arm: usize,
    pub arm_label: String,
    pub runs: usize,
    pub recommended: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub strategy: String,
    pub window_index: usize,
    pub runs: usize,
    pub mean: f64,
    pub stderr: f64,
    pub scaled: f64,
    pub mean_composite: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub source: String,
    pub arm: usize,
    pub arm_label: String,
    pub runs: Vec<usize>,
    pub true_reward: Vec<f64>,
    pub certainty: Vec<f64>,
    pub smoothed_true_reward: Vec<f64>,
    pub smoothed_certainty: Vec<f64>,
    pub pearson_r: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Aggregate {
    pub frequency: Vec<FrequencyRow>,
    pub curves: Vec<CurvePoint>,
    pub correlation: Vec<CorrelationSeries>,
}

/// Arm labels from the resolved config if present, else from the logs.
fn arm_labels(output_dir: &Path, windows: &[WindowRecord]) -> Vec<String> {
    if let Ok(text) = std::fs::read_to_string(output_dir.join("config.resolved.toml")) {
        if let Ok(cfg) = ExperimentConfig::from_toml_str(&text) {
            return cfg.arm_labels();
        }
    }
    let mut labels: BTreeMap<usize, String> = BTreeMap::new();
    for w in windows {
        labels.entry(w.chosen_arm).or_insert_with(|| w.arm_label.clone());
    }
    let n = labels.keys().next_back().map_or(0, |k| k + 1);
    (0..n).map(|a| labels.get(&a).cloned().unwrap_or_default()).collect()
}

pub fn frequency_table(summary: &[logs::SummaryRow], labels: &[String]) -> Vec<FrequencyRow> {
    let mut by_strategy: Vec<(String, Vec<Option<usize>>)> = Vec::new();
    for row in summary {
        match by_strategy.iter_mut().find(|(s, _)| *s == row.strategy) {
            Some((_, recs)) => recs.push(row.recommended_arm),
            None => by_strategy.push((row.strategy.clone(), vec![row.recommended_arm])),
        }
    }
    let mut out = Vec::new();
    for (strategy, recs) in by_strategy {
        for (arm, label) in labels.iter().enumerate() {
            let hits = recs.iter().filter(|r| **r == Some(arm)).count();
            out.push(FrequencyRow {
                strategy: strategy.clone(),
                arm,
                arm_label: label.clone(),
                runs: recs.len(),
                recommended: hits,
                frequency: hits as f64 / recs.len() as f64,
            });
        }
    }
    out
}

/// Groups window records by strategy (first-seen order), then by run.
fn group(windows: &[WindowRecord]) -> Vec<(String, BTreeMap<usize, Vec<&WindowRecord>>)> {
    let mut out: Vec<(String, BTreeMap<usize, Vec<&WindowRecord>>)> = Vec::new();
    for w in windows {
        let idx = match out.iter().position(|(s, _)| *s == w.strategy) {
            Some(i) => i,
            None => {
                out.push((w.strategy.clone(), BTreeMap::new()));
                out.len() - 1
            }
        };
        out[idx].1.entry(w.run_id).or_default().push(w);
    }
    for (_, runs) in &mut out {
        for ws in runs.values_mut() {
            ws.sort_by_key(|w| w.window_index);
        }
    }
    out
}

/// Cumulative true reward (sum of episode returns) per window, averaged over
/// runs. `scaled` maps the range of all strategies' mean curves onto [0, 1].
pub fn curve_table(windows: &[WindowRecord]) -> Vec<CurvePoint> {
    let mut out = Vec::new();
    for (strategy, runs) in group(windows) {
        let mut cum: Vec<Vec<f64>> = Vec::new();
        let mut cum_comp: Vec<Vec<f64>> = Vec::new();
        for ws in runs.values() {
            let (mut t, mut c) = (0.0, 0.0);
            for (i, w) in ws.iter().enumerate() {
                t += w.episode_returns.iter().sum::<f64>();
                c += w.composite_reward;
                if cum.len() <= i {
                    cum.push(Vec::new());
                    cum_comp.push(Vec::new());
                }
                cum[i].push(t);
                cum_comp[i].push(c);
            }
        }
        for (i, (vals, comps)) in cum.iter().zip(&cum_comp).enumerate() {
            out.push(CurvePoint {
                strategy: strategy.clone(),
                window_index: i,
                runs: vals.len(),
                mean: stats::mean(vals),
                stderr: stats::std_err(vals),
                scaled: f64::NAN,
                mean_composite: stats::mean(comps),
            });
        }
    }
    let lo = out.iter().map(|p| p.mean).fold(f64::INFINITY, f64::min);
    let hi = out.iter().map(|p| p.mean).fold(f64::NEG_INFINITY, f64::max);
    for p in &mut out {
        p.scaled = if hi > lo { (p.mean - lo) / (hi - lo) } else { 0.0 };
    }
    out
}

/// Per (source, arm) true-reward and certainty series over the arm-local
/// pull index, averaged over runs and smoothed with a trailing window.
pub fn correlation_table(windows: &[WindowRecord], labels: &[String], smoothing: usize) -> Vec<CorrelationSeries> {
    let mut out = Vec::new();
    for (source, runs) in group(windows) {
        for (arm, label) in labels.iter().enumerate() {
            let mut reward: Vec<Vec<f64>> = Vec::new();
            let mut cert: Vec<Vec<f64>> = Vec::new();
            for ws in runs.values() {
                for (i, w) in ws.iter().filter(|w| w.chosen_arm == arm).enumerate() {
                    if reward.len() <= i {
                        reward.push(Vec::new());
                        cert.push(Vec::new());
                    }
                    reward[i].push(w.mean_return);
                    cert[i].push(w.certainty_ma);
                }
            }
            if reward.is_empty() {
                continue;
            }
            let true_reward: Vec<f64> = reward.iter().map(|v| stats::mean(v)).collect();
            let certainty: Vec<f64> = cert.iter().map(|v| stats::mean(v)).collect();
            let smoothed_true_reward = stats::smooth(&true_reward, smoothing);
            let smoothed_certainty = stats::smooth(&certainty, smoothing);
            out.push(CorrelationSeries {
                source: source.clone(),
                arm,
                arm_label: label.clone(),
                runs: reward.iter().map(Vec::len).collect(),
                pearson_r: stats::pearson(&smoothed_true_reward, &smoothed_certainty),
                true_reward,
                certainty,
                smoothed_true_reward,
                smoothed_certainty,
            });
        }
    }
    out
}

fn read_dir_windows(dir: &Path) -> Result<Vec<WindowRecord>> {
    let mut all = Vec::new();
    for f in logs::window_log_files(dir)? {
        all.extend(logs::read_windows(&f)?);
    }
    Ok(all)
}

/// Builds the tables from the logs under `output_dir` and writes them to
/// `output_dir/aggregate/`.
pub fn aggregate(output_dir: &Path) -> Result<Aggregate> {
    let summary_path = output_dir.join("summary.csv");
    if !summary_path.is_file() {
        return Err(Error::MissingLogs(summary_path));
    }
    let runs = read_dir_windows(&output_dir.join("runs"))?;
    if runs.is_empty() {
        return Err(Error::MissingLogs(output_dir.join("runs")));
    }
    let summary = logs::read_summary(&summary_path)?;
    let calibration = read_dir_windows(&output_dir.join("calibration"))?;
    let labels = arm_labels(output_dir, &runs);

    let mut windows = calibration;
    windows.extend(runs.iter().cloned());
    let agg = Aggregate {
        frequency: frequency_table(&summary, &labels),
        curves: curve_table(&runs),
        correlation: correlation_table(&windows, &labels, SMOOTHING_WINDOW),
    };
    write(&output_dir.join("aggregate"), &agg)?;
    Ok(agg)
}

pub fn write(dir: &Path, agg: &Aggregate) -> Result<()> {
    let freq: Vec<Vec<String>> = agg
        .frequency
        .iter()
        .map(|r| {
            vec![
                r.strategy.clone(),
                r.arm.to_string(),
                r.arm_label.clone(),
                r.runs.to_string(),
                r.recommended.to_string(),
                fmt_f64(r.frequency),
            ]
        })
        .collect();
    logs::write_table(&dir.join("frequency.csv"), &FREQUENCY_HEADER, &freq)?;

    let curves: Vec<Vec<String>> = agg
        .curves
        .iter()
        .map(|p| {
            vec![
                p.strategy.clone(),
                p.window_index.to_string(),
                p.runs.to_string(),
                fmt_f64(p.mean),
                fmt_f64(p.stderr),
                fmt_f64(p.scaled),
                fmt_f64(p.mean_composite),
            ]
        })
        .collect();
    logs::write_table(&dir.join("curves.csv"), &CURVES_HEADER, &curves)?;

    let mut corr = Vec::new();
    let mut series = Vec::new();
    for c in &agg.correlation {
        corr.push(vec![
            c.source.clone(),
            c.arm.to_string(),
            c.arm_label.clone(),
            c.true_reward.len().to_string(),
            c.pearson_r.map(fmt_f64).unwrap_or_default(),
        ]);
        for i in 0..c.true_reward.len() {
            series.push(vec![
                c.source.clone(),
                c.arm.to_string(),
                c.arm_label.clone(),
                i.to_string(),
                c.runs[i].to_string(),
                fmt_f64(c.true_reward[i]),
                fmt_f64(c.certainty[i]),
                fmt_f64(c.smoothed_true_reward[i]),
                fmt_f64(c.smoothed_certainty[i]),
            ]);
        }
    }
    logs::write_table(&dir.join("correlation.csv"), &CORRELATION_HEADER, &corr)?;
    logs::write_table(&dir.join("correlation_series.csv"), &SERIES_HEADER, &series)?;
    Ok(())
}
