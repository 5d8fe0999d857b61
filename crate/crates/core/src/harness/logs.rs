//! CSV schemas. Column names and order are fixed; floats are written in
//! shortest round-trip form and undefined values as empty fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::run::{EpisodeRecord, WindowRecord};
use crate::error::{Error, Result};

pub const WINDOW_HEADER: [&str; 11] = [
    "run_id",
    "window_index",
    "strategy",
    "chosen_arm",
    "arm_label",
    "episode_returns",
    "mean_return",
    "normalized_return",
    "mean_info_gain",
    "certainty_ma",
    "composite_reward",
];

pub const EPISODE_HEADER: [&str; 8] =
    ["run_id", "window_index", "arm", "episode", "steps", "episode_return", "info_gain", "certainty"];

pub const SUMMARY_HEADER: [&str; 9] = [
    "run_id",
    "strategy",
    "recommended_arm",
    "recommended_label",
    "windows",
    "total_episodes",
    "cumulative_true_reward",
    "cumulative_composite_reward",
    "cumulative_regret",
];

pub const CALIBRATION_HEADER: [&str; 5] = ["arm", "arm_label", "mean_return", "final_quarter_return", "role"];

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn parse_f64(s: &str) -> f64 {
    if s.is_empty() {
        f64::NAN
    } else {
        s.parse().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub run_id: usize,
    pub strategy: String,
    pub recommended_arm: Option<usize>,
    pub recommended_label: String,
    pub windows: usize,
    pub total_episodes: usize,
    pub cumulative_true_reward: f64,
    pub cumulative_composite_reward: f64,
    pub cumulative_regret: f64,
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(File::create(path)?)))
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))?.flush()?;
    Ok(())
}

pub fn write_windows(path: &Path, rows: &[WindowRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(WINDOW_HEADER)?;
    for r in rows {
        let returns: Vec<String> = r.episode_returns.iter().map(|v| fmt_f64(*v)).collect();
        w.write_record([
            r.run_id.to_string(),
            r.window_index.to_string(),
            r.strategy.clone(),
            r.chosen_arm.to_string(),
            r.arm_label.clone(),
            returns.join(";"),
            fmt_f64(r.mean_return),
            fmt_f64(r.normalized_return),
            fmt_f64(r.mean_info_gain),
            fmt_f64(r.certainty_ma),
            fmt_f64(r.composite_reward),
        ])?;
    }
    finish(w)
}

pub fn write_episodes(path: &Path, rows: &[EpisodeRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(EPISODE_HEADER)?;
    for r in rows {
        w.write_record([
            r.run_id.to_string(),
            r.window_index.to_string(),
            r.arm.to_string(),
            r.episode.to_string(),
            r.steps.to_string(),
            fmt_f64(r.episode_return),
            fmt_f64(r.info_gain),
            fmt_f64(r.certainty),
        ])?;
    }
    finish(w)
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.run_id.to_string(),
            r.strategy.clone(),
            r.recommended_arm.map(|a| a.to_string()).unwrap_or_default(),
            r.recommended_label.clone(),
            r.windows.to_string(),
            r.total_episodes.to_string(),
            fmt_f64(r.cumulative_true_reward),
            fmt_f64(r.cumulative_composite_reward),
            fmt_f64(r.cumulative_regret),
        ])?;
    }
    finish(w)
}

/// Writes rows under a fixed header; used for the aggregate tables.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    finish(w)
}

fn open_checked(path: &Path, header: &[&str]) -> Result<csv::Reader<File>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let got: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if got != header {
        return Err(Error::MalformedLog { path: path.to_path_buf(), msg: format!("unexpected header {got:?}") });
    }
    Ok(rdr)
}

fn bad_field(path: &Path, field: &str) -> Error {
    Error::MalformedLog { path: path.to_path_buf(), msg: format!("bad field `{field}`") }
}

pub fn read_windows(path: &Path) -> Result<Vec<WindowRecord>> {
    let mut rdr = open_checked(path, &WINDOW_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let int = |i: usize| rec[i].parse::<usize>().map_err(|_| bad_field(path, &rec[i]));
        let returns = if rec[5].is_empty() { Vec::new() } else { rec[5].split(';').map(parse_f64).collect() };
        out.push(WindowRecord {
            run_id: int(0)?,
            window_index: int(1)?,
            strategy: rec[2].to_string(),
            chosen_arm: int(3)?,
            arm_label: rec[4].to_string(),
            episode_returns: returns,
            mean_return: parse_f64(&rec[6]),
            normalized_return: parse_f64(&rec[7]),
            mean_info_gain: parse_f64(&rec[8]),
            certainty_ma: parse_f64(&rec[9]),
            composite_reward: parse_f64(&rec[10]),
        });
    }
    Ok(out)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut rdr = open_checked(path, &SUMMARY_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let int = |i: usize| rec[i].parse::<usize>().map_err(|_| bad_field(path, &rec[i]));
        out.push(SummaryRow {
            run_id: int(0)?,
            strategy: rec[1].to_string(),
            recommended_arm: rec[2].parse().ok(),
            recommended_label: rec[3].to_string(),
            windows: int(4)?,
            total_episodes: int(5)?,
            cumulative_true_reward: parse_f64(&rec[6]),
            cumulative_composite_reward: parse_f64(&rec[7]),
            cumulative_regret: parse_f64(&rec[8]),
        });
    }
    Ok(out)
}

/// Window logs (`run*.csv`) in `dir`, sorted by file name; episode logs
/// are excluded.
pub fn window_log_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if dir.is_dir() {
        for entry in std::fs::read_dir(dir)? {
            let p = entry?.path();
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            if name.starts_with("run") && name.ends_with(".csv") && !name.ends_with(".episodes.csv") {
                files.push(p);
            }
        }
    }
    files.sort();
    Ok(files)
}

pub fn run_file_stem(run_id: usize, strategy: &str) -> String {
    format!("run{run_id:03}_{strategy}")
}
