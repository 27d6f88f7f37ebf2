//! Per-seed CSV logs.
//!
//! `log-seed<N>.csv` has the columns `seed, global_step, mean_return,
//! episode_returns, wall_clock_seconds`; `episode_returns` is semicolon
//! joined. `metrics-seed<N>.csv` holds the same rows without the wall-clock
//! column, so two runs of one configuration produce identical files. Floats
//! are written in shortest round-trip form.

use std::fs::File;
use std::path::{Path, PathBuf};

use super::eval::EvalRecord;
use crate::envs::MassChange;
use crate::{Error, Result};

pub const LOG_HEADER: [&str; 5] = ["seed", "global_step", "mean_return", "episode_returns", "wall_clock_seconds"];

pub fn log_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("log-seed{seed}.csv"))
}

pub fn metrics_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("metrics-seed{seed}.csv"))
}

pub fn randomization_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("randomization-seed{seed}.csv"))
}

pub fn checkpoint_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("checkpoint-seed{seed}.json"))
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn flush(writer: &mut csv::Writer<File>, path: &Path) -> Result<()> {
    writer.flush().map_err(|e| Error::io(path, e))
}

fn join_returns(returns: &[f64]) -> String {
    returns.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

/// Appends one row per evaluation to both per-seed logs. Each row is flushed
/// as soon as it is written.
pub struct SeedLog {
    seed: u64,
    log_path: PathBuf,
    metrics_path: PathBuf,
    log: csv::Writer<File>,
    metrics: csv::Writer<File>,
}

impl SeedLog {
    pub fn create(dir: &Path, seed: u64) -> Result<Self> {
        let log_path = log_path(dir, seed);
        let metrics_path = metrics_path(dir, seed);
        let mut log = create(&log_path)?;
        let mut metrics = create(&metrics_path)?;
        log.write_record(LOG_HEADER)?;
        metrics.write_record(&LOG_HEADER[..4])?;
        flush(&mut log, &log_path)?;
        flush(&mut metrics, &metrics_path)?;
        Ok(Self {
            seed,
            log_path,
            metrics_path,
            log,
            metrics,
        })
    }

    pub fn append(&mut self, record: &EvalRecord, wall_clock_seconds: f64) -> Result<()> {
        let row = [
            self.seed.to_string(),
            record.global_step.to_string(),
            record.mean_return.to_string(),
            join_returns(&record.episode_returns),
        ];
        self.metrics.write_record(&row)?;
        flush(&mut self.metrics, &self.metrics_path)?;
        self.log
            .write_record(row.iter().map(String::as_str).chain([wall_clock_seconds.to_string().as_str()]))?;
        flush(&mut self.log, &self.log_path)
    }
}

pub fn write_mass_changes(path: &Path, changes: &[MassChange]) -> Result<()> {
    let mut writer = create(path)?;
    writer.write_record(["global_step", "body", "scale"])?;
    for change in changes {
        writer.write_record([change.global_step.to_string(), change.body.clone(), change.scale.to_string()])?;
    }
    flush(&mut writer, path)
}

fn parse<T: std::str::FromStr>(text: &str, what: &str, path: &Path) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::contract(format!("{}: bad {what} {text:?}", path.display())))
}

/// Reads a log or metrics CSV back into `(seed, records)`.
pub fn read_records(path: &Path) -> Result<(u64, Vec<EvalRecord>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    if headers.len() < 4 || headers.iter().take(4).ne(LOG_HEADER[..4].iter().copied()) {
        return Err(Error::contract(format!(
            "{} does not start with the columns {:?}",
            path.display(),
            &LOG_HEADER[..4]
        )));
    }
    let mut seed = None;
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let row_seed: u64 = parse(&row[0], "seed", path)?;
        if *seed.get_or_insert(row_seed) != row_seed {
            return Err(Error::contract(format!("{} mixes several seeds", path.display())));
        }
        let returns = row[3]
            .split(';')
            .map(|v| parse(v, "episode return", path))
            .collect::<Result<Vec<f64>>>()?;
        records.push(EvalRecord {
            global_step: parse(&row[1], "global_step", path)?,
            mean_return: parse(&row[2], "mean_return", path)?,
            episode_returns: returns,
        });
    }
    let seed = seed.ok_or_else(|| Error::EmptyWindow(format!("{} holds no records", path.display())))?;
    Ok((seed, records))
}

/// Every `metrics-seed*.csv` in `dir`, in seed order.
pub fn read_run(dir: &Path) -> Result<Vec<(u64, Vec<EvalRecord>)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut runs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.starts_with("metrics-seed") && name.ends_with(".csv") {
            runs.push(read_records(&path)?);
        }
    }
    runs.sort_by_key(|(seed, _)| *seed);
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = SeedLog::create(dir.path(), 4).unwrap();
        let a = EvalRecord::new(5, vec![0.1, -1e-300, 2.0 / 3.0]).unwrap();
        let b = EvalRecord::new(10, vec![-123.456]).unwrap();
        log.append(&a, 1.5).unwrap();
        log.append(&b, 3.25).unwrap();
        let (seed, records) = read_records(&metrics_path(dir.path(), 4)).unwrap();
        assert_eq!(seed, 4);
        assert_eq!(records, vec![a.clone(), b]);
        let (_, from_log) = read_records(&log_path(dir.path(), 4)).unwrap();
        assert_eq!(from_log[0], a);
        let text = std::fs::read_to_string(log_path(dir.path(), 4)).unwrap();
        assert!(text.starts_with("seed,global_step,mean_return,episode_returns,wall_clock_seconds\n"));
    }
}
