//! Cartesian parameter sweeps over a base configuration.
//!
//! A sweep file names a base config and a set of model-key axes; every
//! combination becomes a derived config with its own content-hashed run
//! directory under the sweep directory. Points run on a small worker
//! pool, failures are recorded per row rather than aborting, and the
//! aggregate table is written once, in point order, so reruns are
//! byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::grid::io::fmt_float;
use crate::solver::MonitorOutcome;

use super::config::{content_hash, ConfigError, RawConfig, RunConfig};
use super::simulate::run_simulation;
use super::{write_atomic, HarnessError, EXIT_CONFIG, EXIT_OK};

const MODEL_AXIS_KEYS: &[&str] = &[
    "family", "n", "m1", "m2", "chi", "a", "b", "c", "alpha", "beta", "delta", "K", "l", "tau",
];

pub struct SweepSpec {
    /// Parsed base configuration, before axis overrides.
    base: RawConfig,
    base_dir: PathBuf,
    /// Axis order follows the sweep file; values are deduplicated.
    axes: Vec<(String, Vec<String>)>,
    jobs: usize,
    /// Canonical text of the sweep file itself; keys the sweep directory.
    canonical: String,
}

impl SweepSpec {
    /// Loads a sweep file. Duplicate axis values are dropped (first
    /// occurrence wins) with a warning on stderr unless `quiet`.
    pub fn load(path: &Path, cli_jobs: Option<usize>, quiet: bool) -> Result<Self, ConfigError> {
        let raw = RawConfig::load(path)?;
        let sweep_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();

        let base_rel = raw.get("sweep", "base").ok_or(ConfigError::Missing {
            section: "sweep".into(),
            key: "base".into(),
        })?;
        let base_path = {
            let p = PathBuf::from(base_rel);
            if p.is_absolute() {
                p
            } else {
                sweep_dir.join(p)
            }
        };
        let base = RawConfig::load(&base_path)?;
        let base_dir = base_path.parent().unwrap_or(Path::new(".")).to_path_buf();

        let file_jobs = raw
            .get("sweep", "jobs")
            .map(|v| {
                v.parse::<usize>().map_err(|_| ConfigError::Bad {
                    section: "sweep".into(),
                    key: "jobs".into(),
                    detail: format!("expected a worker count, got '{v}'"),
                })
            })
            .transpose()?;
        let jobs = cli_jobs
            .or(file_jobs)
            .unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            })
            .max(1);

        let mut axes = Vec::new();
        for (section, entries) in &raw.entries() {
            match section.as_str() {
                "sweep" => {
                    for (key, line) in entries {
                        if key.as_str() != "base" && key.as_str() != "jobs" {
                            return Err(ConfigError::UnknownKey {
                                section: "sweep".into(),
                                key: key.clone(),
                                line: *line,
                            });
                        }
                    }
                }
                "axes" => {
                    for (key, line) in entries {
                        if !MODEL_AXIS_KEYS.contains(&key.as_str()) {
                            return Err(ConfigError::UnknownKey {
                                section: "axes".into(),
                                key: key.clone(),
                                line: *line,
                            });
                        }
                        let list = raw.get("axes", key).expect("listed key");
                        let mut values: Vec<String> = Vec::new();
                        for part in list.split(',') {
                            let value = part.trim().to_string();
                            if value.is_empty() {
                                return Err(ConfigError::Bad {
                                    section: "axes".into(),
                                    key: key.clone(),
                                    detail: "empty value in list".into(),
                                });
                            }
                            if values.contains(&value) {
                                if !quiet {
                                    eprintln!(
                                        "sweep: axis '{key}' repeats value '{value}', \
                                         keeping the first occurrence"
                                    );
                                }
                                continue;
                            }
                            values.push(value);
                        }
                        axes.push((key.clone(), values));
                    }
                }
                other => {
                    return Err(ConfigError::UnknownSection {
                        section: other.to_string(),
                        line: line_of(entries),
                    });
                }
            }
        }
        if axes.is_empty() {
            return Err(ConfigError::Missing {
                section: "axes".into(),
                key: "(at least one model key)".into(),
            });
        }

        Ok(SweepSpec {
            base,
            base_dir,
            axes,
            jobs,
            canonical: raw.canonical_text(),
        })
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    /// The axis assignments of point `idx`, in odometer order with the
    /// last axis fastest.
    fn point(&self, idx: usize) -> Vec<(&str, &str)> {
        let mut rem = idx;
        let mut out = vec![("", ""); self.axes.len()];
        for (slot, (key, values)) in self.axes.iter().enumerate().rev() {
            out[slot] = (key.as_str(), values[rem % values.len()].as_str());
            rem /= values.len();
        }
        out
    }

    fn derive(&self, idx: usize) -> Result<RunConfig, ConfigError> {
        let mut raw = self.base.clone();
        for (key, value) in self.point(idx) {
            raw.set("model", key, value);
        }
        RunConfig::from_raw(&raw, &self.base_dir)
    }
}

fn line_of(entries: &[(String, usize)]) -> usize {
    entries.first().map(|(_, line)| *line).unwrap_or(0)
}

struct PointRow {
    values: Vec<String>,
    classification: String,
    max_linf_u: String,
    final_mass: String,
    mass_bound: String,
    antiderivative: String,
    error: Option<String>,
}

fn outcome_cell(record: &crate::solver::RunRecord, name: &str) -> String {
    match record.monitors.iter().find(|m| m.name == name) {
        Some(m) => match &m.outcome {
            MonitorOutcome::Passed { .. } => "passed".into(),
            MonitorOutcome::Failed { .. } => "failed".into(),
            MonitorOutcome::NotApplicable { .. } => "n/a".into(),
        },
        None => "n/a".into(),
    }
}

fn run_point(spec: &SweepSpec, idx: usize, sweep_dir: &Path) -> PointRow {
    let values: Vec<String> = spec
        .point(idx)
        .iter()
        .map(|(_, v)| v.to_string())
        .collect();
    let outcome = spec
        .derive(idx)
        .map_err(HarnessError::from)
        .and_then(|cfg| run_simulation(&cfg, sweep_dir));
    match outcome {
        Ok(sim) => {
            let last = sim.record.series.last();
            PointRow {
                values,
                classification: sim.classification.to_string(),
                max_linf_u: fmt_float(sim.record.max_linf_u()),
                final_mass: last.map(|r| fmt_float(r.mass)).unwrap_or_default(),
                mass_bound: outcome_cell(&sim.record, "mass-bound"),
                antiderivative: outcome_cell(&sim.record, "antiderivative-sandwich"),
                error: None,
            }
        }
        Err(e) => PointRow {
            values,
            classification: "error".into(),
            max_linf_u: String::new(),
            final_mass: String::new(),
            mass_bound: "n/a".into(),
            antiderivative: "n/a".into(),
            error: Some(e.to_string()),
        },
    }
}

/// Runs every point of the sweep. Returns `EXIT_OK` when all points
/// simulated (whatever their classification) and `EXIT_CONFIG` when any
/// point failed outright.
pub fn run_sweep(spec: &SweepSpec, out_parent: &Path, quiet: bool) -> Result<i32, HarnessError> {
    let points = spec.point_count();
    if !quiet {
        let shape: Vec<String> = spec
            .axes
            .iter()
            .map(|(key, values)| format!("{key}:{}", values.len()))
            .collect();
        eprintln!("sweep: {points} points ({})", shape.join(" x "));
    }

    let sweep_dir = out_parent.join(format!("sweep-{}", content_hash(&spec.canonical)));
    std::fs::create_dir_all(&sweep_dir).map_err(|e| HarnessError::io(&sweep_dir, e))?;

    let cursor = AtomicUsize::new(0);
    let rows: Mutex<Vec<(usize, PointRow)>> = Mutex::new(Vec::with_capacity(points));
    let workers = spec.jobs.min(points.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = cursor.fetch_add(1, Ordering::Relaxed);
                if idx >= points {
                    break;
                }
                let row = run_point(spec, idx, &sweep_dir);
                rows.lock().expect("rows lock").push((idx, row));
            });
        }
    });

    let mut rows = rows.into_inner().expect("rows lock");
    rows.sort_by_key(|(idx, _)| *idx);

    let mut csv = String::new();
    for (key, _) in &spec.axes {
        let _ = write!(csv, "{key},");
    }
    csv.push_str("classification,max_linf_u,final_mass,mass_bound,antiderivative\n");
    let mut failed = 0usize;
    for (idx, row) in &rows {
        for value in &row.values {
            let _ = write!(csv, "{value},");
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.classification, row.max_linf_u, row.final_mass, row.mass_bound, row.antiderivative
        );
        if let Some(error) = &row.error {
            failed += 1;
            if !quiet {
                eprintln!("sweep: point {idx} failed: {error}");
            }
        }
    }

    write_atomic(&sweep_dir.join("aggregate.csv"), csv.as_bytes())?;
    write_atomic(&sweep_dir.join("sweep.ini"), spec.canonical.as_bytes())?;

    Ok(if failed == 0 { EXIT_OK } else { EXIT_CONFIG })
}
