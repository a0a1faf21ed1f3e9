//! Runs one configuration to completion and lays down its run directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::grid::io::{fmt_float, write_field_binary, write_field_csv};
use crate::grid::{integrate, Field};
use crate::regimes::find_k_star;
use crate::solver::{
    classify_run, elliptic_solve_v, run, MonitorOutcome, RunClassification, RunOptions, RunRecord,
    State,
};

use super::config::{content_hash, RunConfig};
use super::{write_atomic, HarnessError, EXIT_BLOWUP, EXIT_INCONCLUSIVE, EXIT_OK};

pub struct SimulationOutput {
    pub run_dir: PathBuf,
    pub classification: RunClassification,
    pub record: RunRecord,
    pub exit_code: i32,
}

/// The norm index the series tracks: the configured list wins, then the
/// smallest integer k admitted by the exponent table, then 2.
fn series_k(cfg: &RunConfig) -> f64 {
    if let Some(k) = cfg.outputs.k_norms.first() {
        return *k;
    }
    find_k_star(&cfg.regime, 64).map(f64::from).unwrap_or(2.0)
}

fn render_series_csv(record: &RunRecord) -> String {
    let mut out = String::from("t,mass,linf_u,linf_v,lk_u,y,min_u,min_v\n");
    for row in &record.series {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_float(row.t),
            fmt_float(row.mass),
            fmt_float(row.linf_u),
            fmt_float(row.linf_v),
            fmt_float(row.lk_u),
            fmt_float(row.y),
            fmt_float(row.min_u),
            fmt_float(row.min_v),
        );
    }
    out
}

fn render_summary(
    cfg: &RunConfig,
    record: &RunRecord,
    classification: RunClassification,
    k: f64,
) -> Result<String, HarnessError> {
    let mut out = String::new();
    let _ = writeln!(out, "termination: {:?}", record.termination);
    let _ = writeln!(out, "classification: {classification}");
    let _ = writeln!(out, "steps: {}", record.steps);
    let _ = writeln!(out, "final time: {}", fmt_float(record.final_state.t));
    let _ = writeln!(out, "series norm index k: {}", fmt_float(k));
    let _ = writeln!(out, "max linf(u): {}", fmt_float(record.max_linf_u()));
    if let Some(last) = record.series.last() {
        let _ = writeln!(out, "final mass: {}", fmt_float(last.mass));
        let _ = writeln!(out, "final linf(u): {}", fmt_float(last.linf_u));
        let _ = writeln!(out, "final linf(v): {}", fmt_float(last.linf_v));
    }
    for k in &cfg.outputs.k_norms {
        let lk = integrate(&record.final_state.u, *k)
            .map_err(crate::solver::SolverError::from)?
            .powf(1.0 / k);
        let _ = writeln!(out, "final L{}(u): {}", k, fmt_float(lk));
    }
    for monitor in &record.monitors {
        match &monitor.outcome {
            MonitorOutcome::Passed { worst_margin } => {
                let _ = writeln!(
                    out,
                    "monitor {}: passed (worst margin {})",
                    monitor.name,
                    fmt_float(*worst_margin)
                );
            }
            MonitorOutcome::Failed { worst_margin } => {
                let _ = writeln!(
                    out,
                    "monitor {}: FAILED (worst margin {})",
                    monitor.name,
                    fmt_float(*worst_margin)
                );
            }
            MonitorOutcome::NotApplicable { reason } => {
                let _ = writeln!(out, "monitor {}: not applicable ({reason})", monitor.name);
            }
        }
    }
    Ok(out)
}

fn field_csv_bytes(f: &Field) -> Vec<u8> {
    let mut buf = Vec::new();
    write_field_csv(f, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

fn field_binary_bytes(f: &Field) -> Vec<u8> {
    let mut buf = Vec::new();
    write_field_binary(f, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

/// Simulates `cfg`, writes the run directory under `out_parent`, and maps
/// the classification to the exit code.
pub fn run_simulation(
    cfg: &RunConfig,
    out_parent: &Path,
) -> Result<SimulationOutput, HarnessError> {
    cfg.require_admissible()?;

    let u0 = cfg.initial_u.realize(cfg.grid, &cfg.base_dir)?;
    let v0 = match &cfg.initial_v {
        Some(data) => data.realize(cfg.grid, &cfg.base_dir)?,
        // default: the signal the elliptic balance would assign to u0
        None => elliptic_solve_v(&u0, &cfg.model)?,
    };
    let control = cfg.control.resolve(u0.max_abs());
    let k = series_k(cfg);
    let opts = RunOptions {
        sample_interval: cfg.outputs.cadence,
        series_k: k,
        fm2_k: Some(k),
    };

    let record = run(State { u: u0, v: v0, t: 0.0 }, &cfg.model, &control, &opts)?;
    let classification = classify_run(&record, &control);

    let run_dir = out_parent.join(format!("run-{}", content_hash(&cfg.canonical)));
    write_atomic(&run_dir.join("config.ini"), cfg.canonical.as_bytes())?;
    write_atomic(
        &run_dir.join("series.csv"),
        render_series_csv(&record).as_bytes(),
    )?;
    write_atomic(
        &run_dir.join("summary.txt"),
        render_summary(cfg, &record, classification, k)?.as_bytes(),
    )?;
    write_atomic(
        &run_dir.join("final_u.csv"),
        &field_csv_bytes(&record.final_state.u),
    )?;
    write_atomic(
        &run_dir.join("final_u.bin"),
        &field_binary_bytes(&record.final_state.u),
    )?;
    write_atomic(
        &run_dir.join("final_v.bin"),
        &field_binary_bytes(&record.final_state.v),
    )?;

    let exit_code = match classification {
        RunClassification::Bounded => EXIT_OK,
        RunClassification::SuspectedBlowup => EXIT_BLOWUP,
        RunClassification::Inconclusive => EXIT_INCONCLUSIVE,
    };
    Ok(SimulationOutput {
        run_dir,
        classification,
        record,
        exit_code,
    })
}
