//! Batch front end: configuration files, run directories, parameter
//! sweeps, the regime report, the refinement study, and the exponent
//! table. Everything here is driven by a config file and writes
//! deterministic artifacts; the CLI crate is a thin argument parser over
//! these entry points.
//!
//! Each entry point returns the process exit code it wants, so the binary
//! can stay a match statement:
//!
//! * 0 run completed, bounded / report found a criterion / orders pass
//! * 1 configuration or internal error
//! * 2 suspected blow-up
//! * 3 inconclusive run
//! * 4 parameters outside the known criteria
//! * 5 refinement orders below the acceptance line

pub mod config;
mod convergence;
mod exponents;
mod regime_report;
mod simulate;
mod sweep;

pub use config::{
    content_hash, ConfigError, ControlSpec, ConvergenceSpec, ExponentTableSpec, InitialData,
    OutputSpec, RawConfig, RunConfig,
};
pub use convergence::{
    convergence_table, order_exit_code, run_convergence, ConvergenceRow, ORDER_FLOOR,
};
pub use exponents::{exponent_table_text, run_exponent_table};
pub use regime_report::{evaluate_regime, run_regime_report, RegimeReport};
pub use simulate::{run_simulation, SimulationOutput};
pub use sweep::{run_sweep, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_OUTSIDE: i32 = 4;
pub const EXIT_ORDER: i32 = 5;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver: {0}")]
    Solver(#[from] crate::solver::SolverError),
    #[error("regime: {0}")]
    Regime(#[from] crate::regimes::RegimeError),
    #[error("{path}: {detail}")]
    Io { path: PathBuf, detail: String },
}

impl HarnessError {
    fn io(path: &Path, err: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            detail: err.to_string(),
        }
    }
}

/// Where run directories go: the environment override wins, then the
/// command-line choice, then the config's own setting, then `runs`.
pub fn resolve_out_parent(cli_out: Option<&Path>, config_dir: Option<&Path>) -> PathBuf {
    if let Some(env) = std::env::var_os("CHEMOLAB_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    if let Some(out) = cli_out {
        return out.to_path_buf();
    }
    if let Some(dir) = config_dir {
        return dir.to_path_buf();
    }
    PathBuf::from("runs")
}

/// Writes `content` to `path` atomically: a temp file in the same
/// directory, then a rename. Reruns can never expose half-written files.
pub(crate) fn write_atomic(path: &Path, content: &[u8]) -> Result<(), HarnessError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".to_string());
    let tmp = dir.join(format!(".{file_name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp).map_err(|e| HarnessError::io(&tmp, e))?;
        f.write_all(content).map_err(|e| HarnessError::io(&tmp, e))?;
        f.sync_all().map_err(|e| HarnessError::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}
