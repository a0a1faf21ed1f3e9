//! Time integration of the coupled density/signal system.
//!
//! The density is advanced by forward Euler on the diffusion and taxis
//! divergences with Patankar-weighted reaction sinks, so nonnegativity never
//! relies on clipping. The signal is solved implicitly: a screened Poisson
//! solve when it is instantaneous, backward Euler when it evolves. Runs
//! record a time series, a termination verdict, and the outcomes of the
//! invariant monitors.

mod linear;
mod monitors;
mod stepping;

pub use linear::{elliptic_solve_v, parabolic_step_v};
pub use monitors::{
    classify_run, fm2_closed_form, fm2_quadrature, fm2_upper_bound, monitor_fm2_bound,
    monitor_mass_bound, MASS_BOUND_TOL,
};
pub use stepping::{run, stability_dt, step_u, RunOptions, StabilityDt};

use thiserror::Error;

use crate::grid::{Field, GridError};
use crate::model::ModelError;

/// The pair of evolving fields at a point in time. Both live on the same
/// grid and are nonnegative.
#[derive(Debug, Clone)]
pub struct State {
    pub u: Field,
    pub v: Field,
    pub t: f64,
}

/// Time-step policy: `dt_max` caps the step, `dt_min` is the abort floor,
/// `cfl_safety` scales the stability bound. Requires
/// `0 < dt_min <= dt_max` and `0 < cfl_safety < 1`; values at or above
/// `0.5` leave no headroom for combined transport, so stay below that.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub dt_max: f64,
    pub dt_min: f64,
    pub cfl_safety: f64,
    pub t_end: f64,
    /// Density sup-norm at which the run stops and reports suspected
    /// blow-up. A numerical verdict, never a proof.
    pub blowup_threshold: f64,
}

impl StepControl {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |detail: String| Err(SolverError::Control { detail });
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max) {
            return bad(format!(
                "need 0 < dt_min <= dt_max, got {} and {}",
                self.dt_min, self.dt_max
            ));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return bad(format!("cfl_safety must lie in (0,1), got {}", self.cfl_safety));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.blowup_threshold > 0.0) {
            return bad(format!(
                "blowup_threshold must be positive, got {}",
                self.blowup_threshold
            ));
        }
        Ok(())
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedTEnd,
    SuspectedBlowup,
    DtUnderflow,
}

/// One sampled instant. `lk_u` is the L^k norm of u and `y` the Lyapunov
/// integrand `INT (u+1)^k` for the configured k.
#[derive(Debug, Clone, Copy)]
pub struct SeriesRow {
    pub t: f64,
    pub mass: f64,
    pub linf_u: f64,
    pub linf_v: f64,
    pub lk_u: f64,
    pub y: f64,
    pub min_u: f64,
    pub min_v: f64,
}

/// Outcome of one invariant monitor. Margins are signed slack: positive
/// means the bound held with room to spare.
#[derive(Debug, Clone, PartialEq)]
pub enum MonitorOutcome {
    Passed { worst_margin: f64 },
    Failed { worst_margin: f64 },
    NotApplicable { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorResult {
    pub name: &'static str,
    pub outcome: MonitorOutcome,
}

/// Everything a finished run reports. Series times are strictly
/// increasing; the termination is set exactly once.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub series: Vec<SeriesRow>,
    pub termination: Termination,
    pub monitors: Vec<MonitorResult>,
    pub final_state: State,
    pub steps: u64,
}

impl RunRecord {
    /// Largest sampled density sup-norm.
    pub fn max_linf_u(&self) -> f64 {
        self.series.iter().map(|r| r.linf_u).fold(0.0, f64::max)
    }
}

/// Numerical verdict on a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunClassification {
    Bounded,
    SuspectedBlowup,
    Inconclusive,
}

impl std::fmt::Display for RunClassification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunClassification::Bounded => "bounded",
            RunClassification::SuspectedBlowup => "suspected blow-up",
            RunClassification::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("linear solve stalled after {iterations} iterations, residual {residual:e}")]
    LinearSolve { iterations: usize, residual: f64 },
    #[error("non-finite values in {what}")]
    NonFinite { what: &'static str },
    #[error("quadrature did not converge on [0, {upper}]")]
    Quadrature { upper: f64 },
    #[error("bad step control: {detail}")]
    Control { detail: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
}
