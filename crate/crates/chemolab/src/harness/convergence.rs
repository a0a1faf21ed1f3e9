//! Refinement study against a manufactured solution.
//!
//! The model is pinned to its pure-diffusion limit (no taxis, linear
//! diffusion, no sources), where `u(x, t) = e^{-pi^2 t} cos(pi x)` solves
//! the equation with zero-flux boundaries on the unit interval. Cosine
//! data is signed, so the study drives the transport step directly rather
//! than going through a full run.

use std::f64::consts::PI;

use crate::grid::{Field, Grid};
use crate::rational::rat_int;
use crate::solver::{step_u, State};

use super::config::{ConfigError, RunConfig};
use super::{HarnessError, EXIT_OK, EXIT_ORDER};

/// Orders below this fail the study; second-order transport with the
/// time step slaved to h^2 sits at 2 with a little room for preasymptotic
/// wobble.
pub const ORDER_FLOOR: f64 = 1.9;

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub error: f64,
    /// Observed order against the previous row; `None` on the first.
    pub order: Option<f64>,
}

fn heat_limit_violations(cfg: &RunConfig) -> Vec<String> {
    let mut violations = Vec::new();
    if cfg.model.chi != 0.0 {
        violations.push(format!("chi must be 0, got {}", cfg.model.chi));
    }
    if cfg.regime.m1 != rat_int(1) {
        violations.push(format!("m1 must be 1, got {}", cfg.model.m1));
    }
    if cfg.model.sources_enabled {
        violations.push("sources_enabled must be false".into());
    }
    if cfg.grid.dims() != 1 || cfg.grid.extents().0 != 1.0 {
        violations.push("the study runs on the 1D unit interval".into());
    }
    violations
}

fn level_error(cells: usize, t_end: f64, cfg: &RunConfig) -> Result<f64, HarnessError> {
    let grid = Grid::line(1.0, cells).map_err(|e| {
        HarnessError::Config(ConfigError::Bad {
            section: "convergence".into(),
            key: "levels".into(),
            detail: e.to_string(),
        })
    })?;
    let h = grid.min_spacing();
    let steps = (t_end / (0.25 * h * h)).ceil() as u64;
    let dt = t_end / steps as f64;

    let mut state = State {
        u: Field::from_fn(grid, |x, _| (PI * x).cos()),
        v: Field::zeros(grid),
        t: 0.0,
    };
    for _ in 0..steps {
        state.u = step_u(&state, dt, &cfg.model)?;
        state.t += dt;
    }

    let decay = (-PI * PI * t_end).exp();
    let exact = Field::from_fn(grid, |x, _| decay * (PI * x).cos());
    let err = state
        .u
        .values()
        .iter()
        .zip(exact.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(err)
}

/// Runs every refinement level and computes the pairwise orders.
pub fn convergence_table(cfg: &RunConfig) -> Result<Vec<ConvergenceRow>, HarnessError> {
    let Some(spec) = &cfg.convergence else {
        return Err(HarnessError::Config(ConfigError::Missing {
            section: "convergence".into(),
            key: "manufactured".into(),
        }));
    };
    if !spec.manufactured {
        return Err(HarnessError::Config(ConfigError::Bad {
            section: "convergence".into(),
            key: "manufactured".into(),
            detail: "the study only runs against the manufactured solution".into(),
        }));
    }
    let violations = heat_limit_violations(cfg);
    if !violations.is_empty() {
        return Err(HarnessError::Config(ConfigError::Model {
            trace: violations
                .iter()
                .map(|v| format!("  {v}"))
                .collect::<Vec<_>>()
                .join("\n"),
        }));
    }
    if !spec.levels.windows(2).all(|w| w[0] < w[1]) {
        return Err(HarnessError::Config(ConfigError::Bad {
            section: "convergence".into(),
            key: "levels".into(),
            detail: "levels must be strictly increasing".into(),
        }));
    }

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(spec.levels.len());
    for &cells in &spec.levels {
        let error = level_error(cells, spec.t_end, cfg)?;
        let order = rows.last().map(|prev| {
            (prev.error / error).ln() / (cells as f64 / prev.cells as f64).ln()
        });
        rows.push(ConvergenceRow {
            cells,
            error,
            order,
        });
    }
    Ok(rows)
}

/// Exit code for a computed table: success only when every observed order
/// clears the floor.
pub fn order_exit_code(rows: &[ConvergenceRow]) -> i32 {
    let pass = rows
        .iter()
        .filter_map(|r| r.order)
        .all(|order| order >= ORDER_FLOOR);
    if pass {
        EXIT_OK
    } else {
        EXIT_ORDER
    }
}

/// CLI entry point: prints the table and gates on the observed orders.
pub fn run_convergence(cfg: &RunConfig, quiet: bool) -> Result<i32, HarnessError> {
    let rows = convergence_table(cfg)?;
    if !quiet {
        println!("{:>8}  {:>14}  {:>6}", "cells", "linf error", "order");
        for row in &rows {
            match row.order {
                Some(order) => {
                    println!("{:>8}  {:>14.6e}  {:>6.3}", row.cells, row.error, order)
                }
                None => println!("{:>8}  {:>14.6e}  {:>6}", row.cells, row.error, "-"),
            }
        }
    }
    Ok(order_exit_code(&rows))
}
