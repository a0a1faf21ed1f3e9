//! Step-size control, the density update, and the run loop.

use crate::grid::{gradient_magnitude, half_pow, integrate, transport_divergence, Field};
use crate::model::{upow, ModelError, ModelParams, SourceKind, Tau};

use super::linear::{elliptic_solve_v_from, parabolic_step_v_cached, TridiagFactors};
use super::monitors::{mass_bound_result, Fm2Fold};
use super::{RunRecord, SeriesRow, SolverError, State, StepControl, Termination};

/// What a run samples and monitors along the way.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Spacing between series rows.
    pub sample_interval: f64,
    /// Exponent k of the tracked `L^k` norm and of `y(t) = INT (u+1)^k`.
    pub series_k: f64,
    /// Check the antiderivative sandwich `0 <= F <= bound` at every sample
    /// with this k (requires `k + m2 - 1 > 0`).
    pub fm2_k: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            sample_interval: 0.1,
            series_k: 2.0,
            fm2_k: None,
        }
    }
}

/// A stability-bounded step size. `collapsed` reports that the bound fell
/// below the control's floor; the returned dt is floored so a caller that
/// chooses to push on still makes progress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityDt {
    pub dt: f64,
    pub collapsed: bool,
}

/// Largest stable explicit step: the minimum of the diffusion bound
/// `h^2/(2 dims D_max)`, the transport bound `h/(2 dims w_max)` with the
/// face speed `w = chi |grad v|` amplified by the mobility slope, and a cap
/// holding relative growth of u per step to 10%, all scaled by
/// `cfl_safety`.
pub fn stability_dt(state: &State, params: &ModelParams, control: &StepControl) -> StabilityDt {
    let grid = state.u.grid();
    let dims = grid.dims() as f64;
    let (hx, hy) = grid.spacing();
    let h_min = grid.min_spacing();

    let u_max = state.u.max().max(0.0);
    let u_min = state.u.min().max(0.0);
    // diffusivity is monotone in u, so its extremes sit at the field's
    let d_max = half_pow(u_max + 1.0, params.m1 - 1.0)
        .max(half_pow(u_min + 1.0, params.m1 - 1.0));
    let dt_diff = h_min * h_min / (2.0 * dims * d_max);

    let mut dv_max = 0.0f64;
    let (nx, ny) = grid.cells();
    let v = state.v.values();
    for j in 0..ny {
        for i in 0..nx.saturating_sub(1) {
            let dv = v[grid.idx(i + 1, j)] - v[grid.idx(i, j)];
            dv_max = dv_max.max(dv.abs());
        }
    }
    let mut w_max = params.chi.abs() * dv_max / hx;
    if grid.dims() == 2 {
        let mut dv_max = 0.0f64;
        for j in 0..ny - 1 {
            for i in 0..nx {
                let dv = v[grid.idx(i, j + 1)] - v[grid.idx(i, j)];
                dv_max = dv_max.max(dv.abs());
            }
        }
        w_max = w_max.max(params.chi.abs() * dv_max / hy);
    }
    let mobility_slope = half_pow(u_max + 1.0, params.m2 - 1.0).max(1.0);
    let dt_adv = if w_max > 0.0 {
        h_min / (2.0 * dims * w_max * mobility_slope)
    } else {
        f64::INFINITY
    };

    let growth_rate = if params.sources_enabled {
        growth_rate_at(u_max, params)
    } else {
        0.0
    };
    let dt_growth = if growth_rate > 0.0 {
        0.1 / growth_rate
    } else {
        f64::INFINITY
    };

    let bound = control.cfl_safety * dt_diff.min(dt_adv).min(dt_growth);
    let dt = bound.min(control.dt_max);
    if dt < control.dt_min {
        StabilityDt {
            dt: control.dt_min,
            collapsed: true,
        }
    } else {
        StabilityDt {
            dt,
            collapsed: false,
        }
    }
}

/// One forward-Euler transport step followed by the Patankar-weighted
/// reaction update `u_new = (u + dt P)/(1 + dt Q/u)`, which keeps u
/// nonnegative without clipping and leaves vacuum cells at zero.
pub fn step_u(state: &State, dt: f64, params: &ModelParams) -> Result<Field, SolverError> {
    let rhs = transport_divergence(&state.u, &state.v, params.chi, params.m1, params.m2)?;

    let mut mid = state.u.clone();
    let roundoff = 1e-12 * (1.0 + state.u.max_abs());
    for (m, &f) in mid.values_mut().iter_mut().zip(rhs.values()) {
        *m += dt * f;
        if *m < 0.0 && *m >= -roundoff {
            *m = 0.0;
        }
    }
    if !mid.is_finite() {
        return Err(SolverError::NonFinite { what: "density" });
    }
    if !params.sources_enabled {
        return Ok(mid);
    }

    // the reaction split matches eval_source term for term, folded into a
    // single pass over the cells
    match params.source {
        SourceKind::NonlocalDamping => {
            let integral = integrate(&mid, params.delta).map_err(ModelError::Quadrature)?;
            let qc = params.c * integral;
            for m in mid.values_mut() {
                let x = *m;
                let growth = params.a * upow(x, params.alpha);
                let qb = params.b * upow(x, params.beta);
                let denom = if x > 0.0 { 1.0 + dt * (qb + qc) / x } else { 1.0 };
                *m = (x + dt * growth) / denom;
            }
        }
        SourceKind::GradientDamping => {
            let grad = gradient_magnitude(&mid);
            let integral = integrate(&mid, params.beta).map_err(ModelError::Quadrature)?;
            for (m, &gm) in mid.values_mut().iter_mut().zip(grad.values()) {
                let x = *m;
                let t = upow(x, params.alpha);
                let growth = params.a * t;
                let qb = params.b * t * integral;
                let qc = params.c * upow(gm, params.delta);
                let denom = if x > 0.0 { 1.0 + dt * (qb + qc) / x } else { 1.0 };
                *m = (x + dt * growth) / denom;
            }
        }
    }
    if !mid.is_finite() {
        return Err(SolverError::NonFinite { what: "density" });
    }
    Ok(mid)
}

fn sample_row(state: &State, k: f64) -> Result<SeriesRow, SolverError> {
    let mass = integrate(&state.u, 1.0)?;
    let lk = integrate(&state.u, k)?.powf(1.0 / k);
    let mut shifted = state.u.clone();
    for x in shifted.values_mut() {
        *x += 1.0;
    }
    let y = integrate(&shifted, k)?;
    Ok(SeriesRow {
        t: state.t,
        mass,
        linf_u: state.u.max_abs(),
        linf_v: state.v.max_abs(),
        lk_u: lk,
        y,
        min_u: state.u.min(),
        min_v: state.v.min(),
    })
}

/// Advances the system to `t_end` or to a termination event, sampling the
/// series every `sample_interval` and folding the monitors over the
/// samples. Deterministic: identical inputs give identical records.
pub fn run(
    initial: State,
    params: &ModelParams,
    control: &StepControl,
    opts: &RunOptions,
) -> Result<RunRecord, SolverError> {
    control.validate()?;
    if !(opts.sample_interval > 0.0) {
        return Err(SolverError::Control {
            detail: format!("sample_interval must be positive, got {}", opts.sample_interval),
        });
    }
    if initial.u.grid() != initial.v.grid() {
        return Err(SolverError::Grid(crate::grid::GridError::GridMismatch));
    }
    if !initial.u.is_finite() || !initial.v.is_finite() {
        return Err(SolverError::NonFinite { what: "initial state" });
    }

    let mut state = initial;
    let t0 = state.t;
    let mut series = vec![sample_row(&state, opts.series_k)?];
    let mut fm2 = Fm2Fold::new(opts.fm2_k, params.m2);
    fm2.absorb(&state.u)?;

    let mut sample_index: u64 = 1;
    let mut steps: u64 = 0;
    let mut factors: Option<TridiagFactors> = None;
    let termination;

    loop {
        if state.t >= control.t_end {
            termination = Termination::ReachedTEnd;
            break;
        }
        let stability = stability_dt(&state, params, control);
        if stability.collapsed {
            termination = Termination::DtUnderflow;
            break;
        }
        let next_sample = t0 + sample_index as f64 * opts.sample_interval;
        let next_event = next_sample.min(control.t_end);
        let dt = stability.dt.min(next_event - state.t);

        let u_new = match step_u(&state, dt, params) {
            Ok(u) => u,
            Err(SolverError::NonFinite { .. }) => {
                termination = Termination::SuspectedBlowup;
                break;
            }
            Err(other) => return Err(other),
        };
        let v_new = match params.tau {
            Tau::Elliptic => elliptic_solve_v_from(&u_new, params, &state.v, &mut factors)?,
            Tau::Parabolic => parabolic_step_v_cached(&state.v, &u_new, dt, params, &mut factors)?,
        };
        state.u = u_new;
        state.v = v_new;
        state.t += dt;
        steps += 1;

        // land exactly on event times so the series stays reproducible
        if (state.t - next_event).abs() <= 1e-9 * opts.sample_interval {
            state.t = next_event;
        }
        if state.t == next_sample {
            series.push(sample_row(&state, opts.series_k)?);
            fm2.absorb(&state.u)?;
            sample_index += 1;
        }

        if state.u.max_abs() > control.blowup_threshold {
            termination = Termination::SuspectedBlowup;
            break;
        }
    }

    if series.last().map(|r| r.t) != Some(state.t) {
        series.push(sample_row(&state, opts.series_k)?);
        fm2.absorb(&state.u)?;
    }

    let mut monitors = vec![mass_bound_result(&series, params)];
    if let Some(result) = fm2.finish() {
        monitors.push(result);
    }

    Ok(RunRecord {
        series,
        termination,
        monitors,
        final_state: state,
        steps,
    })
}

/// Relative growth of u per unit time at the sup-norm; caps dt so no step
/// grows u by more than 10%.
fn growth_rate_at(u_max: f64, params: &ModelParams) -> f64 {
    if params.a <= 0.0 {
        0.0
    } else if u_max > 0.0 {
        params.a * upow(u_max, params.alpha - 1.0)
    } else if params.alpha == 1.0 {
        params.a
    } else {
        0.0
    }
}
