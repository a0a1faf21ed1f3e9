//! Invariant monitors evaluated along runs, and the final verdict.

use crate::grid::Field;
use crate::model::{ModelParams, SourceKind};

use super::{
    MonitorOutcome, MonitorResult, RunClassification, RunRecord, SeriesRow, SolverError,
    StepControl, Termination,
};

/// Relative slack granted to the sampled mass over its proven bound,
/// absorbing discretization error.
pub const MASS_BOUND_TOL: f64 = 2e-2;

const FM2_TOL: f64 = 1e-8;

/// `INT_0^u s (s+1)^(k+m2-3) ds` by adaptive Simpson quadrature to
/// absolute tolerance 1e-8.
pub fn fm2_quadrature(u: f64, k: f64, m2: f64) -> Result<f64, SolverError> {
    if u <= 0.0 {
        return Ok(0.0);
    }
    let e = k + m2 - 3.0;
    let f = |s: f64| s * (s + 1.0).powf(e);
    adaptive_simpson(&f, 0.0, u, FM2_TOL)
}

/// The same antiderivative in closed form via `s = (s+1) - 1`:
/// the difference of two power integrals of `s+1`, with the logarithmic
/// branch where an exponent hits -1.
pub fn fm2_closed_form(u: f64, k: f64, m2: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let e = k + m2 - 3.0;
    let power_integral = |p: f64| {
        if p == -1.0 {
            (u + 1.0).ln()
        } else {
            ((u + 1.0).powf(p + 1.0) - 1.0) / (p + 1.0)
        }
    };
    power_integral(e + 1.0) - power_integral(e)
}

/// `[(u+1)^(k+m2-1) - 1]/(k+m2-1)`, the natural upper bound of the
/// antiderivative. Requires `k + m2 - 1 > 0`.
pub fn fm2_upper_bound(u: f64, k: f64, m2: f64) -> f64 {
    let p = k + m2 - 1.0;
    ((u.max(0.0) + 1.0).powf(p) - 1.0) / p
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, SolverError> {
    fn simpson(a: f64, fa: f64, fm: f64, fb: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn refine(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, SolverError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, flm, fm, m);
        let right = simpson(m, fm, frm, fb, b);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(SolverError::Quadrature { upper: b });
        }
        Ok(refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }

    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, fa, fm, fb, b);
    refine(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Checks `0 <= INT_0^u s(s+1)^(k+m2-3) ds <= [(u+1)^(k+m2-1) - 1]/(k+m2-1)`
/// cellwise, within the quadrature tolerance. The worst margin is the
/// smallest slack seen on either side.
pub fn monitor_fm2_bound(u: &Field, k: f64, m2: f64) -> Result<MonitorOutcome, SolverError> {
    if !(k + m2 - 1.0 > 0.0) {
        return Ok(MonitorOutcome::NotApplicable {
            reason: format!("needs k + m2 - 1 > 0, got {}", k + m2 - 1.0),
        });
    }
    let mut worst = f64::INFINITY;
    for &x in u.values() {
        let f = fm2_quadrature(x, k, m2)?;
        let upper = fm2_upper_bound(x, k, m2);
        worst = worst.min(f).min(upper - f);
    }
    Ok(if worst >= -FM2_TOL {
        MonitorOutcome::Passed { worst_margin: worst }
    } else {
        MonitorOutcome::Failed { worst_margin: worst }
    })
}

/// Folds the antiderivative monitor over every sampled density field.
pub(crate) struct Fm2Fold {
    k: Option<f64>,
    m2: f64,
    worst: f64,
    not_applicable: Option<String>,
}

impl Fm2Fold {
    pub(crate) fn new(k: Option<f64>, m2: f64) -> Self {
        Fm2Fold {
            k,
            m2,
            worst: f64::INFINITY,
            not_applicable: None,
        }
    }

    pub(crate) fn absorb(&mut self, u: &Field) -> Result<(), SolverError> {
        let Some(k) = self.k else { return Ok(()) };
        if self.not_applicable.is_some() {
            return Ok(());
        }
        match monitor_fm2_bound(u, k, self.m2)? {
            MonitorOutcome::Passed { worst_margin } | MonitorOutcome::Failed { worst_margin } => {
                self.worst = self.worst.min(worst_margin);
            }
            MonitorOutcome::NotApplicable { reason } => self.not_applicable = Some(reason),
        }
        Ok(())
    }

    pub(crate) fn finish(self) -> Option<MonitorResult> {
        self.k?;
        let outcome = if let Some(reason) = self.not_applicable {
            MonitorOutcome::NotApplicable { reason }
        } else if self.worst >= -FM2_TOL {
            MonitorOutcome::Passed {
                worst_margin: self.worst,
            }
        } else {
            MonitorOutcome::Failed {
                worst_margin: self.worst,
            }
        };
        Some(MonitorResult {
            name: "antiderivative-sandwich",
            outcome,
        })
    }
}

/// The proven cap on total mass: the larger of the initial mass and the
/// coefficient equilibrium of the family.
fn mass_cap(params: &ModelParams, initial_mass: f64) -> Result<f64, String> {
    match params.source {
        SourceKind::NonlocalDamping => {
            if !(params.beta > params.alpha) {
                return Err(format!(
                    "needs beta > alpha, got {} <= {}",
                    params.beta, params.alpha
                ));
            }
            if !(params.b > 0.0) {
                return Err("needs b > 0".into());
            }
            let gap = params.beta - params.alpha;
            let equilibrium = (params.a / params.b * params.measure.powf(gap)).powf(1.0 / gap);
            Ok(initial_mass.max(equilibrium))
        }
        SourceKind::GradientDamping => {
            if !(params.beta > 0.0) {
                return Err(format!("needs beta > 0, got {}", params.beta));
            }
            if !(params.b > 0.0) {
                return Err("needs b > 0".into());
            }
            let equilibrium = (params.a
                / (params.b * params.measure.powf(1.0 - params.beta)))
            .powf(1.0 / params.beta);
            Ok(initial_mass.max(equilibrium))
        }
    }
}

pub(crate) fn mass_bound_result(series: &[SeriesRow], params: &ModelParams) -> MonitorResult {
    let name = "mass-bound";
    if !params.sources_enabled {
        return MonitorResult {
            name,
            outcome: MonitorOutcome::NotApplicable {
                reason: "reaction disabled".into(),
            },
        };
    }
    let initial_mass = series.first().map(|r| r.mass).unwrap_or(0.0);
    let cap = match mass_cap(params, initial_mass) {
        Ok(cap) => cap,
        Err(reason) => {
            return MonitorResult {
                name,
                outcome: MonitorOutcome::NotApplicable { reason },
            }
        }
    };
    let allowed = (1.0 + MASS_BOUND_TOL) * cap;
    let worst = series
        .iter()
        .map(|r| allowed - r.mass)
        .fold(f64::INFINITY, f64::min);
    MonitorResult {
        name,
        outcome: if worst >= 0.0 {
            MonitorOutcome::Passed { worst_margin: worst }
        } else {
            MonitorOutcome::Failed { worst_margin: worst }
        },
    }
}

/// Fails iff some sampled mass exceeds `(1 + MASS_BOUND_TOL)` times the
/// proven cap; not applicable when the family's hypotheses on the
/// coefficients do not hold.
pub fn monitor_mass_bound(record: &RunRecord, params: &ModelParams) -> MonitorResult {
    mass_bound_result(&record.series, params)
}

/// Numerical dichotomy verdict. Bounded needs a completed run under the
/// threshold; suspected blow-up needs the threshold crossed, or a dt
/// collapse while the sup-norm was still climbing over the last tenth of
/// the recorded time span. A dt collapse with a flat sup-norm is stiffness,
/// not blow-up: inconclusive.
pub fn classify_run(record: &RunRecord, control: &StepControl) -> RunClassification {
    let max_linf = record.max_linf_u();
    match record.termination {
        Termination::ReachedTEnd if max_linf <= control.blowup_threshold => {
            RunClassification::Bounded
        }
        Termination::ReachedTEnd => RunClassification::SuspectedBlowup,
        Termination::SuspectedBlowup => RunClassification::SuspectedBlowup,
        Termination::DtUnderflow => {
            if max_linf > control.blowup_threshold || tail_is_growing(&record.series) {
                RunClassification::SuspectedBlowup
            } else {
                RunClassification::Inconclusive
            }
        }
    }
}

fn tail_is_growing(series: &[SeriesRow]) -> bool {
    let (Some(first), Some(last)) = (series.first(), series.last()) else {
        return false;
    };
    let window_start = last.t - 0.1 * (last.t - first.t);
    let tail: Vec<&SeriesRow> = series.iter().filter(|r| r.t >= window_start).collect();
    if tail.len() < 2 {
        return false;
    }
    let head = tail.first().expect("nonempty");
    let back = tail.last().expect("nonempty");
    back.linf_u > head.linf_u * (1.0 + 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::model::Tau;
    use crate::solver::State;

    fn series_from(pairs: &[(f64, f64)]) -> Vec<SeriesRow> {
        pairs
            .iter()
            .map(|&(t, linf)| SeriesRow {
                t,
                mass: 0.0,
                linf_u: linf,
                linf_v: 0.0,
                lk_u: 0.0,
                y: 0.0,
                min_u: 0.0,
                min_v: 0.0,
            })
            .collect()
    }

    fn record(series: Vec<SeriesRow>, termination: Termination) -> RunRecord {
        let grid = Grid::line(1.0, 4).expect("grid");
        RunRecord {
            series,
            termination,
            monitors: Vec::new(),
            final_state: State {
                u: Field::zeros(grid),
                v: Field::zeros(grid),
                t: 0.0,
            },
            steps: 0,
        }
    }

    fn control() -> StepControl {
        StepControl {
            dt_max: 1.0,
            dt_min: 1e-12,
            cfl_safety: 0.4,
            t_end: 1.0,
            blowup_threshold: 100.0,
        }
    }

    #[test]
    fn quadratic_case_is_exact() {
        // k = 2, m2 = 1: integrand is s, so F = u^2/2
        for u in [0.0, 0.5, 1.0, 2.0] {
            let f = fm2_quadrature(u, 2.0, 1.0).expect("quadrature");
            assert!((f - u * u / 2.0).abs() <= 1e-10);
            assert!(fm2_upper_bound(u, 2.0, 1.0) >= f);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for (k, m2) in [(2.0, 1.0), (3.0, 2.0), (4.0, 0.5), (1.5, 0.2)] {
            for u in [0.3, 0.5, 1.0, 2.0, 7.0] {
                let q = fm2_quadrature(u, k, m2).expect("quadrature");
                let c = fm2_closed_form(u, k, m2);
                assert!((q - c).abs() <= 1e-8, "k={k} m2={m2} u={u}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn cubic_quartic_value() {
        // k = 3, m2 = 2, u = 1: 15/4 - 7/3 = 17/12
        let c = fm2_closed_form(1.0, 3.0, 2.0);
        assert!((c - 17.0 / 12.0).abs() <= 1e-14);
        let q = fm2_quadrature(1.0, 3.0, 2.0).expect("quadrature");
        assert!((q - 17.0 / 12.0).abs() <= 1e-8);
    }

    #[test]
    fn logarithmic_branches_agree_with_quadrature() {
        // k + m2 - 3 = -1 and -2 hit the log branch of each power integral
        for (k, m2) in [(1.5, 0.5), (0.5, 0.5)] {
            for u in [0.4, 1.0, 3.0] {
                let q = fm2_quadrature(u, k, m2).expect("quadrature");
                let c = fm2_closed_form(u, k, m2);
                assert!((q - c).abs() <= 1e-8, "k={k} m2={m2}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn sandwich_monitor_on_a_field() {
        let grid = Grid::line(1.0, 8).expect("grid");
        let u = Field::from_fn(grid, |x, _| 2.0 * x);
        let outcome = monitor_fm2_bound(&u, 2.0, 1.0).expect("monitor");
        match outcome {
            MonitorOutcome::Passed { worst_margin } => assert!(worst_margin >= 0.0),
            other => panic!("expected pass, got {other:?}"),
        }
        // vacuum sits exactly on the lower bound
        let zero = Field::zeros(grid);
        match monitor_fm2_bound(&zero, 2.0, 1.0).expect("monitor") {
            MonitorOutcome::Passed { worst_margin } => assert_eq!(worst_margin, 0.0),
            other => panic!("expected pass, got {other:?}"),
        }
        match monitor_fm2_bound(&u, 0.5, 0.5).expect("monitor") {
            MonitorOutcome::NotApplicable { .. } => {}
            other => panic!("expected not-applicable, got {other:?}"),
        }
    }

    fn nonlocal_params() -> ModelParams {
        ModelParams {
            n: 1,
            m1: 1.0,
            m2: 1.0,
            chi: 1.0,
            a: 1.0,
            b: 1.0,
            c: 0.0,
            alpha: 1.0,
            beta: 2.0,
            delta: 1.0,
            tau: Tau::Elliptic,
            production_scale: 1.0,
            production_exponent: 1.0,
            source: SourceKind::NonlocalDamping,
            measure: 1.0,
            sources_enabled: true,
        }
    }

    #[test]
    fn mass_monitor_uses_the_max_branch() {
        // equilibrium mass a/b = 1; initial mass 3 dominates
        let series = series_from(&[(0.0, 1.0), (1.0, 1.0)]);
        let mut series = series;
        series[0].mass = 3.0;
        series[1].mass = 2.0;
        let rec = record(series, Termination::ReachedTEnd);
        let res = monitor_mass_bound(&rec, &nonlocal_params());
        match res.outcome {
            MonitorOutcome::Passed { worst_margin } => {
                assert!((worst_margin - (1.02 * 3.0 - 3.0)).abs() <= 1e-12)
            }
            other => panic!("expected pass, got {other:?}"),
        }
    }

    #[test]
    fn mass_monitor_fails_above_the_slack() {
        let mut series = series_from(&[(0.0, 1.0), (1.0, 1.0)]);
        series[0].mass = 0.5;
        series[1].mass = 1.2; // above 1.02 * max(0.5, 1.0)
        let rec = record(series, Termination::ReachedTEnd);
        match monitor_mass_bound(&rec, &nonlocal_params()).outcome {
            MonitorOutcome::Failed { worst_margin } => assert!(worst_margin < 0.0),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn mass_monitor_gates_on_the_exponent_hypothesis() {
        let params = ModelParams {
            beta: 1.0,
            alpha: 1.0,
            ..nonlocal_params()
        };
        let rec = record(series_from(&[(0.0, 1.0)]), Termination::ReachedTEnd);
        match monitor_mass_bound(&rec, &params).outcome {
            MonitorOutcome::NotApplicable { .. } => {}
            other => panic!("expected not-applicable, got {other:?}"),
        }
    }

    #[test]
    fn flat_series_to_the_end_is_bounded() {
        let rec = record(
            series_from(&[(0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]),
            Termination::ReachedTEnd,
        );
        assert_eq!(classify_run(&rec, &control()), RunClassification::Bounded);
    }

    #[test]
    fn threshold_crossing_is_suspected_blowup() {
        let rec = record(
            series_from(&[(0.0, 1.0), (0.5, 150.0)]),
            Termination::SuspectedBlowup,
        );
        assert_eq!(
            classify_run(&rec, &control()),
            RunClassification::SuspectedBlowup
        );
    }

    #[test]
    fn dt_collapse_with_flat_norm_is_inconclusive() {
        let rec = record(
            series_from(&[(0.0, 5.0), (0.5, 5.0), (0.9, 5.0), (1.0, 5.0)]),
            Termination::DtUnderflow,
        );
        assert_eq!(
            classify_run(&rec, &control()),
            RunClassification::Inconclusive
        );
    }

    #[test]
    fn dt_collapse_with_climbing_norm_is_suspected_blowup() {
        let rec = record(
            series_from(&[(0.0, 1.0), (0.5, 2.0), (0.95, 40.0), (1.0, 80.0)]),
            Termination::DtUnderflow,
        );
        assert_eq!(
            classify_run(&rec, &control()),
            RunClassification::SuspectedBlowup
        );
    }
}
