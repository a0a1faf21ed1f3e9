//! Static parameter classification: walks the boundedness criteria from
//! the strict main thresholds through the limit cases to the degenerate
//! special cases, and renders every inequality it evaluated.

use std::fmt::Write as _;

use crate::grid::integrate;
use crate::model::SourceKind;
use crate::regimes::{
    check_limit_gradient, check_limit_nonlocal, check_main_gradient, check_main_nonlocal,
    check_special_cases, gradient_delta_growth_threshold, gradient_delta_production_threshold,
    gradient_growth_threshold, gradient_taxis_threshold, mass_bound_gradient, mass_bound_nonlocal,
    nonlocal_delta_threshold, Classification, RegimeError, RegimeParams, RegimeVerdict,
};

use super::config::RunConfig;
use super::{HarnessError, EXIT_OK, EXIT_OUTSIDE};

pub struct RegimeReport {
    pub text: String,
    pub exit_code: i32,
    /// The verdict that certified boundedness, when one did.
    pub verdict: Option<RegimeVerdict>,
}

/// Whether the exact exponents sit on a limit threshold, so that the
/// limit-case clauses (and their constants) are in play at all.
fn at_limit(p: &RegimeParams) -> bool {
    match p.source {
        SourceKind::NonlocalDamping => p.delta == nonlocal_delta_threshold(p),
        SourceKind::GradientDamping => {
            if p.c == 0.0 {
                p.beta == gradient_taxis_threshold(p) || p.beta == gradient_growth_threshold(p)
            } else {
                p.delta == gradient_delta_production_threshold(p)
                    || p.delta == gradient_delta_growth_threshold(p)
            }
        }
    }
}

fn push_verdict(text: &mut String, heading: &str, verdict: &RegimeVerdict) {
    let _ = writeln!(text, "-- {heading} --");
    text.push_str(&verdict.report());
}

/// Evaluates the criteria for `cfg` without touching the filesystem.
pub fn evaluate_regime(cfg: &RunConfig) -> Result<RegimeReport, HarnessError> {
    cfg.require_evaluable()?;
    let p = &cfg.regime;

    // the initial mass feeds the a-priori mass bounds
    let u0 = cfg.initial_u.realize(cfg.grid, &cfg.base_dir)?;
    let mass0 = integrate(&u0, 1.0).map_err(crate::solver::SolverError::from)?;

    let mut text = String::new();
    let bounded = |text: String, verdict: RegimeVerdict| {
        Ok(RegimeReport {
            text,
            exit_code: EXIT_OK,
            verdict: Some(verdict),
        })
    };

    let main = match p.source {
        SourceKind::NonlocalDamping => check_main_nonlocal(p),
        SourceKind::GradientDamping => check_main_gradient(p),
    }?;
    push_verdict(&mut text, "main criterion", &main);
    if main.classification != Classification::OutsideKnownTheory {
        return bounded(text, main);
    }

    if at_limit(p) {
        let Some(consts) = &cfg.constants else {
            return Err(HarnessError::Config(super::ConfigError::Model {
                trace: "  parameters sit on a limit threshold; the limit-case check \
                        requires a [constants] section (C0, CGN, CP, k_star)"
                    .into(),
            }));
        };
        let limit = match p.source {
            SourceKind::NonlocalDamping => check_limit_nonlocal(p, consts),
            SourceKind::GradientDamping => {
                let mass = mass_bound_gradient(p, mass0).ok();
                check_limit_gradient(p, consts, mass)
            }
        };
        match limit {
            Ok(verdict) => {
                push_verdict(&mut text, "limit case", &verdict);
                if verdict.classification != Classification::OutsideKnownTheory {
                    return bounded(text, verdict);
                }
            }
            Err(RegimeError::BadConstants { detail }) => {
                return Err(HarnessError::Regime(RegimeError::BadConstants { detail }));
            }
            Err(e) => {
                let _ = writeln!(text, "-- limit case --\n  not evaluated: {e}");
            }
        }
    }

    // mass is conserved without sources, so the initial mass is itself the
    // bound; otherwise the damping terms provide one when they exist
    let special_mass = if p.a == 0.0 && p.b == 0.0 && p.c == 0.0 {
        Some(mass0)
    } else {
        match p.source {
            SourceKind::NonlocalDamping => mass_bound_nonlocal(p, mass0).ok(),
            SourceKind::GradientDamping => mass_bound_gradient(p, mass0).ok(),
        }
    };
    match check_special_cases(p, cfg.constants.as_ref(), special_mass) {
        Ok(verdict) => {
            push_verdict(&mut text, "special cases", &verdict);
            if verdict.classification != Classification::OutsideKnownTheory {
                return bounded(text, verdict);
            }
        }
        Err(RegimeError::MissingConstants) => {
            return Err(HarnessError::Config(super::ConfigError::Model {
                trace: "  a special-case clause applies but needs a [constants] \
                        section (C0, CGN, CP, k_star)"
                    .into(),
            }));
        }
        Err(RegimeError::BadConstants { detail }) => {
            return Err(HarnessError::Regime(RegimeError::BadConstants { detail }));
        }
        Err(e) => {
            let _ = writeln!(text, "-- special cases --\n  not evaluated: {e}");
        }
    }

    let _ = writeln!(text, "verdict: {}", Classification::OutsideKnownTheory);
    Ok(RegimeReport {
        text,
        exit_code: EXIT_OUTSIDE,
        verdict: None,
    })
}

/// CLI entry point: prints the report and returns the exit code.
pub fn run_regime_report(cfg: &RunConfig, quiet: bool) -> Result<RegimeReport, HarnessError> {
    let report = evaluate_regime(cfg)?;
    if !quiet {
        print!("{}", report.text);
    }
    Ok(report)
}
