//! Exact exponent table over an integer k range.

use std::fmt::Write as _;

use crate::rational::{fmt_rat, rat_int};
use crate::regimes::{exponents, find_k_star, ExponentFlags, RegimeError};

use super::config::RunConfig;
use super::{HarnessError, EXIT_OK};

fn failing_flags(flags: &ExponentFlags) -> String {
    let mut out = Vec::new();
    for (ok, name) in [
        (flags.theta1_in_unit, "theta1"),
        (flags.theta2_in_unit, "theta2"),
        (flags.theta3_in_unit, "theta3"),
        (flags.theta4_in_unit, "theta4"),
        (flags.sigma1_ratio_positive, "sigma1theta1/2"),
        (flags.sigma2_ratio_in_unit, "sigma2theta2/delta"),
        (flags.sigma3_ratio_in_unit, "sigma3theta3/delta"),
    ] {
        if !ok {
            out.push(name);
        }
    }
    out.join(",")
}

/// Renders the table without printing it.
pub fn exponent_table_text(cfg: &RunConfig) -> Result<String, HarnessError> {
    cfg.require_evaluable()?;
    let spec = cfg.exponent_table.unwrap_or_default();
    let p = &cfg.regime;
    let mut out = String::new();

    if spec.k_max < 2 {
        let _ = writeln!(
            out,
            "no integer k: the exponents need k >= 2 and k_max = {}",
            spec.k_max
        );
        return Ok(out);
    }
    let k_min = spec.k_min.max(2);

    for k in k_min..=spec.k_max {
        match exponents(&rat_int(k as i64), p) {
            Ok(e) => {
                let _ = writeln!(out, "k = {k}");
                let _ = writeln!(
                    out,
                    "  theta1 = {}  theta2 = {}  theta3 = {}  theta4 = {}",
                    fmt_rat(&e.theta1),
                    fmt_rat(&e.theta2),
                    fmt_rat(&e.theta3),
                    fmt_rat(&e.theta4),
                );
                let _ = writeln!(
                    out,
                    "  sigma1 = {}  sigma2 = {}  sigma3 = {}",
                    fmt_rat(&e.sigma1),
                    fmt_rat(&e.sigma2),
                    fmt_rat(&e.sigma3),
                );
                let _ = writeln!(
                    out,
                    "  sigma1theta1/2 = {}  sigma2theta2/delta = {}  sigma3theta3/delta = {}",
                    fmt_rat(&e.sigma1_theta1_half),
                    fmt_rat(&e.sigma2_theta2_delta),
                    fmt_rat(&e.sigma3_theta3_delta),
                );
                let flags = if e.flags.all() {
                    "all hold".to_string()
                } else {
                    format!("failing: {}", failing_flags(&e.flags))
                };
                let _ = writeln!(out, "  flags: {flags}");
            }
            Err(RegimeError::DegenerateExponent { detail, .. }) => {
                let _ = writeln!(out, "k = {k}\n  degenerate: {detail}");
            }
            Err(e) => return Err(HarnessError::Regime(e)),
        }
    }

    match find_k_star(p, spec.k_max) {
        Some(k) => {
            let _ = writeln!(out, "k* = {k} (smallest integer k with every flag holding)");
        }
        None => {
            let _ = writeln!(out, "k* = none up to k_max = {}", spec.k_max);
        }
    }
    Ok(out)
}

/// CLI entry point: prints the table; always succeeds once the config
/// parses.
pub fn run_exponent_table(cfg: &RunConfig, quiet: bool) -> Result<i32, HarnessError> {
    let text = exponent_table_text(cfg)?;
    if !quiet {
        print!("{text}");
    }
    Ok(EXIT_OK)
}
