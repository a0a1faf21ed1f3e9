//! Boundedness regimes: every sufficient condition for uniform-in-time
//! boundedness of the two systems, implemented as exact predicates.
//!
//! Exponent comparisons (thresholds on alpha, beta, delta, m1, m2, l) are
//! decided in rational arithmetic, so a verdict never depends on float
//! rounding. Coefficient inequalities (lower bounds on b or c involving the
//! interpolation constants) are evaluated in floats since the constants
//! themselves are empirical inputs.
//!
//! Checks come in three tiers:
//! - main criteria: strict threshold inequalities ([`check_main_nonlocal`],
//!   [`check_main_gradient`]);
//! - limit cases: exponents exactly on a threshold, boundedness bought by a
//!   coefficient inequality ([`check_limit_nonlocal`],
//!   [`check_limit_gradient`]);
//! - special cases: degenerate coefficient patterns such as a vanishing
//!   damping term ([`check_special_cases`]).

mod criteria;
mod exponents;

pub use criteria::{
    check_limit_gradient, check_limit_nonlocal, check_main_gradient, check_main_nonlocal,
    check_special_cases, gradient_delta_growth_threshold, gradient_delta_production_threshold,
    gradient_growth_threshold, gradient_taxis_threshold, linear_no_nonlocal_threshold,
    mass_bound_gradient, mass_bound_nonlocal, nonlocal_delta_threshold,
};
pub use exponents::{exponents, find_k_star, find_k_where, ExponentFlags, Exponents};

use std::fmt;

use thiserror::Error;

use crate::model::{ModelParams, SourceKind, Tau};
use crate::rational::{fmt_rat, rat_from_f64, Rat};

/// The scalars the regime predicates read. Exponent-like quantities are
/// exact rationals; coefficients compared against empirical constants stay
/// floats.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeParams {
    pub n: u32,
    pub m1: Rat,
    pub m2: Rat,
    /// Production exponent l.
    pub l: Rat,
    pub alpha: Rat,
    pub beta: Rat,
    pub delta: Rat,
    pub tau: Tau,
    pub source: SourceKind,
    pub chi: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Production scale K.
    pub production_scale: f64,
    /// Domain measure |Omega|.
    pub measure: f64,
}

impl RegimeParams {
    /// Converts the float exponents of a [`ModelParams`] to exact rationals.
    /// Every finite f64 is a dyadic rational, so this is lossless; callers
    /// that parsed exponents from fraction literals like `4/3` should build
    /// the struct directly instead, since the f64 image of such a literal is
    /// not the fraction itself.
    pub fn from_model(m: &ModelParams) -> Option<Self> {
        Some(RegimeParams {
            n: m.n,
            m1: rat_from_f64(m.m1)?,
            m2: rat_from_f64(m.m2)?,
            l: rat_from_f64(m.production_exponent)?,
            alpha: rat_from_f64(m.alpha)?,
            beta: rat_from_f64(m.beta)?,
            delta: rat_from_f64(m.delta)?,
            tau: m.tau,
            source: m.source,
            chi: m.chi,
            a: m.a,
            b: m.b,
            c: m.c,
            production_scale: m.production_scale,
            measure: m.measure,
        })
    }
}

/// Empirical constants the limit-case inequalities depend on. No closed
/// form exists for them on a general domain; they are supplied by the user
/// and the verdicts are conditional on their values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpaqueConstants {
    /// Interpolation constant coupling the damping integral to the taxis
    /// integral.
    pub c0: f64,
    /// Gagliardo-Nirenberg constant of the domain.
    pub c_gn: f64,
    /// Maximal-regularity constant (enters only parabolic signal runs).
    pub c_p: f64,
    /// Exponent parameter of the boundedness argument.
    pub k_star: f64,
}

impl OpaqueConstants {
    pub fn validate(&self) -> Result<(), RegimeError> {
        let complain = |what: &str| {
            Err(RegimeError::BadConstants {
                detail: what.to_string(),
            })
        };
        if !(self.c0.is_finite() && self.c0 > 0.0) {
            return complain("C0 must be finite and positive");
        }
        if !(self.c_gn.is_finite() && self.c_gn > 0.0) {
            return complain("CGN must be finite and positive");
        }
        if !(self.c_p.is_finite() && self.c_p > 0.0) {
            return complain("CP must be finite and positive");
        }
        if !(self.k_star.is_finite() && self.k_star > 1.0) {
            return complain("k* must be finite and exceed 1");
        }
        Ok(())
    }
}

/// How a parameter point was classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// A strict-threshold boundedness criterion holds.
    BoundedMain,
    /// An exponent sits exactly on a threshold and the compensating
    /// coefficient inequality holds.
    BoundedLimitCase,
    /// A degenerate-coefficient clause (vanishing damping or logistic)
    /// holds.
    BoundedSpecialCase,
    /// No implemented sufficient condition applies.
    OutsideKnownTheory,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::BoundedMain => "bounded (main criterion)",
            Classification::BoundedLimitCase => "bounded (limit case)",
            Classification::BoundedSpecialCase => "bounded (special case)",
            Classification::OutsideKnownTheory => "outside known theory",
        };
        f.write_str(s)
    }
}

/// One side of a traced inequality.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceValue {
    Exact(Rat),
    Approx(f64),
}

impl fmt::Display for TraceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceValue::Exact(r) => f.write_str(&fmt_rat(r)),
            TraceValue::Approx(x) => write!(f, "{x}"),
        }
    }
}

/// One evaluated inequality of a clause.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    /// The inequality in symbols, e.g. `delta > (n(m2-m1+l)+2(m2+l))/2`.
    pub text: String,
    pub lhs: TraceValue,
    pub rhs: TraceValue,
    pub satisfied: bool,
}

impl TraceRow {
    pub(crate) fn exact(text: impl Into<String>, lhs: Rat, rhs: Rat, satisfied: bool) -> Self {
        TraceRow {
            text: text.into(),
            lhs: TraceValue::Exact(lhs),
            rhs: TraceValue::Exact(rhs),
            satisfied,
        }
    }

    pub(crate) fn approx(text: impl Into<String>, lhs: f64, rhs: f64, satisfied: bool) -> Self {
        TraceRow {
            text: text.into(),
            lhs: TraceValue::Approx(lhs),
            rhs: TraceValue::Approx(rhs),
            satisfied,
        }
    }
}

/// Outcome of a regime check: classification, the satisfied clause (or
/// `"none"`), and every inequality that was evaluated on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeVerdict {
    pub classification: Classification,
    pub clause: String,
    pub trace: Vec<TraceRow>,
}

impl RegimeVerdict {
    pub(crate) fn bounded(
        classification: Classification,
        clause: impl Into<String>,
        trace: Vec<TraceRow>,
    ) -> Self {
        RegimeVerdict {
            classification,
            clause: clause.into(),
            trace,
        }
    }

    pub(crate) fn outside(trace: Vec<TraceRow>) -> Self {
        RegimeVerdict {
            classification: Classification::OutsideKnownTheory,
            clause: "none".into(),
            trace,
        }
    }

    /// Structured text report: one line per traced inequality.
    pub fn report(&self) -> String {
        let mut s = format!("classification: {}\nclause: {}\n", self.classification, self.clause);
        for row in &self.trace {
            let mark = if row.satisfied { "ok  " } else { "FAIL" };
            s.push_str(&format!(
                "  [{mark}] {}: lhs = {}, rhs = {}\n",
                row.text, row.lhs, row.rhs
            ));
        }
        s
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RegimeError {
    #[error("clause applies to the other damping family")]
    WrongFamily,
    #[error("parameters are not at a limit threshold: {detail}")]
    NotAtLimit { detail: String },
    #[error("limit-case check requires the interpolation constants")]
    MissingConstants,
    #[error("this clause requires a mass bound, none was supplied")]
    MissingMassBound,
    #[error("mass bound undefined: {detail}")]
    MassBoundUndefined { detail: String },
    #[error("degenerate exponent expression at k = {k}: {detail}", k = fmt_rat(.k))]
    DegenerateExponent { k: Rat, detail: String },
    #[error("invalid constants: {detail}")]
    BadConstants { detail: String },
    #[error("no special-case clause matches these coefficients: {detail}")]
    ScenarioMismatch { detail: String },
}
