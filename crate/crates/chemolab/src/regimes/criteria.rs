//! The boundedness criteria: main strict-threshold checks, limit-case
//! coefficient inequalities, degenerate-coefficient special cases, and the
//! mass bounds.

use num::One;

use super::{
    Classification, OpaqueConstants, RegimeError, RegimeParams, RegimeVerdict, TraceRow,
};
use crate::model::{SourceKind, Tau};
use crate::rational::{fmt_rat, rat, rat_int, rat_max, rat_to_f64, Rat};

/// `(n(m2 - m1 + l) + 2(m2 + l))/2`: the damping exponent threshold of the
/// nonlocal family's main criterion.
pub fn nonlocal_delta_threshold(p: &RegimeParams) -> Rat {
    let n = rat_int(p.n as i64);
    let m2l = &p.m2 + &p.l;
    (n * (&p.m2 - &p.m1 + &p.l) + rat_int(2) * &m2l) / rat_int(2)
}

/// `(n(m2 - m1 + l) + 2(m2 + l - alpha))/2`: beta must dominate this to
/// control the taxis terms in the gradient family.
pub fn gradient_taxis_threshold(p: &RegimeParams) -> Rat {
    let n = rat_int(p.n as i64);
    let m2l = &p.m2 + &p.l;
    (n * (&p.m2 - &p.m1 + &p.l) + rat_int(2) * (&m2l - &p.alpha)) / rat_int(2)
}

/// `n(alpha - m1)/2`: beta must dominate this to control the growth term in
/// the gradient family.
pub fn gradient_growth_threshold(p: &RegimeParams) -> Rat {
    rat_int(p.n as i64) * (&p.alpha - &p.m1) / rat_int(2)
}

/// `n(m2 + l)/(n + 1)`: delta threshold tied to taxis and production.
pub fn gradient_delta_production_threshold(p: &RegimeParams) -> Rat {
    rat_int(p.n as i64) * (&p.m2 + &p.l) / rat_int(p.n as i64 + 1)
}

/// `n alpha/(n + 1)`: delta threshold tied to the growth exponent.
pub fn gradient_delta_growth_threshold(p: &RegimeParams) -> Rat {
    rat_int(p.n as i64) * &p.alpha / rat_int(p.n as i64 + 1)
}

/// `tau CP^e + (1 - tau)` for tau in {0, 1}.
fn tau_blend(tau: Tau, c_p: f64, exponent: f64) -> f64 {
    match tau {
        Tau::Elliptic => 1.0,
        Tau::Parabolic => c_p.powf(exponent),
    }
}

fn positive_divisor(value: f64, what: &str) -> Result<f64, RegimeError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(RegimeError::BadConstants {
            detail: format!("{what} must be positive, got {value}"),
        })
    }
}

struct Rows(Vec<TraceRow>);

impl Rows {
    fn new() -> Self {
        Rows(Vec::new())
    }

    fn gt(&mut self, text: &str, lhs: &Rat, rhs: Rat) -> bool {
        let ok = *lhs > rhs;
        self.0.push(TraceRow::exact(text, lhs.clone(), rhs, ok));
        ok
    }

    fn ge(&mut self, text: &str, lhs: &Rat, rhs: Rat) -> bool {
        let ok = *lhs >= rhs;
        self.0.push(TraceRow::exact(text, lhs.clone(), rhs, ok));
        ok
    }

    fn le(&mut self, text: &str, lhs: &Rat, rhs: Rat) -> bool {
        let ok = *lhs <= rhs;
        self.0.push(TraceRow::exact(text, lhs.clone(), rhs, ok));
        ok
    }

    fn lt(&mut self, text: &str, lhs: &Rat, rhs: Rat) -> bool {
        let ok = *lhs < rhs;
        self.0.push(TraceRow::exact(text, lhs.clone(), rhs, ok));
        ok
    }

    fn eq(&mut self, text: &str, lhs: &Rat, rhs: Rat) -> bool {
        let ok = *lhs == rhs;
        self.0.push(TraceRow::exact(text, lhs.clone(), rhs.clone(), ok));
        ok
    }

    fn coeff_gt(&mut self, text: &str, lhs: f64, rhs: f64) -> bool {
        let ok = lhs > rhs;
        self.0.push(TraceRow::approx(text, lhs, rhs, ok));
        ok
    }

    fn coeff_ge(&mut self, text: &str, lhs: f64, rhs: f64) -> bool {
        let ok = lhs >= rhs;
        self.0.push(TraceRow::approx(text, lhs, rhs, ok));
        ok
    }

    fn coeff_lt(&mut self, text: &str, lhs: f64, rhs: f64) -> bool {
        let ok = lhs < rhs;
        self.0.push(TraceRow::approx(text, lhs, rhs, ok));
        ok
    }

    fn coeff_eq(&mut self, text: &str, lhs: f64, rhs: f64) -> bool {
        let ok = lhs == rhs;
        self.0.push(TraceRow::approx(text, lhs, rhs, ok));
        ok
    }
}

fn nonlocal_hypotheses(p: &RegimeParams, rows: &mut Rows) -> bool {
    let mut ok = rows.coeff_gt("chi > 0", p.chi, 0.0);
    ok &= rows.coeff_gt("a > 0", p.a, 0.0);
    ok &= rows.coeff_gt("b > 0", p.b, 0.0);
    ok &= rows.coeff_gt("c > 0", p.c, 0.0);
    ok &= rows.ge("alpha >= 1", &p.alpha, Rat::one());
    ok &= rows.gt("beta > alpha", &p.beta, p.alpha.clone());
    ok &= rows.ge(
        "delta >= max(1, m1)",
        &p.delta,
        rat_max(&Rat::one(), &p.m1),
    );
    ok
}

fn gradient_hypotheses(p: &RegimeParams, rows: &mut Rows) -> bool {
    let mut ok = rows.coeff_gt("chi > 0", p.chi, 0.0);
    ok &= rows.coeff_gt("a > 0", p.a, 0.0);
    ok &= rows.coeff_gt("b > 0", p.b, 0.0);
    ok &= rows.coeff_ge("c >= 0", p.c, 0.0);
    ok &= rows.ge("alpha >= 1", &p.alpha, Rat::one());
    ok &= rows.ge(
        "beta >= max(1, m1 - alpha)",
        &p.beta,
        rat_max(&Rat::one(), &(&p.m1 - &p.alpha)),
    );
    ok &= rows.ge("delta >= 1", &p.delta, Rat::one());
    ok &= rows.le("delta <= 2", &p.delta, rat_int(2));
    ok
}

/// Main criterion of the nonlocal family: under the standing hypotheses,
/// boundedness holds for `delta > (n(m2-m1+l)+2(m2+l))/2` (strict).
pub fn check_main_nonlocal(p: &RegimeParams) -> Result<RegimeVerdict, RegimeError> {
    if p.source != SourceKind::NonlocalDamping {
        return Err(RegimeError::WrongFamily);
    }
    let mut rows = Rows::new();
    let hyp = nonlocal_hypotheses(p, &mut rows);
    let main = rows.gt(
        "delta > (n(m2-m1+l) + 2(m2+l))/2",
        &p.delta,
        nonlocal_delta_threshold(p),
    );
    Ok(if hyp && main {
        RegimeVerdict::bounded(Classification::BoundedMain, "nonlocal/main", rows.0)
    } else {
        RegimeVerdict::outside(rows.0)
    })
}

/// Limit case of the nonlocal family: delta exactly at the threshold,
/// boundedness bought by largeness of c.
pub fn check_limit_nonlocal(
    p: &RegimeParams,
    consts: &OpaqueConstants,
) -> Result<RegimeVerdict, RegimeError> {
    if p.source != SourceKind::NonlocalDamping {
        return Err(RegimeError::WrongFamily);
    }
    consts.validate()?;
    let threshold = nonlocal_delta_threshold(p);
    if p.delta != threshold {
        return Err(RegimeError::NotAtLimit {
            detail: format!(
                "delta = {} but the threshold is {}",
                fmt_rat(&p.delta),
                fmt_rat(&threshold)
            ),
        });
    }

    let mut rows = Rows::new();
    let mut hyp = rows.coeff_gt("chi > 0", p.chi, 0.0);
    hyp &= rows.coeff_gt("a > 0", p.a, 0.0);
    hyp &= rows.coeff_gt("b > 0", p.b, 0.0);
    hyp &= rows.ge("alpha >= 1", &p.alpha, Rat::one());
    hyp &= rows.gt("beta > alpha", &p.beta, p.alpha.clone());
    hyp &= rows.ge("delta >= max(1, m1)", &p.delta, rat_max(&Rat::one(), &p.m1));
    rows.eq("delta = (n(m2-m1+l) + 2(m2+l))/2", &p.delta, threshold);

    let ks = consts.k_star;
    let m2 = rat_to_f64(&p.m2);
    let l = rat_to_f64(&p.l);
    let delta = rat_to_f64(&p.delta);
    let taxis_den = positive_divisor(ks + m2 - 1.0, "k* + m2 - 1")?;
    let cp_den = positive_divisor(ks + m2 + l - 1.0, "k* + m2 + l - 1")?;
    let rhs = 2f64.powf(delta - 1.0) * (ks - 1.0) * p.chi * p.production_scale * consts.c0
        / taxis_den
        * tau_blend(p.tau, consts.c_p, l / cp_den);
    let main = rows.coeff_gt(
        "c > 2^(delta-1) (k*-1) chi K C0 / (k*+m2-1) * (tau CP^(l/(k*+m2+l-1)) + (1-tau))",
        p.c,
        rhs,
    );

    Ok(if hyp && main {
        RegimeVerdict::bounded(Classification::BoundedLimitCase, "nonlocal/limit", rows.0)
    } else {
        RegimeVerdict::outside(rows.0)
    })
}

/// Main criterion of the gradient family: three alternative branches, all
/// evaluated into the trace; verdict names the first satisfied one.
pub fn check_main_gradient(p: &RegimeParams) -> Result<RegimeVerdict, RegimeError> {
    if p.source != SourceKind::GradientDamping {
        return Err(RegimeError::WrongFamily);
    }
    let mut rows = Rows::new();
    let hyp = gradient_hypotheses(p, &mut rows);
    let t_taxis = gradient_taxis_threshold(p);
    let t_growth = gradient_growth_threshold(p);

    let b1 = rows.coeff_eq("branch 1: c = 0", p.c, 0.0)
        & rows.gt(
            "branch 1: beta > max((n(m2-m1+l)+2(m2+l-alpha))/2, n(alpha-m1)/2)",
            &p.beta,
            rat_max(&t_taxis, &t_growth),
        );
    let b2 = rows.coeff_gt("branch 2: c > 0", p.c, 0.0)
        & rows.gt("branch 2: beta > n(alpha-m1)/2", &p.beta, t_growth.clone())
        & rows.gt(
            "branch 2: delta > n(m2+l)/(n+1)",
            &p.delta,
            gradient_delta_production_threshold(p),
        );
    let b3 = rows.coeff_gt("branch 3: c > 0", p.c, 0.0)
        & rows.gt(
            "branch 3: beta > (n(m2-m1+l)+2(m2+l-alpha))/2",
            &p.beta,
            t_taxis.clone(),
        )
        & rows.gt(
            "branch 3: delta > n alpha/(n+1)",
            &p.delta,
            gradient_delta_growth_threshold(p),
        );

    let clause = if b1 {
        Some("gradient/main-1")
    } else if b2 {
        Some("gradient/main-2")
    } else if b3 {
        Some("gradient/main-3")
    } else {
        None
    };
    Ok(match clause {
        Some(clause) if hyp => {
            RegimeVerdict::bounded(Classification::BoundedMain, clause, rows.0)
        }
        _ => RegimeVerdict::outside(rows.0),
    })
}

/// Limit cases of the gradient family. With c = 0 the three beta-equality
/// branches trade boundedness for a coefficient inequality on b or a; with
/// c > 0 the two delta-equality branches require largeness of c and consume
/// the mass bound.
pub fn check_limit_gradient(
    p: &RegimeParams,
    consts: &OpaqueConstants,
    mass_bound: Option<f64>,
) -> Result<RegimeVerdict, RegimeError> {
    if p.source != SourceKind::GradientDamping {
        return Err(RegimeError::WrongFamily);
    }
    consts.validate()?;

    let mut rows = Rows::new();
    let hyp = gradient_hypotheses(p, &mut rows);

    let t_taxis = gradient_taxis_threshold(p);
    let t_growth = gradient_growth_threshold(p);
    let ks = consts.k_star;
    let m2 = rat_to_f64(&p.m2);
    let l = rat_to_f64(&p.l);
    let alpha = rat_to_f64(&p.alpha);
    let beta = rat_to_f64(&p.beta);
    let delta = rat_to_f64(&p.delta);
    let h_lin = if p.alpha == Rat::one() { 1.0 } else { 0.0 };
    let tau_f = p.tau.factor();

    if p.c == 0.0 {
        let at_taxis = p.beta == t_taxis;
        let at_growth = p.beta == t_growth;
        let (clause, main) = if at_taxis && at_growth {
            rows.eq(
                "beta = (n(m2-m1+l)+2(m2+l-alpha))/2 = n(alpha-m1)/2",
                &p.beta,
                t_taxis.clone(),
            );
            let taxis_den = positive_divisor(ks + m2 - 1.0, "k* + m2 - 1")?;
            let cp_den = positive_divisor(ks + m2 + l - 1.0, "k* + m2 + l - 1")?;
            let rhs = 2f64.powf(alpha + beta - 2.0)
                * consts.c0
                * ((ks - 1.0) * p.chi * p.production_scale / taxis_den
                    * tau_blend(p.tau, consts.c_p, l / cp_den)
                    + p.a
                    + p.b * p.measure
                    + tau_f * h_lin / ks);
            let ok = rows.coeff_gt(
                "b > 2^(alpha+beta-2) C0 [ (k*-1) chi K/(k*+m2-1) (tau CP^(l/(k*+m2+l-1)) + (1-tau)) + a + b|Omega| + tau H/k* ]",
                p.b,
                rhs,
            );
            ("gradient/limit-c", ok)
        } else if at_taxis {
            rows.eq(
                "beta = (n(m2-m1+l)+2(m2+l-alpha))/2",
                &p.beta,
                t_taxis.clone(),
            );
            let side = rows.gt(
                "(n(m2-m1+l)+2(m2+l-alpha))/2 > n(alpha-m1)/2",
                &t_taxis,
                t_growth.clone(),
            );
            let taxis_den = positive_divisor(ks + m2 - 1.0, "k* + m2 - 1")?;
            let cp_den = positive_divisor(ks + m2 + l - 1.0, "k* + m2 + l - 1")?;
            let rhs = 2f64.powf(alpha + beta - 2.0) * (ks - 1.0) * p.chi * p.production_scale
                * consts.c0
                / taxis_den
                * tau_blend(p.tau, consts.c_p, l / cp_den);
            let ok = rows.coeff_gt(
                "b > 2^(alpha+beta-2) (k*-1) chi K C0/(k*+m2-1) (tau CP^(l/(k*+m2+l-1)) + (1-tau))",
                p.b,
                rhs,
            );
            ("gradient/limit-a", side && ok)
        } else if at_growth {
            rows.eq("beta = n(alpha-m1)/2", &p.beta, t_growth.clone());
            let side = rows.gt(
                "n(alpha-m1)/2 > (n(m2-m1+l)+2(m2+l-alpha))/2",
                &t_growth,
                t_taxis.clone(),
            );
            let rhs = p.b / (consts.c0 * 2f64.powf(alpha + beta - 2.0))
                - tau_f * h_lin / ks
                - p.b * p.measure;
            let positive = rows.coeff_gt(
                "b/(C0 2^(alpha+beta-2)) - tau H/k* - b|Omega| > 0",
                rhs,
                0.0,
            );
            let ok = rows.coeff_lt(
                "a < b/(C0 2^(alpha+beta-2)) - tau H/k* - b|Omega|",
                p.a,
                rhs,
            );
            ("gradient/limit-b", side && positive && ok)
        } else {
            return Err(RegimeError::NotAtLimit {
                detail: format!(
                    "c = 0 but beta = {} matches neither threshold ({} and {})",
                    fmt_rat(&p.beta),
                    fmt_rat(&t_taxis),
                    fmt_rat(&t_growth)
                ),
            });
        };
        return Ok(if hyp && main {
            RegimeVerdict::bounded(Classification::BoundedLimitCase, clause, rows.0)
        } else {
            RegimeVerdict::outside(rows.0)
        });
    }

    if p.c < 0.0 {
        return Err(RegimeError::NotAtLimit {
            detail: "c is negative".into(),
        });
    }

    let at_production = p.delta == gradient_delta_production_threshold(p);
    let at_growth_delta = p.delta == gradient_delta_growth_threshold(p);
    if !at_production && !at_growth_delta {
        return Err(RegimeError::NotAtLimit {
            detail: format!(
                "c > 0 but delta = {} matches neither n(m2+l)/(n+1) = {} nor n alpha/(n+1) = {}",
                fmt_rat(&p.delta),
                fmt_rat(&gradient_delta_production_threshold(p)),
                fmt_rat(&gradient_delta_growth_threshold(p))
            ),
        });
    }
    let m1_mass = mass_bound.ok_or(RegimeError::MissingMassBound)?;

    let mut clause = None;
    if at_production {
        rows.eq(
            "delta = n(m2+l)/(n+1)",
            &p.delta,
            gradient_delta_production_threshold(p),
        );
        let side = rows.gt("beta > n(alpha-m1)/2", &p.beta, t_growth.clone());
        let taxis_den = positive_divisor(ks + m2 - 1.0, "k* + m2 - 1")?;
        let cp_den = positive_divisor(ks + m2 + l - 1.0, "k* + m2 + l - 1")?;
        let kd = ks - 1.0 + delta;
        let rhs = (ks - 1.0) * p.chi * p.production_scale / taxis_den
            * (2.0 * consts.c_gn).powf(delta * cp_den / kd)
            * (m1_mass + p.measure).powf((m2 + l) / (p.n as f64 + 1.0))
            * (kd / delta).powf(delta)
            * tau_blend(p.tau, consts.c_p, l / cp_den);
        let ok = rows.coeff_gt(
            "c > (k*-1) chi K/(k*+m2-1) (2CGN)^(delta(k*+m2+l-1)/(k*-1+delta)) (M1+|Omega|)^((m2+l)/(n+1)) ((k*-1+delta)/delta)^delta (tau CP^(l/(k*+m2+l-1)) + (1-tau))",
            p.c,
            rhs,
        );
        if side && ok {
            clause = Some("gradient/limit-d1");
        }
    }
    if at_growth_delta && clause.is_none() {
        rows.eq(
            "delta = n alpha/(n+1)",
            &p.delta,
            gradient_delta_growth_threshold(p),
        );
        let side = rows.gt(
            "beta > (n(m2-m1+l)+2(m2+l-alpha))/2",
            &p.beta,
            t_taxis.clone(),
        );
        let sigma_den = positive_divisor(ks - 1.0 + delta, "k* - 1 + delta")?;
        let rhs = (p.a + p.b * p.measure)
            * (2.0 * consts.c_gn).powf(delta * (ks + alpha - 1.0) / sigma_den)
            * (m1_mass + p.measure).powf(alpha / (p.n as f64 + 1.0))
            * (sigma_den / delta).powf(delta);
        let ok = rows.coeff_gt(
            "c > (a + b|Omega|) (2CGN)^(delta(k*+alpha-1)/(k*-1+delta)) (M1+|Omega|)^(alpha/(n+1)) ((k*-1+delta)/delta)^delta",
            p.c,
            rhs,
        );
        if side && ok {
            clause = Some("gradient/limit-d2");
        }
    }

    Ok(match clause {
        Some(clause) if hyp => {
            RegimeVerdict::bounded(Classification::BoundedLimitCase, clause, rows.0)
        }
        _ => RegimeVerdict::outside(rows.0),
    })
}

/// `((k-1)/k)_+ chi K (tau CP^(1/(k+1)) + (1-tau))`: the b-threshold of the
/// linear no-nonlocal-term clause, parameterized in k. The published
/// condition corresponds to k = n/2, where the prefactor becomes
/// `(n-2)_+/n`.
pub fn linear_no_nonlocal_threshold(
    k: f64,
    chi: f64,
    production_scale: f64,
    tau: Tau,
    c_p: f64,
) -> f64 {
    ((k - 1.0) / k).max(0.0) * chi * production_scale * tau_blend(tau, c_p, 1.0 / (k + 1.0))
}

/// Mass bound of the nonlocal family:
/// `M0 = max{ initial mass, (a/b |Omega|^(beta-alpha))^(1/(beta-alpha)) }`.
pub fn mass_bound_nonlocal(p: &RegimeParams, initial_mass: f64) -> Result<f64, RegimeError> {
    if p.beta <= p.alpha {
        return Err(RegimeError::MassBoundUndefined {
            detail: "requires beta > alpha".into(),
        });
    }
    if p.b <= 0.0 {
        return Err(RegimeError::MassBoundUndefined {
            detail: "requires b > 0".into(),
        });
    }
    let gap = rat_to_f64(&(&p.beta - &p.alpha));
    let equilibrium = (p.a / p.b * p.measure.powf(gap)).powf(1.0 / gap);
    Ok(initial_mass.max(equilibrium))
}

/// Mass bound of the gradient family:
/// `M1 = max{ initial mass, (a/(b |Omega|^(1-beta)))^(1/beta) }`.
pub fn mass_bound_gradient(p: &RegimeParams, initial_mass: f64) -> Result<f64, RegimeError> {
    if !num::Signed::is_positive(&p.beta) {
        return Err(RegimeError::MassBoundUndefined {
            detail: "requires beta > 0".into(),
        });
    }
    if p.b <= 0.0 {
        return Err(RegimeError::MassBoundUndefined {
            detail: "requires b > 0".into(),
        });
    }
    let beta = rat_to_f64(&p.beta);
    let equilibrium = (p.a / (p.b * p.measure.powf(1.0 - beta))).powf(1.0 / beta);
    Ok(initial_mass.max(equilibrium))
}

/// Degenerate-coefficient clauses: systems with no reaction at all, the
/// nonlocal family without its nonlocal term, and the gradient family with
/// or without its gradient term.
///
/// `mass_bound` feeds the critical no-logistic chi-inequality (where mass is
/// conserved, so the initial mass is the natural bound).
pub fn check_special_cases(
    p: &RegimeParams,
    consts: Option<&OpaqueConstants>,
    mass_bound: Option<f64>,
) -> Result<RegimeVerdict, RegimeError> {
    if p.a < 0.0 || p.b < 0.0 || p.c < 0.0 {
        return Err(RegimeError::ScenarioMismatch {
            detail: "negative coefficients".into(),
        });
    }
    if let Some(consts) = consts {
        consts.validate()?;
    }
    let two_over_n = rat(2, p.n as i64);
    let m2l = &p.m2 + &p.l;

    if p.a == 0.0 && p.b == 0.0 && p.c == 0.0 {
        // no reaction: boundedness from subcritical aggregation exponents
        let mut rows = Rows::new();
        let hyp = rows.coeff_gt("chi > 0", p.chi, 0.0);
        let subcritical_rhs = &p.m1 + &two_over_n;
        if rows.lt("m2 + l < m1 + 2/n", &m2l, subcritical_rhs.clone()) {
            return Ok(if hyp {
                RegimeVerdict::bounded(
                    Classification::BoundedSpecialCase,
                    "no-logistic/subcritical",
                    rows.0,
                )
            } else {
                RegimeVerdict::outside(rows.0)
            });
        }
        if m2l == subcritical_rhs {
            rows.eq("m2 + l = m1 + 2/n", &m2l, subcritical_rhs);
            let consts = consts.ok_or(RegimeError::MissingConstants)?;
            let m0 = mass_bound.ok_or(RegimeError::MissingMassBound)?;
            let ks = consts.k_star;
            let m1 = rat_to_f64(&p.m1);
            let m2 = rat_to_f64(&p.m2);
            let l = rat_to_f64(&p.l);
            let n = p.n as f64;
            let taxis_num = positive_divisor(ks + m2 - 1.0, "k* + m2 - 1")?;
            let diff_den = positive_divisor(ks + m1 - 1.0, "k* + m1 - 1")?;
            let crit = positive_divisor(ks + m1 + 2.0 / n - 1.0, "k* + m1 + 2/n - 1")?;
            let rhs = 4.0 * taxis_num / (p.production_scale * diff_den * diff_den)
                * (2.0 * consts.c_gn).powf(-2.0 * crit / diff_den)
                * (m0 + p.measure).powf(-2.0 / n)
                * tau_blend(p.tau, consts.c_p, -l / crit);
            let ok = rows.coeff_lt(
                "chi < 4(k*+m2-1)/(K (k*+m1-1)^2) (2CGN)^(-2(k*+m1+2/n-1)/(k*+m1-1)) (M0+|Omega|)^(-2/n) (tau CP^(-l/(k*+m1+2/n-1)) + (1-tau))",
                p.chi,
                rhs,
            );
            return Ok(if hyp && ok {
                RegimeVerdict::bounded(
                    Classification::BoundedSpecialCase,
                    "no-logistic/critical-chi",
                    rows.0,
                )
            } else {
                RegimeVerdict::outside(rows.0)
            });
        }
        return Ok(RegimeVerdict::outside(rows.0));
    }

    match p.source {
        SourceKind::NonlocalDamping if p.c == 0.0 => {
            let mut rows = Rows::new();
            let mut hyp = rows.coeff_gt("chi > 0", p.chi, 0.0);
            hyp &= rows.coeff_gt("a > 0", p.a, 0.0);
            hyp &= rows.coeff_gt("b > 0", p.b, 0.0);
            hyp &= rows.ge("alpha >= 1", &p.alpha, Rat::one());
            hyp &= rows.gt("beta > alpha", &p.beta, p.alpha.clone());

            if rows.gt("beta > m2 + l", &p.beta, m2l.clone()) {
                return Ok(if hyp {
                    RegimeVerdict::bounded(
                        Classification::BoundedSpecialCase,
                        "nonlocal/no-nonlocal",
                        rows.0,
                    )
                } else {
                    RegimeVerdict::outside(rows.0)
                });
            }
            if p.beta != m2l {
                return Ok(RegimeVerdict::outside(rows.0));
            }
            rows.eq("beta = m2 + l", &p.beta, m2l);

            // critical case: largeness of b, general form first
            if let Some(consts) = consts {
                let ks = consts.k_star;
                let m2 = rat_to_f64(&p.m2);
                let l = rat_to_f64(&p.l);
                let beta = rat_to_f64(&p.beta);
                let taxis_den = positive_divisor(ks + m2 - 1.0, "k* + m2 - 1")?;
                let cp_den = positive_divisor(ks + beta - 1.0, "k* + beta - 1")?;
                let rhs = 2f64.powf(beta - 1.0) * (ks - 1.0) * p.chi * p.production_scale
                    / taxis_den
                    * tau_blend(p.tau, consts.c_p, l / cp_den);
                let ok = rows.coeff_gt(
                    "b > 2^(beta-1) (k*-1) chi K/(k*+m2-1) (tau CP^(l/(k*+beta-1)) + (1-tau))",
                    p.b,
                    rhs,
                );
                if hyp && ok {
                    return Ok(RegimeVerdict::bounded(
                        Classification::BoundedSpecialCase,
                        "nonlocal/no-nonlocal-critical",
                        rows.0,
                    ));
                }
            }

            // fully linear specialization, sharper than the general form
            let linear = p.m1 == Rat::one()
                && p.m2 == Rat::one()
                && p.l == Rat::one()
                && p.alpha == Rat::one()
                && p.beta == rat_int(2);
            if linear {
                let c_p = match (p.tau, consts) {
                    (Tau::Elliptic, _) => 1.0,
                    (Tau::Parabolic, Some(c)) => c.c_p,
                    (Tau::Parabolic, None) => return Err(RegimeError::MissingConstants),
                };
                let rhs = linear_no_nonlocal_threshold(
                    p.n as f64 / 2.0,
                    p.chi,
                    p.production_scale,
                    p.tau,
                    c_p,
                );
                let ok = rows.coeff_gt(
                    "b > (n-2)+ chi K/n (tau CP^(1/(n/2+1)) + (1-tau))",
                    p.b,
                    rhs,
                );
                if hyp && ok {
                    return Ok(RegimeVerdict::bounded(
                        Classification::BoundedSpecialCase,
                        "nonlocal/no-nonlocal-linear",
                        rows.0,
                    ));
                }
            } else if consts.is_none() {
                return Err(RegimeError::MissingConstants);
            }
            Ok(RegimeVerdict::outside(rows.0))
        }
        SourceKind::NonlocalDamping => Err(RegimeError::ScenarioMismatch {
            detail: "nonlocal damping with c > 0 is covered by the main and limit criteria".into(),
        }),
        SourceKind::GradientDamping if p.c == 0.0 => {
            let mut rows = Rows::new();
            let mut hyp = rows.coeff_gt("chi > 0", p.chi, 0.0);
            hyp &= rows.coeff_gt("a > 0", p.a, 0.0);
            hyp &= rows.coeff_gt("b > 0", p.b, 0.0);

            if p.tau == Tau::Elliptic {
                let mut ok = rows.ge("alpha >= 1", &p.alpha, Rat::one());
                ok &= rows.ge("beta >= 1", &p.beta, Rat::one());
                ok &= rows.gt(
                    "m1 > max(alpha - 2/n, m2 + l - 2/n)",
                    &p.m1,
                    rat_max(&(&p.alpha - &two_over_n), &(&m2l - &two_over_n)),
                );
                if hyp && ok {
                    return Ok(RegimeVerdict::bounded(
                        Classification::BoundedSpecialCase,
                        "gradient/no-gradient",
                        rows.0,
                    ));
                }
            }

            // linear diffusion and sensitivity at the growth-threshold limit:
            // the a < b/C0 reduction
            let growth_threshold = gradient_growth_threshold(p);
            let lin = p.m1 == Rat::one()
                && p.m2 == Rat::one()
                && p.beta == growth_threshold
                && growth_threshold > gradient_taxis_threshold(p);
            if lin {
                rows.eq("beta = n(alpha-1)/2", &p.beta, growth_threshold.clone());
                rows.gt(
                    "n(alpha-1)/2 > (nl + 2(1+l-alpha))/2",
                    &growth_threshold,
                    gradient_taxis_threshold(p),
                );
                let consts = consts.ok_or(RegimeError::MissingConstants)?;
                let ok = rows.coeff_lt("a < b/C0", p.a, p.b / consts.c0);
                if hyp && ok {
                    return Ok(RegimeVerdict::bounded(
                        Classification::BoundedSpecialCase,
                        "gradient/limit-b-linear",
                        rows.0,
                    ));
                }
            }
            if p.tau == Tau::Parabolic && !lin {
                return Err(RegimeError::ScenarioMismatch {
                    detail: "gradient family with c = 0 and a parabolic signal has no \
                             special-case clause away from the linear limit"
                        .into(),
                });
            }
            Ok(RegimeVerdict::outside(rows.0))
        }
        SourceKind::GradientDamping => {
            let mut rows = Rows::new();
            let mut hyp = rows.coeff_gt("chi > 0", p.chi, 0.0);
            hyp &= rows.coeff_gt("a > 0", p.a, 0.0);
            hyp &= rows.coeff_gt("b > 0", p.b, 0.0);
            hyp &= rows.coeff_gt("c > 0", p.c, 0.0);

            let d_production = gradient_delta_production_threshold(p);
            let d_growth = gradient_delta_growth_threshold(p);

            let c1 = rows.ge("clause 1: alpha >= 1", &p.alpha, Rat::one())
                & rows.ge("clause 1: beta >= 1", &p.beta, Rat::one())
                & rows.gt(
                    "clause 1: delta > max(n alpha/(n+1), n(m2+l)/(n+1))",
                    &p.delta,
                    rat_max(&d_growth, &d_production),
                )
                & rows.le("clause 1: delta <= 2", &p.delta, rat_int(2));
            if hyp && c1 {
                return Ok(RegimeVerdict::bounded(
                    Classification::BoundedSpecialCase,
                    "gradient/with-gradient-1",
                    rows.0,
                ));
            }
            let c2 = rows.ge("clause 2: alpha >= 1", &p.alpha, Rat::one())
                & rows.lt(
                    "clause 2: alpha < m1 + 2/n",
                    &p.alpha,
                    &p.m1 + &two_over_n,
                )
                & rows.ge("clause 2: beta >= 1", &p.beta, Rat::one())
                & rows.gt(
                    "clause 2: delta > n(m2+l)/(n+1)",
                    &p.delta,
                    d_production.clone(),
                )
                & rows.le("clause 2: delta <= 2", &p.delta, rat_int(2));
            if hyp && c2 {
                return Ok(RegimeVerdict::bounded(
                    Classification::BoundedSpecialCase,
                    "gradient/with-gradient-2",
                    rows.0,
                ));
            }
            Ok(RegimeVerdict::outside(rows.0))
        }
    }
}
