//! Interpolation exponents theta_i(k), sigma_i(k) and their validity flags,
//! all in exact rational arithmetic.

use num::{One, Signed, Zero};

use super::{RegimeError, RegimeParams};
use crate::rational::{rat, rat_int, Rat};

/// The seven exponents at a given k, the three combined ratios the
/// boundedness argument actually consumes, and the validity flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Exponents {
    pub theta1: Rat,
    pub theta2: Rat,
    pub theta3: Rat,
    pub theta4: Rat,
    pub sigma1: Rat,
    pub sigma2: Rat,
    pub sigma3: Rat,
    /// sigma1 theta1 / 2
    pub sigma1_theta1_half: Rat,
    /// sigma2 theta2 / delta
    pub sigma2_theta2_delta: Rat,
    /// sigma3 theta3 / delta
    pub sigma3_theta3_delta: Rat,
    pub flags: ExponentFlags,
}

/// Which of the structural requirements on the exponents hold at this k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentFlags {
    pub theta1_in_unit: bool,
    pub theta2_in_unit: bool,
    pub theta3_in_unit: bool,
    pub theta4_in_unit: bool,
    /// sigma1 theta1 / 2 > 0
    pub sigma1_ratio_positive: bool,
    /// sigma2 theta2 / delta in (0,1); attainable only for delta > n alpha/(n+1)
    pub sigma2_ratio_in_unit: bool,
    /// sigma3 theta3 / delta in (0,1); attainable only for delta > n(m2+l)/(n+1)
    pub sigma3_ratio_in_unit: bool,
}

impl ExponentFlags {
    pub fn all(&self) -> bool {
        self.theta1_in_unit
            && self.theta2_in_unit
            && self.theta3_in_unit
            && self.theta4_in_unit
            && self.sigma1_ratio_positive
            && self.sigma2_ratio_in_unit
            && self.sigma3_ratio_in_unit
    }

    /// The flags that hold for every admissible parameter set once k is
    /// large enough, regardless of where delta sits relative to the
    /// production thresholds.
    pub fn unconditional(&self) -> bool {
        self.theta1_in_unit
            && self.theta2_in_unit
            && self.theta3_in_unit
            && self.theta4_in_unit
            && self.sigma1_ratio_positive
    }
}

fn in_unit(x: &Rat) -> bool {
    x.is_positive() && *x < Rat::one()
}

/// Evaluates all exponents at rational k > 1.
///
/// Fails with a domain error when any defining denominator vanishes at this
/// k (for example k + m1 - 1 = 0), which can happen for strongly degenerate
/// diffusion exponents at small k.
pub fn exponents(k: &Rat, p: &RegimeParams) -> Result<Exponents, RegimeError> {
    let one = Rat::one();
    if *k <= one {
        return Err(RegimeError::DegenerateExponent {
            k: k.clone(),
            detail: "k must exceed 1".into(),
        });
    }
    let half = rat(1, 2);
    let n_inv = rat(1, p.n as i64);
    let delta = &p.delta;
    let m2l = &p.m2 + &p.l;

    let check = |value: Rat, what: &str| -> Result<Rat, RegimeError> {
        if value.is_zero() {
            Err(RegimeError::DegenerateExponent {
                k: k.clone(),
                detail: format!("{what} vanishes"),
            })
        } else {
            Ok(value)
        }
    };

    let km1 = check(k + &p.m1 - &one, "k + m1 - 1")?;
    let ka = check(k + &p.alpha - &one, "k + alpha - 1")?;
    let kml = check(k + &m2l - &one, "k + m2 + l - 1")?;
    let kd = check(k - &one + delta, "k - 1 + delta")?;

    // a = (k + m1 - 1)/2 appears in theta1 and theta4
    let a_half = &km1 * &half;
    let theta14_den = check(&a_half - &half + &n_inv, "(k+m1-1)/2 - 1/2 + 1/n")?;
    let theta1 = (&a_half - &a_half / k) / &theta14_den;
    let theta4 = (&a_half - &half) / &theta14_den;

    // b = (k - 1 + delta)/delta appears in theta2 and theta3
    let b_over_delta = &kd / delta;
    let theta23_den = check(
        &b_over_delta - &(&one / delta) + &n_inv,
        "(k-1+delta)/delta - 1/delta + 1/n",
    )?;
    let theta2 = (&b_over_delta - &b_over_delta / &ka) / &theta23_den;
    let theta3 = (&b_over_delta - &b_over_delta / &kml) / &theta23_den;

    let sigma1 = rat_int(2) * k / &km1;
    let sigma2 = delta * &ka / &kd;
    let sigma3 = delta * &kml / &kd;

    let sigma1_theta1_half = &sigma1 * &theta1 * half;
    let sigma2_theta2_delta = &sigma2 * &theta2 / delta;
    let sigma3_theta3_delta = &sigma3 * &theta3 / delta;

    let flags = ExponentFlags {
        theta1_in_unit: in_unit(&theta1),
        theta2_in_unit: in_unit(&theta2),
        theta3_in_unit: in_unit(&theta3),
        theta4_in_unit: in_unit(&theta4),
        sigma1_ratio_positive: sigma1_theta1_half.is_positive(),
        sigma2_ratio_in_unit: in_unit(&sigma2_theta2_delta),
        sigma3_ratio_in_unit: in_unit(&sigma3_theta3_delta),
    };

    Ok(Exponents {
        theta1,
        theta2,
        theta3,
        theta4,
        sigma1,
        sigma2,
        sigma3,
        sigma1_theta1_half,
        sigma2_theta2_delta,
        sigma3_theta3_delta,
        flags,
    })
}

/// Smallest integer k in (1, k_max] whose flags satisfy `demand`;
/// k with degenerate denominators are skipped.
pub fn find_k_where(
    p: &RegimeParams,
    k_max: u32,
    demand: impl Fn(&ExponentFlags) -> bool,
) -> Option<u32> {
    (2..=k_max).find(|&k| matches!(exponents(&rat_int(k as i64), p), Ok(e) if demand(&e.flags)))
}

/// Smallest integer k in (1, k_max] at which every validity flag holds.
/// Empty when some flag is structurally unattainable (for example delta at
/// or below n alpha/(n+1), which pins sigma2 theta2/delta at or above 1).
pub fn find_k_star(p: &RegimeParams, k_max: u32) -> Option<u32> {
    find_k_where(p, k_max, ExponentFlags::all)
}
