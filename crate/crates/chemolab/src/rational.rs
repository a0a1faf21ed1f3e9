//! Exact rational scalars for threshold predicates.
//!
//! The boundedness criteria compare exponent combinations with strict
//! inequalities and exact equalities; evaluating them in floating point would
//! misclassify limit cases such as `delta = 4/3`. Exponent-like parameters
//! therefore carry `BigRational` values, obtained exactly from config
//! literals (`"4/3"`, `"1.5"`) or from `f64` (every finite float is a dyadic
//! rational).

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Rational p/q. Panics on q = 0; intended for literals in code.
pub fn rat(p: i64, q: i64) -> Rat {
    assert!(q != 0, "rational with zero denominator");
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Exact conversion from a float; `None` for NaN or infinities.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// Nearest float. NaN when the magnitude overflows f64.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_zero(r: &Rat) -> bool {
    r.is_zero()
}

pub fn is_one(r: &Rat) -> bool {
    r.is_one()
}

/// Render in lowest terms as `p` or `p/q`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `"3"`, `"-1.25"`, or `"4/3"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((num, den)) = s.split_once('/') {
        let p = BigInt::from_str(num.trim()).map_err(|_| format!("bad numerator in '{s}'"))?;
        let q = BigInt::from_str(den.trim()).map_err(|_| format!("bad denominator in '{s}'"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in '{s}'"));
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let (sign, int) = match int.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, int.strip_prefix('+').unwrap_or(int)),
        };
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return Err(format!("bad decimal '{s}'"));
        }
        if !int.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal '{s}'"));
        }
        let int: BigInt = if int.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| format!("bad decimal '{s}'"))?
        };
        let digits = frac.len() as u32;
        let frac = BigInt::from_str(frac).map_err(|_| format!("bad decimal '{s}'"))?;
        let den = BigInt::from(10u32).pow(digits);
        return Ok(Rat::new(sign * (int * &den + frac), den));
    }
    let p = BigInt::from_str(s).map_err(|_| format!("not a number: '{s}'"))?;
    Ok(Rat::from_integer(p))
}

/// max of two rationals by value.
pub fn rat_max(a: &Rat, b: &Rat) -> Rat {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn rat_is_positive(r: &Rat) -> bool {
    r.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rat("4/3").expect("frac"), rat(4, 3));
        assert_eq!(parse_rat("1.5").expect("dec"), rat(3, 2));
        assert_eq!(parse_rat("-0.25").expect("neg dec"), rat(-1, 4));
        assert_eq!(parse_rat(" 7 ").expect("int"), rat_int(7));
        assert_eq!(parse_rat("-6/4").expect("frac"), rat(-3, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
        assert!(parse_rat("1.").is_err());
    }

    #[test]
    fn f64_round_trip_is_exact() {
        for x in [0.5, 1.5, 4.0 / 3.0, 0.1, -2.75] {
            let r = rat_from_f64(x).expect("finite");
            assert_eq!(rat_to_f64(&r), x);
        }
        assert!(rat_from_f64(f64::NAN).is_none());
    }

    #[test]
    fn formats_lowest_terms() {
        assert_eq!(fmt_rat(&rat(6, 4)), "3/2");
        assert_eq!(fmt_rat(&rat_int(5)), "5");
        assert_eq!(fmt_rat(&rat(-1, 3)), "-1/3");
    }
}
