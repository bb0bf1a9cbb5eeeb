//! Exact rational helpers: construction, parsing, and the canonical
//! `num/den` text form used by all file formats.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rat = BigRational;

/// Rational from machine integers, reduced with positive denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(num: i64) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

/// Canonical text form: lowest terms, sign on the numerator,
/// denominator always present and positive.
pub fn format_rat(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Display form for humans: integers drop the `/1`.
pub fn display_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Out-of-range big integers: fall back to a quotient of floats.
        let n = x.numer().to_f64().unwrap_or(f64::MAX);
        let d = x.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

#[derive(Debug, thiserror::Error)]
#[error("invalid rational literal {0:?} (expected `num` or `num/den`)")]
pub struct ParseRatError(pub String);

/// Parses `num/den` or a bare integer. Decimal points are rejected.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let s = s.trim();
    let mk_err = || ParseRatError(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| mk_err())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| mk_err())?;
            if d.is_zero() {
                return Err(mk_err());
            }
            Ok(Rat::new(n, d))
        }
        None => {
            let n = BigInt::from_str(s).map_err(|_| mk_err())?;
            Ok(Rat::from_integer(n))
        }
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// via the continued-fraction convergents of `x`.
pub fn approximate_f64(x: f64, max_den: u64) -> Option<Rat> {
    if !x.is_finite() {
        return None;
    }
    let negative = x < 0.0;
    let mut x = x.abs();
    // Convergents p/q of the continued fraction expansion.
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let bound = BigInt::from(max_den);
    for _ in 0..64 {
        let a = x.floor();
        if a > 1e18 {
            break;
        }
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > bound {
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = x - a;
        if frac < 1e-15 * x.max(1.0) {
            break;
        }
        x = 1.0 / frac;
    }
    if q1.is_zero() {
        return None;
    }
    let mut r = Rat::new(p1, q1);
    if negative {
        r = -r;
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let x = parse_rat("-6/8").unwrap();
        assert_eq!(format_rat(&x), "-3/4");
        assert_eq!(display_rat(&x), "-3/4");
        let y = parse_rat("42").unwrap();
        assert_eq!(format_rat(&y), "42/1");
        assert_eq!(display_rat(&y), "42");
        assert!(parse_rat("1.5").is_err());
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn continued_fraction_recovery() {
        let x = rat(32, 63);
        let approx = approximate_f64(rat_to_f64(&x), 1000).unwrap();
        assert_eq!(approx, x);
        let y = rat(-11, 15);
        assert_eq!(approximate_f64(rat_to_f64(&y), 1000).unwrap(), y);
        assert_eq!(approximate_f64(0.5, 10).unwrap(), rat(1, 2));
    }
}
