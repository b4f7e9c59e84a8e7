//! Exact rational arithmetic.
//!
//! Densities and fitted slopes are exact rationals throughout; floating point
//! never enters any comparison.  The representation is `num_rational`'s
//! reduced `Ratio<i64>` (coprime numerator/denominator, positive denominator),
//! re-exported under a local name with string (de)serialization helpers in the
//! `"p/q"` shape used by the JSON interfaces.

use crate::error::{Error, Result};
use num_rational::Ratio;
use num_traits::Zero;

/// Exact rational number, always in reduced form.
pub type Rational = Ratio<i64>;

/// Build a rational from integers. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Ratio::new(num, den)
}

/// Rational from an integer.
pub fn rat_int(num: i64) -> Rational {
    Ratio::from_integer(num)
}

/// Format as `"p/q"`, or just `"p"` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Parse `"p/q"` or integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        None => {
            let n: i64 = s
                .parse()
                .map_err(|_| Error::invalid(format!("bad rational {s:?}")))?;
            Ok(Ratio::from_integer(n))
        }
        Some((num, den)) => {
            let n: i64 = num
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad rational {s:?}")))?;
            let d: i64 = den
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad rational {s:?}")))?;
            if d == 0 {
                return Err(Error::invalid(format!("zero denominator in {s:?}")));
            }
            Ok(Ratio::new(n, d))
        }
    }
}

/// Absolute value helper (`num_rational` only provides it via the `Signed` trait).
pub fn rational_abs(r: &Rational) -> Rational {
    if *r < Rational::zero() {
        -*r
    } else {
        *r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_form() {
        let r = rat(6, 4);
        assert_eq!(*r.numer(), 3);
        assert_eq!(*r.denom(), 2);
        let r = rat(-6, 4);
        assert_eq!(*r.numer(), -3);
        assert_eq!(*r.denom(), 2);
        // Denominator normalized positive.
        let r = rat(1, -2);
        assert_eq!(*r.numer(), -1);
        assert_eq!(*r.denom(), 2);
    }

    #[test]
    fn format_and_parse_round_trip() {
        for r in [rat(3, 2), rat_int(-6), rat(0, 5), rat(-5, 3)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(parse_rational("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rational(" -6 ").unwrap(), rat_int(-6));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn exact_arithmetic() {
        assert_eq!(rat(1, 3) + rat(1, 6), rat(1, 2));
        assert_eq!(rat(4, 3) - rat(1, 10), rat(37, 30));
        assert!(rat(37, 30) > rat_int(1));
    }
}
