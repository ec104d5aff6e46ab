//! Exact rational arithmetic helpers.
//!
//! Every DoF value in this crate is a [`Rational`] (arbitrary-precision
//! numerator over a positive denominator, always in lowest terms); DoF
//! equality tests are exact, never floating-point.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Shorthand for a small exact rational.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rat_u128(numer: u128, denom: u128) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn from_u128(n: u128) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `r^e` for a possibly negative exponent (`r` must be nonzero when `e < 0`).
pub fn pow_i64(r: &Rational, e: i64) -> Rational {
    let e: i32 = e.try_into().expect("exponent fits in i32");
    r.pow(e)
}

/// Rounds an exact rational to the nearest `f64`.
///
/// The numerator and denominator of harmonic-sum rationals overflow `f64`
/// individually long before the quotient does, so the conversion scales the
/// quotient by 2^64 in exact integer arithmetic first.
pub fn to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let negative = r.is_negative();
    let numer = r.numer().abs();
    let denom = r.denom().clone();
    let scaled = (numer << 64u32) / denom;
    let approx = big_to_f64(&scaled) / 2f64.powi(64);
    if negative {
        -approx
    } else {
        approx
    }
}

fn big_to_f64(n: &BigInt) -> f64 {
    // BigInt::to_f64 saturates to infinity out of range, which is fine here.
    n.to_f64().unwrap_or(match n.sign() {
        Sign::Minus => f64::NEG_INFINITY,
        _ => f64::INFINITY,
    })
}

/// Renders as `numer/denom`, always with an explicit denominator.
pub fn render(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Formats a float with twelve significant digits, plain notation.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000000000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Checks `denominator > 0` and lowest terms; `Rational` maintains both, the
/// helper exists so tests can state the invariant directly.
pub fn is_canonical(r: &Rational) -> bool {
    r.denom().is_positive() && {
        let g = num_integer::Integer::gcd(r.numer(), r.denom());
        g.is_one() || r.numer().is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_positive_denominator() {
        let r = rat(6, -10);
        assert_eq!(r, rat(-3, 5));
        assert!(is_canonical(&r));
        assert_eq!(render(&r), "-3/5");
    }

    #[test]
    fn huge_rational_to_f64() {
        // 10^300 / (3 * 10^300) = 1/3 even though parts overflow f64.
        let big = Rational::from_integer(BigInt::from(10).pow(300));
        let r = big.clone() / (big * BigInt::from(3));
        assert!((to_f64(&r) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn negative_exponent_power() {
        assert_eq!(pow_i64(&rat(2, 3), -2), rat(9, 4));
        assert_eq!(pow_i64(&rat(2, 3), 0), rat(1, 1));
        assert_eq!(pow_i64(&rat(2, 3), 3), rat(8, 27));
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(24.0 / 19.0), "1.26315789474");
        assert_eq!(sig12(1.0 / std::f64::consts::LN_2), "1.44269504089");
        assert_eq!(sig12(12.5), "12.5000000000");
    }
}
