//! Exact scalar abstraction.
//!
//! Every algorithm in this crate is written against [`Scalar`], an ordered
//! field with exact arithmetic. The trait is implemented for
//! `num_rational::Ratio<I>` over any signed integer type, so the same code runs
//! on arbitrary-precision rationals (the crate default) or on fixed-width
//! rationals when the caller can bound the denominators.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, NumAssign, Signed};

/// An exact ordered field.
pub trait Scalar:
    Clone
    + Ord
    + Hash
    + Debug
    + Display
    + Num
    + Signed
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Builds `numer / denom` exactly. Panics if `denom == 0`.
    fn from_frac(numer: i64, denom: i64) -> Self;

    fn from_int(v: i64) -> Self {
        Self::from_frac(v, 1)
    }

    /// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.25"` / `"-1.5"`
    /// without any rounding.
    fn parse_exact(s: &str) -> Option<Self>;

    fn half() -> Self {
        Self::from_frac(1, 2)
    }
}

impl<I> Scalar for Ratio<I>
where
    I: Integer + NumAssign + Signed + Clone + Hash + Debug + Display + FromPrimitive + Send + Sync + 'static,
{
    fn from_frac(numer: i64, denom: i64) -> Self {
        let n = I::from_i64(numer).expect("numerator fits the integer type");
        let d = I::from_i64(denom).expect("denominator fits the integer type");
        Ratio::new(n, d)
    }

    fn parse_exact(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        if let Some((num, den)) = s.split_once('/') {
            let n = parse_int::<I>(num)?;
            let d = parse_int::<I>(den)?;
            if d.is_zero() {
                return None;
            }
            return Some(Ratio::new(n, d));
        }
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (whole, frac) = match body.split_once('.') {
            Some((w, f)) => (w, f),
            None => (body, ""),
        };
        if whole.is_empty() && frac.is_empty() {
            return None;
        }
        if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{whole}{frac}");
        let numer = I::from_str_radix(&digits, 10).ok()?;
        let ten = I::from_u8(10)?;
        let mut denom = I::one();
        for _ in 0..frac.len() {
            denom *= ten.clone();
        }
        let value = Ratio::new(numer, denom);
        Some(if negative { -value } else { value })
    }
}

fn parse_int<I: Integer + Signed>(s: &str) -> Option<I> {
    let s = s.trim();
    if s.is_empty() || !s.trim_start_matches(['-', '+']).bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    I::from_str_radix(s, 10).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    type Q = Ratio<BigInt>;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(Q::parse_exact("1/3"), Some(Q::from_frac(1, 3)));
        assert_eq!(Q::parse_exact("2/6"), Some(Q::from_frac(1, 3)));
        assert_eq!(Q::parse_exact("0.9"), Some(Q::from_frac(9, 10)));
        assert_eq!(Q::parse_exact("-1.25"), Some(Q::from_frac(-5, 4)));
        assert_eq!(Q::parse_exact(".5"), Some(Q::from_frac(1, 2)));
        assert_eq!(Q::parse_exact("7"), Some(Q::from_int(7)));
        assert_eq!(Q::parse_exact("-3/6"), Some(Q::from_frac(-1, 2)));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "a", "1.2.3", "1/x", "0x10", "-", "."] {
            assert_eq!(Q::parse_exact(bad), None, "{bad}");
        }
    }

    #[test]
    fn fixed_width_rationals_work_too() {
        let x = Ratio::<i64>::parse_exact("0.1").unwrap();
        assert_eq!(x * Ratio::<i64>::from_int(10), Ratio::<i64>::from_int(1));
    }
}
