//! Exact rational helpers: decimal literal parsing, fraction formatting and
//! common-denominator scaling for the integer fast paths.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `12`, `-0.25`, `2.` or `3/4` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = parse_signed_digits(p)?;
        let q: BigInt = parse_signed_digits(q)?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, fractional) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && fractional.is_empty() {
        return None;
    }
    if !whole.chars().chain(fractional.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{fractional}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), fractional.len());
    let r = Rational::new(num, den);
    Some(if negative { -r } else { r })
}

fn parse_signed_digits(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix('-').unwrap_or(s);
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Exact fraction string: `3/2`, `-1/3`, `4`.
pub fn fmt_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fallback for huge numerators/denominators.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Integer images of a list of rationals under a common denominator.
pub(crate) enum Scaled {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

/// Largest magnitude allowed on the i128 path. Leaves room for sums of up to
/// 2^20 terms without overflow.
const SMALL_LIMIT_BITS: u64 = 100;

pub(crate) fn scale_to_integers(values: &[Rational]) -> (BigInt, Scaled) {
    let mut lcm = BigInt::one();
    for v in values {
        if !v.denom().is_one() {
            lcm = lcm.lcm(v.denom());
        }
    }
    let nums: Vec<BigInt> = values.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    let small = nums.iter().all(|x| x.abs().bits() <= SMALL_LIMIT_BITS);
    if small {
        let ints = nums.iter().map(|x| x.to_i128().expect("checked bit length")).collect();
        (lcm, Scaled::Small(ints))
    } else {
        (lcm, Scaled::Big(nums))
    }
}
