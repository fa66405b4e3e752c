//! Small numeric helpers shared by the counting and weighting code.
//!
//! Everything here is deterministic: reductions use a fixed pairwise
//! association so results do not depend on how callers partition work.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (cascade) summation with a fixed split point.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Normalizes nonnegative weights in place so they sum to one.
///
/// Returns the pre-normalization total.
pub fn normalize(weights: &mut [f64]) -> f64 {
    let total = pairwise_sum(weights);
    if total > 0.0 {
        for w in weights.iter_mut() {
            *w /= total;
        }
    }
    total
}

/// `x * 2^exp` without intermediate overflow for moderate `x`.
pub fn ldexp(mut x: f64, mut exp: i64) -> f64 {
    while exp > 1000 {
        x *= 2f64.powi(1000);
        exp -= 1000;
    }
    while exp < -1000 {
        x *= 2f64.powi(-1000);
        exp += 1000;
    }
    x * 2f64.powi(exp as i32)
}

/// Correctly scaled `num / den` for arbitrarily large integers.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "ratio_to_f64: zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    // Scale so the integer quotient carries 64+ significant bits.
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let quotient = if shift >= 0 { (num << shift as u64) / den } else { num / (den << (-shift) as u64) };
    ldexp(quotient.to_f64().unwrap_or(f64::INFINITY), -shift)
}

pub fn rational_to_f64(value: &BigRational) -> f64 {
    let magnitude = ratio_to_f64(value.numer().magnitude(), value.denom().magnitude());
    let negative = (value.numer().sign() == Sign::Minus) != (value.denom().sign() == Sign::Minus);
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// Natural log of a positive big integer.
pub fn ln_big(n: &BigUint) -> f64 {
    assert!(!n.is_zero(), "ln_big: zero argument");
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let drop = bits - 64;
    let top = (n >> drop).to_f64().expect("64-bit value");
    top.ln() + drop as f64 * std::f64::consts::LN_2
}

/// Decimal expansion of a nonnegative rational, truncated after `bits`
/// worth of fractional precision.
pub fn decimal_string(value: &BigRational, bits: u32) -> String {
    let digits = ((bits as f64) * std::f64::consts::LOG10_2).ceil() as usize;
    let negative = value.numer().sign() == Sign::Minus;
    let num = value.numer().magnitude().clone();
    let den = value.denom().magnitude().clone();
    let int_part = &num / &den;
    let mut rem = num % &den;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if digits > 0 {
        out.push('.');
        let ten = BigUint::from(10u32);
        for _ in 0..digits {
            rem *= &ten;
            let digit = &rem / &den;
            rem %= &den;
            out.push_str(&digit.to_string());
        }
    }
    out
}

pub fn big_ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from_biguint(Sign::Plus, num.clone()), BigInt::from_biguint(Sign::Plus, den.clone()))
}
