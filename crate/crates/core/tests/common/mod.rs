//! Test-only oracles, independent of the library's floating-point paths.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Fixed-point scale of the oracle: values are carried as integers times
/// `2^-SCALE_BITS`, far below any `f64` rounding level for the tested range.
const SCALE_BITS: u64 = 1200;

/// `I_m(z)` from `terms` terms of the power series in big-integer fixed
/// point, starting from the exact binary value of `z`. Each term carries a
/// truncation error below `2^-1200`.
pub fn bessel_i_exact(m: u32, z: f64, terms: u32) -> BigRational {
    let one = BigInt::one() << SCALE_BITS;
    // z/2 is exact in binary
    let half = BigRational::from_float(z).expect("finite argument") / BigInt::from(2);
    let half_fixed = (half.numer() << SCALE_BITS) / half.denom();
    let half_sq = (&half_fixed * &half_fixed) >> SCALE_BITS;
    let mut term = one.clone();
    for k in 1..=m {
        term = ((term * &half_fixed) >> SCALE_BITS) / BigInt::from(k);
    }
    let mut sum = BigInt::zero();
    for j in 0..terms {
        sum += &term;
        term = ((term * &half_sq) >> SCALE_BITS) / (BigInt::from(j + 1) * BigInt::from(j + m + 1));
    }
    BigRational::new(sum, one)
}

/// `I_m(z)` rounded to `f64`. 60 terms beyond the order leave a tail
/// below `10^-60` relative for `|z| <= 4`.
pub fn bessel_i_oracle(m: u32, z: f64) -> f64 {
    bessel_i_exact(m, z, 60 + m)
        .to_f64()
        .expect("representable value")
}

/// `c(z) = -a(z I_2/(2 I_1) + 1)` from oracle values.
pub fn family_constant_oracle(a: f64, z: f64) -> f64 {
    let i1 = bessel_i_exact(1, z, 80);
    let i2 = bessel_i_exact(2, z, 80);
    let zr = BigRational::from_float(z).unwrap();
    let ar = BigRational::from_float(a).unwrap();
    let c = -(ar * (zr * i2 / (i1 * BigInt::from(2)) + BigRational::one()));
    c.to_f64().unwrap()
}

/// `V_m = -(az/I_1) I_m` from oracle values.
pub fn family_coefficient_oracle(a: f64, z: f64, m: u32) -> f64 {
    let i1 = bessel_i_exact(1, z, 80);
    let im = bessel_i_exact(m, z, 60 + m);
    let zr = BigRational::from_float(z).unwrap();
    let ar = BigRational::from_float(a).unwrap();
    (-(ar * zr * im / i1)).to_f64().unwrap()
}

/// Prints one acceptance line and returns whether it passed.
pub fn report(id: &str, passed: bool, detail: &str) -> bool {
    println!("[{}] {id}: {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}
