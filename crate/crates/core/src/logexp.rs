//! Certified bounds on `exp` and `ln` in binary fixed point.
//!
//! A fixed-point integer `v` at precision `p` stands for `v / 2^p`. Every
//! routine returns a lower and an upper bound; intermediate roundings are
//! directed so the bounds always hold.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn pow2(p: u32) -> BigInt {
    BigInt::one() << p
}

pub fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

pub fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

/// `⌊x·2^p⌋` and `⌈x·2^p⌉`.
pub fn to_fixed(x: &BigRational, p: u32) -> (BigInt, BigInt) {
    let num = x.numer() << p;
    (floor_div(&num, x.denom()), ceil_div(&num, x.denom()))
}

pub fn from_fixed(v: BigInt, p: u32) -> BigRational {
    BigRational::new(v, pow2(p))
}

/// Bounds on `exp(t / 2^p)` at precision `p`.
pub fn exp_fixed(t: &BigInt, p: u32) -> (BigInt, BigInt) {
    if t.is_zero() {
        let one = pow2(p);
        return (one.clone(), one);
    }
    if t.is_negative() && -t >= (BigInt::from(p as u64 + 2) << p) {
        return (BigInt::zero(), BigInt::one());
    }
    // |t| / 2^(p+j) ≤ 1/2
    let bits = t.magnitude().bits() as u32;
    let j = (bits + 1).saturating_sub(p);
    let grow = if t.is_positive() {
        (t >> p).to_u32().expect("exponent in range").saturating_mul(3) / 2 + 2
    } else {
        0
    };
    let q = p + 2 * j + 24 + grow;
    let one = pow2(q);
    let u = t << (q - p - j);
    let mut term = one.clone();
    let mut sum = one.clone();
    let mut k: u64 = 1;
    loop {
        // Truncation error below one unit per term; |u| ≤ 1/2 keeps the
        // accumulated error of each term below two units.
        term = (&term * &u) / (&one * BigInt::from(k));
        if term.is_zero() {
            break;
        }
        sum += &term;
        k += 1;
    }
    let err = BigInt::from(2 * k + 8);
    let mut lo = (&sum - &err).max(BigInt::one());
    let mut hi = sum + err;
    for _ in 0..j {
        lo = (&lo * &lo) >> q;
        hi = ceil_div(&(&hi * &hi), &one);
    }
    (lo >> (q - p), ceil_div(&hi, &pow2(q - p)))
}

/// Lower bound on `atanh(z / 2^q)` for `0 ≤ z ≤ 2^q/3`.
fn atanh_lower(z: &BigInt, q: u32) -> BigInt {
    if z.is_zero() {
        return BigInt::zero();
    }
    let z2 = (z * z) >> q;
    let mut pow = z.clone();
    let mut s = BigInt::zero();
    let mut i: u64 = 0;
    while !pow.is_zero() {
        s += &pow / BigInt::from(2 * i + 1);
        pow = (&pow * &z2) >> q;
        i += 1;
    }
    s
}

/// Upper bound on `atanh(z / 2^q)` for `0 ≤ z ≤ 2^q/3`.
fn atanh_upper(z: &BigInt, q: u32) -> BigInt {
    if z.is_zero() {
        return BigInt::zero();
    }
    let one = pow2(q);
    let z2 = ceil_div(&(z * z), &one);
    let mut pow = z.clone();
    let mut s = BigInt::zero();
    let mut i: u64 = 0;
    loop {
        s += ceil_div(&pow, &BigInt::from(2 * i + 1));
        pow = ceil_div(&(&pow * &z2), &one);
        i += 1;
        if pow <= BigInt::one() {
            break;
        }
    }
    // Tail below (9/8)·pow.
    s + BigInt::from(2)
}

thread_local! {
    static LN2: RefCell<HashMap<u32, (BigInt, BigInt)>> = RefCell::new(HashMap::new());
}

/// Bounds on `ln 2 = 2·atanh(1/3)` at precision `q`.
fn ln2(q: u32) -> (BigInt, BigInt) {
    LN2.with(|c| {
        c.borrow_mut()
            .entry(q)
            .or_insert_with(|| {
                let one = pow2(q);
                let three = BigInt::from(3);
                let lo = atanh_lower(&floor_div(&one, &three), q) * 2;
                let hi = atanh_upper(&ceil_div(&one, &three), q) * 2;
                (lo, hi)
            })
            .clone()
    })
}

/// `y / 2^p = (m / 2^q)·2^e` with `m / 2^q ∈ [1, 2)`; `m` rounded down or up.
fn normalize(y: &BigInt, p: u32, q: u32, up: bool) -> (BigInt, i64) {
    let e = y.bits() as i64 - 1 - p as i64;
    let shift = q as i64 - p as i64 - e;
    let m = if shift >= 0 {
        y << (shift as u32)
    } else if up {
        ceil_div(y, &pow2((-shift) as u32))
    } else {
        y >> ((-shift) as u32)
    };
    (m, e)
}

/// Lower bound on `ln(y_lo / 2^p)` and upper bound on `ln(y_hi / 2^p)`;
/// both arguments positive.
pub fn ln_fixed(y_lo: &BigInt, y_hi: &BigInt, p: u32) -> (BigInt, BigInt) {
    assert!(y_lo.is_positive() && y_hi.is_positive(), "logarithm of a nonpositive number");
    let q = p + 24;
    let one = pow2(q);
    let (l2_lo, l2_hi) = ln2(q);

    let (m, e) = normalize(y_lo, p, q, false);
    let z = floor_div(&((&m - &one) << q), &(&m + &one));
    let l2 = if e >= 0 { &l2_lo } else { &l2_hi };
    let lo = l2 * BigInt::from(e) + atanh_lower(&z, q) * 2;

    let (m, e) = normalize(y_hi, p, q, true);
    let z = ceil_div(&((&m - &one) << q), &(&m + &one));
    let l2 = if e >= 0 { &l2_hi } else { &l2_lo };
    let hi = l2 * BigInt::from(e) + atanh_upper(&z, q) * 2;

    (lo >> 24u32, ceil_div(&hi, &pow2(24)))
}

/// Bounds on `exp(x)` with `p` fractional bits.
pub fn exp_bounds(x: &BigRational, p: u32) -> (BigRational, BigRational) {
    let (t_lo, t_hi) = to_fixed(x, p);
    let lo = exp_fixed(&t_lo, p).0;
    let hi = exp_fixed(&t_hi, p).1;
    (from_fixed(lo, p), from_fixed(hi, p))
}

/// Bounds on `ln(x)` for `x > 0`, with at least `p` fractional bits.
pub fn ln_bounds(x: &BigRational, p: u32) -> (BigRational, BigRational) {
    assert!(x.is_positive(), "logarithm of a nonpositive number");
    let p = p + x.denom().bits() as u32 + 2;
    let (y_lo, y_hi) = to_fixed(x, p);
    let (lo, hi) = ln_fixed(&y_lo, &y_hi, p);
    (from_fixed(lo, p), from_fixed(hi, p))
}

/// Fractional bits that make one unit at most `eps / 16`.
pub fn bits_for(eps: &BigRational) -> u32 {
    if !eps.is_positive() {
        return 160;
    }
    let need = eps.denom().bits() as i64 - eps.numer().bits() as i64 + 5;
    need.max(16) as u32
}
