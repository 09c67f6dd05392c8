//! Extended rationals, vectors over ℚ ∪ {−∞}, seminorms and bounded-denominator
//! rational search.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Integer types usable as rational numerators and denominators.
pub trait Int:
    Integer
    + Signed
    + Clone
    + Hash
    + fmt::Debug
    + fmt::Display
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Send
    + Sync
    + 'static
{
}

impl<T> Int for T where
    T: Integer
        + Signed
        + Clone
        + Hash
        + fmt::Debug
        + fmt::Display
        + FromPrimitive
        + ToPrimitive
        + FromStr
        + Send
        + Sync
        + 'static
{
}

/// Rational with 128-bit parts, used on the stochastic side.
pub type Q = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("operation undefined on -inf: {0}")]
    NegInf(&'static str),
    #[error("empty vector")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("invalid interval: lo > hi")]
    BadInterval,
    #[error("qmax must be at least 1")]
    BadQmax,
    #[error("value does not fit the target integer type")]
    Overflow,
}

/// An element of ℚ ∪ {−∞}.
///
/// `NegInf` is the first variant, so the derived order puts it below every
/// finite value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ext<I: Int> {
    NegInf,
    Fin(Ratio<I>),
}

impl<I: Int> Ext<I> {
    pub fn zero() -> Self {
        Ext::Fin(Ratio::zero())
    }

    pub fn int(v: i64) -> Self {
        Ext::Fin(ratio_from_i64(v))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ext::Fin(_))
    }

    pub fn finite(&self) -> Option<&Ratio<I>> {
        match self {
            Ext::Fin(r) => Some(r),
            Ext::NegInf => None,
        }
    }

    /// Translation by a finite amount. −∞ absorbs.
    pub fn add_fin(&self, c: &Ratio<I>) -> Self {
        match self {
            Ext::Fin(r) => Ext::Fin(r + c),
            Ext::NegInf => Ext::NegInf,
        }
    }

    /// Sum of two extended values; −∞ absorbs.
    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a + b),
            _ => Ext::NegInf,
        }
    }

    /// Scaling by a nonnegative rational with 0 · (−∞) = 0.
    pub fn scale(&self, c: &Ratio<I>) -> Result<Self, NumericError> {
        if c.is_negative() {
            return match self {
                Ext::Fin(r) => Ok(Ext::Fin(r * c)),
                Ext::NegInf => Err(NumericError::NegInf("negative scaling")),
            };
        }
        Ok(match self {
            Ext::Fin(r) => Ext::Fin(r * c),
            Ext::NegInf if c.is_zero() => Ext::zero(),
            Ext::NegInf => Ext::NegInf,
        })
    }

    /// `self − other`, defined only when `other` is finite.
    pub fn checked_sub(&self, other: &Self) -> Result<Self, NumericError> {
        match (self, other) {
            (_, Ext::NegInf) => Err(NumericError::NegInf("subtracting -inf")),
            (Ext::NegInf, _) => Ok(Ext::NegInf),
            (Ext::Fin(a), Ext::Fin(b)) => Ok(Ext::Fin(a - b)),
        }
    }

    pub fn checked_neg(&self) -> Result<Self, NumericError> {
        match self {
            Ext::Fin(a) => Ok(Ext::Fin(-a.clone())),
            Ext::NegInf => Err(NumericError::NegInf("negation")),
        }
    }

    pub fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

impl<I: Int> From<Ratio<I>> for Ext<I> {
    fn from(r: Ratio<I>) -> Self {
        Ext::Fin(r)
    }
}

impl<I: Int> fmt::Display for Ext<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::NegInf => write!(f, "-inf"),
            Ext::Fin(r) => write!(f, "{}", r),
        }
    }
}

impl<I: Int> FromStr for Ext<I> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "-inf" {
            return Ok(Ext::NegInf);
        }
        parse_ratio::<I>(t).map(Ext::Fin)
    }
}

/// Parses `p`, `p/q` or a finite decimal such as `-1.25`.
pub fn parse_ratio<I: Int>(s: &str) -> Result<Ratio<I>, String> {
    let t = s.trim();
    if let Some((a, b)) = t.split_once('/') {
        let n: I = a.trim().parse().map_err(|_| format!("bad numerator in {t:?}"))?;
        let d: I = b.trim().parse().map_err(|_| format!("bad denominator in {t:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {t:?}"));
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n: I = digits.parse().map_err(|_| format!("bad decimal {t:?}"))?;
        let ten = I::from_u32(10).ok_or("overflow")?;
        let mut d = I::one();
        for _ in 0..fp.len() {
            d = d * ten.clone();
        }
        let r = Ratio::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: I = t.parse().map_err(|_| format!("bad number {t:?}"))?;
    Ok(Ratio::from_integer(n))
}

pub fn ratio_from_i64<I: Int>(v: i64) -> Ratio<I> {
    Ratio::from_integer(I::from_i64(v).expect("i64 fits every Int"))
}

pub fn ratio_of<I: Int>(n: i64, d: i64) -> Ratio<I> {
    Ratio::new(
        I::from_i64(n).expect("i64 fits every Int"),
        I::from_i64(d).expect("i64 fits every Int"),
    )
}

pub fn to_big<I: Int>(r: &Ratio<I>) -> BigRational {
    Ratio::new(to_bigint(r.numer()), to_bigint(r.denom()))
}

pub fn to_bigint<I: Int>(v: &I) -> BigInt {
    BigInt::from_str(&v.to_string()).expect("integer display parses as BigInt")
}

pub fn from_big<I: Int>(r: &BigRational) -> Result<Ratio<I>, NumericError> {
    let n = I::from_str(&r.numer().to_string()).map_err(|_| NumericError::Overflow)?;
    let d = I::from_str(&r.denom().to_string()).map_err(|_| NumericError::Overflow)?;
    Ok(Ratio::new(n, d))
}

pub fn ext_to_big<I: Int>(x: &Ext<I>) -> Ext<BigInt> {
    match x {
        Ext::NegInf => Ext::NegInf,
        Ext::Fin(r) => Ext::Fin(to_big(r)),
    }
}

/// Ceiling of a rational as an integer.
pub fn ceil_int<I: Int>(r: &Ratio<I>) -> I {
    r.ceil().to_integer()
}

pub fn ratio_to_f64<I: Int>(r: &Ratio<I>) -> f64 {
    let b = to_big(r);
    match (b.numer().to_f64(), b.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => {
            let shift = b.denom().bits().max(b.numer().bits()) as i64 - 60;
            let n = (b.numer() >> shift.max(0) as usize).to_f64().unwrap_or(f64::NAN);
            let d = (b.denom() >> shift.max(0) as usize).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// A vector over ℚ ∪ {−∞}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtVec<I: Int>(pub Vec<Ext<I>>);

impl<I: Int> ExtVec<I> {
    pub fn zeros(n: usize) -> Self {
        ExtVec(vec![Ext::zero(); n])
    }

    pub fn constant(n: usize, c: &Ratio<I>) -> Self {
        ExtVec(vec![Ext::Fin(c.clone()); n])
    }

    pub fn from_finite(v: Vec<Ratio<I>>) -> Self {
        ExtVec(v.into_iter().map(Ext::Fin).collect())
    }

    pub fn from_ints(v: &[i64]) -> Self {
        ExtVec(v.iter().map(|&x| Ext::int(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Ext<I>> {
        self.0.iter()
    }

    pub fn all_finite(&self) -> bool {
        self.0.iter().all(Ext::is_finite)
    }

    pub fn has_neg_inf(&self) -> bool {
        !self.all_finite()
    }

    /// Finite entries, or an error if some entry is −∞.
    pub fn finite_entries(&self) -> Result<Vec<Ratio<I>>, NumericError> {
        self.0
            .iter()
            .map(|e| e.finite().cloned().ok_or(NumericError::NegInf("finite vector expected")))
            .collect()
    }

    pub fn add_scalar(&self, c: &Ratio<I>) -> Self {
        ExtVec(self.0.iter().map(|e| e.add_fin(c)).collect())
    }

    pub fn join(&self, other: &Self) -> Result<Self, NumericError> {
        self.same_len(other)?;
        Ok(ExtVec(
            self.0.iter().zip(&other.0).map(|(a, b)| Ext::max_of(a, b)).collect(),
        ))
    }

    pub fn meet(&self, other: &Self) -> Result<Self, NumericError> {
        self.same_len(other)?;
        Ok(ExtVec(
            self.0.iter().zip(&other.0).map(|(a, b)| Ext::min_of(a, b)).collect(),
        ))
    }

    /// Coordinatewise `self ≤ other`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Sup-norm distance between finite vectors with matching −∞ patterns.
    pub fn sup_dist(&self, other: &Self) -> Result<Ratio<I>, NumericError> {
        self.same_len(other)?;
        let mut d = Ratio::zero();
        for (a, b) in self.0.iter().zip(&other.0) {
            match (a, b) {
                (Ext::Fin(x), Ext::Fin(y)) => {
                    let e = (x - y).abs();
                    if e > d {
                        d = e;
                    }
                }
                (Ext::NegInf, Ext::NegInf) => {}
                _ => return Err(NumericError::NegInf("sup distance with unmatched -inf")),
            }
        }
        Ok(d)
    }

    fn same_len(&self, other: &Self) -> Result<(), NumericError> {
        if self.0.len() != other.0.len() {
            return Err(NumericError::Length(self.0.len(), other.0.len()));
        }
        Ok(())
    }
}

impl<I: Int> std::ops::Index<usize> for ExtVec<I> {
    type Output = Ext<I>;
    fn index(&self, i: usize) -> &Ext<I> {
        &self.0[i]
    }
}

impl<I: Int> fmt::Display for ExtVec<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

pub fn top<I: Int>(x: &ExtVec<I>) -> Result<Ext<I>, NumericError> {
    x.0.iter().max().cloned().ok_or(NumericError::Empty)
}

pub fn bottom<I: Int>(x: &ExtVec<I>) -> Result<Ext<I>, NumericError> {
    x.0.iter().min().cloned().ok_or(NumericError::Empty)
}

/// `top(x) − bottom(x)` for a finite vector.
pub fn hilbert_seminorm<I: Int>(x: &ExtVec<I>) -> Result<Ratio<I>, NumericError> {
    let v = x.finite_entries()?;
    let hi = v.iter().max().ok_or(NumericError::Empty)?;
    let lo = v.iter().min().ok_or(NumericError::Empty)?;
    Ok(hi - lo)
}

/// Closed interval with rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalInterval<I: Int> {
    pub lo: Ratio<I>,
    pub hi: Ratio<I>,
}

impl<I: Int> RationalInterval<I> {
    pub fn new(lo: Ratio<I>, hi: Ratio<I>) -> Result<Self, NumericError> {
        if lo > hi {
            return Err(NumericError::BadInterval);
        }
        Ok(RationalInterval { lo, hi })
    }

    pub fn point(x: Ratio<I>) -> Self {
        RationalInterval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Ratio<I> {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Ratio<I>) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

impl<I: Int> fmt::Display for RationalInterval<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RationalSearch<I: Int> {
    Found(Ratio<I>),
    NotFound,
    NotUnique,
}

/// Rational of least denominator in an interval whose endpoints may be open.
/// `hi = None` stands for +∞.
fn simplest_between<I: Int>(
    lo: &Ratio<I>,
    lo_closed: bool,
    hi: Option<&Ratio<I>>,
    hi_closed: bool,
) -> Option<Ratio<I>> {
    if let Some(h) = hi {
        match lo.cmp(h) {
            Ordering::Greater => return None,
            Ordering::Equal => {
                return if lo_closed && hi_closed { Some(lo.clone()) } else { None };
            }
            Ordering::Less => {}
        }
    }
    let fl = lo.floor();
    let first_int = if lo.is_integer() && lo_closed { fl.clone() } else { fl.clone() + Ratio::one() };
    let inside = match hi {
        None => true,
        Some(h) => first_int < *h || (first_int == *h && hi_closed),
    };
    if inside {
        return Some(first_int);
    }
    // No integer inside, so lo and hi share the floor fl and hi ≤ fl + 1.
    let h = hi.expect("bounded when no integer fits");
    let new_lo = (h - &fl).recip();
    let gap = lo - &fl;
    let new_hi = if gap.is_zero() { None } else { Some(gap.recip()) };
    let y = simplest_between(&new_lo, hi_closed, new_hi.as_ref(), lo_closed)?;
    Some(fl + y.recip())
}

/// The unique `p/q` with `1 ≤ q ≤ qmax` inside `iv`, found by continued-fraction
/// (Stern–Brocot) search.
pub fn rational_in_interval<I: Int>(
    iv: &RationalInterval<I>,
    qmax: &I,
) -> Result<RationalSearch<I>, NumericError> {
    if qmax < &I::one() {
        return Err(NumericError::BadQmax);
    }
    if iv.lo > iv.hi {
        return Err(NumericError::BadInterval);
    }
    let s = match simplest_between(&iv.lo, true, Some(&iv.hi), true) {
        Some(s) if s.denom() <= qmax => s,
        _ => return Ok(RationalSearch::NotFound),
    };
    let left = simplest_between(&iv.lo, true, Some(&s), false);
    let right = simplest_between(&s, false, Some(&iv.hi), true);
    let small = |r: &Option<Ratio<I>>| r.as_ref().is_some_and(|r| r.denom() <= qmax);
    if small(&left) || small(&right) {
        return Ok(RationalSearch::NotUnique);
    }
    Ok(RationalSearch::Found(s))
}
