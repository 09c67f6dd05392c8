//! Winner decision by value iteration, its finite-precision variant, and
//! approximation of a state-independent mean payoff with certificates.

use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{bottom, top, Ext, ExtVec, Int, NumericError, RationalInterval};
use crate::shapley::ShapleyOracle;

/// Orbits are kept in memory while `n · ℓ` stays below this many entries.
pub const ORBIT_BUDGET: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ViError<I: Int> {
    #[error("oracle does not support exact evaluation")]
    NotExact,
    #[error("precision must be positive")]
    NonPositive,
    #[error("iterate has a -inf coordinate")]
    NegInfIterate,
    #[error("iteration cap reached after {iterations} iterations")]
    IterationCap { iterations: u64, last: ExtVec<I> },
    #[error("empty orbit")]
    EmptyOrbit,
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Sub,
    Super,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Sub => write!(f, "sub"),
            Direction::Super => write!(f, "super"),
        }
    }
}

/// `(λ, v)` with `λ + v ≤ F(v)` (Sub) or `λ + v ≥ F(v)` (Super).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate<I: Int> {
    pub lam: Ratio<I>,
    pub vec: ExtVec<I>,
    pub direction: Direction,
}

/// First coordinate where a certificate inequality fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation<I: Int> {
    pub coord: usize,
    pub lhs: Ext<I>,
    pub rhs: Ext<I>,
}

impl<I: Int> fmt::Display for Violation<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "coordinate {}: lam + v = {} vs F(v) = {}", self.coord, self.lhs, self.rhs)
    }
}

impl<I: Int> Certificate<I> {
    /// Checks the inequality against an exact image `fv = F(vec)`.
    pub fn check_image(&self, fv: &ExtVec<I>) -> Result<(), Violation<I>> {
        for (j, (v, f)) in self.vec.iter().zip(fv.iter()).enumerate() {
            let lhs = v.add_fin(&self.lam);
            let ok = match self.direction {
                Direction::Sub => lhs <= *f && v.is_finite(),
                Direction::Super => lhs >= *f && v.is_finite(),
            };
            if !ok {
                return Err(Violation { coord: j, lhs, rhs: f.clone() });
            }
        }
        Ok(())
    }

    /// Re-verifies with an exact evaluator of `F`.
    pub fn verify<F: Fn(&ExtVec<I>) -> ExtVec<I>>(&self, f: F) -> Result<(), Violation<I>> {
        self.check_image(&f(&self.vec))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    MinWinsAll,
    MaxWinsAll,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::MinWinsAll => write!(f, "MinWinsAll"),
            Outcome::MaxWinsAll => write!(f, "MaxWinsAll"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinnerVerdict<I: Int> {
    pub outcome: Outcome,
    pub iterations: u64,
    pub witness: ExtVec<I>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Winner<I: Int> {
    Decided(WinnerVerdict<I>),
    Exhausted { iterations: u64, last: ExtVec<I> },
}

impl<I: Int> Winner<I> {
    pub fn verdict(&self) -> Option<&WinnerVerdict<I>> {
        match self {
            Winner::Decided(v) => Some(v),
            Winner::Exhausted { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantValueResult<I: Int> {
    pub interval: RationalInterval<I>,
    pub sub: Certificate<I>,
    pub sup: Certificate<I>,
    /// Iterations of the first loop.
    pub iterations: u64,
    pub oracle_calls: u64,
}

fn fin<I: Int>(e: Ext<I>) -> Result<Ratio<I>, ViError<I>> {
    match e {
        Ext::Fin(r) => Ok(r),
        Ext::NegInf => Err(ViError::NegInfIterate),
    }
}

/// Iterates `u ← F(u)` exactly from 0 until `top(u) ≤ 0` or `bottom(u) ≥ 0`.
pub fn value_iteration<I: Int, O: ShapleyOracle<I> + ?Sized>(
    oracle: &O,
    max_iter: u64,
) -> Result<Winner<I>, ViError<I>> {
    if !oracle.supports_exact() {
        return Err(ViError::NotExact);
    }
    let zero = Ratio::zero();
    let mut u = ExtVec::zeros(oracle.dim());
    for l in 1..=max_iter {
        u = oracle.eval(&u, &zero);
        let t = fin(top(&u)?)?;
        let b = fin(bottom(&u)?)?;
        if t <= zero {
            return Ok(Winner::Decided(WinnerVerdict {
                outcome: Outcome::MinWinsAll,
                iterations: l,
                witness: u,
            }));
        }
        if b >= zero {
            return Ok(Winner::Decided(WinnerVerdict {
                outcome: Outcome::MaxWinsAll,
                iterations: l,
                witness: u,
            }));
        }
    }
    Ok(Winner::Exhausted { iterations: max_iter, last: u })
}

/// Same decision with an ε-oracle: stops when `ℓε + top(u) ≤ 0` or
/// `−ℓε + bottom(u) ≥ 0`.
pub fn fp_value_iteration<I: Int, O: ShapleyOracle<I> + ?Sized>(
    oracle: &O,
    eps: &Ratio<I>,
    max_iter: u64,
) -> Result<Winner<I>, ViError<I>> {
    if *eps <= Ratio::zero() {
        return Err(ViError::NonPositive);
    }
    let zero = Ratio::zero();
    let mut slack = Ratio::zero();
    let mut u = ExtVec::zeros(oracle.dim());
    for l in 1..=max_iter {
        u = oracle.eval(&u, eps);
        slack = slack + eps;
        let t = fin(top(&u)?)?;
        let b = fin(bottom(&u)?)?;
        if &slack + t <= zero {
            return Ok(Winner::Decided(WinnerVerdict {
                outcome: Outcome::MinWinsAll,
                iterations: l,
                witness: u,
            }));
        }
        if b - &slack >= zero {
            return Ok(Winner::Decided(WinnerVerdict {
                outcome: Outcome::MaxWinsAll,
                iterations: l,
                witness: u,
            }));
        }
    }
    Ok(Winner::Exhausted { iterations: max_iter, last: u })
}

/// Builds `û = ∨ᵢ (−i·lam_lo + orbit[i])` and `ū = ∧ᵢ (−i·lam_hi + orbit[i])`
/// and returns the certificates `(lam_lo − eps, û, Sub)` and
/// `(lam_hi + eps, ū, Super)`.
pub fn build_certificates<I: Int>(
    orbit: &[ExtVec<I>],
    lam_lo: &Ratio<I>,
    lam_hi: &Ratio<I>,
    eps: &Ratio<I>,
) -> Result<(Certificate<I>, Certificate<I>), ViError<I>> {
    let first = orbit.first().ok_or(ViError::EmptyOrbit)?;
    let mut acc = OrbitHull::new(first.len(), lam_lo.clone(), lam_hi.clone());
    for (i, u) in orbit.iter().enumerate().skip(1) {
        acc.push(i as u64, u)?;
    }
    let OrbitHull { x, y, .. } = acc;
    Ok((
        Certificate { lam: lam_lo - eps, vec: x, direction: Direction::Sub },
        Certificate { lam: lam_hi + eps, vec: y, direction: Direction::Super },
    ))
}

/// Running ∨/∧ of shifted orbit points; index 0 contributes 𝟎.
struct OrbitHull<I: Int> {
    x: ExtVec<I>,
    y: ExtVec<I>,
    lo: Ratio<I>,
    hi: Ratio<I>,
}

impl<I: Int> OrbitHull<I> {
    fn new(n: usize, lo: Ratio<I>, hi: Ratio<I>) -> Self {
        OrbitHull { x: ExtVec::zeros(n), y: ExtVec::zeros(n), lo, hi }
    }

    fn push(&mut self, i: u64, u: &ExtVec<I>) -> Result<(), ViError<I>> {
        let k: Ratio<I> = Ratio::from_integer(I::from_u64(i).ok_or(NumericError::Overflow)?);
        let sx = -(&k * &self.lo);
        let sy = -(&k * &self.hi);
        for j in 0..u.len() {
            let uj = u.0[j].finite().ok_or(ViError::NegInfIterate)?;
            let a = uj + &sx;
            if Ext::Fin(a.clone()) > self.x.0[j] {
                self.x.0[j] = Ext::Fin(a);
            }
            let b = uj + &sy;
            if Ext::Fin(b.clone()) < self.y.0[j] {
                self.y.0[j] = Ext::Fin(b);
            }
        }
        Ok(())
    }
}

/// Approximates the mean payoff of an operator whose value does not depend on
/// the initial state, returning an interval of width at most `delta` and
/// certificates for both endpoints. The first loop makes at most `max_iter`
/// iterations.
pub fn approximate_constant_mean_payoff<I: Int, O: ShapleyOracle<I> + ?Sized>(
    oracle: &O,
    delta: &Ratio<I>,
    max_iter: u64,
) -> Result<ConstantValueResult<I>, ViError<I>> {
    if *delta <= Ratio::zero() {
        return Err(ViError::NonPositive);
    }
    let n = oracle.dim();
    let eight = Ratio::from_integer(I::from_u8(8).expect("small"));
    let eps = delta / &eight;
    let step = delta * Ratio::new(I::from_u8(3).expect("small"), I::from_u8(4).expect("small"));
    let mut thr = Ratio::zero();
    let mut u = ExtVec::zeros(n);
    let mut orbit: Option<Vec<ExtVec<I>>> = Some(vec![u.clone()]);
    let mut l: u64 = 0;
    let (t, b) = loop {
        if l >= max_iter {
            return Err(ViError::IterationCap { iterations: l, last: u });
        }
        u = oracle.eval(&u, &eps);
        l += 1;
        thr = thr + &step;
        let t = fin(top(&u)?)?;
        let b = fin(bottom(&u)?)?;
        if &t - &b <= thr {
            break (t, b);
        }
        if let Some(o) = orbit.as_mut() {
            if n * (o.len() + 1) <= ORBIT_BUDGET {
                o.push(u.clone());
            } else {
                orbit = None;
            }
        }
    };
    let lf: Ratio<I> = Ratio::from_integer(I::from_u64(l).ok_or(NumericError::Overflow)?);
    let kappa = &b / &lf;
    let lambda = &t / &lf;
    let mut calls = l;
    let mut hull = OrbitHull::new(n, kappa.clone(), lambda.clone());
    match orbit {
        Some(o) => {
            for (i, ui) in o.iter().enumerate().skip(1) {
                hull.push(i as u64, ui)?;
            }
        }
        None => {
            let mut w = ExtVec::zeros(n);
            for i in 1..l {
                w = oracle.eval(&w, &eps);
                calls += 1;
                hull.push(i, &w)?;
            }
        }
    }
    let lo = &kappa - &eps;
    let hi = &lambda + &eps;
    Ok(ConstantValueResult {
        interval: RationalInterval::new(lo.clone(), hi.clone())?,
        sub: Certificate { lam: lo, vec: hull.x, direction: Direction::Sub },
        sup: Certificate { lam: hi, vec: hull.y, direction: Direction::Super },
        iterations: l,
        oracle_calls: calls,
    })
}

/// `⌈x⌉` clamped to `u64`.
pub fn ceil_u64<I: Int>(x: &Ratio<I>) -> u64 {
    if *x <= Ratio::zero() {
        return 0;
    }
    x.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{ratio_of, Q};
    use crate::shapley::FnOracle;
    use std::sync::atomic::{AtomicI64, Ordering};

    type V = ExtVec<i128>;

    fn shift(c: i64) -> FnOracle<impl Fn(&V) -> V + Sync> {
        FnOracle::new(1, move |x: &V| x.add_scalar(&ratio_of(c, 1)))
    }

    fn swap_plus_one() -> FnOracle<impl Fn(&V) -> V + Sync> {
        FnOracle::new(2, |x: &V| {
            let one = ratio_of(1, 1);
            ExtVec(vec![x[1].add_fin(&one), x[0].add_fin(&one)])
        })
    }

    /// (x₂ + 3, x₁ − 1): constant value 1, bias (2, 0).
    fn skew() -> FnOracle<impl Fn(&V) -> V + Sync> {
        FnOracle::new(2, |x: &V| {
            ExtVec(vec![x[1].add_fin(&ratio_of(3, 1)), x[0].add_fin(&ratio_of(-1, 1))])
        })
    }

    /// Perturbs an exact map by a fixed signed multiple of eps per call.
    struct Perturbed<F> {
        f: F,
        sign: AtomicI64,
        alternate: bool,
        scale: Q,
    }

    impl<F: Fn(&V) -> V + Sync> ShapleyOracle<i128> for Perturbed<F> {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, x: &V, eps: &Q) -> V {
            let s = self.sign.load(Ordering::SeqCst);
            if self.alternate {
                self.sign.store(-s, Ordering::SeqCst);
            }
            (self.f)(x).add_scalar(&(eps * self.scale * Q::from_integer(s as i128)))
        }
    }

    #[test]
    fn exact_winner_examples() {
        let w = value_iteration(&shift(1), 10).unwrap();
        let v = w.verdict().unwrap();
        assert_eq!((v.outcome, v.iterations), (Outcome::MaxWinsAll, 1));
        let w = value_iteration(&shift(-1), 10).unwrap();
        let v = w.verdict().unwrap();
        assert_eq!((v.outcome, v.iterations), (Outcome::MinWinsAll, 1));
        let w = value_iteration(&swap_plus_one(), 10).unwrap();
        let v = w.verdict().unwrap();
        assert_eq!(v.outcome, Outcome::MaxWinsAll);
        assert_eq!(v.iterations, 1);
        assert_eq!(v.witness, ExtVec::from_ints(&[1, 1]));
    }

    #[test]
    fn exact_winner_zero_value() {
        // Both stopping tests hold at u = 0, and the top test is checked first.
        let w = value_iteration(&shift(0), 50).unwrap();
        assert_eq!(w.verdict().map(|v| (v.outcome, v.iterations)), Some((Outcome::MinWinsAll, 1)));
        // (x₂ + 1, x₁ − 2) has value −1/2 and oscillates before stopping.
        let f = FnOracle::new(2, |x: &V| {
            ExtVec(vec![x[1].add_fin(&ratio_of(1, 1)), x[0].add_fin(&ratio_of(-2, 1))])
        });
        let w = value_iteration(&f, 50).unwrap();
        assert_eq!(w.verdict().map(|v| (v.outcome, v.iterations)), Some((Outcome::MinWinsAll, 2)));
        match value_iteration(&f, 1).unwrap() {
            Winner::Exhausted { iterations, last } => {
                assert_eq!(iterations, 1);
                assert_eq!(last, ExtVec::from_ints(&[1, -2]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fp_winner_with_adversarial_oracle() {
        let eps = ratio_of(1, 4);
        // Each call loses eps: u^ℓ = 3ℓ/4 and −ℓ/4 + 3ℓ/4 ≥ 0 already at ℓ = 1.
        let down = |c: i64| Perturbed {
            f: move |x: &V| x.add_scalar(&ratio_of(c, 1)),
            sign: AtomicI64::new(-1),
            alternate: false,
            scale: ratio_of(1, 1),
        };
        let v = fp_value_iteration(&down(1), &eps, 10).unwrap();
        assert_eq!(v.verdict().map(|v| (v.outcome, v.iterations)), Some((Outcome::MaxWinsAll, 1)));
        let up = Perturbed {
            f: |x: &V| x.add_scalar(&ratio_of(-1, 1)),
            sign: AtomicI64::new(1),
            alternate: false,
            scale: ratio_of(1, 1),
        };
        let v = fp_value_iteration(&up, &eps, 10).unwrap();
        assert_eq!(v.verdict().map(|v| (v.outcome, v.iterations)), Some((Outcome::MinWinsAll, 1)));
        // Error strictly inside (−eps, eps) never meets either test on F(x) = x.
        let wobble = Perturbed {
            f: |x: &V| x.clone(),
            sign: AtomicI64::new(1),
            alternate: true,
            scale: ratio_of(1, 2),
        };
        assert!(matches!(
            fp_value_iteration(&wobble, &eps, 40).unwrap(),
            Winner::Exhausted { iterations: 40, .. }
        ));
        assert!(matches!(
            fp_value_iteration(&shift(0), &eps, 40).unwrap(),
            Winner::Exhausted { .. }
        ));
    }

    #[test]
    fn fp_bound_from_sub_certificate() {
        // Sub certificate (1, 0) for x + 1 and ε = 1/4 gives ⌈0/(1 − 1/2)⌉ = 0, so one step.
        let v = fp_value_iteration(&shift(1), &ratio_of(1, 4), 5).unwrap();
        assert!(v.verdict().unwrap().iterations <= 1);
    }

    #[test]
    fn constant_value_translation() {
        for c in [-3i64, 0, 2] {
            let r = approximate_constant_mean_payoff(&shift(c), &ratio_of(1, 3), 100).unwrap();
            assert_eq!(r.iterations, 1);
            assert!(r.interval.contains(&ratio_of(c, 1)));
            assert!(r.interval.width() <= ratio_of(1, 3));
        }
    }

    #[test]
    fn constant_value_skew_example() {
        let f = skew();
        let delta = ratio_of(1, 2);
        let r = approximate_constant_mean_payoff(&f, &delta, 1000).unwrap();
        assert!(r.iterations <= 32);
        assert!(r.interval.contains(&ratio_of(1, 1)));
        assert!(r.interval.width() <= delta);
        assert_eq!(r.sub.lam, r.interval.lo);
        assert_eq!(r.sup.lam, r.interval.hi);
        let ev = |x: &V| f.eval(x, &Q::zero());
        r.sub.verify(ev).unwrap();
        r.sup.verify(ev).unwrap();
        // Bias (2, 0): F(2, 0) = (3, 1) = 1 + (2, 0).
        assert_eq!(ev(&ExtVec::from_ints(&[2, 0])), ExtVec::from_ints(&[3, 1]));
    }

    #[test]
    fn replay_path_matches_stored_orbit() {
        // A budget-independent check: rebuild certificates from an explicit orbit.
        let f = skew();
        let delta = ratio_of(1, 2);
        let r = approximate_constant_mean_payoff(&f, &delta, 1000).unwrap();
        let mut orbit = vec![ExtVec::zeros(2)];
        for _ in 1..r.iterations {
            let next = f.eval(orbit.last().unwrap(), &Q::zero());
            orbit.push(next);
        }
        let eps = delta / Q::from_integer(8);
        let kappa = r.interval.lo + eps;
        let lambda = r.interval.hi - eps;
        let (s, p) = build_certificates(&orbit, &kappa, &lambda, &eps).unwrap();
        assert_eq!(s, r.sub);
        assert_eq!(p, r.sup);
    }

    #[test]
    fn build_certificates_examples() {
        let orbit = vec![ExtVec::zeros(2)];
        let (s, p) = build_certificates(&orbit, &ratio_of(1, 1), &ratio_of(1, 1), &Q::zero()).unwrap();
        assert_eq!(s.vec, ExtVec::zeros(2));
        assert_eq!(p.vec, ExtVec::zeros(2));
        // F(x) = x + 1, exact, λ = 1: û = 0 for every ℓ.
        let f = shift(1);
        let mut orbit = vec![ExtVec::zeros(1)];
        for _ in 0..6 {
            let next = f.eval(orbit.last().unwrap(), &Q::zero());
            orbit.push(next);
        }
        let (s, _) = build_certificates(&orbit, &ratio_of(1, 1), &ratio_of(1, 1), &Q::zero()).unwrap();
        assert_eq!(s.vec, ExtVec::zeros(1));
        s.verify(|x| f.eval(x, &Q::zero())).unwrap();
        assert_eq!(build_certificates::<i128>(&[], &Q::zero(), &Q::zero(), &Q::zero()), Err(ViError::EmptyOrbit));
    }

    #[test]
    fn violation_names_coordinate() {
        let f = skew();
        let c = Certificate { lam: ratio_of(2, 1), vec: ExtVec::from_ints(&[2, 0]), direction: Direction::Sub };
        let e = c.verify(|x| f.eval(x, &Q::zero())).unwrap_err();
        assert_eq!(e.coord, 0);
        let ok = Certificate { lam: ratio_of(1, 1), vec: ExtVec::from_ints(&[2, 0]), direction: Direction::Sub };
        ok.verify(|x| f.eval(x, &Q::zero())).unwrap();
    }

    #[test]
    fn cap_is_reported() {
        let f = FnOracle::new(2, |x: &V| ExtVec(vec![x[0].add_fin(&ratio_of(1, 1)), x[1].clone()]));
        match approximate_constant_mean_payoff(&f, &ratio_of(1, 10), 20) {
            Err(ViError::IterationCap { iterations, .. }) => assert_eq!(iterations, 20),
            other => panic!("{other:?}"),
        }
    }
}
