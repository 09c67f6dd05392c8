//! Oracle contract for Shapley operators and subset restriction.

use std::sync::atomic::{AtomicU64, Ordering};

use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::numeric::{Ext, ExtVec, Int};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapleyError {
    #[error("empty subset")]
    EmptySubset,
    #[error("state {0} outside 0..{1}")]
    OutOfRange(usize, usize),
    #[error("duplicate state {0} in subset")]
    Duplicate(usize),
}

/// An ε-approximate evaluator of an order-preserving, additively homogeneous
/// map on (ℚ ∪ {−∞})ⁿ.
///
/// For every finite coordinate, `|F_j(x) − eval(x, eps)_j| ≤ eps`, and
/// `eval(x, eps)_j = −∞` exactly when `F_j(x) = −∞`. Evaluation is
/// deterministic. `eps = 0` requests exact evaluation, which only oracles
/// reporting `supports_exact` honour.
pub trait ShapleyOracle<I: Int>: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &ExtVec<I>, eps: &Ratio<I>) -> ExtVec<I>;

    fn exact_support(&self) -> bool {
        true
    }

    fn supports_exact(&self) -> bool {
        false
    }
}

impl<I: Int, O: ShapleyOracle<I> + ?Sized> ShapleyOracle<I> for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &ExtVec<I>, eps: &Ratio<I>) -> ExtVec<I> {
        (**self).eval(x, eps)
    }
    fn exact_support(&self) -> bool {
        (**self).exact_support()
    }
    fn supports_exact(&self) -> bool {
        (**self).supports_exact()
    }
}

/// Exact oracle backed by a closure.
pub struct FnOracle<F> {
    n: usize,
    f: F,
}

impl<F> FnOracle<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnOracle { n, f }
    }
}

impl<I: Int, F> ShapleyOracle<I> for FnOracle<F>
where
    F: Fn(&ExtVec<I>) -> ExtVec<I> + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &ExtVec<I>, _eps: &Ratio<I>) -> ExtVec<I> {
        (self.f)(x)
    }
    fn supports_exact(&self) -> bool {
        true
    }
}

/// Wrapper counting oracle calls.
pub struct Counting<O> {
    inner: O,
    calls: AtomicU64,
}

impl<O> Counting<O> {
    pub fn new(inner: O) -> Self {
        Counting { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<I: Int, O: ShapleyOracle<I>> ShapleyOracle<I> for Counting<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &ExtVec<I>, eps: &Ratio<I>) -> ExtVec<I> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(x, eps)
    }
    fn exact_support(&self) -> bool {
        self.inner.exact_support()
    }
    fn supports_exact(&self) -> bool {
        self.inner.supports_exact()
    }
}

/// `F^S = p^S ∘ F ∘ i^S`: pad with −∞ outside `S`, evaluate, project to `S`.
pub struct Restricted<'a, O: ?Sized> {
    parent: &'a O,
    subset: Vec<usize>,
}

impl<O: ?Sized> Restricted<'_, O> {
    /// States of the parent indexed by this restriction, in order.
    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn pad<I: Int>(&self, x: &ExtVec<I>, n: usize) -> ExtVec<I> {
        let mut full = vec![Ext::NegInf; n];
        for (k, &s) in self.subset.iter().enumerate() {
            full[s] = x.0[k].clone();
        }
        ExtVec(full)
    }
}

impl<I: Int, O: ShapleyOracle<I> + ?Sized> ShapleyOracle<I> for Restricted<'_, O> {
    fn dim(&self) -> usize {
        self.subset.len()
    }
    fn eval(&self, x: &ExtVec<I>, eps: &Ratio<I>) -> ExtVec<I> {
        assert_eq!(x.len(), self.subset.len(), "restricted oracle input length");
        let y = self.parent.eval(&self.pad(x, self.parent.dim()), eps);
        ExtVec(self.subset.iter().map(|&s| y.0[s].clone()).collect())
    }
    fn exact_support(&self) -> bool {
        self.parent.exact_support()
    }
    fn supports_exact(&self) -> bool {
        self.parent.supports_exact()
    }
}

fn check_subset(subset: &[usize], n: usize) -> Result<(), ShapleyError> {
    if subset.is_empty() {
        return Err(ShapleyError::EmptySubset);
    }
    let mut seen = vec![false; n];
    for &s in subset {
        if s >= n {
            return Err(ShapleyError::OutOfRange(s, n));
        }
        if seen[s] {
            return Err(ShapleyError::Duplicate(s));
        }
        seen[s] = true;
    }
    Ok(())
}

pub fn restrict<'a, I: Int, O: ShapleyOracle<I> + ?Sized>(
    oracle: &'a O,
    subset: &[usize],
) -> Result<Restricted<'a, O>, ShapleyError> {
    check_subset(subset, oracle.dim())?;
    Ok(Restricted { parent: oracle, subset: subset.to_vec() })
}

/// `S` is a dominion iff `F^S(0)` has no −∞ coordinate.
pub fn is_dominion<I: Int, O: ShapleyOracle<I> + ?Sized>(
    oracle: &O,
    subset: &[usize],
) -> Result<bool, ShapleyError> {
    let r = restrict(oracle, subset)?;
    let y = r.eval(&ExtVec::zeros(subset.len()), &Ratio::one());
    Ok(y.all_finite())
}

/// Complement of `set` inside `0..n`, ascending.
pub fn complement(set: &[usize], n: usize) -> Vec<usize> {
    let mut mark = vec![false; n];
    for &s in set {
        mark[s] = true;
    }
    (0..n).filter(|&i| !mark[i]).collect()
}

/// Exact evaluation helper: `eval(x, 0)`.
pub fn eval_exact<I: Int, O: ShapleyOracle<I> + ?Sized>(oracle: &O, x: &ExtVec<I>) -> ExtVec<I> {
    oracle.eval(x, &Ratio::zero())
}
