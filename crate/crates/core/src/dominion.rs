//! Constant-value decision, dominion extension and the top class.

use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::numeric::{bottom, top, Ext, ExtVec, Int, NumericError};
use crate::shapley::{is_dominion, restrict, ShapleyError, ShapleyOracle};
use crate::value_iteration::ceil_u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DominionError {
    #[error("delta must be positive and R nonnegative")]
    BadParams,
    #[error("seed must be a nonempty subset of the dominion")]
    BadSeed,
    #[error("iterate has a -inf coordinate; the set is not a dominion")]
    NotDominion,
    #[error("oracle call limit {0} reached")]
    CallLimit(u64),
    #[error(transparent)]
    Shapley(#[from] ShapleyError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// A priori separation `delta < sep(F)` and a bound `r` on the Hilbert
/// seminorm of approximate eigenvectors of the top-class restriction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SepParams<I: Int> {
    pub delta: Ratio<I>,
    pub r: Ratio<I>,
    /// Oracle calls allowed across one decision or one top-class search.
    pub call_limit: Option<u64>,
}

impl<I: Int> SepParams<I> {
    pub fn new(delta: Ratio<I>, r: Ratio<I>) -> Result<Self, DominionError> {
        if delta <= Ratio::zero() || r < Ratio::zero() {
            return Err(DominionError::BadParams);
        }
        Ok(SepParams { delta, r, call_limit: None })
    }

    pub fn with_call_limit(mut self, limit: u64) -> Self {
        self.call_limit = Some(limit);
        self
    }

    pub fn eps(&self) -> Ratio<I> {
        &self.delta / Ratio::from_integer(I::from_u8(8).expect("small"))
    }

    /// `⌈8R/δ⌉` as an exact integer.
    pub fn steps(&self) -> I {
        let eight = Ratio::from_integer(I::from_u8(8).expect("small"));
        (eight * &self.r / &self.delta).ceil().to_integer()
    }

    /// `1 + ⌈8R/δ⌉`, saturating.
    pub fn cap(&self) -> u64 {
        let eight = Ratio::from_integer(I::from_u8(8).expect("small"));
        ceil_u64(&(eight * &self.r / &self.delta)).saturating_add(1)
    }
}

/// `n² + n·⌈8R/δ⌉`.
pub fn top_class_call_budget<I: Int>(n: usize, params: &SepParams<I>) -> I {
    let n = I::from_usize(n).expect("state count fits");
    n.clone() * n.clone() + n * params.steps()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstantDecision {
    Empty { iterations: u64 },
    /// Indices (in the oracle's own numbering) attaining the bottom of the
    /// final iterate.
    LowSet { states: Vec<usize>, iterations: u64 },
}

impl ConstantDecision {
    pub fn iterations(&self) -> u64 {
        match self {
            ConstantDecision::Empty { iterations } | ConstantDecision::LowSet { iterations, .. } => *iterations,
        }
    }
}

/// Runs ε = δ/8 value iteration until `top − bottom ≤ (3/4)δℓ` (value is
/// constant) or `ℓ = 1 + ⌈8R/δ⌉` (returns the argmin set).
pub fn decide_constant_value<I: Int, O: ShapleyOracle<I> + ?Sized>(
    oracle: &O,
    params: &SepParams<I>,
) -> Result<ConstantDecision, DominionError> {
    let cap = params.cap();
    let eps = params.eps();
    let step = &params.delta * Ratio::new(I::from_u8(3).expect("small"), I::from_u8(4).expect("small"));
    let mut thr = Ratio::zero();
    let mut u = ExtVec::zeros(oracle.dim());
    let mut l: u64 = 0;
    loop {
        if params.call_limit.is_some_and(|c| l >= c) {
            return Err(DominionError::CallLimit(l));
        }
        u = oracle.eval(&u, &eps);
        l += 1;
        thr = thr + &step;
        let t = match top(&u)? {
            Ext::Fin(t) => t,
            Ext::NegInf => return Err(DominionError::NotDominion),
        };
        let b = match bottom(&u)? {
            Ext::Fin(b) => b,
            Ext::NegInf => return Err(DominionError::NotDominion),
        };
        if &t - &b <= thr {
            return Ok(ConstantDecision::Empty { iterations: l });
        }
        if l >= cap {
            let target = Ext::Fin(b);
            let states = (0..u.len()).filter(|&i| u[i] == target).collect();
            return Ok(ConstantDecision::LowSet { states, iterations: l });
        }
    }
}

/// Grows `seed` inside `dominion` by every state whose restricted coordinate
/// becomes −∞ once the current set is sent to −∞. States are absolute
/// indices of `oracle`; the result is sorted.
pub fn extend<I: Int, O: ShapleyOracle<I> + ?Sized>(
    oracle: &O,
    dominion: &[usize],
    seed: &[usize],
) -> Result<Vec<usize>, DominionError> {
    if seed.is_empty() || seed.iter().any(|s| !dominion.contains(s)) {
        return Err(DominionError::BadSeed);
    }
    let r = restrict(oracle, dominion)?;
    let mut inside: Vec<bool> = dominion.iter().map(|d| seed.contains(d)).collect();
    let one = Ratio::one();
    loop {
        if inside.iter().all(|&b| b) {
            break;
        }
        let x = ExtVec(inside.iter().map(|&b| if b { Ext::NegInf } else { Ext::zero() }).collect());
        let y = r.eval(&x, &one);
        let mut grew = false;
        for (k, e) in y.iter().enumerate() {
            if !inside[k] && *e == Ext::NegInf {
                inside[k] = true;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let mut out: Vec<usize> =
        dominion.iter().zip(&inside).filter(|(_, &b)| b).map(|(&d, _)| d).collect();
    out.sort_unstable();
    Ok(out)
}

/// Result of the top-class search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopClass {
    /// States of maximal value, ascending.
    pub states: Vec<usize>,
    /// The successive dominions `[n] = D₁ ⊋ D₂ ⊋ …`, last one equal to `states`.
    pub chain: Vec<Vec<usize>>,
    /// Value-iteration steps spent in each constant-value decision.
    pub decide_iterations: Vec<u64>,
}

/// Shrinks `D = [n]` by `Extend(D, S)` until the constant-value decision on
/// `F^D` returns the empty set.
pub fn top_class<I: Int, O: ShapleyOracle<I> + ?Sized>(
    oracle: &O,
    params: &SepParams<I>,
) -> Result<TopClass, DominionError> {
    let n = oracle.dim();
    let mut d: Vec<usize> = (0..n).collect();
    let mut chain = vec![d.clone()];
    let mut its = Vec::new();
    let mut spent: u64 = 0;
    loop {
        let r = restrict(oracle, &d)?;
        let mut local = params.clone();
        if let Some(c) = params.call_limit {
            local.call_limit = Some(c - spent);
        }
        let dec = decide_constant_value(&r, &local).map_err(|e| match e {
            DominionError::CallLimit(k) => DominionError::CallLimit(spent + k),
            e => e,
        })?;
        spent += dec.iterations();
        its.push(dec.iterations());
        match dec {
            ConstantDecision::Empty { .. } => {
                return Ok(TopClass { states: d, chain, decide_iterations: its });
            }
            ConstantDecision::LowSet { states, .. } => {
                let seed: Vec<usize> = states.iter().map(|&k| d[k]).collect();
                let gone = extend(oracle, &d, &seed)?;
                d.retain(|s| !gone.contains(s));
                if d.is_empty() {
                    return Err(DominionError::NotDominion);
                }
                chain.push(d.clone());
            }
        }
    }
}

/// Checks every set of a chain is a dominion.
pub fn chain_is_dominions<I: Int, O: ShapleyOracle<I> + ?Sized>(
    oracle: &O,
    chain: &[Vec<usize>],
) -> Result<bool, DominionError> {
    for d in chain {
        if !is_dominion(oracle, d)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{ratio_of, Q};
    use crate::shapley::{Counting, FnOracle};

    type V = ExtVec<i128>;

    #[test]
    fn call_budget_examples() {
        let p = |r: i64, dn: i64, dd: i64| SepParams::<i128>::new(ratio_of(dn, dd), ratio_of(r, 1)).unwrap();
        assert_eq!(top_class_call_budget(1, &p(1, 1, 1)), 9);
        assert_eq!(top_class_call_budget(2, &p(2, 1, 2)), 68);
        assert_eq!(top_class_call_budget(3, &p(8, 1, 16)), 3081);
        assert!(SepParams::<i128>::new(Q::zero(), Q::one()).is_err());
    }

    #[test]
    fn single_state_is_constant() {
        let f = FnOracle::new(1, |x: &V| x.add_scalar(&ratio_of(1, 1)));
        let p = SepParams::new(ratio_of(1, 4), ratio_of(1, 1)).unwrap();
        assert_eq!(decide_constant_value(&f, &p).unwrap(), ConstantDecision::Empty { iterations: 1 });
    }

    #[test]
    fn skew_is_constant() {
        let f = FnOracle::new(2, |x: &V| {
            ExtVec(vec![x[1].add_fin(&ratio_of(3, 1)), x[0].add_fin(&ratio_of(-1, 1))])
        });
        let p = SepParams::new(ratio_of(1, 2), ratio_of(2, 1)).unwrap();
        assert!(matches!(decide_constant_value(&f, &p).unwrap(), ConstantDecision::Empty { .. }));
    }

    /// Two absorbing states with rewards 5 and 0, plus a state that can only
    /// move to state 1.
    fn absorbing() -> FnOracle<impl Fn(&V) -> V + Sync> {
        FnOracle::new(3, |x: &V| {
            ExtVec(vec![x[0].add_fin(&ratio_of(5, 1)), x[1].clone(), x[1].clone()])
        })
    }

    #[test]
    fn absorbing_low_set_and_top_class() {
        let f = Counting::new(absorbing());
        let p = SepParams::new(ratio_of(1, 1), ratio_of(5, 1)).unwrap();
        match decide_constant_value(&f, &p).unwrap() {
            ConstantDecision::LowSet { states, iterations } => {
                assert_eq!(states, vec![1, 2]);
                assert_eq!(iterations, p.cap());
            }
            other => panic!("{other:?}"),
        }
        let f = Counting::new(absorbing());
        let tc = top_class(&f, &p).unwrap();
        assert_eq!(tc.states, vec![0]);
        assert!(chain_is_dominions(&f, &tc.chain).unwrap());
        assert!(f.calls() as i128 <= top_class_call_budget(3, &p));
    }

    #[test]
    fn call_limit_stops_search() {
        let p = SepParams::new(ratio_of(1, 1), ratio_of(5, 1)).unwrap().with_call_limit(10);
        assert_eq!(decide_constant_value(&absorbing(), &p), Err(DominionError::CallLimit(10)));
        assert_eq!(top_class(&absorbing(), &p), Err(DominionError::CallLimit(10)));
        let p = SepParams::new(ratio_of(1, 1), ratio_of(5, 1)).unwrap().with_call_limit(1000);
        assert_eq!(top_class(&absorbing(), &p).unwrap().states, vec![0]);
    }

    #[test]
    fn extend_examples() {
        let f = absorbing();
        assert_eq!(extend(&f, &[0, 1, 2], &[0, 1, 2]).unwrap(), vec![0, 1, 2]);
        // State 2 only reaches state 1.
        assert_eq!(extend(&f, &[0, 1, 2], &[1]).unwrap(), vec![1, 2]);
        // Seed disjoint from the absorbing dominion {0} stays disjoint.
        assert!(!extend(&f, &[0, 1, 2], &[2]).unwrap().contains(&0));
        assert_eq!(extend(&f, &[0, 1, 2], &[]), Err(DominionError::BadSeed));
    }
}
