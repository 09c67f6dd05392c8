//! The log-domain operator `F = log ∘ T ∘ exp` evaluated with certified
//! fixed-point bounds.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

use super::EntropyGame;
use crate::logexp::{bits_for, exp_fixed, from_fixed, ln_fixed, pow2, to_fixed};
use crate::numeric::{Ext, ExtVec};
use crate::shapley::ShapleyOracle;
use crate::value_iteration::{Certificate, Direction, Violation};

/// Working precision at which certificate checks give up.
pub const MAX_VERIFY_BITS: u32 = 4096;

type Bounds = Option<(BigInt, BigInt)>;

/// Bounds on `log Σ_l m_pl exp(x_l)` in units of `2^-p`, from fixed-point
/// brackets of `x`. `None` when every successor is −∞.
fn people_bounds(game: &EntropyGame, p: usize, x: &[Bounds], prec: u32) -> Bounds {
    let terms: Vec<(u64, &BigInt, &BigInt)> =
        game.p_adj[p].iter().filter_map(|&(l, m)| x[l].as_ref().map(|(lo, hi)| (m, lo, hi))).collect();
    let s = terms.iter().map(|t| t.2).max()?.clone();
    let mut sum_lo = BigInt::zero();
    let mut sum_hi = BigInt::zero();
    for (m, lo, hi) in terms {
        sum_lo += exp_fixed(&(lo - &s), prec).0 * m;
        sum_hi += exp_fixed(&(hi - &s), prec).1 * m;
    }
    if !sum_lo.is_positive() {
        sum_lo = BigInt::one();
    }
    let (a, b) = ln_fixed(&sum_lo, &sum_hi, prec);
    Some((&s + a, s + b))
}

/// Lower and upper bounds on `F_d(x)` in units of `2^-prec`; `None` for −∞.
pub fn eval_bounds(game: &EntropyGame, x: &ExtVec<BigInt>, prec: u32) -> Vec<Bounds> {
    assert_eq!(x.len(), game.n(), "oracle input length");
    let xf: Vec<Bounds> = x
        .iter()
        .map(|e| match e {
            Ext::NegInf => None,
            Ext::Fin(v) => Some(to_fixed(v, prec)),
        })
        .collect();
    let people: Vec<Bounds> = (0..game.p_ids.len()).map(|p| people_bounds(game, p, &xf, prec)).collect();
    let tribune: Vec<Bounds> = game
        .t_adj
        .iter()
        .map(|adj| {
            adj.iter().filter_map(|&p| people[p].as_ref()).fold(None, |acc: Bounds, (lo, hi)| match acc {
                None => Some((lo.clone(), hi.clone())),
                Some((a, b)) => Some((a.max(lo.clone()), b.max(hi.clone()))),
            })
        })
        .collect();
    game.d_adj
        .iter()
        .map(|adj| {
            let mut acc: Option<(BigInt, BigInt)> = None;
            for &t in adj {
                let (lo, hi) = tribune[t].as_ref()?;
                acc = Some(match acc {
                    None => (lo.clone(), hi.clone()),
                    Some((a, b)) => (a.min(lo.clone()), b.min(hi.clone())),
                });
            }
            acc
        })
        .collect()
}

/// Certified ε-oracle. Precision doubles until every coordinate's bracket
/// is narrow enough for its rounded midpoint to be within ε.
#[derive(Debug, Clone, Copy)]
pub struct LogOracle<'a> {
    game: &'a EntropyGame,
}

impl<'a> LogOracle<'a> {
    pub fn new(game: &'a EntropyGame) -> Self {
        LogOracle { game }
    }

    pub fn game(&self) -> &EntropyGame {
        self.game
    }
}

impl ShapleyOracle<BigInt> for LogOracle<'_> {
    fn dim(&self) -> usize {
        self.game.n()
    }

    fn eval(&self, x: &ExtVec<BigInt>, eps: &Ratio<BigInt>) -> ExtVec<BigInt> {
        let mut prec = bits_for(eps);
        loop {
            let b = eval_bounds(self.game, x, prec);
            let ok = !eps.is_positive()
                || b.iter().flatten().all(|(lo, hi)| {
                    (hi - lo + 2u32) * eps.denom() <= eps.numer() * pow2(prec + 1)
                });
            if ok {
                return ExtVec(
                    b.into_iter()
                        .map(|e| match e {
                            None => Ext::NegInf,
                            Some((lo, hi)) => Ext::Fin(from_fixed((lo + hi) >> 1u32, prec)),
                        })
                        .collect(),
                );
            }
            prec *= 2;
        }
    }
}

/// `log Σ_l m_pl exp(x_l)` for every People state within `eps`; `None`
/// when all successors are −∞.
pub fn people_scores(game: &EntropyGame, x: &ExtVec<BigInt>, eps: &BigRational) -> Vec<Option<BigRational>> {
    assert!(eps.is_positive(), "score precision must be positive");
    let mut prec = bits_for(eps);
    loop {
        let xf: Vec<Bounds> = x.iter().map(|e| e.finite().map(|v| to_fixed(v, prec))).collect();
        let b: Vec<Bounds> = (0..game.p_ids.len()).map(|p| people_bounds(game, p, &xf, prec)).collect();
        let ok = b
            .iter()
            .flatten()
            .all(|(lo, hi)| (hi - lo + 2u32) * eps.denom() <= eps.numer() * pow2(prec + 1));
        if ok {
            return b.into_iter().map(|e| e.map(|(lo, hi)| from_fixed((lo + hi) >> 1u32, prec))).collect();
        }
        prec *= 2;
    }
}

/// Checks `λ + v ≤ F(v)` (Sub) or `λ + v ≥ F(v)` (Super) with certified
/// bounds on `F`, refining until each coordinate is decided. The reported
/// right-hand side is the bound that failed.
pub fn verify_log_certificate(game: &EntropyGame, cert: &Certificate<BigInt>) -> Result<(), Violation<BigInt>> {
    let n = game.n();
    let mut pending: Vec<usize> = (0..n).collect();
    let mut prec = 64;
    loop {
        let b = eval_bounds(game, &cert.vec, prec);
        let mut next = Vec::new();
        for &j in &pending {
            let lhs = cert.vec[j].add_fin(&cert.lam);
            let (bound, rhs) = match (&b[j], cert.direction) {
                (None, _) => (false, Ext::NegInf),
                (Some((lo, _)), Direction::Sub) => {
                    let r = Ext::Fin(from_fixed(lo.clone(), prec));
                    (lhs <= r, r)
                }
                (Some((_, hi)), Direction::Super) => {
                    let r = Ext::Fin(from_fixed(hi.clone(), prec));
                    (lhs >= r, r)
                }
            };
            if !cert.vec[j].is_finite() || b[j].is_none() {
                return Err(Violation { coord: j, lhs, rhs });
            }
            if !bound {
                if prec >= MAX_VERIFY_BITS {
                    return Err(Violation { coord: j, lhs, rhs });
                }
                next.push(j);
            }
        }
        if next.is_empty() {
            return Ok(());
        }
        pending = next;
        prec *= 2;
    }
}

/// `exp` of a log-domain interval, rounded outward.
pub(crate) fn exp_interval(lo: &BigRational, hi: &BigRational, prec: u32) -> (BigRational, BigRational) {
    let a = crate::logexp::exp_bounds(lo, prec).0;
    let b = crate::logexp::exp_bounds(hi, prec).1;
    (a, b)
}
