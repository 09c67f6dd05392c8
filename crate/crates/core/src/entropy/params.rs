//! Separation and norm parameters for the entropy backend.
//!
//! The closed-form bounds are valid for every game but are far too large
//! to drive value iteration on anything but trivial inputs. The certified
//! provider derives both parameters from the instance instead: the
//! separation from the exact order of every Perron root that can be the
//! value of a dominion subgame, and the norm bound from approximate
//! eigenvectors of the top-class restriction.

use std::cmp::Ordering;
use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use super::brute::{brute_force_entropy_values, strategy_options, Components, EntropyBruteError};
use super::oracle::LogOracle;
use super::{decode, EntropyError, EntropyGame, StrategyPair};
use crate::linalg::rank;
use crate::logexp::ln_bounds;
use crate::numeric::{hilbert_seminorm, ExtVec};
use crate::perron::{compare_roots, Matrix, PerronError, PerronRoot};
use crate::value_iteration::approximate_constant_mean_payoff;

/// Rational upper bound on `e`.
pub const E_UPPER: (u64, u64) = (27_182_818_285, 10_000_000_000);

/// Default oracle-call limit attached to closed-form parameters.
pub const THEORETICAL_CALL_LIMIT: u64 = 200_000;

/// Iteration cap when computing approximate eigenvectors for the norm bound.
pub const RADIUS_ITERATIONS: u64 = 1_000_000;

/// Most Despot states for which dominions are enumerated.
pub const MAX_DOMINION_STATES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("{pairs} strategy pairs exceed the enumeration budget {budget}")]
    Budget { pairs: u128, budget: u128 },
    #[error("{0} Despot states are too many to enumerate dominions")]
    TooManyStates(usize),
    #[error(transparent)]
    Perron(#[from] PerronError),
    #[error(transparent)]
    Game(#[from] EntropyError),
    #[error("brute force: {0}")]
    Brute(Box<EntropyBruteError>),
    #[error("value iteration: {0}")]
    Iteration(String),
}

impl From<EntropyBruteError> for ParamError {
    fn from(e: EntropyBruteError) -> Self {
        ParamError::Brute(Box::new(e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankProfile {
    pub r: usize,
    /// `⌈ν_{n,r}⌉`.
    pub nu: BigInt,
    /// `n·W·⌈ν_{n,r}⌉`.
    pub nu_hat: BigInt,
    /// `false` when `r = n` was used because enumeration was over budget.
    pub enumerated: bool,
}

/// `⌈2^r (r+1)^{8r} r^{−2r²+r+1} (n·e)^{4r²} max(1, W/2)^{4r²}⌉` with `e`
/// replaced by [`E_UPPER`].
pub fn nu_bound(n: usize, r: usize, w: u64) -> BigInt {
    assert!(r >= 1 && n >= 1, "rank and size must be positive");
    let r32 = r as u32;
    let e = BigRational::new(BigInt::from(E_UPPER.0), BigInt::from(E_UPPER.1));
    let half_w = if w >= 2 { BigRational::new(BigInt::from(w), BigInt::from(2)) } else { BigRational::one() };
    let rr = BigInt::from(r);
    let num = BigRational::from_integer(
        BigInt::from(2).pow(r32) * BigInt::from(r + 1).pow(8 * r32) * rr.pow(r32 + 1),
    );
    let den = BigRational::from_integer(rr.pow(2 * r32 * r32));
    let ne = e * BigInt::from(n);
    let k = 4 * r32 * r32;
    let v = num / den * pow(&ne, k) * pow(&half_w, k);
    v.ceil().to_integer()
}

fn pow(x: &BigRational, k: u32) -> BigRational {
    BigRational::new(x.numer().pow(k), x.denom().pow(k))
}

fn pair_count(game: &EntropyGame) -> u128 {
    let (s, t) = game.strategy_counts();
    s.saturating_mul(t)
}

/// Largest ambiguity-matrix rank over all pairs, or `r = n` when the pair
/// count exceeds `budget` and `fallback` is set.
pub fn rank_profile(game: &EntropyGame, budget: u128, fallback: bool) -> Result<RankProfile, ParamError> {
    let n = game.n();
    let pairs = pair_count(game);
    let (r, enumerated) = if pairs <= budget {
        let (s_opts, t_opts) = strategy_options(game);
        let nt = t_opts.iter().fold(1u128, |a, o| a * o.len() as u128);
        let r = (0..pairs)
            .into_par_iter()
            .map(|i| {
                let pair = StrategyPair { sigma: decode(&s_opts, i / nt), tau: decode(&t_opts, i % nt) };
                let a = game.ambiguity_matrix(&pair).expect("enumerated pairs follow edges");
                let big: Vec<Vec<BigInt>> = a.iter().map(|row| row.iter().map(|&v| BigInt::from(v)).collect()).collect();
                rank(&big)
            })
            .max()
            .unwrap_or(1);
        (r, true)
    } else if fallback {
        (n, false)
    } else {
        return Err(ParamError::Budget { pairs, budget });
    };
    let nu = nu_bound(n, r, game.w());
    let nu_hat = &nu * BigInt::from(n) * BigInt::from(game.w());
    Ok(RankProfile { r, nu, nu_hat, enumerated })
}

fn is_power_of_two(v: &BigInt) -> bool {
    v.is_positive() && (v & (v - 1u32)).is_zero()
}

/// `log₂ x` when `x` is a power of two, otherwise a rational upper bound
/// on a grid of `2^-20`.
pub fn log2_upper(x: &BigRational) -> BigRational {
    assert!(x.is_positive(), "logarithm of a nonpositive number");
    let (a, b) = (x.numer(), x.denom());
    if is_power_of_two(a) && is_power_of_two(b) {
        let k = a.bits() as i64 - b.bits() as i64;
        return BigRational::from_integer(BigInt::from(k));
    }
    let (_, hi) = ln_bounds(x, 48);
    let (l2_lo, l2_hi) = ln_bounds(&BigRational::from_integer(BigInt::from(2)), 48);
    let v = if hi.is_negative() { hi / l2_hi } else { hi / l2_lo };
    let grid = BigInt::one() << 20u32;
    BigRational::new((v * &grid).ceil().to_integer(), grid)
}

/// `1200·(n³·log₂ max(W, 2) + n²·log₂ δ⁻¹)`.
pub fn cw_norm_bound(n: usize, w: u64, delta: &BigRational) -> BigRational {
    assert!(delta.is_positive() && *delta < BigRational::one(), "delta must lie in (0, 1)");
    let n = BigInt::from(n);
    let lw = log2_upper(&BigRational::from_integer(BigInt::from(w.max(2))));
    let ld = log2_upper(&delta.recip());
    (lw * n.pow(3) + ld * n.pow(2)) * BigInt::from(1200)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSource {
    /// `δ = 1/ν̂` and the closed-form norm bound.
    Theoretical,
    /// Derived from the instance by exact root comparison.
    Certified,
    /// Supplied by the caller and reused at every recursion level.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyParams {
    /// Lower bound on the separation of log values.
    pub delta: BigRational,
    /// Bound on the Hilbert seminorm of approximate eigenvectors of the
    /// top-class restriction.
    pub r: BigRational,
    pub source: ParamSource,
    pub call_limit: Option<u64>,
}

impl EntropyParams {
    pub fn explicit(delta: BigRational, r: BigRational) -> Self {
        EntropyParams { delta, r, source: ParamSource::Explicit, call_limit: None }
    }
}

pub fn theoretical_params(game: &EntropyGame, profile: &RankProfile) -> EntropyParams {
    let delta = BigRational::new(BigInt::one(), profile.nu_hat.clone());
    let r = cw_norm_bound(game.n(), game.w(), &delta);
    EntropyParams { delta, r, source: ParamSource::Theoretical, call_limit: Some(THEORETICAL_CALL_LIMIT) }
}

/// Component matrices of every pair of every dominion subgame.
fn dominion_blocks(game: &EntropyGame, budget: u128) -> Result<Vec<Matrix>, ParamError> {
    let n = game.n();
    if n > MAX_DOMINION_STATES {
        return Err(ParamError::TooManyStates(n));
    }
    let mut seen: HashSet<Matrix> = HashSet::new();
    let mut spent: u128 = 0;
    for bits in 1u32..(1u32 << n) {
        let set: Vec<usize> = (0..n).filter(|&i| bits >> i & 1 == 1).collect();
        if !game.graph_is_dominion(&set) {
            continue;
        }
        let (sub, _) = game.subgame(&set)?;
        let pairs = pair_count(&sub);
        spent = spent.saturating_add(pairs);
        if spent > budget {
            return Err(ParamError::Budget { pairs: spent, budget });
        }
        let (s_opts, t_opts) = strategy_options(&sub);
        let nt = t_opts.iter().fold(1u128, |a, o| a * o.len() as u128);
        let found: Vec<Vec<Matrix>> = (0..pairs)
            .into_par_iter()
            .map(|i| {
                let pair = StrategyPair { sigma: decode(&s_opts, i / nt), tau: decode(&t_opts, i % nt) };
                let a = sub.ambiguity_matrix(&pair).expect("enumerated pairs follow edges");
                let c = Components::new(&a);
                (0..c.comps.len())
                    .filter(|&k| c.reach[k].contains(&k))
                    .map(|k| c.submatrix(&a, k))
                    .collect()
            })
            .collect();
        seen.extend(found.into_iter().flatten());
    }
    let mut v: Vec<Matrix> = seen.into_iter().collect();
    v.sort();
    Ok(v)
}

/// Distinct roots of `blocks` in increasing order, compared exactly.
pub(crate) fn sorted_distinct_roots(blocks: Vec<Matrix>) -> Result<Vec<PerronRoot>, ParamError> {
    let tol = BigRational::new(BigInt::one(), BigInt::one() << 40u32);
    let roots: Vec<PerronRoot> =
        blocks.into_par_iter().map(|m| PerronRoot::new(m, &tol)).collect::<Result<_, _>>()?;
    let mut sorted: Vec<PerronRoot> = Vec::new();
    'next: for mut r in roots {
        for i in 0..sorted.len() {
            match compare_roots(&mut r, &mut sorted[i])? {
                Ordering::Equal => continue 'next,
                Ordering::Less => {
                    sorted.insert(i, r);
                    continue 'next;
                }
                Ordering::Greater => {}
            }
        }
        sorted.push(r);
    }
    Ok(sorted)
}

/// Largest `2^-k ≤ min(1/8, g/2)`, where `g` is a lower bound on the
/// smallest gap between logs of distinct dominion values.
pub fn certified_delta(game: &EntropyGame, budget: u128) -> Result<BigRational, ParamError> {
    let roots = sorted_distinct_roots(dominion_blocks(game, budget)?)?;
    let mut target = BigRational::new(BigInt::one(), BigInt::from(8));
    for w in roots.windows(2) {
        let ratio = &w[1].bracket.lo / &w[0].bracket.hi;
        let (gap, _) = ln_bounds(&ratio, 64);
        target = target.min(gap / BigInt::from(2));
    }
    let mut k: u32 = 3;
    while BigRational::new(BigInt::one(), BigInt::one() << k) > target {
        k += 1;
    }
    Ok(BigRational::new(BigInt::one(), BigInt::one() << k))
}

/// `max(1, ⌈‖x‖_H⌉, ⌈‖y‖_H⌉)` for δ/16-approximate sub- and
/// super-eigenvectors `x`, `y` of the top-class restriction.
pub fn certified_radius(game: &EntropyGame, budget: u128, delta: &BigRational) -> Result<BigRational, ParamError> {
    let brute = brute_force_entropy_values(game, budget)?;
    let (sub, _) = game.subgame(&brute.argmax())?;
    let oracle = LogOracle::new(&sub);
    let d = delta / BigInt::from(16);
    let res = approximate_constant_mean_payoff(&oracle, &d, RADIUS_ITERATIONS)
        .map_err(|e| ParamError::Iteration(e.to_string()))?;
    let norm = |v: &ExtVec<BigInt>| hilbert_seminorm(v).map_err(|e| ParamError::Iteration(e.to_string()));
    let h = norm(&res.sub.vec)?.max(norm(&res.sup.vec)?);
    Ok(BigRational::from_integer(h.ceil().to_integer().max(BigInt::one())))
}

pub fn certified_params(game: &EntropyGame, budget: u128) -> Result<EntropyParams, ParamError> {
    let delta = certified_delta(game, budget)?;
    let r = certified_radius(game, budget, &delta)?;
    Ok(EntropyParams { delta, r, source: ParamSource::Certified, call_limit: None })
}
