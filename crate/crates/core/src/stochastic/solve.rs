//! Bounds and solvers for stochastic mean-payoff games.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::Zero;
use thiserror::Error;

use super::{int, GameStats, RoundingOracle, StochasticGame, StrategyPair};
use crate::dominion::{top_class, DominionError, SepParams};
use crate::numeric::{rational_in_interval, Ext, ExtVec, Int, RationalInterval, RationalSearch, Q};
use crate::shapley::{restrict, Counting, ShapleyOracle};
use crate::value_iteration::{
    approximate_constant_mean_payoff, value_iteration, Certificate, ViError, Winner,
};

use super::oracle::{ExactBigOracle, ExactOracle};

/// Largest `μ` for which the 128-bit solvers are used.
pub const MAX_MU: i128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("instance too large for 128-bit arithmetic (mu = n*M^min(s,n-1) above 2^20)")]
    TooLarge,
    #[error("value depends on the initial state: no rational of denominator <= {mu} in {interval}")]
    NotConstant { mu: i128, interval: String },
    #[error("state set is not a dominion")]
    NotDominion,
    #[error(transparent)]
    Vi(#[from] ViError<i128>),
    #[error(transparent)]
    Dominion(#[from] DominionError),
}

fn mu(stats: &GameStats) -> Result<i128, SolveError> {
    match stats.mu {
        Some(m) if m <= MAX_MU => Ok(m),
        _ => Err(SolveError::TooLarge),
    }
}

/// `1/μ²`.
pub fn separation_bound(stats: &GameStats) -> Option<Q> {
    let m = stats.mu?;
    Some(Ratio::new(1, m.checked_mul(m)?))
}

/// `8·n·W·M^min{s,n−1}`.
pub fn bias_norm_bound(stats: &GameStats) -> Option<Q> {
    let v = (8 * stats.n as i128).checked_mul(stats.w as i128)?.checked_mul(stats.m_pow(1)?)?;
    Some(Q::from_integer(v))
}

/// `8n²WM^{2 min{s,n−1}} + 1`, saturating.
pub fn winner_cap(stats: &GameStats) -> u64 {
    let n = stats.n as i128;
    let v = stats
        .m_pow(2)
        .and_then(|p| (8 * n * n).checked_mul(stats.w as i128)?.checked_mul(p));
    v.and_then(|v| u64::try_from(v).ok()).map_or(u64::MAX, |v| v.saturating_add(1))
}

/// `65n⁴·max(W,1)·M^{3 min{s,n−1}}`.
pub fn top_class_call_budget(stats: &GameStats) -> Option<i128> {
    let n = stats.n as i128;
    (65 * n * n * n * n).checked_mul(stats.w.max(1) as i128)?.checked_mul(stats.m_pow(3)?)
}

/// `128n³·max(W,1)·M^{3 min{s,n−1}}`.
pub fn constant_value_call_budget(stats: &GameStats) -> Option<i128> {
    let n = stats.n as i128;
    (128 * n * n * n).checked_mul(stats.w.max(1) as i128)?.checked_mul(stats.m_pow(3)?)
}

/// Exact value iteration capped at [`winner_cap`]. Iterates are exact
/// rationals of unbounded size; the reported vector is reduced.
pub fn winner(game: &StochasticGame) -> Winner<BigInt> {
    let cap = winner_cap(&game.stats());
    let reduce = |v: ExtVec<BigInt>| {
        ExtVec(v.0.into_iter().map(|e| match e {
            Ext::Fin(r) => Ext::Fin(r.reduced()),
            e => e,
        }).collect())
    };
    match value_iteration::<BigInt, _>(&ExactBigOracle::new(game), cap).expect("exact oracle on a valid game") {
        Winner::Decided(mut v) => {
            v.witness = reduce(v.witness);
            Winner::Decided(v)
        }
        Winner::Exhausted { iterations, last } => Winner::Exhausted { iterations, last: reduce(last) },
    }
}

/// The recession operator: payoffs dropped.
pub fn recession_eval<I: Int>(game: &StochasticGame, x: &ExtVec<I>) -> ExtVec<I> {
    let zero = StochasticGame {
        min_adj: game.min_adj.iter().map(|a| a.iter().map(|&(i, _)| (i, 0)).collect()).collect(),
        max_adj: game.max_adj.iter().map(|a| a.iter().map(|&(k, _)| (k, 0)).collect()).collect(),
        ..game.clone()
    };
    zero.eval_unchecked(x)
}

/// Value, optimal strategies and certificates of a game whose value does
/// not depend on the initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantValue {
    pub value: Q,
    pub interval: RationalInterval<i128>,
    pub strategies: StrategyPair,
    pub sub: Certificate<i128>,
    pub sup: Certificate<i128>,
    pub iterations: u64,
    pub oracle_calls: u64,
}

fn argbest<T: Ord>(items: impl Iterator<Item = (usize, T)>, want_max: bool) -> usize {
    let mut best: Option<(usize, T)> = None;
    for (id, v) in items {
        let better = match &best {
            None => true,
            Some((_, b)) => {
                if want_max {
                    v > *b
                } else {
                    v < *b
                }
            }
        };
        if better {
            best = Some((id, v));
        }
    }
    best.expect("nonempty move list").0
}

/// `τ(i)` maximizes `B_ik + Σ P_kl x_l` at the sub-eigenvector, `σ(j)`
/// minimizes `−A_ij + max_k(…)` at the super-eigenvector. Ties go to the
/// smallest index.
pub fn extract_strategies(game: &StochasticGame, x: &ExtVec<i128>, y: &ExtVec<i128>) -> StrategyPair {
    let tau = game
        .max_adj
        .iter()
        .map(|adj| {
            argbest(
                adj.iter().map(|&(k, b)| (k, game.nature_value(k, x).add_fin(&Q::from_integer(int(b))))),
                true,
            )
        })
        .collect();
    let sigma = game
        .min_adj
        .iter()
        .map(|adj| {
            argbest(
                adj.iter().map(|&(i, a)| (i, game.max_value(i, y).add_fin(&Q::from_integer(int(-a))))),
                false,
            )
        })
        .collect();
    StrategyPair { sigma, tau }
}

fn first_loop_cap(stats: &GameStats, delta: &Q) -> Result<u64, SolveError> {
    let r = bias_norm_bound(stats).ok_or(SolveError::TooLarge)?;
    let steps = (Q::from_integer(8) * r / delta).ceil().to_integer();
    Ok(u64::try_from(steps).map_err(|_| SolveError::TooLarge)?.max(1))
}

/// Approximates with `δ = 1/μ²` on the rounding oracle of precision
/// `1/(8μ²)`, recovers the value as the unique rational of denominator at
/// most `μ`, and reads optimal strategies off the certificates.
pub fn solve_constant_value(game: &StochasticGame) -> Result<ConstantValue, SolveError> {
    let stats = game.stats();
    let mu = mu(&stats)?;
    let delta = Ratio::new(1, mu * mu);
    let cap = first_loop_cap(&stats, &delta)?;
    let oracle = Counting::new(RoundingOracle::new(game, (4 * mu * mu) as u64));
    let res = match approximate_constant_mean_payoff(&oracle, &delta, cap) {
        Ok(r) => r,
        Err(ViError::IterationCap { .. }) => {
            return Err(SolveError::NotConstant { mu, interval: "the first loop cap".into() })
        }
        Err(e) => return Err(e.into()),
    };
    let value = match rational_in_interval(&res.interval, &mu) {
        Ok(RationalSearch::Found(v)) => v,
        _ => return Err(SolveError::NotConstant { mu, interval: res.interval.to_string() }),
    };
    let strategies = extract_strategies(game, &res.sub.vec, &res.sup.vec);
    Ok(ConstantValue {
        value,
        interval: res.interval,
        strategies,
        sub: res.sub,
        sup: res.sup,
        iterations: res.iterations,
        oracle_calls: oracle.calls(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopClassResult {
    /// Min states of maximal value, ascending.
    pub states: Vec<usize>,
    pub chain: Vec<Vec<usize>>,
    pub decide_iterations: Vec<u64>,
    pub oracle_calls: u64,
    pub delta: Q,
    pub r: Q,
}

/// Top class with `δ = 1/μ²`, `R = 8nWM^{min{s,n−1}}` and oracle precision
/// `1/(8μ²)`.
pub fn solve_top_class(game: &StochasticGame) -> Result<TopClassResult, SolveError> {
    let stats = game.stats();
    let mu = mu(&stats)?;
    let delta = Ratio::new(1, mu * mu);
    let r = bias_norm_bound(&stats).ok_or(SolveError::TooLarge)?;
    first_loop_cap(&stats, &delta)?;
    let params = SepParams::new(delta, r)?;
    let oracle = Counting::new(RoundingOracle::new(game, (4 * mu * mu) as u64));
    let tc = top_class(&oracle, &params)?;
    Ok(TopClassResult {
        states: tc.states,
        chain: tc.chain,
        decide_iterations: tc.decide_iterations,
        oracle_calls: oracle.calls(),
        delta,
        r,
    })
}

/// Nature states whose support lies in `set`, and Max states with at least
/// one such successor.
fn closed_parts(game: &StochasticGame, set: &[usize]) -> (Vec<bool>, Vec<bool>) {
    let mut in_set = vec![false; game.n()];
    for &j in set {
        in_set[j] = true;
    }
    let nat_ok: Vec<bool> = game.nat_adj.iter().map(|a| a.iter().all(|&(l, _)| in_set[l])).collect();
    let max_ok: Vec<bool> = game.max_adj.iter().map(|a| a.iter().any(|&(k, _)| nat_ok[k])).collect();
    (nat_ok, max_ok)
}

/// Graph characterization: every Min edge leaving `set` ends in a Max state
/// that can move to a Nature state supported inside `set`.
pub fn graph_is_dominion(game: &StochasticGame, set: &[usize]) -> bool {
    if set.is_empty() {
        return false;
    }
    let (_, max_ok) = closed_parts(game, set);
    set.iter().all(|&j| game.min_adj[j].iter().all(|&(i, _)| max_ok[i]))
}

/// The game played on a dominion `set`: Min states of `set` with their
/// moves, the Max states they reach restricted to moves into Nature states
/// supported in `set`. Returns the game and the Max and Nature index maps.
pub fn subgame(game: &StochasticGame, set: &[usize]) -> Result<(StochasticGame, Vec<usize>, Vec<usize>), SolveError> {
    if !graph_is_dominion(game, set) {
        return Err(SolveError::NotDominion);
    }
    let (nat_ok, _) = closed_parts(game, set);
    let mut min_pos = vec![usize::MAX; game.n()];
    for (p, &j) in set.iter().enumerate() {
        min_pos[j] = p;
    }
    let mut max_pos = vec![usize::MAX; game.max_ids.len()];
    let mut max_list = Vec::new();
    for &j in set {
        for &(i, _) in &game.min_adj[j] {
            if max_pos[i] == usize::MAX {
                max_pos[i] = 0;
            }
        }
    }
    for (i, p) in max_pos.iter_mut().enumerate() {
        if *p == 0 {
            *p = max_list.len();
            max_list.push(i);
        }
    }
    let mut nat_pos = vec![usize::MAX; game.nat_ids.len()];
    let mut nat_list = Vec::new();
    for &i in &max_list {
        for &(k, _) in &game.max_adj[i] {
            if nat_ok[k] && nat_pos[k] == usize::MAX {
                nat_pos[k] = 0;
            }
        }
    }
    for (k, p) in nat_pos.iter_mut().enumerate() {
        if *p == 0 {
            *p = nat_list.len();
            nat_list.push(k);
        }
    }
    let sub = StochasticGame {
        min_ids: set.iter().map(|&j| game.min_ids[j].clone()).collect(),
        max_ids: max_list.iter().map(|&i| game.max_ids[i].clone()).collect(),
        nat_ids: nat_list.iter().map(|&k| game.nat_ids[k].clone()).collect(),
        min_adj: set
            .iter()
            .map(|&j| game.min_adj[j].iter().map(|&(i, a)| (max_pos[i], a)).collect())
            .collect(),
        max_adj: max_list
            .iter()
            .map(|&i| {
                game.max_adj[i]
                    .iter()
                    .filter(|&&(k, _)| nat_ok[k])
                    .map(|&(k, b)| (nat_pos[k], b))
                    .collect()
            })
            .collect(),
        nat_adj: nat_list
            .iter()
            .map(|&k| game.nat_adj[k].iter().map(|&(l, p)| (min_pos[l], p)).collect())
            .collect(),
        denominator: game.denominator,
    }
    .validated()
    .map_err(|_| SolveError::NotDominion)?;
    Ok((sub, max_list, nat_list))
}

/// Top class, then its value, strategies and certificates from the
/// subgame on the top class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullSolution {
    pub top: TopClassResult,
    pub value: ConstantValue,
    /// Max states of the original game indexed by the subgame.
    pub max_states: Vec<usize>,
    /// `sigma[p]` / `tau[p]` in original indices, for the subgame's states.
    pub sigma: Vec<usize>,
    pub tau: Vec<usize>,
    pub nat_states: Vec<usize>,
}

pub fn solve_full(game: &StochasticGame) -> Result<FullSolution, SolveError> {
    let top = solve_top_class(game)?;
    let (sub, max_list, nat_list) = subgame(game, &top.states)?;
    let value = solve_constant_value(&sub)?;
    let sigma = value.strategies.sigma.iter().map(|&p| max_list[p]).collect();
    let tau = value.strategies.tau.iter().map(|&p| nat_list[p]).collect();
    Ok(FullSolution { top, value, max_states: max_list, sigma, tau, nat_states: nat_list })
}

/// Exact check of a certificate against the restriction of the operator to
/// `subset` (all Min states when `None`).
pub fn verify_certificate(
    game: &StochasticGame,
    subset: Option<&[usize]>,
    cert: &Certificate<i128>,
) -> Result<(), crate::value_iteration::Violation<i128>> {
    let oracle = ExactOracle::new(game);
    match subset {
        None => cert.verify(|v| game.eval_unchecked(v)),
        Some(s) => {
            let r = restrict::<i128, _>(&oracle, s).expect("valid subset");
            cert.verify(|v| ShapleyOracle::<i128>::eval(&r, v, &Q::zero()))
        }
    }
}
