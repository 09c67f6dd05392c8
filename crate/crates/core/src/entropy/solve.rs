//! Full solve: top class, constant-value approximation on it, strategy
//! synthesis, then recursion on what remains once the top class and every
//! Tribune and People state that can enter it are removed.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use super::oracle::{exp_interval, people_scores, LogOracle};
use super::params::{certified_params, rank_profile, theoretical_params, EntropyParams, ParamError};
use super::{Embedding, EntropyError, EntropyGame, StrategyPair};
use crate::dominion::{top_class, DominionError, SepParams};
use crate::logexp::bits_for;
use crate::numeric::{ExtVec, RationalInterval};
use crate::shapley::Counting;
use crate::value_iteration::{approximate_constant_mean_payoff, ceil_u64, Certificate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntropySolveError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Dominion(#[from] DominionError),
    #[error(transparent)]
    Game(#[from] EntropyError),
    #[error("constant-value iteration: {0}")]
    Iteration(String),
}

/// How `δ` and `R` are chosen at each level of the decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamRequest {
    Theoretical,
    Certified,
    Explicit(EntropyParams),
}

/// One top class of the decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyBlock {
    /// Despot states, Tribune and People states of the block, as indices of
    /// the input game.
    pub states: Vec<usize>,
    pub t_states: Vec<usize>,
    pub p_states: Vec<usize>,
    /// The block as a game; certificates are indexed by its Despot states.
    pub game: EntropyGame,
    /// Encloses the log of the common value.
    pub log_interval: RationalInterval<BigInt>,
    /// Encloses the common value.
    pub value_interval: RationalInterval<BigInt>,
    pub sub: Certificate<BigInt>,
    pub sup: Certificate<BigInt>,
    pub top_class_calls: u64,
    pub constant_calls: u64,
    pub iterations: u64,
    /// Iteration cap of the constant-value stage.
    pub cap: u64,
    pub params: EntropyParams,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropySolution {
    pub values: Vec<RationalInterval<BigInt>>,
    pub log_values: Vec<RationalInterval<BigInt>>,
    pub strategies: StrategyPair,
    /// Blocks in order of decreasing value.
    pub blocks: Vec<EntropyBlock>,
}

impl EntropySolution {
    pub fn oracle_calls(&self) -> u64 {
        self.blocks.iter().map(|b| b.top_class_calls + b.constant_calls).sum()
    }
}

fn compose(outer: &Embedding, inner: &Embedding) -> Embedding {
    Embedding {
        d: inner.d.iter().map(|&i| outer.d[i]).collect(),
        t: inner.t.iter().map(|&i| outer.t[i]).collect(),
        p: inner.p.iter().map(|&i| outer.p[i]).collect(),
    }
}

fn pick<F: Fn(&BigRational, &BigRational) -> bool>(
    options: &[usize],
    score: impl Fn(usize) -> BigRational,
    better: F,
) -> usize {
    let mut best = options[0];
    let mut val = score(best);
    for &o in &options[1..] {
        let v = score(o);
        if better(&v, &val) {
            best = o;
            val = v;
        }
    }
    best
}

/// Despot plays `argmin_t max_p Q_p(y)` and Tribune `argmax_p Q_p(x)`, with
/// `Q` accurate to `eps` and ties to the smallest index.
fn extract(game: &EntropyGame, x: &ExtVec<BigInt>, y: &ExtVec<BigInt>, eps: &BigRational) -> StrategyPair {
    let qx = people_scores(game, x, eps);
    let qy = people_scores(game, y, eps);
    let fin = |q: &Option<BigRational>| q.clone().expect("subgame scores are finite");
    let tau: Vec<usize> =
        game.t_adj.iter().map(|adj| pick(adj, |p| fin(&qx[p]), |a, b| a > b)).collect();
    let tribune_y = |t: usize| game.t_adj[t].iter().map(|&p| fin(&qy[p])).max().expect("nonempty");
    let sigma: Vec<usize> = game.d_adj.iter().map(|adj| pick(adj, tribune_y, |a, b| a < b)).collect();
    StrategyPair { sigma, tau }
}

fn params_for(game: &EntropyGame, req: &ParamRequest, budget: u128) -> Result<EntropyParams, ParamError> {
    match req {
        ParamRequest::Theoretical => Ok(theoretical_params(game, &rank_profile(game, budget, true)?)),
        ParamRequest::Certified => certified_params(game, budget),
        ParamRequest::Explicit(p) => Ok(p.clone()),
    }
}

/// Solves by repeated top-class extraction. `budget` bounds strategy-pair
/// enumeration inside the parameter provider.
pub fn solve_entropy_game(
    game: &EntropyGame,
    req: &ParamRequest,
    budget: u128,
) -> Result<EntropySolution, EntropySolveError> {
    let n = game.n();
    let mut sigma = vec![usize::MAX; n];
    let mut tau = vec![usize::MAX; game.t_ids.len()];
    let mut values = vec![None; n];
    let mut log_values = vec![None; n];
    let mut blocks = Vec::new();
    let mut cur = game.clone();
    let mut map = Embedding { d: (0..n).collect(), t: (0..game.t_ids.len()).collect(), p: (0..game.p_ids.len()).collect() };
    loop {
        let params = params_for(&cur, req, budget)?;
        let mut sep = SepParams::new(params.delta.clone(), params.r.clone())?;
        if let Some(c) = params.call_limit {
            sep = sep.with_call_limit(c);
        }
        let oracle = Counting::new(LogOracle::new(&cur));
        let tc = top_class(&oracle, &sep)?;
        let (sub, emb) = cur.subgame(&tc.states)?;
        let half = &params.delta / BigInt::from(2);
        let mut cap = ceil_u64(&(&params.r * BigInt::from(16) / &params.delta)).saturating_add(1);
        if let Some(c) = params.call_limit {
            cap = cap.min(c);
        }
        let so = Counting::new(LogOracle::new(&sub));
        let cv = approximate_constant_mean_payoff(&so, &half, cap)
            .map_err(|e| EntropySolveError::Iteration(e.to_string()))?;
        let eighth = &params.delta / BigInt::from(8);
        let local = extract(&sub, &cv.sub.vec, &cv.sup.vec, &eighth);
        let sixteenth = &params.delta / BigInt::from(16);
        let log_iv = RationalInterval { lo: &cv.interval.lo - &sixteenth, hi: &cv.interval.hi + &sixteenth };
        let (vlo, vhi) = exp_interval(&log_iv.lo, &log_iv.hi, bits_for(&params.delta) + 24);
        let value_iv = RationalInterval { lo: vlo.max(BigRational::one()), hi: vhi };
        let constant_calls = so.calls();
        let full = compose(&map, &emb);
        for (k, &d) in full.d.iter().enumerate() {
            sigma[d] = full.t[local.sigma[k]];
            values[d] = Some(value_iv.clone());
            log_values[d] = Some(log_iv.clone());
        }
        for (k, &t) in full.t.iter().enumerate() {
            tau[t] = full.p[local.tau[k]];
        }
        blocks.push(EntropyBlock {
            states: full.d.clone(),
            t_states: full.t.clone(),
            p_states: full.p.clone(),
            game: sub,
            log_interval: log_iv,
            value_interval: value_iv,
            sub: cv.sub,
            sup: cv.sup,
            top_class_calls: oracle.calls(),
            constant_calls,
            iterations: cv.iterations,
            cap,
            params,
        });
        if tc.states.len() == cur.n() {
            break;
        }
        let (rest, emb) = cur.remainder(&tc.states)?;
        map = compose(&map, &emb);
        cur = rest;
    }
    Ok(EntropySolution {
        values: values.into_iter().map(|v| v.expect("every state is in a block")).collect(),
        log_values: log_values.into_iter().map(|v| v.expect("every state is in a block")).collect(),
        strategies: StrategyPair { sigma, tau },
        blocks,
    })
}
